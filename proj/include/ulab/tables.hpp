// Copyright 2026 The uncertainty-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ulab/compiler.hpp"

namespace ulab::compiler {

// Angles are compared after rounding to two decimals.
inline constexpr double kAngleTol = 0.005;

double round2(double deg);
bool angles_match(double solved, double published);
bool plates_match(const PlateSettings& solved, const PlateSettings& published);

// "-" for an absent plate, otherwise two decimals.
std::string format_angle(std::optional<double> deg);

struct PreparationRow {
  int j = 0;  // phi = j pi/12
  double phi = 0.0;
  double solved = 0.0;
  double published = 0.0;
  double residual = 0.0;  // prepared state vs psi_phi
  bool matches = false;
};

struct TableRow {
  std::string observable;
  std::optional<int> j;
  PlateSettings solved;
  PlateSettings published;
  double residual = 0.0;
  Scope scope = Scope::All;
  std::string strategy;
  bool certified = false;
  bool matches = false;
  std::string note;
};

struct AngleTables {
  std::vector<PreparationRow> preparation;  // Table I
  std::vector<TableRow> qutrit;             // Table II
  std::vector<TableRow> qubit;              // Table III
};

AngleTables angle_tables();

std::string phi_label(int j);

enum class TableFormat { Text, Csv, Json };
TableFormat table_format_from_name(std::string_view name);

// which: 0 for all tables, otherwise 1, 2 or 3.
std::string render_tables(const AngleTables& t, TableFormat format, int which = 0);

std::string render_solution(const CompiledMeasurement& c, TableFormat format);
nlohmann::json solution_to_json(const CompiledMeasurement& c);

}  // namespace ulab::compiler
