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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ulab/optics.hpp"
#include "ulab/qmath.hpp"

namespace ulab::compiler {

using optics::Circuit;
using qmath::CMatrix;
using qmath::QState;

enum class Ordering { Ascending, Descending };

struct MeasurementSetting {
  CMatrix observable;
  std::vector<double> eigenvalues;  // per output index
  CMatrix basis;                    // row i is <m_i|
  std::string label;

  int dim() const { return basis.dim(); }
  // Outputs sharing an eigenvalue (within 1e-9), in output order.
  std::vector<std::vector<int>> outcome_groups() const;
  // Exactly one nonzero eigenvalue.
  std::optional<int> witness_index() const;
};

// Throws NotHermitian.
CMatrix measurement_unitary(const CMatrix& m, Ordering ordering = Ordering::Ascending);
MeasurementSetting measurement_setting(const CMatrix& m, std::string label,
                                       Ordering ordering = Ordering::Ascending);
// Explicit basis rows; throws InvalidArgument if not unitary.
MeasurementSetting setting_from_basis(const CMatrix& basis,
                                      std::vector<double> eigenvalues,
                                      std::string label);

struct ThreeStage {
  CMatrix u1, u2, u3;  // U = u3 u2 u1; u1, u3 on modes (1,2), u2 on (0,1)
};

// u2 is a rotation with sin >= 0 (branch = +1) or <= 0 (branch = -1) and
// u1 a reflection; when u2 is diagonal, u1 defaults to diag(1,1,-1).
// Throws ComplexNotSupported.
ThreeStage decompose_three_stage(const CMatrix& u, int branch = 1);
ThreeStage decompose_three_stage(const CMatrix& u, int branch,
                                 const std::optional<CMatrix>& u1_if_free);

// [[c, s], [s, -c]] -> atan2(s, c)/2 in degrees, folded to (-90, 90].
// Throws NotReflection.
double solve_hwp_angle(const CMatrix& block);

enum class Slot { Q1, H2, H3, H4, Q4, H5, Q5, H6, H7 };
inline constexpr std::size_t kSlotCount = 9;
std::string_view slot_name(Slot s);
std::optional<Slot> slot_from_name(std::string_view name);
bool is_qwp(Slot s);

class PlateSettings {
 public:
  PlateSettings() = default;
  PlateSettings(std::initializer_list<std::pair<Slot, double>> xs);

  std::optional<double> get(Slot s) const { return a_[static_cast<int>(s)]; }
  bool has(Slot s) const { return a_[static_cast<int>(s)].has_value(); }
  void set(Slot s, double deg) { a_[static_cast<int>(s)] = deg; }
  void clear(Slot s) { a_[static_cast<int>(s)].reset(); }

  bool operator==(const PlateSettings&) const = default;

 private:
  std::array<std::optional<double>, kSlotCount> a_{};
};

// Sum over slots of the angular distance modulo 180 degrees; a plate
// present in only one of the two costs 1000.
double plate_distance(const PlateSettings& a, const PlateSettings& b);

// dim 3: H3 (d), H2 (u), BD(H-up), H4/Q4 (u), H5/Q5 (d), BD(V-down),
// H6 (u), H7 (d). dim 2: Q1 (u), H2 (u), BD(V-down).
Circuit build_circuit(const PlateSettings& plates, int dim,
                      const optics::Readout& readout);
Circuit build_circuit(const PlateSettings& plates, int dim);

enum class Scope { All, Family, Point };
std::string_view scope_name(Scope s);

struct AngleSolution {
  int dim = 3;
  PlateSettings plates;
  double residual = 0.0;
  Scope scope = Scope::All;
  std::optional<double> point_phi;
  bool spatial_readout = false;
  std::vector<double> eigenvalues;  // per circuit output
  std::string strategy;
  std::string label;
};

struct CompiledMeasurement {
  Circuit circuit;
  AngleSolution solution;
  MeasurementSetting setting;  // rows permuted to the circuit outputs
};

struct CompileOptions {
  std::optional<PlateSettings> anchor;
  bool allow_output_permutation = false;
  // Enables single-state witness layouts for this family angle.
  std::optional<double> point_phi;
};

inline constexpr double kResidualTol = 1e-6;

// Throws NotCompilable.
CompiledMeasurement compile_measurement(const MeasurementSetting& setting,
                                        const CompileOptions& options = {});

// Max over inputs and eigenvalue groups of the probability deviation.
double verify_circuit(const Circuit& circuit, const MeasurementSetting& setting,
                      const std::vector<QState>& inputs);

// Deterministic verification inputs for a scope.
std::vector<QState> scope_inputs(Scope scope, int dim,
                                 std::optional<double> point_phi = std::nullopt);

}  // namespace ulab::compiler
