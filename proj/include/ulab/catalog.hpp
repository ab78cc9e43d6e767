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

#include "ulab/compiler.hpp"

namespace ulab::compiler {

// Named observables of the spin-1 and qubit experiments.
//   dim 3: Jx Jx2 Jy Jy2 Jz C+ C- C D comm
//   dim 2: sigma_x sigma_x2 sigma_y sigma_y2 sigma_z C+ C- C D comm
// "C" takes its sign from the family grouping (dim 3) or the sign rule
// (dim 2); "comm" is i[A,B].
struct CatalogRequest {
  int dim = 3;
  std::string name;
  std::optional<double> phi;
  std::optional<int> k;  // orthogonal family index for C; none = optimal
  bool anchored = true;  // prefer the published bench settings
};

struct CatalogEntry {
  MeasurementSetting setting;
  CompileOptions options;
  int sign = 0;  // for C
};

std::vector<std::string> catalog_names(int dim);
// Throws InvalidArgument for unknown names or missing phi.
CatalogEntry catalog_entry(const CatalogRequest& req);
CompiledMeasurement compile_catalog(const CatalogRequest& req);

// Published bench settings, when one exists for the request.
std::optional<PlateSettings> bench_anchor(const CatalogRequest& req);

// Index j when phi = j pi/12 (j = 1..12) within 1e-9.
std::optional<int> twelfth_index(double phi);

}  // namespace ulab::compiler
