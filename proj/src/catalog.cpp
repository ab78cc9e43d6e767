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

#include "ulab/catalog.hpp"

#include <cmath>
#include <numbers>

#include "ulab/error.hpp"
#include "ulab/relations.hpp"

namespace ulab::compiler {

namespace {

constexpr double kPi = std::numbers::pi;

// Bench H6/H7 for C with orthogonal family state k at phi = j pi/12.
struct WitnessRow {
  double h6, h7;
};

constexpr WitnessRow kWitnessBench[12][3] = {
    {{-32.93, -45}, {-37.74, -45}, {-40.75, -45}},
    {{-24.55, -45}, {-31.72, -45}, {-36.95, -45}},
    {{-19.62, -45}, {-27.37, -45}, {-33.90, -45}},
    {{0, -69.55}, {0, -76.72}, {0, -81.95}},
    {{0, -77.92}, {0, -82.74}, {0, -85.75}},
    {{0, -45}, {0, -45}, {0, -45}},
    {{0, -77.92}, {0, -82.74}, {0, -85.75}},
    {{0, -69.55}, {0, -76.72}, {0, -81.95}},
    {{0, -64.62}, {0, -72.37}, {0, -78.90}},
    {{-24.55, -45}, {-31.72, -45}, {36.95, -45}},
    {{-32.93, -45}, {-37.74, -45}, {-40.75, -45}},
    {{-45, -45}, {-45, -45}, {-45, -45}},
};

PlateSettings qutrit_bench(double h3, double h4, double h7) {
  return {{Slot::H2, 45}, {Slot::H3, h3}, {Slot::H4, h4},
          {Slot::H5, 45}, {Slot::H6, 0},  {Slot::H7, h7}};
}

double phi_or(const CatalogRequest& req, double fallback) {
  return req.phi.value_or(fallback);
}

double require_phi(const CatalogRequest& req) {
  if (!req.phi) {
    throw Error(ErrorCode::InvalidArgument, req.name + " needs --phi");
  }
  return *req.phi;
}

std::string canonical_name(const CatalogRequest& req) {
  std::string n = req.name;
  if (req.dim == 2 && n.rfind("sigma_", 0) != 0 &&
      (n == "x" || n == "y" || n == "z" || n == "x2" || n == "y2")) {
    n = "sigma_" + n;
  }
  return n;
}

}  // namespace

std::vector<std::string> catalog_names(int dim) {
  if (dim == 2) {
    return {"sigma_x", "sigma_x2", "sigma_y", "sigma_y2", "sigma_z",
            "C+",      "C-",       "C",       "D",        "comm"};
  }
  return {"Jx", "Jx2", "Jy", "Jy2", "Jz", "C+", "C-", "C", "D", "comm"};
}

std::optional<int> twelfth_index(double phi) {
  const double j = phi * 12 / kPi;
  const double r = std::round(j);
  if (std::abs(j - r) > 1e-9 * 12 / kPi || r < 1 || r > 12) return std::nullopt;
  return static_cast<int>(r);
}

std::optional<PlateSettings> bench_anchor(const CatalogRequest& req) {
  const std::string n = canonical_name(req);
  if (req.dim == 3) {
    if (n == "Jx") return qutrit_bench(-17.63, 75, -62.63);
    if (n == "Jx2") return qutrit_bench(90, 0, 22.5);
    if (n == "Jy") return qutrit_bench(17.63, -15, -62.63);
    if (n == "Jy2") return qutrit_bench(90, 90, 22.5);
    if (n == "Jz" || n == "comm") return qutrit_bench(0, 45, -45);
    if (n == "D") {
      return PlateSettings{{Slot::H2, 45}, {Slot::H3, 45}, {Slot::Q4, 45},
                           {Slot::Q5, 45}, {Slot::H6, 0},  {Slot::H7, -90}};
    }
    if (n == "C+" || n == "C-" || n == "C") {
      if (!req.k) return qutrit_bench(0, 45, -45);
      if (!req.phi) return std::nullopt;
      const auto j = twelfth_index(*req.phi);
      if (!j || *req.k < 1 || *req.k > 3) return std::nullopt;
      const WitnessRow w = kWitnessBench[*j - 1][*req.k - 1];
      return PlateSettings{{Slot::H2, 45}, {Slot::H3, 0},  {Slot::H4, 45},
                           {Slot::H5, 45}, {Slot::H6, w.h6}, {Slot::H7, w.h7}};
    }
    return std::nullopt;
  }
  if (n == "sigma_x") return PlateSettings{{Slot::H2, 22.5}};
  if (n == "sigma_y") return PlateSettings{{Slot::Q1, 90}, {Slot::H2, 22.5}};
  if (n == "sigma_x2" || n == "sigma_y2" || n == "sigma_z" || n == "comm" ||
      n == "C+" || n == "C-" || n == "C") {
    return PlateSettings{{Slot::H2, 0}};
  }
  if (n == "D" && req.phi) {
    return PlateSettings{{Slot::Q1, 90},
                         {Slot::H2, (*req.phi - kPi / 2) / 2 * 180 / kPi}};
  }
  return std::nullopt;
}

CatalogEntry catalog_entry(const CatalogRequest& req) {
  if (req.dim != 2 && req.dim != 3) {
    throw Error(ErrorCode::InvalidArgument, "dim must be 2 or 3");
  }
  const std::string n = canonical_name(req);
  const relations::StandardObservables so = relations::standard_observables(req.dim);
  const relations::ObservablePair pair = relations::standard_pair(req.dim);
  CatalogEntry e;
  const std::string prefix = req.dim == 3 ? "J" : "sigma_";
  auto observable = [&]() -> std::optional<CMatrix> {
    if (n == prefix + "x" || (req.dim == 3 && n == "Jx")) return so.a;
    if (n == prefix + "y") return so.b;
    if (n == prefix + "z") return so.z;
    if (n == prefix + "x2") return so.a * so.a;
    if (n == prefix + "y2") return so.b * so.b;
    if (n == "comm") return pair.i_commutator();
    return std::nullopt;
  }();
  if (observable) {
    e.setting = measurement_setting(*observable, n);
  } else if (n == "C+" || n == "C-" || n == "C") {
    const bool needs_phi = req.k.has_value() || req.dim == 2 || n == "C";
    const double phi = needs_phi ? require_phi(req) : phi_or(req, kPi / 12);
    const QState psi = relations::family_state(phi, req.dim);
    if (n == "C") {
      e.sign = req.dim == 3 ? relations::family_sign(phi)
                            : relations::sign_rule(pair, psi);
    } else {
      e.sign = n == "C+" ? 1 : -1;
    }
    const relations::OrthogonalChoice perp =
        req.k ? relations::orthogonal_family(phi, *req.k)
              : relations::optimal_orthogonal(pair, psi, e.sign);
    const std::string label = std::string(e.sign > 0 ? "C+" : "C-") + "(" +
                              perp.tag() + ")";
    e.setting = measurement_setting(relations::c_operator(pair, perp.state, e.sign),
                                    label);
    if (req.k) e.options.point_phi = phi;
  } else if (n == "D") {
    const double phi = req.dim == 2 ? require_phi(req) : phi_or(req, kPi / 12);
    const relations::DOperator d =
        relations::d_operator(pair, relations::family_state(phi, req.dim));
    e.setting = measurement_setting(d.d, "D");
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown observable '" + req.name + "' for dim " +
                    std::to_string(req.dim));
  }
  if (req.anchored) {
    e.options.anchor = bench_anchor(req);
    e.options.allow_output_permutation = e.options.anchor.has_value();
  }
  return e;
}

CompiledMeasurement compile_catalog(const CatalogRequest& req) {
  const CatalogEntry e = catalog_entry(req);
  return compile_measurement(e.setting, e.options);
}

}  // namespace ulab::compiler
