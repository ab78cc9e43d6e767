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

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "ulab/catalog.hpp"
#include "ulab/experiment.hpp"
#include "ulab/optics.hpp"
#include "ulab/relations.hpp"
#include "ulab/tables.hpp"

using namespace ulab;
using namespace ulab::relations;
using qmath::CMatrix;
using qmath::CVector;
using qmath::QState;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> twelve() { return experiment::twelve_phis(); }

Outcome constant_lhs() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = experiment::run_sweep(experiment::default_config(3));
  const double secs = seconds_since(t0);
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.lhs_sum.exact - 1));
  o.require(rows.size() == 12, "expected 12 rows");
  o.require(worst <= 1e-12, fmt::format("max |lhs - 1| = {:.3g}", worst));
  o.require(secs < 1.0, fmt::format("exact sweep took {:.3f} s", secs));
  if (o.pass) o.detail = fmt::format("max |lhs - 1| = {:.2g}, {:.3f} s", worst, secs);
  return o;
}

Outcome saturation() {
  Outcome o;
  const ObservablePair p = standard_pair(3);
  const QState perp = QState::from(CVector{0, 1, 0});
  double worst = 0;
  for (double phi : twelve()) {
    const QState psi = family_state(phi, 3);
    const Mp1 m = mp1_bound(p, psi, custom_orthogonal(perp), family_sign(phi));
    const BoundReport r = evaluate_family(3, phi, {OrthogonalRequest::optimal()});
    worst = std::max({worst, std::abs(m.bound - 1), std::abs(r.find("opt")->bound - 1)});
  }
  o.require(worst <= 1e-10, fmt::format("max |mp1 - 1| = {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("max |mp1(opt) - 1| = {:.2g}", worst);
  return o;
}

Outcome constant_d() {
  Outcome o;
  const ObservablePair p = standard_pair(3);
  const CMatrix sum = p.a() + p.b();
  double worst_d = 0, worst_paths = 0;
  for (double phi : twelve()) {
    const QState psi = family_state(phi, 3);
    const DOperator d = d_operator(p, psi);
    const double ed = qmath::expectation(d.d, psi).real();
    const double overlap = std::norm(qmath::inner(d.perp_sum.state, sum * psi.vec()));
    const double var = qmath::expectation_variance(sum, psi).variance;
    worst_d = std::max(worst_d, std::abs(ed - 0.5));
    worst_paths = std::max({worst_paths, std::abs(ed - overlap / 2), std::abs(ed - var / 2)});
  }
  o.require(worst_d <= 1e-12, fmt::format("max |<D> - 0.5| = {:.3g}", worst_d));
  o.require(worst_paths <= 1e-10, fmt::format("three paths differ by {:.3g}", worst_paths));
  if (o.pass) {
    o.detail = fmt::format("max |<D> - 0.5| = {:.2g}, paths agree to {:.2g}", worst_d, worst_paths);
  }
  return o;
}

Outcome hr_curve() {
  Outcome o;
  double worst = 0;
  for (double phi : twelve()) {
    const BoundReport r = evaluate_family(3, phi, default_requests(3));
    const double c = std::cos(2 * phi);
    worst = std::max(worst, std::abs(r.hr_product - c * c / 4));
  }
  o.require(worst <= 1e-10, fmt::format("max |hr - cos^2(2phi)/4| = {:.3g}", worst));
  const BoundReport first = evaluate_family(3, kPi / 12, default_requests(3));
  o.require(std::abs(first.hr_product - 0.1875) <= 1e-10,
            fmt::format("hr at pi/12 = {}", first.hr_product));
  for (double phi : {kPi / 4, 3 * kPi / 4}) {
    const BoundReport r = evaluate_family(3, phi, default_requests(3));
    o.require(r.hr_product < 1e-12, fmt::format("hr at {:.4f} = {:.3g}", phi, r.hr_product));
    o.require(r.find("opt")->bound >= 1 - 1e-9, "mp1(opt) trivial at a joint zero of hr");
    o.require(std::abs(r.mp2 - 0.5) <= 1e-12, "mp2 != 0.5 where hr vanishes");
  }
  if (o.pass) o.detail = fmt::format("max deviation {:.2g}; hr(pi/12) = 0.1875", worst);
  return o;
}

Outcome dominance() {
  Outcome o;
  double margin = 1e300;
  for (double phi : twelve()) {
    const BoundReport r = evaluate_family(3, phi, default_requests(3));
    o.require(r.mp1.size() == 4, "expected opt, r1, r2, r3");
    for (const auto& e : r.mp1) {
      margin = std::min(margin, e.bound - r.hr_product);
      o.require(e.bound >= r.hr_product - 1e-9,
                fmt::format("mp1_{} below hr at phi {:.4f}", e.origin, phi));
    }
  }
  if (o.pass) o.detail = fmt::format("min(mp1 - hr) = {:.4g} over 48 pairs", margin);
  return o;
}

Outcome angle_tables() {
  Outcome o;
  const compiler::AngleTables t = compiler::angle_tables();
  int checked = 0;
  o.require(t.preparation.size() == 12, "Table I needs 12 rows");
  for (const auto& r : t.preparation) {
    ++checked;
    o.require(r.matches, fmt::format("Table I {} solved {:.4f} published {:.2f}",
                                     compiler::phi_label(r.j), r.solved, r.published));
  }
  const std::vector<std::string> wanted{"Jx", "Jx2", "Jy", "Jy2", "Jz", "C+-(opt)", "D"};
  for (const std::string& name : wanted) {
    bool found = false;
    for (const auto& r : t.qutrit) {
      if (r.observable != name || r.j) continue;
      found = true;
      ++checked;
      o.require(r.certified && r.matches, "Table II " + name + ": " + r.note);
    }
    o.require(found, "Table II has no row " + name);
  }
  o.require(!t.qubit.empty(), "Table III is empty");
  for (const auto& r : t.qubit) {
    ++checked;
    o.require(r.certified && r.matches, "Table III " + r.observable + ": " + r.note);
  }
  const auto jx = compiler::compile_catalog({3, "Jx"}).solution.plates;
  using compiler::Slot;
  o.require(compiler::round2(*jx.get(Slot::H3)) == -17.63 &&
                compiler::round2(*jx.get(Slot::H4)) == 75.00 &&
                compiler::round2(*jx.get(Slot::H7)) == -62.63,
            "Jx row is not (-17.63, 75.00, -62.63)");
  if (o.pass) o.detail = fmt::format("{} rows within 0.005 deg; Jx = (-17.63, 75.00, -62.63)", checked);
  return o;
}

Outcome walkthrough() {
  using namespace ulab::optics;
  Outcome o;
  const Mode Hu{Pol::H, 0}, Hd{Pol::H, 1}, Vu{Pol::V, 0}, Vd{Pol::V, 1};
  const auto rs = [](std::initializer_list<std::pair<Mode, qmath::cplx>> xs) {
    RailState s;
    for (const auto& [m, a] : xs) s.set(m, a);
    return s;
  };
  const Circuit jx = compiler::compile_catalog({3, "Jx"}).circuit;
  const double r3 = 1 / std::sqrt(3.0), r23 = std::sqrt(2.0 / 3), h = 0.5,
               w = 1 / std::sqrt(2.0);
  const CMatrix u{{h, -w, h}, {-w, 0, w}, {h, w, h}};
  double worst = 0;
  for (double phi : {kPi / 12, 0.3, kPi / 4, 2.0, 11 * kPi / 12}) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double a = -c / (2 * std::sqrt(3.0)) + std::sqrt(3.0) / 2 * s;
    const std::vector<RailState> oracle = {
        rs({{Hu, s}, {Vd, c}}),
        rs({{Hu, s}, {Hd, -r3 * c}, {Vd, -r23 * c}}),
        rs({{Vu, s}, {Hd, -r3 * c}, {Vd, -r23 * c}}),
        rs({{Hu, -r3 * c}, {Vu, s}, {Vd, -r23 * c}}),
        rs({{Hu, (c + s) / 2}, {Vu, a}, {Vd, -r23 * c}}),
        rs({{Hu, (c + s) / 2}, {Vu, a}, {Hd, -r23 * c}}),
        rs({{Hu, (c + s) / 2}, {Hd, -r23 * c}, {Vd, a}}),
        rs({{Hu, (c + s) / 2}, {Hd, -r23 * c}, {Vd, a}}),
        rs({{Hu, (c + s) / 2}, {Hd, (c - s) / std::sqrt(2.0)}, {Vd, (c + s) / 2}}),
    };
    const QState psi = family_state(phi, 3);
    const auto trace = simulate_trace(jx, encode(psi));
    if (trace.size() != oracle.size()) {
      o.require(false, fmt::format("trace has {} states", trace.size()));
      break;
    }
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      worst = std::max(worst, max_abs_diff(trace[k], oracle[k]));
    }
    const CVector final_state = decode(trace.back()).vec();
    worst = std::max(worst, qmath::max_abs_diff(final_state, u * psi.vec()));
  }
  o.require(worst <= 1e-12, fmt::format("max amplitude deviation {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("5 phi, 9 states each, max deviation {:.2g}", worst);
  return o;
}

Outcome property_suite() {
  Outcome o;
  const std::uint64_t seed = test::property_seed();
  std::mt19937_64 rng(seed);
  double worst_valid = 0, worst_sat = 0, worst_eig = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 3;
    const ObservablePair pair(test::random_hermitian(rng, dim), test::random_hermitian(rng, dim),
                              "rand");
    const QState psi = test::random_state(rng, dim);
    CVector v = test::random_vector(rng, dim);
    v -= qmath::inner(psi, v) * psi.vec();
    v -= qmath::inner(psi, v) * psi.vec();
    const QState perp = QState::normalize(v);
    const double lhs = qmath::expectation_variance(pair.a(), psi).variance +
                       qmath::expectation_variance(pair.b(), psi).variance;
    for (int s : {-1, 1}) {
      worst_valid = std::max(worst_valid, mp1_bound(pair, psi, custom_orthogonal(perp), s).bound - lhs);
    }
    worst_valid = std::max(worst_valid, mp2_bound(pair, psi) - lhs);
    worst_sat = std::max(worst_sat,
                         std::abs(lhs - mp1_bound(pair, psi, optimal_orthogonal(pair, psi)).bound));
    const qmath::EigenSystem es = qmath::hermitian_eigensystem(pair.a() - pair.b());
    const QState eig = QState::normalize(es.vector(trial % dim));
    const double lhs_eig = qmath::expectation_variance(pair.a(), eig).variance +
                           qmath::expectation_variance(pair.b(), eig).variance;
    worst_eig = std::max(worst_eig, std::abs(lhs_eig - mp2_bound(pair, eig)));
  }
  o.require(worst_valid <= 1e-9, fmt::format("bound exceeds lhs by {:.3g}", worst_valid));
  o.require(worst_sat <= 1e-9, fmt::format("saturation gap {:.3g}", worst_sat));
  o.require(worst_eig <= 1e-9, fmt::format("eigenstate gap {:.3g}", worst_eig));
  o.detail = fmt::format("seed {}, 200 trials; max violation {:.2g}, saturation {:.2g}, "
                         "eigenstate {:.2g}",
                         seed, std::max(worst_valid, 0.0), worst_sat, worst_eig) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome qubit_case() {
  Outcome o;
  const auto rows = experiment::run_sweep(experiment::default_config(2));
  double worst = 0;
  for (const auto& r : rows) {
    const double s2 = std::pow(std::sin(2 * r.phi), 2);
    const double lhs = 2 - s2;
    o.require(r.mp1_opt.has_value() && !r.mp1_r1, "qubit rows carry one mp1 value");
    if (!r.mp1_opt) break;
    worst = std::max({worst, std::abs(r.lhs_sum.exact - lhs), std::abs(r.mp1_opt->exact - lhs),
                      std::abs(r.mp2.exact - (1 - s2 / 2))});
  }
  o.require(worst <= 1e-12, fmt::format("max deviation {:.3g}", worst));
  for (double phi : {kPi / 4, 3 * kPi / 4}) {
    const BoundReport r = evaluate_family(2, phi, default_requests(2));
    o.require(r.hr_bound < 1e-12, fmt::format("hr bound {:.3g} at {:.4f}", r.hr_bound, phi));
    o.require(r.mp1.front().bound > 0.5 && r.mp2 > 0.25, "mp bounds trivial where hr vanishes");
  }
  if (o.pass) o.detail = fmt::format("max deviation {:.2g}; hr trivial at pi/4, 3pi/4", worst);
  return o;
}

double mean_err(const std::vector<experiment::SweepRow>& rows) {
  double sum = 0;
  int n = 0;
  for (const auto& r : rows) {
    for (const auto* v : {&r.lhs_sum, &r.hr_product, &r.mp2}) {
      sum += *v->err;
      ++n;
    }
    if (r.mp1_opt) {
      sum += *r.mp1_opt->err;
      ++n;
    }
  }
  return sum / n;
}

Outcome statistics() {
  Outcome o;
  experiment::RunConfig c = experiment::default_config(3);
  c.mode = experiment::Mode::Sampled;
  c.shots = 10000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = experiment::run_sweep(c);
  const double secs = seconds_since(t0);
  int estimates = 0, outside = 0;
  for (const auto& r : rows) {
    std::vector<const experiment::Value*> vals{&r.lhs_sum, &r.hr_product, &r.hr_bound, &r.mp2};
    for (const auto* m : {&r.mp1_opt, &r.mp1_r1, &r.mp1_r2, &r.mp1_r3}) {
      if (*m) vals.push_back(&**m);
    }
    for (const auto* v : vals) {
      ++estimates;
      if (std::abs(*v->est - v->exact) > 4 * *v->err + 1e-12) ++outside;
    }
  }
  o.require(outside == 0, fmt::format("{} of {} estimates outside 4 sigma", outside, estimates));
  const std::string first = experiment::format_dataset(rows, experiment::Format::Csv);
  const std::string again =
      experiment::format_dataset(experiment::run_sweep(c), experiment::Format::Csv);
  o.require(first == again, "rerun is not byte-identical");
  experiment::RunConfig big = c;
  big.shots = 1000000;
  const double ratio = mean_err(rows) / mean_err(experiment::run_sweep(big));
  o.require(std::abs(ratio - 10) <= 2, fmt::format("stderr ratio {:.3f}, expected 10", ratio));
  o.require(secs < 30, fmt::format("sampled sweep took {:.2f} s", secs));
  if (o.pass) {
    o.detail = fmt::format("{} estimates within 4 sigma; stderr ratio {:.3f}; rerun identical; "
                           "{:.2f} s",
                           estimates, ratio, secs);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"constant lhs", constant_lhs},        {"first relation saturates", saturation},
      {"constant D bound", constant_d},      {"HR curve and nontriviality", hr_curve},
      {"dominance over HR", dominance},      {"angle tables", angle_tables},
      {"Jx walkthrough", walkthrough},       {"property suite", property_suite},
      {"qubit case", qubit_case},            {"statistics", statistics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
