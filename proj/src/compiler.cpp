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

#include "ulab/compiler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ulab/error.hpp"
#include "ulab/relations.hpp"

namespace ulab::compiler {

using optics::BdDirection;
using optics::Element;
using qmath::cplx;
using qmath::CVector;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

double fold_half_open(double deg, double lo, double period) {
  // Fold into (lo, lo + period].
  double r = std::fmod(deg - lo, period);
  if (r <= 1e-12) r += period;
  return lo + r;
}

CVector conj(const CVector& v) {
  CVector out(v.dim());
  for (int i = 0; i < v.dim(); ++i) out[i] = std::conj(v[i]);
  return out;
}

// Multiplies the row by a phase making its first entry above 1e-9 among
// `pivots` real and positive, the same convention as the eigensolver.
CVector phase_normalize(const CVector& row, const std::vector<int>& pivots) {
  for (int k : pivots) {
    const double mag = std::abs(row[k]);
    if (mag > 1e-9) {
      CVector out = row;
      out *= std::conj(row[k]) / mag;
      out[k] = mag;
      return out;
    }
  }
  return row;
}

std::vector<int> all_indices(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

bool row_is_real(const CVector& r, double tol = 1e-10) {
  for (int k = 0; k < r.dim(); ++k)
    if (std::abs(r[k].imag()) > tol) return false;
  return true;
}

CMatrix real_part(const CMatrix& m) {
  CMatrix out(m.dim());
  for (int r = 0; r < m.dim(); ++r)
    for (int c = 0; c < m.dim(); ++c) out(r, c) = m(r, c).real();
  return out;
}

CMatrix block2(const CMatrix& m, int i, int j) {
  return {{m(i, i), m(i, j)}, {m(j, i), m(j, j)}};
}

CMatrix swap2() { return {{0, 1}, {1, 0}}; }

}  // namespace

std::vector<std::vector<int>> MeasurementSetting::outcome_groups() const {
  std::vector<std::vector<int>> groups;
  std::vector<bool> used(eigenvalues.size(), false);
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (used[i]) continue;
    std::vector<int> g{static_cast<int>(i)};
    for (std::size_t j = i + 1; j < eigenvalues.size(); ++j) {
      if (!used[j] && std::abs(eigenvalues[i] - eigenvalues[j]) < 1e-9) {
        g.push_back(static_cast<int>(j));
        used[j] = true;
      }
    }
    groups.push_back(g);
  }
  return groups;
}

std::optional<int> MeasurementSetting::witness_index() const {
  std::optional<int> idx;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues[i]) > 1e-12) {
      if (idx) return std::nullopt;
      idx = static_cast<int>(i);
    }
  }
  return idx;
}

CMatrix measurement_unitary(const CMatrix& m, Ordering ordering) {
  return measurement_setting(m, "", ordering).basis;
}

MeasurementSetting measurement_setting(const CMatrix& m, std::string label,
                                       Ordering ordering) {
  const qmath::EigenSystem es = qmath::hermitian_eigensystem(m);
  const int n = m.dim();
  MeasurementSetting s;
  s.observable = m;
  s.basis = CMatrix(n);
  s.label = std::move(label);
  for (int i = 0; i < n; ++i) {
    const int k = ordering == Ordering::Ascending ? i : n - 1 - i;
    s.basis.set_row(i, conj(es.vector(k)));
    s.eigenvalues.push_back(std::abs(es.values[k]) < 1e-12 ? 0.0 : es.values[k]);
  }
  return s;
}

MeasurementSetting setting_from_basis(const CMatrix& basis,
                                      std::vector<double> eigenvalues,
                                      std::string label) {
  if (!basis.is_unitary(1e-10)) {
    throw Error(ErrorCode::InvalidArgument, "basis rows are not orthonormal");
  }
  if (static_cast<int>(eigenvalues.size()) != basis.dim()) {
    throw Error(ErrorCode::DimMismatch, "one eigenvalue per basis row");
  }
  MeasurementSetting s;
  s.basis = basis;
  s.eigenvalues = std::move(eigenvalues);
  s.observable = CMatrix(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    const CVector m = conj(basis.row(i));
    s.observable += cplx(s.eigenvalues[i]) * qmath::outer_product(m, m);
  }
  s.label = std::move(label);
  return s;
}

ThreeStage decompose_three_stage(const CMatrix& u, int branch) {
  return decompose_three_stage(u, branch, std::nullopt);
}

ThreeStage decompose_three_stage(const CMatrix& u, int branch,
                                 const std::optional<CMatrix>& u1_if_free) {
  if (u.dim() != 3) throw Error(ErrorCode::DimMismatch, "three-stage needs 3x3");
  if (!u.is_real(1e-10)) {
    throw Error(ErrorCode::ComplexNotSupported, "unitary has complex entries");
  }
  const CMatrix r = real_part(u);
  if (!r.is_unitary(1e-10)) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not orthogonal");
  }
  const double c = r(0, 0).real();
  const double s = (branch >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, 1 - c * c));
  CMatrix u2 = CMatrix::identity(3);
  u2(0, 0) = c;
  u2(0, 1) = -s;
  u2(1, 0) = s;
  u2(1, 1) = c;
  CMatrix u1 = CMatrix::identity(3);
  if (std::abs(s) > 1e-12) {
    const double b0 = -r(0, 1).real() / s;
    const double b1 = -r(0, 2).real() / s;
    u1(1, 1) = b0;
    u1(1, 2) = b1;
    u1(2, 1) = b1;
    u1(2, 2) = -b0;
  } else if (u1_if_free) {
    u1 = *u1_if_free;
  } else {
    u1(2, 2) = -1.0;
  }
  const CMatrix u3 = r * (u2 * u1).transpose();
  return {u1, u2, u3};
}

double solve_hwp_angle(const CMatrix& block) {
  if (block.dim() != 2 || !block.is_real(1e-10)) {
    throw Error(ErrorCode::NotReflection, "block must be real 2x2");
  }
  const double c = block(0, 0).real(), s = block(0, 1).real();
  const double det = block.determinant().real();
  if (std::abs(det + 1.0) > 1e-9 || std::abs(block(1, 0).real() - s) > 1e-9 ||
      std::abs(block(1, 1).real() + c) > 1e-9 ||
      std::abs(c * c + s * s - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotReflection,
                "block is not of the form [[c, s], [s, -c]]");
  }
  double theta = std::atan2(s, c) / 2 * kDeg;
  if (theta <= -90.0 + 1e-12) theta += 180.0;
  return theta;
}

std::string_view slot_name(Slot s) {
  static constexpr std::array<std::string_view, kSlotCount> names = {
      "Q1", "H2", "H3", "H4", "Q4", "H5", "Q5", "H6", "H7"};
  return names[static_cast<int>(s)];
}

std::optional<Slot> slot_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    if (slot_name(static_cast<Slot>(i)) == name) return static_cast<Slot>(i);
  }
  return std::nullopt;
}

bool is_qwp(Slot s) { return s == Slot::Q1 || s == Slot::Q4 || s == Slot::Q5; }

PlateSettings::PlateSettings(std::initializer_list<std::pair<Slot, double>> xs) {
  for (const auto& [s, v] : xs) set(s, v);
}

double plate_distance(const PlateSettings& a, const PlateSettings& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const auto x = a.get(static_cast<Slot>(i)), y = b.get(static_cast<Slot>(i));
    if (x.has_value() != y.has_value()) {
      d += 1000.0;
    } else if (x) {
      double r = std::fmod(std::abs(*x - *y), 180.0);
      d += std::min(r, 180.0 - r);
    }
  }
  return d;
}

Circuit build_circuit(const PlateSettings& p, int dim,
                      const optics::Readout& readout) {
  Circuit c;
  auto add = [&](Slot s, int rail) {
    if (const auto v = p.get(s)) {
      const std::string name(slot_name(s));
      c.elements.push_back(is_qwp(s) ? Element::qwp(*v, rail, name)
                                     : Element::hwp(*v, rail, name));
    }
  };
  if (dim == 3) {
    add(Slot::H3, 1);
    add(Slot::H2, 0);
    c.elements.push_back(Element::bd(BdDirection::HUp, "BDii"));
    add(Slot::H4, 0);
    add(Slot::Q4, 0);
    add(Slot::H5, 1);
    add(Slot::Q5, 1);
    c.elements.push_back(Element::bd(BdDirection::VDown, "BDiii"));
    add(Slot::H6, 0);
    add(Slot::H7, 1);
    c.readout = readout;
    return c;
  }
  if (dim == 2) {
    add(Slot::Q1, 0);
    add(Slot::H2, 0);
    c.elements.push_back(Element::bd(BdDirection::VDown, "BD"));
    c.input = optics::qubit_input_encoding();
    c.output = optics::qubit_output_encoding();
    c.readout = readout;
    return c;
  }
  throw Error(ErrorCode::DimMismatch, "circuits exist for dim 2 and 3");
}

Circuit build_circuit(const PlateSettings& plates, int dim) {
  return build_circuit(
      plates, dim,
      optics::encoded_readout(dim == 2 ? optics::qubit_output_encoding()
                                       : optics::qutrit_encoding()));
}

std::string_view scope_name(Scope s) {
  switch (s) {
    case Scope::All: return "all";
    case Scope::Family: return "family";
    case Scope::Point: return "point";
  }
  return "all";
}

namespace {

std::vector<QState> fixed_inputs(Scope scope, int dim) {
  std::vector<QState> out;
  if (scope == Scope::Family) {
    for (int j = 0; j < 48; ++j) {
      out.push_back(relations::family_state(j * std::numbers::pi / 48, dim));
    }
    return out;
  }
  const cplx i(0, 1);
  for (int a = 0; a < dim; ++a) {
    out.push_back(QState::from(CVector::basis(dim, a)));
    for (int b = a + 1; b < dim; ++b) {
      for (cplx ph : {cplx(1), cplx(-1), i, -i}) {
        out.push_back(QState::normalize(CVector::basis(dim, a) +
                                        ph * CVector::basis(dim, b)));
      }
    }
  }
  std::mt19937_64 rng(0x5eedULL + dim);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 16; ++t) {
    CVector v(dim);
    for (int k = 0; k < dim; ++k) v[k] = {u(rng), u(rng)};
    out.push_back(QState::normalize(v));
  }
  return out;
}

}  // namespace

std::vector<QState> scope_inputs(Scope scope, int dim,
                                 std::optional<double> point_phi) {
  if (scope == Scope::Point) {
    if (!point_phi) throw Error(ErrorCode::InvalidArgument, "point scope needs phi");
    return {relations::family_state(*point_phi, dim)};
  }
  if (dim == 2 || dim == 3) {
    static const std::array<std::vector<QState>, 4> cache = {
        fixed_inputs(Scope::All, 2), fixed_inputs(Scope::Family, 2),
        fixed_inputs(Scope::All, 3), fixed_inputs(Scope::Family, 3)};
    return cache[(dim - 2) * 2 + (scope == Scope::Family ? 1 : 0)];
  }
  return fixed_inputs(scope, dim);
}

double verify_circuit(const Circuit& circuit, const MeasurementSetting& setting,
                      const std::vector<QState>& inputs) {
  const auto groups = setting.outcome_groups();
  const int dim = setting.dim();
  // The optics are linear: simulate each basis input once and superpose.
  std::vector<optics::RailState> columns;
  for (int k = 0; k < dim; ++k) {
    columns.push_back(optics::simulate(
        circuit, optics::encode(QState::from(CVector::basis(dim, k)), circuit.input)));
  }
  double residual = 0.0;
  for (const auto& psi : inputs) {
    if (psi.dim() != dim) throw Error(ErrorCode::DimMismatch, "input and setting differ");
    optics::RailState out;
    for (int k = 0; k < dim; ++k) {
      const cplx amp = psi.vec()[k];
      if (amp == cplx(0)) continue;
      for (const auto& [mode, a] : columns[k].entries()) out.add(mode, amp * a);
    }
    const std::vector<double> p = optics::detect(out, circuit.readout).p;
    if (p.size() != setting.eigenvalues.size()) {
      throw Error(ErrorCode::DimMismatch, "readout size differs from setting");
    }
    for (const auto& g : groups) {
      double sim = 0.0, born = 0.0;
      for (int k : g) {
        sim += p[k];
        born += std::norm(qmath::inner(conj(setting.basis.row(k)), psi));
      }
      residual = std::max(residual, std::abs(sim - born));
    }
  }
  return residual;
}

namespace {

struct Candidate {
  PlateSettings plates;
  Scope scope = Scope::All;
  bool spatial = false;
  MeasurementSetting setting;  // permuted to the outputs
  std::string strategy;
  double residual = 0.0;
};

int scope_rank(Scope s) { return s == Scope::All ? 0 : s == Scope::Family ? 1 : 2; }

optics::Readout readout_for(int dim, bool spatial) {
  if (spatial) return optics::spatial_readout();
  return optics::encoded_readout(dim == 2 ? optics::qubit_output_encoding()
                                          : optics::qutrit_encoding());
}

Circuit candidate_circuit(const Candidate& c) {
  return build_circuit(c.plates, c.setting.dim(), readout_for(c.setting.dim(), c.spatial));
}

double candidate_residual(const Candidate& c, std::optional<double> point_phi) {
  return verify_circuit(candidate_circuit(c), c.setting,
                        scope_inputs(c.scope, c.setting.dim(), point_phi));
}

MeasurementSetting permuted(const MeasurementSetting& s, const std::vector<int>& perm) {
  MeasurementSetting out = s;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.basis.set_row(static_cast<int>(i), s.basis.row(perm[i]));
    out.eigenvalues[i] = s.eigenvalues[perm[i]];
  }
  return out;
}

std::vector<std::vector<int>> permutations(int n, bool all) {
  std::vector<std::vector<int>> out;
  std::vector<int> p = all_indices(n);
  do {
    out.push_back(p);
  } while (all && std::next_permutation(p.begin(), p.end()));
  return out;
}

// Real orthogonal rows (phase-normalized) or nullopt.
std::optional<CMatrix> real_rows(const CMatrix& basis) {
  const int n = basis.dim();
  CMatrix out(n);
  for (int i = 0; i < n; ++i) {
    const CVector r = phase_normalize(basis.row(i), all_indices(n));
    if (!row_is_real(r)) return std::nullopt;
    out.set_row(i, r);
  }
  return real_part(out);
}

// Real surrogates agreeing with the basis on inputs with no weight on
// mode 1; the mode-1 column sign is free, so both signs are returned.
std::vector<CMatrix> family_surrogates(const CMatrix& basis) {
  if (basis.dim() != 3) return {};
  CMatrix out(3);
  std::optional<cplx> d;
  for (int i = 0; i < 3; ++i) {
    CVector r = basis.row(i);
    if (std::abs(r[0]) < 1e-12 && std::abs(r[2]) < 1e-12) {
      r = phase_normalize(r, {1});
    } else {
      r = phase_normalize(r, {0, 2});
      if (std::abs(r[0].imag()) > 1e-10 || std::abs(r[2].imag()) > 1e-10) {
        return {};
      }
      if (std::abs(r[1]) > 1e-12) {
        const cplx ph = r[1] / std::abs(r[1]);
        if (!d) d = std::conj(ph);
        const cplx x = r[1] * *d;
        if (std::abs(x.imag()) > 1e-10) return {};
        r[1] = x;
      }
    }
    out.set_row(i, r);
  }
  CMatrix flipped = real_part(out);
  for (int i = 0; i < 3; ++i) flipped(i, 1) = -flipped(i, 1);
  return {real_part(out), flipped};
}

void add_three_stage(std::vector<Candidate>& out, const CMatrix& v,
                     const MeasurementSetting& setting, Scope scope,
                     const std::string& strategy,
                     const std::optional<PlateSettings>& anchor) {
  // Sign patterns: identity first, then the middle-row flip.
  static const int patterns[8][3] = {{1, 1, 1},   {1, -1, 1}, {-1, 1, 1},
                                     {1, 1, -1},  {-1, -1, 1}, {-1, 1, -1},
                                     {1, -1, -1}, {-1, -1, -1}};
  for (const auto& pat : patterns) {
    CMatrix w = v;
    for (int i = 0; i < 3; ++i) w.set_row(i, cplx(pat[i]) * v.row(i));
    if (std::abs(w.determinant().real() + 1.0) > 1e-9) continue;
    std::vector<std::optional<CMatrix>> frees{std::nullopt};
    const bool degenerate = std::abs(std::abs(w(0, 0).real()) - 1.0) < 1e-12;
    if (degenerate) {
      std::vector<double> th{0.0, 90.0};
      if (anchor && anchor->get(Slot::H3)) th.push_back(*anchor->get(Slot::H3));
      frees.clear();
      for (double t : th) {
        CMatrix u1 = CMatrix::identity(3);
        const CMatrix j = optics::waveplate_jones(optics::ElementKind::HWP, t);
        u1(1, 1) = j(0, 0);
        u1(1, 2) = j(0, 1);
        u1(2, 1) = j(1, 0);
        u1(2, 2) = j(1, 1);
        frees.push_back(u1);
      }
    }
    for (int branch : {1, -1}) {
      if (degenerate && branch < 0) continue;
      for (const auto& free : frees) {
        const ThreeStage st = decompose_three_stage(w, branch, free);
        try {
          Candidate c;
          c.plates.set(Slot::H2, 45.0);
          c.plates.set(Slot::H3, solve_hwp_angle(block2(st.u1, 1, 2)));
          c.plates.set(Slot::H4, solve_hwp_angle(block2(st.u2, 0, 1) * swap2()));
          c.plates.set(Slot::H5, 45.0);
          c.plates.set(Slot::H6, 0.0);
          c.plates.set(Slot::H7, solve_hwp_angle(block2(st.u3, 1, 2) * swap2()));
          c.scope = scope;
          c.setting = setting;
          c.strategy = strategy;
          out.push_back(std::move(c));
        } catch (const Error&) {
          // Block not a reflection for this pattern; skip it.
        }
      }
    }
  }
}

// Witness rows with no weight on mode 1, realized by H3 at +-45 and Q4.
void add_qwp_witness(std::vector<Candidate>& out, const MeasurementSetting& s,
                     int w) {
  const CVector row = s.basis.row(w);
  if (std::abs(row[1]) > 1e-10) return;
  std::vector<int> perm{w};
  for (int i = 0; i < 3; ++i)
    if (i != w) perm.push_back(i);
  const MeasurementSetting ps = permuted(s, perm);
  std::vector<double> thetas;
  for (double sigma : {1.0, -1.0}) {
    thetas.clear();
    if (std::abs(row[0]) < 1e-12) {
      thetas = {0.0, 90.0};
    } else {
      // out0 = J01 x0 + sigma J00 x2 with t = tan(theta):
      // i t^2 - sigma r (1 - i) t + 1 = 0, r = row2 / row0.
      const cplx i(0, 1);
      const cplx r = row[2] / row[0];
      const cplx a = i, b = -sigma * r * (1.0 - i), c = 1.0;
      const cplx disc = std::sqrt(b * b - 4.0 * a * c);
      for (const cplx t : {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)}) {
        if (std::abs(t.imag()) < 1e-9 * (1 + std::abs(t))) {
          thetas.push_back(std::atan(t.real()) * kDeg);
        }
      }
    }
    for (double th : thetas) {
      Candidate c;
      c.plates.set(Slot::H2, 45.0);
      c.plates.set(Slot::H3, sigma > 0 ? 45.0 : -45.0);
      c.plates.set(Slot::Q4, fold_half_open(th, -90.0, 180.0));
      c.plates.set(Slot::H5, 45.0);
      c.plates.set(Slot::H6, 0.0);
      c.plates.set(Slot::H7, 0.0);
      c.scope = Scope::All;
      c.setting = ps;
      c.strategy = "qwp-witness";
      out.push_back(std::move(c));
    }
  }
}

void push_angles(std::vector<double>& v, double half_angle_deg) {
  // All theta with 2 theta in {a, -a, 180 - a, a - 180}.
  for (double t : {half_angle_deg, -half_angle_deg, 90.0 - half_angle_deg,
                   half_angle_deg - 90.0}) {
    const double f = fold_half_open(t, -90.0, 180.0);
    if (std::none_of(v.begin(), v.end(),
                     [&](double x) { return std::abs(x - f) < 1e-9; })) {
      v.push_back(f);
    }
  }
}

// Single-state layout: H3=0, H4=45, H5=45 route x0 to Hu and x2 to Hd; H6
// leaks part of Hu into Vu, read on the middle detector, or H7 mixes Hd.
void add_point_witness(std::vector<Candidate>& out, const MeasurementSetting& s,
                       int w, double phi) {
  const CVector row = phase_normalize(s.basis.row(w), {0, 1, 2});
  if (!row_is_real(row)) return;
  const QState psi = relations::family_state(phi, 3);
  const double p = std::norm(qmath::inner(conj(s.basis.row(w)), psi));
  const double x0 = std::norm(psi[0]), x2 = std::norm(psi[2]);
  std::vector<int> perm;
  for (int i = 0; i < 3; ++i)
    if (i != w) perm.push_back(i);
  perm.insert(perm.begin() + 1, w);
  const MeasurementSetting ps = permuted(s, perm);
  auto make = [&](double h6, double h7) {
    Candidate c;
    c.plates = {{Slot::H2, 45.0}, {Slot::H3, 0.0}, {Slot::H4, 45.0},
                {Slot::H5, 45.0}, {Slot::H6, h6},  {Slot::H7, h7}};
    c.scope = Scope::Point;
    c.spatial = true;
    c.setting = ps;
    c.strategy = "point-witness";
    out.push_back(std::move(c));
  };
  // H7 at +-45 removes x2 from the middle output; H6 supplies p.
  if (x0 > 1e-12 ? p <= x0 + 1e-12 : p < 1e-12) {
    std::vector<double> h6s;
    const double q = x0 > 1e-12 ? std::min(1.0, p / x0) : 0.0;
    push_angles(h6s, std::asin(std::sqrt(q)) * kDeg / 2);
    for (double h7 : {-45.0, 45.0})
      for (double h6 : h6s) make(h6, h7);
  }
  // H6 at 0 or 90 keeps Hu; H7 supplies p from x2.
  if (x2 > 1e-12 ? p <= x2 + 1e-12 : p < 1e-12) {
    std::vector<double> h7s;
    const double q = x2 > 1e-12 ? std::min(1.0, p / x2) : 0.0;
    push_angles(h7s, std::acos(std::sqrt(q)) * kDeg / 2);
    for (double h6 : {0.0, 90.0})
      for (double h7 : h7s) make(h6, h7);
  }
}

// Row 0 target t; solve HWP (and optional QWP) so that the first output of
// HWP(theta) QWP(q) is t up to phase.
std::optional<double> qubit_hwp_for(const CVector& t, const CMatrix& q) {
  const CVector a = q.row(0), b = q.row(1);
  cplx alpha = 0, beta = 0;
  for (int k = 0; k < 2; ++k) {
    alpha += std::conj(a[k]) * t[k];
    beta += std::conj(b[k]) * t[k];
  }
  if (std::abs((alpha * std::conj(beta)).imag()) > 1e-10) return std::nullopt;
  const cplx ph = std::abs(alpha) > 1e-12 ? alpha / std::abs(alpha)
                                          : beta / std::abs(beta);
  const double c = (alpha * std::conj(ph)).real(), s = (beta * std::conj(ph)).real();
  return fold_half_open(std::atan2(s, c) / 2 * kDeg, -45.0, 90.0);
}

double qubit_imbalance(const CVector& t, double qdeg) {
  const CMatrix q = optics::waveplate_jones(optics::ElementKind::QWP, qdeg);
  const CVector a = q.row(0), b = q.row(1);
  cplx alpha = 0, beta = 0;
  for (int k = 0; k < 2; ++k) {
    alpha += std::conj(a[k]) * t[k];
    beta += std::conj(b[k]) * t[k];
  }
  return (alpha * std::conj(beta)).imag();
}

void add_qubit(std::vector<Candidate>& out, const MeasurementSetting& s) {
  const CVector t = s.basis.row(0);
  auto make = [&](std::optional<double> q, double h) {
    Candidate c;
    if (q) c.plates.set(Slot::Q1, *q);
    c.plates.set(Slot::H2, h);
    c.scope = Scope::All;
    c.setting = s;
    c.strategy = q ? "qubit-qwp" : "qubit-hwp";
    out.push_back(std::move(c));
  };
  if (const auto h = qubit_hwp_for(t, CMatrix::identity(2))) make(std::nullopt, *h);
  std::vector<double> qs{90.0, 0.0, 45.0, -45.0};
  const int steps = 720;
  for (int k = 0; k < steps; ++k) {
    double lo = -90.0 + 180.0 * k / steps, hi = lo + 180.0 / steps;
    double flo = qubit_imbalance(t, lo), fhi = qubit_imbalance(t, hi);
    if (flo == 0.0 || (flo < 0) == (fhi < 0)) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = qubit_imbalance(t, mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    qs.push_back(0.5 * (lo + hi));
  }
  for (double q : qs) {
    const double f = fold_half_open(q, -90.0, 180.0);
    const CMatrix j = optics::waveplate_jones(optics::ElementKind::QWP, f);
    if (const auto h = qubit_hwp_for(t, j)) make(f, *h);
  }
}

// Replaces each plate group that differs from the anchor by the anchor's
// configuration when the plate has no effect on the scope (residual at
// rounding level), widening to the family scope only if required.
Candidate settle_free_plates(Candidate c, const PlateSettings& anchor,
                             std::optional<double> point_phi) {
  const std::vector<std::vector<Slot>> groups = {
      {Slot::Q1}, {Slot::H2}, {Slot::H3}, {Slot::H4, Slot::Q4},
      {Slot::H5, Slot::Q5}, {Slot::H6}, {Slot::H7}};
  for (const auto& g : groups) {
    Candidate t = c;
    bool differs = false;
    for (Slot s : g) {
      const auto x = c.plates.get(s), y = anchor.get(s);
      if (x.has_value() != y.has_value() || (x && std::abs(*x - *y) > 1e-9)) {
        differs = true;
      }
      if (y) {
        t.plates.set(s, *y);
      } else {
        t.plates.clear(s);
      }
    }
    if (!differs) continue;
    constexpr double kFree = 1e-10;
    t.residual = candidate_residual(t, point_phi);
    if (t.residual <= kFree) {
      c = t;
      continue;
    }
    if (t.scope == Scope::All) {
      t.scope = Scope::Family;
      t.residual = candidate_residual(t, point_phi);
      if (t.residual <= kFree) c = t;
    }
  }
  return c;
}

}  // namespace

CompiledMeasurement compile_measurement(const MeasurementSetting& setting,
                                        const CompileOptions& options) {
  const int dim = setting.dim();
  if (dim != 2 && dim != 3) {
    throw Error(ErrorCode::DimMismatch, "compiler supports dim 2 and 3");
  }
  const bool permute = options.allow_output_permutation;
  std::vector<Candidate> cands;
  for (const auto& perm : permutations(dim, permute)) {
    const MeasurementSetting ps = permuted(setting, perm);
    if (dim == 2) {
      add_qubit(cands, ps);
      continue;
    }
    if (const auto v = real_rows(ps.basis)) {
      add_three_stage(cands, *v, ps, Scope::All, "three-stage", options.anchor);
    } else {
      for (const CMatrix& v : family_surrogates(ps.basis)) {
        add_three_stage(cands, v, ps, Scope::Family, "family-surrogate",
                        options.anchor);
      }
    }
  }
  if (dim == 3) {
    if (const auto w = setting.witness_index()) {
      add_qwp_witness(cands, setting, *w);
      if (options.point_phi) add_point_witness(cands, setting, *w, *options.point_phi);
    }
  }
  std::vector<Candidate> ok;
  double best_residual = 1e300;
  for (auto& c : cands) {
    c.residual = candidate_residual(c, options.point_phi);
    best_residual = std::min(best_residual, c.residual);
    if (c.residual <= kResidualTol) ok.push_back(std::move(c));
  }
  if (ok.empty()) {
    throw Error(ErrorCode::NotCompilable,
                "no plate assignment for " + setting.label + " (" +
                    std::to_string(cands.size()) + " candidates, best residual " +
                    (cands.empty() ? std::string("n/a")
                                   : fmt::format("{:.3g}", best_residual)) +
                    ")");
  }
  std::size_t pick = 0;
  if (options.anchor) {
    double best = 1e300;
    for (std::size_t i = 0; i < ok.size(); ++i) {
      ok[i] = settle_free_plates(ok[i], *options.anchor, options.point_phi);
      const double d = plate_distance(ok[i].plates, *options.anchor) +
                       1e-6 * scope_rank(ok[i].scope);
      if (d < best - 1e-12) {
        best = d;
        pick = i;
      }
    }
  } else {
    for (std::size_t i = 1; i < ok.size(); ++i) {
      if (scope_rank(ok[i].scope) < scope_rank(ok[pick].scope)) pick = i;
    }
  }
  const Candidate& c = ok[pick];
  CompiledMeasurement out;
  out.circuit = candidate_circuit(c);
  out.setting = c.setting;
  out.solution.dim = dim;
  out.solution.plates = c.plates;
  out.solution.residual = c.residual;
  out.solution.scope = c.scope;
  if (c.scope == Scope::Point) out.solution.point_phi = options.point_phi;
  out.solution.spatial_readout = c.spatial;
  out.solution.eigenvalues = c.setting.eigenvalues;
  out.solution.strategy = c.strategy;
  out.solution.label = setting.label;
  return out;
}

}  // namespace ulab::compiler
