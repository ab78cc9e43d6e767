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

#include "ulab/optics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulab/error.hpp"

namespace ulab::optics {

namespace {

// cos and sin of an angle in degrees, exact on multiples of 90.
void cos_sin_deg(double deg, double& c, double& s) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  if (r == 0.0) { c = 1; s = 0; return; }
  if (r == 90.0) { c = 0; s = 1; return; }
  if (r == 180.0) { c = -1; s = 0; return; }
  if (r == 270.0) { c = 0; s = -1; return; }
  const double rad = deg * std::numbers::pi / 180.0;
  c = std::cos(rad);
  s = std::sin(rad);
}

void require_finite(double theta) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorCode::InvalidArgument, "plate angle must be finite");
  }
}

}  // namespace

std::string to_string(const Mode& m) {
  const char p = m.pol == Pol::H ? 'H' : 'V';
  if (m.rail == 0) return std::string{p, 'u'};
  if (m.rail == 1) return std::string{p, 'd'};
  return std::string{p} + "(" + std::to_string(m.rail) + ")";
}

cplx RailState::amplitude(const Mode& m) const {
  const auto it = amps_.find(m);
  return it == amps_.end() ? cplx(0.0) : it->second;
}

void RailState::set(const Mode& m, cplx a) { amps_[m] = a; }

void RailState::add(const Mode& m, cplx a) { amps_[m] += a; }

double RailState::norm2() const {
  double s = 0.0;
  for (const auto& [m, a] : amps_) s += std::norm(a);
  return s;
}

double max_abs_diff(const RailState& a, const RailState& b) {
  double d = 0.0;
  for (const auto& [m, x] : a.entries()) d = std::max(d, std::abs(x - b.amplitude(m)));
  for (const auto& [m, x] : b.entries()) d = std::max(d, std::abs(x - a.amplitude(m)));
  return d;
}

Element Element::hwp(double theta_deg, int rail, std::string label) {
  require_finite(theta_deg);
  return {ElementKind::HWP, theta_deg, rail, BdDirection::HUp, std::move(label)};
}

Element Element::qwp(double theta_deg, int rail, std::string label) {
  require_finite(theta_deg);
  return {ElementKind::QWP, theta_deg, rail, BdDirection::HUp, std::move(label)};
}

Element Element::bd(BdDirection dir, std::string label) {
  return {ElementKind::BD, 0.0, 0, dir, std::move(label)};
}

Element Element::pbs_init(std::string label) {
  return {ElementKind::PBSInit, 0.0, 0, BdDirection::HUp, std::move(label)};
}

std::string describe(const Element& e) {
  std::string name = e.label.empty() ? "" : e.label + " ";
  switch (e.kind) {
    case ElementKind::HWP:
    case ElementKind::QWP: {
      return name + fmt::format("{}({:.6f} deg, rail {})",
                                e.kind == ElementKind::HWP ? "HWP" : "QWP",
                                e.theta_deg, e.rail);
    }
    case ElementKind::BD:
      return name + (e.direction == BdDirection::HUp ? "BD(H-up)" : "BD(V-down)");
    case ElementKind::PBSInit:
      return name + "PBS-init";
  }
  return name;
}

Encoding qutrit_encoding() {
  return {{Pol::H, 0}, {Pol::H, 1}, {Pol::V, 1}};
}

Encoding qubit_input_encoding() { return {{Pol::H, 0}, {Pol::V, 0}}; }

Encoding qubit_output_encoding() { return {{Pol::H, 0}, {Pol::V, 1}}; }

Readout encoded_readout(const Encoding& enc) {
  Readout r;
  for (const auto& m : enc) r.push_back({m});
  return r;
}

Readout spatial_readout() {
  return {{{Pol::H, 0}}, {{Pol::H, 1}, {Pol::V, 0}}, {{Pol::V, 1}}};
}

CMatrix waveplate_jones(ElementKind kind, double theta_deg) {
  require_finite(theta_deg);
  if (kind == ElementKind::HWP) {
    double c2, s2;
    cos_sin_deg(2 * theta_deg, c2, s2);
    return {{c2, s2}, {s2, -c2}};
  }
  if (kind == ElementKind::QWP) {
    double c, s;
    cos_sin_deg(theta_deg, c, s);
    const cplx i(0, 1);
    const cplx off = (1.0 - i) * s * c;
    return {{c * c + i * s * s, off}, {off, s * s + i * c * c}};
  }
  throw Error(ErrorCode::InvalidArgument, "not a wave plate");
}

RailState encode(const QState& psi, const Encoding& enc) {
  qmath::require_same_dim(psi.dim(), static_cast<int>(enc.size()), "encode");
  RailState s;
  for (int i = 0; i < psi.dim(); ++i) {
    if (psi[i] != cplx(0.0)) s.set(enc[i], psi[i]);
  }
  return s;
}

QState decode(const RailState& s, const Encoding& enc) {
  qmath::CVector v(static_cast<int>(enc.size()));
  for (const auto& [m, a] : s.entries()) {
    const auto it = std::find(enc.begin(), enc.end(), m);
    if (it == enc.end()) {
      if (std::abs(a) > 1e-9) {
        throw Error(ErrorCode::LeakageDetected,
                    "amplitude on " + to_string(m) + " outside the encoding");
      }
      continue;
    }
    v[static_cast<int>(it - enc.begin())] = a;
  }
  return QState::normalize(v);
}

RailState apply_element(const RailState& s, const Element& e) {
  RailState out;
  switch (e.kind) {
    case ElementKind::HWP:
    case ElementKind::QWP: {
      const CMatrix j = waveplate_jones(e.kind, e.theta_deg);
      const Mode h{Pol::H, e.rail}, v{Pol::V, e.rail};
      for (const auto& [m, a] : s.entries()) {
        if (m.rail != e.rail) out.add(m, a);
      }
      const cplx ah = s.amplitude(h), av = s.amplitude(v);
      if (ah != cplx(0.0) || av != cplx(0.0)) {
        out.add(h, j(0, 0) * ah + j(0, 1) * av);
        out.add(v, j(1, 0) * ah + j(1, 1) * av);
      }
      return out;
    }
    case ElementKind::BD:
      for (const auto& [m, a] : s.entries()) {
        Mode n = m;
        if (e.direction == BdDirection::HUp && m.pol == Pol::H) n.rail -= 1;
        if (e.direction == BdDirection::VDown && m.pol == Pol::V) n.rail += 1;
        out.add(n, a);
      }
      return out;
    case ElementKind::PBSInit:
      out.set({Pol::H, 0}, 1.0);
      return out;
  }
  return out;
}

std::vector<RailState> simulate_trace(const Circuit& c, const RailState& input) {
  std::vector<RailState> trace{input};
  trace.reserve(c.elements.size() + 1);
  for (const auto& e : c.elements) {
    if ((e.kind == ElementKind::HWP || e.kind == ElementKind::QWP) &&
        std::find(c.rails.begin(), c.rails.end(), e.rail) == c.rails.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "element " + describe(e) + " on undeclared rail");
    }
    trace.push_back(apply_element(trace.back(), e));
  }
  return trace;
}

RailState simulate(const Circuit& c, const RailState& input) {
  return simulate_trace(c, input).back();
}

Detection detect(const RailState& s, const Readout& readout) {
  Detection d;
  double total = 0.0;
  for (const auto& group : readout) {
    double p = 0.0;
    for (const auto& m : group) p += std::norm(s.amplitude(m));
    d.p.push_back(p);
    total += p;
  }
  d.leakage = 1.0 - total;
  return d;
}

Detection detect(const RailState& s) {
  return detect(s, encoded_readout(qutrit_encoding()));
}

std::vector<double> outcome_probabilities(const Circuit& c, const QState& psi) {
  return detect(simulate(c, encode(psi, c.input)), c.readout).p;
}

double preparation_angle_deg(double phi) {
  return 45.0 - 0.5 * phi * 180.0 / std::numbers::pi;
}

Circuit preparation_circuit(double phi, int dim) {
  if (!std::isfinite(phi)) {
    throw Error(ErrorCode::InvalidArgument, "phi must be finite");
  }
  Circuit c;
  c.elements.push_back(Element::pbs_init());
  c.elements.push_back(Element::hwp(preparation_angle_deg(phi), 0, "H1"));
  if (dim == 3) {
    c.elements.push_back(Element::bd(BdDirection::VDown, "BDi"));
    return c;
  }
  if (dim == 2) {
    c.input = c.output = qubit_input_encoding();
    c.readout = encoded_readout(c.output);
    return c;
  }
  throw Error(ErrorCode::DimMismatch, "preparation needs dim 2 or 3");
}

}  // namespace ulab::optics
