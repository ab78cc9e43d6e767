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

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "ulab/qmath.hpp"

namespace ulab::optics {

using qmath::CMatrix;
using qmath::cplx;
using qmath::QState;

enum class Pol { H, V };

struct Mode {
  Pol pol = Pol::H;
  int rail = 0;  // 0 = u, 1 = d

  auto operator<=>(const Mode&) const = default;
};

std::string to_string(const Mode& m);  // e.g. "Hu", "Vd", "H(2)"

class RailState {
 public:
  cplx amplitude(const Mode& m) const;
  void set(const Mode& m, cplx a);
  void add(const Mode& m, cplx a);
  double norm2() const;
  const std::map<Mode, cplx>& entries() const noexcept { return amps_; }

 private:
  std::map<Mode, cplx> amps_;
};

double max_abs_diff(const RailState& a, const RailState& b);

enum class ElementKind { HWP, QWP, BD, PBSInit };
enum class BdDirection { HUp, VDown };

struct Element {
  ElementKind kind = ElementKind::HWP;
  double theta_deg = 0.0;
  int rail = 0;
  BdDirection direction = BdDirection::HUp;
  std::string label;

  static Element hwp(double theta_deg, int rail, std::string label = "");
  static Element qwp(double theta_deg, int rail, std::string label = "");
  static Element bd(BdDirection dir, std::string label = "");
  static Element pbs_init(std::string label = "PBS");

  bool operator==(const Element&) const = default;
};

std::string describe(const Element& e);

using Encoding = std::vector<Mode>;
// Each group lists the modes whose probabilities one detector collects.
using Readout = std::vector<std::vector<Mode>>;

// |0> = Hu, |1> = Hd, |2> = Vd.
Encoding qutrit_encoding();
// |0> = Hu, |1> = Vu before the final displacer; Hu, Vd after it.
Encoding qubit_input_encoding();
Encoding qubit_output_encoding();

Readout encoded_readout(const Encoding& enc);
// Three-detector readout behind a final displacer that routes Vu onto the
// middle detector: {Hu}, {Hd, Vu}, {Vd}.
Readout spatial_readout();

struct Circuit {
  std::vector<Element> elements;
  Encoding input = qutrit_encoding();
  Encoding output = qutrit_encoding();
  Readout readout = encoded_readout(qutrit_encoding());
  std::vector<int> rails{0, 1};

  bool operator==(const Circuit&) const = default;
};

CMatrix waveplate_jones(ElementKind kind, double theta_deg);

RailState encode(const QState& psi, const Encoding& enc = qutrit_encoding());
// Throws LeakageDetected when amplitude outside the encoding exceeds 1e-9.
QState decode(const RailState& s, const Encoding& enc = qutrit_encoding());

RailState apply_element(const RailState& s, const Element& e);

// Input followed by the state after each element.
std::vector<RailState> simulate_trace(const Circuit& c, const RailState& input);
RailState simulate(const Circuit& c, const RailState& input);

struct Detection {
  std::vector<double> p;
  double leakage = 0.0;
};

Detection detect(const RailState& s, const Readout& readout);
Detection detect(const RailState& s);  // encoded qutrit readout

// Outcome probabilities of a circuit on an encoded input state.
std::vector<double> outcome_probabilities(const Circuit& c, const QState& psi);

// H1 angle in degrees: 45 - phi/2.
double preparation_angle_deg(double phi);
// dim 3: PBS, H1 on u, BD(V-down). dim 2: PBS, H1 on u.
Circuit preparation_circuit(double phi, int dim = 3);

}  // namespace ulab::optics
