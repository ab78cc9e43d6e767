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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "ulab/optics.hpp"
#include "ulab/optics_json.hpp"
#include "ulab/relations.hpp"

using namespace ulab;
using namespace ulab::optics;
using qmath::CVector;

namespace {

const double kPi = std::numbers::pi;
const double kDeg = 180.0 / kPi;
const Mode Hu{Pol::H, 0}, Hd{Pol::H, 1}, Vu{Pol::V, 0}, Vd{Pol::V, 1};

double h3_exact() { return std::atan2(-1 / std::sqrt(3.0), std::sqrt(2.0 / 3)) / 2 * kDeg; }
double h7_exact() {
  return std::atan2(-std::sqrt(2.0 / 3), -1 / std::sqrt(3.0)) / 2 * kDeg;
}

Circuit jx_circuit(double h3, double h4, double h7) {
  Circuit c;
  c.elements = {Element::hwp(h3, 1, "H3"),
                Element::hwp(45, 0, "H2"),
                Element::bd(BdDirection::HUp, "BDii"),
                Element::hwp(h4, 0, "H4"),
                Element::hwp(45, 1, "H5"),
                Element::bd(BdDirection::VDown, "BDiii"),
                Element::hwp(0, 0, "H6"),
                Element::hwp(h7, 1, "H7")};
  return c;
}

RailState rs(std::initializer_list<std::pair<Mode, cplx>> xs) {
  RailState s;
  for (const auto& [m, a] : xs) s.set(m, a);
  return s;
}

}  // namespace

TEST_CASE("wave plate Jones matrices") {
  const double r3 = 1 / std::sqrt(3.0), r23 = std::sqrt(2.0 / 3);
  const CMatrix h3 = waveplate_jones(ElementKind::HWP, -17.63);
  CHECK(qmath::max_abs_diff(h3, CMatrix{{r23, -r3}, {-r3, -r23}}) < 1e-4);
  CHECK(qmath::max_abs_diff(waveplate_jones(ElementKind::HWP, 45),
                            CMatrix{{0, 1}, {1, 0}}) == 0.0);
  const double s3 = std::sqrt(3.0) / 2;
  CHECK(qmath::max_abs_diff(waveplate_jones(ElementKind::HWP, 75),
                            CMatrix{{-s3, 0.5}, {0.5, s3}}) < 1e-15);
  const cplx i(0, 1);
  const CMatrix q45 = waveplate_jones(ElementKind::QWP, 45);
  CHECK(qmath::max_abs_diff(q45, ((1.0 + i) / 2.0) * CMatrix{{1, -i}, {-i, 1}}) <
        1e-15);
  std::mt19937_64 rng(test::property_seed() + 3);
  std::uniform_real_distribution<double> u(-180, 180);
  for (int t = 0; t < 200; ++t) {
    CHECK(waveplate_jones(ElementKind::HWP, u(rng)).is_unitary(1e-12));
    CHECK(waveplate_jones(ElementKind::QWP, u(rng)).is_unitary(1e-12));
  }
}

TEST_CASE("encode and decode") {
  const double phi = 0.4;
  const RailState s = encode(relations::family_state(phi, 3));
  CHECK(s.amplitude(Hu) == cplx(std::sin(phi)));
  CHECK(s.amplitude(Vd) == cplx(std::cos(phi)));
  CHECK(s.amplitude(Hd) == cplx(0));
  const RailState e1 = encode(QState::from(CVector{0, 1, 0}));
  CHECK(e1.amplitude(Hd) == cplx(1));
  std::mt19937_64 rng(test::property_seed() + 4);
  for (int t = 0; t < 100; ++t) {
    const QState q = test::random_state(rng, 3);
    CHECK(qmath::max_abs_diff(decode(encode(q)).vec(), q.vec()) < 1e-15);
  }
  const RailState leak = rs({{Hu, std::sqrt(0.5)}, {Vu, std::sqrt(0.5)}});
  CHECK(test::error_code_of([&] { decode(leak); }) == ErrorCode::LeakageDetected);
}

TEST_CASE("beam displacers and plates act on single rails") {
  const double phi = 0.7, c = std::cos(phi), s = std::sin(phi);
  const double r3 = 1 / std::sqrt(3.0), r23 = std::sqrt(2.0 / 3);
  const RailState before = rs({{Hd, -r3 * c}, {Vu, s}, {Vd, -r23 * c}});
  const RailState after = apply_element(before, Element::bd(BdDirection::HUp));
  CHECK(max_abs_diff(after, rs({{Hu, -r3 * c}, {Vu, s}, {Vd, -r23 * c}})) == 0.0);
  const RailState v = apply_element(rs({{Hu, 1.0}}), Element::hwp(45, 0));
  CHECK(max_abs_diff(v, rs({{Vu, 1.0}})) == 0.0);
  const RailState down = apply_element(rs({{Hu, 0.6}, {Vu, 0.8}}),
                                       Element::bd(BdDirection::VDown));
  CHECK(max_abs_diff(down, rs({{Hu, 0.6}, {Vd, 0.8}})) == 0.0);
}

TEST_CASE("property: every element preserves the norm") {
  std::mt19937_64 rng(test::property_seed() + 5);
  std::uniform_real_distribution<double> u(-180, 180);
  std::normal_distribution<double> n;
  for (int t = 0; t < 300; ++t) {
    RailState s;
    for (int rail = -1; rail <= 2; ++rail) {
      s.set({Pol::H, rail}, {n(rng), n(rng)});
      s.set({Pol::V, rail}, {n(rng), n(rng)});
    }
    const double n0 = s.norm2();
    const int rail = static_cast<int>(rng() % 4) - 1;
    for (const Element& e :
         {Element::hwp(u(rng), rail), Element::qwp(u(rng), rail),
          Element::bd(BdDirection::HUp), Element::bd(BdDirection::VDown)}) {
      CHECK(std::abs(apply_element(s, e).norm2() - n0) <= 1e-12 * n0);
    }
  }
}

TEST_CASE("walkthrough of the Jx measurement circuit") {
  const double r3 = 1 / std::sqrt(3.0), r23 = std::sqrt(2.0 / 3);
  const Circuit exact = jx_circuit(h3_exact(), 75.0, h7_exact());
  const Circuit table = jx_circuit(-17.63, 75.0, -62.63);
  // Rounding budget of the 2-decimal angles: a half-wave plate moves
  // amplitudes by at most 2|dtheta| (radians).
  const double budget =
      2 * (std::abs(-17.63 - h3_exact()) + std::abs(-62.63 - h7_exact())) / kDeg;
  CHECK(budget < 1.6e-4);
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
    const RailState in = encode(relations::family_state(phi, 3));
    const auto tr = simulate_trace(exact, in);
    const auto tt = simulate_trace(table, in);
    REQUIRE(tr.size() == oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      INFO("phi " << phi << " step " << k);
      CHECK(max_abs_diff(tr[k], oracle[k]) < 1e-12);
      CHECK(max_abs_diff(tt[k], oracle[k]) <= budget);
      CHECK(std::abs(tr[k].norm2() - 1) < 1e-10);
    }
  }
  const Detection d = detect(simulate(exact, encode(relations::family_state(kPi / 4, 3))));
  CHECK(d.p[0] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(d.p[1] == Catch::Approx(0).margin(1e-12));
  CHECK(d.p[2] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(d.leakage) < 1e-12);
}

TEST_CASE("empty circuit trace") {
  const RailState in = encode(QState::from(CVector{0, 1, 0}));
  const auto tr = simulate_trace(Circuit{}, in);
  REQUIRE(tr.size() == 1);
  CHECK(max_abs_diff(tr[0], in) == 0.0);
  const Detection d = detect(in);
  CHECK(d.p == std::vector<double>{0, 1, 0});
}

TEST_CASE("detect reports leakage") {
  const RailState s = rs({{Hu, std::sqrt(0.5)}, {Vu, std::sqrt(0.5)}});
  const Detection d = detect(s);
  CHECK(d.leakage == Catch::Approx(0.5));
  CHECK(std::abs(d.p[0] + d.p[1] + d.p[2] + d.leakage - 1) < 1e-12);
  const Detection sp = detect(s, spatial_readout());
  CHECK(sp.p[1] == Catch::Approx(0.5));
  CHECK(std::abs(sp.leakage) < 1e-12);
}

TEST_CASE("preparation circuit") {
  const double table[] = {37.5, 30, 22.5, 15, 7.5, 0, -7.5, -15, -22.5, -30, -37.5, -45};
  for (int j = 1; j <= 12; ++j) {
    const double phi = j * kPi / 12;
    CHECK(std::abs(preparation_angle_deg(phi) - table[j - 1]) < 1e-12);
    const Circuit c = preparation_circuit(phi);
    const RailState out = simulate(c, RailState{});
    CHECK(max_abs_diff(out, encode(relations::family_state(phi, 3))) < 1e-12);
    const RailState q = simulate(preparation_circuit(phi, 2), RailState{});
    CHECK(max_abs_diff(q, encode(relations::family_state(phi, 2),
                                 qubit_input_encoding())) < 1e-12);
  }
  const RailState pi4 = simulate(preparation_circuit(kPi / 4), RailState{});
  const double h = std::sqrt(2.0) / 2;
  CHECK(max_abs_diff(pi4, rs({{Hu, h}, {Vd, h}})) < 1e-12);
  const RailState last = simulate(preparation_circuit(kPi), RailState{});
  CHECK(max_abs_diff(last, rs({{Vd, -1.0}})) < 1e-12);
}

TEST_CASE("circuit JSON round trip is bit exact") {
  std::mt19937_64 rng(test::property_seed() + 6);
  std::uniform_real_distribution<double> u(-90, 90);
  for (int t = 0; t < 50; ++t) {
    Circuit c = jx_circuit(u(rng), u(rng), u(rng));
    c.elements.insert(c.elements.begin() + 3, Element::qwp(u(rng), 0, "Q4"));
    c.readout = spatial_readout();
    const Circuit back = circuit_from_string(circuit_to_string(c));
    CHECK(back == c);
  }
  const Circuit plain = circuit_from_string(
      R"([{"kind":"HWP","rail":1,"theta_deg":-17.63},{"kind":"BD","direction":"H-up"}])");
  REQUIRE(plain.elements.size() == 2);
  CHECK(plain.elements[0].theta_deg == -17.63);
  CHECK(plain.elements[1].direction == BdDirection::HUp);
  CHECK(test::error_code_of([] { circuit_from_string("[{\"kind\":\"XWP\"}]"); }) ==
        ErrorCode::ParseError);
  CHECK(test::error_code_of([] { circuit_from_string("{"); }) == ErrorCode::ParseError);
}

TEST_CASE("undeclared rails are rejected") {
  Circuit c;
  c.elements = {Element::hwp(10, 3)};
  CHECK(test::error_code_of([&] { simulate(c, RailState{}); }) ==
        ErrorCode::InvalidArgument);
}
