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

#include "ulab/optics_json.hpp"

#include "ulab/error.hpp"

namespace ulab::optics {

using nlohmann::json;

namespace {

json mode_json(const Mode& m) {
  return json::array({m.pol == Pol::H ? "H" : "V", m.rail});
}

Mode mode_from(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::ParseError, "mode must be [pol, rail]");
  }
  const std::string p = j.at(0).get<std::string>();
  if (p != "H" && p != "V") throw Error(ErrorCode::ParseError, "bad pol " + p);
  return {p == "H" ? Pol::H : Pol::V, j.at(1).get<int>()};
}

json modes_json(const std::vector<Mode>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(mode_json(m));
  return a;
}

std::vector<Mode> modes_from(const json& j) {
  std::vector<Mode> out;
  for (const auto& x : j) out.push_back(mode_from(x));
  return out;
}

}  // namespace

json to_json(const Element& e) {
  json j;
  switch (e.kind) {
    case ElementKind::HWP:
    case ElementKind::QWP:
      j["kind"] = e.kind == ElementKind::HWP ? "HWP" : "QWP";
      j["rail"] = e.rail;
      j["theta_deg"] = e.theta_deg;
      break;
    case ElementKind::BD:
      j["kind"] = "BD";
      j["direction"] = e.direction == BdDirection::HUp ? "H-up" : "V-down";
      break;
    case ElementKind::PBSInit:
      j["kind"] = "PBS-init";
      break;
  }
  if (!e.label.empty()) j["label"] = e.label;
  return j;
}

Element element_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::string label = j.value("label", "");
  if (kind == "HWP" || kind == "QWP") {
    const double theta = j.at("theta_deg").get<double>();
    const int rail = j.at("rail").get<int>();
    return kind == "HWP" ? Element::hwp(theta, rail, label)
                         : Element::qwp(theta, rail, label);
  }
  if (kind == "BD") {
    const std::string d = j.at("direction").get<std::string>();
    if (d == "H-up") return Element::bd(BdDirection::HUp, label);
    if (d == "V-down") return Element::bd(BdDirection::VDown, label);
    throw Error(ErrorCode::ParseError, "bad BD direction " + d);
  }
  if (kind == "PBS-init") {
    return Element::pbs_init(label.empty() ? "PBS" : label);
  }
  throw Error(ErrorCode::ParseError, "unknown element kind " + kind);
}

json to_json(const Circuit& c) {
  json j;
  j["elements"] = json::array();
  for (const auto& e : c.elements) j["elements"].push_back(to_json(e));
  j["input"] = modes_json(c.input);
  j["output"] = modes_json(c.output);
  j["readout"] = json::array();
  for (const auto& g : c.readout) j["readout"].push_back(modes_json(g));
  j["rails"] = c.rails;
  return j;
}

Circuit circuit_from_json(const json& j) {
  try {
    Circuit c;
    const json& elems = j.is_array() ? j : j.at("elements");
    for (const auto& e : elems) c.elements.push_back(element_from_json(e));
    if (j.is_object()) {
      if (j.contains("input")) c.input = modes_from(j["input"]);
      if (j.contains("output")) {
        c.output = modes_from(j["output"]);
        c.readout = encoded_readout(c.output);
      }
      if (j.contains("readout")) {
        c.readout.clear();
        for (const auto& g : j["readout"]) c.readout.push_back(modes_from(g));
      }
      if (j.contains("rails")) c.rails = j["rails"].get<std::vector<int>>();
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json to_json(const RailState& s) {
  json a = json::array();
  for (const auto& [m, x] : s.entries()) {
    a.push_back({{"pol", m.pol == Pol::H ? "H" : "V"},
                 {"rail", m.rail},
                 {"re", x.real()},
                 {"im", x.imag()}});
  }
  return a;
}

RailState rail_state_from_json(const json& j) {
  try {
    RailState s;
    for (const auto& x : j) {
      const std::string p = x.at("pol").get<std::string>();
      if (p != "H" && p != "V") throw Error(ErrorCode::ParseError, "bad pol " + p);
      s.add({p == "H" ? Pol::H : Pol::V, x.at("rail").get<int>()},
            {x.value("re", 0.0), x.value("im", 0.0)});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string circuit_to_string(const Circuit& c) { return to_json(c).dump(2); }

Circuit circuit_from_string(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return circuit_from_json(j);
}

}  // namespace ulab::optics
