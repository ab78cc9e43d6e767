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

#include <string>
#include <string_view>

#include "json.hpp"
#include "ulab/optics.hpp"

namespace ulab::optics {

nlohmann::json to_json(const Element& e);
Element element_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RailState& s);
RailState rail_state_from_json(const nlohmann::json& j);

std::string circuit_to_string(const Circuit& c);
// Throws ParseError.
Circuit circuit_from_string(std::string_view text);

}  // namespace ulab::optics
