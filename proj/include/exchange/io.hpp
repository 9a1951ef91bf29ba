// Copyright 2026 The exchange-clear Authors
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

#include <cstdint>
#include <string>
#include <string_view>

#include "exchange/auditors.hpp"
#include "exchange/market.hpp"

namespace exchange {

inline constexpr std::string_view kSchemaVersion = "1";

// Instance document:
//   {"schema_version": "1",
//    "items":  [{"id": "c1"}, {"id": "z1", "null": true}, ...],
//    "agents": [{"id": "1", "endowment": ["c1"], "demands": [["c1", "p"]]}],
//    "withdrawn": ["x"]}            (only present when non-empty)
// Throws ParseError for malformed documents and InvalidMarket when the decoded
// market fails validation.
Market parse_instance(std::string_view text);
MarketDescription parse_description(std::string_view text);

// Canonical text: fixed key order, ids sorted, two-space indent, trailing
// newline.
std::string serialize(const Market& market);
// {"schema_version": "1", "assignment": {"<item>": "<agent>", ...}}
std::string serialize(const Market& market, const Allocation& allocation);
std::string serialize(const Market& market, const AuditReport& report);

Allocation parse_allocation(const Market& market, std::string_view text);

struct Range {
  std::size_t min = 1;
  std::size_t max = 1;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  Range agents{2, 4};
  Range items_per_agent{1, 2};
  Range demands_per_agent{1, 3};
  Range bundle_size{1, 3};
  // Gives every agent one extra null item.
  bool null_padding = false;
};

// Deterministic per seed and config. Throws InvalidArgument for configs that
// cannot produce a valid market.
Market generate_instance(const GeneratorConfig& config);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view text);

}  // namespace exchange
