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

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "exchange/auditors.hpp"
#include "exchange/io.hpp"
#include "exchange/market.hpp"

namespace testing_util {

// Items listed in `moves` go to the named agent; the rest stay with their owner.
inline exchange::Allocation assign(
    const exchange::Market& market,
    const std::map<std::string, std::string>& moves) {
  std::vector<exchange::AgentIndex> holders(market.item_count(), exchange::kNoAgent);
  market.pool().for_each(
      [&](exchange::ItemIndex i) { holders[i] = market.owner(i); });
  for (const auto& [item, agent] : moves) {
    holders[market.item_index(item)] = market.agent_index(agent);
  }
  return exchange::Allocation(market, std::move(holders));
}

inline std::vector<std::string> tokens(const exchange::ConstraintSet& set) {
  std::vector<std::string> out;
  std::stringstream stream(set.to_string());
  std::string token;
  while (std::getline(stream, token, ',')) out.push_back(token);
  return out;
}

// The random family of the property suites: 2 to 4 agents, at most 8 items,
// at most 3 demands of at most 3 items. Every fourth seed pads each agent with
// a null item and keeps one real item per agent.
inline exchange::GeneratorConfig family_config(std::uint64_t seed) {
  exchange::GeneratorConfig config;
  config.seed = seed;
  config.agents = {2, 4};
  config.demands_per_agent = {1, 3};
  config.bundle_size = {1, 3};
  if (seed % 4 == 0) {
    config.items_per_agent = {1, 1};
    config.null_padding = true;
  } else {
    config.items_per_agent = {1, 2};
  }
  return config;
}

inline exchange::Market family_instance(std::uint64_t seed) {
  return exchange::generate_instance(family_config(seed));
}

}  // namespace testing_util
