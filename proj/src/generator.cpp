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

#include <random>

#include "exchange/io.hpp"

namespace exchange {

namespace {

// Uniform integer in [lo, hi] from raw mt19937_64 output, so the stream is the
// same on every standard library.
std::size_t draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::size_t>(rng());
  const std::uint64_t limit = std::mt19937_64::max() -
                              (std::mt19937_64::max() % span + 1) % span;
  std::uint64_t v = rng();
  while (v > limit) v = rng();
  return lo + static_cast<std::size_t>(v % span);
}

std::string padded(char prefix, std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

void check_range(const Range& r, const char* name) {
  if (r.min > r.max) {
    throw InvalidArgument(std::string("generator range '") + name +
                          "' has min > max");
  }
}

}  // namespace

Market generate_instance(const GeneratorConfig& config) {
  check_range(config.agents, "agents");
  check_range(config.items_per_agent, "items-per-agent");
  check_range(config.demands_per_agent, "demands-per-agent");
  check_range(config.bundle_size, "bundle-size");
  if (config.agents.min < 1 || config.agents.max > kMaxAgents) {
    throw InvalidArgument("agent count must lie in [1, 32]");
  }
  const std::size_t worst =
      config.agents.max * (config.items_per_agent.max + (config.null_padding ? 1 : 0));
  if (worst > kMaxItems) {
    throw InvalidArgument("configuration can exceed 64 items");
  }

  std::mt19937_64 rng(config.seed);
  const std::size_t n = draw(rng, config.agents.min, config.agents.max);
  const std::size_t agent_width = std::to_string(n).size();
  const std::size_t item_width = std::max<std::size_t>(
      2, std::to_string(n * config.items_per_agent.max).size());

  MarketDescription d;
  std::vector<std::string> real_items;
  for (std::size_t a = 1; a <= n; ++a) {
    AgentDecl agent;
    agent.id = padded('a', a, agent_width);
    const std::size_t k =
        draw(rng, config.items_per_agent.min, config.items_per_agent.max);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string id = padded('i', real_items.size() + 1, item_width);
      real_items.push_back(id);
      d.items.push_back({id, false});
      agent.endowment.push_back(id);
    }
    if (config.null_padding) {
      const std::string id = padded('z', a, agent_width);
      d.items.push_back({id, true});
      agent.endowment.push_back(id);
    }
    d.agents.push_back(std::move(agent));
  }

  const std::size_t m = real_items.size();
  if (config.bundle_size.min > m) {
    throw InvalidArgument("bundle size " + std::to_string(config.bundle_size.min) +
                          " exceeds the " + std::to_string(m) +
                          " non-null items drawn");
  }
  const std::size_t max_bundle = std::min(config.bundle_size.max, m);
  for (auto& agent : d.agents) {
    const std::size_t q =
        draw(rng, config.demands_per_agent.min, config.demands_per_agent.max);
    for (std::size_t j = 0; j < q; ++j) {
      const std::size_t size = draw(rng, config.bundle_size.min, max_bundle);
      std::vector<std::string> pool = real_items;
      std::vector<std::string> bundle;
      for (std::size_t t = 0; t < size; ++t) {
        const std::size_t pick = draw(rng, t, pool.size() - 1);
        std::swap(pool[t], pool[pick]);
        bundle.push_back(pool[t]);
      }
      agent.demands.push_back(std::move(bundle));
    }
  }
  return Market::build(d);
}

}  // namespace exchange
