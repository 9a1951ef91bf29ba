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

#include "exchange/mechanisms.hpp"

#include <bit>

namespace exchange {

std::string to_string(MechanismKind kind) {
  return kind == MechanismKind::kCp ? "cp" : "cup";
}

MechanismKind parse_mechanism_kind(std::string_view text) {
  if (text == "cp") return MechanismKind::kCp;
  if (text == "cup") return MechanismKind::kCup;
  throw InvalidArgument("unknown mechanism '" + std::string(text) +
                        "' (expected cp or cup)");
}

LexKey lex_key(const Market& market, const Allocation& allocation,
               const MechanismSpec& spec) {
  if (spec.priority.size() != market.agent_count()) {
    throw InvalidArgument("priority order does not match the market's agents");
  }
  LexKey key;
  int total = 0;
  for (AgentIndex a : spec.priority.order()) {
    const int u = utility(market, allocation, a);
    key.push_back(u);
    total += u;
  }
  if (spec.kind == MechanismKind::kCup) key.insert(key.begin(), total);
  return key;
}

PackedKey::PackedKey(MechanismKind kind, const PriorityOrder& priority)
    : kind_(kind), order_(priority.order().begin(), priority.order().end()) {}

std::uint64_t PackedKey::operator()(std::uint64_t satisfied) const {
  const std::size_t n = order_.size();
  std::uint64_t key = 0;
  for (AgentIndex a : order_) key = (key << 1) | ((satisfied >> a) & 1U);
  if (kind_ == MechanismKind::kCup) {
    key |= static_cast<std::uint64_t>(std::popcount(satisfied)) << n;
  }
  return key;
}

std::size_t choose_index(const PackedKey& key,
                         std::span<const std::uint64_t> satisfied) {
  if (satisfied.empty()) {
    throw InvalidArgument("cannot choose from an empty candidate set");
  }
  std::size_t best = 0;
  std::uint64_t best_key = key(satisfied[0]);
  for (std::size_t k = 1; k < satisfied.size(); ++k) {
    const std::uint64_t v = key(satisfied[k]);
    if (v > best_key) {
      best = k;
      best_key = v;
    }
  }
  return best;
}

std::size_t choose_index(const Market& market, const MechanismSpec& spec,
                         std::span<const Allocation> candidates) {
  if (candidates.empty()) {
    throw InvalidArgument("cannot choose from an empty candidate set");
  }
  if (spec.priority.size() != market.agent_count()) {
    throw InvalidArgument("priority order does not match the market's agents");
  }
  std::vector<std::uint64_t> satisfied(candidates.size());
  const auto count = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for if (count > 4096) schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    satisfied[k] = satisfied_mask(market, candidates[k]);
  }
  return choose_index(PackedKey(spec.kind, spec.priority), satisfied);
}

Allocation choose_from(const Market& market, const MechanismSpec& spec,
                       std::span<const Allocation> candidates) {
  return candidates[choose_index(market, spec, candidates)];
}

Allocation run_mechanism(const Market& market, const MechanismSpec& spec,
                         const EnumerationOptions& options) {
  const auto feasible = enumerate_feasible(market, spec.constraints, options);
  return choose_from(market, spec, feasible);
}

Allocation run_cp(const Market& market, const PriorityOrder& priority,
                  const ConstraintSet& constraints,
                  const EnumerationOptions& options) {
  return run_mechanism(market, {MechanismKind::kCp, priority, constraints},
                       options);
}

Allocation run_cup(const Market& market, const PriorityOrder& priority,
                   const ConstraintSet& constraints,
                   const EnumerationOptions& options) {
  return run_mechanism(market, {MechanismKind::kCup, priority, constraints},
                       options);
}

}  // namespace exchange
