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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "exchange/market.hpp"

namespace exchange {

struct Unrestricted {
  friend bool operator==(Unrestricted, Unrestricted) = default;
};
struct StronglyIndividuallyRational {
  friend bool operator==(StronglyIndividuallyRational,
                         StronglyIndividuallyRational) = default;
};
struct IndividuallyRational {
  friend bool operator==(IndividuallyRational, IndividuallyRational) = default;
};
// Moved items must split into closed exchange walks, each touching at most
// `limit` distinct agents.
struct MaxCycleAgents {
  std::size_t limit = 2;
  friend bool operator==(MaxCycleAgents, MaxCycleAgents) = default;
};
// Only one-for-one swaps between pairs of agents.
struct PairwiseOnly {
  friend bool operator==(PairwiseOnly, PairwiseOnly) = default;
};
// Every non-null item an agent receives appears in one of her demands.
struct DesirableOnly {
  friend bool operator==(DesirableOnly, DesirableOnly) = default;
};

using Constraint =
    std::variant<Unrestricted, StronglyIndividuallyRational, IndividuallyRational,
                 MaxCycleAgents, PairwiseOnly, DesirableOnly>;

// Throws InvalidArgument for a cap below 2.
Constraint make_max_cycle_agents(std::size_t limit);

// Accepts unrestricted | sir | ir | maxcycle=<L> | pairwise | desirable.
Constraint parse_constraint(std::string_view token);
std::string to_string(const Constraint& constraint);

// Conjunction of constraints. Order is preserved as given.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(std::initializer_list<Constraint> constraints)
      : constraints_(constraints) {}
  explicit ConstraintSet(std::vector<Constraint> constraints)
      : constraints_(std::move(constraints)) {}

  // Comma-separated tokens, e.g. "sir,maxcycle=3".
  static ConstraintSet parse(std::string_view text);
  std::string to_string() const;

  const std::vector<Constraint>& constraints() const { return constraints_; }
  bool empty() const { return constraints_.empty(); }

  template <typename T>
  bool contains() const {
    for (const auto& c : constraints_) {
      if (std::holds_alternative<T>(c)) return true;
    }
    return false;
  }
  // Tightest MaxCycleAgents cap (PairwiseOnly counts as 2), if any.
  std::optional<std::size_t> cycle_cap() const;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  std::vector<Constraint> constraints_;
};

struct NamedConstraintSet {
  std::string name;
  ConstraintSet constraints;
};

// The constraint sets the property suites iterate over.
std::vector<NamedConstraintSet> builtin_constraint_sets();

struct TradeEdge {
  AgentIndex from = 0;
  AgentIndex to = 0;
  ItemIndex item = 0;
  friend bool operator==(const TradeEdge&, const TradeEdge&) = default;
};

// Agent-level multigraph with one edge per item that changed hands, ordered by
// item.
struct TradeGraph {
  std::size_t agent_count = 0;
  std::vector<TradeEdge> edges;
};

struct ClosedWalk {
  std::vector<TradeEdge> edges;
  std::size_t agent_count = 0;  // distinct agents visited
};

struct CycleDecomposition {
  std::vector<ClosedWalk> walks;
};

TradeGraph trade_graph(const Market& market, const Allocation& allocation);

// Partition of the edges into closed walks, each visiting at most
// `max_agents` distinct agents, or nullopt if none exists.
std::optional<CycleDecomposition> find_cycle_decomposition(
    const TradeGraph& graph, std::size_t max_agents);

bool satisfies_constraint(const Market& market, const Allocation& allocation,
                          const Constraint& constraint);
bool satisfies_constraints(const Market& market, const Allocation& allocation,
                           const ConstraintSet& constraints);

inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

struct EnumerationOptions {
  // Search nodes (single item placements) visited before BudgetExceeded.
  std::uint64_t node_budget = kDefaultNodeBudget;
  // OpenMP threads; 0 uses the runtime default.
  int threads = 0;
};

// All feasible allocations in canonical order. Pruned search, parallel over
// prefixes of the item order.
std::vector<Allocation> enumerate_feasible(const Market& market,
                                           const ConstraintSet& constraints,
                                           const EnumerationOptions& options = {});

// Serial reference: visits all n^|O| total assignments and filters them with
// satisfies_constraints. Throws BudgetExceeded if n^|O| exceeds the budget.
std::vector<Allocation> enumerate_feasible_reference(
    const Market& market, const ConstraintSet& constraints,
    const EnumerationOptions& options = {});

}  // namespace exchange
