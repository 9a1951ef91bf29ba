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

#include <bit>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exchange/errors.hpp"

namespace exchange {

using AgentIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

inline constexpr AgentIndex kNoAgent = std::numeric_limits<AgentIndex>::max();
inline constexpr std::size_t kMaxItems = 64;
inline constexpr std::size_t kMaxAgents = 32;

// A set of item indices of one market, stored as a 64-bit mask.
class ItemSet {
 public:
  constexpr ItemSet() = default;
  constexpr explicit ItemSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr ItemSet single(std::size_t item) {
    return ItemSet(std::uint64_t{1} << item);
  }
  // Items [0, count).
  static constexpr ItemSet first(std::size_t count) {
    return count >= 64 ? ItemSet(~std::uint64_t{0})
                       : ItemSet((std::uint64_t{1} << count) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr bool contains(std::size_t item) const {
    return (bits_ >> item) & 1U;
  }
  constexpr bool is_subset_of(ItemSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr bool intersects(ItemSet other) const {
    return (bits_ & other.bits_) != 0;
  }

  constexpr void insert(std::size_t item) { bits_ |= std::uint64_t{1} << item; }
  constexpr void erase(std::size_t item) { bits_ &= ~(std::uint64_t{1} << item); }

  constexpr ItemSet operator|(ItemSet o) const { return ItemSet(bits_ | o.bits_); }
  constexpr ItemSet operator&(ItemSet o) const { return ItemSet(bits_ & o.bits_); }
  // Set difference.
  constexpr ItemSet operator-(ItemSet o) const { return ItemSet(bits_ & ~o.bits_); }
  constexpr ItemSet& operator|=(ItemSet o) { bits_ |= o.bits_; return *this; }
  constexpr ItemSet& operator&=(ItemSet o) { bits_ &= o.bits_; return *this; }
  constexpr ItemSet& operator-=(ItemSet o) { bits_ &= ~o.bits_; return *this; }

  std::vector<ItemIndex> indices() const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t rest = bits_; rest != 0; rest &= rest - 1) {
      f(static_cast<ItemIndex>(std::countr_zero(rest)));
    }
  }

  friend constexpr bool operator==(ItemSet, ItemSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

using Bundle = ItemSet;

// Orders bundles by their sorted item-index lists, lexicographically.
bool canonical_less(ItemSet a, ItemSet b);

struct ItemDecl {
  std::string id;
  bool is_null = false;
  friend bool operator==(const ItemDecl&, const ItemDecl&) = default;
};

struct AgentDecl {
  std::string id;
  std::vector<std::string> endowment;
  std::vector<std::vector<std::string>> demands;
  friend bool operator==(const AgentDecl&, const AgentDecl&) = default;
};

// String-level description of an exchange market, as read from or written to
// an instance document. `items` is the item pool O. `withdrawn` lists items
// that some agent kept out of the pool; other agents' demands may still name
// them, but they can never be allocated.
struct MarketDescription {
  std::vector<ItemDecl> items;
  std::vector<AgentDecl> agents;
  std::vector<std::string> withdrawn;
  friend bool operator==(const MarketDescription&,
                         const MarketDescription&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every structural invariant of a market and reports all violations.
ValidationResult validate_market(const MarketDescription& description);

// Immutable, validated exchange market. Agents and items are stored in
// lexicographic id order, so index order is the canonical order.
class Market {
 public:
  // Throws InvalidMarket listing every violation.
  static Market build(const MarketDescription& description);

  // Canonical description: sorted ids, sorted bundles.
  MarketDescription describe() const;

  std::size_t agent_count() const { return agents_.size(); }
  // Size of the item universe, including withdrawn items.
  std::size_t item_count() const { return universe_->ids.size(); }

  ItemSet pool() const { return pool_; }
  ItemSet null_items() const { return universe_->null_mask; }
  ItemSet withdrawn() const { return ItemSet::first(item_count()) - pool_; }

  const std::string& agent_id(AgentIndex agent) const;
  const std::string& item_id(ItemIndex item) const;
  bool is_null(ItemIndex item) const { return universe_->null_mask.contains(item); }

  std::optional<AgentIndex> find_agent(std::string_view id) const;
  std::optional<ItemIndex> find_item(std::string_view id) const;
  AgentIndex agent_index(std::string_view id) const;  // throws UnknownAgent
  ItemIndex item_index(std::string_view id) const;    // throws UnknownItem

  ItemSet endowment(AgentIndex agent) const { return checked(agent).endowment; }
  std::span<const ItemSet> demands(AgentIndex agent) const {
    return checked(agent).demands;
  }
  // Items appearing in at least one of the agent's demand bundles.
  ItemSet desirable(AgentIndex agent) const { return checked(agent).desirable; }
  // kNoAgent for withdrawn items.
  AgentIndex owner(ItemIndex item) const { return owner_.at(item); }

  // True iff `bundle` is a superset of some demand bundle of `agent`.
  bool covers(AgentIndex agent, ItemSet bundle) const {
    for (ItemSet d : agents_[agent].demands) {
      if (d.is_subset_of(bundle)) return true;
    }
    return false;
  }

  ItemSet bundle(std::span<const std::string> ids) const;  // throws UnknownItem
  std::vector<std::string> item_ids(ItemSet items) const;
  std::vector<std::string> agent_ids() const;

  // Same market, except `agent` brings only `reported_endowment` (a subset of
  // her endowment) and reports `reported_demands`. The rest of her endowment
  // leaves the pool.
  Market with_report(AgentIndex agent, ItemSet reported_endowment,
                     std::vector<ItemSet> reported_demands) const;

  friend bool operator==(const Market& a, const Market& b);

 private:
  struct Universe {
    std::vector<std::string> ids;
    ItemSet null_mask;
  };
  struct AgentData {
    std::string id;
    ItemSet endowment;
    std::vector<ItemSet> demands;
    ItemSet desirable;
  };

  Market() = default;
  const AgentData& checked(AgentIndex agent) const;
  static void canonicalize(std::vector<ItemSet>& demands);

  std::shared_ptr<const Universe> universe_;
  std::vector<AgentData> agents_;
  std::vector<AgentIndex> owner_;
  ItemSet pool_;
};

namespace detail {
struct UncheckedTag {};
}  // namespace detail

// Total assignment of every pool item to one agent. Withdrawn items map to
// kNoAgent. Ordering is lexicographic over the assignment in item order.
class Allocation {
 public:
  Allocation() = default;
  // Throws InvalidArgument if the assignment is not total over the pool.
  Allocation(const Market& market, std::vector<AgentIndex> assignment);
  Allocation(std::vector<AgentIndex> assignment, std::vector<ItemSet> bundles,
             detail::UncheckedTag)
      : assignment_(std::move(assignment)), bundles_(std::move(bundles)) {}

  AgentIndex holder(ItemIndex item) const { return assignment_.at(item); }
  std::span<const AgentIndex> assignment() const { return assignment_; }
  ItemSet bundle(AgentIndex agent) const { return bundles_.at(agent); }
  std::span<const ItemSet> bundles() const { return bundles_; }

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.assignment_ == b.assignment_;
  }
  friend std::strong_ordering operator<=>(const Allocation& a,
                                          const Allocation& b) {
    return a.assignment_ <=> b.assignment_;
  }

 private:
  std::vector<AgentIndex> assignment_;
  std::vector<ItemSet> bundles_;
};

struct SatisfactionProfile {
  std::vector<std::uint8_t> flags;  // indexed by agent

  int total() const;
  friend bool operator==(const SatisfactionProfile&,
                         const SatisfactionProfile&) = default;
};

// A permutation of the market's agents; order()[j] is the agent in turn j.
class PriorityOrder {
 public:
  PriorityOrder() = default;
  PriorityOrder(const Market& market, std::vector<AgentIndex> order);

  static PriorityOrder from_ids(const Market& market,
                                std::span<const std::string> ids);
  static PriorityOrder canonical(const Market& market);
  // All n! orders, lexicographically.
  static std::vector<PriorityOrder> all(const Market& market);

  std::span<const AgentIndex> order() const { return order_; }
  std::size_t size() const { return order_.size(); }
  AgentIndex operator[](std::size_t turn) const { return order_[turn]; }
  std::vector<std::string> ids(const Market& market) const;

  friend bool operator==(const PriorityOrder&, const PriorityOrder&) = default;

 private:
  std::vector<AgentIndex> order_;
};

bool satisfies(const Market& market, const Allocation& allocation,
               AgentIndex agent);
bool satisfies(const Market& market, const Allocation& allocation,
               std::string_view agent);
int utility(const Market& market, const Allocation& allocation,
            AgentIndex agent);
int utility(const Market& market, const Allocation& allocation,
            std::string_view agent);

SatisfactionProfile satisfaction_profile(const Market& market,
                                         const Allocation& allocation);
// Bit a is set iff agent a is satisfied.
std::uint64_t satisfied_mask(const Market& market, const Allocation& allocation);

// Dichotomous weak preference: x is weakly preferred to y unless y satisfies
// the agent and x does not.
bool weakly_prefers(const Market& market, AgentIndex agent, ItemSet x, ItemSet y);
bool strictly_prefers(const Market& market, AgentIndex agent, ItemSet x, ItemSet y);
bool indifferent(const Market& market, AgentIndex agent, ItemSet x, ItemSet y);

// Every agent keeps exactly her endowment or receives a satisfying bundle.
bool is_sir(const Market& market, const Allocation& allocation);
// Every agent whose endowment satisfies her stays satisfied.
bool is_ir(const Market& market, const Allocation& allocation);
bool pareto_dominates(const Market& market, const Allocation& y,
                      const Allocation& x);

Allocation endowment_allocation(const Market& market);

}  // namespace exchange
