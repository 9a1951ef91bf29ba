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

#include "exchange/market.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace exchange {

std::string Violation::to_string() const {
  std::ostringstream out;
  out << message;
  auto list = [&out](const char* label, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    out << " [" << label << ":";
    for (const auto& id : ids) out << ' ' << id;
    out << ']';
  };
  list("agents", agents);
  list("items", items);
  return out.str();
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string text = "invalid market";
  for (const auto& v : violations) text += "; " + v.to_string();
  return text;
}

}  // namespace

InvalidMarket::InvalidMarket(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<ItemIndex> ItemSet::indices() const {
  std::vector<ItemIndex> out;
  out.reserve(size());
  for_each([&out](ItemIndex i) { out.push_back(i); });
  return out;
}

bool canonical_less(ItemSet a, ItemSet b) {
  const std::uint64_t diff = a.bits() ^ b.bits();
  if (diff == 0) return false;
  const int k = std::countr_zero(diff);
  const auto above = [k](ItemSet s) {
    return k == 63 ? std::uint64_t{0} : (s.bits() >> (k + 1));
  };
  if (a.contains(k)) {
    // b either ends before k (b is a prefix of a) or continues past k.
    return above(b) != 0;
  }
  return above(a) == 0;
}

ValidationResult validate_market(const MarketDescription& d) {
  ValidationResult result;
  auto report = [&result](std::string message, std::vector<std::string> agents,
                          std::vector<std::string> items) {
    result.violations.push_back(
        Violation{std::move(message), std::move(agents), std::move(items)});
  };

  if (d.agents.empty()) report("at least one agent", {}, {});

  std::map<std::string, bool> items;  // id -> is_null
  std::set<std::string> duplicates;
  for (const auto& item : d.items) {
    if (item.id.empty()) report("empty item id", {}, {});
    if (!items.emplace(item.id, item.is_null).second) duplicates.insert(item.id);
  }
  for (const auto& id : duplicates) report("duplicate item id", {}, {id});

  std::set<std::string> withdrawn;
  for (const auto& id : d.withdrawn) {
    if (items.contains(id) || !withdrawn.insert(id).second) {
      report("withdrawn item also listed in pool", {}, {id});
    }
  }
  if (items.size() + withdrawn.size() > kMaxItems) {
    report("too many items (at most 64)", {}, {});
  }
  if (d.agents.size() > kMaxAgents) report("too many agents (at most 32)", {}, {});

  std::set<std::string> agent_ids;
  std::map<std::string, std::string> endowed_by;
  for (const auto& agent : d.agents) {
    if (agent.id.empty()) report("empty agent id", {}, {});
    if (!agent_ids.insert(agent.id).second) {
      report("duplicate agent id", {agent.id}, {});
    }
    for (const auto& item : agent.endowment) {
      if (!items.contains(item)) {
        report("unknown item in endowment", {agent.id}, {item});
        continue;
      }
      auto [it, fresh] = endowed_by.emplace(item, agent.id);
      if (!fresh && it->second != agent.id) {
        report("endowments overlap", {it->second, agent.id}, {item});
      }
    }
    for (const auto& bundle : agent.demands) {
      for (const auto& item : bundle) {
        auto it = items.find(item);
        if (it == items.end()) {
          if (!withdrawn.contains(item)) {
            report("unknown item in demand", {agent.id}, {item});
          }
        } else if (it->second) {
          report("null item in demand", {agent.id}, {item});
        }
      }
    }
  }
  for (const auto& [id, is_null] : items) {
    if (!endowed_by.contains(id)) report("item not endowed", {}, {id});
  }
  return result;
}

Market Market::build(const MarketDescription& d) {
  if (auto v = validate_market(d); !v.ok()) throw InvalidMarket(v.violations);

  auto universe = std::make_shared<Universe>();
  std::map<std::string, bool> items;
  for (const auto& item : d.items) items.emplace(item.id, item.is_null);
  for (const auto& id : d.withdrawn) items.emplace(id, false);
  std::map<std::string, ItemIndex> index;
  for (const auto& [id, is_null] : items) {
    const auto i = static_cast<ItemIndex>(universe->ids.size());
    index.emplace(id, i);
    universe->ids.push_back(id);
    if (is_null) universe->null_mask.insert(i);
  }

  Market market;
  market.universe_ = std::move(universe);
  market.owner_.assign(items.size(), kNoAgent);

  std::vector<const AgentDecl*> sorted;
  for (const auto& a : d.agents) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(),
            [](const AgentDecl* x, const AgentDecl* y) { return x->id < y->id; });
  for (const AgentDecl* decl : sorted) {
    AgentData agent;
    agent.id = decl->id;
    const auto agent_index = static_cast<AgentIndex>(market.agents_.size());
    for (const auto& item : decl->endowment) {
      const ItemIndex i = index.at(item);
      agent.endowment.insert(i);
      market.owner_[i] = agent_index;
    }
    for (const auto& bundle : decl->demands) {
      ItemSet demand;
      for (const auto& item : bundle) demand.insert(index.at(item));
      agent.demands.push_back(demand);
    }
    canonicalize(agent.demands);
    for (ItemSet demand : agent.demands) agent.desirable |= demand;
    market.pool_ |= agent.endowment;
    market.agents_.push_back(std::move(agent));
  }
  return market;
}

void Market::canonicalize(std::vector<ItemSet>& demands) {
  std::sort(demands.begin(), demands.end(), canonical_less);
  demands.erase(std::unique(demands.begin(), demands.end()), demands.end());
}

MarketDescription Market::describe() const {
  MarketDescription d;
  for (ItemIndex i = 0; i < item_count(); ++i) {
    if (pool_.contains(i)) {
      d.items.push_back({universe_->ids[i], is_null(i)});
    } else {
      d.withdrawn.push_back(universe_->ids[i]);
    }
  }
  for (const auto& agent : agents_) {
    AgentDecl decl;
    decl.id = agent.id;
    decl.endowment = item_ids(agent.endowment);
    for (ItemSet demand : agent.demands) decl.demands.push_back(item_ids(demand));
    d.agents.push_back(std::move(decl));
  }
  return d;
}

const Market::AgentData& Market::checked(AgentIndex agent) const {
  if (agent >= agents_.size()) {
    throw UnknownAgent("#" + std::to_string(agent));
  }
  return agents_[agent];
}

const std::string& Market::agent_id(AgentIndex agent) const {
  return checked(agent).id;
}

const std::string& Market::item_id(ItemIndex item) const {
  if (item >= item_count()) throw UnknownItem("#" + std::to_string(item));
  return universe_->ids[item];
}

std::optional<AgentIndex> Market::find_agent(std::string_view id) const {
  auto it = std::lower_bound(
      agents_.begin(), agents_.end(), id,
      [](const AgentData& a, std::string_view key) { return a.id < key; });
  if (it == agents_.end() || it->id != id) return std::nullopt;
  return static_cast<AgentIndex>(it - agents_.begin());
}

std::optional<ItemIndex> Market::find_item(std::string_view id) const {
  const auto& ids = universe_->ids;
  auto it = std::lower_bound(ids.begin(), ids.end(), id,
                             [](const std::string& a, std::string_view key) {
                               return a < key;
                             });
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<ItemIndex>(it - ids.begin());
}

AgentIndex Market::agent_index(std::string_view id) const {
  if (auto a = find_agent(id)) return *a;
  throw UnknownAgent(std::string(id));
}

ItemIndex Market::item_index(std::string_view id) const {
  if (auto i = find_item(id)) return *i;
  throw UnknownItem(std::string(id));
}

ItemSet Market::bundle(std::span<const std::string> ids) const {
  ItemSet out;
  for (const auto& id : ids) out.insert(item_index(id));
  return out;
}

std::vector<std::string> Market::item_ids(ItemSet items) const {
  std::vector<std::string> out;
  items.for_each([&](ItemIndex i) { out.push_back(universe_->ids.at(i)); });
  return out;
}

std::vector<std::string> Market::agent_ids() const {
  std::vector<std::string> out;
  for (const auto& a : agents_) out.push_back(a.id);
  return out;
}

Market Market::with_report(AgentIndex agent, ItemSet reported_endowment,
                           std::vector<ItemSet> reported_demands) const {
  const AgentData& data = checked(agent);
  if (!reported_endowment.is_subset_of(data.endowment)) {
    throw InvalidArgument("reported endowment of agent '" + data.id +
                          "' is not a subset of her endowment");
  }
  const ItemSet universe = ItemSet::first(item_count());
  for (ItemSet d : reported_demands) {
    if (!d.is_subset_of(universe)) {
      throw InvalidArgument("reported demand names an unknown item");
    }
    if (d.intersects(null_items())) {
      throw InvalidArgument("reported demand names a null item");
    }
  }
  Market out = *this;
  const ItemSet withheld = data.endowment - reported_endowment;
  out.pool_ -= withheld;
  withheld.for_each([&out](ItemIndex i) { out.owner_[i] = kNoAgent; });
  AgentData& target = out.agents_[agent];
  target.endowment = reported_endowment;
  canonicalize(reported_demands);
  target.demands = std::move(reported_demands);
  target.desirable = ItemSet();
  for (ItemSet d : target.demands) target.desirable |= d;
  return out;
}

bool operator==(const Market& a, const Market& b) {
  if (a.pool_ != b.pool_ || a.owner_ != b.owner_) return false;
  if (a.universe_ != b.universe_ &&
      (a.universe_->ids != b.universe_->ids ||
       a.universe_->null_mask != b.universe_->null_mask)) {
    return false;
  }
  if (a.agents_.size() != b.agents_.size()) return false;
  for (std::size_t i = 0; i < a.agents_.size(); ++i) {
    const auto& x = a.agents_[i];
    const auto& y = b.agents_[i];
    if (x.id != y.id || x.endowment != y.endowment || x.demands != y.demands) {
      return false;
    }
  }
  return true;
}

Allocation::Allocation(const Market& market, std::vector<AgentIndex> assignment)
    : assignment_(std::move(assignment)) {
  if (assignment_.size() != market.item_count()) {
    throw InvalidArgument("assignment must cover every item of the market");
  }
  bundles_.assign(market.agent_count(), ItemSet());
  for (ItemIndex i = 0; i < assignment_.size(); ++i) {
    const AgentIndex a = assignment_[i];
    if (!market.pool().contains(i)) {
      if (a != kNoAgent) {
        throw InvalidArgument("withdrawn item '" + market.item_id(i) +
                              "' cannot be assigned");
      }
      continue;
    }
    if (a >= market.agent_count()) {
      throw InvalidArgument("item '" + market.item_id(i) +
                            "' is not assigned to a known agent");
    }
    bundles_[a].insert(i);
  }
}

int SatisfactionProfile::total() const {
  return std::accumulate(flags.begin(), flags.end(), 0);
}

PriorityOrder::PriorityOrder(const Market& market, std::vector<AgentIndex> order)
    : order_(std::move(order)) {
  std::vector<bool> seen(market.agent_count(), false);
  if (order_.size() != market.agent_count()) {
    throw InvalidArgument("priority order must list every agent exactly once");
  }
  for (AgentIndex a : order_) {
    if (a >= seen.size() || seen[a]) {
      throw InvalidArgument("priority order must list every agent exactly once");
    }
    seen[a] = true;
  }
}

PriorityOrder PriorityOrder::from_ids(const Market& market,
                                      std::span<const std::string> ids) {
  std::vector<AgentIndex> order;
  for (const auto& id : ids) order.push_back(market.agent_index(id));
  return PriorityOrder(market, std::move(order));
}

PriorityOrder PriorityOrder::canonical(const Market& market) {
  std::vector<AgentIndex> order(market.agent_count());
  std::iota(order.begin(), order.end(), AgentIndex{0});
  return PriorityOrder(market, std::move(order));
}

std::vector<PriorityOrder> PriorityOrder::all(const Market& market) {
  std::vector<AgentIndex> order(market.agent_count());
  std::iota(order.begin(), order.end(), AgentIndex{0});
  std::vector<PriorityOrder> out;
  do {
    out.emplace_back(market, order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::vector<std::string> PriorityOrder::ids(const Market& market) const {
  std::vector<std::string> out;
  for (AgentIndex a : order_) out.push_back(market.agent_id(a));
  return out;
}

bool satisfies(const Market& market, const Allocation& allocation,
               AgentIndex agent) {
  (void)market.agent_id(agent);
  return market.covers(agent, allocation.bundle(agent));
}

bool satisfies(const Market& market, const Allocation& allocation,
               std::string_view agent) {
  return satisfies(market, allocation, market.agent_index(agent));
}

int utility(const Market& market, const Allocation& allocation,
            AgentIndex agent) {
  return satisfies(market, allocation, agent) ? 1 : 0;
}

int utility(const Market& market, const Allocation& allocation,
            std::string_view agent) {
  return utility(market, allocation, market.agent_index(agent));
}

SatisfactionProfile satisfaction_profile(const Market& market,
                                         const Allocation& allocation) {
  SatisfactionProfile profile;
  profile.flags.resize(market.agent_count());
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    profile.flags[a] = market.covers(a, allocation.bundle(a)) ? 1 : 0;
  }
  return profile;
}

std::uint64_t satisfied_mask(const Market& market, const Allocation& allocation) {
  std::uint64_t mask = 0;
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    if (market.covers(a, allocation.bundle(a))) mask |= std::uint64_t{1} << a;
  }
  return mask;
}

bool weakly_prefers(const Market& market, AgentIndex agent, ItemSet x, ItemSet y) {
  (void)market.agent_id(agent);
  return !market.covers(agent, y) || market.covers(agent, x);
}

bool strictly_prefers(const Market& market, AgentIndex agent, ItemSet x,
                      ItemSet y) {
  return weakly_prefers(market, agent, x, y) &&
         !weakly_prefers(market, agent, y, x);
}

bool indifferent(const Market& market, AgentIndex agent, ItemSet x, ItemSet y) {
  return weakly_prefers(market, agent, x, y) &&
         weakly_prefers(market, agent, y, x);
}

bool is_sir(const Market& market, const Allocation& allocation) {
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    const ItemSet bundle = allocation.bundle(a);
    if (bundle != market.endowment(a) && !market.covers(a, bundle)) return false;
  }
  return true;
}

bool is_ir(const Market& market, const Allocation& allocation) {
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    if (market.covers(a, market.endowment(a)) &&
        !market.covers(a, allocation.bundle(a))) {
      return false;
    }
  }
  return true;
}

bool pareto_dominates(const Market& market, const Allocation& y,
                      const Allocation& x) {
  const std::uint64_t uy = satisfied_mask(market, y);
  const std::uint64_t ux = satisfied_mask(market, x);
  return (ux & ~uy) == 0 && uy != ux;
}

Allocation endowment_allocation(const Market& market) {
  std::vector<AgentIndex> assignment(market.item_count(), kNoAgent);
  for (ItemIndex i = 0; i < market.item_count(); ++i) {
    assignment[i] = market.owner(i);
  }
  return Allocation(market, std::move(assignment));
}

}  // namespace exchange
