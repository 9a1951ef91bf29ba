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

#include <algorithm>

#include "exchange/auditors.hpp"

namespace exchange {

namespace {

using Ids = std::vector<std::string>;

// Every `size`-element subset of `items`, in lexicographic order.
std::vector<Ids> subsets_of_size(const Ids& items, std::size_t size) {
  std::vector<Ids> out;
  std::vector<bool> pick(items.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
  do {
    Ids s;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (pick[k]) s.push_back(items[k]);
    }
    out.push_back(std::move(s));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

CounterexampleFixture example1() {
  MarketDescription d;
  for (const char* id : {"c1", "c2", "c3", "c4", "h", "p", "s"}) {
    d.items.push_back({id, false});
  }
  d.agents.push_back({"1",
                      {"c1", "c2", "c3", "c4"},
                      {{"c1", "p"}, {"c2", "p"}, {"c3", "p"}, {"c4", "p"}}});
  d.agents.push_back({"2", {"p"}, {{"c1"}, {"s", "h"}}});
  d.agents.push_back({"3", {"s", "h"}, {{"c4"}}});
  return CounterexampleFixture{"example1", Market::build(d),
                               ConstraintSet{StronglyIndividuallyRational{}},
                               {}, {}};
}

CounterexampleFixture theorem5() {
  const std::map<std::string, Ids> endowments = {
      {"1", {"a1", "a2", "a3"}},
      {"2", {"b1", "b2", "b3"}},
      {"3", {"c1", "c2", "c3"}},
  };
  const std::map<std::string, Ids> liked = {
      {"1", {"b1", "b3", "c1", "c2", "c3"}},
      {"2", {"a1", "a3", "c1", "c2", "c3"}},
      {"3", {"a2", "a3", "b2", "b3"}},
  };
  const std::map<std::string, Ids> narrowed = {
      {"1", {"b3", "c1", "c2", "c3"}},
      {"2", {"a3", "c1", "c2", "c3"}},
      {"3", {"a3", "b2", "b3"}},
  };
  MarketDescription d;
  for (const auto& [agent, items] : endowments) {
    for (const auto& item : items) d.items.push_back({item, false});
    d.agents.push_back({agent, items, subsets_of_size(liked.at(agent), 3)});
  }
  return CounterexampleFixture{"theorem5", Market::build(d),
                               ConstraintSet{PairwiseOnly{}, DesirableOnly{}},
                               liked, narrowed};
}

}  // namespace

CounterexampleFixture fixture(std::string_view name) {
  if (name == "example1") return example1();
  if (name == "theorem5") return theorem5();
  throw InvalidArgument("unknown fixture '" + std::string(name) +
                        "' (expected example1 or theorem5)");
}

MisreportScenario scripted_misreport(const CounterexampleFixture& fixture,
                                     AgentIndex agent) {
  const Market& market = fixture.market;
  const auto it = fixture.scripted_desirable.find(market.agent_id(agent));
  if (it == fixture.scripted_desirable.end()) {
    throw InvalidArgument("fixture '" + fixture.name +
                          "' has no scripted misreport for agent '" +
                          market.agent_id(agent) + "'");
  }
  std::vector<ItemSet> demands;
  for (const auto& bundle : subsets_of_size(it->second, 3)) {
    demands.push_back(market.bundle(bundle));
  }
  return make_misreport(market, agent, market.endowment(agent),
                        std::move(demands));
}

AuditReport replicate_impossibility(const EnumerationOptions& options) {
  const CounterexampleFixture fx = fixture("theorem5");
  const Market& market = fx.market;
  const auto feasible = enumerate_feasible(market, fx.constraints, options);

  auto extended = fx.constraints.constraints();
  extended.push_back(IndividuallyRational{});
  const ConstraintSet with_ir(std::move(extended));
  const auto feasible_ir = enumerate_feasible(market, with_ir, options);

  AuditReport report;
  report.kind = AuditKind::kImpossibility;
  auto& counts = report.search_space;
  counts["feasible_allocations"] = feasible.size();
  counts["ir_filter_coincides"] = feasible == feasible_ir ? 1 : 0;
  counts["max_satisfied"] =
      static_cast<std::uint64_t>(max_satisfied_oracle(market, fx.constraints, options));
  counts["cases"] = 0;
  counts["pareto_optimal_outputs"] = 0;
  counts["cases_with_unsatisfied_agent"] = 0;
  counts["cases_manipulated"] = 0;

  for (MechanismKind kind : {MechanismKind::kCp, MechanismKind::kCup}) {
    for (const auto& priority : PriorityOrder::all(market)) {
      const MechanismSpec spec{kind, priority, fx.constraints};
      const Allocation outcome = choose_from(market, spec, feasible);
      counts["cases"] += 1;
      if (!audit_constrained_pareto(market, outcome, feasible).violation()) {
        counts["pareto_optimal_outputs"] += 1;
      }
      std::vector<MisreportScenario> scripted;
      for (AgentIndex a = 0; a < market.agent_count(); ++a) {
        if (!satisfies(market, outcome, a)) {
          scripted.push_back(scripted_misreport(fx, a));
        }
      }
      if (scripted.empty()) continue;
      counts["cases_with_unsatisfied_agent"] += 1;
      auto audit = audit_strategyproofness(market, spec, scripted, options);
      if (audit.violation()) {
        counts["cases_manipulated"] += 1;
        report.witnesses.push_back(std::move(audit.witnesses.front()));
      }
    }
  }
  return report;
}

}  // namespace exchange
