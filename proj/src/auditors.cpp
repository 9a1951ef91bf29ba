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

#include "exchange/auditors.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace exchange {

std::string to_string(AuditKind kind) {
  switch (kind) {
    case AuditKind::kStrategyproofness:
      return "strategyproofness";
    case AuditKind::kWeakConsistency:
      return "weak-consistency";
    case AuditKind::kConstrainedPareto:
      return "constrained-pareto";
    case AuditKind::kImpossibility:
      return "impossibility-replication";
  }
  return "unknown";
}

MisreportScenario make_misreport(const Market& market, AgentIndex agent,
                                 ItemSet reported_endowment,
                                 std::vector<ItemSet> reported_demands) {
  const ItemSet endowment = market.endowment(agent);
  if (!reported_endowment.is_subset_of(endowment)) {
    throw InvalidArgument("agent '" + market.agent_id(agent) +
                          "' can only report items she owns");
  }
  return MisreportScenario{agent, reported_endowment,
                           std::move(reported_demands),
                           endowment - reported_endowment};
}

namespace {

// Subsets of `base`, by size, then canonically.
std::vector<ItemSet> subsets_by_size(ItemSet base, std::size_t max_size) {
  std::vector<ItemSet> out;
  const auto items = base.indices();
  const std::size_t m = items.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > max_size) continue;
    ItemSet s;
    for (std::size_t k = 0; k < m; ++k) {
      if ((mask >> k) & 1U) s.insert(items[k]);
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](ItemSet a, ItemSet b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return canonical_less(a, b);
  });
  return out;
}

void push_checked(std::vector<MisreportScenario>& out, MisreportScenario s,
                  const MisreportBudget& budget) {
  if (out.size() >= budget.max_scenarios) {
    throw BudgetExceeded("misreport space exceeds " +
                         std::to_string(budget.max_scenarios) + " scenarios");
  }
  out.push_back(std::move(s));
}

}  // namespace

std::vector<MisreportScenario> enumerate_misreports(const Market& market,
                                                    AgentIndex agent,
                                                    const MisreportBudget& budget) {
  const ItemSet endowment = market.endowment(agent);
  const auto truthful = market.demands(agent);
  const std::vector<ItemSet> truth(truthful.begin(), truthful.end());
  const std::size_t d = truth.size();
  if (budget.subset_demands && d >= 31) {
    throw BudgetExceeded("demand set too large for sub-report enumeration");
  }

  // Demand subsets, largest first, so D_i itself leads.
  std::vector<std::uint64_t> demand_masks;
  if (budget.subset_demands) {
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << d); ++m) {
      demand_masks.push_back(m);
    }
    std::stable_sort(demand_masks.begin(), demand_masks.end(),
                     [](std::uint64_t a, std::uint64_t b) {
                       return std::popcount(a) > std::popcount(b);
                     });
  }

  std::vector<MisreportScenario> out;
  push_checked(out, make_misreport(market, agent, endowment, truth), budget);

  for (ItemSet withheld : subsets_by_size(endowment, endowment.size())) {
    const ItemSet reported = endowment - withheld;
    for (std::uint64_t m : demand_masks) {
      std::vector<ItemSet> demands;
      for (std::size_t k = 0; k < d; ++k) {
        if ((m >> k) & 1U) demands.push_back(truth[k]);
      }
      if (withheld.empty() && demands == truth) continue;
      push_checked(out, make_misreport(market, agent, reported, std::move(demands)),
                   budget);
    }
    if (!budget.single_bundles) continue;
    const ItemSet open = market.pool() - withheld - market.null_items();
    for (ItemSet b : subsets_by_size(open, budget.bundle_cap)) {
      if (b.empty()) continue;
      const bool seen_as_subset =
          budget.subset_demands &&
          std::find(truth.begin(), truth.end(), b) != truth.end();
      const bool seen_as_truth = withheld.empty() && truth.size() == 1 &&
                                 truth.front() == b;
      if (seen_as_subset || seen_as_truth) continue;
      push_checked(out, make_misreport(market, agent, reported, {b}), budget);
    }
  }
  return out;
}

Market apply_misreport(const Market& market, const MisreportScenario& scenario) {
  if (scenario.withheld != market.endowment(scenario.agent) -
                               scenario.reported_endowment) {
    throw InvalidArgument("withheld items must equal endowment minus report");
  }
  return market.with_report(scenario.agent, scenario.reported_endowment,
                            scenario.reported_demands);
}

ItemSet realized_bundle(ItemSet misreport_allocation_bundle, ItemSet withheld) {
  if (misreport_allocation_bundle.intersects(withheld)) {
    throw InvalidArgument("withheld items cannot also be allocated");
  }
  return misreport_allocation_bundle | withheld;
}

namespace {

int resolve_threads(int requested) {
#ifdef _OPENMP
  if (omp_in_parallel()) return 1;
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

std::vector<std::uint64_t> masks_of(const Market& market,
                                    std::span<const Allocation> allocations) {
  std::vector<std::uint64_t> out;
  out.reserve(allocations.size());
  for (const auto& a : allocations) out.push_back(satisfied_mask(market, a));
  return out;
}

// Shared machinery for the batched strategyproofness audit. All specs carry
// the same constraint set.
class ManipulationSearch {
 public:
  ManipulationSearch(const Market& market, std::span<const MechanismSpec> specs,
                     const EnumerationOptions& options)
      : market_(market), specs_(specs), options_(options) {
    for (const auto& spec : specs_) {
      keys_.emplace_back(spec.kind, spec.priority);
      if (spec.priority.size() != market.agent_count()) {
        throw InvalidArgument("priority order does not match the market's agents");
      }
    }
    const auto feasible = enumerate_feasible(market, specs_[0].constraints, options);
    const auto masks = masks_of(market, feasible);
    feasible_count_ = feasible.size();
    for (const auto& key : keys_) {
      const std::size_t k = choose_index(key, masks);
      truthful_.push_back(feasible[k]);
      truthful_masks_.push_back(masks[k]);
    }
  }

  bool unsatisfied(std::size_t spec, AgentIndex agent) const {
    return ((truthful_masks_[spec] >> agent) & 1U) == 0;
  }

  std::uint64_t feasible_count() const { return feasible_count_; }

  // Runs every spec that leaves `agent` unsatisfied on each scenario. Result
  // [scenario][spec] holds a witness when the misreport pays off.
  std::vector<std::vector<std::optional<ManipulationWitness>>> probe(
      std::span<const MisreportScenario> scenarios) const {
    std::vector<std::vector<std::optional<ManipulationWitness>>> results(
        scenarios.size(),
        std::vector<std::optional<ManipulationWitness>>(specs_.size()));
    std::vector<std::exception_ptr> errors(scenarios.size());
    EnumerationOptions inner = options_;
    inner.threads = 1;
    const int threads = resolve_threads(options_.threads);
    const auto count = static_cast<std::ptrdiff_t>(scenarios.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
      try {
        results[s] = evaluate(scenarios[s], inner);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return results;
  }

 private:
  std::vector<std::optional<ManipulationWitness>> evaluate(
      const MisreportScenario& scenario, const EnumerationOptions& inner) const {
    std::vector<std::optional<ManipulationWitness>> out(specs_.size());
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < specs_.size(); ++k) {
      if (unsatisfied(k, scenario.agent)) active.push_back(k);
    }
    if (active.empty()) return out;
    const Market reported = apply_misreport(market_, scenario);
    const auto feasible =
        enumerate_feasible(reported, specs_[0].constraints, inner);
    const auto masks = masks_of(reported, feasible);
    for (std::size_t k : active) {
      const Allocation& chosen = feasible[choose_index(keys_[k], masks)];
      const ItemSet realized =
          realized_bundle(chosen.bundle(scenario.agent), scenario.withheld);
      if (!market_.covers(scenario.agent, realized)) continue;
      out[k] = ManipulationWitness{specs_[k].kind, specs_[k].priority, scenario,
                                   truthful_[k], chosen, realized};
    }
    return out;
  }

  const Market& market_;
  std::span<const MechanismSpec> specs_;
  EnumerationOptions options_;
  std::vector<PackedKey> keys_;
  std::vector<Allocation> truthful_;
  std::vector<std::uint64_t> truthful_masks_;
  std::uint64_t feasible_count_ = 0;
};

void audit_group(const Market& market, std::span<const MechanismSpec> specs,
                 std::span<const std::size_t> members,
                 const MisreportBudget& budget, const EnumerationOptions& options,
                 std::vector<AuditReport>& reports) {
  std::vector<MechanismSpec> group;
  for (std::size_t m : members) group.push_back(specs[m]);
  const ManipulationSearch search(market, group, options);

  for (std::size_t k = 0; k < group.size(); ++k) {
    auto& report = reports[members[k]];
    report.search_space["feasible_allocations"] = search.feasible_count();
    report.search_space["agents_probed"] = 0;
    report.search_space["scenarios"] = 0;
  }
  for (AgentIndex agent = 0; agent < market.agent_count(); ++agent) {
    bool needed = false;
    for (std::size_t k = 0; k < group.size(); ++k) {
      needed = needed || search.unsatisfied(k, agent);
    }
    if (!needed) continue;
    const auto scenarios = enumerate_misreports(market, agent, budget);
    const auto results = search.probe(scenarios);
    for (std::size_t k = 0; k < group.size(); ++k) {
      if (!search.unsatisfied(k, agent)) continue;
      auto& report = reports[members[k]];
      report.search_space["agents_probed"] += 1;
      report.search_space["scenarios"] += scenarios.size();
      for (const auto& row : results) {
        if (row[k]) report.witnesses.emplace_back(*row[k]);
      }
    }
  }
}

}  // namespace

std::vector<AuditReport> audit_strategyproofness(
    const Market& market, std::span<const MechanismSpec> specs,
    const MisreportBudget& budget, const EnumerationOptions& options) {
  std::vector<AuditReport> reports(specs.size());
  for (auto& r : reports) r.kind = AuditKind::kStrategyproofness;

  std::vector<bool> done(specs.size(), false);
  for (std::size_t first = 0; first < specs.size(); ++first) {
    if (done[first]) continue;
    std::vector<std::size_t> members;
    for (std::size_t k = first; k < specs.size(); ++k) {
      if (!done[k] && specs[k].constraints == specs[first].constraints) {
        members.push_back(k);
        done[k] = true;
      }
    }
    audit_group(market, specs, members, budget, options, reports);
  }
  return reports;
}

AuditReport audit_strategyproofness(const Market& market,
                                    const MechanismSpec& spec,
                                    const MisreportBudget& budget,
                                    const EnumerationOptions& options) {
  return audit_strategyproofness(market, std::span(&spec, 1), budget, options)
      .front();
}

AuditReport audit_strategyproofness(const Market& market,
                                    const MechanismSpec& spec,
                                    std::span<const MisreportScenario> scenarios,
                                    const EnumerationOptions& options) {
  const ManipulationSearch search(market, std::span(&spec, 1), options);
  AuditReport report;
  report.kind = AuditKind::kStrategyproofness;
  report.search_space["feasible_allocations"] = search.feasible_count();
  std::vector<MisreportScenario> relevant;
  std::set<AgentIndex> agents;
  for (const auto& s : scenarios) {
    if (!search.unsatisfied(0, s.agent)) continue;
    relevant.push_back(s);
    agents.insert(s.agent);
  }
  report.search_space["agents_probed"] = agents.size();
  report.search_space["scenarios"] = relevant.size();
  for (const auto& row : search.probe(relevant)) {
    if (row[0]) report.witnesses.emplace_back(*row[0]);
  }
  return report;
}

ChoiceFunction choice_function(const MechanismSpec& spec) {
  return [spec](const Market& market, std::span<const Allocation> candidates) {
    return choose_index(market, spec, candidates);
  };
}

namespace {

// Picks a member of a subset of the feasible list (ascending indices).
using SubsetPicker = std::function<std::size_t(const std::vector<std::size_t>&)>;

class ConsistencyChecker {
 public:
  ConsistencyChecker(std::span<const Allocation> feasible,
                     std::vector<std::uint64_t> masks, SubsetPicker pick)
      : feasible_(feasible), masks_(std::move(masks)), pick_(std::move(pick)) {}

  // Tests the implication for inner within outer, where x = choice on outer.
  void check(const std::vector<std::size_t>& outer, std::size_t x,
             const std::vector<std::size_t>& inner, AuditReport& report) {
    const auto matching = std::find_if(inner.begin(), inner.end(), [&](std::size_t y) {
      return masks_[y] == masks_[x];
    });
    if (matching == inner.end()) return;
    const std::size_t z = pick(inner);
    if (masks_[z] == masks_[x]) return;
    report.witnesses.emplace_back(ConsistencyViolation{
        outer, inner, feasible_[x], feasible_[z], feasible_[*matching]});
  }

  void check(const std::vector<std::size_t>& outer,
             const std::vector<std::size_t>& inner, AuditReport& report) {
    check(outer, pick(outer), inner, report);
  }

  std::size_t pick(const std::vector<std::size_t>& subset) const {
    const std::size_t chosen = pick_(subset);
    if (chosen >= subset.size()) {
      throw InvalidArgument("choice function returned an index out of range");
    }
    return subset[chosen];
  }

 private:
  std::span<const Allocation> feasible_;
  std::vector<std::uint64_t> masks_;
  SubsetPicker pick_;
};

std::vector<std::size_t> from_mask(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
  }
  return out;
}

// Uniform nonempty subset of `of`.
std::vector<std::size_t> sample_subset(const std::vector<std::size_t>& of,
                                       std::mt19937_64& rng) {
  std::vector<std::size_t> out;
  while (out.empty()) {
    std::uint64_t bits = 0;
    for (std::size_t k = 0; k < of.size(); ++k) {
      if (k % 64 == 0) bits = rng();
      if (bits & 1U) out.push_back(of[k]);
      bits >>= 1;
    }
  }
  return out;
}

AuditReport run_consistency(std::span<const Allocation> feasible,
                            ConsistencyChecker& checker,
                            const ConsistencySampling& sampling) {
  AuditReport report;
  report.kind = AuditKind::kWeakConsistency;
  report.seed = sampling.seed;
  const std::size_t n = feasible.size();
  std::vector<std::size_t> all(n);
  for (std::size_t k = 0; k < n; ++k) all[k] = k;
  const std::size_t x = checker.pick(all);

  std::uint64_t subsets = 0;
  auto drop = [&all](std::size_t skip) {
    std::vector<std::size_t> inner;
    inner.reserve(all.size() - 1);
    for (std::size_t k : all) {
      if (k != skip) inner.push_back(k);
    }
    return inner;
  };
  const bool exhaustive = n <= sampling.exhaustive_limit && n < 63;
  if (exhaustive) {
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
      checker.check(all, x, from_mask(m), report);
      ++subsets;
    }
  } else if (n <= sampling.leave_one_out_limit) {
    for (std::size_t skip = 0; skip < n; ++skip) {
      checker.check(all, x, drop(skip), report);
      ++subsets;
    }
  } else {
    checker.check(all, x, drop(x), report);
    ++subsets;
  }

  std::mt19937_64 rng(sampling.seed);
  if (!exhaustive) {
    for (std::size_t s = 0; s < sampling.samples; ++s) {
      checker.check(all, x, sample_subset(all, rng), report);
      ++subsets;
    }
  }
  std::uint64_t nested = 0;
  if (n >= 2) {
    for (std::size_t s = 0; s < sampling.nested_pairs; ++s) {
      auto outer = sample_subset(all, rng);
      if (outer.size() == n) continue;  // outer must be a proper subset
      checker.check(outer, sample_subset(outer, rng), report);
      ++nested;
    }
  }
  report.search_space["feasible_allocations"] = n;
  report.search_space["exhaustive"] = exhaustive ? 1 : 0;
  report.search_space["subsets_checked"] = subsets;
  report.search_space["nested_pairs_checked"] = nested;
  return report;
}

void require_nonempty(std::span<const Allocation> feasible) {
  if (feasible.empty()) {
    throw InvalidArgument("weak-consistency audit needs a non-empty feasible set");
  }
}

}  // namespace

AuditReport audit_weak_consistency(const Market& market,
                                   std::span<const Allocation> feasible,
                                   const ChoiceFunction& choose,
                                   const ConsistencySampling& sampling) {
  require_nonempty(feasible);
  ConsistencyChecker checker(
      feasible, masks_of(market, feasible),
      [&](const std::vector<std::size_t>& subset) {
        std::vector<Allocation> candidates;
        candidates.reserve(subset.size());
        for (std::size_t k : subset) candidates.push_back(feasible[k]);
        return choose(market, candidates);
      });
  return run_consistency(feasible, checker, sampling);
}

AuditReport audit_weak_consistency(const Market& market,
                                   std::span<const Allocation> feasible,
                                   const MechanismSpec& spec,
                                   const ConsistencySampling& sampling) {
  require_nonempty(feasible);
  auto masks = masks_of(market, feasible);
  std::vector<std::uint64_t> keys(masks.size());
  const PackedKey key(spec.kind, spec.priority);
  for (std::size_t k = 0; k < masks.size(); ++k) keys[k] = key(masks[k]);
  ConsistencyChecker checker(
      feasible, std::move(masks),
      [keys = std::move(keys)](const std::vector<std::size_t>& subset) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < subset.size(); ++k) {
          if (keys[subset[k]] > keys[subset[best]]) best = k;
        }
        return best;
      });
  return run_consistency(feasible, checker, sampling);
}

AuditReport audit_weak_consistency(const Market& market,
                                   const MechanismSpec& spec,
                                   const ConsistencySampling& sampling,
                                   const EnumerationOptions& options) {
  const auto feasible = enumerate_feasible(market, spec.constraints, options);
  return audit_weak_consistency(market, feasible, spec, sampling);
}

AuditReport audit_constrained_pareto(const Market& market,
                                     const Allocation& allocation,
                                     std::span<const Allocation> feasible) {
  AuditReport report;
  report.kind = AuditKind::kConstrainedPareto;
  report.search_space["feasible_allocations"] = feasible.size();
  for (const auto& y : feasible) {
    if (pareto_dominates(market, y, allocation)) {
      report.witnesses.emplace_back(DominationWitness{allocation, y});
      break;
    }
  }
  return report;
}

AuditReport audit_constrained_pareto(const Market& market,
                                     const Allocation& allocation,
                                     const ConstraintSet& constraints,
                                     const EnumerationOptions& options) {
  const auto feasible = enumerate_feasible(market, constraints, options);
  return audit_constrained_pareto(market, allocation, feasible);
}

int max_satisfied_oracle(const Market& market, const ConstraintSet& constraints,
                         const EnumerationOptions& options) {
  int best = 0;
  for (const auto& allocation : enumerate_feasible(market, constraints, options)) {
    int count = 0;
    for (AgentIndex a = 0; a < market.agent_count(); ++a) {
      const ItemSet held = allocation.bundle(a);
      for (ItemSet d : market.demands(a)) {
        if (d.is_subset_of(held)) {
          ++count;
          break;
        }
      }
    }
    best = std::max(best, count);
  }
  return best;
}

}  // namespace exchange
