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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exchange/feasibility.hpp"
#include "exchange/market.hpp"
#include "exchange/mechanisms.hpp"

namespace exchange {

// A report (e_i', D_i') by one agent. `withheld` is what she keeps out of the
// market: her true endowment minus the reported one.
struct MisreportScenario {
  AgentIndex agent = 0;
  ItemSet reported_endowment;
  std::vector<ItemSet> reported_demands;
  ItemSet withheld;
  friend bool operator==(const MisreportScenario&,
                         const MisreportScenario&) = default;
};

// Throws InvalidArgument unless reported_endowment is a subset of the
// agent's endowment.
MisreportScenario make_misreport(const Market& market, AgentIndex agent,
                                 ItemSet reported_endowment,
                                 std::vector<ItemSet> reported_demands);

// Bounds the searched misreport space. The default covers every sub-report
// (e_i' within e_i, nonempty D_i' within D_i) and every single-bundle report
// {b} with |b| <= bundle_cap over the items left in the pool.
struct MisreportBudget {
  bool subset_demands = true;
  bool single_bundles = true;
  std::size_t bundle_cap = 3;
  std::size_t max_scenarios = 200'000;
};

// Canonical order: the truthful report first, then by number of withheld
// items, then sub-reports before single-bundle reports (bundles by size).
// Throws BudgetExceeded past max_scenarios.
std::vector<MisreportScenario> enumerate_misreports(
    const Market& market, AgentIndex agent, const MisreportBudget& budget = {});

Market apply_misreport(const Market& market, const MisreportScenario& scenario);

// What the agent really ends up holding. Throws InvalidArgument on overlap.
ItemSet realized_bundle(ItemSet misreport_allocation_bundle, ItemSet withheld);

struct ManipulationWitness {
  MechanismKind kind = MechanismKind::kCp;
  PriorityOrder priority;
  MisreportScenario scenario;
  Allocation truthful_outcome;
  Allocation misreport_outcome;
  ItemSet realized;
};

// choose(outer) was matched, profile for profile, by an allocation of the
// inner subset, but choose(inner) changed someone's satisfaction.
struct ConsistencyViolation {
  std::vector<std::size_t> outer;  // indices into the feasible list
  std::vector<std::size_t> inner;
  Allocation outer_choice;
  Allocation inner_choice;
  Allocation matching;
};

struct DominationWitness {
  Allocation audited;
  Allocation dominating;
};

using Witness =
    std::variant<ManipulationWitness, ConsistencyViolation, DominationWitness>;

enum class AuditKind {
  kStrategyproofness,
  kWeakConsistency,
  kConstrainedPareto,
  kImpossibility,
};

std::string to_string(AuditKind kind);

struct AuditReport {
  AuditKind kind = AuditKind::kStrategyproofness;
  std::vector<Witness> witnesses;
  std::map<std::string, std::uint64_t> search_space;
  std::optional<std::uint64_t> seed;

  bool violation() const { return !witnesses.empty(); }
  std::string verdict() const {
    return violation() ? "violation" : "no violation found";
  }
};

// Probes every agent left unsatisfied by the truthful run. "No violation
// found" holds only relative to the searched misreport space.
AuditReport audit_strategyproofness(const Market& market,
                                    const MechanismSpec& spec,
                                    const MisreportBudget& budget = {},
                                    const EnumerationOptions& options = {});

// One report per spec. Specs with equal constraint sets share the feasible-set
// enumerations of every misreported market.
std::vector<AuditReport> audit_strategyproofness(
    const Market& market, std::span<const MechanismSpec> specs,
    const MisreportBudget& budget = {}, const EnumerationOptions& options = {});

// Only the given scenarios are tried; those of satisfied agents are skipped.
AuditReport audit_strategyproofness(const Market& market,
                                    const MechanismSpec& spec,
                                    std::span<const MisreportScenario> scenarios,
                                    const EnumerationOptions& options = {});

inline constexpr std::uint64_t kDefaultConsistencySeed = 0x5eed'2019'0001ULL;

struct ConsistencySampling {
  std::uint64_t seed = kDefaultConsistencySeed;
  std::size_t samples = 64;          // random subsets of the feasible set
  std::size_t nested_pairs = 32;     // random Y' within Y within the feasible set
  std::size_t exhaustive_limit = 12; // all subsets at or below this size
  // Above the exhaustive limit, every leave-one-out subset is checked up to
  // this size; beyond it only the one without the original choice.
  std::size_t leave_one_out_limit = 256;
};

// Picks an index into a non-empty candidate list.
using ChoiceFunction =
    std::function<std::size_t(const Market&, std::span<const Allocation>)>;

ChoiceFunction choice_function(const MechanismSpec& spec);

AuditReport audit_weak_consistency(const Market& market,
                                   const MechanismSpec& spec,
                                   const ConsistencySampling& sampling = {},
                                   const EnumerationOptions& options = {});
AuditReport audit_weak_consistency(const Market& market,
                                   std::span<const Allocation> feasible,
                                   const ChoiceFunction& choose,
                                   const ConsistencySampling& sampling = {});
// Same as choice_function(spec), evaluated on packed keys without copying.
AuditReport audit_weak_consistency(const Market& market,
                                   std::span<const Allocation> feasible,
                                   const MechanismSpec& spec,
                                   const ConsistencySampling& sampling = {});

AuditReport audit_constrained_pareto(const Market& market,
                                     const Allocation& allocation,
                                     const ConstraintSet& constraints,
                                     const EnumerationOptions& options = {});
AuditReport audit_constrained_pareto(const Market& market,
                                     const Allocation& allocation,
                                     std::span<const Allocation> feasible);

// Brute-force maximum number of satisfied agents over the feasible set.
int max_satisfied_oracle(const Market& market, const ConstraintSet& constraints,
                         const EnumerationOptions& options = {});

struct CounterexampleFixture {
  std::string name;
  Market market;
  ConstraintSet constraints;
  // Per agent id: the desirable items A_i and the narrowed set A_i' used by
  // the scripted misreports (theorem5 only).
  std::map<std::string, std::vector<std::string>> desirable;
  std::map<std::string, std::vector<std::string>> scripted_desirable;
};

// "example1" or "theorem5"; throws InvalidArgument otherwise.
CounterexampleFixture fixture(std::string_view name);

// Full endowment, demands = every 3-item subset of the agent's A_i'.
MisreportScenario scripted_misreport(const CounterexampleFixture& fixture,
                                     AgentIndex agent);

// Runs CP and CUP under every priority order on the theorem5 fixture and
// collects one manipulation per case. A "violation" verdict means the
// impossibility was reproduced.
AuditReport replicate_impossibility(const EnumerationOptions& options = {});

}  // namespace exchange
