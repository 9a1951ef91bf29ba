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

#include <gtest/gtest.h>

#include <random>

#include "exchange/auditors.hpp"
#include "exchange/market.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

namespace exchange {
namespace {

using testing_util::assign;

Market example1() { return fixture("example1").market; }

bool has_message(const ValidationResult& r, const std::string& text) {
  for (const auto& v : r.violations) {
    if (v.message.find(text) != std::string::npos) return true;
  }
  return false;
}

TEST(Validation, Example1IsValid) {
  EXPECT_TRUE(validate_market(example1().describe()).ok());
}

TEST(Validation, ReportsEveryViolation) {
  MarketDescription d;
  d.items = {{"x", false}, {"y", false}};
  d.agents = {{"1", {"x"}, {{"y"}}}, {"2", {"x", "y"}, {{"q"}}}};
  const auto result = validate_market(d);
  EXPECT_TRUE(has_message(result, "endowments overlap"));
  EXPECT_TRUE(has_message(result, "unknown item in demand"));
  EXPECT_THROW(Market::build(d), InvalidMarket);
}

TEST(Validation, EmptyAgentList) {
  MarketDescription d;
  const auto result = validate_market(d);
  EXPECT_TRUE(has_message(result, "at least one agent"));
}

TEST(Validation, UnendowedAndNullDemand) {
  MarketDescription d;
  d.items = {{"x", false}, {"n", true}, {"loose", false}};
  d.agents = {{"1", {"x", "n"}, {{"n"}}}};
  const auto result = validate_market(d);
  EXPECT_TRUE(has_message(result, "null item in demand"));
  EXPECT_TRUE(has_message(result, "item not endowed"));
}

TEST(Validation, DuplicateItemId) {
  MarketDescription d;
  d.items = {{"x", false}, {"x", false}};
  d.agents = {{"1", {"x"}, {}}};
  EXPECT_TRUE(has_message(validate_market(d), "duplicate item id"));
}

TEST(Satisfaction, EndowmentSatisfiesNobodyInExample1) {
  const Market m = example1();
  const Allocation e = endowment_allocation(m);
  for (const char* a : {"1", "2", "3"}) {
    EXPECT_FALSE(satisfies(m, e, a)) << a;
    EXPECT_EQ(utility(m, e, a), 0);
  }
  EXPECT_TRUE(is_sir(m, e));
  EXPECT_TRUE(is_ir(m, e));
}

TEST(Satisfaction, FullTradeInExample1) {
  const Market m = example1();
  const Allocation x = assign(m, {{"p", "1"}, {"s", "2"}, {"h", "2"}, {"c4", "3"}});
  EXPECT_EQ(satisfaction_profile(m, x).total(), 3);
  EXPECT_TRUE(is_sir(m, x));
  EXPECT_TRUE(pareto_dominates(m, x, endowment_allocation(m)));
  EXPECT_FALSE(pareto_dominates(m, endowment_allocation(m), x));
  EXPECT_FALSE(pareto_dominates(m, x, x));
}

TEST(Satisfaction, SirRejectsUncompensatedLoss) {
  const Market m = example1();
  // Agent 2 gives up p and gets nothing she wants.
  const Allocation x = assign(m, {{"p", "3"}});
  EXPECT_FALSE(satisfies(m, x, "2"));
  EXPECT_FALSE(is_sir(m, x));
}

TEST(Satisfaction, IrOnlyBindsSatisfiedOwners) {
  MarketDescription d;
  d.items = {{"x", false}, {"y", false}};
  d.agents = {{"1", {"x"}, {{"x"}}}, {"2", {"y"}, {{"x"}}}};
  const Market m = Market::build(d);
  EXPECT_FALSE(is_ir(m, assign(m, {{"x", "2"}, {"y", "1"}})));
  // Agent 2 loses y without compensation: still IR, not SIR.
  const Allocation give_y = assign(m, {{"y", "1"}});
  EXPECT_TRUE(is_ir(m, give_y));
  EXPECT_FALSE(is_sir(m, give_y));
}

TEST(Preferences, Example1Bundles) {
  const Market m = example1();
  const AgentIndex one = m.agent_index("1");
  const std::vector<std::string> c1p = {"c1", "p"};
  const std::vector<std::string> c1c2 = {"c1", "c2"};
  EXPECT_TRUE(strictly_prefers(m, one, m.bundle(c1p), m.bundle(c1c2)));
  EXPECT_TRUE(indifferent(m, one, m.bundle(c1c2), ItemSet()));
  EXPECT_FALSE(weakly_prefers(m, one, m.bundle(c1c2), m.bundle(c1p)));
}

TEST(Market, LookupErrors) {
  const Market m = example1();
  EXPECT_THROW(m.agent_index("9"), UnknownAgent);
  EXPECT_THROW(m.item_index("zz"), UnknownItem);
  EXPECT_FALSE(m.find_item("zz").has_value());
  EXPECT_THROW(Allocation(m, {0, 0}), InvalidArgument);
  EXPECT_THROW(PriorityOrder(m, {0, 0, 1}), InvalidArgument);
}

TEST(Market, WithReportWithdrawsItems) {
  const Market m = example1();
  const AgentIndex three = m.agent_index("3");
  const Market r = m.with_report(three, m.bundle(std::vector<std::string>{"s"}),
                                 {m.bundle(std::vector<std::string>{"c4"})});
  const ItemIndex h = m.item_index("h");
  EXPECT_FALSE(r.pool().contains(h));
  EXPECT_EQ(r.owner(h), kNoAgent);
  EXPECT_TRUE(r.withdrawn().contains(h));
  EXPECT_THROW(m.with_report(three, m.endowment(m.agent_index("1")), {}),
               InvalidArgument);
}

TEST(Market, PriorityOrdersArePermutations) {
  const auto all = PriorityOrder::all(example1());
  ASSERT_EQ(all.size(), 6U);
  EXPECT_EQ(all.front(), PriorityOrder::canonical(example1()));
}

// Random bundles drawn over the pool of generated markets.
class PreferenceProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PreferenceProperties, WeakPreferenceIsCompleteAndTransitive) {
  const Market m = testing_util::family_instance(GetParam());
  const auto oracle_market = oracle::from(m.describe());
  std::mt19937_64 rng(GetParam());
  for (int trial = 0; trial < 50; ++trial) {
    const ItemSet x(rng() & m.pool().bits());
    const ItemSet y(rng() & m.pool().bits());
    const ItemSet z(rng() & m.pool().bits());
    for (AgentIndex a = 0; a < m.agent_count(); ++a) {
      EXPECT_TRUE(weakly_prefers(m, a, x, y) || weakly_prefers(m, a, y, x));
      if (weakly_prefers(m, a, x, y) && weakly_prefers(m, a, y, z)) {
        EXPECT_TRUE(weakly_prefers(m, a, x, z));
      }
      EXPECT_EQ(strictly_prefers(m, a, x, y),
                weakly_prefers(m, a, x, y) && !weakly_prefers(m, a, y, x));
      if (m.covers(a, x)) EXPECT_TRUE(m.covers(a, x | y));
      const auto ids = m.item_ids(x);
      EXPECT_EQ(m.covers(a, x),
                oracle::covers(oracle_market, m.agent_id(a),
                               oracle::Bundle(ids.begin(), ids.end())));
    }
  }
}

TEST_P(PreferenceProperties, DominanceIsIrreflexiveAndAsymmetric) {
  const Market m = testing_util::family_instance(GetParam());
  const auto om = oracle::from(m.describe());
  std::mt19937_64 rng(GetParam() + 1000);
  auto random_allocation = [&] {
    std::vector<AgentIndex> holders(m.item_count());
    for (auto& h : holders) h = static_cast<AgentIndex>(rng() % m.agent_count());
    return Allocation(m, holders);
  };
  for (int trial = 0; trial < 30; ++trial) {
    const Allocation x = random_allocation();
    const Allocation y = random_allocation();
    EXPECT_FALSE(pareto_dominates(m, x, x));
    EXPECT_FALSE(pareto_dominates(m, x, y) && pareto_dominates(m, y, x));
    const auto ox = oracle::to_assignment(m, x);
    EXPECT_EQ(is_sir(m, x), oracle::sir(om, ox));
    EXPECT_EQ(is_ir(m, x), oracle::ir(om, ox));
    EXPECT_EQ(satisfaction_profile(m, x).total(), oracle::satisfied_count(om, ox));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PreferenceProperties, ::testing::Range<std::uint64_t>(1, 41));

}  // namespace
}  // namespace exchange
