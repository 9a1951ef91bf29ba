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
#include <charconv>
#include <deque>
#include <string>
#include <unordered_set>

#include "cycles.hpp"
#include "exchange/feasibility.hpp"

namespace exchange {

Constraint make_max_cycle_agents(std::size_t limit) {
  if (limit < 2) {
    throw InvalidArgument("maxcycle cap must be at least 2, got " +
                          std::to_string(limit));
  }
  return MaxCycleAgents{limit};
}

Constraint parse_constraint(std::string_view token) {
  if (token == "unrestricted") return Unrestricted{};
  if (token == "sir") return StronglyIndividuallyRational{};
  if (token == "ir") return IndividuallyRational{};
  if (token == "pairwise") return PairwiseOnly{};
  if (token == "desirable") return DesirableOnly{};
  constexpr std::string_view kCap = "maxcycle=";
  if (token.starts_with(kCap)) {
    const auto digits = token.substr(kCap.size());
    std::size_t limit = 0;
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), limit);
    if (ec != std::errc() || ptr != digits.data() + digits.size() ||
        digits.empty()) {
      throw InvalidArgument("bad maxcycle cap in '" + std::string(token) + "'");
    }
    return make_max_cycle_agents(limit);
  }
  throw InvalidArgument("unknown constraint '" + std::string(token) + "'");
}

std::string to_string(const Constraint& constraint) {
  struct Visitor {
    std::string operator()(Unrestricted) const { return "unrestricted"; }
    std::string operator()(StronglyIndividuallyRational) const { return "sir"; }
    std::string operator()(IndividuallyRational) const { return "ir"; }
    std::string operator()(MaxCycleAgents c) const {
      return "maxcycle=" + std::to_string(c.limit);
    }
    std::string operator()(PairwiseOnly) const { return "pairwise"; }
    std::string operator()(DesirableOnly) const { return "desirable"; }
  };
  return std::visit(Visitor{}, constraint);
}

ConstraintSet ConstraintSet::parse(std::string_view text) {
  std::vector<Constraint> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, comma - start);
    if (token.empty()) throw InvalidArgument("empty constraint token");
    out.push_back(parse_constraint(token));
    start = comma + 1;
  }
  return ConstraintSet(std::move(out));
}

std::string ConstraintSet::to_string() const {
  if (constraints_.empty()) return "unrestricted";
  std::string out;
  for (const auto& c : constraints_) {
    if (!out.empty()) out += ',';
    out += exchange::to_string(c);
  }
  return out;
}

std::optional<std::size_t> ConstraintSet::cycle_cap() const {
  std::optional<std::size_t> cap;
  for (const auto& c : constraints_) {
    std::size_t limit = 0;
    if (const auto* m = std::get_if<MaxCycleAgents>(&c)) {
      limit = m->limit;
    } else if (std::holds_alternative<PairwiseOnly>(c)) {
      limit = 2;
    } else {
      continue;
    }
    cap = cap ? std::min(*cap, limit) : limit;
  }
  return cap;
}

std::vector<NamedConstraintSet> builtin_constraint_sets() {
  const auto set = [](const char* text) {
    return NamedConstraintSet{text, ConstraintSet::parse(text)};
  };
  return {
      set("unrestricted"),
      set("sir"),
      set("sir,ir"),
      set("sir,maxcycle=2"),
      set("sir,maxcycle=3"),
      set("sir,pairwise"),
      set("sir,desirable"),
      set("sir,pairwise,desirable"),
      set("ir"),
      set("pairwise,desirable"),
      set("ir,pairwise,desirable"),
  };
}

TradeGraph trade_graph(const Market& market, const Allocation& allocation) {
  TradeGraph graph;
  graph.agent_count = market.agent_count();
  market.pool().for_each([&](ItemIndex item) {
    const AgentIndex from = market.owner(item);
    const AgentIndex to = allocation.holder(item);
    if (from != to) graph.edges.push_back({from, to, item});
  });
  return graph;
}

namespace detail {

namespace {

class CycleSearch {
 public:
  CycleSearch(std::vector<int>& counts, std::size_t n, std::size_t cap,
              std::vector<std::vector<AgentIndex>>* cycles)
      : counts_(counts), n_(n), cap_(cap), cycles_(cycles) {}

  bool solve() {
    std::size_t first = counts_.size();
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (counts_[k] > 0) {
        first = k;
        break;
      }
    }
    if (first == counts_.size()) return true;
    const std::string key(reinterpret_cast<const char*>(counts_.data()),
                          counts_.size() * sizeof(int));
    if (failed_.contains(key)) return false;

    const auto u = static_cast<AgentIndex>(first / n_);
    const auto v = static_cast<AgentIndex>(first % n_);
    --counts_[first];
    path_ = {u, v};
    const bool ok = extend(v);
    ++counts_[first];
    if (!ok) failed_.insert(key);
    return ok;
  }

 private:
  int& at(AgentIndex from, AgentIndex to) { return counts_[from * n_ + to]; }

  bool extend(AgentIndex w) {
    const AgentIndex u = path_.front();
    if (at(w, u) > 0) {
      --at(w, u);
      const auto saved = path_;
      if (cycles_) cycles_->push_back(path_);
      if (solve()) {
        ++at(w, u);
        return true;
      }
      if (cycles_) cycles_->pop_back();
      path_ = saved;
      ++at(w, u);
    }
    if (path_.size() >= cap_) return false;
    for (AgentIndex x = 0; x < n_; ++x) {
      if (at(w, x) == 0 ||
          std::find(path_.begin(), path_.end(), x) != path_.end()) {
        continue;
      }
      --at(w, x);
      path_.push_back(x);
      const auto saved = path_;
      const bool ok = extend(x);
      path_ = saved;
      path_.pop_back();
      ++at(w, x);
      if (ok) return true;
    }
    return false;
  }

  std::vector<int>& counts_;
  std::size_t n_;
  std::size_t cap_;
  std::vector<std::vector<AgentIndex>>* cycles_;
  std::vector<AgentIndex> path_;
  std::unordered_set<std::string> failed_;
};

}  // namespace

bool decompose_counts(std::vector<int> counts, std::size_t n, std::size_t cap,
                      std::vector<std::vector<AgentIndex>>* cycles) {
  for (std::size_t a = 0; a < n; ++a) {
    int out = 0;
    int in = 0;
    for (std::size_t b = 0; b < n; ++b) {
      out += counts[a * n + b];
      in += counts[b * n + a];
    }
    if (out != in) return false;
  }
  if (cap == 2 && cycles == nullptr) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (counts[a * n + b] != counts[b * n + a]) return false;
      }
    }
    return true;
  }
  CycleSearch search(counts, n, cap, cycles);
  return search.solve();
}

}  // namespace detail

std::optional<CycleDecomposition> find_cycle_decomposition(
    const TradeGraph& graph, std::size_t max_agents) {
  const std::size_t n = graph.agent_count;
  if (graph.edges.empty()) return CycleDecomposition{};
  if (max_agents < 2) return std::nullopt;

  std::vector<int> counts(n * n, 0);
  std::vector<std::deque<TradeEdge>> pending(n * n);
  for (const TradeEdge& e : graph.edges) {
    if (e.from >= n || e.to >= n || e.from == e.to) {
      throw InvalidArgument("trade graph edge outside the agent range");
    }
    ++counts[e.from * n + e.to];
    pending[e.from * n + e.to].push_back(e);
  }
  std::vector<std::vector<AgentIndex>> cycles;
  if (!detail::decompose_counts(std::move(counts), n, max_agents, &cycles)) {
    return std::nullopt;
  }
  CycleDecomposition out;
  for (const auto& cycle : cycles) {
    ClosedWalk walk;
    walk.agent_count = cycle.size();
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      auto& queue = pending[cycle[k] * n + cycle[(k + 1) % cycle.size()]];
      walk.edges.push_back(queue.front());
      queue.pop_front();
    }
    out.walks.push_back(std::move(walk));
  }
  return out;
}

namespace {

std::vector<int> pair_counts(const Market& market, const Allocation& allocation) {
  const std::size_t n = market.agent_count();
  std::vector<int> counts(n * n, 0);
  market.pool().for_each([&](ItemIndex item) {
    const AgentIndex from = market.owner(item);
    const AgentIndex to = allocation.holder(item);
    if (from != to) ++counts[from * n + to];
  });
  return counts;
}

}  // namespace

bool satisfies_constraint(const Market& market, const Allocation& allocation,
                          const Constraint& constraint) {
  struct Visitor {
    const Market& market;
    const Allocation& allocation;

    bool operator()(Unrestricted) const { return true; }
    bool operator()(StronglyIndividuallyRational) const {
      return is_sir(market, allocation);
    }
    bool operator()(IndividuallyRational) const {
      return is_ir(market, allocation);
    }
    bool operator()(MaxCycleAgents c) const {
      return find_cycle_decomposition(trade_graph(market, allocation), c.limit)
          .has_value();
    }
    bool operator()(PairwiseOnly) const {
      if (!(*this)(MaxCycleAgents{2})) return false;
      const std::size_t n = market.agent_count();
      const auto counts = pair_counts(market, allocation);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (counts[a * n + b] != counts[b * n + a]) return false;
        }
      }
      return true;
    }
    bool operator()(DesirableOnly) const {
      for (AgentIndex a = 0; a < market.agent_count(); ++a) {
        const ItemSet received =
            allocation.bundle(a) - market.endowment(a) - market.null_items();
        if (!received.is_subset_of(market.desirable(a))) return false;
      }
      return true;
    }
  };
  return std::visit(Visitor{market, allocation}, constraint);
}

bool satisfies_constraints(const Market& market, const Allocation& allocation,
                           const ConstraintSet& constraints) {
  for (const auto& c : constraints.constraints()) {
    if (!satisfies_constraint(market, allocation, c)) return false;
  }
  return true;
}

}  // namespace exchange
