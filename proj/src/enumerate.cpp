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

#include <atomic>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cycles.hpp"
#include "exchange/feasibility.hpp"

namespace exchange {

namespace {

constexpr std::uint64_t kFlushEvery = 4096;

int resolve_threads(int requested) {
#ifdef _OPENMP
  if (omp_in_parallel()) return 1;
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Shared node counter for the size guard.
class Budget {
 public:
  explicit Budget(std::uint64_t limit) : limit_(limit) {}

  // Returns false once the guard has tripped.
  bool charge(std::uint64_t& local) {
    if (++local < kFlushEvery) return true;
    return flush(local);
  }
  bool flush(std::uint64_t& local) {
    const std::uint64_t total = used_.fetch_add(local) + local;
    local = 0;
    return total <= limit_;
  }
  bool exceeded() const { return used_.load() > limit_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
  std::atomic<std::uint64_t> used_{0};
};

[[noreturn]] void throw_budget(std::uint64_t limit) {
  throw BudgetExceeded("feasible-set search exceeded the budget of " +
                       std::to_string(limit) +
                       " search nodes; the instance is beyond desk scale");
}

struct Frame {
  std::vector<AgentIndex> assignment;
  std::vector<ItemSet> bundles;
  std::uint64_t deviated = 0;  // agents that lost or received an item
};

class Search {
 public:
  Search(const Market& market, const ConstraintSet& constraints)
      : market_(market), n_(market.agent_count()) {
    market.pool().for_each([this](ItemIndex i) { items_.push_back(i); });
    suffix_.assign(items_.size() + 1, ItemSet());
    for (std::size_t k = items_.size(); k-- > 0;) {
      suffix_[k] = suffix_[k + 1] | ItemSet::single(items_[k]);
    }
    sir_ = constraints.contains<StronglyIndividuallyRational>();
    desirable_ = constraints.contains<DesirableOnly>();
    cap_ = constraints.cycle_cap();
    const ItemSet everything = ItemSet::first(market.item_count());
    for (AgentIndex a = 0; a < n_; ++a) {
      acceptable_.push_back(desirable_ ? market.desirable(a) | market.null_items()
                                       : everything);
      reachable_.push_back(acceptable_.back() | market.endowment(a));
      if (constraints.contains<IndividuallyRational>() &&
          market.covers(a, market.endowment(a))) {
        ir_required_ |= std::uint64_t{1} << a;
      }
    }
  }

  std::size_t depth() const { return items_.size(); }
  std::size_t agents() const { return n_; }

  Frame root() const {
    Frame f;
    f.assignment.assign(market_.item_count(), kNoAgent);
    f.bundles.assign(n_, ItemSet());
    return f;
  }

  // Depth-first search from `frame` at position `pos`. Leaves at `stop` are
  // handed to `emit`. Returns false if the budget tripped.
  template <typename Emit>
  bool run(Frame& frame, std::size_t pos, std::size_t stop, Budget& budget,
           std::uint64_t& local, Emit&& emit) const {
    if (pos == stop) {
      if (stop < items_.size() || leaf_ok(frame)) emit(frame);
      return true;
    }
    const ItemIndex item = items_[pos];
    const AgentIndex owner = market_.owner(item);
    const ItemSet remaining = suffix_[pos + 1];
    for (AgentIndex a = 0; a < n_; ++a) {
      if (!budget.charge(local)) return false;
      if (a != owner && !acceptable_[a].contains(item)) continue;
      const std::uint64_t saved = frame.deviated;
      if (a != owner) {
        frame.deviated |= (std::uint64_t{1} << a) | (std::uint64_t{1} << owner);
      }
      frame.assignment[item] = a;
      frame.bundles[a].insert(item);
      if (viable(frame, remaining) &&
          !run(frame, pos + 1, stop, budget, local, emit)) {
        return false;
      }
      frame.bundles[a].erase(item);
      frame.assignment[item] = kNoAgent;
      frame.deviated = saved;
    }
    return true;
  }

 private:
  bool can_still_cover(const Frame& f, AgentIndex a, ItemSet remaining) const {
    return market_.covers(a, f.bundles[a] | (remaining & reachable_[a]));
  }

  bool viable(const Frame& f, ItemSet remaining) const {
    std::uint64_t must = ir_required_;
    if (sir_) must |= f.deviated;
    for (std::uint64_t rest = must; rest != 0; rest &= rest - 1) {
      const auto a = static_cast<AgentIndex>(std::countr_zero(rest));
      if (!can_still_cover(f, a, remaining)) return false;
    }
    return true;
  }

  bool leaf_ok(const Frame& f) const {
    if (!viable(f, ItemSet())) return false;
    if (!cap_) return true;
    std::vector<int> counts(n_ * n_, 0);
    for (ItemIndex item : items_) {
      const AgentIndex from = market_.owner(item);
      const AgentIndex to = f.assignment[item];
      if (from != to) ++counts[from * n_ + to];
    }
    return detail::decompose_counts(std::move(counts), n_, *cap_, nullptr);
  }

  const Market& market_;
  std::size_t n_;
  std::vector<ItemIndex> items_;
  std::vector<ItemSet> suffix_;
  std::vector<ItemSet> acceptable_;
  std::vector<ItemSet> reachable_;
  std::uint64_t ir_required_ = 0;
  bool sir_ = false;
  bool desirable_ = false;
  std::optional<std::size_t> cap_;
};

Allocation to_allocation(const Frame& f) {
  return Allocation(f.assignment, f.bundles, detail::UncheckedTag{});
}

}  // namespace

std::vector<Allocation> enumerate_feasible(const Market& market,
                                           const ConstraintSet& constraints,
                                           const EnumerationOptions& options) {
  const Search search(market, constraints);
  Budget budget(options.node_budget);
  const int threads = resolve_threads(options.threads);

  std::vector<Allocation> out;
  std::uint64_t local = 0;
  if (threads <= 1) {
    Frame frame = search.root();
    search.run(frame, 0, search.depth(), budget, local,
               [&out](const Frame& f) { out.push_back(to_allocation(f)); });
    budget.flush(local);
    if (budget.exceeded()) throw_budget(budget.limit());
    return out;
  }

  // Split the tree at a prefix depth with enough subtrees to balance load.
  std::size_t split = 0;
  for (std::size_t width = 1; split < search.depth() && width < 64; ++split) {
    width *= std::max<std::size_t>(search.agents(), 2);
  }
  std::vector<Frame> prefixes;
  {
    Frame frame = search.root();
    search.run(frame, 0, split, budget, local,
               [&prefixes](const Frame& f) { prefixes.push_back(f); });
    budget.flush(local);
    if (budget.exceeded()) throw_budget(budget.limit());
  }

  std::vector<std::vector<Allocation>> parts(prefixes.size());
  const auto count = static_cast<std::ptrdiff_t>(prefixes.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    if (budget.exceeded()) continue;
    std::uint64_t mine = 0;
    Frame frame = prefixes[k];
    auto& part = parts[k];
    search.run(frame, split, search.depth(), budget, mine,
               [&part](const Frame& f) { part.push_back(to_allocation(f)); });
    budget.flush(mine);
  }
  if (budget.exceeded()) throw_budget(budget.limit());

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) {
    std::move(p.begin(), p.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Allocation> enumerate_feasible_reference(
    const Market& market, const ConstraintSet& constraints,
    const EnumerationOptions& options) {
  std::vector<ItemIndex> items;
  market.pool().for_each([&items](ItemIndex i) { items.push_back(i); });
  const std::uint64_t n = market.agent_count();

  std::uint64_t space = 1;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (space > options.node_budget / n) throw_budget(options.node_budget);
    space *= n;
  }
  if (space > options.node_budget) throw_budget(options.node_budget);

  std::vector<AgentIndex> assignment(market.item_count(), kNoAgent);
  for (ItemIndex i : items) assignment[i] = 0;
  std::vector<Allocation> out;
  for (std::uint64_t visited = 0; visited < space; ++visited) {
    Allocation candidate(market, assignment);
    if (satisfies_constraints(market, candidate, constraints)) {
      out.push_back(std::move(candidate));
    }
    // Odometer: the last item varies fastest, giving lexicographic order.
    for (std::size_t k = items.size(); k-- > 0;) {
      if (++assignment[items[k]] < n) break;
      assignment[items[k]] = 0;
    }
  }
  return out;
}

}  // namespace exchange
