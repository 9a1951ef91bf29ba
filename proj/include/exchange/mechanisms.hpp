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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exchange/feasibility.hpp"
#include "exchange/market.hpp"

namespace exchange {

enum class MechanismKind {
  kCp,   // constrained priority
  kCup,  // constrained utilitarian priority
};

std::string to_string(MechanismKind kind);
MechanismKind parse_mechanism_kind(std::string_view text);

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kCp;
  PriorityOrder priority;
  ConstraintSet constraints;
};

// CP: (u_pi(1), ..., u_pi(n)). CUP: the same, preceded by the number of
// satisfied agents.
using LexKey = std::vector<int>;

LexKey lex_key(const Market& market, const Allocation& allocation,
               const MechanismSpec& spec);

// Packs the key of a satisfaction mask into one integer whose order matches
// the lexicographic order of LexKey.
class PackedKey {
 public:
  PackedKey(MechanismKind kind, const PriorityOrder& priority);
  std::uint64_t operator()(std::uint64_t satisfied) const;

 private:
  MechanismKind kind_;
  std::vector<AgentIndex> order_;
};

// Index of the candidate with the largest key; the earliest one among ties.
// Throws InvalidArgument for an empty list.
std::size_t choose_index(const Market& market, const MechanismSpec& spec,
                         std::span<const Allocation> candidates);
// Same, over precomputed satisfaction masks.
std::size_t choose_index(const PackedKey& key,
                         std::span<const std::uint64_t> satisfied);

Allocation choose_from(const Market& market, const MechanismSpec& spec,
                       std::span<const Allocation> candidates);

Allocation run_mechanism(const Market& market, const MechanismSpec& spec,
                         const EnumerationOptions& options = {});
Allocation run_cp(const Market& market, const PriorityOrder& priority,
                  const ConstraintSet& constraints,
                  const EnumerationOptions& options = {});
Allocation run_cup(const Market& market, const PriorityOrder& priority,
                   const ConstraintSet& constraints,
                   const EnumerationOptions& options = {});

}  // namespace exchange
