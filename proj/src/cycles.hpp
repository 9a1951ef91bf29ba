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

#include <cstddef>
#include <vector>

#include "exchange/market.hpp"

namespace exchange::detail {

// `counts` is an n x n row-major matrix of moved-item counts between agents.
// Succeeds iff the multigraph splits into simple directed cycles of at most
// `cap` agents; the cycles found are appended to `cycles` when non-null.
bool decompose_counts(std::vector<int> counts, std::size_t n, std::size_t cap,
                      std::vector<std::vector<AgentIndex>>* cycles);

}  // namespace exchange::detail
