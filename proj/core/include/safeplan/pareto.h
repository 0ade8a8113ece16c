// Copyright 2026 The Safeplan Authors
//
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

#ifndef SAFEPLAN_PARETO_H_
#define SAFEPLAN_PARETO_H_

#include <span>
#include <vector>

namespace safeplan {

// Objective pair: cost is minimized, ret is maximized.
struct CostReturn {
  double cost = 0.0;
  double ret = 0.0;
};

// p dominates q iff p.cost <= q.cost and p.ret >= q.ret with at least one
// strict inequality.
bool Dominates(const CostReturn& p, const CostReturn& q);

// Fast non-dominated sort. Fronts are ordered best first; indices inside a
// front are ascending. Every index appears in exactly one front.
std::vector<std::vector<int>> NonDominatedSort(std::span<const CostReturn> points);

}  // namespace safeplan

#endif  // SAFEPLAN_PARETO_H_
