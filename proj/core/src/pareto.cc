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

#include "safeplan/pareto.h"

#include <algorithm>

namespace safeplan {

bool Dominates(const CostReturn& p, const CostReturn& q) {
  return p.cost <= q.cost && p.ret >= q.ret && (p.cost < q.cost || p.ret > q.ret);
}

std::vector<std::vector<int>> NonDominatedSort(std::span<const CostReturn> points) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> fronts;
  std::vector<int> current;

  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (Dominates(points[p], points[q])) {
        dominated[p].push_back(q);
        ++domination_count[q];
      } else if (Dominates(points[q], points[p])) {
        dominated[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (int p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<int> next;
    for (int p : current) {
      for (int q : dominated[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    fronts.push_back(std::move(current));
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

}  // namespace safeplan
