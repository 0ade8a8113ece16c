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

#ifndef SAFEPLAN_ARCHIVE_H_
#define SAFEPLAN_ARCHIVE_H_

#include <optional>
#include <vector>

#include "safeplan/policies.h"

namespace safeplan {

enum class ReplacementRule {
  kReward,  // vanilla MAP-Elites: higher return wins
  kSafe,    // lower cost wins; equal cost falls back to higher return
};

struct Elite {
  Policy policy;
  double ret = 0.0;
  double cost = 0.0;
  BehaviorDescriptor descriptor;
};

// One attempted insertion, kept so that the replacement rule can be audited.
struct InsertEvent {
  int cell = 0;
  double ret = 0.0;
  double cost = 0.0;
  bool had_incumbent = false;
  double incumbent_ret = 0.0;
  double incumbent_cost = 0.0;
  bool stored = false;
};

// True when `challenger` should evict `incumbent` under `rule`. Costs within
// `cost_tolerance` of each other count as equal.
bool Replaces(ReplacementRule rule, double challenger_ret,
              double challenger_cost, double incumbent_ret,
              double incumbent_cost, double cost_tolerance);

// MAP-Elites grid over a 2-D behavior space, at most one elite per cell.
class Archive {
 public:
  Archive(int grid_size, ReplacementRule rule, double cost_tolerance = 1e-12);

  // Returns true when the elite was stored.
  bool Insert(Elite elite);

  int grid_size() const { return grid_size_; }
  ReplacementRule rule() const { return rule_; }
  double cost_tolerance() const { return cost_tolerance_; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  double fill_ratio() const;

  const std::optional<Elite>& cell(int index) const { return cells_.at(index); }
  // Occupied cells in ascending cell order.
  std::vector<const Elite*> Elites() const;
  const std::vector<InsertEvent>& log() const { return log_; }

 private:
  int grid_size_;
  ReplacementRule rule_;
  double cost_tolerance_;
  int size_ = 0;
  std::vector<std::optional<Elite>> cells_;
  std::vector<InsertEvent> log_;
};

}  // namespace safeplan

#endif  // SAFEPLAN_ARCHIVE_H_
