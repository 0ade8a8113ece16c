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

#include "safeplan/archive.h"

#include <cmath>
#include <stdexcept>

namespace safeplan {

bool Replaces(ReplacementRule rule, double challenger_ret,
              double challenger_cost, double incumbent_ret,
              double incumbent_cost, double cost_tolerance) {
  if (rule == ReplacementRule::kReward) return challenger_ret > incumbent_ret;
  if (std::abs(challenger_cost - incumbent_cost) <= cost_tolerance) {
    return challenger_ret > incumbent_ret;
  }
  return challenger_cost < incumbent_cost;
}

Archive::Archive(int grid_size, ReplacementRule rule, double cost_tolerance)
    : grid_size_(grid_size),
      rule_(rule),
      cost_tolerance_(cost_tolerance),
      cells_(static_cast<std::size_t>(grid_size) * grid_size) {
  if (grid_size <= 0) throw std::invalid_argument("grid size must be positive");
}

bool Archive::Insert(Elite elite) {
  const int index = elite.descriptor.Cell(grid_size_);
  std::optional<Elite>& slot = cells_.at(index);
  InsertEvent event;
  event.cell = index;
  event.ret = elite.ret;
  event.cost = elite.cost;
  if (slot.has_value()) {
    event.had_incumbent = true;
    event.incumbent_ret = slot->ret;
    event.incumbent_cost = slot->cost;
    event.stored = Replaces(rule_, elite.ret, elite.cost, slot->ret,
                            slot->cost, cost_tolerance_);
  } else {
    event.stored = true;
    ++size_;
  }
  if (event.stored) slot.emplace(std::move(elite));
  log_.push_back(event);
  return event.stored;
}

double Archive::fill_ratio() const {
  return static_cast<double>(size_) / static_cast<double>(cells_.size());
}

std::vector<const Elite*> Archive::Elites() const {
  std::vector<const Elite*> out;
  out.reserve(size_);
  for (const auto& slot : cells_) {
    if (slot.has_value()) out.push_back(&*slot);
  }
  return out;
}

}  // namespace safeplan
