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

#ifndef SAFEPLAN_TOOLS_SELFTEST_H_
#define SAFEPLAN_TOOLS_SELFTEST_H_

#include <iosfwd>

namespace safeplan::tools {

// Quick oracle and invariant checks; one line per check. Returns the number
// of failed checks.
int RunSelftest(std::ostream& out);

}  // namespace safeplan::tools

#endif  // SAFEPLAN_TOOLS_SELFTEST_H_
