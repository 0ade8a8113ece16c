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

#ifndef SAFEPLAN_RNG_H_
#define SAFEPLAN_RNG_H_

#include <cstdint>
#include <random>

namespace safeplan {

using Rng = std::mt19937_64;

// Independent random streams derived from one master seed. Each concern
// draws from its own stream so that adding draws in one place never shifts
// the numbers seen by another.
enum class Stream : std::uint64_t {
  kEnvReset = 1,
  kRandomPolicy = 2,
  kModel = 3,
  kPlanner = 4,
  kTest = 5,
};

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Counter-based derivation: the result depends only on the arguments, never
// on call order.
std::uint64_t DeriveSeed(std::uint64_t master, Stream stream,
                         std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng MakeRng(std::uint64_t master, Stream stream, std::uint64_t a = 0,
                   std::uint64_t b = 0) {
  return Rng(DeriveSeed(master, stream, a, b));
}

// Uniform double in [lo, hi). std::uniform_real_distribution is avoided so
// that streams are identical across standard library implementations.
inline double UniformReal(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Uniform integer in [0, n).
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n);

// Standard normal via Box-Muller.
double StandardNormal(Rng& rng);

}  // namespace safeplan

#endif  // SAFEPLAN_RNG_H_
