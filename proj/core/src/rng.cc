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

#include "safeplan/rng.h"

#include <cmath>
#include <numbers>

namespace safeplan {

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t master, Stream stream, std::uint64_t a,
                         std::uint64_t b) {
  std::uint64_t h = Mix64(master);
  h = Mix64(h ^ static_cast<std::uint64_t>(stream));
  h = Mix64(h ^ a);
  h = Mix64(h ^ b);
  return h;
}

std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  // rejection sampling removes modulo bias
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double StandardNormal(Rng& rng) {
  double u1 = UniformReal(rng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = UniformReal(rng, 0.0, 1.0);
  const double u2 = UniformReal(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace safeplan
