// Copyright 2026 The QNTK Diagnostics Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Seeded pseudo-random numbers with a fixed, documented derivation so that
 * generated datasets and initializations are reproducible bit-for-bit:
 *
 *  - engine: std::mt19937_64 seeded with the 64-bit seed;
 *  - uniform01: (next() >> 11) * 2^-53, in [0, 1);
 *  - normal: Box-Muller, z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), consuming
 *    two uniforms per draw (the sine branch is discarded);
 *  - index(n): floor(uniform01() * n).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace qntk {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double uniform(double lo, double hi);
    double normal(double mean, double stddev);
    std::size_t index(std::size_t n);

    /// Fisher-Yates permutation of 0..n-1 driven by `index`.
    std::vector<std::size_t> permutation(std::size_t n);

  private:
    std::mt19937_64 engine_;
};

} // namespace qntk
