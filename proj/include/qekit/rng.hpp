// Copyright (c) 2026 The qekit authors
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

#ifndef QEKIT_RNG_HPP
#define QEKIT_RNG_HPP

#include <cstdint>

namespace qekit::synth {

/// Counter-based generator: draw k is a pure function of (seed, k), so
/// streams can be forked and replayed without shared state.  The mixing
/// function is the splitmix64 finalizer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

  /// Uniform on (0, 1]; safe as a log() argument.
  double next_double_open();

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double next_gaussian();

  /// Poisson sample; inversion for small means, transformed rejection for
  /// large ones.
  std::uint64_t next_poisson(double mean);

  /// Independent child stream; children with distinct ids never collide
  /// with each other or the parent.
  Rng fork(std::uint64_t stream_id) const;

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace qekit::synth

#endif  // QEKIT_RNG_HPP
