// Copyright 2026-present the latentsearch project
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

#pragma once

#include <array>
#include <cstdint>

namespace latentsearch {

/// xoshiro256** seeded through splitmix64.
///
/// Every random stream in the project goes through this generator so that
/// fixtures can be reproduced bit-for-bit from another language:
///   - state[i] = splitmix64 outputs 0..3 starting from `seed`
///   - uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   - normal()   = Box-Muller on (1 - uniform(), uniform()); both outputs
///                  are used, cosine branch first
///   - below(n)   = high 64 bits of next() * n
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }

  result_type operator()() { return next(); }
  std::uint64_t next();

  double uniform();
  /// Uniform in (0, 1]; safe argument for log().
  double uniform_open_closed() { return 1.0 - uniform(); }
  double normal();
  std::uint64_t below(std::uint64_t n);

  const std::array<std::uint64_t, 4>& state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s);

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace latentsearch
