/*
 * Copyright 2026 The vbmtl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VBMTL_RNG_HPP_
#define VBMTL_RNG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace vbmtl {

// SplitMix64 finalizer step (Steele, Lea & Flood). Advances `state` by
// 0x9E3779B97F4A7C15 and returns the mixed value.
std::uint64_t SplitMix64Next(std::uint64_t& state);

// Deterministic random stream: xoshiro256** 1.0 (Blackman & Vigna) with the
// 256-bit state filled by four consecutive SplitMix64 outputs of the seed.
// Output is identical on every platform; no standard-library engines or
// distributions are involved.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64();
  // Uniform in [0, 1), 53 random bits.
  double Uniform();
  // Uniform in [lo, hi).
  double Uniform(double lo, double hi);
  // Uniform integer in [0, n), n >= 1, rejection-sampled (no modulo bias).
  std::uint64_t UniformInt(std::uint64_t n);
  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  // Fisher-Yates shuffle driven by UniformInt.
  void Shuffle(std::span<std::size_t> values);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Derives an independent sub-seed from (seed, stream): two SplitMix64
// rounds over seed ^ mix(stream). Used for per-run seeds and for splitting
// one run seed into init/shuffle streams.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace vbmtl

#endif  // VBMTL_RNG_HPP_
