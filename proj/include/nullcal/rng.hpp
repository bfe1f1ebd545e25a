// Copyright 2026 The nullcal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace nullcal {

/// SplitMix64 finalizer; used to fold (seed, stream) tuples into keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_stream(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit key is the base seed; the 128-bit counter is split into a
/// 64-bit block index and a 64-bit stream id, so `Rng(seed, stream)` gives
/// independent substreams that can be created in any order. Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Child stream keyed by (this stream, id). Deterministic, order-free.
  Rng substream(std::uint64_t id) const {
    return Rng(seed_, combine_stream(stream_, id));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(*this);
  }

  double normal() { return normal_(*this); }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal();
    return m;
  }
  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<std::uint32_t>(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buffer_[0] = (std::uint64_t{ctr[0]} << 32) | ctr[1];
    buffer_[1] = (std::uint64_t{ctr[2]} << 32) | ctr[3];
    ++block_;
    lane_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Fills `out` with standard normals by Box-Muller on 32-bit uniforms.
/// Much cheaper than `Rng::normal` for large single-precision batches;
/// the two paths produce different streams.
template <typename Derived>
void fill_normal_float(Rng& rng, Eigen::DenseBase<Derived>& out) {
  const Eigen::Index n = out.size();
  const Eigen::Index pairs = (n + 1) / 2;
  Eigen::ArrayXf u1(pairs), u2(pairs);
  for (Eigen::Index i = 0; i < pairs; ++i) {
    const std::uint64_t bits = rng();
    u1[i] = (static_cast<float>(bits >> 40) + 0.5f) * 0x1.0p-24f;
    u2[i] = static_cast<float>((bits >> 8) & 0xFFFFFFu) * 0x1.0p-24f;
  }
  const Eigen::ArrayXf radius = (-2.0f * u1.log()).sqrt();
  const Eigen::ArrayXf angle = 6.2831853071795864769f * u2;
  const Eigen::ArrayXf a = radius * angle.cos();
  const Eigen::ArrayXf b = radius * angle.sin();
  auto* data = out.derived().data();
  for (Eigen::Index i = 0; i < pairs; ++i) {
    data[2 * i] = a[i];
    if (2 * i + 1 < n) data[2 * i + 1] = b[i];
  }
}

}  // namespace nullcal
