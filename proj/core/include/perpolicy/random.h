// Copyright 2026 The perpolicy Authors. All rights reserved.
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

#ifndef PERPOLICY_RANDOM_H_
#define PERPOLICY_RANDOM_H_

#include <cstdint>
#include <initializer_list>

namespace perpolicy {

// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t Mix64(std::uint64_t x);

// Derives an independent stream key from a parent key and a list of
// counters, e.g. DeriveKey(seed, {task_index, lane}).
std::uint64_t DeriveKey(std::uint64_t parent,
                        std::initializer_list<std::uint64_t> counters);

// Counter-based generator: the i-th output depends only on (key, i), so any
// position of the stream can be regenerated without replaying earlier draws.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  std::uint64_t Bits(std::uint64_t counter) const;
  // Uniform in [0, 1) with 53 bits of resolution.
  double Unit(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Sequential adaptor satisfying UniformRandomBitGenerator, for code that
// wants a classic engine (Monte Carlo helpers, property tests).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : stream_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return stream_.Bits(counter_++); }
  double Unit() { return stream_.Unit(counter_++); }

 private:
  CounterStream stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace perpolicy

#endif  // PERPOLICY_RANDOM_H_
