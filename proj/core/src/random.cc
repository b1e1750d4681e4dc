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

#include "perpolicy/random.h"

namespace perpolicy {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveKey(std::uint64_t parent,
                        std::initializer_list<std::uint64_t> counters) {
  std::uint64_t key = Mix64(parent + kGolden);
  for (std::uint64_t c : counters) {
    key = Mix64(key ^ Mix64(c + kGolden));
  }
  return key;
}

std::uint64_t CounterStream::Bits(std::uint64_t counter) const {
  return Mix64(key_ + (counter + 1) * kGolden);
}

double CounterStream::Unit(std::uint64_t counter) const {
  return static_cast<double>(Bits(counter) >> 11) * 0x1.0p-53;
}

}  // namespace perpolicy
