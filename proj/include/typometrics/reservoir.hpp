// Copyright 2026 The Authors.
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

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace typometrics {

// Uniform integer in [0, bound) by rejection on a 64-bit engine. Unlike
// std::uniform_int_distribution the mapping is fixed, so samples are the
// same across standard library implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Single-pass uniform sampling without replacement (Algorithm R). Items are
// returned in their original stream order.
template <typename T>
class Reservoir {
 public:
  Reservoir(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("reservoir capacity must be >= 1");
  }

  void offer(T item) {
    if (slots_.size() < capacity_) {
      slots_.emplace_back(seen_, std::move(item));
    } else {
      const std::uint64_t j = uniform_below(rng_, seen_ + 1);
      if (j < capacity_) slots_[j] = {seen_, std::move(item)};
    }
    ++seen_;
  }

  std::uint64_t seen() const { return seen_; }

  std::vector<T> take() && {
    std::sort(slots_.begin(), slots_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<T> out;
    out.reserve(slots_.size());
    for (auto& [index, item] : slots_) out.push_back(std::move(item));
    return out;
  }

 private:
  std::size_t capacity_;
  std::mt19937_64 rng_;
  std::uint64_t seen_ = 0;
  std::vector<std::pair<std::uint64_t, T>> slots_;
};

}  // namespace typometrics
