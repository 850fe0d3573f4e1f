// Copyright 2026 The EarlySD Authors.
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

#ifndef EARLYSD_RNG_H_
#define EARLYSD_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace earlysd {

// Seeded generator with samplers defined here rather than through
// <random> distributions, whose output is implementation-defined. The raw
// engine (mt19937_64) is fully specified by the standard, so every draw is
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(Mix(seed)) {}

  // Independent stream derived from this generator's seed and a tag.
  static Rng Stream(std::uint64_t seed, std::uint64_t tag) {
    return Rng(Mix(seed) ^ Mix(tag + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, n).
  std::size_t Index(std::size_t n);

  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal();
  double Normal(double mean, double sd) { return mean + sd * Normal(); }
  // Inversion sampler; fine for the small means used here.
  int Poisson(double mean);

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[Index(i)]);
    }
  }

  // Weighted sampling of k distinct indices without replacement
  // (Efraimidis-Spirakis keys). Zero-weight entries are never chosen; the
  // result may be shorter than k when fewer positive weights exist.
  std::vector<std::size_t> SampleWithoutReplacement(
      std::span<const double> weights, std::size_t k);

  // Draw one index proportional to weights.
  std::size_t Categorical(std::span<const double> weights);

 private:
  static std::uint64_t Mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace earlysd

#endif  // EARLYSD_RNG_H_
