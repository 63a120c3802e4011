// Copyright 2026 The fnlgen Authors.
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

#ifndef FNLGEN_RNG_H_
#define FNLGEN_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace fnlgen {

using Rng = std::mt19937_64;

// Derives an independent child seed from a root seed and a purpose label,
// e.g. derive_seed(seed, "init") or derive_seed(seed, "sampler").
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// 64-bit FNV-1a, used for data fingerprints.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size);
  void update(double value) { update(&value, sizeof(value)); }
  void update(std::uint64_t value) { update(&value, sizeof(value)); }
  void update(std::string_view s) { update(s.data(), s.size()); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace fnlgen

#endif  // FNLGEN_RNG_H_
