// Copyright 2026 The polyprop Authors.
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

#ifndef POLYPROP_COMMON_H_
#define POLYPROP_COMMON_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polyprop {

inline constexpr int kNumHeads = 22;

// Base class for every error the library reports. Subclasses carry the
// error kind in their type; what() carries the diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define POLYPROP_ERROR(Name)              \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

POLYPROP_ERROR(ContractViolation);
POLYPROP_ERROR(IncompatibleUnit);
POLYPROP_ERROR(MalformedDocument);
POLYPROP_ERROR(MismatchedIds);
POLYPROP_ERROR(EmptySample);
POLYPROP_ERROR(DegenerateHead);
POLYPROP_ERROR(ZeroVariance);
POLYPROP_ERROR(NonFiniteLoss);
POLYPROP_ERROR(CorruptCheckpoint);
POLYPROP_ERROR(VersionMismatch);
POLYPROP_ERROR(ConfigError);
POLYPROP_ERROR(IoError);
POLYPROP_ERROR(LeakageDetected);

#undef POLYPROP_ERROR

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

// FNV-1a, 64 bit. Token bucketing and digests depend on this exact function;
// changing it invalidates every checkpoint.
inline constexpr std::uint32_t kHashVersion = 1;

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

// Seeded generator with platform-independent derived distributions.
// std::normal_distribution and std::shuffle are implementation-defined, so
// everything that must be bit-reproducible goes through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling avoids modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a label.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return fnv1a64(label, fnv1a64(std::to_string(seed)));
}

}  // namespace polyprop

#endif  // POLYPROP_COMMON_H_
