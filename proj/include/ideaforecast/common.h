/*
 * Copyright 2026 The ideaforecast Authors.
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

// Shared vocabulary types and small utilities used across modules.

#ifndef IDEAFORECAST_COMMON_H_
#define IDEAFORECAST_COMMON_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ideaforecast {

// Raised when an operation's precondition is violated (e.g. fewer than two
// entries for a pairwise statistic, a negative score gap).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when input data is inconsistent in a way the caller must fix (missing
// swap twins, predictions that do not cover a dataset, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary pair label. `kIdeaA` (1) means idea A is empirically better.
enum class Label : int { kIdeaB = 0, kIdeaA = 1 };

inline int ToInt(Label label) { return static_cast<int>(label); }
inline Label Complement(Label label) {
  return label == Label::kIdeaA ? Label::kIdeaB : Label::kIdeaA;
}

// Converts between the label convention used here (1 = idea A better) and the
// opposite convention (0 = idea A better). The map is an involution.
inline int ToIdeaAZeroConvention(Label label) { return 1 - ToInt(label); }
inline Label FromIdeaAZeroConvention(int value) {
  return value == 0 ? Label::kIdeaA : Label::kIdeaB;
}

// Number of Unicode code points in a UTF-8 string. Invalid sequences count
// one per lead byte.
inline std::int64_t Utf8Length(std::string_view text) {
  std::int64_t count = 0;
  for (const char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

// 64-bit FNV-1a over bytes. Used to derive per-item seeds from identifiers,
// independent of platform word order.
inline std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace ideaforecast

#endif  // IDEAFORECAST_COMMON_H_
