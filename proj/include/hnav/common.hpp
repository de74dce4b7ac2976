// Copyright 2026 The hnav Authors. All Rights Reserved.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace hnav {

// Error hierarchy. Every failure mode named by a module maps onto one of
// these so the CLI can turn them into exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidNodeError : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public Error {
 public:
  using Error::Error;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Environment viewpoint identifier. The stop action uses a reserved id.
struct NodeId {
  std::uint32_t value = 0;

  friend constexpr bool operator==(NodeId, NodeId) = default;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline constexpr NodeId kStopNode{std::numeric_limits<std::uint32_t>::max()};

inline std::string to_string(NodeId id) {
  return id == kStopNode ? std::string("stop") : std::to_string(id.value);
}

/// Semantic class labels packed one bit per class (C <= 64).
using SemanticBits = std::uint64_t;

inline constexpr int kMaxSemanticClasses = 64;

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-stream seed derived from a base seed and integer tags.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                           std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

/// Named sub-stream ("world", "mask", "sample", ...).
inline std::uint64_t derive_seed(std::uint64_t base, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
  return derive_seed(base, h);
}

}  // namespace hnav

template <>
struct std::hash<hnav::NodeId> {
  std::size_t operator()(hnav::NodeId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
