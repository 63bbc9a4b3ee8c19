#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uail {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto process exit codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/layer dimension mismatch. Message names the offending operand.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid or missing configuration. Message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or failed convergence in numeric code.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A required file (dataset, checkpoint, town) is absent or malformed.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// std::normal_distribution is not bit-identical across standard libraries,
// so normal draws go through an explicit Box-Muller transform on top of
// mt19937_64. Identical seeds give identical streams on every platform.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() {
    // 53 mantissa bits of a 64-bit draw.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (pair cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Seed derivation: one master seed fans out into named substreams so that
// independent components (collection, training, per-episode agents) never
// share a stream.
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL);

std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t a, std::uint64_t b);

// ---------------------------------------------------------------------------
// File helpers.
// ---------------------------------------------------------------------------

/// Write via temp file + rename so readers never observe partial output.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

bool finite(double x);
bool all_finite(const std::vector<double>& xs);

}  // namespace uail
