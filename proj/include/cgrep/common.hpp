#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace cgrep {

/// Malformed, missing, or out-of-domain input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid call parameters (counts, thresholds, grid sizes).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Counter-based stream derivation: the same (master, stream, index) triple
/// always yields the same seed, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::uint64_t stream,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

/// Stream identifiers so that independent consumers of one master seed never
/// share a random sequence.
namespace streams {
inline constexpr std::uint64_t kRankIteration = 0x52414e4bULL;
inline constexpr std::uint64_t kEvalIteration = 0x4556414cULL;
inline constexpr std::uint64_t kCvFolds = 0x43564644ULL;
inline constexpr std::uint64_t kPermutation = 0x5045524dULL;
inline constexpr std::uint64_t kSimulation = 0x53494d55ULL;
inline constexpr std::uint64_t kPhantom = 0x5048414eULL;
}  // namespace streams

/// Number of worker threads used by parallel_for; 0 selects hardware
/// concurrency. Results never depend on this value.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
/// write into per-index slots so the outcome is schedule independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Configures the global logger from CGREP_LOG (off|info|debug).
void init_logging_from_env();

}  // namespace cgrep
