#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>

namespace meta_audit {

// Random number contract
// ----------------------
// Every replicate owns an independent std::mt19937_64 stream seeded with
//
//   stream_seed(seed, i) = mix64(seed + mix64(i))          (Fisher arm)
//   stream_seed(seed, i) = mix64(seed + mix64(i) ^ kDlArm) (effect arm)
//
// where mix64 is the SplitMix64 finalizer (Steele, Lea & Flood 2014).
// A uniform in (0, 1] is 1 - (draw >> 11) * 2^-53. Normals use Box-Muller
// on two such uniforms, keeping the cosine branch only. Results depend only
// on the config, never on the number of worker threads.

using Engine = std::mt19937_64;

/// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t z);

Engine replicate_engine(std::uint64_t seed, std::uint64_t replicate_index);

/// One null p-value, uniform on (0, 1].
double gen_null_p(Engine& rng);

/// Minimum of m null p-values (an analyst reporting the best of m tries).
double gen_hacked_p(Engine& rng, std::size_t m);

/// Standard normal draw.
double gen_normal(Engine& rng);

enum class Publication { published, suppressed };

/// Significant results (p < alpha) are always published; others survive
/// with probability rho. Consumes a draw only for non-significant p.
Publication apply_publication_bias(double p, double alpha, double rho,
                                   Engine& rng);

struct SimulationConfig {
  std::size_t k_studies = 20;
  std::size_t hack_width = 1;
  double pub_bias_rho = 0.1;  // roughly one null result per ten positives
  std::optional<double> contaminate_p;
  double alpha = 0.05;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  bool dl_arm = false;  // also simulate effect-size literatures for DL
};

struct SimulationResult {
  double fisher_reject_rate = 0.0;
  std::optional<double> dl_reject_rate;
  double mean_k_published = 0.0;  // mean studies generated per replicate
  std::size_t replicates_run = 0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const SimulationConfig& config);

/// Applies `key = value` lines (blank lines and '#' comments ignored) on
/// top of `base`. Throws DataError with the line number on bad input.
SimulationConfig parse_simulation_config(std::istream& in,
                                         SimulationConfig base = {});

/// Worker count from META_AUDIT_THREADS; unset, empty or 0 means one per
/// hardware thread.
std::size_t worker_count_from_env();

/// Generation attempts allowed per replicate before giving up.
inline constexpr std::size_t kMaxAttemptsPerReplicate = 10'000'000;

/// Runs all replicates. `workers` = 0 uses worker_count_from_env().
/// Throws NumericError if a replicate cannot publish k studies within
/// kMaxAttemptsPerReplicate attempts.
SimulationResult run_monte_carlo(const SimulationConfig& config,
                                 std::size_t workers = 0);

}  // namespace meta_audit
