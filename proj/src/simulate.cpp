#include "meta_audit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "meta_audit/combine.hpp"
#include "meta_audit/errors.hpp"
#include "meta_audit/numerics.hpp"

namespace meta_audit {

namespace {

constexpr std::uint64_t kDlArm = 0xD1B54A32D192ED03ULL;

Engine dl_engine(std::uint64_t seed, std::uint64_t index) {
  return Engine(mix64(seed + (mix64(index) ^ kDlArm)));
}

// A generated study: its p-value and the value kept if it is published.
struct Draw {
  double p;
  double value;
};

// Draws until k studies survive publication bias, appending each published
// value to `out`; returns the number of studies generated along the way.
template <typename Generate>
std::size_t publish_k(const SimulationConfig& cfg, Engine& rng,
                      std::vector<double>& out, Generate generate) {
  std::size_t generated = 0;
  while (out.size() < cfg.k_studies) {
    if (++generated > kMaxAttemptsPerReplicate) {
      throw NumericError(
          "simulation could not publish " + std::to_string(cfg.k_studies) +
          " studies within " + std::to_string(kMaxAttemptsPerReplicate) +
          " attempts (rho=" + std::to_string(cfg.pub_bias_rho) +
          ", alpha=" + std::to_string(cfg.alpha) + ")");
    }
    const Draw d = generate();
    if (apply_publication_bias(d.p, cfg.alpha, cfg.pub_bias_rho, rng) ==
        Publication::published) {
      out.push_back(d.value);
    }
  }
  return generated;
}

struct ReplicateOutcome {
  bool fisher_reject = false;
  bool dl_reject = false;
  std::size_t generated = 0;
};

ReplicateOutcome run_replicate(const SimulationConfig& cfg, std::uint64_t i) {
  ReplicateOutcome out;

  Engine rng = replicate_engine(cfg.seed, i);
  std::vector<double> p;
  p.reserve(cfg.k_studies + 1);
  out.generated = publish_k(cfg, rng, p, [&] {
    const double hacked = gen_hacked_p(rng, cfg.hack_width);
    return Draw{hacked, hacked};
  });
  if (cfg.contaminate_p) p.push_back(*cfg.contaminate_p);
  out.fisher_reject = fisher_combine(p).combined_p < cfg.alpha;

  if (cfg.dl_arm) {
    Engine drng = dl_engine(cfg.seed, i);
    std::vector<double> effects;
    effects.reserve(cfg.k_studies + 1);
    publish_k(cfg, drng, effects, [&] {
      // Hacking on effects: report the largest |z| of m tries (se = 1).
      double best = gen_normal(drng);
      for (std::size_t j = 1; j < cfg.hack_width; ++j) {
        const double z = gen_normal(drng);
        if (std::fabs(z) > std::fabs(best)) best = z;
      }
      return Draw{two_sided_p(best), best};
    });
    if (cfg.contaminate_p) {
      effects.push_back(normal_upper_quantile(*cfg.contaminate_p / 2.0));
    }
    const std::vector<double> ses(effects.size(), 1.0);
    const PooledResult pooled = dl_pool(effects, ses, PoolMode::random);
    out.dl_reject = pooled.ci95.first > 0.0 || pooled.ci95.second < 0.0;
  }
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Engine replicate_engine(std::uint64_t seed, std::uint64_t replicate_index) {
  return Engine(mix64(seed + mix64(replicate_index)));
}

double gen_null_p(Engine& rng) {
  return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gen_hacked_p(Engine& rng, std::size_t m) {
  double best = gen_null_p(rng);
  for (std::size_t j = 1; j < m; ++j) best = std::min(best, gen_null_p(rng));
  return best;
}

double gen_normal(Engine& rng) {
  const double u1 = gen_null_p(rng);
  const double u2 = gen_null_p(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Publication apply_publication_bias(double p, double alpha, double rho,
                                   Engine& rng) {
  if (p < alpha || rho >= 1.0) return Publication::published;
  if (rho <= 0.0) return Publication::suppressed;
  // gen_null_p is in (0, 1]; 1 - it is in [0, 1).
  return 1.0 - gen_null_p(rng) < rho ? Publication::published
                                     : Publication::suppressed;
}

void validate(const SimulationConfig& c) {
  if (c.k_studies < 1) throw std::invalid_argument("k_studies must be >= 1");
  if (c.hack_width < 1) throw std::invalid_argument("hack_width must be >= 1");
  if (!(c.pub_bias_rho >= 0.0 && c.pub_bias_rho <= 1.0)) {
    throw std::invalid_argument("pub_bias_rho must lie in [0, 1]");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (c.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (c.contaminate_p && !(*c.contaminate_p > 0.0 && *c.contaminate_p <= 1.0)) {
    throw std::invalid_argument("contaminate_p must lie in (0, 1]");
  }
}

SimulationConfig parse_simulation_config(std::istream& in,
                                         SimulationConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto fail = [&](const std::string& why) {
      return DataError("config line " + std::to_string(lineno) + " (" + key +
                       "): " + why);
    };
    try {
      std::size_t used = 0;
      auto whole = [&](auto v) {
        if (used != value.size()) throw fail("trailing characters in '" + value + "'");
        return v;
      };
      if (key == "k_studies" || key == "k") {
        base.k_studies = whole(std::stoull(value, &used));
      } else if (key == "hack_width" || key == "m") {
        base.hack_width = whole(std::stoull(value, &used));
      } else if (key == "pub_bias_rho" || key == "rho") {
        base.pub_bias_rho = whole(std::stod(value, &used));
      } else if (key == "contaminate_p") {
        if (value.empty() || value == "none") {
          base.contaminate_p.reset();
        } else {
          base.contaminate_p = whole(std::stod(value, &used));
        }
      } else if (key == "alpha") {
        base.alpha = whole(std::stod(value, &used));
      } else if (key == "replicates" || key == "reps") {
        base.replicates = whole(std::stoull(value, &used));
      } else if (key == "seed") {
        base.seed = whole(std::stoull(value, &used));
      } else if (key == "dl_arm" || key == "dl") {
        if (value == "true" || value == "1") {
          base.dl_arm = true;
        } else if (value == "false" || value == "0") {
          base.dl_arm = false;
        } else {
          throw fail("expected true/false, got '" + value + "'");
        }
      } else {
        throw fail("unknown key");
      }
    } catch (const std::logic_error&) {
      throw fail("cannot parse value '" + value + "'");
    }
  }
  return base;
}

std::size_t worker_count_from_env() {
  const char* env = std::getenv("META_AUDIT_THREADS");
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != nullptr && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationResult run_monte_carlo(const SimulationConfig& config,
                                 std::size_t workers) {
  validate(config);
  if (workers == 0) workers = worker_count_from_env();
  workers = std::min(workers, config.replicates);

  std::vector<ReplicateOutcome> outcomes(config.replicates);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.replicates) return;
      try {
        outcomes[i] = run_replicate(config, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.replicates);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t fisher = 0;
  std::size_t dl = 0;
  std::size_t generated = 0;
  for (const auto& o : outcomes) {
    fisher += o.fisher_reject;
    dl += o.dl_reject;
    generated += o.generated;
  }
  const auto reps = static_cast<double>(config.replicates);
  SimulationResult r;
  r.fisher_reject_rate = static_cast<double>(fisher) / reps;
  if (config.dl_arm) r.dl_reject_rate = static_cast<double>(dl) / reps;
  r.mean_k_published = static_cast<double>(generated) / reps;
  r.replicates_run = config.replicates;
  r.seed = config.seed;
  return r;
}

}  // namespace meta_audit
