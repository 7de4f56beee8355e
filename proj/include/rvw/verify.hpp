#ifndef RVW_VERIFY_HPP
#define RVW_VERIFY_HPP

// Monte Carlo and grid checks of the concentration claims.
//
// Random numbers: each worker w owns a std::mt19937_64 seeded with the
// (w+1)-th output of SplitMix64 started at the user seed. A uniform is the
// top 53 bits of one draw times 2^-53 and a Bernoulli(p) draw is u < p.
// Binomial draws invert the CDF of a pmf table built in plain IEEE
// arithmetic. No std:: distribution is used because their output differs
// between standard libraries; with this scheme a seed reproduces the same
// counts everywhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rvw/bound.hpp"
#include "rvw/error.hpp"

namespace rvw {

struct McConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

struct McReport {
  double empirical = 0.0;
  double analytic = 0.0;
  double std_err = 0.0;
  bool passed = false;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
};

struct KlScanReport {
  std::uint64_t points = 0;
  std::uint64_t violations = 0;
  /// Largest rhs - lhs seen; negative when the inequality holds strictly.
  double worst_gap = -INFINITY;
};

inline constexpr double kKlScanSlack = 1e-15;
inline constexpr double kMcSigmas = 3.0;

/// SplitMix64 step; used only to derive per-worker seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::vector<std::uint64_t> worker_seeds(std::uint64_t seed,
                                               unsigned workers) {
  std::vector<std::uint64_t> out(workers);
  for (auto& s : out) s = splitmix64(seed);
  return out;
}

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

namespace detail {

inline void check_mc(const McConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorCode::invalid_input, "trials must be >= 1");
  if (cfg.workers < 1) throw Error(ErrorCode::invalid_input, "workers must be >= 1");
}

inline McReport finish(std::uint64_t hits, std::uint64_t trials,
                       double analytic) {
  McReport r;
  r.trials = trials;
  r.hits = hits;
  r.analytic = analytic;
  r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  r.std_err = std::sqrt(r.empirical * (1.0 - r.empirical) /
                        static_cast<double>(trials));
  r.passed = r.empirical <= analytic + kMcSigmas * r.std_err;
  return r;
}

/// Runs `body(rng, trials)` on each worker and sums the returned counts.
template <class Body>
std::uint64_t run_workers(const McConfig& cfg, Body body) {
  const auto seeds = worker_seeds(cfg.seed, cfg.workers);
  std::vector<std::uint64_t> hits(cfg.workers, 0);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < cfg.workers; ++w) {
    const std::uint64_t share =
        cfg.trials / cfg.workers + (w < cfg.trials % cfg.workers ? 1 : 0);
    auto job = [&, w, share] {
      std::mt19937_64 rng(seeds[w]);
      hits[w] = body(rng, share);
    };
    if (cfg.workers == 1) {
      job();
    } else {
      pool.emplace_back(job);
    }
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

/// Largest k with k/n <= p - eps; -1 when no count qualifies.
inline std::int64_t tail_threshold(double p, double eps, std::uint64_t n) {
  return static_cast<std::int64_t>(
      std::floor(static_cast<double>(n) * (p - eps) + 1e-9));
}

/// Binomial(n, p) CDF, pmf built by ratio recurrence outward from the mode.
inline std::vector<double> binomial_cdf(std::uint64_t n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  const auto mode = std::min<std::uint64_t>(
      n, static_cast<std::uint64_t>(std::floor((n + 1) * p)));
  pmf[mode] = 1.0;
  const double odds = p / (1.0 - p);
  for (std::uint64_t k = mode; k < n; ++k)
    pmf[k + 1] = pmf[k] * odds * static_cast<double>(n - k) /
                 static_cast<double>(k + 1);
  for (std::uint64_t k = mode; k > 0; --k)
    pmf[k - 1] = pmf[k] / odds * static_cast<double>(k) /
                 static_cast<double>(n - k + 1);
  double sum = 0.0;
  for (double v : pmf) sum += v;
  std::vector<double> cdf(n + 1);
  double acc = 0.0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    acc += pmf[k] / sum;
    cdf[k] = acc;
  }
  cdf[n] = 1.0;
  return cdf;
}

inline std::uint64_t binomial_draw(const std::vector<double>& cdf, double u) {
  return static_cast<std::uint64_t>(
      std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace detail

/// Fraction of trials in which the mean of n Bernoulli(p) draws is at most
/// p - eps, against the closed-form lower-tail bound.
inline McReport mc_chernoff(double p, double eps, std::uint64_t n,
                            const McConfig& cfg) {
  detail::check_mc(cfg);
  const double analytic = chernoff_lower_tail(p, eps, n);  // checks the domain
  const auto threshold = detail::tail_threshold(p, eps, n);
  const auto hits = detail::run_workers(
      cfg, [&](std::mt19937_64& rng, std::uint64_t trials) {
        std::uint64_t h = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
          std::int64_t ones = 0;
          for (std::uint64_t i = 0; i < n; ++i) ones += uniform01(rng) < p;
          if (ones <= threshold) ++h;
        }
        return h;
      });
  return detail::finish(hits, cfg.trials, analytic);
}

/// A class of fixed classifiers with known population errors, each of
/// description length s_bits. A trial fails when any classifier's test
/// error falls below p_f - sqrt(K p_f (1 - p_f)), with K the slack
/// coefficient for s_bits; the union bound caps the failure rate at
/// delta / cap_c, and the check is against delta.
inline McReport mc_theorem_coverage(std::uint64_t s_bits, std::uint64_t n,
                                    std::uint64_t cap_c, double delta,
                                    const std::vector<double>& class_errors,
                                    const McConfig& cfg) {
  detail::check_mc(cfg);
  if (s_bits < 1 || s_bits > 62)
    throw Error(ErrorCode::domain_error, "s_bits must be in [1, 62]");
  if (class_errors.size() > (std::uint64_t{1} << s_bits))
    throw Error(ErrorCode::domain_error,
                "more classifiers than descriptions of s_bits bits");
  for (double p : class_errors) {
    if (!(p > 0.0 && p <= 0.5))
      throw Error(ErrorCode::domain_error, "class errors must lie in (0, 1/2]");
  }
  const BoundInputs probe{0.0, s_bits, cap_c, delta, n};
  validate(probe);
  const double k = slack_coefficient(probe);

  struct Member {
    std::vector<double> cdf;
    std::int64_t threshold;
  };
  std::vector<Member> members;
  for (double p : class_errors) {
    const double eps = std::sqrt(k * p * (1.0 - p));
    members.push_back({detail::binomial_cdf(n, p),
                       eps >= p ? -1 : detail::tail_threshold(p, eps, n)});
  }
  const auto hits = detail::run_workers(
      cfg, [&](std::mt19937_64& rng, std::uint64_t trials) {
        std::uint64_t h = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
          bool any = false;
          // Every classifier draws, so streams do not depend on outcomes.
          for (const auto& m : members) {
            const auto errors = detail::binomial_draw(m.cdf, uniform01(rng));
            any |= static_cast<std::int64_t>(errors) <= m.threshold;
          }
          h += any;
        }
        return h;
      });
  return detail::finish(hits, cfg.trials, delta);
}

/// Checks KL(p - eps || p) >= eps^2 / (2 p (1 - p)) on
/// p = 0.5 i / grid_p (i = 1..grid_p), eps = p j / grid_eps (j = 0..grid_eps-1).
inline KlScanReport kl_scan(std::uint64_t grid_p, std::uint64_t grid_eps) {
  if (grid_p < 2 || grid_eps < 2)
    throw Error(ErrorCode::invalid_input, "grid sizes must be >= 2");
  KlScanReport r;
  for (std::uint64_t i = 1; i <= grid_p; ++i) {
    const double p = 0.5 * static_cast<double>(i) / static_cast<double>(grid_p);
    for (std::uint64_t j = 0; j < grid_eps; ++j) {
      const double eps =
          p * static_cast<double>(j) / static_cast<double>(grid_eps);
      const double lhs = kl_bernoulli(p, eps);
      const double rhs = eps * eps / (2.0 * p * (1.0 - p));
      r.worst_gap = std::max(r.worst_gap, rhs - lhs);
      ++r.points;
      if (lhs < rhs - kKlScanSlack) ++r.violations;
    }
  }
  return r;
}

inline nlohmann::json to_json(const McReport& r) {
  return {{"empirical", r.empirical}, {"analytic", r.analytic},
          {"std_err", r.std_err},     {"passed", r.passed},
          {"trials", r.trials},       {"hits", r.hits}};
}

inline nlohmann::json to_json(const KlScanReport& r) {
  return {{"points", r.points},
          {"violations", r.violations},
          {"worst_gap", r.worst_gap},
          {"passed", r.violations == 0}};
}

}  // namespace rvw

#endif  // RVW_VERIFY_HPP
