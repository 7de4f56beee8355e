#ifndef RVW_BOUND_HPP
#define RVW_BOUND_HPP

// Population-error upper bound from a model's description length.
//
// For a classifier with observed test error p_hat whose shortest description
// (for a referee that has never seen the test set) takes `desc_bits` bits,
// out of a class of descriptions of at most `cap_c` bits, with probability at
// least 1 - delta over an N-point test set:
//
//     L_D(f) <= p*      where p* = T(p*),
//     T(p)   = p_hat + sqrt(K p (1 - p)),
//     K      = 2 ln2 (desc_bits + log2(cap_c / delta)) / N.
//
// Units: the Chernoff/KL machinery is in nats. The union bound over the
// 2^s descriptions of length s and over the C possible lengths contributes
// s + log2(C/delta) *bits*; multiplying by ln2 converts that to nats, which
// is where the "2 ln2" in K comes from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rvw/error.hpp"

namespace rvw {

/// Residual allowed in |T(p*) - p*|.
inline constexpr double kFixedPointTolerance = 1e-12;
/// Agreement required between the closed form and plain iteration of T.
inline constexpr double kIterationTolerance = 1e-10;

struct BoundInputs {
  double p_hat = 0.0;
  std::uint64_t desc_bits = 1;
  std::uint64_t cap_c = 1;
  double delta = 0.05;
  std::uint64_t n_test = 1;
};

enum class BoundWarning { vacuous_bound, outside_kl_domain };

inline std::string to_string(BoundWarning w) {
  return w == BoundWarning::vacuous_bound ? "vacuous_bound"
                                          : "outside_kl_domain";
}

struct BoundResult {
  double p_star = 0.0;
  double slack_k = 0.0;
  std::pair<double, double> roots{0.0, 0.0};  // ascending
  double margin = 0.0;
  std::vector<BoundWarning> warnings;

  bool has_warning(BoundWarning w) const {
    return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
  }
};

inline void validate(const BoundInputs& in) {
  if (!(in.p_hat >= 0.0 && in.p_hat <= 1.0)) {
    throw Error(ErrorCode::domain_error, "p_hat must lie in [0, 1]");
  }
  if (!(in.delta > 0.0 && in.delta < 1.0)) {
    throw Error(ErrorCode::domain_error, "delta must lie in (0, 1)");
  }
  if (in.desc_bits < 1) {
    throw Error(ErrorCode::domain_error, "desc_bits must be >= 1");
  }
  if (in.desc_bits > in.cap_c) {
    throw Error(ErrorCode::domain_error, "desc_bits must not exceed cap_c");
  }
  if (in.n_test < 1) {
    throw Error(ErrorCode::domain_error, "n_test must be >= 1");
  }
}

namespace detail {

inline void check_kl_domain(double p, double eps) {
  if (!(p > 0.0 && p <= 0.5)) {
    throw Error(ErrorCode::domain_error, "p must lie in (0, 1/2]");
  }
  if (!(eps >= 0.0 && eps < p)) {
    throw Error(ErrorCode::domain_error, "eps must lie in [0, p)");
  }
}

}  // namespace detail

/// KL(p - eps || p) between Bernoulli distributions, in nats.
/// Evaluated with log1p so small eps does not cancel catastrophically.
inline double kl_bernoulli(double p, double eps) {
  detail::check_kl_domain(p, eps);
  const double q = p - eps;
  return q * std::log1p(-eps / p) + (1.0 - q) * std::log1p(eps / (1.0 - p));
}

/// Upper bound on P[mean of n Bernoulli(p) <= p - eps].
inline double chernoff_lower_tail(double p, double eps, std::uint64_t n) {
  detail::check_kl_domain(p, eps);
  if (n < 1) throw Error(ErrorCode::domain_error, "n must be >= 1");
  return std::exp(-static_cast<double>(n) * eps * eps / (2.0 * p * (1.0 - p)));
}

/// K = 2 ln2 (desc_bits + log2(cap_c/delta)) / N.
inline double slack_coefficient(const BoundInputs& in) {
  const double bits = static_cast<double>(in.desc_bits) +
                      std::log2(static_cast<double>(in.cap_c) / in.delta);
  return 2.0 * std::numbers::ln2 * bits / static_cast<double>(in.n_test);
}

inline double t_map(double p, const BoundInputs& in) {
  validate(in);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::domain_error, "p must lie in [0, 1]");
  }
  return in.p_hat + std::sqrt(slack_coefficient(in) * p * (1.0 - p));
}

/// Solves T(p) = p, i.e. (1+K) p^2 - (2 p_hat + K) p + p_hat^2 = 0, and
/// returns the larger root.
inline BoundResult solve_bound(const BoundInputs& in) {
  validate(in);
  const double k = slack_coefficient(in);
  const double ph = in.p_hat;

  BoundResult r;
  r.slack_k = k;
  if (ph == 0.0) {
    r.roots = {0.0, k / (1.0 + k)};
  } else {
    const double a = 1.0 + k;
    const double minus_b = 2.0 * ph + k;
    const double c = ph * ph;
    // b^2 - 4ac expanded so it carries no cancellation.
    const double disc = k * k + 4.0 * k * ph * (1.0 - ph);
    if (disc < 0.0) {
      throw Error(ErrorCode::no_real_root, "negative discriminant");
    }
    const double q = 0.5 * (minus_b + std::sqrt(disc));
    const double hi = q / a;
    const double lo = c / q;
    r.roots = {std::min(lo, hi), std::max(lo, hi)};
  }

  r.p_star = r.roots.second;
  if (r.p_star > 1.0) {
    r.p_star = 1.0;
    r.warnings.push_back(BoundWarning::vacuous_bound);
  }
  if (r.p_star > 0.5) r.warnings.push_back(BoundWarning::outside_kl_domain);
  r.margin = r.p_star - ph;

  const auto t = [&](double p) { return ph + std::sqrt(k * p * (1.0 - p)); };
  if (std::abs(t(r.p_star) - r.p_star) > kFixedPointTolerance) {
    throw Error(ErrorCode::invariant_violation,
                "fixed-point residual exceeds tolerance");
  }
  constexpr int kGrid = 100;
  for (int i = 0; i < kGrid; ++i) {
    const double p = r.p_star + (1.0 - r.p_star) * i / (kGrid - 1);
    if (t(p) > p + kFixedPointTolerance) {
      throw Error(ErrorCode::invariant_violation,
                  "T(p) > p above the fixed point");
    }
  }
  return r;
}

/// Iterates p <- T(p) from max(p_hat, 0.5). Converges to p* when p* <= 1/2.
inline double iterate_bound(const BoundInputs& in, int max_iter = 100000,
                            double tol = 1e-16) {
  validate(in);
  const double k = slack_coefficient(in);
  double p = std::max(in.p_hat, 0.5);
  for (int i = 0; i < max_iter; ++i) {
    const double next = in.p_hat + std::sqrt(k * p * (1.0 - p));
    if (std::abs(next - p) <= tol) return next;
    p = next;
  }
  return p;
}

/// c * sqrt(k / N), the folklore Occam bound; for comparison output only.
inline double folklore_bound(std::uint64_t desc_bits, std::uint64_t n_test,
                             double c_const) {
  if (desc_bits < 1 || n_test < 1 || !(c_const > 0.0)) {
    throw Error(ErrorCode::domain_error, "folklore bound needs positive inputs");
  }
  return c_const * std::sqrt(static_cast<double>(desc_bits) /
                             static_cast<double>(n_test));
}

}  // namespace rvw

#endif  // RVW_BOUND_HPP
