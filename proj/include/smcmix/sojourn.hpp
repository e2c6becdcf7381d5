#pragma once

// Gamma sojourn-time law: density, moment fitting and weighted penalized
// maximum likelihood.

#include <cstddef>
#include <span>
#include <vector>

#include "smcmix/core.hpp"

namespace smcmix {

/// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);
/// ln(x) - psi(x), accurate for large x where the difference is ~1/(2x).
double log_minus_digamma(double x);
/// psi'(x), x > 0.
double trigamma(double x);

/// Positive durations with nonnegative weights.
class WeightedSample {
 public:
  WeightedSample(std::vector<double> values, std::vector<double> weights);
  /// Unit weights.
  explicit WeightedSample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Weighted sufficient statistics of a gamma sample. The weighted
/// log-likelihood is W(a ln lambda - ln Gamma(a)) + (a-1) sum_logx - lambda sum_x.
struct GammaSufficientStats {
  double weight = 0.0;   // sum w
  double sum_x = 0.0;    // sum w x
  double sum_logx = 0.0; // sum w ln x
  std::size_t positive_count = 0;

  void add(double x, double w);
  void merge(const GammaSufficientStats& other);
  static GammaSufficientStats of(const WeightedSample& sample);
};

double gamma_log_density(double t, const GammaParams& p);

/// Method-of-moments fit from weighted mean and (biased) weighted variance.
/// Throws DegenerateSample when the variance vanishes.
GammaParams fit_gamma_mom(const WeightedSample& sample);

/// Profile of  sum w ln f(x; a, lambda) - c (a + ln a)  over lambda, as a
/// function of the shape a; lambda is eliminated as a W / sum_x.
double gamma_profile_objective(const GammaSufficientStats& stats, double shape, double penalty_c);
/// sum w ln f(x; a, lambda) - c (a + ln a) at the given parameters.
double gamma_weighted_objective(const GammaSufficientStats& stats, const GammaParams& p,
                                double penalty_c);
/// d/da of gamma_profile_objective.
double gamma_profile_derivative(const GammaSufficientStats& stats, double shape, double penalty_c);

/// Search interval for the shape parameter.
inline constexpr double kMinShape = 1e-3;
inline constexpr double kMaxShape = 1e4;

/// Maximizer of the penalized weighted log-likelihood. penalty_c = 0 gives
/// the plain weighted MLE.
///
/// Throws DegenerateSample when fewer than min_count observations carry
/// positive weight, NonConvergence when the optimum lies outside
/// [kMinShape, kMaxShape].
GammaParams fit_gamma_pmle(const GammaSufficientStats& stats, double penalty_c,
                           std::size_t min_count = 1);
GammaParams fit_gamma_pmle(const WeightedSample& sample, double penalty_c,
                           std::size_t min_count = 1);

}  // namespace smcmix
