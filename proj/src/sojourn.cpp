#include "smcmix/sojourn.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace smcmix {

namespace {

// Below this argument the recurrences shift x upwards before the asymptotic
// expansions are used; at x >= 10 the truncated series error is < 1e-16.
constexpr double kAsymptoticThreshold = 10.0;

// ln x - psi(x) for x >= kAsymptoticThreshold.
double log_minus_digamma_asymptotic(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  // Bernoulli terms B_2k / (2k x^2k), k = 1..7.
  const double series =
      r2 * (1.0 / 12 -
            r2 * (1.0 / 120 -
                  r2 * (1.0 / 252 -
                        r2 * (1.0 / 240 -
                              r2 * (1.0 / 132 - r2 * (691.0 / 32760 - r2 * (1.0 / 12)))))));
  return 0.5 * r + series;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma: argument must be positive");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return std::log(x) - log_minus_digamma_asymptotic(x) + shift;
}

double log_minus_digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_minus_digamma: argument must be positive");
  if (x >= kAsymptoticThreshold) return log_minus_digamma_asymptotic(x);
  return std::log(x) - digamma(x);
}

double trigamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("trigamma: argument must be positive");
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r * (1.0 +
           r * (0.5 +
                r * (1.0 / 6 -
                     r2 * (1.0 / 30 -
                           r2 * (1.0 / 42 -
                                 r2 * (1.0 / 30 -
                                       r2 * (5.0 / 66 - r2 * (691.0 / 2730 - r2 * (7.0 / 6)))))))));
  return series + shift;
}

// ---------------------------------------------------------------------------

WeightedSample::WeightedSample(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.size() != weights_.size())
    throw InvariantError("WeightedSample: values and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(std::isfinite(values_[i]) && values_[i] > 0.0))
      throw InvariantError("WeightedSample: values must be positive");
    if (!(std::isfinite(weights_[i]) && weights_[i] >= 0.0))
      throw InvariantError("WeightedSample: weights must be nonnegative");
    total += weights_[i];
  }
  if (!(total > 0.0)) throw InvariantError("WeightedSample: total weight must be positive");
}

WeightedSample::WeightedSample(std::vector<double> values)
    : WeightedSample(values, std::vector<double>(values.size(), 1.0)) {}

void GammaSufficientStats::add(double x, double w) {
  if (w <= 0.0) return;
  weight += w;
  sum_x += w * x;
  sum_logx += w * std::log(x);
  ++positive_count;
}

void GammaSufficientStats::merge(const GammaSufficientStats& other) {
  weight += other.weight;
  sum_x += other.sum_x;
  sum_logx += other.sum_logx;
  positive_count += other.positive_count;
}

GammaSufficientStats GammaSufficientStats::of(const WeightedSample& sample) {
  GammaSufficientStats s;
  for (std::size_t i = 0; i < sample.size(); ++i) s.add(sample.values()[i], sample.weights()[i]);
  return s;
}

double gamma_log_density(double t, const GammaParams& p) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("gamma_log_density: t must be positive");
  const double a = p.shape();
  const double lambda = p.rate();
  return (a - 1.0) * std::log(t) + a * std::log(lambda) - lambda * t - std::lgamma(a);
}

GammaParams fit_gamma_mom(const WeightedSample& sample) {
  double w = 0.0;
  double sx = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    w += sample.weights()[i];
    sx += sample.weights()[i] * sample.values()[i];
  }
  const double mean = sx / w;
  double ss = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double d = sample.values()[i] - mean;
    ss += sample.weights()[i] * d * d;
  }
  const double var = ss / w;
  if (!(var > 1e-12 * mean * mean))
    throw DegenerateSample("fit_gamma_mom: sample variance vanishes");
  return GammaParams(mean * mean / var, mean / var);
}

// ---------------------------------------------------------------------------

double gamma_profile_objective(const GammaSufficientStats& s, double a, double c) {
  const double lambda = a * s.weight / s.sum_x;
  return s.weight * (a * std::log(lambda) - std::lgamma(a)) + (a - 1.0) * s.sum_logx -
         lambda * s.sum_x - c * (a + std::log(a));
}

double gamma_weighted_objective(const GammaSufficientStats& s, const GammaParams& p, double c) {
  const double a = p.shape();
  return s.weight * (a * std::log(p.rate()) - std::lgamma(a)) + (a - 1.0) * s.sum_logx -
         p.rate() * s.sum_x - c * (a + std::log(a));
}

double gamma_profile_derivative(const GammaSufficientStats& s, double a, double c) {
  // W (ln a - psi(a)) + W ln(W / Sx) + Slogx - c (1 + 1/a); the middle two
  // terms are W times (weighted mean log - log weighted mean) <= 0.
  const double jensen_gap = s.weight * std::log(s.weight / s.sum_x) + s.sum_logx;
  return s.weight * log_minus_digamma(a) + jensen_gap - c * (1.0 + 1.0 / a);
}

namespace {

double profile_second_derivative(const GammaSufficientStats& s, double a, double c) {
  return s.weight * (1.0 / a - trigamma(a)) + c / (a * a);
}

}  // namespace

GammaParams fit_gamma_pmle(const GammaSufficientStats& s, double c, std::size_t min_count) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("fit_gamma_pmle: penalty must be >= 0");
  if (s.positive_count < std::max<std::size_t>(min_count, 1) || !(s.weight > 0.0))
    throw DegenerateSample("fit_gamma_pmle: " + std::to_string(s.positive_count) +
                           " weighted observations, need " + std::to_string(min_count));

  const auto h = [&](double a) { return gamma_profile_derivative(s, a, c); };
  double lo = kMinShape;
  double hi = kMaxShape;
  if (h(lo) <= 0.0) throw NonConvergence("fit_gamma_pmle: shape optimum below search interval");
  if (h(hi) >= 0.0) throw NonConvergence("fit_gamma_pmle: shape optimum above search interval");

  // Starting point: closed-form approximation of the unpenalized MLE.
  const double gap = std::log(s.sum_x / s.weight) - s.sum_logx / s.weight;
  double a = gap > 0.0 ? (3.0 - gap + std::sqrt((gap - 3.0) * (gap - 3.0) + 24.0 * gap)) / (12.0 * gap)
                       : hi;
  if (!(a > lo && a < hi)) a = std::sqrt(lo * hi);

  const double tol = 1e-12 * std::max(1.0, s.weight);
  for (int iter = 0; iter < 200; ++iter) {
    const double value = h(a);
    if (std::abs(value) <= tol) break;
    if (value > 0.0) lo = a; else hi = a;
    const double slope = profile_second_derivative(s, a, c);
    double next = a - value / slope;
    if (!(slope < 0.0) || !(next > lo && next < hi))
      next = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (std::abs(next - a) <= 1e-15 * a) {
      a = next;
      break;
    }
    a = next;
  }
  return GammaParams(a, a * s.weight / s.sum_x);
}

GammaParams fit_gamma_pmle(const WeightedSample& sample, double c, std::size_t min_count) {
  return fit_gamma_pmle(GammaSufficientStats::of(sample), c, min_count);
}

}  // namespace smcmix
