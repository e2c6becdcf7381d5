#include "smcmix/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace smcmix {

double err_vector(std::span<const double> truth, std::span<const double> est) {
  if (truth.size() != est.size()) throw InvariantError("err_vector: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double d = truth[k] - est[k];
    num += d * d;
    den += truth[k] * truth[k];
  }
  if (!(den > 0.0)) throw DomainError("err_vector: reference has zero norm");
  return num / den;
}

double err_matrix(const Matrix& truth, const Matrix& est) {
  if (truth.rows() != est.rows() || truth.cols() != est.cols())
    throw InvariantError("err_matrix: shape mismatch");
  return err_vector(truth.data(), est.data());
}

std::vector<std::size_t> align_components(const MixtureModel& truth, const MixtureModel& est) {
  const std::size_t g_count = truth.component_count();
  if (est.component_count() != g_count)
    throw InvariantError("align_components: component counts differ");
  if (g_count > kMaxAlignComponents) throw DomainError("align_components: too many components");

  Matrix cost(g_count, g_count);
  for (std::size_t g = 0; g < g_count; ++g)
    for (std::size_t h = 0; h < g_count; ++h)
      cost(g, h) = err_matrix(truth.component(g).trans(), est.component(h).trans()) +
                   err_vector(truth.component(g).alpha(), est.component(h).alpha());

  std::vector<std::size_t> perm(g_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t g = 0; g < g_count; ++g) c += cost(g, perm[g]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double err_gamma(const MixtureModel& truth, const MixtureModel& est, GammaParameter which,
                 std::span<const std::size_t> perm) {
  if (perm.size() != truth.component_count() || est.component_count() != truth.component_count())
    throw InvariantError("err_gamma: component counts differ");
  const auto pick = [which](const GammaParams& p) {
    return which == GammaParameter::kShape ? p.shape() : p.rate();
  };
  double num = 0.0;
  double den = 0.0;
  for (std::size_t g = 0; g < truth.component_count(); ++g) {
    const auto& t = truth.component(g);
    const auto& e = est.component(perm[g]);
    for (StateIndex l = 0; l < t.state_count(); ++l) {
      if (t.is_absorbing(l)) continue;
      const double tv = pick(t.sojourn(l));
      const double d = pick(e.sojourn(l)) - tv;
      num += d * d;
      den += tv * tv;
    }
  }
  return num / den;
}

double err_gamma(const MixtureModel& truth, const MixtureModel& est, GammaParameter which) {
  return err_gamma(truth, est, which, align_components(truth, est));
}

double classification_rate(std::span<const std::size_t> truth, std::span<const std::size_t> est) {
  if (truth.size() != est.size() || truth.empty())
    throw InvariantError("classification_rate: label vectors differ in length or are empty");
  std::size_t k = 0;
  for (std::size_t l : truth) k = std::max(k, l + 1);
  for (std::size_t l : est) k = std::max(k, l + 1);
  if (k > kMaxAlignComponents) throw DomainError("classification_rate: too many labels");

  Matrix agree(k, k);  // agree(e, t): subjects with est label e and true label t
  for (std::size_t i = 0; i < truth.size(); ++i) agree(est[i], truth[i]) += 1.0;

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double hits = 0.0;
    for (std::size_t e = 0; e < k; ++e) hits += agree(e, perm[e]);
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(truth.size());
}

std::vector<double> pi_recovery(const MixtureModel& est, std::span<const std::size_t> perm) {
  std::vector<double> out;
  for (std::size_t h : perm) out.push_back(est.weight(h));
  return out;
}

std::vector<double> pi_recovery(const MixtureModel& truth, const MixtureModel& est) {
  return pi_recovery(est, align_components(truth, est));
}

}  // namespace smcmix
