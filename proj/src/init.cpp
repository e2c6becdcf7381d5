#include "smcmix/init.hpp"

#include <algorithm>
#include <limits>

#include "smcmix/em.hpp"
#include "smcmix/parallel.hpp"
#include "smcmix/random.hpp"
#include "smcmix/sojourn.hpp"

namespace smcmix {

Matrix mean_sojourn_features(const Panel& panel) {
  const std::size_t d = panel.space().size();
  Matrix f(panel.subject_count(), d);
  for (std::size_t i = 0; i < panel.subject_count(); ++i) {
    std::vector<double> total(d, 0.0);
    std::vector<double> count(d, 0.0);
    for (const auto& t : panel.subject(i)) {
      for (std::size_t k = 0; k < t.sojourn_count(); ++k) {
        total[t.state(k)] += t.sojourn(k);
        count[t.state(k)] += 1.0;
      }
    }
    for (StateIndex l = 0; l < d; ++l) f(i, l) = count[l] > 0.0 ? total[l] / count[l] : 0.0;
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::size_t first = rng.index(n);
  std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], squared_distance(points.row(i), centers.row(c - 1)));
    double total = 0.0;
    for (double v : dist) total += v;
    const std::size_t pick = total > 0.0 ? rng.categorical(dist) : rng.index(n);
    std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
  }
  return centers;
}

KMeansResult lloyd(const Matrix& points, Matrix centers) {
  const std::size_t n = points.rows();
  const std::size_t k = centers.rows();
  const std::size_t dim = points.cols();
  KMeansResult res;
  res.labels.assign(n, std::numeric_limits<std::size_t>::max());
  std::vector<double> dist(n);

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points.row(i), centers.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dd = squared_distance(points.row(i), centers.row(c));
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (res.labels[i] != best) changed = true;
      res.labels[i] = best;
      dist[i] = best_d;
    }

    // Re-seed empty clusters with the point farthest from its centroid.
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t l : res.labels) ++sizes[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (sizes[res.labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      --sizes[res.labels[far]];
      res.labels[far] = c;
      sizes[c] = 1;
      dist[far] = 0.0;
      std::copy(points.row(far).begin(), points.row(far).end(), centers.row(c).begin());
      changed = true;
    }

    double sse = 0.0;
    for (double v : dist) sse += v;
    res.sse_trace.push_back(sse);
    res.sse = sse;
    if (!changed && iter > 0) break;

    Matrix next(k, dim);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) next(res.labels[i], j) += points(i, j);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < dim; ++j) next(c, j) /= static_cast<double>(sizes[c]);
    centers = std::move(next);
  }
  res.centroids = std::move(centers);
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts) {
  if (k < 1) throw DomainError("kmeans: k must be >= 1");
  if (points.rows() < k) throw DomainError("kmeans: fewer points than clusters");
  restarts = std::max<std::size_t>(restarts, 1);
  std::vector<KMeansResult> runs(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    runs[r] = lloyd(points, plus_plus_seeds(points, k, rng));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (runs[r].sse < runs[best].sse) best = r;
  return std::move(runs[best]);
}

// ---------------------------------------------------------------------------

namespace {

GammaParams moment_fit_with_fallback(const std::vector<double>& state_values,
                                     const std::vector<double>& cluster_values,
                                     const std::vector<double>& panel_values,
                                     std::size_t min_obs) {
  if (state_values.size() > min_obs) {
    try {
      return fit_gamma_mom(WeightedSample(state_values));
    } catch (const DegenerateSample&) {
    }
  }
  if (cluster_values.size() > min_obs) {
    try {
      return fit_gamma_mom(WeightedSample(cluster_values));
    } catch (const DegenerateSample&) {
    }
  }
  try {
    return fit_gamma_mom(WeightedSample(panel_values));
  } catch (const DegenerateSample&) {
    // Constant durations everywhere: exponential law with the right mean.
    return GammaParams(1.0, 1.0 / panel_values.front());
  }
}

}  // namespace

Initialization initialize(const Panel& panel, std::size_t components, std::uint64_t seed,
                          const InitOptions& options) {
  const std::size_t n = panel.subject_count();
  const std::size_t d = panel.space().size();
  const auto& space = panel.space();

  KMeansResult km = kmeans(mean_sojourn_features(panel), components, seed, options.restarts);

  Matrix hard(n, components);
  for (std::size_t i = 0; i < n; ++i) hard(i, km.labels[i]) = 1.0;
  const PosteriorMatrix z(hard);
  auto chains = m_step_alpha_trans(PanelSummary(panel), z);

  // values[g][l]: sojourns in state l of subjects in cluster g.
  std::vector<std::vector<std::vector<double>>> values(
      components, std::vector<std::vector<double>>(d));
  std::vector<double> panel_values;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : panel.subject(i)) {
      for (std::size_t k = 0; k < t.sojourn_count(); ++k) {
        values[km.labels[i]][t.state(k)].push_back(t.sojourn(k));
        panel_values.push_back(t.sojourn(k));
      }
    }
  }

  std::vector<double> weights(components, 0.0);
  for (std::size_t l : km.labels) weights[l] += 1.0;
  for (double& w : weights) w /= static_cast<double>(n);

  std::vector<ComponentParams> comps;
  for (std::size_t g = 0; g < components; ++g) {
    auto& ch = chains[g];
    for (StateIndex l = 0; l < d; ++l) {
      if (space.is_absorbing(l)) continue;
      ch.alpha[l] += options.smoothing;
      for (StateIndex j = 0; j < d; ++j)
        if (j != l) ch.trans(l, j) += options.smoothing;
    }
    normalize(ch.alpha);
    normalize_rows(ch.trans, space.absorbing());

    std::vector<double> cluster_values;
    for (const auto& v : values[g]) cluster_values.insert(cluster_values.end(), v.begin(), v.end());
    std::vector<GammaParams> sojourn;
    for (StateIndex l = 0; l < d; ++l) {
      if (space.is_absorbing(l)) {
        sojourn.emplace_back(1.0, 1.0);
        continue;
      }
      sojourn.push_back(
          moment_fit_with_fallback(values[g][l], cluster_values, panel_values, options.min_obs_mass));
    }
    comps.emplace_back(space, std::move(ch.alpha), std::move(ch.trans), std::move(sojourn));
  }
  return Initialization{MixtureModel(space, std::move(weights), std::move(comps)),
                        std::move(km.labels)};
}

MixtureModel initial_model(const Panel& panel, std::size_t components, std::uint64_t seed,
                           const InitOptions& options) {
  return initialize(panel, components, seed, options).model;
}

}  // namespace smcmix
