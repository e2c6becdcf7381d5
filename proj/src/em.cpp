#include "smcmix/em.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smcmix/likelihood.hpp"
#include "smcmix/numeric.hpp"

namespace smcmix {

void EmConfig::validate() const {
  if (max_iter < 1) throw InvariantError("EmConfig: max_iter must be >= 1");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvariantError("EmConfig: rel_tol must lie in (0,1)");
  if (!(z_round == 0.0 || (z_round > 0.0 && z_round <= 0.1)))
    throw InvariantError("EmConfig: z_round must be 0 or in (0, 0.1]");
}

EmptyComponent::EmptyComponent(std::size_t component, std::shared_ptr<const FitReport> partial)
    : NumericalError("mixture component " + std::to_string(component) + " became empty"),
      component_(component),
      partial_(std::move(partial)) {}

namespace {

void add_warning(std::vector<std::string>* warnings, std::string w) {
  if (warnings && std::find(warnings->begin(), warnings->end(), w) == warnings->end())
    warnings->push_back(std::move(w));
}

}  // namespace

// ---------------------------------------------------------------------------

PanelSummary::PanelSummary(const Panel& panel)
    : space_(panel.space()), d_(panel.space().size()), replications_(panel.replications()) {
  const std::size_t n = panel.subject_count();
  first_.assign(n, std::vector<double>(d_, 0.0));
  trans_.assign(n, std::vector<double>(d_ * d_, 0.0));
  sojourn_.assign(n, std::vector<GammaSufficientStats>(d_));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : panel.subject(i)) {
      first_[i][t.state(0)] += 1.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) trans_[i][t.state(k - 1) * d_ + t.state(k)] += 1.0;
        if (!(t.absorbed() && k + 1 == t.size())) sojourn_[i][t.state(k)].add(t.sojourn(k), 1.0);
      }
    }
  }
}

// ---------------------------------------------------------------------------

PosteriorMatrix posteriors_from_logliks(const Matrix& ll, std::span<const double> weights,
                                        double z_round) {
  const std::size_t n = ll.rows();
  const std::size_t g_count = ll.cols();
  Matrix z(n, g_count);
  std::vector<double> terms(g_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < g_count; ++g) terms[g] = std::log(weights[g]) + ll(i, g);
    const double lse = log_sum_exp(terms);
    if (lse == kNegInf) throw AllComponentsImpossible(i);
    for (std::size_t g = 0; g < g_count; ++g) {
      double v = std::exp(terms[g] - lse);
      if (z_round > 0.0) v = std::round(v / z_round) * z_round;
      z(i, g) = v;
    }
    const double s = sorted_sum(z.row(i));
    for (double& v : z.row(i)) v = std::min(1.0, v / s);
  }
  return PosteriorMatrix(std::move(z));
}

PosteriorMatrix e_step(const Panel& panel, const MixtureModel& model, double z_round) {
  return posteriors_from_logliks(subject_logliks(panel, model), model.weights(), z_round);
}

std::vector<double> m_step_weights(const PosteriorMatrix& z) {
  std::vector<double> pi(z.component_count(), 0.0);
  for (std::size_t g = 0; g < pi.size(); ++g) {
    for (std::size_t i = 0; i < z.subject_count(); ++i) pi[g] += z(i, g);
    pi[g] /= static_cast<double>(z.subject_count());
  }
  return pi;
}

std::vector<ChainEstimate> m_step_alpha_trans(const PanelSummary& s, const PosteriorMatrix& z,
                                              std::vector<std::string>* warnings) {
  if (z.subject_count() != s.subject_count())
    throw InvariantError("m_step_alpha_trans: posterior rows differ from subject count");
  const std::size_t d = s.state_count();
  const auto absorbing = s.space().absorbing();
  std::vector<ChainEstimate> out;
  for (std::size_t g = 0; g < z.component_count(); ++g) {
    ChainEstimate est{std::vector<double>(d, 0.0), Matrix(d, d)};
    for (std::size_t i = 0; i < s.subject_count(); ++i) {
      const double w = z(i, g);
      if (w == 0.0) continue;
      for (StateIndex j = 0; j < d; ++j) est.alpha[j] += w * s.first_count(i, j);
      for (StateIndex h = 0; h < d; ++h)
        for (StateIndex j = 0; j < d; ++j) est.trans(h, j) += w * s.transition_count(i, h, j);
    }
    normalize(est.alpha);
    for (StateIndex h = 0; h < d; ++h) {
      if (absorbing && *absorbing == h) continue;
      auto row = est.trans.row(h);
      double total = 0.0;
      for (double v : row) total += v;
      if (total > 0.0) continue;
      for (StateIndex j = 0; j < d; ++j) row[j] = j == h ? 0.0 : 1.0 / static_cast<double>(d - 1);
      add_warning(warnings, "component " + std::to_string(g) + ": no transitions out of state '" +
                                s.space().label(h) + "', row set to uniform");
    }
    normalize_rows(est.trans, absorbing);
    out.push_back(std::move(est));
  }
  return out;
}

std::vector<ChainEstimate> m_step_alpha_trans(const Panel& panel, const PosteriorMatrix& z,
                                              std::vector<std::string>* warnings) {
  return m_step_alpha_trans(PanelSummary(panel), z, warnings);
}

std::vector<std::vector<GammaParams>> m_step_sojourn(const PanelSummary& s, const PosteriorMatrix& z,
                                                     double penalty_c, const EmConfig& cfg,
                                                     std::vector<std::string>* warnings,
                                                     const MixtureModel* previous) {
  if (z.subject_count() != s.subject_count())
    throw InvariantError("m_step_sojourn: posterior rows differ from subject count");
  const std::size_t d = s.state_count();
  const auto& space = s.space();
  std::vector<std::vector<GammaParams>> out;

  // Whole-panel unweighted statistics: last resort when a component holds
  // too few observations even after pooling its states.
  GammaSufficientStats panel_pool;
  for (std::size_t i = 0; i < s.subject_count(); ++i)
    for (StateIndex l = 0; l < d; ++l) panel_pool.merge(s.sojourn_stats(i, l));

  for (std::size_t g = 0; g < z.component_count(); ++g) {
    std::vector<GammaSufficientStats> per_state(d);
    for (std::size_t i = 0; i < s.subject_count(); ++i) {
      const double w = z(i, g);
      if (w == 0.0) continue;
      for (StateIndex l = 0; l < d; ++l) {
        const auto& st = s.sojourn_stats(i, l);
        if (st.positive_count == 0) continue;
        per_state[l].weight += w * st.weight;
        per_state[l].sum_x += w * st.sum_x;
        per_state[l].sum_logx += w * st.sum_logx;
        per_state[l].positive_count += st.positive_count;
      }
    }
    GammaSufficientStats pooled;
    for (StateIndex l = 0; l < d; ++l) pooled.merge(per_state[l]);

    std::optional<GammaParams> pooled_fit;
    const auto fallback = [&]() -> GammaParams {
      if (!pooled_fit) {
        if (pooled.positive_count > cfg.min_obs_mass) {
          pooled_fit = fit_gamma_pmle(pooled, penalty_c);
        } else {
          add_warning(warnings, "component " + std::to_string(g) +
                                    ": too few sojourns, using whole-panel gamma fit");
          pooled_fit = fit_gamma_pmle(panel_pool, penalty_c);
        }
      }
      return *pooled_fit;
    };

    std::vector<GammaParams> params;
    params.reserve(d);
    for (StateIndex l = 0; l < d; ++l) {
      if (space.is_absorbing(l)) {
        params.emplace_back(1.0, 1.0);
        continue;
      }
      try {
        if (per_state[l].positive_count > cfg.min_obs_mass) {
          params.push_back(fit_gamma_pmle(per_state[l], penalty_c));
        } else {
          add_warning(warnings, "component " + std::to_string(g) + ", state '" + space.label(l) +
                                    "': too few sojourns, using the component-wide gamma fit");
          GammaParams pick = fallback();
          if (previous && cfg.monotone_fallback) {
            const GammaParams& old = previous->component(g).sojourn(l);
            if (gamma_weighted_objective(per_state[l], old, penalty_c) >
                gamma_weighted_objective(per_state[l], pick, penalty_c))
              pick = old;
          }
          params.push_back(pick);
        }
      } catch (const NonConvergence& e) {
        throw NonConvergence(std::string(e.what()) + " (component " + std::to_string(g) +
                             ", state '" + space.label(l) + "')");
      }
    }
    out.push_back(std::move(params));
  }
  return out;
}

std::vector<std::vector<GammaParams>> m_step_sojourn(const Panel& panel, const PosteriorMatrix& z,
                                                     const EmConfig& cfg,
                                                     std::vector<std::string>* warnings) {
  const double c = cfg.penalized ? penalty_normalizer(panel) : 0.0;
  return m_step_sojourn(PanelSummary(panel), z, c, cfg, warnings);
}

// ---------------------------------------------------------------------------

double em_objective(const Panel& panel, const MixtureModel& model, const EmConfig& cfg) {
  return cfg.penalized ? penalized_objective(panel, model) : mixture_loglik(panel, model);
}

FitReport fit(const Panel& panel, std::size_t components, const MixtureModel& init,
              const EmConfig& cfg) {
  cfg.validate();
  if (init.component_count() != components)
    throw InvariantError("fit: initial model has " + std::to_string(init.component_count()) +
                         " components, expected " + std::to_string(components));
  if (!(init.space() == panel.space())) throw InvariantError("fit: model and panel state spaces differ");

  const PanelSummary summary(panel);
  const double c = cfg.penalized ? penalty_normalizer(panel) : 0.0;
  const auto objective = [&](const MixtureModel& m, const Matrix& ll) {
    const double base = mixture_loglik(ll, m.weights());
    return cfg.penalized ? base + shape_penalty(m, c) : base;
  };

  MixtureModel model = init;
  Matrix ll = subject_logliks(panel, model);
  std::vector<double> trace{objective(model, ll)};
  std::vector<std::string> warnings;
  std::vector<std::size_t> light_streak(components, 0);
  bool converged = false;
  std::size_t iterations = 0;

  for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
    const PosteriorMatrix z = posteriors_from_logliks(ll, model.weights(), cfg.z_round);
    const std::vector<double> weights = m_step_weights(z);
    for (std::size_t g = 0; g < components; ++g) {
      const double mass = weights[g] * static_cast<double>(panel.subject_count());
      light_streak[g] = mass < 1.0 ? light_streak[g] + 1 : 0;
      if (mass == 0.0 || light_streak[g] >= 3) {
        auto partial = std::make_shared<FitReport>(
            FitReport{model, z, trace, iterations, false, warnings});
        throw EmptyComponent(g, std::move(partial));
      }
    }
    const auto chains = m_step_alpha_trans(summary, z, &warnings);
    const auto sojourns = m_step_sojourn(summary, z, c, cfg, &warnings, &model);
    std::vector<ComponentParams> comps;
    comps.reserve(components);
    for (std::size_t g = 0; g < components; ++g)
      comps.emplace_back(panel.space(), chains[g].alpha, chains[g].trans, sojourns[g]);
    model = MixtureModel(panel.space(), weights, std::move(comps));
    ll = subject_logliks(panel, model);

    const double prev = trace.back();
    const double cur = objective(model, ll);
    trace.push_back(cur);
    iterations = iter;
    if (std::abs(cur - prev) / (std::abs(cur) + 1.0) < cfg.rel_tol) {
      converged = true;
      break;
    }
  }

  PosteriorMatrix z = posteriors_from_logliks(ll, model.weights(), cfg.z_round);
  return FitReport{std::move(model), std::move(z), std::move(trace), iterations, converged,
                   std::move(warnings)};
}

std::vector<std::size_t> map_cluster(const PosteriorMatrix& z) {
  std::vector<std::size_t> labels(z.subject_count(), 0);
  for (std::size_t i = 0; i < z.subject_count(); ++i) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < z.component_count(); ++g)
      if (z(i, g) > z(i, best)) best = g;
    labels[i] = best;
  }
  return labels;
}

}  // namespace smcmix
