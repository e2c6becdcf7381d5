#include "smcmix/likelihood.hpp"

#include <cmath>

#include "smcmix/numeric.hpp"

namespace smcmix {

namespace {

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_dimensions(const StateSpace& space, const ComponentParams& comp) {
  if (space.size() != comp.state_count() || space.absorbing() != comp.absorbing())
    throw InvariantError("likelihood: model and panel state spaces differ");
}

}  // namespace

ComponentEvaluator::ComponentEvaluator(const ComponentParams& comp) : d_(comp.state_count()) {
  log_alpha_.resize(d_);
  log_trans_.resize(d_ * d_);
  shape_.resize(d_);
  rate_.resize(d_);
  norm_.resize(d_);
  for (StateIndex l = 0; l < d_; ++l) {
    log_alpha_[l] = safe_log(comp.alpha()[l]);
    for (StateIndex j = 0; j < d_; ++j) log_trans_[l * d_ + j] = safe_log(comp.trans()(l, j));
    const auto& g = comp.sojourn(l);
    shape_[l] = g.shape();
    rate_[l] = g.rate();
    norm_[l] = g.shape() * std::log(g.rate()) - std::lgamma(g.shape());
  }
}

double ComponentEvaluator::trajectory(const Trajectory& traj) const {
  const auto states = traj.states();
  for (StateIndex s : states)
    if (s >= d_) throw InvariantError("component_loglik: state outside the component");
  double ll = log_alpha_[states[0]];
  if (ll == kNegInf) return kNegInf;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k > 0) {
      const double lp = log_trans_[states[k - 1] * d_ + states[k]];
      if (lp == kNegInf) return kNegInf;
      ll += lp;
    }
    if (traj.absorbed() && k + 1 == states.size()) break;
    const StateIndex l = states[k];
    const double x = traj.sojourn(k);
    ll += (shape_[l] - 1.0) * std::log(x) + norm_[l] - rate_[l] * x;
  }
  return ll;
}

double ComponentEvaluator::subject(std::span<const Trajectory> trajs) const {
  double ll = 0.0;
  for (const auto& t : trajs) {
    const double v = trajectory(t);
    if (v == kNegInf) return kNegInf;
    ll += v;
  }
  return ll;
}

double component_loglik(const Trajectory& traj, const ComponentParams& comp) {
  return ComponentEvaluator(comp).trajectory(traj);
}

double subject_loglik(std::span<const Trajectory> trajs, const ComponentParams& comp) {
  return ComponentEvaluator(comp).subject(trajs);
}

Matrix subject_logliks(const Panel& panel, const MixtureModel& model) {
  const std::size_t g_count = model.component_count();
  Matrix out(panel.subject_count(), g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    check_dimensions(panel.space(), model.component(g));
    const ComponentEvaluator eval(model.component(g));
    for (std::size_t i = 0; i < panel.subject_count(); ++i) out(i, g) = eval.subject(panel.subject(i));
  }
  return out;
}

double mixture_loglik(const Matrix& ll, std::span<const double> weights) {
  if (ll.cols() != weights.size()) throw InvariantError("mixture_loglik: weight count mismatch");
  double total = 0.0;
  std::vector<double> terms(ll.cols());
  for (std::size_t i = 0; i < ll.rows(); ++i) {
    for (std::size_t g = 0; g < ll.cols(); ++g) terms[g] = std::log(weights[g]) + ll(i, g);
    total += log_sum_exp(terms);
  }
  return total;
}

double mixture_loglik(const Panel& panel, const MixtureModel& model) {
  return mixture_loglik(subject_logliks(panel, model), model.weights());
}

double penalty_normalizer(const Panel& panel) {
  return 1.0 / std::sqrt(static_cast<double>(panel.total_visits()));
}

double shape_penalty(const MixtureModel& model, double normalizer) {
  std::vector<double> per_component;
  for (const auto& c : model.components()) {
    double s = 0.0;
    for (StateIndex l = 0; l < c.state_count(); ++l) {
      if (c.is_absorbing(l)) continue;
      const double a = c.sojourn(l).shape();
      s += a + std::log(a);
    }
    per_component.push_back(s);
  }
  return -normalizer * sorted_sum(per_component);
}

double penalized_objective(const Panel& panel, const MixtureModel& model) {
  return mixture_loglik(panel, model) + shape_penalty(model, penalty_normalizer(panel));
}

}  // namespace smcmix
