#pragma once

// Log-likelihoods of trajectories, subjects and panels. Structural zeros in
// initial or transition probabilities yield -inf, never an error.

#include <span>
#include <vector>

#include "smcmix/core.hpp"

namespace smcmix {

/// Precomputed logarithms of one component, for repeated evaluation.
class ComponentEvaluator {
 public:
  explicit ComponentEvaluator(const ComponentParams& comp);

  double trajectory(const Trajectory& traj) const;
  double subject(std::span<const Trajectory> trajs) const;

 private:
  std::size_t d_;
  std::vector<double> log_alpha_;
  std::vector<double> log_trans_;
  std::vector<double> shape_;
  std::vector<double> rate_;
  std::vector<double> norm_;  // a ln(lambda) - ln Gamma(a)
};

double component_loglik(const Trajectory& traj, const ComponentParams& comp);
double subject_loglik(std::span<const Trajectory> trajs, const ComponentParams& comp);

/// n x G matrix of subject log-likelihoods under each component.
Matrix subject_logliks(const Panel& panel, const MixtureModel& model);

/// sum_i ln sum_g pi_g exp(l_ig) for a precomputed subject log-likelihood matrix.
double mixture_loglik(const Matrix& subject_ll, std::span<const double> weights);
double mixture_loglik(const Panel& panel, const MixtureModel& model);

/// 1 / sqrt(total visited states of the panel).
double penalty_normalizer(const Panel& panel);
/// -c * sum over components and non-absorbing states of (a + ln a).
double shape_penalty(const MixtureModel& model, double normalizer);

double penalized_objective(const Panel& panel, const MixtureModel& model);

}  // namespace smcmix
