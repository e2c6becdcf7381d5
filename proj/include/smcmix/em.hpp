#pragma once

// Penalized EM for finite mixtures of Markov renewal processes with gamma
// sojourn times, and MAP clustering of the fitted posteriors.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smcmix/core.hpp"
#include "smcmix/sojourn.hpp"

namespace smcmix {

struct EmConfig {
  std::size_t max_iter = 100;
  double rel_tol = 1e-8;
  /// Responsibilities are rounded to multiples of this quantum (0 disables).
  double z_round = 1e-4;
  /// A per-state gamma fit needs strictly more positive-weight observations
  /// than this; otherwise the component-wide pooled fit is used.
  std::size_t min_obs_mass = 7;
  /// When a state falls back to the pooled fit, keep its previous
  /// parameters instead if they score higher on that state's weighted
  /// sojourns. This keeps the objective non-decreasing.
  bool monotone_fallback = true;
  bool penalized = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitReport {
  MixtureModel model;
  PosteriorMatrix posteriors;
  /// Objective of the starting model followed by one entry per iteration.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// A component lost (almost) all of its mass; carries the report up to the
/// last completed iteration.
class EmptyComponent : public NumericalError {
 public:
  EmptyComponent(std::size_t component, std::shared_ptr<const FitReport> partial);
  const char* kind() const noexcept override { return "EmptyComponent"; }
  std::size_t component() const noexcept { return component_; }
  const FitReport* partial() const noexcept { return partial_.get(); }

 private:
  std::size_t component_;
  std::shared_ptr<const FitReport> partial_;
};

/// Per-subject count statistics, computed once per panel: first-state and
/// transition counts summed over replications, and per-state sojourn
/// sufficient statistics.
class PanelSummary {
 public:
  explicit PanelSummary(const Panel& panel);

  std::size_t subject_count() const noexcept { return first_.size(); }
  std::size_t state_count() const noexcept { return d_; }
  std::size_t replications() const noexcept { return replications_; }
  const StateSpace& space() const noexcept { return space_; }

  double first_count(std::size_t i, StateIndex j) const { return first_[i][j]; }
  double transition_count(std::size_t i, StateIndex h, StateIndex j) const {
    return trans_[i][h * d_ + j];
  }
  const GammaSufficientStats& sojourn_stats(std::size_t i, StateIndex l) const {
    return sojourn_[i][l];
  }

 private:
  StateSpace space_;
  std::size_t d_;
  std::size_t replications_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> trans_;
  std::vector<std::vector<GammaSufficientStats>> sojourn_;
};

/// Rounds each entry to a multiple of z_round, then renormalizes the row.
PosteriorMatrix posteriors_from_logliks(const Matrix& subject_ll, std::span<const double> weights,
                                        double z_round);
PosteriorMatrix e_step(const Panel& panel, const MixtureModel& model, double z_round);

std::vector<double> m_step_weights(const PosteriorMatrix& z);

struct ChainEstimate {
  std::vector<double> alpha;
  Matrix trans;
};

std::vector<ChainEstimate> m_step_alpha_trans(const PanelSummary& summary, const PosteriorMatrix& z,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<ChainEstimate> m_step_alpha_trans(const Panel& panel, const PosteriorMatrix& z,
                                              std::vector<std::string>* warnings = nullptr);

/// Per-component, per-state gamma fits; entry [g][l] (placeholder for the
/// absorbing state). penalty_c multiplies the shape penalty. previous, when
/// given and cfg.monotone_fallback is set, supplies the parameters a
/// fallback state may keep.
std::vector<std::vector<GammaParams>> m_step_sojourn(const PanelSummary& summary,
                                                     const PosteriorMatrix& z, double penalty_c,
                                                     const EmConfig& cfg,
                                                     std::vector<std::string>* warnings = nullptr,
                                                     const MixtureModel* previous = nullptr);
/// Uses penalty 1/sqrt(total visits) when cfg.penalized, else 0.
std::vector<std::vector<GammaParams>> m_step_sojourn(const Panel& panel, const PosteriorMatrix& z,
                                                     const EmConfig& cfg,
                                                     std::vector<std::string>* warnings = nullptr);

/// Runs EM from init until the relative objective change drops below
/// cfg.rel_tol or cfg.max_iter iterations. components must equal
/// init.component_count().
FitReport fit(const Panel& panel, std::size_t components, const MixtureModel& init,
              const EmConfig& cfg);

/// argmax per row, ties to the lowest index.
std::vector<std::size_t> map_cluster(const PosteriorMatrix& z);

/// penalized_objective or mixture_loglik, as selected by cfg.penalized.
double em_objective(const Panel& panel, const MixtureModel& model, const EmConfig& cfg);

}  // namespace smcmix
