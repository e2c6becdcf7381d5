#pragma once

// Free-parameter counts, information criteria, and selection of the number
// of mixture components. Lower criterion values are better.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smcmix/core.hpp"
#include "smcmix/em.hpp"
#include "smcmix/init.hpp"

namespace smcmix {

/// Free parameters of G components over D states with d-parameter sojourn
/// laws: G-1 weights, per component D-1 initial, D(D-2) transition and Dd
/// sojourn parameters. With an absorbing state (never initial, no sojourn):
/// G-1 + G(D-2 + (D-1)(D-2) + (D-1)d).
std::size_t param_count(std::size_t components, std::size_t states, std::size_t sojourn_params,
                        bool has_absorbing);

double bic(double loglik, std::size_t q, double sample_size);
double aic(double loglik, std::size_t q);
/// Throws DomainError when sample_size <= q + 1.
double aicc(double loglik, std::size_t q, double sample_size);

/// Which count enters the BIC/AICc sample-size term.
enum class SampleSize {
  kTrajectories,  // n B
  kSubjects,      // n
  kTransitions,   // total observed transitions
};

double sample_size(const Panel& panel, SampleSize kind);

struct SelectionOptions {
  EmConfig em;
  InitOptions init;
  SampleSize sample_size = SampleSize::kTrajectories;
};

struct CandidateFit {
  std::size_t components = 0;
  /// Absent when EM failed for this G (see error).
  std::optional<FitReport> report;
  std::string error;
  /// Unpenalized mixture log-likelihood at the (penalized) EM optimum.
  double loglik = 0.0;
  std::size_t q = 0;
  double bic = 0.0;
  double aic = 0.0;
  /// Absent when the sample is too small for AICc.
  std::optional<double> aicc;
  /// k-means labels of the starting point.
  std::vector<std::size_t> init_labels;
};

struct SelectionResult {
  std::vector<CandidateFit> candidates;
  std::optional<std::size_t> best_bic;
  std::optional<std::size_t> best_aic;
  std::optional<std::size_t> best_aicc;

  const CandidateFit* candidate(std::size_t components) const;
};

/// Fits every G in g_values from initial_model and scores it. Ties go to the
/// smaller G. Candidates whose fit throws a NumericalError are kept with
/// their error and excluded from the choice.
SelectionResult select_g(const Panel& panel, std::span<const std::size_t> g_values,
                         const SelectionOptions& options);

}  // namespace smcmix
