#pragma once

// Domain types shared by every module: state spaces, trajectories, panels and
// the parameters of a finite mixture of Markov renewal processes.
//
// All types are immutable once constructed. Constructors validate every
// structural invariant and throw InvariantError on violation.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smcmix/error.hpp"

namespace smcmix {

using StateIndex = std::size_t;

/// Absolute tolerance on probability vectors and stochastic rows.
inline constexpr double kProbabilityTolerance = 1e-12;
/// Absolute tolerance on posterior rows.
inline constexpr double kPosteriorTolerance = 1e-10;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Ordered set of attribute labels with an optional terminal state.
class StateSpace {
 public:
  StateSpace(std::vector<std::string> labels,
             std::optional<StateIndex> absorbing = std::nullopt);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(StateIndex i) const { return labels_.at(i); }
  std::optional<StateIndex> index_of(const std::string& label) const;

  std::optional<StateIndex> absorbing() const noexcept { return absorbing_; }
  bool is_absorbing(StateIndex i) const noexcept { return absorbing_ && *absorbing_ == i; }
  /// Number of states that carry a sojourn distribution.
  std::size_t sojourn_state_count() const noexcept { return size() - (absorbing_ ? 1 : 0); }

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<std::string> labels_;
  std::optional<StateIndex> absorbing_;
};

/// One tasting sequence: visited states and the sojourn spent in each.
///
/// A trajectory may end in the absorbing state; that final entry carries no
/// sojourn and its duration is ignored (stored as given, must be >= 0).
class Trajectory {
 public:
  Trajectory(std::vector<StateIndex> states, std::vector<double> sojourns,
             const StateSpace& space);

  std::span<const StateIndex> states() const noexcept { return states_; }
  std::span<const double> sojourns() const noexcept { return sojourns_; }
  StateIndex state(std::size_t k) const { return states_[k]; }
  double sojourn(std::size_t k) const { return sojourns_[k]; }

  /// Number of visited states N(T), absorbing state included.
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t transitions() const noexcept { return states_.size() - 1; }
  bool absorbed() const noexcept { return absorbed_; }
  /// Number of entries that carry a sojourn likelihood factor.
  std::size_t sojourn_count() const noexcept { return size() - (absorbed_ ? 1 : 0); }

  bool operator==(const Trajectory&) const = default;

 private:
  std::vector<StateIndex> states_;
  std::vector<double> sojourns_;
  bool absorbed_ = false;
};

/// n subjects, each observed over the same number B of replications.
class Panel {
 public:
  Panel(StateSpace space, std::vector<std::vector<Trajectory>> subjects);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t subject_count() const noexcept { return subjects_.size(); }
  std::size_t replications() const noexcept { return subjects_.front().size(); }
  const std::vector<Trajectory>& subject(std::size_t i) const { return subjects_.at(i); }
  const std::vector<std::vector<Trajectory>>& subjects() const noexcept { return subjects_; }

  /// Sum of N(T) over every trajectory of the panel.
  std::size_t total_visits() const noexcept { return total_visits_; }
  std::size_t total_transitions() const noexcept;

  /// Panel restricted to the given subjects, in the given order.
  Panel subset(std::span<const std::size_t> subjects) const;

  bool operator==(const Panel&) const = default;

 private:
  StateSpace space_;
  std::vector<std::vector<Trajectory>> subjects_;
  std::size_t total_visits_ = 0;
};

/// Gamma law with shape a and rate lambda.
class GammaParams {
 public:
  GammaParams(double shape, double rate);

  double shape() const noexcept { return shape_; }
  double rate() const noexcept { return rate_; }
  double mean() const noexcept { return shape_ / rate_; }
  double variance() const noexcept { return shape_ / (rate_ * rate_); }

  bool operator==(const GammaParams&) const = default;

 private:
  double shape_;
  double rate_;
};

/// Parameters of one Markov renewal process with state-dependent gamma
/// sojourns (no anticipation of the next state).
///
/// The sojourn entry of the absorbing state, if any, is a placeholder and is
/// never evaluated.
class ComponentParams {
 public:
  ComponentParams(const StateSpace& space, std::vector<double> alpha, Matrix trans,
                  std::vector<GammaParams> sojourn);

  std::size_t state_count() const noexcept { return alpha_.size(); }
  std::optional<StateIndex> absorbing() const noexcept { return absorbing_; }
  bool is_absorbing(StateIndex i) const noexcept { return absorbing_ && *absorbing_ == i; }

  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const Matrix& trans() const noexcept { return trans_; }
  const std::vector<GammaParams>& sojourn() const noexcept { return sojourn_; }
  const GammaParams& sojourn(StateIndex i) const { return sojourn_.at(i); }

  bool operator==(const ComponentParams&) const = default;

 private:
  std::vector<double> alpha_;
  Matrix trans_;
  std::vector<GammaParams> sojourn_;
  std::optional<StateIndex> absorbing_;
};

/// Finite mixture of ComponentParams over a shared state space.
class MixtureModel {
 public:
  MixtureModel(StateSpace space, std::vector<double> weights,
               std::vector<ComponentParams> components);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t component_count() const noexcept { return components_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t g) const { return weights_.at(g); }
  const std::vector<ComponentParams>& components() const noexcept { return components_; }
  const ComponentParams& component(std::size_t g) const { return components_.at(g); }

  /// Model whose component g is this model's component order[g].
  MixtureModel permuted(std::span<const std::size_t> order) const;

  bool operator==(const MixtureModel&) const = default;

 private:
  StateSpace space_;
  std::vector<double> weights_;
  std::vector<ComponentParams> components_;
};

/// Responsibilities: row i is the posterior law of subject i's component.
class PosteriorMatrix {
 public:
  explicit PosteriorMatrix(Matrix z);

  std::size_t subject_count() const noexcept { return z_.rows(); }
  std::size_t component_count() const noexcept { return z_.cols(); }
  double operator()(std::size_t i, std::size_t g) const { return z_(i, g); }
  std::span<const double> row(std::size_t i) const { return z_.row(i); }
  const Matrix& matrix() const noexcept { return z_; }

 private:
  Matrix z_;
};

// ---------------------------------------------------------------------------
// Identifiability checks

struct HypothesisViolation {
  enum class Kind {
    kInitialNotPositive,     // alpha^g_l <= eps
    kTransitionNotPositive,  // P^g_lj <= eps, j != l
    kIdenticalSojourns,      // components g and other share all sojourn laws
  };
  Kind kind;
  std::size_t component;
  StateIndex state = 0;
  StateIndex target = 0;
  std::size_t other_component = 0;

  std::string describe() const;
};

/// Lists every violation of the positivity hypothesis on initial and
/// transition probabilities (non-absorbing states) and of the pairwise
/// distinctness hypothesis on sojourn parameters, at tolerance strict_eps.
std::vector<HypothesisViolation> validate_h1_h2(const MixtureModel& model, double strict_eps);

// ---------------------------------------------------------------------------
// Pooling

struct WeightedGamma {
  double weight;
  GammaParams law;
};

/// The single Markov renewal process equivalent to a mixture: averaged
/// initial law and transitions, and per-state finite gamma mixtures.
struct PooledProcess {
  std::vector<double> alpha;
  Matrix trans;
  std::vector<std::vector<WeightedGamma>> sojourn;
};

PooledProcess pool_mixture(const MixtureModel& model);

// ---------------------------------------------------------------------------
// Helpers

/// Divides by the sum; throws InvariantError when the sum is not positive.
void normalize(std::span<double> values);

/// Normalizes every row that has positive mass; rows of absorbing states are
/// left all-zero.
void normalize_rows(Matrix& m, std::optional<StateIndex> absorbing);

}  // namespace smcmix
