#include "smcmix/core.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace smcmix {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_probability_vector(std::span<const double> p, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!finite_nonneg(v)) throw InvariantError(std::string(what) + ": negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": entries sum to " << s;
    throw InvariantError(os.str());
  }
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw InvariantError("Matrix: ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

// ---------------------------------------------------------------------------

StateSpace::StateSpace(std::vector<std::string> labels, std::optional<StateIndex> absorbing)
    : labels_(std::move(labels)), absorbing_(absorbing) {
  if (labels_.size() < 2) throw InvariantError("StateSpace: at least two states are required");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw InvariantError("StateSpace: duplicate labels");
  if (absorbing_ && *absorbing_ >= labels_.size())
    throw InvariantError("StateSpace: absorbing index out of range");
  if (absorbing_ && labels_.size() < 3)
    throw InvariantError("StateSpace: an absorbing state needs two transient states");
}

std::optional<StateIndex> StateSpace::index_of(const std::string& label) const {
  for (StateIndex i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::vector<StateIndex> states, std::vector<double> sojourns,
                       const StateSpace& space)
    : states_(std::move(states)), sojourns_(std::move(sojourns)) {
  if (states_.size() != sojourns_.size())
    throw InvariantError("Trajectory: states and sojourns differ in length");
  if (states_.size() < 2) throw InvariantError("Trajectory: at least two visited states are required");
  for (std::size_t k = 0; k < states_.size(); ++k) {
    if (states_[k] >= space.size()) throw InvariantError("Trajectory: state index out of range");
    if (k + 1 < states_.size() && states_[k] == states_[k + 1])
      throw InvariantError("Trajectory: self-transition at position " + std::to_string(k));
    const bool last = k + 1 == states_.size();
    if (space.is_absorbing(states_[k])) {
      if (!last) throw InvariantError("Trajectory: absorbing state before the end");
      if (!finite_nonneg(sojourns_[k]))
        throw InvariantError("Trajectory: invalid duration on absorbing entry");
      absorbed_ = true;
    } else if (!(std::isfinite(sojourns_[k]) && sojourns_[k] > 0.0)) {
      throw InvariantError("Trajectory: sojourns must be strictly positive");
    }
  }
}

// ---------------------------------------------------------------------------

Panel::Panel(StateSpace space, std::vector<std::vector<Trajectory>> subjects)
    : space_(std::move(space)), subjects_(std::move(subjects)) {
  if (subjects_.empty()) throw InvariantError("Panel: no subjects");
  const std::size_t b = subjects_.front().size();
  if (b == 0) throw InvariantError("Panel: subjects need at least one replication");
  for (const auto& s : subjects_) {
    if (s.size() != b) throw InvariantError("Panel: subjects have different replication counts");
    for (const auto& t : s) {
      for (StateIndex j : t.states())
        if (j >= space_.size()) throw InvariantError("Panel: state outside the state space");
      // Absorbed flags are computed against the trajectory's own space; the
      // panel's space must agree.
      for (std::size_t k = 0; k < t.size(); ++k)
        if (space_.is_absorbing(t.state(k)) != (t.absorbed() && k + 1 == t.size()))
          throw InvariantError("Panel: trajectory disagrees with the absorbing state");
      total_visits_ += t.size();
    }
  }
}

std::size_t Panel::total_transitions() const noexcept {
  std::size_t n = 0;
  for (const auto& s : subjects_)
    for (const auto& t : s) n += t.transitions();
  return n;
}

Panel Panel::subset(std::span<const std::size_t> subjects) const {
  std::vector<std::vector<Trajectory>> out;
  out.reserve(subjects.size());
  for (std::size_t i : subjects) out.push_back(subjects_.at(i));
  return Panel(space_, std::move(out));
}

// ---------------------------------------------------------------------------

GammaParams::GammaParams(double shape, double rate) : shape_(shape), rate_(rate) {
  if (!(std::isfinite(shape) && shape > 0.0)) throw InvariantError("GammaParams: shape must be > 0");
  if (!(std::isfinite(rate) && rate > 0.0)) throw InvariantError("GammaParams: rate must be > 0");
}

// ---------------------------------------------------------------------------

ComponentParams::ComponentParams(const StateSpace& space, std::vector<double> alpha, Matrix trans,
                                 std::vector<GammaParams> sojourn)
    : alpha_(std::move(alpha)),
      trans_(std::move(trans)),
      sojourn_(std::move(sojourn)),
      absorbing_(space.absorbing()) {
  const std::size_t d = space.size();
  if (alpha_.size() != d || trans_.rows() != d || trans_.cols() != d || sojourn_.size() != d)
    throw InvariantError("ComponentParams: dimension mismatch with the state space");
  check_probability_vector(alpha_, "ComponentParams alpha");
  if (absorbing_ && alpha_[*absorbing_] != 0.0)
    throw InvariantError("ComponentParams: the absorbing state cannot be initial");
  for (StateIndex h = 0; h < d; ++h) {
    if (trans_(h, h) != 0.0) throw InvariantError("ComponentParams: non-zero diagonal transition");
    if (is_absorbing(h)) {
      for (double v : trans_.row(h))
        if (v != 0.0) throw InvariantError("ComponentParams: absorbing row must be all zero");
      continue;
    }
    check_probability_vector(trans_.row(h), "ComponentParams transition row");
  }
}

// ---------------------------------------------------------------------------

MixtureModel::MixtureModel(StateSpace space, std::vector<double> weights,
                           std::vector<ComponentParams> components)
    : space_(std::move(space)), weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw InvariantError("MixtureModel: at least one component");
  if (weights_.size() != components_.size())
    throw InvariantError("MixtureModel: weights and components differ in length");
  check_probability_vector(weights_, "MixtureModel weights");
  for (double w : weights_)
    if (!(w > 0.0)) throw InvariantError("MixtureModel: weights must be strictly positive");
  for (const auto& c : components_)
    if (c.state_count() != space_.size() || c.absorbing() != space_.absorbing())
      throw InvariantError("MixtureModel: component does not match the state space");
}

MixtureModel MixtureModel::permuted(std::span<const std::size_t> order) const {
  if (order.size() != components_.size()) throw InvariantError("permuted: wrong permutation size");
  std::vector<double> w;
  std::vector<ComponentParams> c;
  for (std::size_t g : order) {
    w.push_back(weights_.at(g));
    c.push_back(components_.at(g));
  }
  return MixtureModel(space_, std::move(w), std::move(c));
}

// ---------------------------------------------------------------------------

PosteriorMatrix::PosteriorMatrix(Matrix z) : z_(std::move(z)) {
  if (z_.rows() == 0 || z_.cols() == 0) throw InvariantError("PosteriorMatrix: empty");
  for (std::size_t i = 0; i < z_.rows(); ++i) {
    double s = 0.0;
    for (double v : z_.row(i)) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("PosteriorMatrix: entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > kPosteriorTolerance)
      throw InvariantError("PosteriorMatrix: row " + std::to_string(i) + " does not sum to 1");
  }
}

// ---------------------------------------------------------------------------

std::string HypothesisViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kInitialNotPositive:
      os << "H1: alpha[" << state << "] of component " << component << " is not positive";
      break;
    case Kind::kTransitionNotPositive:
      os << "H1: P[" << state << "][" << target << "] of component " << component
         << " is not positive";
      break;
    case Kind::kIdenticalSojourns:
      os << "H2: components " << component << " and " << other_component
         << " have identical sojourn laws";
      break;
  }
  return os.str();
}

std::vector<HypothesisViolation> validate_h1_h2(const MixtureModel& model, double strict_eps) {
  using Kind = HypothesisViolation::Kind;
  std::vector<HypothesisViolation> out;
  const auto& space = model.space();
  const std::size_t d = space.size();
  for (std::size_t g = 0; g < model.component_count(); ++g) {
    const auto& c = model.component(g);
    for (StateIndex l = 0; l < d; ++l) {
      if (space.is_absorbing(l)) continue;
      if (c.alpha()[l] <= strict_eps) out.push_back({Kind::kInitialNotPositive, g, l});
      for (StateIndex j = 0; j < d; ++j) {
        if (j == l) continue;
        if (c.trans()(l, j) <= strict_eps) out.push_back({Kind::kTransitionNotPositive, g, l, j});
      }
    }
  }
  for (std::size_t g = 0; g < model.component_count(); ++g) {
    for (std::size_t h = g + 1; h < model.component_count(); ++h) {
      bool differ = false;
      for (StateIndex l = 0; l < d && !differ; ++l) {
        if (space.is_absorbing(l)) continue;
        const auto& a = model.component(g).sojourn(l);
        const auto& b = model.component(h).sojourn(l);
        differ = std::abs(a.shape() - b.shape()) > strict_eps ||
                 std::abs(a.rate() - b.rate()) > strict_eps;
      }
      if (!differ) out.push_back({Kind::kIdenticalSojourns, g, 0, 0, h});
    }
  }
  return out;
}

PooledProcess pool_mixture(const MixtureModel& model) {
  const std::size_t d = model.space().size();
  PooledProcess out{std::vector<double>(d, 0.0), Matrix(d, d), {}};
  out.sojourn.resize(d);
  for (std::size_t g = 0; g < model.component_count(); ++g) {
    const double w = model.weight(g);
    const auto& c = model.component(g);
    for (StateIndex l = 0; l < d; ++l) {
      out.alpha[l] += w * c.alpha()[l];
      for (StateIndex j = 0; j < d; ++j) out.trans(l, j) += w * c.trans()(l, j);
      if (!model.space().is_absorbing(l)) out.sojourn[l].push_back({w, c.sojourn(l)});
    }
  }
  return out;
}

void normalize(std::span<double> values) {
  const double s = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(s > 0.0) || !std::isfinite(s)) throw InvariantError("normalize: non-positive total mass");
  for (double& v : values) v /= s;
}

void normalize_rows(Matrix& m, std::optional<StateIndex> absorbing) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (absorbing && *absorbing == r) {
      for (double& v : m.row(r)) v = 0.0;
      continue;
    }
    auto row = m.row(r);
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    if (s > 0.0)
      for (double& v : row) v /= s;
  }
}

}  // namespace smcmix
