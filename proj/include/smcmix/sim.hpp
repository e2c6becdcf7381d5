#pragma once

// Simulation of panels from mixture models, and the Monte-Carlo harness that
// scores EM recovery over many simulated datasets.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smcmix/core.hpp"
#include "smcmix/em.hpp"
#include "smcmix/init.hpp"
#include "smcmix/random.hpp"
#include "smcmix/selection.hpp"

namespace smcmix {

/// When a simulated trajectory ends.
struct StopRule {
  enum class Kind { kTransitions, kAbsorbing };
  Kind kind = Kind::kTransitions;
  /// Exact transition count for kTransitions (the trajectory then has
  /// transitions + 1 states, fewer if the absorbing state is reached first);
  /// safety cap for kAbsorbing.
  std::size_t transitions = 10;

  static StopRule fixed(std::size_t transitions) { return {Kind::kTransitions, transitions}; }
  static StopRule absorbing(std::size_t cap = 1000) { return {Kind::kAbsorbing, cap}; }
};

struct Scenario {
  MixtureModel model;
  std::size_t subjects = 200;
  std::size_t replications = 3;
  StopRule stop;
  std::uint64_t seed = 1;
  std::size_t replicates = 50;

  void validate() const;
};

Trajectory simulate_trajectory(const ComponentParams& comp, const StateSpace& space,
                               const StopRule& stop, Rng& rng);

struct SimulatedPanel {
  Panel panel;
  /// True component of each subject (0-based).
  std::vector<std::size_t> labels;
};

/// Each subject's component is drawn from the mixture weights and shared by
/// all of its replications.
SimulatedPanel simulate_panel(const Scenario& scenario, Rng& rng);

struct BenchmarkOptions {
  EmConfig em;
  InitOptions init;
  /// Components fitted for the recovery metrics; defaults to the true count.
  std::optional<std::size_t> components;
  /// When non-empty, also run select_g over these G values per replicate.
  std::vector<std::size_t> select_range;
  SampleSize sample_size = SampleSize::kTrajectories;
};

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  /// Sample standard deviation (0 for a single value).
  double sd = 0.0;
  std::vector<double> values;
};

struct ReplicateResult {
  std::size_t index = 0;
  bool failed = false;
  std::string error;
  std::map<std::string, double> metrics;
  /// criterion name -> chosen G
  std::map<std::string, std::size_t> selected;
};

struct BenchmarkTable {
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::vector<MetricSummary> metrics;
  /// criterion -> (G -> count)
  std::map<std::string, std::map<std::size_t, std::size_t>> selection;
  std::vector<ReplicateResult> runs;

  const MetricSummary* metric(const std::string& name) const;
};

/// Runs one replicate: simulate with stream `index` of the scenario seed,
/// initialize, fit, score, and optionally select G.
ReplicateResult run_replicate(const Scenario& scenario, const BenchmarkOptions& options,
                              std::size_t index);

BenchmarkTable run_benchmark(const Scenario& scenario, const BenchmarkOptions& options);

/// Mean and sample sd of a list of values.
MetricSummary summarize(std::string name, std::vector<double> values);

}  // namespace smcmix
