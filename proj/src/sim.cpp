#include "smcmix/sim.hpp"

#include <cmath>
#include <numeric>

#include "smcmix/metrics.hpp"
#include "smcmix/parallel.hpp"

namespace smcmix {

void Scenario::validate() const {
  if (subjects < 1) throw InvariantError("Scenario: at least one subject");
  if (replications < 1) throw InvariantError("Scenario: at least one replication");
  if (stop.transitions < 1) throw InvariantError("Scenario: stop rule needs >= 1 transition");
  if (stop.kind == StopRule::Kind::kAbsorbing && !model.space().absorbing())
    throw InvariantError("Scenario: absorbing stop rule without an absorbing state");
}

Trajectory simulate_trajectory(const ComponentParams& comp, const StateSpace& space,
                               const StopRule& stop, Rng& rng) {
  std::vector<StateIndex> states;
  std::vector<double> sojourns;
  StateIndex cur = rng.categorical(comp.alpha());
  for (;;) {
    states.push_back(cur);
    if (space.is_absorbing(cur)) {
      sojourns.push_back(0.0);
      break;
    }
    const auto& law = comp.sojourn(cur);
    sojourns.push_back(rng.gamma(law.shape(), law.rate()));
    if (states.size() > stop.transitions) break;
    cur = rng.categorical(comp.trans().row(cur));
  }
  return Trajectory(std::move(states), std::move(sojourns), space);
}

SimulatedPanel simulate_panel(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const auto& model = scenario.model;
  std::vector<std::size_t> labels(scenario.subjects);
  std::vector<std::vector<Trajectory>> subjects;
  subjects.reserve(scenario.subjects);
  for (std::size_t i = 0; i < scenario.subjects; ++i) {
    labels[i] = model.component_count() == 1 ? 0 : rng.categorical(model.weights());
    std::vector<Trajectory> reps;
    for (std::size_t b = 0; b < scenario.replications; ++b)
      reps.push_back(simulate_trajectory(model.component(labels[i]), model.space(), scenario.stop, rng));
    subjects.push_back(std::move(reps));
  }
  return {Panel(model.space(), std::move(subjects)), std::move(labels)};
}

// ---------------------------------------------------------------------------

MetricSummary summarize(std::string name, std::vector<double> values) {
  MetricSummary m{std::move(name), 0.0, 0.0, std::move(values)};
  const std::size_t n = m.values.size();
  if (n == 0) return m;
  m.mean = std::accumulate(m.values.begin(), m.values.end(), 0.0) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : m.values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return m;
}

const MetricSummary* BenchmarkTable::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return &m;
  return nullptr;
}

ReplicateResult run_replicate(const Scenario& scenario, const BenchmarkOptions& options,
                              std::size_t index) {
  ReplicateResult r;
  r.index = index;
  Rng rng = Rng::stream(scenario.seed, index);
  const SimulatedPanel sim = simulate_panel(scenario, rng);
  const std::uint64_t fit_seed = rng();
  const auto& truth = scenario.model;
  const std::size_t g_true = truth.component_count();
  const std::size_t g_fit = options.components.value_or(g_true);

  try {
    EmConfig em = options.em;
    em.seed = fit_seed;
    const Initialization init = initialize(sim.panel, g_fit, fit_seed, options.init);
    const FitReport report = fit(sim.panel, g_fit, init.model, em);
    const auto labels = map_cluster(report.posteriors);
    r.metrics["class_rate"] = classification_rate(sim.labels, labels);
    r.metrics["class_rate_kmeans"] = classification_rate(sim.labels, init.labels);
    r.metrics["iterations"] = static_cast<double>(report.iterations);
    r.metrics["converged"] = report.converged ? 1.0 : 0.0;
    if (g_fit == g_true) {
      const auto perm = align_components(truth, report.model);
      for (std::size_t g = 0; g < g_true; ++g) {
        const auto& t = truth.component(g);
        const auto& e = report.model.component(perm[g]);
        const std::string suffix = "_" + std::to_string(g + 1);
        r.metrics["err_alpha" + suffix] = err_vector(t.alpha(), e.alpha());
        r.metrics["err_P" + suffix] = err_matrix(t.trans(), e.trans());
        r.metrics["pi" + suffix] = report.model.weight(perm[g]);
      }
      r.metrics["err_a"] = err_gamma(truth, report.model, GammaParameter::kShape, perm);
      r.metrics["err_lambda"] = err_gamma(truth, report.model, GammaParameter::kRate, perm);
    }
    if (!options.select_range.empty()) {
      SelectionOptions sel{em, options.init, options.sample_size};
      const SelectionResult s = select_g(sim.panel, options.select_range, sel);
      if (s.best_bic) r.selected["BIC"] = *s.best_bic;
      if (s.best_aic) r.selected["AIC"] = *s.best_aic;
      if (s.best_aicc) r.selected["AICc"] = *s.best_aicc;
    }
  } catch (const NumericalError& e) {
    r.failed = true;
    r.error = std::string(e.kind()) + ": " + e.what();
  }
  return r;
}

BenchmarkTable run_benchmark(const Scenario& scenario, const BenchmarkOptions& options) {
  scenario.validate();
  BenchmarkTable table;
  table.replicates = scenario.replicates;
  table.runs.resize(scenario.replicates);
  parallel_for(scenario.replicates,
               [&](std::size_t k) { table.runs[k] = run_replicate(scenario, options, k); });

  std::map<std::string, std::vector<double>> columns;
  std::vector<std::string> order;
  for (const auto& run : table.runs) {
    if (run.failed) {
      ++table.failures;
      continue;
    }
    for (const auto& [name, value] : run.metrics) {
      if (!columns.count(name)) order.push_back(name);
      columns[name].push_back(value);
    }
    for (const auto& [crit, g] : run.selected) ++table.selection[crit][g];
  }
  for (const auto& name : order) table.metrics.push_back(summarize(name, columns[name]));
  return table;
}

}  // namespace smcmix
