#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "smcmix/em.hpp"
#include "smcmix/init.hpp"
#include "smcmix/io.hpp"
#include "smcmix/likelihood.hpp"
#include "smcmix/selection.hpp"
#include "smcmix/sim.hpp"

namespace smcmix::cli {
namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

struct DataOptions {
  std::string path;
  std::string absorbing = "STOP";
  bool no_absorbing = false;

  void add(CLI::App* app) {
    app->add_option("--data", path, "Panel CSV (subject,replication,attribute,onset[,end])")
        ->required();
    app->add_option("--absorbing", absorbing, "Label of the absorbing state, if present");
    app->add_flag("--no-absorbing", no_absorbing, "Treat every label as transient");
  }

  PanelData load(std::vector<std::string> labels = {}) const {
    PanelReadOptions o;
    o.labels = std::move(labels);
    if (no_absorbing)
      o.absorbing_label.reset();
    else
      o.absorbing_label = absorbing;
    return read_panel(path, o);
  }
};

struct EmOptions {
  bool penalized = true;
  std::size_t max_iter = EmConfig{}.max_iter;
  double rel_tol = EmConfig{}.rel_tol;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_flag("--penalized,!--no-penalized", penalized,
                  "Penalize gamma shapes (default on)");
    app->add_option("--max-iter", max_iter, "EM iteration cap");
    app->add_option("--tol", rel_tol, "Relative objective tolerance");
    app->add_option("--seed", seed, "Seed for k-means initialization");
  }

  EmConfig config() const {
    EmConfig c;
    c.penalized = penalized;
    c.max_iter = max_iter;
    c.rel_tol = rel_tol;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void report_ingest(const IngestReport& r, std::ostream& err) {
  for (const auto& w : r.warnings)
    err << nlohmann::json{{"warning", w}}.dump() << '\n';
  if (r.merge_count > 0)
    err << nlohmann::json{{"warning", "merged repeated attributes"}, {"count", r.merge_count}}.dump()
        << '\n';
}

std::vector<std::size_t> cluster_sizes(std::span<const std::size_t> labels, std::size_t g) {
  std::vector<std::size_t> sizes(g, 0);
  for (std::size_t l : labels) ++sizes[l];
  return sizes;
}

SampleSize parse_sample_size(const std::string& s) {
  if (s == "trajectories") return SampleSize::kTrajectories;
  if (s == "subjects") return SampleSize::kSubjects;
  if (s == "transitions") return SampleSize::kTransitions;
  throw InputError("BadOption", "unknown sample size '" + s + "'");
}

// ---------------------------------------------------------------------------

int cmd_fit(const DataOptions& data, const EmOptions& emo, std::size_t g, const std::string& out_path,
            const std::string& posteriors_path, const std::string& labels_path, std::ostream& out,
            std::ostream& err) {
  const PanelData pd = data.load();
  report_ingest(pd.report, err);
  const EmConfig cfg = emo.config();
  const Initialization init = initialize(pd.panel, g, cfg.seed);
  const FitReport rep = fit(pd.panel, g, init.model, cfg);
  const auto labels = map_cluster(rep.posteriors);

  write_model(out_path, rep.model);
  if (!posteriors_path.empty())
    write_file_atomic(posteriors_path, format_posteriors(pd.subject_ids, rep.posteriors));
  if (!labels_path.empty()) write_labels(labels_path, pd.subject_ids, labels);

  out << "components: " << g << '\n'
      << "subjects: " << pd.panel.subject_count() << '\n'
      << "replications: " << pd.panel.replications() << '\n'
      << "penalized: " << (cfg.penalized ? "true" : "false") << '\n'
      << "iterations: " << rep.iterations << '\n'
      << "converged: " << (rep.converged ? "true" : "false") << '\n'
      << "loglik: " << fixed(mixture_loglik(pd.panel, rep.model), 6) << '\n'
      << "objective: " << fixed(rep.objective_trace.back(), 6) << '\n'
      << "weights:";
  for (double w : rep.model.weights()) out << ' ' << fixed(w, 4);
  out << "\ncluster_sizes:";
  for (std::size_t s : cluster_sizes(labels, g)) out << ' ' << s;
  out << '\n';
  for (const auto& w : rep.warnings) err << nlohmann::json{{"warning", w}}.dump() << '\n';
  return kExitOk;
}

int cmd_select(const DataOptions& data, const EmOptions& emo, std::size_t g_min, std::size_t g_max,
               const std::string& sample, const std::string& csv_path, std::ostream& out,
               std::ostream& err) {
  if (g_min < 1 || g_max < g_min) throw InputError("BadOption", "need 1 <= g-min <= g-max");
  const PanelData pd = data.load();
  report_ingest(pd.report, err);
  SelectionOptions so;
  so.em = emo.config();
  so.sample_size = parse_sample_size(sample);
  std::vector<std::size_t> gs;
  for (std::size_t g = g_min; g <= g_max; ++g) gs.push_back(g);
  const SelectionResult res = select_g(pd.panel, gs, so);

  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof line, "%3s %16s %6s %16s %16s %16s\n", "G", "loglik", "q", "BIC", "AIC",
                "AICc");
  table << line;
  std::string csv = "G,loglik,q,BIC,AIC,AICc\n";
  for (const auto& c : res.candidates) {
    if (!c.report) {
      std::snprintf(line, sizeof line, "%3zu %16s %6zu %16s %16s %16s\n", c.components, "failed",
                    c.q, "-", "-", "-");
      table << line;
      csv += std::to_string(c.components) + ",,," + ",,\n";
      err << nlohmann::json{{"warning", "fit failed"}, {"G", c.components}, {"error", c.error}}.dump()
          << '\n';
      continue;
    }
    const std::string aicc = c.aicc ? fixed(*c.aicc, 3) : "-";
    std::snprintf(line, sizeof line, "%3zu %16.3f %6zu %16.3f %16.3f %16s\n", c.components, c.loglik,
                  c.q, c.bic, c.aic, aicc.c_str());
    table << line;
    csv += std::to_string(c.components) + ',' + format_double(c.loglik) + ',' +
           std::to_string(c.q) + ',' + format_double(c.bic) + ',' + format_double(c.aic) + ',' +
           (c.aicc ? format_double(*c.aicc) : "") + '\n';
  }
  if (!csv_path.empty()) write_file_atomic(csv_path, csv);
  out << table.str();
  const auto show = [](const std::optional<std::size_t>& g) {
    return g ? std::to_string(*g) : std::string("none");
  };
  out << "best: BIC=" << show(res.best_bic) << " AIC=" << show(res.best_aic)
      << " AICc=" << show(res.best_aicc) << '\n';
  if (!res.best_bic) throw NonConvergence("every candidate fit failed");
  return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& labels_path, std::ostream& out,
                 std::ostream& err) {
  ScenarioReadResult sr = read_scenario(scenario_path);
  if (sr.max_adjustment > 0.0)
    err << nlohmann::json{{"warning", "renormalized scenario rows"},
                          {"max_adjustment", sr.max_adjustment}}
               .dump()
        << '\n';
  if (seed) sr.scenario.seed = *seed;
  Rng rng = Rng::stream(sr.scenario.seed, 0);
  const SimulatedPanel sim = simulate_panel(sr.scenario, rng);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < sim.labels.size(); ++i) ids.push_back(std::to_string(i + 1));
  const std::string panel_text = format_panel(sim.panel, ids);
  const std::string labels_text = format_labels(ids, sim.labels);
  write_file_atomic(out_path, panel_text);
  if (!labels_path.empty()) write_file_atomic(labels_path, labels_text);
  out << "subjects: " << sim.panel.subject_count() << '\n'
      << "replications: " << sim.panel.replications() << '\n'
      << "visits: " << sim.panel.total_visits() << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& scenario_path, std::optional<std::size_t> replicates,
              std::optional<std::uint64_t> seed, const EmOptions& emo,
              std::optional<std::size_t> components, std::size_t g_min, std::size_t g_max,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  ScenarioReadResult sr = read_scenario(scenario_path);
  if (sr.max_adjustment > 0.0)
    err << nlohmann::json{{"warning", "renormalized scenario rows"},
                          {"max_adjustment", sr.max_adjustment}}
               .dump()
        << '\n';
  if (replicates) sr.scenario.replicates = *replicates;
  if (seed) sr.scenario.seed = *seed;
  BenchmarkOptions bo;
  bo.em = emo.config();
  bo.components = components;
  if (g_max > 0) {
    if (g_min < 1 || g_max < g_min) throw InputError("BadOption", "need 1 <= g-min <= g-max");
    for (std::size_t g = g_min; g <= g_max; ++g) bo.select_range.push_back(g);
  }
  const BenchmarkTable table = run_benchmark(sr.scenario, bo);
  const std::string text = format_benchmark(table);
  write_file_atomic(out_path, text);
  out << text;
  for (const auto& r : table.runs)
    if (r.failed)
      err << nlohmann::json{{"warning", "replicate failed"}, {"replicate", r.index}, {"error", r.error}}
                 .dump()
          << '\n';
  return kExitOk;
}

int cmd_classify(const DataOptions& data, const std::string& model_path, const std::string& out_path,
                 const std::string& posteriors_path, std::ostream& out, std::ostream& err) {
  const MixtureModel model = read_model(model_path);
  DataOptions d = data;
  const auto& space = model.space();
  if (space.absorbing())
    d.absorbing = space.label(*space.absorbing());
  else
    d.no_absorbing = true;
  const PanelData pd = d.load(space.labels());
  report_ingest(pd.report, err);
  if (!(pd.panel.space() == space))
    throw InputError("LabelMismatch", "panel state space differs from the model's");
  const PosteriorMatrix z = e_step(pd.panel, model, EmConfig{}.z_round);
  const auto labels = map_cluster(z);
  write_labels(out_path, pd.subject_ids, labels);
  if (!posteriors_path.empty())
    write_file_atomic(posteriors_path, format_posteriors(pd.subject_ids, z));
  out << "cluster_sizes:";
  for (std::size_t s : cluster_sizes(labels, model.component_count())) out << ' ' << s;
  out << '\n';
  return kExitOk;
}

int cmd_graph(const DataOptions& data, const std::string& labels_path, std::optional<std::size_t> cluster,
              const GraphOptions& go, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const PanelData pd = data.load();
  report_ingest(pd.report, err);
  std::vector<std::size_t> who;
  if (cluster) {
    if (labels_path.empty()) throw InputError("BadOption", "--cluster needs --labels");
    if (*cluster < 1) throw InputError("BadOption", "--cluster is 1-based");
    const LabelTable lt = read_labels(labels_path);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < lt.subject_ids.size(); ++i) by_id[lt.subject_ids[i]] = lt.labels[i];
    for (std::size_t i = 0; i < pd.subject_ids.size(); ++i) {
      const auto it = by_id.find(pd.subject_ids[i]);
      if (it == by_id.end())
        throw InputError("UnknownSubject", "no label for subject " + pd.subject_ids[i]);
      if (it->second == *cluster - 1) who.push_back(i);
    }
    if (who.empty()) throw InputError("EmptyCluster", "cluster has no subjects");
  }
  const std::string dot = export_tds_graph(pd.panel, who, go);
  write_file_atomic(out_path, dot);
  out << "subjects: " << (who.empty() ? pd.panel.subject_count() : who.size()) << '\n';
  return kExitOk;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& msg) {
  err << nlohmann::json{{"error", kind}, {"message", msg}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixtures of semi-Markov chains for sensory sequences"};
  app.require_subcommand(1);

  DataOptions data;
  EmOptions emo;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a G-component mixture by EM");
  std::size_t fit_g = 0;
  std::string fit_out, fit_post, fit_labels;
  data.add(fit_cmd);
  emo.add(fit_cmd);
  fit_cmd->add_option("--components,-G", fit_g, "Number of components")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit_out, "Model JSON output")->required();
  fit_cmd->add_option("--posteriors", fit_post, "Posterior CSV output");
  fit_cmd->add_option("--labels", fit_labels, "MAP label CSV output");

  auto* sel_cmd = app.add_subcommand("select", "Compare G values with BIC, AIC and AICc");
  std::size_t g_min = 1, g_max = 3;
  std::string sample = "trajectories", sel_csv;
  data.add(sel_cmd);
  emo.add(sel_cmd);
  sel_cmd->add_option("--g-min", g_min, "Smallest G")->required();
  sel_cmd->add_option("--g-max", g_max, "Largest G")->required();
  sel_cmd->add_option("--sample-size", sample, "trajectories | subjects | transitions");
  sel_cmd->add_option("--csv", sel_csv, "Criteria table CSV output");

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a panel from a scenario");
  std::string scenario, sim_out, sim_labels;
  std::optional<std::uint64_t> seed;
  sim_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sim_out, "Panel CSV output")->required();
  sim_cmd->add_option("--labels", sim_labels, "True label CSV output");
  sim_cmd->add_option("--seed", seed, "Override the scenario seed");

  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo recovery benchmark");
  std::optional<std::size_t> replicates, components;
  std::size_t b_gmin = 1, b_gmax = 0;
  std::string bench_out;
  EmOptions bench_em;
  bench_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  bench_cmd->add_option("--replicates", replicates, "Override the replicate count");
  bench_cmd->add_option("--seed", seed, "Override the scenario seed");
  bench_cmd->add_option("--components", components, "Fitted G (default: true G)");
  bench_cmd->add_option("--g-min", b_gmin, "Smallest G of a selection sweep");
  bench_cmd->add_option("--g-max", b_gmax, "Largest G of a selection sweep (0: no sweep)");
  bench_cmd->add_flag("--penalized,!--no-penalized", bench_em.penalized, "Penalize gamma shapes");
  bench_cmd->add_option("--max-iter", bench_em.max_iter, "EM iteration cap");
  bench_cmd->add_option("--out", bench_out, "Aggregate table CSV output")->required();

  auto* cls_cmd = app.add_subcommand("classify", "MAP labels under a fitted model");
  std::string model_path, cls_out, cls_post;
  data.add(cls_cmd);
  cls_cmd->add_option("--model", model_path, "Model JSON")->required();
  cls_cmd->add_option("--out", cls_out, "Label CSV output")->required();
  cls_cmd->add_option("--posteriors", cls_post, "Posterior CSV output");

  auto* graph_cmd = app.add_subcommand("graph", "Export the empirical transition graph as DOT");
  std::string graph_labels, graph_out;
  std::optional<std::size_t> cluster;
  GraphOptions go;
  data.add(graph_cmd);
  graph_cmd->add_option("--labels", graph_labels, "Label CSV selecting a cluster");
  graph_cmd->add_option("--cluster", cluster, "1-based cluster to draw");
  graph_cmd->add_option("--elicit-frac", go.elicit_frac, "Minimum eliciting fraction for nodes");
  graph_cmd->add_option("--threshold", go.prob_threshold, "Edge probability threshold");
  graph_cmd->add_option("--out", graph_out, "DOT output")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(data, emo, fit_g, fit_out, fit_post, fit_labels, out, err);
    if (*sel_cmd) return cmd_select(data, emo, g_min, g_max, sample, sel_csv, out, err);
    if (*sim_cmd) return cmd_simulate(scenario, seed, sim_out, sim_labels, out, err);
    if (*bench_cmd)
      return cmd_bench(scenario, replicates, seed, bench_em, components, b_gmin, b_gmax, bench_out,
                       out, err);
    if (*cls_cmd) return cmd_classify(data, model_path, cls_out, cls_post, out, err);
    if (*graph_cmd) return cmd_graph(data, graph_labels, cluster, go, graph_out, out, err);
  } catch (const NumericalError& e) {
    print_error(err, e.kind(), e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    print_error(err, "InputError", e.what());
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace smcmix::cli
