#pragma once

// File formats: onset-encoded CSV panels, JSON models and scenarios, label
// and posterior tables, and DOT export of empirical transition graphs.
//
// Every writer goes through write_file_atomic, so a failed write never leaves
// a partial file behind.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smcmix/core.hpp"
#include "smcmix/sim.hpp"

namespace smcmix {

// ---------------------------------------------------------------------------
// Panels

struct PanelReadOptions {
  char delimiter = ',';
  /// Fixed state space order. Labels outside the list raise UnknownAttribute.
  /// When empty, observed labels are used in sorted order.
  std::vector<std::string> labels;
  /// Label treated as the absorbing state when present; nullopt disables.
  std::optional<std::string> absorbing_label = std::string("STOP");
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t sequences = 0;
  /// Rows folded into the previous row because the attribute repeated.
  std::size_t merge_count = 0;
  /// Subjects dropped because a sequence was too short or replications
  /// were unbalanced.
  std::vector<std::string> dropped_subjects;
  std::vector<std::string> warnings;
};

struct PanelData {
  Panel panel;
  /// External id of each subject, in panel order.
  std::vector<std::string> subject_ids;
  IngestReport report;
};

/// Columns subject, replication, attribute, onset and an optional end. The
/// duration of a state is the next onset minus its own; the last duration is
/// end minus the last onset. A final absorbing state needs no end.
PanelData parse_panel(std::istream& in, const PanelReadOptions& options = {});
PanelData read_panel(const std::filesystem::path& path, const PanelReadOptions& options = {});

/// Onsets start at 0 in every sequence. Ids default to 1..n.
std::string format_panel(const Panel& panel, std::span<const std::string> subject_ids = {});
void write_panel(const std::filesystem::path& path, const Panel& panel,
                 std::span<const std::string> subject_ids = {});

// ---------------------------------------------------------------------------
// Models and scenarios

inline constexpr int kModelFormatVersion = 1;

struct ModelReadOptions {
  /// Rescale weights, alpha and transition rows to sum to one before
  /// validation (for tables printed with rounded entries).
  bool renormalize = false;
};

struct ModelReadResult {
  MixtureModel model;
  /// Largest absolute change made by renormalization.
  double max_adjustment = 0.0;
};

std::string format_model(const MixtureModel& model);
ModelReadResult parse_model(const std::string& text, const ModelReadOptions& options = {});
void write_model(const std::filesystem::path& path, const MixtureModel& model);
MixtureModel read_model(const std::filesystem::path& path, const ModelReadOptions& options = {});

struct ScenarioReadResult {
  Scenario scenario;
  double max_adjustment = 0.0;
};

/// {"model": <model document>, "renormalize": bool, "subjects", "replications",
///  "stop": {"kind": "transitions"|"absorbing", "transitions"}, "seed",
///  "replicates"}
std::string format_scenario(const Scenario& scenario);
ScenarioReadResult parse_scenario(const std::string& text);
ScenarioReadResult read_scenario(const std::filesystem::path& path);
void write_scenario(const std::filesystem::path& path, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Tables

/// subject,cluster with 1-based clusters.
std::string format_labels(std::span<const std::string> subject_ids,
                          std::span<const std::size_t> labels);
void write_labels(const std::filesystem::path& path, std::span<const std::string> subject_ids,
                  std::span<const std::size_t> labels);

struct LabelTable {
  std::vector<std::string> subject_ids;
  /// 0-based clusters.
  std::vector<std::size_t> labels;
};
LabelTable read_labels(const std::filesystem::path& path);

std::string format_posteriors(std::span<const std::string> subject_ids, const PosteriorMatrix& z);

std::string format_benchmark(const BenchmarkTable& table);

// ---------------------------------------------------------------------------
// Graph export

struct GraphOptions {
  /// Minimum fraction of subjects that elicited an attribute for it to
  /// become a node.
  double elicit_frac = 0.5;
  /// Edges need an empirical transition probability strictly above this.
  double prob_threshold = 0.15;
};

/// DOT digraph of the empirical transitions of the given subjects (all
/// subjects when empty).
std::string export_tds_graph(const Panel& panel, std::span<const std::size_t> subjects = {},
                             const GraphOptions& options = {});

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// printf %.17g: enough digits for every double to read back exactly.
std::string format_double(double x);

}  // namespace smcmix
