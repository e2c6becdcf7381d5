#include "smcmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace smcmix {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Splits one line; fields may be double-quoted with "" as an escaped quote.
std::optional<std::vector<std::string>> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == delim) {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) return std::nullopt;
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

InputError malformed(std::size_t line, const std::string& why) {
  return InputError("MalformedRow", "line " + std::to_string(line) + ": " + why);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct RawRow {
  std::string attribute;
  double onset;
  std::size_t line;
};

struct RawSequence {
  std::vector<RawRow> rows;
  double last_onset = -1.0;
  std::optional<double> end;
};

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("FileNotFound", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("WriteFailed", "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("WriteFailed", "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("WriteFailed", "cannot rename onto " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Panels

PanelData parse_panel(std::istream& in, const PanelReadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line, options.delimiter);
      break;
    }
  }
  if (!header) throw InputError("MalformedRow", "missing header row");

  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header->size(); ++k) col[lower((*header)[k])] = k;
  for (const char* name : {"subject", "replication", "attribute", "onset"})
    if (!col.count(name))
      throw malformed(line_no, std::string("header lacks column '") + name + "'");
  const std::size_t c_subject = col["subject"];
  const std::size_t c_rep = col["replication"];
  const std::size_t c_attr = col["attribute"];
  const std::size_t c_onset = col["onset"];
  const std::optional<std::size_t> c_end =
      col.count("end") ? std::optional<std::size_t>(col["end"]) : std::nullopt;

  std::set<std::string> fixed(options.labels.begin(), options.labels.end());
  if (fixed.size() != options.labels.size())
    throw InputError("DuplicateLabel", "supplied label list has duplicates");

  IngestReport report;
  std::vector<std::string> order;  // subjects by first appearance
  std::map<std::string, std::map<long long, RawSequence>> seqs;
  std::set<std::string> observed;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, options.delimiter);
    if (!fields) throw malformed(line_no, "unterminated quote");
    if (fields->size() != header->size())
      throw malformed(line_no, "expected " + std::to_string(header->size()) + " fields, got " +
                                   std::to_string(fields->size()));
    const auto& f = *fields;
    ++report.rows;
    const std::string& subject = f[c_subject];
    if (subject.empty()) throw malformed(line_no, "empty subject");
    const auto rep = parse_int(f[c_rep]);
    if (!rep || *rep < 1) throw malformed(line_no, "replication must be an integer >= 1");
    const std::string& attr = f[c_attr];
    if (attr.empty()) throw malformed(line_no, "empty attribute");
    const auto onset = parse_double(f[c_onset]);
    if (!onset || *onset < 0.0) throw malformed(line_no, "onset must be a nonnegative number");
    if (!fixed.empty() && !fixed.count(attr))
      throw InputError("UnknownAttribute", "line " + std::to_string(line_no) +
                                               ": attribute '" + attr + "' not in label list");

    if (!seqs.count(subject)) order.push_back(subject);
    RawSequence& seq = seqs[subject][*rep];
    if (!seq.rows.empty() && !(*onset > seq.last_onset))
      throw InputError("NonMonotoneOnset", "subject " + subject + " replication " +
                                               std::to_string(*rep) + " at line " +
                                               std::to_string(line_no));
    if (c_end && !f[*c_end].empty()) {
      const auto end = parse_double(f[*c_end]);
      if (!end) throw malformed(line_no, "end must be a number");
      if (seq.end && *seq.end != *end) throw malformed(line_no, "end differs within a sequence");
      seq.end = end;
    }
    seq.last_onset = *onset;
    if (!seq.rows.empty() && seq.rows.back().attribute == attr) {
      ++report.merge_count;
      continue;
    }
    seq.rows.push_back({attr, *onset, line_no});
    observed.insert(attr);
  }

  std::vector<std::string> labels = options.labels;
  if (labels.empty()) {
    for (const auto& l : observed)
      if (l != options.absorbing_label) labels.push_back(l);
    if (options.absorbing_label && observed.count(*options.absorbing_label))
      labels.push_back(*options.absorbing_label);
  }
  std::optional<StateIndex> absorbing;
  if (options.absorbing_label) {
    const auto it = std::find(labels.begin(), labels.end(), *options.absorbing_label);
    if (it != labels.end()) absorbing = static_cast<StateIndex>(it - labels.begin());
  }
  std::optional<StateSpace> space;
  try {
    space.emplace(labels, absorbing);
  } catch (const InvariantError& e) {
    throw InputError("InvalidStateSpace", e.what());
  }

  // Convert sequences; a subject with any sequence shorter than two states
  // is dropped so that every kept subject has the same replications.
  std::vector<std::string> kept_ids;
  std::vector<std::vector<Trajectory>> kept;
  std::map<std::size_t, std::size_t> rep_counts;
  for (const auto& subject : order) {
    std::vector<Trajectory> trajs;
    bool too_short = false;
    for (const auto& [rep, seq] : seqs[subject]) {
      ++report.sequences;
      const std::string where = "subject " + subject + " replication " + std::to_string(rep);
      if (seq.rows.size() < 2) {
        report.warnings.push_back("TooShort: " + where + " has fewer than 2 states");
        too_short = true;
        continue;
      }
      std::vector<StateIndex> states;
      std::vector<double> sojourns;
      for (std::size_t k = 0; k < seq.rows.size(); ++k) {
        const StateIndex s = *space->index_of(seq.rows[k].attribute);
        states.push_back(s);
        if (space->is_absorbing(s)) {
          if (k + 1 != seq.rows.size())
            throw InputError("AbsorbingNotLast", where + ": absorbing state before the end");
          sojourns.push_back(0.0);
        } else if (k + 1 < seq.rows.size()) {
          sojourns.push_back(seq.rows[k + 1].onset - seq.rows[k].onset);
        } else {
          if (!seq.end) throw InputError("MissingEnd", where + ": no end time for last state");
          if (!(*seq.end > seq.rows[k].onset))
            throw InputError("NonMonotoneOnset", where + ": end not after last onset");
          sojourns.push_back(*seq.end - seq.rows[k].onset);
        }
      }
      trajs.emplace_back(std::move(states), std::move(sojourns), *space);
    }
    if (too_short) {
      report.dropped_subjects.push_back(subject);
      continue;
    }
    ++rep_counts[trajs.size()];
    kept_ids.push_back(subject);
    kept.push_back(std::move(trajs));
  }
  if (kept.empty()) throw InputError("EmptyPanel", "no usable subjects");

  std::size_t b = 0;
  std::size_t best = 0;
  for (const auto& [count, freq] : rep_counts)
    if (freq >= best) {
      best = freq;
      b = count;
    }
  std::vector<std::string> ids;
  std::vector<std::vector<Trajectory>> subjects;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].size() != b) {
      report.warnings.push_back("Unbalanced: subject " + kept_ids[i] + " has " +
                                std::to_string(kept[i].size()) + " replications, expected " +
                                std::to_string(b));
      report.dropped_subjects.push_back(kept_ids[i]);
      continue;
    }
    ids.push_back(kept_ids[i]);
    subjects.push_back(std::move(kept[i]));
  }
  return {Panel(std::move(*space), std::move(subjects)), std::move(ids), std::move(report)};
}

PanelData read_panel(const std::filesystem::path& path, const PanelReadOptions& options) {
  std::istringstream in(read_file(path));
  return parse_panel(in, options);
}

std::string format_panel(const Panel& panel, std::span<const std::string> subject_ids) {
  if (!subject_ids.empty() && subject_ids.size() != panel.subject_count())
    throw InvariantError("format_panel: one id per subject required");
  const auto& space = panel.space();
  std::string out = "subject,replication,attribute,onset,end\n";
  for (std::size_t i = 0; i < panel.subject_count(); ++i) {
    const std::string id = csv_field(subject_ids.empty() ? std::to_string(i + 1) : subject_ids[i]);
    const auto& trajs = panel.subject(i);
    for (std::size_t b = 0; b < trajs.size(); ++b) {
      const auto& t = trajs[b];
      std::vector<double> onsets(t.size());
      double clock = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        onsets[k] = clock;
        if (!space.is_absorbing(t.state(k))) clock += t.sojourn(k);
      }
      const std::string end = format_double(clock);
      for (std::size_t k = 0; k < t.size(); ++k) {
        out += id + ',' + std::to_string(b + 1) + ',' + csv_field(space.label(t.state(k))) + ',' +
               format_double(onsets[k]) + ',' + end + '\n';
      }
    }
  }
  return out;
}

void write_panel(const std::filesystem::path& path, const Panel& panel,
                 std::span<const std::string> subject_ids) {
  write_file_atomic(path, format_panel(panel, subject_ids));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

// nlohmann prints the shortest round-trip form; the file format asks for a
// fixed 17 significant digits, so numbers are emitted here.
void dump(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += '\n' + pad;
        dump(v, out, indent, depth + 1);
        first = false;
      }
      if (!flat) out += '\n' + close_pad;
      out += ']';
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        out += '\n' + pad + json(k).dump() + ": ";
        dump(v, out, indent, depth + 1);
        first = false;
      }
      out += '\n' + close_pad + '}';
      return;
    }
    default:
      out += j.dump();
  }
}

std::string dump(const json& j) {
  std::string out;
  dump(j, out, 2, 0);
  return out + '\n';
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError("MalformedJson", e.what());
  }
}

json model_to_json(const MixtureModel& model) {
  const auto& space = model.space();
  json j;
  j["space"]["labels"] = space.labels();
  j["space"]["absorbing"] = space.absorbing() ? json(*space.absorbing()) : json(nullptr);
  j["weights"] = model.weights();
  j["components"] = json::array();
  for (const auto& c : model.components()) {
    json cj;
    cj["alpha"] = c.alpha();
    cj["trans"] = json::array();
    for (std::size_t r = 0; r < c.trans().rows(); ++r) {
      const auto row = c.trans().row(r);
      cj["trans"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    cj["sojourn"] = json::array();
    for (StateIndex l = 0; l < c.state_count(); ++l) {
      if (c.is_absorbing(l))
        cj["sojourn"].push_back(nullptr);
      else
        cj["sojourn"].push_back({{"shape", c.sojourn(l).shape()}, {"rate", c.sojourn(l).rate()}});
    }
    j["components"].push_back(std::move(cj));
  }
  j["meta"]["format_version"] = kModelFormatVersion;
  return j;
}

// Rescales v to sum 1 and records the largest entry change.
void renormalize(std::vector<double>& v, double& max_adjustment) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (!(sum > 0.0)) return;
  for (double& x : v) {
    const double y = x / sum;
    max_adjustment = std::max(max_adjustment, std::abs(y - x));
    x = y;
  }
}

ModelReadResult model_from_json(const json& j, const ModelReadOptions& options) {
  try {
    if (j.contains("meta") && j["meta"].contains("format_version") &&
        j["meta"]["format_version"].get<int>() != kModelFormatVersion)
      throw InputError("UnsupportedVersion", "unsupported model format_version");
    const auto labels = j.at("space").at("labels").get<std::vector<std::string>>();
    std::optional<StateIndex> absorbing;
    const auto& ab = j.at("space").at("absorbing");
    if (!ab.is_null()) absorbing = ab.get<StateIndex>();
    StateSpace space(labels, absorbing);
    const std::size_t d = space.size();

    double adjust = 0.0;
    auto weights = j.at("weights").get<std::vector<double>>();
    if (options.renormalize) renormalize(weights, adjust);
    std::vector<ComponentParams> comps;
    for (const auto& cj : j.at("components")) {
      auto alpha = cj.at("alpha").get<std::vector<double>>();
      auto rows = cj.at("trans").get<std::vector<std::vector<double>>>();
      if (alpha.size() != d || rows.size() != d)
        throw InvariantError("model: alpha/trans size differs from the state count");
      if (options.renormalize) {
        renormalize(alpha, adjust);
        for (auto& r : rows) renormalize(r, adjust);
      }
      const auto& sj = cj.at("sojourn");
      if (sj.size() != d) throw InvariantError("model: sojourn size differs from the state count");
      std::vector<GammaParams> sojourn;
      for (std::size_t l = 0; l < d; ++l) {
        if (space.is_absorbing(l)) {
          if (!sj[l].is_null()) throw InvariantError("model: absorbing state has a sojourn law");
          sojourn.emplace_back(1.0, 1.0);
        } else {
          if (sj[l].is_null()) throw InvariantError("model: missing sojourn law");
          sojourn.emplace_back(sj[l].at("shape").get<double>(), sj[l].at("rate").get<double>());
        }
      }
      comps.emplace_back(space, std::move(alpha), Matrix::from_rows(rows), std::move(sojourn));
    }
    return {MixtureModel(space, std::move(weights), std::move(comps)), adjust};
  } catch (const json::exception& e) {
    throw InputError("MalformedModel", e.what());
  } catch (const InvariantError& e) {
    throw InputError("MalformedModel", e.what());
  }
}

}  // namespace

std::string format_model(const MixtureModel& model) { return dump(model_to_json(model)); }

ModelReadResult parse_model(const std::string& text, const ModelReadOptions& options) {
  return model_from_json(parse_json(text), options);
}

void write_model(const std::filesystem::path& path, const MixtureModel& model) {
  write_file_atomic(path, format_model(model));
}

MixtureModel read_model(const std::filesystem::path& path, const ModelReadOptions& options) {
  return parse_model(read_file(path), options).model;
}

std::string format_scenario(const Scenario& scenario) {
  json j;
  j["model"] = model_to_json(scenario.model);
  j["renormalize"] = false;
  j["subjects"] = scenario.subjects;
  j["replications"] = scenario.replications;
  j["stop"]["kind"] = scenario.stop.kind == StopRule::Kind::kAbsorbing ? "absorbing" : "transitions";
  j["stop"]["transitions"] = scenario.stop.transitions;
  j["seed"] = scenario.seed;
  j["replicates"] = scenario.replicates;
  return dump(j);
}

ScenarioReadResult parse_scenario(const std::string& text) {
  const json j = parse_json(text);
  try {
    ModelReadOptions mo;
    mo.renormalize = j.value("renormalize", false);
    ModelReadResult m = model_from_json(j.at("model"), mo);
    Scenario s{.model = std::move(m.model), .stop = StopRule{}};
    s.subjects = j.value("subjects", s.subjects);
    s.replications = j.value("replications", s.replications);
    s.seed = j.value("seed", s.seed);
    s.replicates = j.value("replicates", s.replicates);
    if (j.contains("stop")) {
      const auto& st = j["stop"];
      const std::string kind = st.value("kind", std::string("transitions"));
      if (kind == "transitions")
        s.stop = StopRule::fixed(st.value("transitions", s.stop.transitions));
      else if (kind == "absorbing")
        s.stop = StopRule::absorbing(st.value("transitions", std::size_t{1000}));
      else
        throw InputError("MalformedScenario", "unknown stop kind '" + kind + "'");
    }
    s.validate();
    return {std::move(s), m.max_adjustment};
  } catch (const json::exception& e) {
    throw InputError("MalformedScenario", e.what());
  }
}

ScenarioReadResult read_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

void write_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  write_file_atomic(path, format_scenario(scenario));
}

// ---------------------------------------------------------------------------
// Tables

std::string format_labels(std::span<const std::string> subject_ids,
                          std::span<const std::size_t> labels) {
  if (subject_ids.size() != labels.size())
    throw InvariantError("format_labels: one id per label required");
  std::string out = "subject,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += csv_field(subject_ids[i]) + ',' + std::to_string(labels[i] + 1) + '\n';
  return out;
}

void write_labels(const std::filesystem::path& path, std::span<const std::string> subject_ids,
                  std::span<const std::size_t> labels) {
  write_file_atomic(path, format_labels(subject_ids, labels));
}

LabelTable read_labels(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  LabelTable t;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line, ',');
    if (!f || f->size() != 2) throw malformed(line_no, "expected subject,cluster");
    if (header) {
      header = false;
      continue;
    }
    const auto c = parse_int((*f)[1]);
    if (!c || *c < 1) throw malformed(line_no, "cluster must be an integer >= 1");
    t.subject_ids.push_back((*f)[0]);
    t.labels.push_back(static_cast<std::size_t>(*c - 1));
  }
  return t;
}

std::string format_posteriors(std::span<const std::string> subject_ids, const PosteriorMatrix& z) {
  if (subject_ids.size() != z.subject_count())
    throw InvariantError("format_posteriors: one id per subject required");
  std::string out = "subject";
  for (std::size_t g = 0; g < z.component_count(); ++g) out += ",z" + std::to_string(g + 1);
  out += '\n';
  for (std::size_t i = 0; i < z.subject_count(); ++i) {
    out += csv_field(subject_ids[i]);
    for (std::size_t g = 0; g < z.component_count(); ++g) out += ',' + format_double(z(i, g));
    out += '\n';
  }
  return out;
}

std::string format_benchmark(const BenchmarkTable& table) {
  std::string out = "metric,mean,sd,n\n";
  for (const auto& m : table.metrics)
    out += m.name + ',' + format_double(m.mean) + ',' + format_double(m.sd) + ',' +
           std::to_string(m.values.size()) + '\n';
  const std::size_t ok = table.replicates - table.failures;
  for (const auto& [crit, hist] : table.selection)
    for (const auto& [g, count] : hist)
      out += "select_" + crit + "_G" + std::to_string(g) + ',' +
             format_double(ok ? static_cast<double>(count) / static_cast<double>(ok) : 0.0) +
             ",," + std::to_string(count) + '\n';
  out += "failures," + std::to_string(table.failures) + ",," + std::to_string(table.replicates) +
         '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Graph export

namespace {

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string export_tds_graph(const Panel& panel, std::span<const std::size_t> subjects,
                             const GraphOptions& options) {
  std::vector<std::size_t> who(subjects.begin(), subjects.end());
  if (who.empty())
    for (std::size_t i = 0; i < panel.subject_count(); ++i) who.push_back(i);
  const std::size_t d = panel.space().size();

  std::vector<std::size_t> elicited(d, 0);
  Matrix counts(d, d);
  for (std::size_t i : who) {
    std::vector<bool> seen(d, false);
    for (const auto& t : panel.subject(i)) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        seen[t.state(k)] = true;
        if (k + 1 < t.size()) counts(t.state(k), t.state(k + 1)) += 1.0;
      }
    }
    for (std::size_t l = 0; l < d; ++l) elicited[l] += seen[l] ? 1 : 0;
  }

  std::vector<bool> node(d, false);
  for (std::size_t l = 0; l < d; ++l)
    node[l] = !who.empty() &&
              static_cast<double>(elicited[l]) >= options.elicit_frac * static_cast<double>(who.size());

  std::string out = "digraph tds {\n";
  for (std::size_t l = 0; l < d; ++l)
    if (node[l]) out += "  " + dot_id(panel.space().label(l)) + ";\n";
  for (std::size_t l = 0; l < d; ++l) {
    if (!node[l]) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += counts(l, j);
    if (total == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (!node[j]) continue;
      const double p = counts(l, j) / total;
      if (!(p > options.prob_threshold)) continue;
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", p);
      out += "  " + dot_id(panel.space().label(l)) + " -> " + dot_id(panel.space().label(j)) +
             " [label=\"" + buf + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace smcmix
