#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "smcmix/io.hpp"
#include "smcmix/random.hpp"

using namespace smcmix;
using doctest::Approx;
using smcmix::test::fixture;

namespace {

PanelData parse(const std::string& text, const PanelReadOptions& opt = {}) {
  std::istringstream in(text);
  return parse_panel(in, opt);
}

std::string input_error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.kind();
  }
  return "";
}

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "smcmix_test_io";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("onsets become durations") {
  const auto d = parse(
      "subject,replication,attribute,onset,end\n"
      "s1,1,Sweet,0,10\n"
      "s1,1,Cocoa,3,10\n");
  REQUIRE(d.panel.subject_count() == 1);
  const auto& t = d.panel.subject(0)[0];
  CHECK(t.sojourn(0) == 3.0);
  CHECK(t.sojourn(1) == 7.0);
  CHECK(d.panel.space().labels() == std::vector<std::string>{"Cocoa", "Sweet"});
  CHECK(d.subject_ids == std::vector<std::string>{"s1"});
  CHECK(d.report.rows == 2);
}

TEST_CASE("repeated attributes are merged") {
  const auto d = parse(
      "Subject,Replication,Attribute,Onset,End\n"
      "a,1,X,0,\n"
      "a,1,X,2,\n"
      "a,1,Y,5,\n"
      "a,1,Y,6,\n"
      "a,1,X,8,9.5\n");
  const auto& t = d.panel.subject(0)[0];
  CHECK(d.report.merge_count == 2);
  REQUIRE(t.size() == 3);
  CHECK(t.sojourn(0) == 5.0);
  CHECK(t.sojourn(1) == 3.0);
  CHECK(t.sojourn(2) == 1.5);
}

TEST_CASE("absorbing label and quoted fields") {
  const auto d = parse(
      "subject,replication,attribute,onset\n"
      "\"p, 1\",1,\"Sweet\",0\n"
      "\"p, 1\",1,Bitter,1.5\n"
      "\"p, 1\",1,STOP,4\n");
  const auto& s = d.panel.space();
  CHECK(s.labels() == std::vector<std::string>{"Bitter", "Sweet", "STOP"});
  CHECK(s.absorbing() == StateIndex{2});
  CHECK(d.subject_ids[0] == "p, 1");
  const auto& t = d.panel.subject(0)[0];
  CHECK(t.sojourn(1) == 2.5);
  CHECK(t.sojourn_count() == 2);
}

TEST_CASE("ingest errors") {
  const std::string h = "subject,replication,attribute,onset,end\n";
  CHECK(input_error_kind([&] { parse(h + "a,1,X\n"); }) == "MalformedRow");
  CHECK(input_error_kind([&] { parse(h + "a,x,X,0,1\n"); }) == "MalformedRow");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,-1,1\n"); }) == "MalformedRow");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,\na,1,Y,0,4\n"); }) == "NonMonotoneOnset");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,3,\na,1,Y,1,4\n"); }) == "NonMonotoneOnset");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,\na,1,X,2,\na,1,Y,1,4\n"); }) == "NonMonotoneOnset");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,\na,1,Y,2,\n"); }) == "MissingEnd");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,\na,1,STOP,2,\na,1,Y,3,4\n"); }) == "AbsorbingNotLast");
  PanelReadOptions fixed;
  fixed.labels = {"X", "Y"};
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,\na,1,Z,2,3\n", fixed); }) == "UnknownAttribute");
  CHECK(input_error_kind([&] { parse(h + "a,1,X,0,5\nb,1,Y,0,5\n"); }) == "EmptyPanel");
  CHECK(input_error_kind([&] { parse(""); }) == "MalformedRow");
  CHECK(input_error_kind([&] { read_panel("/nonexistent/panel.csv"); }) == "FileNotFound");
}

TEST_CASE("short and unbalanced subjects are dropped") {
  const auto d = parse(
      "subject,replication,attribute,onset,end\n"
      "a,1,X,0,\na,1,Y,1,2\na,2,X,0,\na,2,Y,1,2\n"
      "b,1,X,0,\nb,1,Y,1,2\nb,2,X,0,3\n"
      "c,1,X,0,\nc,1,Y,1,2\nc,2,Y,0,\nc,2,X,1,2\n"
      "d,1,X,0,\nd,1,Y,1,2\n");
  CHECK(d.subject_ids == std::vector<std::string>{"a", "c"});
  CHECK(d.panel.replications() == 2);
  CHECK(d.report.dropped_subjects.size() == 2);
  CHECK_FALSE(d.report.warnings.empty());
}

TEST_CASE("panel round trip") {
  auto sc = fixture("two_chocolates_separated.json");
  sc.subjects = 25;
  Rng rng(3);
  const auto sim = simulate_panel(sc, rng);
  const std::string text = format_panel(sim.panel);
  PanelReadOptions opt;
  opt.labels = sim.panel.space().labels();
  const auto back = parse(text, opt);
  REQUIRE(back.panel.subject_count() == sim.panel.subject_count());
  CHECK(back.panel.space() == sim.panel.space());
  for (std::size_t i = 0; i < sim.panel.subject_count(); ++i) {
    CHECK(back.subject_ids[i] == std::to_string(i + 1));
    for (std::size_t b = 0; b < sim.panel.replications(); ++b) {
      const auto& x = sim.panel.subject(i)[b];
      const auto& y = back.panel.subject(i)[b];
      REQUIRE(x.size() == y.size());
      for (std::size_t k = 0; k < x.size(); ++k) {
        CHECK(x.state(k) == y.state(k));
        CHECK(std::abs(x.sojourn(k) - y.sojourn(k)) <= 1e-12 * std::max(1.0, x.sojourn(k) * 100));
      }
    }
  }
  // the written form is a fixed point
  CHECK(format_panel(back.panel) == format_panel(parse(format_panel(back.panel), opt).panel));

  const StateSpace s = smcmix::test::abc_stop();
  const Panel ps(s, {{Trajectory({0, 1, 3}, {1.5, 2.5, 0.0}, s)}});
  PanelReadOptions sopt;
  sopt.labels = s.labels();
  const auto pb = parse(format_panel(ps), sopt);
  CHECK(pb.panel.subject(0)[0].sojourn(1) == 2.5);
  CHECK(pb.panel.space().absorbing() == StateIndex{3});
}

TEST_CASE("model round trip") {
  const auto sc = fixture("two_chocolates_similar.json");
  const std::string text = format_model(sc.model);
  const auto back = parse_model(text);
  CHECK(back.model == sc.model);
  CHECK(back.max_adjustment == 0.0);
  CHECK(format_model(back.model) == text);

  const auto toy = smcmix::test::toy_model();
  CHECK(parse_model(format_model(toy)).model == toy);

  const StateSpace s = smcmix::test::abc_stop();
  const ComponentParams c(s, {0.5, 0.5, 0, 0},
                          Matrix::from_rows({{0, 0.5, 0.2, 0.3}, {0.4, 0, 0.3, 0.3}, {0.5, 0.5, 0, 0}, {0, 0, 0, 0}}),
                          smcmix::test::gammas({{2, 1}, {2, 1}, {2, 1}, {1, 1}}));
  const MixtureModel m(s, {1.0}, {c});
  const std::string mt = format_model(m);
  CHECK(mt.find("null") != std::string::npos);
  CHECK(parse_model(mt).model == m);

  const auto dir = temp_dir();
  write_model(dir / "m.json", toy);
  CHECK(read_model(dir / "m.json") == toy);
  CHECK_FALSE(std::filesystem::exists(dir / "m.json.tmp"));
}

TEST_CASE("model read validates invariants") {
  const auto toy = smcmix::test::toy_model();
  const std::string good = format_model(toy);
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string t = good;
    const auto pos = t.find(from);
    REQUIRE(pos != std::string::npos);
    t.replace(pos, from.size(), to);
    return t;
  };
  // first transition row (0, .7, .3) -> (0, .6, .3)
  const std::string row = replace("0.69999999999999996", "0.59999999999999998");
  CHECK(input_error_kind([&] { parse_model(row); }) == "MalformedModel");
  const auto fixed = parse_model(row, {.renormalize = true});
  CHECK(fixed.max_adjustment == Approx(0.6 / 0.9 - 0.6).epsilon(1e-12));

  const std::string neg = replace("\"shape\": 2", "\"shape\": -2");
  CHECK(input_error_kind([&] { parse_model(neg); }) == "MalformedModel");
  CHECK(input_error_kind([&] { parse_model(replace("\"format_version\": 1", "\"format_version\": 2")); }) ==
        "UnsupportedVersion");
  CHECK(input_error_kind([&] { parse_model("{]"); }) == "MalformedJson");
}

TEST_CASE("scenario round trip and fixture renormalization") {
  const auto r = read_scenario(smcmix::test::data_path("chocolate_70.json"));
  CHECK(r.max_adjustment > 0.0);
  CHECK(r.max_adjustment < 0.01);
  const auto& sc = r.scenario;
  CHECK(sc.subjects == 200);
  CHECK(sc.replications == 3);
  CHECK(sc.stop.transitions == 10);
  CHECK(sc.replicates == 50);
  const auto back = parse_scenario(format_scenario(sc)).scenario;
  CHECK(back.model == sc.model);
  CHECK(back.seed == sc.seed);
  CHECK(back.stop.kind == sc.stop.kind);
  CHECK(format_scenario(back) == format_scenario(sc));
}

TEST_CASE("label tables") {
  const std::vector<std::string> ids{"a", "b", "c"};
  const std::vector<std::size_t> labels{0, 1, 1};
  CHECK(format_labels(ids, labels) == "subject,cluster\na,1\nb,2\nc,2\n");
  const auto dir = temp_dir();
  write_labels(dir / "l.csv", ids, labels);
  const auto t = read_labels(dir / "l.csv");
  CHECK(t.subject_ids == ids);
  CHECK(t.labels == labels);
}

TEST_CASE("atomic write leaves no partial file") {
  const auto dir = temp_dir();
  CHECK(input_error_kind([&] { write_file_atomic(dir / "missing_dir" / "x.txt", "hi"); }) == "WriteFailed");
  CHECK_FALSE(std::filesystem::exists(dir / "missing_dir"));
  write_file_atomic(dir / "x.txt", "hello");
  CHECK(read_file(dir / "x.txt") == "hello");
}

TEST_CASE("graph export") {
  const StateSpace s({"A", "B"});
  const Panel det(s, {{Trajectory({0, 1}, {1.0, 1.0}, s)}});
  CHECK(export_tds_graph(det) == "digraph tds {\n  \"A\";\n  \"B\";\n  \"A\" -> \"B\" [label=\"1.00\"];\n}\n");
  CHECK(export_tds_graph(det, {}, {.elicit_frac = 0.5, .prob_threshold = 1.01}) ==
        "digraph tds {\n  \"A\";\n  \"B\";\n}\n");

  // From A: 16 to B, 14 to C, 70 to D; every subject elicits all four.
  const StateSpace g({"A", "B", "C", "D"});
  std::vector<std::vector<Trajectory>> subjects;
  auto add = [&](StateIndex to, int count) {
    for (int k = 0; k < count; ++k)
      subjects.push_back({Trajectory({0, to}, {1, 1}, g), Trajectory({1, 2, 3}, {1, 1, 1}, g)});
  };
  add(1, 16);
  add(2, 14);
  add(3, 70);
  const Panel gp(g, subjects);
  const std::string dot = export_tds_graph(gp);
  CHECK(dot.find("\"A\" -> \"B\" [label=\"0.16\"]") != std::string::npos);
  CHECK(dot.find("\"A\" -> \"C\"") == std::string::npos);
  CHECK(dot.find("\"A\" -> \"D\" [label=\"0.70\"]") != std::string::npos);
  CHECK(dot.find("\"B\" -> \"C\" [label=\"1.00\"]") != std::string::npos);

  // restricting to subjects that never saw D drops the node and its edges
  const StateSpace h({"A", "B", "C", "D"});
  std::vector<std::vector<Trajectory>> few;
  for (int k = 0; k < 4; ++k) few.push_back({Trajectory({0, 1}, {1, 1}, h)});
  few.push_back({Trajectory({0, 3}, {1, 1}, h)});
  const std::string part = export_tds_graph(Panel(h, few));
  CHECK(part.find("\"D\"") == std::string::npos);
  CHECK(part.find("\"C\"") == std::string::npos);
  CHECK(part.find("\"A\" -> \"B\" [label=\"0.80\"]") != std::string::npos);
  const std::vector<std::size_t> last{4};
  CHECK(export_tds_graph(Panel(h, few), last).find("\"A\" -> \"D\" [label=\"1.00\"]") != std::string::npos);
  CHECK(export_tds_graph(gp) == dot);
}
