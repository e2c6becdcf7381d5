#include "doctest.h"
#include "helpers.hpp"

#include <filesystem>
#include <sstream>

#include "../tools/cli.hpp"
#include "smcmix/io.hpp"
#include "smcmix/metrics.hpp"

namespace fs = std::filesystem;
using smcmix::test::data_path;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "smcmix");
  std::ostringstream out, err;
  const int code = smcmix::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto p = fs::temp_directory_path() / "smcmix_test_cli";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("fit reproduces the golden summary") {
  const auto dir = scratch();
  const auto r = run({"fit", "--data", data_path("two_chocolates_panel.csv").string(), "-G", "2", "--seed",
                      "1", "--out", (dir / "m.json").string(), "--posteriors", (dir / "z.csv").string(),
                      "--labels", (dir / "l.csv").string()});
  CHECK(r.code == smcmix::cli::kExitOk);
  CHECK(r.out == smcmix::read_file(data_path("two_chocolates_fit.golden")));
  const auto model = smcmix::read_model(dir / "m.json");
  CHECK(model.component_count() == 2);
  CHECK(count_lines(smcmix::read_file(dir / "z.csv")) == 201);

  // recovered clusters agree with the committed truth
  const auto truth = smcmix::read_labels(data_path("two_chocolates_labels.csv"));
  const auto est = smcmix::read_labels(dir / "l.csv");
  CHECK(est.subject_ids == truth.subject_ids);
  CHECK(smcmix::classification_rate(truth.labels, est.labels) >= 0.98);

  const auto c = run({"classify", "--data", data_path("two_chocolates_panel.csv").string(), "--model",
                      (dir / "m.json").string(), "--out", (dir / "l2.csv").string()});
  CHECK(c.code == 0);
  CHECK(smcmix::read_file(dir / "l2.csv") == smcmix::read_file(dir / "l.csv"));
}

TEST_CASE("simulate, fit and bench compose") {
  const auto dir = scratch();
  auto sc = smcmix::test::fixture("two_chocolates_similar.json");
  sc.subjects = 40;
  sc.replicates = 3;
  sc.stop = smcmix::StopRule::fixed(4);
  smcmix::write_scenario(dir / "s.json", sc);

  const auto s = run({"simulate", "--scenario", (dir / "s.json").string(), "--out",
                      (dir / "p.csv").string(), "--labels", (dir / "t.csv").string(), "--seed", "9"});
  REQUIRE(s.code == 0);
  const auto again = run({"simulate", "--scenario", (dir / "s.json").string(), "--out",
                          (dir / "p2.csv").string(), "--seed", "9"});
  CHECK(smcmix::read_file(dir / "p.csv") == smcmix::read_file(dir / "p2.csv"));

  const auto f = run({"fit", "--data", (dir / "p.csv").string(), "-G", "2", "--out", (dir / "m.json").string()});
  CHECK(f.code == 0);
  CHECK(f.out.find("converged:") != std::string::npos);

  const auto b = run({"bench", "--scenario", (dir / "s.json").string(), "--replicates", "2", "--g-min", "1",
                      "--g-max", "2", "--out", (dir / "b.csv").string()});
  CHECK(b.code == 0);
  const std::string table = smcmix::read_file(dir / "b.csv");
  CHECK(table.rfind("metric,mean,sd,n\n", 0) == 0);
  CHECK(table.find("\nerr_lambda,") != std::string::npos);
  CHECK(table.find("\nselect_BIC_G") != std::string::npos);
  CHECK(table.find("\nfailures,") != std::string::npos);

  const auto g = run({"graph", "--data", (dir / "p.csv").string(), "--labels", (dir / "t.csv").string(),
                      "--cluster", "1", "--out", (dir / "g.dot").string()});
  CHECK(g.code == 0);
  CHECK(smcmix::read_file(dir / "g.dot").rfind("digraph tds {", 0) == 0);
}

TEST_CASE("select prints one row per G") {
  const auto dir = scratch();
  const auto r = run({"select", "--data", data_path("two_chocolates_panel.csv").string(), "--g-min", "1",
                      "--g-max", "1", "--csv", (dir / "c.csv").string()});
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 3);
  CHECK(r.out.find("best: BIC=1") != std::string::npos);
  CHECK(r.out.find("BIC") != std::string::npos);
  CHECK(count_lines(smcmix::read_file(dir / "c.csv")) == 2);
}

TEST_CASE("errors exit nonzero and leave no output file") {
  const auto dir = scratch();
  const auto out = dir / "m.json";

  const auto missing = run({"fit", "--data", (dir / "nope.csv").string(), "-G", "2", "--out", out.string()});
  CHECK(missing.code == smcmix::cli::kExitInput);
  CHECK(missing.err.find("\"error\"") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  smcmix::write_file_atomic(dir / "bad.csv", "subject,replication,attribute,onset,end\na,1,X,5,\na,1,Y,2,9\n");
  const auto bad = run({"fit", "--data", (dir / "bad.csv").string(), "-G", "2", "--out", out.string()});
  CHECK(bad.code == smcmix::cli::kExitInput);
  CHECK(bad.err.find("NonMonotoneOnset") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  // more components than subjects
  smcmix::write_file_atomic(dir / "tiny.csv",
                            "subject,replication,attribute,onset,end\na,1,X,0,\na,1,Y,2,3\n");
  const auto tiny = run({"fit", "--data", (dir / "tiny.csv").string(), "-G", "2", "--out", out.string()});
  CHECK(tiny.code != 0);
  CHECK_FALSE(fs::exists(out));

  // no component can produce the data
  auto m = smcmix::test::toy_model();
  smcmix::write_model(dir / "toy.json", m);
  smcmix::write_file_atomic(dir / "other.csv",
                            "subject,replication,attribute,onset,end\na,1,A,0,\na,1,A2,2,3\n");
  const auto cls = run({"classify", "--data", (dir / "other.csv").string(), "--model", (dir / "toy.json").string(),
                        "--out", (dir / "l.csv").string()});
  CHECK(cls.code == smcmix::cli::kExitInput);
  CHECK_FALSE(fs::exists(dir / "l.csv"));

  const auto usage = run({"fit"});
  CHECK(usage.code == smcmix::cli::kExitInput);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("impossible data is a numerical failure") {
  const auto dir = scratch();
  // state C never starts a trajectory under the toy model's first component
  const smcmix::StateSpace s = smcmix::test::abc();
  const smcmix::ComponentParams c(s, {1, 0, 0}, smcmix::Matrix::from_rows({{0, 1, 0}, {1, 0, 0}, {0.5, 0.5, 0}}),
                                  smcmix::test::gammas({{2, 1}, {2, 1}, {2, 1}}));
  smcmix::write_model(dir / "m.json", smcmix::MixtureModel(s, {1.0}, {c}));
  smcmix::write_file_atomic(dir / "p.csv",
                            "subject,replication,attribute,onset,end\na,1,C,0,\na,1,A,2,3\n");
  const auto r = run({"classify", "--data", (dir / "p.csv").string(), "--model", (dir / "m.json").string(),
                      "--out", (dir / "l.csv").string()});
  CHECK(r.code == smcmix::cli::kExitNumerical);
  CHECK(r.err.find("AllComponentsImpossible") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "l.csv"));
}
