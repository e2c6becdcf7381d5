#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

#include "smcmix/likelihood.hpp"
#include "smcmix/numeric.hpp"
#include "smcmix/sojourn.hpp"

using namespace smcmix;
using doctest::Approx;
using smcmix::test::gammas;
using smcmix::test::rel_diff;

namespace {

ComponentParams two_state(double a, double rate) {
  const StateSpace s({"L", "J"});
  return ComponentParams(s, {1, 0}, Matrix::from_rows({{0, 1}, {1, 0}}),
                         gammas({{a, rate}, {a, rate}}));
}

}  // namespace

TEST_CASE("component log-likelihood basics") {
  const StateSpace s({"L", "J"});
  const auto c = two_state(1, 1);
  // both sojourns enter the likelihood
  const Trajectory t({0, 1}, {1.0, 1.0}, s);
  CHECK(component_loglik(t, c) == Approx(-2.0).epsilon(1e-15));
  const Trajectory starts_j({1, 0}, {1.0, 1.0}, s);
  CHECK(component_loglik(starts_j, c) == kNegInf);
}

TEST_CASE("absorbing state contributes a transition but no sojourn") {
  const StateSpace s({"L", "J", "STOP"}, 2);
  const ComponentParams c(s, {1, 0, 0}, Matrix::from_rows({{0, 0.6, 0.4}, {1, 0, 0}, {0, 0, 0}}),
                          gammas({{1, 1}, {1, 1}, {1, 1}}));
  const Trajectory t({0, 2}, {1.0, 0.0}, s);
  CHECK(component_loglik(t, c) == Approx(-1.0 + std::log(0.4)).epsilon(1e-15));
  const ComponentParams sure(s, {1, 0, 0}, Matrix::from_rows({{0, 0, 1}, {1, 0, 0}, {0, 0, 0}}),
                             gammas({{1, 1}, {1, 1}, {1, 1}}));
  CHECK(component_loglik(t, sure) == Approx(-1.0).epsilon(1e-15));
  const Trajectory u({0, 1, 0, 2}, {1.0, 2.0, 0.5, 123.0}, s);
  CHECK(component_loglik(u, c) ==
        Approx(-1.0 - 2.0 - 0.5 + std::log(0.6) + std::log(0.4)).epsilon(1e-15));
}

TEST_CASE("chocolate-70 trajectory matches the factor product") {
  const auto sc = smcmix::test::fixture("chocolate_70.json");
  const auto& space = sc.model.space();
  std::vector<StateIndex> st;
  for (const char* l : {"Crunchy", "Cocoa", "Sweet", "Melting", "Sweet"}) st.push_back(*space.index_of(l));
  const Trajectory t(st, {4.2, 3.1, 6.0, 2.5, 5.5}, space);
  // oracles.py (exact rational renormalization of the printed rows)
  CHECK(component_loglik(t, sc.model.component(0)) == Approx(-15.614311581957576455).epsilon(1e-13));
}

TEST_CASE("subject log-likelihood") {
  const auto m = smcmix::test::toy_model();
  const auto p = smcmix::test::toy_panel();
  const auto& c = m.component(1);
  const auto& trajs = p.subject(1);
  CHECK(subject_loglik(std::span(trajs.data(), 1), c) == component_loglik(trajs[0], c));
  const std::vector<Trajectory> three(3, trajs[0]);
  CHECK(subject_loglik(three, c) == Approx(3.0 * component_loglik(trajs[0], c)).epsilon(1e-15));
  const double prod = std::exp(component_loglik(trajs[0], c)) * std::exp(component_loglik(trajs[1], c));
  CHECK(rel_diff(std::exp(subject_loglik(trajs, c)), prod) <= 1e-12);
}

TEST_CASE("mixture log-likelihood") {
  const auto m = smcmix::test::toy_model();
  const auto p = smcmix::test::toy_panel();
  // oracles.py
  CHECK(mixture_loglik(p, m) == Approx(-48.204680981626492017).epsilon(1e-13));

  const MixtureModel one(m.space(), {1.0}, {m.component(0)});
  double sum = 0.0;
  for (const auto& s : p.subjects()) sum += subject_loglik(s, m.component(0));
  CHECK(mixture_loglik(p, one) == Approx(sum).epsilon(1e-14));

  const MixtureModel dup(m.space(), {0.5, 0.5}, {m.component(0), m.component(0)});
  CHECK(mixture_loglik(p, dup) == Approx(mixture_loglik(p, one)).epsilon(1e-14));
}

TEST_CASE("mixture log-likelihood is exactly permutation invariant") {
  auto sc = smcmix::test::fixture("two_chocolates_separated.json");
  sc.subjects = 40;
  Rng rng(11);
  const auto sim = simulate_panel(sc, rng);
  const auto& m = sc.model;
  const MixtureModel three(m.space(), {0.2, 0.5, 0.3},
                           {m.component(0), m.component(1), smcmix::test::fixture("chocolate_70_sweet.json").model.component(0)});
  const double base = mixture_loglik(sim.panel, three);
  std::vector<std::size_t> order{0, 1, 2};
  while (std::next_permutation(order.begin(), order.end()))
    CHECK(mixture_loglik(sim.panel, three.permuted(order)) == base);
}

TEST_CASE("dropping a subject removes exactly its contribution") {
  const auto m = smcmix::test::toy_model();
  const auto p = smcmix::test::toy_panel();
  const Matrix ll = subject_logliks(p, m);
  const std::vector<std::size_t> keep{0, 2};
  const std::vector<double> row{std::log(m.weight(0)) + ll(1, 0), std::log(m.weight(1)) + ll(1, 1)};
  CHECK(mixture_loglik(p, m) - mixture_loglik(p.subset(keep), m) ==
        Approx(log_sum_exp(row)).epsilon(1e-13));
}

TEST_CASE("log-sum-exp keeps extreme log-likelihoods finite") {
  const std::vector<double> w{0.3, 0.7};
  for (double shift : {0.0, -500.0, -1e4, -1e6}) {
    const Matrix ll = Matrix::from_rows({{shift, shift - 3.0}, {shift - 700.0, shift}, {shift, shift}});
    const double v = mixture_loglik(ll, w);
    CAPTURE(shift);
    CHECK(std::isfinite(v));
    CHECK(v == Approx(3.0 * shift + std::log(0.3 + 0.7 * std::exp(-3.0)) + std::log(0.7) + 0.0).epsilon(1e-12));
  }
  const Matrix impossible = Matrix::from_rows({{kNegInf, kNegInf}});
  CHECK(mixture_loglik(impossible, w) == kNegInf);
}

TEST_CASE("penalty") {
  const StateSpace s({"L", "J"});
  const Trajectory t({0, 1}, {1.0, 1.0}, s);
  // 200 trajectories of 2 visits: sum N = 400
  std::vector<std::vector<Trajectory>> subjects(100, std::vector<Trajectory>(2, t));
  const Panel p(s, subjects);
  CHECK(penalty_normalizer(p) == 1.0 / 20.0);

  const auto c = two_state(1, 1);
  const MixtureModel m(s, {0.5, 0.5}, {c, c});
  CHECK(shape_penalty(m, 0.05) == Approx(-0.05 * 2 * 2 * 1.0).epsilon(1e-15));
  CHECK(penalized_objective(p, m) == Approx(mixture_loglik(p, m) - 0.2).epsilon(1e-15));

  const auto sc = smcmix::test::fixture("two_chocolates_separated.json");
  auto small = sc;
  small.subjects = 20;
  Rng rng(5);
  const auto sim = simulate_panel(small, rng);
  // every shape in the fixture is >= 1
  CHECK(penalized_objective(sim.panel, sc.model) <= mixture_loglik(sim.panel, sc.model));
}

TEST_CASE("absorbing states count as visits in the normalizer") {
  const StateSpace s({"L", "J", "STOP"}, 2);
  const Panel p(s, {{Trajectory({0, 1, 2}, {1.0, 1.0, 0.0}, s)}});
  CHECK(penalty_normalizer(p) == 1.0 / std::sqrt(3.0));
}
