#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "smcmix/core.hpp"
#include "smcmix/io.hpp"
#include "smcmix/sim.hpp"

namespace smcmix::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SMCMIX_DATA_DIR) / name;
}

inline Scenario fixture(const std::string& name) { return read_scenario(data_path(name)).scenario; }

inline StateSpace abc() { return StateSpace({"A", "B", "C"}); }

inline StateSpace abc_stop() { return StateSpace({"A", "B", "C", "STOP"}, 3); }

inline std::vector<GammaParams> gammas(std::initializer_list<std::pair<double, double>> ps) {
  std::vector<GammaParams> out;
  for (auto [a, l] : ps) out.emplace_back(a, l);
  return out;
}

/// The three-state two-component model used by the arbitrary-precision
/// oracle script.
inline MixtureModel toy_model() {
  const StateSpace s = abc();
  ComponentParams c1(s, {0.6, 0.3, 0.1},
                     Matrix::from_rows({{0, 0.7, 0.3}, {0.5, 0, 0.5}, {0.9, 0.1, 0}}),
                     gammas({{2, 1}, {1.5, 0.5}, {3, 2}}));
  ComponentParams c2(s, {0.2, 0.2, 0.6},
                     Matrix::from_rows({{0, 0.2, 0.8}, {0.4, 0, 0.6}, {0.3, 0.7, 0}}),
                     gammas({{1, 0.4}, {4, 1}, {0.8, 0.3}}));
  return MixtureModel(s, {0.35, 0.65}, {c1, c2});
}

inline Panel toy_panel() {
  const StateSpace s = abc();
  auto t = [&](std::vector<StateIndex> st, std::vector<double> d) {
    return Trajectory(std::move(st), std::move(d), s);
  };
  return Panel(s, {
                      {t({0, 1, 2}, {1.5, 2.0, 0.7}), t({0, 2}, {2.2, 1.1})},
                      {t({2, 0, 1, 0}, {3.3, 0.4, 2.6, 1.9}), t({1, 2, 1}, {5.0, 0.9, 4.1})},
                      {t({1, 0}, {0.3, 6.2}), t({2, 1, 0, 2}, {1.4, 2.8, 0.6, 2.3})},
                  });
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace smcmix::test
