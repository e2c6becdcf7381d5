#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace smcmix {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Sum in ascending order. The result depends only on the multiset of
/// values, so reductions over mixture components are exactly invariant to
/// component relabeling.
inline double sorted_sum(std::span<const double> values) {
  std::vector<double> tmp(values.begin(), values.end());
  std::sort(tmp.begin(), tmp.end());
  double s = 0.0;
  for (double v : tmp) s += v;
  return s;
}

/// ln sum exp(values); -inf if every value is -inf. Order-independent.
inline double log_sum_exp(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  std::vector<double> shifted;
  shifted.reserve(values.size());
  for (double v : values) shifted.push_back(std::exp(v - hi));
  return hi + std::log(sorted_sum(shifted));
}

}  // namespace smcmix
