#pragma once

// Recovery metrics for simulation studies. Mixture labels are arbitrary, so
// every metric first aligns estimated components with the true ones.

#include <cstddef>
#include <span>
#include <vector>

#include "smcmix/core.hpp"

namespace smcmix {

/// Largest component count for which alignments are searched exhaustively.
inline constexpr std::size_t kMaxAlignComponents = 8;

/// Relative squared error ||truth - est||^2 / ||truth||^2.
double err_matrix(const Matrix& truth, const Matrix& est);
double err_vector(std::span<const double> truth, std::span<const double> est);

/// perm[g] is the estimated component matched to true component g; it
/// minimizes sum_g Err(P^g) + Err(alpha^g) over all G! permutations.
std::vector<std::size_t> align_components(const MixtureModel& truth, const MixtureModel& est);

enum class GammaParameter { kShape, kRate };

/// Pooled relative squared error of shapes or rates over all components and
/// non-absorbing states, after applying perm.
double err_gamma(const MixtureModel& truth, const MixtureModel& est, GammaParameter which,
                 std::span<const std::size_t> perm);
double err_gamma(const MixtureModel& truth, const MixtureModel& est, GammaParameter which);

/// Fraction of agreeing labels under the label permutation that maximizes
/// agreement.
double classification_rate(std::span<const std::size_t> truth, std::span<const std::size_t> est);

/// Estimated weights reordered so entry g belongs to true component g.
std::vector<double> pi_recovery(const MixtureModel& est, std::span<const std::size_t> perm);
std::vector<double> pi_recovery(const MixtureModel& truth, const MixtureModel& est);

}  // namespace smcmix
