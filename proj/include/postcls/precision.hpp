#pragma once

#include <vector>

#include "postcls/corrected_moments.hpp"
#include "postcls/types.hpp"

namespace postcls {

/// Regression of column j on the remaining p - 1 columns.
struct NeighborhoodFit {
    Index column = 0;
    Vector theta;        // length p - 1, in the order of the columns other than j
    IndexSet support;    // selected columns, in original 0-based column indices
    bool fallback_used = false;
};

struct PrecisionEstimate {
    Matrix theta;      // symmetrized estimate
    Matrix theta_raw;  // column-assembled estimate before symmetrization
    Vector d;          // reciprocal residual variances
    std::vector<IndexSet> neighborhood_supports;
    std::vector<bool> fallback_used;
    std::vector<bool> nonpositive_residual;  // d_j <= 0; legal but suspicious
};

/// Corrected moments of column j against the others, for missing-data input:
/// Gamma^j = Sigma_hat without row/column j, and
/// gamma^j = (Z_{-j}' Z_j / n) ./ ((1 - rho_{-j}) (1 - rho_j)).
CorrectedMoments neighborhood_moments(const SurrogateDataset& data, Index j);

/// CS screening at level a_n followed by the restricted refit on the l1 ball.
NeighborhoodFit fit_neighborhood(const SurrogateDataset& data, Index j, int a_n, double radius);

/// Same fit from precomputed Sigma_hat (shared across all columns).
NeighborhoodFit fit_neighborhood(const Matrix& sigma_hat, Index n, Index j, int a_n,
                                 double radius);

/// Column j gets d_j on the diagonal and -d_j * theta^j elsewhere, with
/// d_j = 1 / (Sigma_jj - Sigma_{j,-j} theta^j).
PrecisionEstimate assemble_precision(const std::vector<NeighborhoodFit>& fits,
                                     const Matrix& sigma_hat);

/// (A + A') / 2
Matrix symmetrize(const Matrix& theta_raw);

PrecisionEstimate estimate_precision(const SurrogateDataset& data, int a_n, double radius);

/// Chooses a shared a_n by train/test corrected loss of the first column's
/// neighborhood regression.
int tune_neighborhood_a_n(const SurrogateDataset& data, const std::vector<int>& grid,
                          double radius, double test_fraction = 0.5);

}  // namespace postcls
