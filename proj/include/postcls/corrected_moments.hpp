#pragma once

#include <cstddef>
#include <optional>
#include <variant>

#include "postcls/types.hpp"

namespace postcls {

/// Z = X + W with W ~ (0, sigma_w) independent of X.
struct AdditiveNoise {
    Matrix sigma_w;
};

/// Z = X (.) W with W_ij ~ Bernoulli(1 - rho_j); unobserved entries stored as 0.
struct MissingNoise {
    Vector rho;
};

using NoiseModel = std::variant<AdditiveNoise, MissingNoise>;

/// Observed covariates plus response. For missing data the mask is
/// authoritative and Z is zero wherever mask is false.
struct SurrogateDataset {
    Matrix z;
    std::optional<BoolMatrix> mask;
    Vector y;
    NoiseModel noise;

    Index n() const { return z.rows(); }
    Index p() const { return z.cols(); }
    bool is_missing() const { return std::holds_alternative<MissingNoise>(noise); }
    bool has_response() const { return y.size() == z.rows(); }

    /// Throws Error on any broken invariant. A dataset without a response
    /// (y empty) is accepted when `require_response` is false.
    void validate(bool require_response = true) const;

    /// Rows [begin, end) as a new dataset sharing the same noise model.
    SurrogateDataset rows(Index begin, Index end) const;
};

/// Builds a missing-data dataset from the mask, zero-filling unobserved entries.
SurrogateDataset make_missing_dataset(const Matrix& x, const BoolMatrix& mask, Vector y,
                                      Vector rho);

struct CorrectedMoments {
    Matrix gamma_mat;
    Vector gamma_vec;
    Index n = 0;

    Index p() const { return gamma_vec.size(); }
};

/// rho_hat[j] = 1 - (observed count in column j) / n. Throws on a fully missing column.
Vector estimate_missing_rates(const BoolMatrix& mask);

/// Like estimate_missing_rates, but a fully unobserved column takes its rate from
/// `fallback` instead of throwing.
Vector estimate_missing_rates_or(const BoolMatrix& mask, const Vector& fallback);

/// M_ij = (1 - rho_i)(1 - rho_j) off the diagonal, 1 - rho_i on it.
Matrix build_mask_matrix(const Vector& rho);

/// Bias-corrected (Gamma, gamma_hat) for the dataset's noise model.
CorrectedMoments corrected_moments(const SurrogateDataset& data);

/// Gamma alone (Z'Z/n - sigma_w, or Z'Z/n ./ M); the response may be absent.
Matrix corrected_covariance(const SurrogateDataset& data);

/// Plain (Z'Z/n, Z'y/n), ignoring the noise model.
CorrectedMoments uncorrected_moments(const SurrogateDataset& data);

/// 0.5 * beta' Gamma beta - gamma_hat' beta
double corrected_loss(const Vector& beta, const CorrectedMoments& m);

struct RseBounds {
    double kappa = 0.0;
    double phi = 0.0;
};

/// Restricted sparse eigenvalues of Gamma over supports T u E, |E| <= max_extra,
/// by exhaustive enumeration. Small instances only.
RseBounds rse_bounds(const CorrectedMoments& m, const IndexSet& base, int max_extra,
                     std::size_t max_supports = 1'000'000);

// Internal helpers shared across modules.
Matrix symmetrized(const Matrix& a);
Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols);
Vector subvector(const Vector& v, const IndexSet& idx);

}  // namespace postcls
