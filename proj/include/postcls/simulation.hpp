#pragma once

#include <cstdint>
#include <utility>

#include "postcls/corrected_moments.hpp"
#include "postcls/types.hpp"

namespace postcls {

enum class NoiseKind { Additive, Missing };

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Regression design: standard normal X, y = X beta0 + N(0, sigma_eps^2), and
/// either Z = X + W with W ~ N(0, c_w * AR1(ar_phi)) or Bernoulli masking with
/// per-column rates drawn from Uniform(rho_lo, rho_hi).
struct SimConfig {
    Index n = 100;
    Index p = 100;
    Index s = 4;
    NoiseKind noise_kind = NoiseKind::Additive;
    double sigma_eps = 0.25;
    double ar_phi = 0.5;
    double c_w = 0.25;
    double rho_lo = 0.05;
    double rho_hi = 0.75;
    double c_x = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// s nonzero leading entries with sign ~ Bernoulli(1/2) and magnitude ~ U(1, 4).
Vector gen_beta0(Index p, Index s, std::uint64_t seed);

/// scale * phi^|i-j|
Matrix ar1_covariance(Index p, double phi, double scale);

/// n i.i.d. rows from N(0, sigma), as (standard normal) * L' with sigma = L L'.
Matrix sample_gaussian(Index n, const Matrix& sigma, std::uint64_t seed);

/// Per-column rates from U(lo, hi) and an i.i.d. Bernoulli(1 - rho_j) observation mask.
std::pair<Vector, BoolMatrix> draw_missingness(Index n, Index p, double lo, double hi,
                                               std::uint64_t seed);

struct SimulatedRegression {
    SurrogateDataset data;  // missing case carries the true rates
    Matrix x;
    Vector beta0;
    IndexSet support;
};

SimulatedRegression gen_regression(const SimConfig& config);

struct PrecisionPair {
    Matrix theta;
    Matrix sigma;
};

/// Default structure size for band and cluster graphs: max(1, round(p / 20)).
Index default_graph_structure(Index p);

/// Band graph with 0.5^|i-j| within the band, repaired to PD and rescaled so that
/// diag(Sigma) = 1. bandwidth = 0 gives the identity.
PrecisionPair generate_band_precision(Index p, Index bandwidth);

/// Block-diagonal graph with 0.5 inside equal-size blocks, normalized as the band graph.
PrecisionPair generate_cluster_precision(Index p, Index n_clusters);

/// X ~ N(0, c_x * sigma) with missingness; no response.
SurrogateDataset gen_graph_data(const Matrix& sigma, Index n, double c_x, double rho_lo,
                                double rho_hi, std::uint64_t seed);

}  // namespace postcls
