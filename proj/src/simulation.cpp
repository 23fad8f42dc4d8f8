#include "postcls/simulation.hpp"

#include <cmath>
#include <random>
#include <string>

#include "postcls/rng.hpp"

namespace postcls {

const char* to_string(NoiseKind kind) {
    return kind == NoiseKind::Additive ? "additive" : "missing";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "additive" || name == "add") return NoiseKind::Additive;
    if (name == "missing" || name == "miss") return NoiseKind::Missing;
    throw Error("unknown noise kind '" + name + "'");
}

void SimConfig::validate() const {
    if (n < 1 || p < 1) throw Error("n and p must be positive");
    if (s < 0 || s > p) throw Error("s must lie in [0, p]");
    if (!(sigma_eps >= 0.0)) throw Error("sigma_eps must be non-negative");
    if (!(ar_phi >= 0.0 && ar_phi < 1.0)) throw Error("ar_phi must lie in [0, 1)");
    if (!(c_w >= 0.0)) throw Error("c_w must be non-negative");
    if (!(0.0 <= rho_lo && rho_lo <= rho_hi && rho_hi < 1.0)) {
        throw Error("missing-rate range must satisfy 0 <= lo <= hi < 1");
    }
    if (!(c_x > 0.0)) throw Error("c_x must be positive");
}

Vector gen_beta0(Index p, Index s, std::uint64_t seed) {
    if (s < 0 || s > p) throw Error("s must lie in [0, p]");
    CounterRng rng(derive_seed(seed, "beta0"));
    std::bernoulli_distribution sign(0.5);
    std::uniform_real_distribution<double> magnitude(1.0, 4.0);
    Vector beta = Vector::Zero(p);
    for (Index j = 0; j < s; ++j) {
        const double sgn = sign(rng) ? 1.0 : -1.0;
        double mag = magnitude(rng);
        while (mag <= 1.0) mag = magnitude(rng);  // open interval
        beta[j] = sgn * mag;
    }
    return beta;
}

Matrix ar1_covariance(Index p, double phi, double scale) {
    if (!(std::abs(phi) < 1.0)) throw Error("AR(1) coefficient must satisfy |phi| < 1");
    if (!(scale > 0.0)) throw Error("AR(1) scale must be positive");
    Matrix sigma(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            sigma(i, j) = scale * std::pow(phi, static_cast<double>(std::abs(i - j)));
    return sigma;
}

Matrix sample_gaussian(Index n, const Matrix& sigma, std::uint64_t seed) {
    if (sigma.rows() != sigma.cols()) throw Error("covariance must be square");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw Error("covariance not PD");
    const Index p = sigma.rows();

    CounterRng rng(seed);
    std::normal_distribution<double> normal;
    Matrix g(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) g(i, j) = normal(rng);
    return g * llt.matrixL().transpose();
}

std::pair<Vector, BoolMatrix> draw_missingness(Index n, Index p, double lo, double hi,
                                               std::uint64_t seed) {
    if (!(0.0 <= lo && lo <= hi && hi < 1.0)) {
        throw Error("missing-rate range must satisfy 0 <= lo <= hi < 1");
    }
    CounterRng rate_rng(derive_seed(seed, "rho"));
    std::uniform_real_distribution<double> rate(lo, hi);
    Vector rho(p);
    for (Index j = 0; j < p; ++j) rho[j] = lo == hi ? lo : rate(rate_rng);

    CounterRng mask_rng(derive_seed(seed, "mask"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BoolMatrix mask(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) mask(i, j) = unit(mask_rng) < 1.0 - rho[j];
    return {rho, mask};
}

SimulatedRegression gen_regression(const SimConfig& config) {
    config.validate();
    SimulatedRegression out;
    out.beta0 = gen_beta0(config.p, config.s, config.seed);
    for (Index j = 0; j < config.s; ++j) out.support.push_back(j);

    out.x = sample_gaussian(config.n, Matrix::Identity(config.p, config.p),
                            derive_seed(config.seed, "X"));
    Vector y = out.x * out.beta0;
    if (config.sigma_eps > 0.0) {
        CounterRng rng(derive_seed(config.seed, "eps"));
        std::normal_distribution<double> normal(0.0, config.sigma_eps);
        for (Index i = 0; i < config.n; ++i) y[i] += normal(rng);
    }

    if (config.noise_kind == NoiseKind::Additive) {
        Matrix sigma_w = Matrix::Zero(config.p, config.p);
        out.data.z = out.x;
        if (config.c_w > 0.0) {
            sigma_w = ar1_covariance(config.p, config.ar_phi, config.c_w);
            out.data.z += sample_gaussian(config.n, sigma_w, derive_seed(config.seed, "W"));
        }
        out.data.y = std::move(y);
        out.data.noise = AdditiveNoise{std::move(sigma_w)};
    } else {
        auto [rho, mask] = draw_missingness(config.n, config.p, config.rho_lo, config.rho_hi,
                                            derive_seed(config.seed, "missing"));
        out.data = make_missing_dataset(out.x, mask, std::move(y), std::move(rho));
    }
    return out;
}

Index default_graph_structure(Index p) {
    return std::max<Index>(1, static_cast<Index>(std::lround(static_cast<double>(p) / 20.0)));
}

namespace {

PrecisionPair normalize_precision(Matrix theta) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(theta, Eigen::EigenvaluesOnly);
    const double min_eval = eig.eigenvalues().minCoeff();
    if (min_eval <= 0.0) theta.diagonal().array() += std::abs(min_eval) + 0.1;

    const Matrix sigma = theta.llt().solve(Matrix::Identity(theta.rows(), theta.cols()));
    const Vector scale = sigma.diagonal().cwiseSqrt();  // Sigma_ii^{1/2}
    PrecisionPair out;
    out.sigma = scale.cwiseInverse().asDiagonal() * sigma * scale.cwiseInverse().asDiagonal();
    out.sigma = symmetrized(out.sigma);
    out.sigma.diagonal().setOnes();
    out.theta = symmetrized(scale.asDiagonal() * theta * scale.asDiagonal());
    return out;
}

}  // namespace

PrecisionPair generate_band_precision(Index p, Index bandwidth) {
    if (p < 1) throw Error("p must be positive");
    if (bandwidth < 0 || (bandwidth >= p && p > 1)) throw Error("bandwidth must lie in [0, p)");
    Matrix theta = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            const Index lag = std::abs(i - j);
            if (lag == 0) theta(i, j) = 1.0;
            else if (lag <= bandwidth) theta(i, j) = std::pow(0.5, static_cast<double>(lag));
        }
    }
    return normalize_precision(std::move(theta));
}

PrecisionPair generate_cluster_precision(Index p, Index n_clusters) {
    if (n_clusters < 1 || n_clusters > p) throw Error("n_clusters must lie in [1, p]");
    Matrix theta = Matrix::Identity(p, p);
    auto block = [&](Index i) { return i * n_clusters / p; };
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            if (i != j && block(i) == block(j)) theta(i, j) = 0.5;
    return normalize_precision(std::move(theta));
}

SurrogateDataset gen_graph_data(const Matrix& sigma, Index n, double c_x, double rho_lo,
                                double rho_hi, std::uint64_t seed) {
    if (!(c_x > 0.0)) throw Error("c_x must be positive");
    const Matrix x = sample_gaussian(n, c_x * sigma, derive_seed(seed, "X"));
    auto [rho, mask] = draw_missingness(n, sigma.rows(), rho_lo, rho_hi,
                                        derive_seed(seed, "missing"));
    return make_missing_dataset(x, mask, Vector(), std::move(rho));
}

}  // namespace postcls
