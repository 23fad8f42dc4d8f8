#include "postcls/precision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "postcls/model_selection.hpp"
#include "postcls/post_estimation.hpp"

namespace postcls {

namespace {

const MissingNoise& require_missing(const SurrogateDataset& data) {
    const auto* miss = std::get_if<MissingNoise>(&data.noise);
    if (!miss) throw Error("precision estimation requires the missing-data noise model");
    if (data.p() < 2) throw Error("precision estimation requires p >= 2");
    return *miss;
}

IndexSet others(Index p, Index j) {
    IndexSet idx;
    idx.reserve(static_cast<std::size_t>(p - 1));
    for (Index k = 0; k < p; ++k)
        if (k != j) idx.push_back(k);
    return idx;
}

CorrectedMoments moments_from_sigma(const Matrix& sigma_hat, Index n, Index j) {
    const IndexSet rest = others(sigma_hat.rows(), j);
    CorrectedMoments m;
    m.gamma_mat = submatrix(sigma_hat, rest, rest);
    m.gamma_vec = submatrix(sigma_hat, rest, {j}).col(0);
    m.n = n;
    return m;
}

NeighborhoodFit fit_from_moments(const CorrectedMoments& m, Index p, Index j, int a_n,
                                 double radius) {
    if (a_n < 1 || a_n > p - 1) throw Error("neighborhood a_n must lie in [1, p - 1]");
    const auto sel = cs_screen(m.gamma_vec, a_n);
    SolverOptions opts;
    opts.radius = radius;
    const FitResult fit = post_cls_fit(m, sel.support, opts, true);

    NeighborhoodFit out;
    out.column = j;
    out.theta = fit.beta;
    out.fallback_used = fit.fallback_used;
    for (Index k : sel.support) out.support.push_back(k < j ? k : k + 1);
    return out;
}

}  // namespace

CorrectedMoments neighborhood_moments(const SurrogateDataset& data, Index j) {
    const Vector& rho = require_missing(data).rho;
    const Index p = data.p();
    if (j < 0 || j >= p) throw Error("column index out of range");

    CorrectedMoments m;
    m.gamma_mat = submatrix(corrected_covariance(data), others(p, j), others(p, j));
    m.n = data.n();
    m.gamma_vec.resize(p - 1);
    const double n = static_cast<double>(data.n());
    Index k = 0;
    for (Index c : others(p, j)) {
        const double cross = data.z.col(c).dot(data.z.col(j)) / n;
        m.gamma_vec[k++] = cross / ((1.0 - rho[c]) * (1.0 - rho[j]));
    }
    return m;
}

NeighborhoodFit fit_neighborhood(const SurrogateDataset& data, Index j, int a_n, double radius) {
    return fit_from_moments(neighborhood_moments(data, j), data.p(), j, a_n, radius);
}

NeighborhoodFit fit_neighborhood(const Matrix& sigma_hat, Index n, Index j, int a_n,
                                 double radius) {
    const Index p = sigma_hat.rows();
    if (j < 0 || j >= p) throw Error("column index out of range");
    return fit_from_moments(moments_from_sigma(sigma_hat, n, j), p, j, a_n, radius);
}

PrecisionEstimate assemble_precision(const std::vector<NeighborhoodFit>& fits,
                                     const Matrix& sigma_hat) {
    const Index p = sigma_hat.rows();
    if (sigma_hat.cols() != p) throw Error("Sigma_hat must be square");
    if (static_cast<Index>(fits.size()) != p) throw Error("need one neighborhood fit per column");

    PrecisionEstimate out;
    out.theta_raw = Matrix::Zero(p, p);
    out.d = Vector::Zero(p);
    out.neighborhood_supports.resize(static_cast<std::size_t>(p));
    out.fallback_used.assign(static_cast<std::size_t>(p), false);
    out.nonpositive_residual.assign(static_cast<std::size_t>(p), false);

    for (Index j = 0; j < p; ++j) {
        const NeighborhoodFit& fit = fits[static_cast<std::size_t>(j)];
        if (fit.column != j || fit.theta.size() != p - 1) {
            throw Error("neighborhood fit for column " + std::to_string(j) + " is malformed");
        }
        const IndexSet rest = others(p, j);
        double residual = sigma_hat(j, j);
        for (std::size_t k = 0; k < rest.size(); ++k)
            residual -= sigma_hat(j, rest[k]) * fit.theta[static_cast<Index>(k)];
        if (std::abs(residual) < 1e-10) {
            throw Error("residual variance degenerate at column " + std::to_string(j));
        }
        const double d = 1.0 / residual;
        out.d[j] = d;
        out.theta_raw(j, j) = d;
        for (std::size_t k = 0; k < rest.size(); ++k)
            out.theta_raw(rest[k], j) = -d * fit.theta[static_cast<Index>(k)];

        out.neighborhood_supports[static_cast<std::size_t>(j)] = fit.support;
        out.fallback_used[static_cast<std::size_t>(j)] = fit.fallback_used;
        out.nonpositive_residual[static_cast<std::size_t>(j)] = d <= 0.0;
    }
    out.theta = symmetrize(out.theta_raw);
    return out;
}

Matrix symmetrize(const Matrix& theta_raw) {
    if (theta_raw.rows() != theta_raw.cols()) throw Error("symmetrize needs a square matrix");
    return 0.5 * (theta_raw + theta_raw.transpose());
}

PrecisionEstimate estimate_precision(const SurrogateDataset& data, int a_n, double radius) {
    require_missing(data);
    const Matrix sigma_hat = corrected_covariance(data);
    const Index p = data.p();
    std::vector<NeighborhoodFit> fits;
    fits.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        try {
            fits.push_back(fit_neighborhood(sigma_hat, data.n(), j, a_n, radius));
        } catch (const Error& e) {
            throw Error("column " + std::to_string(j) + ": " + e.what());
        }
    }
    return assemble_precision(fits, sigma_hat);
}

int tune_neighborhood_a_n(const SurrogateDataset& data, const std::vector<int>& grid,
                          double radius, double test_fraction) {
    require_missing(data);
    if (grid.empty()) throw Error("a_n grid is empty");
    const auto [train, test] = split_dataset(data, test_fraction);
    const CorrectedMoments train_m = neighborhood_moments(train, 0);
    const CorrectedMoments test_m = neighborhood_moments(test, 0);

    double best_loss = std::numeric_limits<double>::infinity();
    int best = *std::min_element(grid.begin(), grid.end());
    for (int a_n : grid) {
        double loss = std::numeric_limits<double>::infinity();
        try {
            const NeighborhoodFit fit = fit_from_moments(train_m, data.p(), 0, a_n, radius);
            loss = corrected_loss(fit.theta, test_m);
        } catch (const Error&) {
        }
        if (loss < best_loss || (loss == best_loss && std::isfinite(loss) && a_n < best)) {
            best_loss = loss;
            best = a_n;
        }
    }
    return best;
}

}  // namespace postcls
