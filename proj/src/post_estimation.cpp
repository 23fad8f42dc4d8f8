#include "postcls/post_estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace postcls {

namespace {

IndexSet normalized(IndexSet idx, Index p) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (Index j : idx)
        if (j < 0 || j >= p) throw Error("support index " + std::to_string(j) + " out of range");
    return idx;
}

Vector restricted_gradient_fit(const CorrectedMoments& block, const SolverOptions& opts,
                               const Vector& start, int& iterations) {
    SolverOptions inner = opts;
    inner.lambda = 0.0;
    inner.warm_start = project_l1_ball(start, opts.radius);
    FitResult fit = l1_cls_fit(block, inner);
    iterations = fit.iterations;
    return fit.beta;
}

}  // namespace

FitResult post_cls_fit(const CorrectedMoments& m, const IndexSet& selected,
                       const SolverOptions& opts, bool constrain_to_radius) {
    const auto start = std::chrono::steady_clock::now();
    if (selected.empty()) throw Error("post-selection refit needs a non-empty support");
    const IndexSet sel = normalized(selected, m.p());

    CorrectedMoments block;
    block.gamma_mat = submatrix(m.gamma_mat, sel, sel);
    block.gamma_vec = subvector(m.gamma_vec, sel);
    block.n = m.n;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(block.gamma_mat);
    const Vector& evals = eig.eigenvalues();
    const double min_eval = evals.minCoeff();

    FitResult out;
    out.method = Method::CsPost;
    out.support_used = sel;
    Vector b;
    if (min_eval >= kPdThreshold) {
        b = block.gamma_mat.ldlt().solve(block.gamma_vec);
        out.path = SolvePath::LinearSystem;
    } else if (min_eval > -kPdThreshold) {
        // singular but PSD up to roundoff: minimum-norm solution
        const Vector inv = evals.unaryExpr(
            [](double v) { return std::abs(v) < kPdThreshold ? 0.0 : 1.0 / v; });
        b = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() *
            block.gamma_vec;
        out.path = SolvePath::PseudoInverse;
    } else {
        opts.validate();
        b = restricted_gradient_fit(block, opts, Vector::Zero(block.p()), out.iterations);
        out.path = SolvePath::ProjectedGradient;
    }

    if (constrain_to_radius && out.path != SolvePath::ProjectedGradient &&
        b.lpNorm<1>() > opts.radius) {
        opts.validate();
        b = restricted_gradient_fit(block, opts, b, out.iterations);
        out.path = SolvePath::ProjectedGradient;
    }
    if (!b.allFinite()) throw Error("post-selection refit produced non-finite coefficients");

    out.fallback_used = out.path != SolvePath::LinearSystem;
    out.beta = Vector::Zero(m.p());
    for (std::size_t k = 0; k < sel.size(); ++k) out.beta[sel[k]] = b[static_cast<Index>(k)];
    out.objective = corrected_loss(out.beta, m);
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

FitResult lasso_fit(const SurrogateDataset& data, double lambda, const SolverOptions& opts) {
    SolverOptions o = opts;
    o.lambda = lambda;
    FitResult fit = l1_cls_fit(uncorrected_moments(data), o);
    fit.method = Method::Lasso;
    return fit;
}

FitResult fit_with_rule(const SurrogateDataset& data, double value, const FitRule& rule) {
    switch (rule.method) {
        case Method::CsPost: {
            const auto start = std::chrono::steady_clock::now();
            const CorrectedMoments m = corrected_moments(data);
            const auto sel = cs_screen(m.gamma_vec, static_cast<int>(std::lround(value)));
            FitResult fit = post_cls_fit(m, sel.support, rule.opts);
            fit.wall_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return fit;
        }
        case Method::L1Cls: {
            SolverOptions o = rule.opts;
            o.lambda = value;
            return l1_cls_fit(corrected_moments(data), o);
        }
        case Method::Lasso:
            return lasso_fit(data, value, rule.opts);
    }
    throw Error("unknown fit rule");
}

CvResult cross_validate(const SurrogateDataset& train, const SurrogateDataset& test,
                        const std::vector<double>& grid, const FitRule& rule) {
    if (grid.empty()) throw Error("cross-validation grid is empty");
    if (train.p() != test.p()) throw Error("train and test sets differ in dimension");
    if (train.is_missing() != test.is_missing()) throw Error("train and test noise models differ");

    const bool ordinary = rule.method == Method::Lasso;
    const CorrectedMoments test_m = ordinary ? uncorrected_moments(test) : corrected_moments(test);

    CvResult out;
    out.losses.reserve(grid.size());
    const double inf = std::numeric_limits<double>::infinity();
    double best_loss = inf;
    out.best_value = *std::min_element(grid.begin(), grid.end());
    for (double value : grid) {
        double loss = inf;
        try {
            const FitResult fit = fit_with_rule(train, value, rule);
            loss = corrected_loss(fit.beta, test_m);
            if (!std::isfinite(loss)) loss = inf;
        } catch (const Error&) {
            loss = inf;
        }
        out.losses.push_back(loss);
        if (loss < best_loss || (loss == best_loss && loss < inf && value < out.best_value)) {
            best_loss = loss;
            out.best_value = value;
        }
    }
    return out;
}

std::pair<SurrogateDataset, SurrogateDataset> split_dataset(const SurrogateDataset& data,
                                                             double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test fraction must be in (0, 1)");
    const Index n = data.n();
    const Index n_test = static_cast<Index>(std::lround(static_cast<double>(n) * test_fraction));
    if (n_test < 1 || n_test >= n) throw Error("split leaves an empty train or test set");

    SurrogateDataset train = data.rows(0, n - n_test);
    SurrogateDataset test = data.rows(n - n_test, n);
    if (const auto* miss = std::get_if<MissingNoise>(&data.noise)) {
        train.noise = MissingNoise{estimate_missing_rates_or(*train.mask, miss->rho)};
        test.noise = MissingNoise{estimate_missing_rates_or(*test.mask, miss->rho)};
    }
    return {std::move(train), std::move(test)};
}

std::vector<double> lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i * 0.05);
    return grid;
}

std::vector<double> a_n_grid(Index n, Index p) {
    if (n < 1 || p < 1) throw Error("a_n grid needs positive n and p");
    Index upper = p;
    if (p > 1) {
        const double cap = std::floor(static_cast<double>(n) / std::log(static_cast<double>(p)));
        upper = std::min<Index>(p, static_cast<Index>(cap));
    }
    upper = std::max<Index>(upper, 1);
    std::vector<double> grid;
    for (Index a = 1; a <= upper; ++a) grid.push_back(static_cast<double>(a));
    return grid;
}

}  // namespace postcls
