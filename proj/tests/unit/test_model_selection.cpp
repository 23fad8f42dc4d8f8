#include "doctest.h"

#include <random>

#include "postcls/model_selection.hpp"
#include "support/oracles.hpp"

using namespace postcls;

namespace {

CorrectedMoments moments(Matrix g, Vector v) {
    CorrectedMoments m;
    m.gamma_mat = std::move(g);
    m.gamma_vec = std::move(v);
    m.n = 100;
    return m;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("cs_screen keeps the largest magnitudes") {
    CHECK(cs_screen(vec({0.1, -3, 2, 0.5}), 2).support == IndexSet{1, 2});
    CHECK(cs_screen(vec({0.1, -3, 2, 0.5}), 4).support == IndexSet{0, 1, 2, 3});
    CHECK(cs_screen(vec({0.1, -3, 2, 0.5}), 9).support.size() == 4);
    CHECK(cs_screen(vec({1, 1, 0}), 1).support == IndexSet{0});
    CHECK_THROWS_WITH_AS(cs_screen(vec({1, 2}), 0), doctest::Contains("empty selection"), Error);
}

TEST_CASE("cs_screen: size and invariance under positive rescaling") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = 1 + trial % 17;
        Vector g(p);
        for (Index j = 0; j < p; ++j) g[j] = n01(rng);
        const int a_n = 1 + trial % 20;
        const auto sel = cs_screen(g, a_n);
        CHECK(static_cast<Index>(sel.support.size()) == std::min<Index>(a_n, p));
        CHECK(cs_screen(scale(rng) * g, a_n).support == sel.support);
    }
}

TEST_CASE("project_l1_ball examples") {
    CHECK(project_l1_ball(vec({0.3, -0.2}), 1.0) == vec({0.3, -0.2}));
    CHECK(project_l1_ball(vec({3, 0}), 1.0).isApprox(vec({1, 0})));
    CHECK(project_l1_ball(vec({2, 1}), 1.0).isApprox(vec({1, 0})));
    CHECK_THROWS_AS(project_l1_ball(vec({1, 1}), 0.0), Error);
}

TEST_CASE("project_l1_ball: dense grid oracle at p = 2") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector v = vec({u(rng), u(rng)});
        const double r = 1.0;
        // minimize the distance over a fine grid of the ball's boundary and interior
        Vector best(2);
        double best_d = 1e300;
        const int k = 4000;
        for (int a = 0; a <= k; ++a) {
            // boundary points parametrized by t in [0, 4): the ball is a rotated square
            const double t = 4.0 * a / k;
            const int side = std::min(3, static_cast<int>(t));
            const double f = t - side;
            const double sx[] = {1 - f, -f, -1 + f, f}, sy[] = {f, 1 - f, -f, -1 + f};
            const Vector w = vec({r * sx[side], r * sy[side]});
            const double d = (w - v).norm();
            if (d < best_d) best_d = d, best = w;
        }
        if (oracle::l1(v) <= r) best = v;
        CHECK((project_l1_ball(v, r) - best).lpNorm<Eigen::Infinity>() <= 1e-3);
    }
}

TEST_CASE("project_l1_ball properties") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> ur(0.1, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index p = 1 + trial % 30;
        Vector v(p);
        for (Index j = 0; j < p; ++j) v[j] = 3.0 * n01(rng);
        const double r = ur(rng);
        const Vector once = project_l1_ball(v, r);
        CHECK(once.lpNorm<1>() <= r + 1e-12);
        if (v.lpNorm<1>() > r) CHECK(std::abs(once.lpNorm<1>() - r) <= 1e-10);
        CHECK((project_l1_ball(once, r) - once).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK((once - oracle::bisection_l1_projection(v, r)).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("spectral_radius") {
    Vector d = vec({-3.0, 1.0, 2.0});
    CHECK(spectral_radius(d.asDiagonal().toDenseMatrix()) == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(spectral_radius(Matrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("l1_cls_fit on identity Gamma") {
    SolverOptions opts;
    opts.radius = 10.0;
    auto fit = l1_cls_fit(moments(Matrix::Identity(3, 3), vec({0.9, 0, 0})), opts);
    CHECK((fit.beta - vec({0.9, 0, 0})).norm() <= 1e-10);

    opts.lambda = 0.3;
    const auto m = moments(Matrix::Identity(3, 3), vec({0.9, 0.2, 0}));
    fit = l1_cls_fit(m, opts);
    CHECK((fit.beta - vec({0.6, 0, 0})).norm() <= 1e-10);
    CHECK(fit.converged);
    CHECK(fit.support_used == IndexSet{0});

    // grid search over the penalized objective agrees with the soft-threshold value
    auto f = [&](const Vector& b) {
        return oracle::naive_loss(m.gamma_mat, m.gamma_vec, b) + 0.3 * oracle::l1(b);
    };
    const Vector grid_min = oracle::zoom_grid_search(f, Vector::Zero(3), 2.0);
    CHECK((grid_min - fit.beta).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("l1_cls_fit matches a multi-start brute-force oracle at p = 5") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix g = oracle::random_pd(5, rng, 0.05, 3.0);
        Vector v(5);
        for (Index j = 0; j < 5; ++j) v[j] = 2.0 * n01(rng);
        SolverOptions opts;
        opts.lambda = 0.1;
        opts.radius = 2.0;
        opts.rel_tol = 1e-10;
        opts.max_iters = 100000;
        const auto fit = l1_cls_fit(moments(g, v), opts);
        const double best = oracle::brute_force_l1_objective(g, v, 0.1, 2.0, 1000 + trial, 30);
        CHECK(std::abs(fit.objective - best) <= 1e-3);
        CHECK(fit.beta.lpNorm<1>() <= 2.0 + 1e-12);
    }
}

TEST_CASE("l1_cls_fit without penalty on PD Gamma solves the linear system") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix g = oracle::random_pd(8, rng, 0.5, 4.0);
        Vector v(8);
        for (Index j = 0; j < 8; ++j) v[j] = n01(rng);
        const Vector exact = g.ldlt().solve(v);
        SolverOptions opts;
        opts.radius = 10.0 * v.lpNorm<1>() / 0.5;
        opts.rel_tol = 1e-14;
        opts.max_iters = 100000;
        const auto fit = l1_cls_fit(moments(g, v), opts);
        CHECK((fit.beta - exact).norm() <= 1e-5 * std::max(1.0, exact.norm()));
    }
}

TEST_CASE("l1_cls_fit objective is non-increasing for PSD Gamma under the fixed step") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 10; ++trial) {
        const Index p = 20;
        Matrix a(40, p);
        for (Index i = 0; i < 40; ++i)
            for (Index j = 0; j < p; ++j) a(i, j) = n01(rng);
        const Matrix g = a.transpose() * a / 40.0;
        Vector v(p);
        for (Index j = 0; j < p; ++j) v[j] = n01(rng);
        SolverOptions opts;
        opts.lambda = 0.05 * (trial % 4);
        opts.radius = 3.0;
        opts.record_trace = true;
        const auto fit = l1_cls_fit(moments(g, v), opts);
        for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
            CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("l1_cls_fit on indefinite Gamma stays in the ball and reports the best iterate") {
    Matrix g = Matrix::Identity(3, 3);
    g(2, 2) = -0.5;
    SolverOptions opts;
    opts.radius = 2.0;
    opts.record_trace = true;
    const auto fit = l1_cls_fit(moments(g, vec({0.2, 0.1, 0.05})), opts);
    CHECK(fit.beta.lpNorm<1>() <= 2.0 + 1e-12);
    CHECK(std::abs(fit.beta[2]) > 1.0);  // negative curvature pushes toward the boundary
    CHECK(fit.objective == doctest::Approx(*std::min_element(fit.objective_trace.begin(),
                                                             fit.objective_trace.end())));
}

TEST_CASE("l1_cls_fit backtracking agrees with the fixed step") {
    std::mt19937_64 rng(41);
    const Matrix g = oracle::random_pd(6, rng, 0.2, 5.0);
    const Vector v = vec({1, -2, 0.5, 0, 3, -1});
    SolverOptions opts;
    opts.lambda = 0.2;
    opts.radius = 4.0;
    opts.rel_tol = 1e-12;
    const auto fixed = l1_cls_fit(moments(g, v), opts);
    opts.step_rule = StepRule::Backtracking;
    const auto back = l1_cls_fit(moments(g, v), opts);
    CHECK(std::abs(fixed.objective - back.objective) <= 1e-8);
}

TEST_CASE("l1_cls_fit reports divergence and rejects bad options") {
    SolverOptions opts;
    opts.radius = 1e300;
    CHECK_THROWS_WITH_AS(l1_cls_fit(moments(Matrix::Identity(2, 2), vec({1e200, 1e200})), opts),
                         doctest::Contains("diverged"), Error);

    opts.radius = -1.0;
    CHECK_THROWS_AS(l1_cls_fit(moments(Matrix::Identity(2, 2), vec({1, 1})), opts), Error);
    opts.radius = 1.0;
    opts.max_iters = 0;
    CHECK_THROWS_AS(l1_cls_fit(moments(Matrix::Identity(2, 2), vec({1, 1})), opts), Error);
}

TEST_CASE("support thresholds magnitudes") {
    CHECK(support(vec({0, 1e-12, 0.5}), 1e-8) == IndexSet{2});
    CHECK(support(Vector::Zero(4), 1e-8).empty());
    CHECK(support(vec({-2, 3}), 0.0) == IndexSet{0, 1});
    CHECK(default_support_tol(vec({-20, 3})) == doctest::Approx(2e-5));
}
