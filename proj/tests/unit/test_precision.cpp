#include "doctest.h"

#include <random>

#include "postcls/harness.hpp"
#include "postcls/precision.hpp"
#include "postcls/simulation.hpp"
#include "support/oracles.hpp"

using namespace postcls;

namespace {

Matrix two_by_two(double off) {
    Matrix s(2, 2);
    s << 1.0, off, off, 1.0;
    return s;
}

NeighborhoodFit exact_fit(const Matrix& sigma, Index j) {
    const Index p = sigma.rows();
    IndexSet rest;
    for (Index k = 0; k < p; ++k)
        if (k != j) rest.push_back(k);
    NeighborhoodFit f;
    f.column = j;
    f.theta = submatrix(sigma, rest, rest).ldlt().solve(submatrix(sigma, rest, {j}).col(0));
    f.support = rest;
    return f;
}

}  // namespace

TEST_CASE("neighborhood_moments without missingness are the plain cross moments") {
    const auto data = gen_graph_data(two_by_two(0.3), 50, 1.0, 0.0, 0.0, 4);
    const auto m = neighborhood_moments(data, 0);
    CHECK(m.gamma_mat.rows() == 1);
    CHECK(m.gamma_mat(0, 0) == doctest::Approx(data.z.col(1).squaredNorm() / 50.0));
    CHECK(m.gamma_vec[0] == doctest::Approx(data.z.col(1).dot(data.z.col(0)) / 50.0));
}

TEST_CASE("neighborhood_moments apply both observation probabilities") {
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    BoolMatrix mask(3, 2);
    mask << true, true, true, false, true, true;
    Vector rho(2);
    rho << 0.1, 0.4;
    const auto data = make_missing_dataset(x, mask, Vector(), rho);
    const auto m = neighborhood_moments(data, 0);
    CHECK(m.gamma_mat(0, 0) == doctest::Approx((4 + 36) / 3.0 / 0.6));
    CHECK(m.gamma_vec[0] == doctest::Approx((2 + 30) / 3.0 / (0.6 * 0.9)));
    CHECK_THROWS_AS(neighborhood_moments(data, 2), Error);
}

TEST_CASE("neighborhood moments are unbiased for the regression target (Monte-Carlo)") {
    double mean = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto data = gen_graph_data(two_by_two(0.5), 4000, 1.0, 0.3, 0.3, 100 + rep);
        mean += neighborhood_moments(data, 0).gamma_vec[0] / 50.0;
    }
    CHECK(std::abs(mean - 0.5) <= 0.05);
}

TEST_CASE("fit_neighborhood") {
    // p = 2 with correlation 0.5: theta^1 = 0.5
    const auto pair = gen_graph_data(two_by_two(0.5), 4000, 1.0, 0.2, 0.2, 77);
    const auto fit = fit_neighborhood(pair, 0, 1, 10.0);
    CHECK(std::abs(fit.theta[0] - 0.5) <= 0.1);
    CHECK(fit.support == IndexSet{1});

    // independent coordinates
    const auto indep = gen_graph_data(Matrix::Identity(10, 10), 2000, 1.0, 0.2, 0.2, 78);
    for (Index j = 0; j < 10; ++j) {
        const auto f = fit_neighborhood(indep, j, 3, 10.0);
        CHECK(f.theta.lpNorm<Eigen::Infinity>() <= 0.1);
        CHECK(f.theta.size() == 9);
        CHECK(std::find(f.support.begin(), f.support.end(), j) == f.support.end());
    }

    // a_n = p - 1 selects every other column
    const auto full = fit_neighborhood(indep, 4, 9, 10.0);
    CHECK(full.support == IndexSet{0, 1, 2, 3, 5, 6, 7, 8, 9});

    CHECK_THROWS_AS(fit_neighborhood(indep, 0, 10, 10.0), Error);
    CHECK_THROWS_AS(fit_neighborhood(indep, 0, 0, 10.0), Error);
}

TEST_CASE("fit_neighborhood honors the l1 radius") {
    const auto data = gen_graph_data(two_by_two(0.8), 2000, 1.0, 0.0, 0.0, 79);
    const auto fit = fit_neighborhood(data, 0, 1, 0.3);
    CHECK(std::abs(fit.theta[0]) <= 0.3 + 1e-12);
    CHECK(fit.fallback_used);
}

TEST_CASE("assemble_precision worked examples") {
    std::vector<NeighborhoodFit> fits(3);
    for (Index j = 0; j < 3; ++j) fits[static_cast<std::size_t>(j)] = {j, Vector::Zero(2), {}, false};
    auto est = assemble_precision(fits, Matrix::Identity(3, 3));
    CHECK(est.theta_raw == Matrix::Identity(3, 3));

    std::vector<NeighborhoodFit> pair(2);
    pair[0] = {0, Vector::Constant(1, 0.5), {1}, false};
    pair[1] = {1, Vector::Constant(1, 0.5), {0}, false};
    est = assemble_precision(pair, two_by_two(0.5));
    Matrix expect(2, 2);
    expect << 4.0 / 3, -2.0 / 3, -2.0 / 3, 4.0 / 3;
    CHECK((est.theta_raw - expect).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((est.theta - expect).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(est.d[0] == doctest::Approx(4.0 / 3));

    pair[0].theta[0] = 2.0;  // 1 - 0.5 * 2 = 0
    CHECK_THROWS_WITH_AS(assemble_precision(pair, two_by_two(0.5)),
                         doctest::Contains("residual variance degenerate"), Error);

    pair[0].theta[0] = 3.0;  // negative residual: allowed, flagged
    est = assemble_precision(pair, two_by_two(0.5));
    CHECK(est.nonpositive_residual[0]);
    CHECK_FALSE(est.nonpositive_residual[1]);
}

TEST_CASE("assemble_precision reproduces the inverse from exact regressions") {
    for (Index p : {3, 6, 10}) {
        const auto band = generate_band_precision(p, 2);
        std::vector<NeighborhoodFit> fits;
        for (Index j = 0; j < p; ++j) fits.push_back(exact_fit(band.sigma, j));
        const auto est = assemble_precision(fits, band.sigma);
        const Matrix inverse = band.sigma.inverse();
        CHECK((est.theta_raw - inverse).cwiseAbs().maxCoeff() <= 1e-8);

        // residual-variance and coefficient bounds implied by the spectrum
        Eigen::SelfAdjointEigenSolver<Matrix> eig(band.sigma);
        const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
        for (Index j = 0; j < p; ++j) {
            CHECK(std::abs(est.d[j]) >= 1.0 / lmax - 1e-12);
            CHECK(std::abs(est.d[j]) <= 1.0 / lmin + 1e-12);
            CHECK(fits[static_cast<std::size_t>(j)].theta.norm() <= lmax / lmin + 1e-12);
        }
    }
}

TEST_CASE("symmetrize") {
    const Matrix sym = two_by_two(0.4);
    CHECK(symmetrize(sym) == sym);
    Matrix a(2, 2);
    a << 0, 2, 0, 0;
    Matrix expect(2, 2);
    expect << 0, 1, 1, 0;
    CHECK(symmetrize(a) == expect);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    Matrix r(5, 5);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j) r(i, j) = n01(rng);
    CHECK(symmetrize(symmetrize(r)) == symmetrize(r));
    CHECK_THROWS_AS(symmetrize(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("estimate_precision") {
    SUBCASE("independent coordinates") {
        const auto data = gen_graph_data(Matrix::Identity(20, 20), 2000, 1.0, 0.2, 0.2, 201);
        const auto est = estimate_precision(data, 3, 5.0);
        CHECK(column_norm_error(est.theta, Matrix::Identity(20, 20)) <= 0.5);
        CHECK(est.theta == est.theta.transpose());
        CHECK(est.neighborhood_supports.size() == 20);
    }
    SUBCASE("no missingness: close to the inverse sample covariance") {
        const auto band = generate_band_precision(10, 1);
        const auto data = gen_graph_data(band.sigma, 4000, 1.0, 0.0, 0.0, 202);
        const auto est = estimate_precision(data, 9, 100.0);
        const Matrix direct = corrected_covariance(data).inverse();
        CHECK(column_norm_error(est.theta, direct) <= 0.2);
    }
    SUBCASE("symmetrization does not move the estimate away from the truth") {
        const auto band = generate_band_precision(15, 2);
        for (int rep = 0; rep < 5; ++rep) {
            const auto data = gen_graph_data(band.sigma, 800, 1.0, 0.05, 0.5, 300 + rep);
            const auto est = estimate_precision(data, 5, 10.0);
            CHECK(column_norm_error(est.theta, band.theta) <=
                  (1 + 1e-12) * column_norm_error(est.theta_raw, band.theta));
        }
    }
    SUBCASE("requires missing-data input") {
        SurrogateDataset add;
        add.z = Matrix::Identity(3, 3);
        add.noise = AdditiveNoise{Matrix::Zero(3, 3)};
        CHECK_THROWS_AS(estimate_precision(add, 1, 1.0), Error);
    }
}

TEST_CASE("tune_neighborhood_a_n picks from the grid") {
    const auto band = generate_band_precision(20, 2);
    const auto data = gen_graph_data(band.sigma, 600, 1.0, 0.05, 0.5, 400);
    const int a_n = tune_neighborhood_a_n(data, {1, 2, 4, 8, 16}, 10.0);
    CHECK((a_n == 1 || a_n == 2 || a_n == 4 || a_n == 8 || a_n == 16));
    CHECK(a_n == tune_neighborhood_a_n(data, {1, 2, 4, 8, 16}, 10.0));
}
