#include "doctest.h"

#include <random>

#include "postcls/corrected_moments.hpp"
#include "support/oracles.hpp"

using namespace postcls;

namespace {

SurrogateDataset additive(Matrix z, Vector y, Matrix sigma_w) {
    SurrogateDataset d;
    d.z = std::move(z);
    d.y = std::move(y);
    d.noise = AdditiveNoise{std::move(sigma_w)};
    return d;
}

BoolMatrix column_mask(std::initializer_list<bool> col) {
    BoolMatrix m(static_cast<Index>(col.size()), 1);
    Index i = 0;
    for (bool b : col) m(i++, 0) = b;
    return m;
}

}  // namespace

TEST_CASE("estimate_missing_rates counts observed entries") {
    CHECK(estimate_missing_rates(column_mask({true, true, true, true}))[0] == 0.0);
    CHECK(estimate_missing_rates(column_mask({true, false, true, false}))[0] == 0.5);
    CHECK_THROWS_WITH_AS(estimate_missing_rates(column_mask({false, false})),
                         doctest::Contains("degenerate column"), Error);

    Vector fallback(1);
    fallback << 0.3;
    CHECK(estimate_missing_rates_or(column_mask({false, false}), fallback)[0] == 0.3);
}

TEST_CASE("build_mask_matrix") {
    Vector rho(2);
    rho << 0.5, 0.5;
    Matrix expect(2, 2);
    expect << 0.5, 0.25, 0.25, 0.5;
    CHECK(build_mask_matrix(rho) == expect);

    CHECK(build_mask_matrix(Vector::Zero(4)) == Matrix::Ones(4, 4));

    rho << 0.0, 0.5;
    expect << 1.0, 0.5, 0.5, 0.5;
    CHECK(build_mask_matrix(rho) == expect);

    rho << 0.2, 1.0;
    CHECK_THROWS_AS(build_mask_matrix(rho), Error);
}

TEST_CASE("additive corrected moments on a 2x2 design") {
    Vector y(2);
    y << 1.0, 0.0;
    auto m = corrected_moments(additive(Matrix::Identity(2, 2), y, Matrix::Zero(2, 2)));
    CHECK(m.gamma_mat == 0.5 * Matrix::Identity(2, 2));
    CHECK(m.gamma_vec == Vector::Unit(2, 0) * 0.5);

    m = corrected_moments(additive(Matrix::Identity(2, 2), y, 0.25 * Matrix::Identity(2, 2)));
    CHECK(m.gamma_mat == 0.25 * Matrix::Identity(2, 2));
}

TEST_CASE("zero noise reduces to plain moments") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    Matrix z(30, 4);
    Vector y(30);
    for (Index i = 0; i < 30; ++i) {
        y[i] = n01(rng);
        for (Index j = 0; j < 4; ++j) z(i, j) = n01(rng);
    }
    const auto plain = uncorrected_moments(additive(z, y, Matrix::Zero(4, 4)));
    const Matrix gram = z.transpose() * z / 30.0;
    CHECK(plain.gamma_mat == 0.5 * (gram + gram.transpose()));

    CHECK(corrected_moments(additive(z, y, Matrix::Zero(4, 4))).gamma_mat == plain.gamma_mat);

    const BoolMatrix all = BoolMatrix::Constant(30, 4, true);
    const auto miss = corrected_moments(make_missing_dataset(z, all, y, Vector::Zero(4)));
    CHECK(miss.gamma_mat == plain.gamma_mat);
    CHECK(miss.gamma_vec == plain.gamma_vec);
}

TEST_CASE("missing moments divide by the mask matrix") {
    Matrix x(4, 2);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    BoolMatrix mask(4, 2);
    mask << true, true, false, true, true, false, true, true;
    Vector y(4);
    y << 1, 1, 1, 1;
    Vector rho(2);
    rho << 0.25, 0.25;
    const auto data = make_missing_dataset(x, mask, y, rho);
    CHECK(data.z(1, 0) == 0.0);
    CHECK(data.z(2, 1) == 0.0);

    const auto m = corrected_moments(data);
    // observed pairs: rows 0 and 3 for the cross term
    CHECK(m.gamma_mat(0, 1) == doctest::Approx((1 * 2 + 7 * 8) / 4.0 / (0.75 * 0.75)));
    CHECK(m.gamma_mat(0, 0) == doctest::Approx((1 + 25 + 49) / 4.0 / 0.75));
    CHECK(m.gamma_vec[1] == doctest::Approx((2 + 4 + 8) / 4.0 / 0.75));
    CHECK(m.gamma_mat == m.gamma_mat.transpose());
}

TEST_CASE("dataset invariants are enforced") {
    SurrogateDataset d = additive(Matrix::Zero(3, 2), Vector::Zero(2), Matrix::Zero(2, 2));
    CHECK_THROWS_AS(d.validate(), Error);

    Matrix asym = Matrix::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(corrected_moments(additive(Matrix::Zero(3, 2), Vector::Zero(3), asym)), Error);

    Matrix x = Matrix::Ones(2, 2);
    BoolMatrix mask = BoolMatrix::Constant(2, 2, true);
    auto miss = make_missing_dataset(x, mask, Vector::Zero(2), Vector::Zero(2));
    (*miss.mask)(0, 0) = false;  // Z(0,0) is 1, not zero-filled
    CHECK_THROWS_WITH_AS(miss.validate(), doctest::Contains("zero-filled"), Error);

    auto bad_rho = make_missing_dataset(x, mask, Vector::Zero(2), Vector::Ones(2));
    CHECK_THROWS_AS(corrected_moments(bad_rho), Error);
}

TEST_CASE("corrected_loss") {
    CorrectedMoments m;
    m.gamma_mat = Matrix::Identity(3, 3);
    m.gamma_vec = Vector::Zero(3);
    CHECK(corrected_loss(Vector::Zero(3), m) == 0.0);
    CHECK(corrected_loss(Vector::Unit(3, 0), m) == 0.5);
    m.gamma_vec = Vector::Unit(3, 0);
    CHECK(corrected_loss(Vector::Unit(3, 0), m) == -0.5);
    CHECK_THROWS_AS(corrected_loss(Vector::Zero(2), m), Error);
}

TEST_CASE("corrected_loss matches an explicit triple loop") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 50; ++trial) {
        const Index p = 1 + trial % 5;
        Matrix a(p, p);
        Vector g(p), b(p);
        for (Index i = 0; i < p; ++i) {
            g[i] = n01(rng);
            b[i] = n01(rng);
            for (Index j = 0; j < p; ++j) a(i, j) = n01(rng);
        }
        CorrectedMoments m;
        m.gamma_mat = 0.5 * (a + a.transpose());  // may be indefinite
        m.gamma_vec = g;
        CHECK(std::abs(corrected_loss(b, m) - oracle::naive_loss(m.gamma_mat, g, b)) <= 1e-12);
    }
}

TEST_CASE("rse_bounds by enumeration") {
    CorrectedMoments m;
    m.gamma_mat = Matrix::Identity(4, 4);
    m.gamma_vec = Vector::Zero(4);
    auto b = rse_bounds(m, {1}, 1);
    CHECK(b.kappa == doctest::Approx(1.0));
    CHECK(b.phi == doctest::Approx(1.0));

    Vector diag(3);
    diag << 2.0, 0.5, 1.0;
    m.gamma_mat = diag.asDiagonal();
    m.gamma_vec = Vector::Zero(3);
    b = rse_bounds(m, {0}, 1);  // supports {1}, {1,2}, {1,3}
    CHECK(b.kappa == doctest::Approx(0.5));
    CHECK(b.phi == doctest::Approx(2.0));

    diag << 1.0, -0.3, 1.0;
    m.gamma_mat = diag.asDiagonal();
    CHECK(rse_bounds(m, {0}, 1).kappa == doctest::Approx(-0.3));

    CHECK_THROWS_AS(rse_bounds(m, {0, 1}, 2), Error);

    CorrectedMoments big;
    big.gamma_mat = Matrix::Identity(40, 40);
    big.gamma_vec = Vector::Zero(40);
    CHECK_THROWS_WITH_AS(rse_bounds(big, {}, 10), doctest::Contains("diagnostic too large"), Error);
}

TEST_CASE("rse_bounds on PSD input: 0 < kappa <= phi") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        CorrectedMoments m;
        m.gamma_mat = oracle::random_pd(6, rng, 0.1, 4.0);
        m.gamma_vec = Vector::Zero(6);
        const auto b = rse_bounds(m, {static_cast<Index>(trial % 6)}, 2);
        CHECK(b.kappa > 0.0);
        CHECK(b.kappa <= b.phi);
    }
}
