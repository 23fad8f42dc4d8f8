#include "postcls/corrected_moments.hpp"

#include <cmath>
#include <string>

namespace postcls {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw Error(what);
}

void check_rho(const Vector& rho) {
    for (Index j = 0; j < rho.size(); ++j) {
        if (!(rho[j] >= 0.0 && rho[j] < 1.0)) {
            throw Error("missing rate out of [0, 1) at column " + std::to_string(j));
        }
    }
}

// Recursively walks all supersets base u E with |E| <= budget, E drawn from
// candidates[from..], and folds the extreme eigenvalues of each principal block.
void enumerate_supports(const Matrix& gamma, IndexSet& current, const IndexSet& candidates,
                        std::size_t from, int budget, RseBounds& out, bool& seen) {
    if (!current.empty()) {
        Matrix block = submatrix(gamma, current, current);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
        double lo = eig.eigenvalues().minCoeff();
        double hi = eig.eigenvalues().maxCoeff();
        if (!seen) {
            out = {lo, hi};
            seen = true;
        } else {
            out.kappa = std::min(out.kappa, lo);
            out.phi = std::max(out.phi, hi);
        }
    }
    if (budget == 0) return;
    for (std::size_t k = from; k < candidates.size(); ++k) {
        current.push_back(candidates[k]);
        enumerate_supports(gamma, current, candidates, k + 1, budget - 1, out, seen);
        current.pop_back();
    }
}

}  // namespace

void SurrogateDataset::validate(bool require_response) const {
    require(n() >= 1 && p() >= 1, "dataset must have at least one row and one column");
    if (require_response || y.size() != 0) {
        require(y.size() == n(), "response length " + std::to_string(y.size()) +
                                     " does not match row count " + std::to_string(n()));
    }
    require(z.allFinite(), "covariate matrix contains non-finite values");
    if (y.size() != 0) require(y.allFinite(), "response contains non-finite values");

    if (const auto* add = std::get_if<AdditiveNoise>(&noise)) {
        require(!mask.has_value(), "additive noise model does not take a missingness mask");
        require(add->sigma_w.rows() == p() && add->sigma_w.cols() == p(),
                "sigma_w must be p x p");
        require(((add->sigma_w - add->sigma_w.transpose()).array().abs() <= 1e-12).all(),
                "sigma_w must be symmetric");
    } else {
        const auto& miss = std::get<MissingNoise>(noise);
        require(mask.has_value(), "missing noise model requires a mask");
        require(mask->rows() == n() && mask->cols() == p(), "mask shape does not match Z");
        require(miss.rho.size() == p(), "rho must have length p");
        check_rho(miss.rho);
        for (Index j = 0; j < p(); ++j) {
            for (Index i = 0; i < n(); ++i) {
                if (!(*mask)(i, j) && z(i, j) != 0.0) {
                    throw Error("unobserved entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") is not zero-filled");
                }
            }
        }
    }
}

SurrogateDataset SurrogateDataset::rows(Index begin, Index end) const {
    require(0 <= begin && begin < end && end <= n(), "row range out of bounds");
    SurrogateDataset out;
    out.z = z.middleRows(begin, end - begin);
    if (mask) out.mask = mask->middleRows(begin, end - begin);
    if (y.size() == n()) out.y = y.segment(begin, end - begin);
    out.noise = noise;
    return out;
}

SurrogateDataset make_missing_dataset(const Matrix& x, const BoolMatrix& mask, Vector y,
                                      Vector rho) {
    require(x.rows() == mask.rows() && x.cols() == mask.cols(), "mask shape does not match X");
    SurrogateDataset out;
    out.z = mask.select(x, Matrix::Zero(x.rows(), x.cols()));
    out.mask = mask;
    out.y = std::move(y);
    out.noise = MissingNoise{std::move(rho)};
    return out;
}

Vector estimate_missing_rates(const BoolMatrix& mask) {
    require(mask.rows() >= 1, "missing-rate estimation needs at least one row");
    const double n = static_cast<double>(mask.rows());
    Vector rho(mask.cols());
    for (Index j = 0; j < mask.cols(); ++j) {
        const auto observed = mask.col(j).count();
        if (observed == 0) throw Error("degenerate column " + std::to_string(j) + ": no observed entries");
        rho[j] = 1.0 - static_cast<double>(observed) / n;
    }
    return rho;
}

Vector estimate_missing_rates_or(const BoolMatrix& mask, const Vector& fallback) {
    require(mask.rows() >= 1, "missing-rate estimation needs at least one row");
    require(fallback.size() == mask.cols(), "fallback rates must have length p");
    const double n = static_cast<double>(mask.rows());
    Vector rho(mask.cols());
    for (Index j = 0; j < mask.cols(); ++j) {
        const auto observed = mask.col(j).count();
        rho[j] = observed == 0 ? fallback[j] : 1.0 - static_cast<double>(observed) / n;
    }
    return rho;
}

Matrix build_mask_matrix(const Vector& rho) {
    check_rho(rho);
    const Vector keep = Vector::Ones(rho.size()) - rho;
    Matrix m = keep * keep.transpose();
    m.diagonal() = keep;
    return m;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
    return out;
}

Vector subvector(const Vector& v, const IndexSet& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

CorrectedMoments uncorrected_moments(const SurrogateDataset& data) {
    data.validate();
    const double n = static_cast<double>(data.n());
    CorrectedMoments m;
    m.n = data.n();
    m.gamma_mat = symmetrized(data.z.transpose() * data.z / n);
    m.gamma_vec = data.z.transpose() * data.y / n;
    return m;
}

namespace {

Matrix corrected_from_gram(const Matrix& gram, const NoiseModel& noise) {
    if (const auto* add = std::get_if<AdditiveNoise>(&noise)) return symmetrized(gram - add->sigma_w);
    const Vector& rho = std::get<MissingNoise>(noise).rho;
    return symmetrized(gram.cwiseQuotient(build_mask_matrix(rho)));
}

}  // namespace

Matrix corrected_covariance(const SurrogateDataset& data) {
    data.validate(false);
    const Matrix gram = data.z.transpose() * data.z / static_cast<double>(data.n());
    Matrix out = corrected_from_gram(gram, data.noise);
    if (!out.allFinite()) throw Error("corrected covariance is not finite");
    return out;
}

CorrectedMoments corrected_moments(const SurrogateDataset& data) {
    CorrectedMoments m = uncorrected_moments(data);
    m.gamma_mat = corrected_from_gram(m.gamma_mat, data.noise);
    if (const auto* miss = std::get_if<MissingNoise>(&data.noise)) {
        m.gamma_vec = m.gamma_vec.cwiseQuotient(Vector::Ones(miss->rho.size()) - miss->rho);
    }
    if (!m.gamma_mat.allFinite() || !m.gamma_vec.allFinite()) {
        throw Error("corrected moments are not finite");
    }
    return m;
}

double corrected_loss(const Vector& beta, const CorrectedMoments& m) {
    require(beta.size() == m.p(), "beta length " + std::to_string(beta.size()) +
                                      " does not match dimension " + std::to_string(m.p()));
    return 0.5 * beta.dot(m.gamma_mat * beta) - m.gamma_vec.dot(beta);
}

RseBounds rse_bounds(const CorrectedMoments& m, const IndexSet& base, int max_extra,
                     std::size_t max_supports) {
    const Index p = m.p();
    require(max_extra >= 0, "max_extra must be non-negative");
    require(static_cast<Index>(base.size()) + max_extra <= p, "|T| + max_extra exceeds p");

    std::vector<bool> in_base(static_cast<std::size_t>(p), false);
    for (Index j : base) {
        require(0 <= j && j < p, "support index out of range");
        in_base[static_cast<std::size_t>(j)] = true;
    }
    IndexSet candidates;
    for (Index j = 0; j < p; ++j)
        if (!in_base[static_cast<std::size_t>(j)]) candidates.push_back(j);

    // sum_k C(|candidates|, k), k <= max_extra, with early exit once over the cap
    double total = 0.0, term = 1.0;
    const double c = static_cast<double>(candidates.size());
    for (int k = 0; k <= max_extra; ++k) {
        if (k > 0) term = term * (c - k + 1) / k;
        total += term;
        if (total > static_cast<double>(max_supports)) throw Error("diagnostic too large");
    }

    IndexSet current = base;
    RseBounds out;
    bool seen = false;
    enumerate_supports(m.gamma_mat, current, candidates, 0, max_extra, out, seen);
    require(seen, "no non-empty support to evaluate");
    return out;
}

}  // namespace postcls
