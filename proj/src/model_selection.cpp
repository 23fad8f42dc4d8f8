#include "postcls/model_selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace postcls {

void SolverOptions::validate() const {
    if (max_iters < 1) throw Error("max_iters must be at least 1");
    if (!(rel_tol > 0.0)) throw Error("rel_tol must be positive");
    if (!(radius > 0.0)) throw Error("l1 radius must be positive");
    if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
}

SelectionResult cs_screen(const Vector& gamma_vec, int a_n) {
    if (a_n < 1) throw Error("empty selection not allowed");
    if (!gamma_vec.allFinite()) throw Error("screening scores are not finite");
    const Index p = gamma_vec.size();
    const Vector score = gamma_vec.cwiseAbs();

    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return score[a] > score[b]; });

    const auto keep = std::min<Index>(a_n, p);
    SelectionResult out;
    out.support.assign(order.begin(), order.begin() + keep);
    std::sort(out.support.begin(), out.support.end());
    out.method = Method::CsPost;
    out.tuning = static_cast<double>(a_n);
    out.scores = score;
    return out;
}

Vector soft_threshold(const Vector& v, double threshold) {
    return v.array().sign() * (v.array().abs() - threshold).max(0.0);
}

Vector project_l1_ball(const Vector& v, double radius) {
    if (!(radius > 0.0)) throw Error("l1 radius must be positive");
    if (!v.allFinite()) throw Error("cannot project a non-finite vector");
    if (v.lpNorm<1>() <= radius) return v;

    std::vector<double> u(v.size());
    for (Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<>());

    double cumsum = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumsum += u[k];
        const double t = (cumsum - radius) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
        else break;
    }
    return soft_threshold(v, tau);
}

double spectral_radius(const Matrix& a, int max_iters, double tol) {
    const Index p = a.rows();
    if (p == 0) return 0.0;
    Vector v(p);
    for (Index i = 0; i < p; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
    v.normalize();

    double estimate = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vector w = a * (a * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = std::sqrt(norm);
        v = w / norm;
        const bool done = std::abs(next - estimate) <= tol * next;
        estimate = next;
        if (done) break;
    }
    return estimate;
}

namespace {

double penalized(const CorrectedMoments& m, const Vector& beta, double lambda) {
    return corrected_loss(beta, m) + lambda * beta.lpNorm<1>();
}

Vector prox_step(const Vector& beta, const Vector& grad, double step, double lambda,
                 double radius) {
    return project_l1_ball(soft_threshold(beta - step * grad, step * lambda), radius);
}

}  // namespace

FitResult l1_cls_fit(const CorrectedMoments& m, const SolverOptions& opts) {
    opts.validate();
    const auto start = std::chrono::steady_clock::now();
    const Index p = m.p();
    if (m.gamma_mat.rows() != p || m.gamma_mat.cols() != p) throw Error("Gamma must be p x p");

    double lipschitz = spectral_radius(m.gamma_mat);
    double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    Vector beta = Vector::Zero(p);
    if (opts.warm_start) {
        if (opts.warm_start->size() != p) throw Error("warm start has wrong length");
        beta = project_l1_ball(*opts.warm_start, opts.radius);
    }
    double obj = penalized(m, beta, opts.lambda);

    FitResult out;
    out.method = Method::L1Cls;
    out.beta = beta;
    out.objective = obj;
    out.converged = false;
    if (opts.record_trace) out.objective_trace.push_back(obj);

    int it = 0;
    while (it < opts.max_iters) {
        ++it;
        const Vector grad = m.gamma_mat * beta - m.gamma_vec;
        Vector next = prox_step(beta, grad, step, opts.lambda, opts.radius);

        if (opts.step_rule == StepRule::Backtracking) {
            // shrink until the quadratic upper model at beta dominates the loss at next
            const double loss = corrected_loss(beta, m);
            for (int k = 0; k < 60; ++k) {
                const Vector d = next - beta;
                const double model = loss + grad.dot(d) + d.squaredNorm() / (2.0 * step);
                if (corrected_loss(next, m) <= model + 1e-14 * std::abs(model)) break;
                step *= 0.5;
                next = prox_step(beta, grad, step, opts.lambda, opts.radius);
            }
        }

        const double next_obj = penalized(m, next, opts.lambda);
        if (!std::isfinite(next_obj)) throw Error("diverged");

        if (opts.record_trace) out.objective_trace.push_back(next_obj);
        beta = std::move(next);
        if (next_obj < out.objective) {
            out.objective = next_obj;
            out.beta = beta;
        }
        const double scale = std::max(std::abs(obj), std::abs(next_obj));
        const double change = std::abs(next_obj - obj);
        obj = next_obj;
        if (change <= opts.rel_tol * scale) {
            out.converged = true;
            break;
        }
    }

    out.iterations = it;
    out.support_used = support(out.beta, default_support_tol(out.beta));
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

IndexSet support(const Vector& beta, double tol) {
    if (tol < 0.0) throw Error("support tolerance must be non-negative");
    IndexSet out;
    for (Index j = 0; j < beta.size(); ++j)
        if (std::abs(beta[j]) > tol) out.push_back(j);
    return out;
}

double default_support_tol(const Vector& beta) {
    const double inf = beta.size() ? beta.lpNorm<Eigen::Infinity>() : 0.0;
    return 1e-6 * std::max(1.0, inf);
}

}  // namespace postcls
