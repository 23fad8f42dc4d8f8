#pragma once

#include <optional>

#include "postcls/corrected_moments.hpp"
#include "postcls/types.hpp"

namespace postcls {

struct SelectionResult {
    IndexSet support;
    Method method = Method::CsPost;
    double tuning = 0.0;  // a_n for CS, lambda for L1CLS
    Vector scores;        // |gamma_hat| for CS, beta_hat for L1CLS
};

enum class StepRule { Fixed, Backtracking };

struct SolverOptions {
    int max_iters = 10'000;
    double rel_tol = 1e-6;
    StepRule step_rule = StepRule::Fixed;
    double radius = 1.0;  // l1-ball radius R
    double lambda = 0.0;
    std::optional<Vector> warm_start;
    bool record_trace = false;  // keep the penalized objective of every iterate

    void validate() const;
};

/// Keeps the a_n coordinates with the largest |gamma_hat|; ties go to the smaller index.
SelectionResult cs_screen(const Vector& gamma_vec, int a_n);

/// Euclidean projection onto {w : ||w||_1 <= radius}. Returns v unchanged when inside.
Vector project_l1_ball(const Vector& v, double radius);

Vector soft_threshold(const Vector& v, double threshold);

/// Largest |eigenvalue| of a symmetric matrix, by power iteration on its square.
double spectral_radius(const Matrix& a, int max_iters = 50, double tol = 1e-6);

/// Composite projected gradient for
///   min 0.5 b'Gb - g'b + lambda ||b||_1   s.t. ||b||_1 <= radius.
/// Returns the best iterate seen, which matters when Gamma is indefinite.
FitResult l1_cls_fit(const CorrectedMoments& m, const SolverOptions& opts);

/// Indices with |beta_j| > tol.
IndexSet support(const Vector& beta, double tol);

/// 1e-6 * max(1, ||beta||_inf)
double default_support_tol(const Vector& beta);

}  // namespace postcls
