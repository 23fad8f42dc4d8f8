#pragma once

#include <utility>
#include <vector>

#include "postcls/corrected_moments.hpp"
#include "postcls/model_selection.hpp"
#include "postcls/types.hpp"

namespace postcls {

/// Minimum eigenvalue of the selected block at or above which the refit solves
/// the restricted normal equations directly.
inline constexpr double kPdThreshold = 1e-8;

/// Non-penalized corrected least squares on the coordinates in `selected`, with
/// exact zeros elsewhere. Indefinite blocks fall back to projected gradient on the
/// l1 ball of radius opts.radius. With `constrain_to_radius` the ball is enforced on
/// every path.
FitResult post_cls_fit(const CorrectedMoments& m, const IndexSet& selected,
                       const SolverOptions& opts, bool constrain_to_radius = false);

/// The l1-CLS solver run on the uncorrected moments (Z'Z/n, Z'y/n).
FitResult lasso_fit(const SurrogateDataset& data, double lambda, const SolverOptions& opts);

struct FitRule {
    Method method = Method::CsPost;
    SolverOptions opts;
};

struct CvResult {
    double best_value = 0.0;
    std::vector<double> losses;  // one per grid point, +inf where the fit failed
};

/// Fits on `train` at each grid value and scores on `test` moments. CS+post and
/// L1CLS use the corrected loss; Lasso uses the ordinary least-squares loss.
CvResult cross_validate(const SurrogateDataset& train, const SurrogateDataset& test,
                        const std::vector<double>& grid, const FitRule& rule);

/// Fit at one tuning value: a_n for CS+post, lambda otherwise.
FitResult fit_with_rule(const SurrogateDataset& data, double value, const FitRule& rule);

/// Deterministic split: the last round(n * test_fraction) rows become the test set.
/// For missing data each half gets its own observed-frequency rates; a column with no
/// observed entry in a half keeps the parent's rate.
std::pair<SurrogateDataset, SurrogateDataset> split_dataset(const SurrogateDataset& data,
                                                             double test_fraction = 0.5);

/// 0, 0.05, ..., 1
std::vector<double> lambda_grid();

/// 1, 2, ..., min(p, floor(n / log p))
std::vector<double> a_n_grid(Index n, Index p);

}  // namespace postcls
