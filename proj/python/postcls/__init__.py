"""Post-selection corrected least squares for noisy and missing covariates."""

from ._postcls import (
    Dataset,
    FitResult,
    Moments,
    Error,
    a_n_grid,
    additive_dataset,
    ar1_covariance,
    band_precision,
    cluster_precision,
    column_norm_error,
    corrected_loss,
    corrected_moments,
    cross_validate,
    cs_screen,
    estimate_missing_rates,
    estimate_precision,
    false_positives,
    graph_data,
    l1_cls_fit,
    lambda_grid,
    lasso_fit,
    missing_dataset,
    post_cls_fit,
    project_l1_ball,
    ree,
    run_experiment,
    simulate_regression,
    split_dataset,
    uncorrected_moments,
)

__version__ = "0.1.0"
