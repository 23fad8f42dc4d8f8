#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "postcls/simulation.hpp"
#include "postcls/types.hpp"

namespace postcls {

/// ||beta_hat - beta0||_2 / ||beta0||_2
double ree(const Vector& beta_hat, const Vector& beta0);

/// |T_hat \ T|
int false_positives(const IndexSet& selected, const IndexSet& truth);

/// |T_hat n T| / |T|
double true_positive_rate(const IndexSet& selected, const IndexSet& truth);

/// Max over columns of the Euclidean norm of A - B.
double column_norm_error(const Matrix& a, const Matrix& b);

/// sqrt(m log p / n) + sqrt((m + s) log D / n) + sqrt((m + s + log(1/c3)) / n)
double rate_bound_en(double m, double s, double p, double n, double c3, double cover = 100.0);

struct ExperimentRecord {
    std::string scenario;
    Index n = 0, p = 0, s = 0;
    NoiseKind noise = NoiseKind::Additive;
    Method method = Method::CsPost;
    std::uint64_t seed = 0;
    double tuning = 0.0;
    double ree = 0.0;
    int false_positives = 0;
    double true_positive_rate = 0.0;
    double wall_time_s = 0.0;
    std::string error;  // non-empty for a failed cell
    Vector beta_hat;
    Vector beta0;
};

struct GridSpec {
    std::string scenario = "custom";
    std::vector<Index> ns{100};
    std::vector<Index> ps{100};
    std::vector<Index> ss{4};
    NoiseKind noise = NoiseKind::Additive;
    int replicates = 1;
    std::uint64_t base_seed = 1;
    std::vector<Method> methods{Method::CsPost, Method::L1Cls, Method::Lasso};

    // data-generating parameters, shared by every cell
    double sigma_eps = 0.25;
    double ar_phi = 0.5;
    double c_w = 0.25;
    double rho_lo = 0.05;
    double rho_hi = 0.75;

    double test_fraction = 0.5;
    double radius_factor = 1.1;  // R = radius_factor * ||beta0||_1

    void validate() const;
    std::size_t cell_count() const;
};

/// n in 100..500 step 40, p in 100..500 step 65, s in {4, 8}.
GridSpec standard_grid_a(NoiseKind noise);
/// p = 750, s = 4, n in 50..500 step 5.
GridSpec standard_grid_b(NoiseKind noise);

/// Flat JSON document with the GridSpec fields; "grid": "A" | "B" starts from a
/// preset. Sizes may be lists or {"from", "to", "step"} ranges.
GridSpec grid_spec_from_json(const std::string& text);

struct RunOptions {
    int workers = 1;
    bool no_timing = false;
};

/// Seed of one (n, p, s, replicate) cell.
std::uint64_t cell_seed(std::uint64_t base, Index n, Index p, Index s, int replicate);

/// One simulated dataset, every method tuned by a train/test split and refit on
/// the full sample. Failures become error records.
std::vector<ExperimentRecord> run_cell(const GridSpec& spec, Index n, Index p, Index s,
                                       int replicate);

/// Cells in (n, p, s, replicate) order; output independent of worker count.
std::vector<ExperimentRecord> run_grid(const GridSpec& spec, const RunOptions& opts = {});

/// Header: scenario,n,p,s,noise,method,seed,tuning,ree,fp,tpr,wall_s
void emit_results(const std::vector<ExperimentRecord>& records, const std::string& path);
std::string format_results(const std::vector<ExperimentRecord>& records);

/// Sidecar with nonzero entries of beta_hat and beta0 for each record.
void emit_coefficients(const std::vector<ExperimentRecord>& records, const std::string& path);

}  // namespace postcls
