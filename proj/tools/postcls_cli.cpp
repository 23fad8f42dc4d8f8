// Command-line front end: simulate, fit, precision, experiment, tune.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "postcls/corrected_moments.hpp"
#include "postcls/harness.hpp"
#include "postcls/io.hpp"
#include "postcls/model_selection.hpp"
#include "postcls/post_estimation.hpp"
#include "postcls/precision.hpp"
#include "postcls/simulation.hpp"

using namespace postcls;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct DataArgs {
    std::string path;
    std::string noise = "missing";
    std::string sigma_w_path;
    std::vector<double> sigma_w_ar1;  // phi, scale
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "Dataset CSV (header row, 'y' column, NA for missing)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--noise", args.noise, "Noise model: additive | missing")
        ->check(CLI::IsMember({"additive", "missing"}));
    cmd->add_option("--sigma-w", args.sigma_w_path, "Measurement-error covariance CSV (additive)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--sigma-w-ar1", args.sigma_w_ar1, "Generate sigma_w = scale * phi^|i-j| (phi scale)")
        ->expected(2);
}

SurrogateDataset load_dataset(const DataArgs& args, bool require_response) {
    const io::DatasetTable table = io::read_dataset_table(args.path);
    if (require_response && table.y.size() == 0) throw Error(args.path + ": no 'y' column");
    if (args.noise == "missing") return io::to_missing_dataset(table);

    const Index p = table.z.cols();
    Matrix sigma_w;
    if (!args.sigma_w_path.empty()) {
        sigma_w = io::read_matrix(args.sigma_w_path);
    } else if (args.sigma_w_ar1.size() == 2) {
        sigma_w = ar1_covariance(p, args.sigma_w_ar1[0], args.sigma_w_ar1[1]);
    } else {
        throw Error("additive noise needs --sigma-w or --sigma-w-ar1");
    }
    return io::to_additive_dataset(table, std::move(sigma_w));
}

void write_coefficients(const Vector& beta, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "index,value\n";
    for (Index j = 0; j < beta.size(); ++j) out << j + 1 << ',' << io::format_double(beta[j]) << '\n';
}

std::string one_based(const IndexSet& idx) {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? " " : "") + std::to_string(idx[k] + 1);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse regression with noisy or missing covariates"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a regression dataset");
    SimConfig sim;
    std::string sim_config_path, sim_out, sim_truth, sim_sigma_out, sim_noise = "additive";
    std::vector<double> rho_range;
    sim_cmd->add_option("--config", sim_config_path, "JSON document with SimConfig fields")
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--n", sim.n, "Sample size");
    sim_cmd->add_option("--p", sim.p, "Dimension");
    sim_cmd->add_option("--s", sim.s, "Sparsity");
    sim_cmd->add_option("--noise", sim_noise)->check(CLI::IsMember({"additive", "missing"}));
    sim_cmd->add_option("--sigma-eps", sim.sigma_eps);
    sim_cmd->add_option("--ar-phi", sim.ar_phi);
    sim_cmd->add_option("--c-w", sim.c_w);
    sim_cmd->add_option("--rho-range", rho_range)->expected(2);
    sim_cmd->add_option("--seed", sim.seed);
    sim_cmd->add_option("--out", sim_out, "Dataset CSV")->required();
    sim_cmd->add_option("--truth", sim_truth, "True coefficient CSV");
    sim_cmd->add_option("--sigma-w-out", sim_sigma_out, "Write sigma_w (additive)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit one method on a dataset");
    DataArgs fit_data;
    add_data_options(fit_cmd, fit_data);
    std::string fit_method = "cs", fit_out;
    double fit_radius = 0.0, fit_test_fraction = 0.5;
    std::optional<double> fit_tuning;
    fit_cmd->add_option("--method", fit_method, "cs | l1cls | lasso")
        ->check(CLI::IsMember({"cs", "l1cls", "lasso"}));
    fit_cmd->add_option("--radius", fit_radius, "l1-ball radius R")->required();
    fit_cmd->add_option("--tuning", fit_tuning, "a_n (cs) or lambda; cross-validated when omitted");
    fit_cmd->add_option("--test-fraction", fit_test_fraction);
    fit_cmd->add_option("--out", fit_out, "Coefficient CSV");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "Dump the cross-validation curve");
    DataArgs tune_data;
    add_data_options(tune_cmd, tune_data);
    std::string tune_method = "cs", tune_out;
    double tune_radius = 0.0, tune_test_fraction = 0.5;
    tune_cmd->add_option("--method", tune_method)->check(CLI::IsMember({"cs", "l1cls", "lasso"}));
    tune_cmd->add_option("--radius", tune_radius, "l1-ball radius R")->required();
    tune_cmd->add_option("--test-fraction", tune_test_fraction);
    tune_cmd->add_option("--out", tune_out, "CSV with value,loss");

    // precision
    auto* prec_cmd = app.add_subcommand("precision", "Estimate a precision matrix from missing data");
    DataArgs prec_data;
    add_data_options(prec_cmd, prec_data);
    double prec_radius = 0.0;
    std::optional<int> prec_a_n;
    std::string prec_out, prec_diag;
    prec_cmd->add_option("--radius", prec_radius, "l1-ball radius for each neighborhood")->required();
    prec_cmd->add_option("--a-n", prec_a_n, "Screening level; tuned on column 1 when omitted");
    prec_cmd->add_option("--out", prec_out, "Precision matrix CSV")->required();
    prec_cmd->add_option("--diag-out", prec_diag, "Per-column diagnostics CSV");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation grid");
    std::string exp_config, exp_out;
    std::optional<std::uint64_t> exp_seed;
    RunOptions run_opts;
    bool save_coefs = false, strict = false;
    exp_cmd->add_option("--config", exp_config, "Grid JSON")->required()->check(CLI::ExistingFile);
    exp_cmd->add_option("--seed", exp_seed, "Override the base seed");
    exp_cmd->add_option("--out", exp_out, "Result CSV")->required();
    exp_cmd->add_option("--workers", run_opts.workers, "Worker threads")->check(CLI::PositiveNumber);
    exp_cmd->add_flag("--save-coefs", save_coefs, "Write <out>.coefs.csv");
    exp_cmd->add_flag("--no-timing", run_opts.no_timing, "Zero the timing column");
    exp_cmd->add_flag("--strict", strict, "Exit 1 when any cell failed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) {
            if (!sim_config_path.empty()) {
                const auto j = nlohmann::json::parse(slurp(sim_config_path));
                sim.n = j.value("n", sim.n);
                sim.p = j.value("p", sim.p);
                sim.s = j.value("s", sim.s);
                sim_noise = j.value("noise", sim_noise);
                sim.sigma_eps = j.value("sigma_eps", sim.sigma_eps);
                sim.ar_phi = j.value("ar_phi", sim.ar_phi);
                sim.c_w = j.value("c_w", sim.c_w);
                if (j.contains("rho_range")) rho_range = j.at("rho_range").get<std::vector<double>>();
                sim.seed = j.value("seed", sim.seed);
            }
            sim.noise_kind = noise_kind_from_string(sim_noise);
            if (rho_range.size() == 2) {
                sim.rho_lo = rho_range[0];
                sim.rho_hi = rho_range[1];
            }
            const SimulatedRegression out = gen_regression(sim);
            io::write_dataset(out.data, sim_out);
            if (!sim_truth.empty()) write_coefficients(out.beta0, sim_truth);
            if (!sim_sigma_out.empty()) {
                if (const auto* add = std::get_if<AdditiveNoise>(&out.data.noise)) {
                    io::write_matrix(add->sigma_w, sim_sigma_out);
                } else {
                    throw Error("--sigma-w-out applies to additive noise only");
                }
            }
            return 0;
        }

        if (*fit_cmd) {
            const SurrogateDataset data = load_dataset(fit_data, true);
            FitRule rule;
            rule.method = method_from_string(fit_method);
            rule.opts.radius = fit_radius;
            double value = 0.0;
            if (fit_tuning) {
                value = *fit_tuning;
            } else {
                const auto [train, test] = split_dataset(data, fit_test_fraction);
                const auto grid = rule.method == Method::CsPost ? a_n_grid(data.n(), data.p())
                                                                : lambda_grid();
                value = cross_validate(train, test, grid, rule).best_value;
            }
            const FitResult fit = fit_with_rule(data, value, rule);
            std::cout << "method=" << to_string(rule.method) << " tuning=" << io::format_double(value)
                      << " objective=" << io::format_double(fit.objective)
                      << " iterations=" << fit.iterations << " path=" << to_string(fit.path)
                      << " fallback=" << (fit.fallback_used ? 1 : 0) << "\nsupport="
                      << one_based(rule.method == Method::CsPost
                                       ? fit.support_used
                                       : support(fit.beta, default_support_tol(fit.beta)))
                      << '\n';
            if (!fit_out.empty()) write_coefficients(fit.beta, fit_out);
            return 0;
        }

        if (*tune_cmd) {
            const SurrogateDataset data = load_dataset(tune_data, true);
            FitRule rule;
            rule.method = method_from_string(tune_method);
            rule.opts.radius = tune_radius;
            const auto grid = rule.method == Method::CsPost ? a_n_grid(data.n(), data.p())
                                                            : lambda_grid();
            const auto [train, test] = split_dataset(data, tune_test_fraction);
            const CvResult cv = cross_validate(train, test, grid, rule);
            std::ostringstream csv;
            csv << "value,loss\n";
            for (std::size_t k = 0; k < grid.size(); ++k)
                csv << io::format_double(grid[k]) << ',' << io::format_double(cv.losses[k]) << '\n';
            if (tune_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream(tune_out, std::ios::binary) << csv.str();
            }
            std::cerr << "best=" << io::format_double(cv.best_value) << '\n';
            return 0;
        }

        if (*prec_cmd) {
            if (prec_data.noise != "missing") throw Error("precision estimation needs --noise missing");
            const SurrogateDataset data = load_dataset(prec_data, false);
            int a_n = 0;
            if (prec_a_n) {
                a_n = *prec_a_n;
            } else {
                std::vector<int> grid;
                const auto upper = a_n_grid(data.n(), data.p() - 1).size();
                for (std::size_t a = 1; a <= upper; ++a) grid.push_back(static_cast<int>(a));
                a_n = tune_neighborhood_a_n(data, grid, prec_radius);
            }
            const PrecisionEstimate est = estimate_precision(data, a_n, prec_radius);
            io::write_matrix(est.theta, prec_out);
            if (!prec_diag.empty()) {
                std::ofstream diag(prec_diag, std::ios::binary);
                if (!diag) throw Error("cannot open '" + prec_diag + "' for writing");
                diag << "column,support_size,d,fallback\n";
                for (Index j = 0; j < data.p(); ++j) {
                    const auto k = static_cast<std::size_t>(j);
                    diag << j + 1 << ',' << est.neighborhood_supports[k].size() << ','
                         << io::format_double(est.d[j]) << ',' << (est.fallback_used[k] ? 1 : 0)
                         << '\n';
                }
            }
            std::cerr << "a_n=" << a_n << '\n';
            return 0;
        }

        if (*exp_cmd) {
            GridSpec spec = grid_spec_from_json(slurp(exp_config));
            if (exp_seed) spec.base_seed = *exp_seed;
            const auto records = run_grid(spec, run_opts);
            emit_results(records, exp_out);
            if (save_coefs) emit_coefficients(records, exp_out + ".coefs.csv");
            bool any_error = false;
            for (const auto& r : records) {
                if (!r.error.empty()) {
                    any_error = true;
                    std::cerr << "cell n=" << r.n << " p=" << r.p << " s=" << r.s << " seed=" << r.seed
                              << " " << to_string(r.method) << ": " << r.error << '\n';
                }
            }
            return strict && any_error ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
