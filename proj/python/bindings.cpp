#include <cmath>
#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "postcls/corrected_moments.hpp"
#include "postcls/harness.hpp"
#include "postcls/model_selection.hpp"
#include "postcls/post_estimation.hpp"
#include "postcls/precision.hpp"
#include "postcls/simulation.hpp"

namespace py = pybind11;
using namespace postcls;

namespace {

SolverOptions solver_options(double radius, double lambda, int max_iters, double rel_tol) {
    SolverOptions opts;
    opts.radius = radius;
    opts.lambda = lambda;
    opts.max_iters = max_iters;
    opts.rel_tol = rel_tol;
    opts.validate();
    return opts;
}

// NaN cells mark missing entries.
SurrogateDataset missing_from_nan(const Matrix& z, const Vector& y, std::optional<Vector> rho) {
    BoolMatrix mask = BoolMatrix::Constant(z.rows(), z.cols(), true);
    Matrix filled = z;
    for (Index j = 0; j < z.cols(); ++j)
        for (Index i = 0; i < z.rows(); ++i)
            if (std::isnan(z(i, j))) {
                mask(i, j) = false;
                filled(i, j) = 0.0;
            }
    Vector rates = rho ? *rho : estimate_missing_rates(mask);
    auto data = make_missing_dataset(filled, mask, y, rates);
    data.validate(y.size() > 0);
    return data;
}

Matrix z_with_nan(const SurrogateDataset& d) {
    Matrix z = d.z;
    if (d.mask)
        for (Index j = 0; j < z.cols(); ++j)
            for (Index i = 0; i < z.rows(); ++i)
                if (!(*d.mask)(i, j)) z(i, j) = std::nan("");
    return z;
}

}  // namespace

PYBIND11_MODULE(_postcls, m) {
    m.doc() = "Corrected moments, CS screening, post-selection and l1-constrained corrected least squares";
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<SurrogateDataset>(m, "Dataset")
        .def_property_readonly("z", &z_with_nan, "Observed covariates; NaN marks missing cells")
        .def_readonly("y", &SurrogateDataset::y)
        .def_property_readonly("n", &SurrogateDataset::n)
        .def_property_readonly("p", &SurrogateDataset::p)
        .def_property_readonly("is_missing", &SurrogateDataset::is_missing)
        .def_property_readonly("rho",
                               [](const SurrogateDataset& d) -> std::optional<Vector> {
                                   if (auto* miss = std::get_if<MissingNoise>(&d.noise)) return miss->rho;
                                   return std::nullopt;
                               })
        .def_property_readonly("sigma_w", [](const SurrogateDataset& d) -> std::optional<Matrix> {
            if (auto* add = std::get_if<AdditiveNoise>(&d.noise)) return add->sigma_w;
            return std::nullopt;
        });

    m.def(
        "additive_dataset",
        [](const Matrix& z, const Vector& y, const Matrix& sigma_w) {
            SurrogateDataset d;
            d.z = z;
            d.y = y;
            d.noise = AdditiveNoise{sigma_w};
            d.validate(y.size() > 0);
            return d;
        },
        py::arg("z"), py::arg("y"), py::arg("sigma_w"));
    m.def("missing_dataset", &missing_from_nan, py::arg("z"), py::arg("y"), py::arg("rho") = std::nullopt,
          "Missing-covariate dataset; NaN cells are missing, rates estimated unless given");

    py::class_<CorrectedMoments>(m, "Moments")
        .def(py::init([](const Matrix& g, const Vector& v, Index n) {
                 CorrectedMoments cm;
                 cm.gamma_mat = g;
                 cm.gamma_vec = v;
                 cm.n = n;
                 return cm;
             }),
             py::arg("gamma_mat"), py::arg("gamma_vec"), py::arg("n") = 1)
        .def_readonly("gamma_mat", &CorrectedMoments::gamma_mat)
        .def_readonly("gamma_vec", &CorrectedMoments::gamma_vec)
        .def_readonly("n", &CorrectedMoments::n);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("beta", &FitResult::beta)
        .def_readonly("support", &FitResult::support_used)
        .def_property_readonly("method", [](const FitResult& f) { return to_string(f.method); })
        .def_readonly("iterations", &FitResult::iterations)
        .def_readonly("objective", &FitResult::objective)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("fallback_used", &FitResult::fallback_used)
        .def_readonly("wall_time", &FitResult::wall_time);

    m.def("corrected_moments", &corrected_moments, py::arg("data"));
    m.def("uncorrected_moments", &uncorrected_moments, py::arg("data"));
    m.def("corrected_loss", &corrected_loss, py::arg("beta"), py::arg("moments"));
    m.def("estimate_missing_rates", [](const Matrix& z) {
        BoolMatrix mask(z.rows(), z.cols());
        for (Index j = 0; j < z.cols(); ++j)
            for (Index i = 0; i < z.rows(); ++i) mask(i, j) = !std::isnan(z(i, j));
        return estimate_missing_rates(mask);
    }, py::arg("z"));

    m.def("cs_screen", [](const Vector& g, int a_n) { return cs_screen(g, a_n).support; }, py::arg("gamma_vec"),
          py::arg("a_n"));
    m.def("project_l1_ball", &project_l1_ball, py::arg("v"), py::arg("radius"));
    m.def(
        "l1_cls_fit",
        [](const CorrectedMoments& cm, double radius, double lam, int max_iters, double rel_tol) {
            py::gil_scoped_release release;
            return l1_cls_fit(cm, solver_options(radius, lam, max_iters, rel_tol));
        },
        py::arg("moments"), py::arg("radius"), py::arg("lam") = 0.0, py::arg("max_iters") = 10000,
        py::arg("rel_tol") = 1e-6);
    m.def(
        "post_cls_fit",
        [](const CorrectedMoments& cm, const IndexSet& selected, double radius) {
            return post_cls_fit(cm, selected, solver_options(radius, 0.0, 10000, 1e-6));
        },
        py::arg("moments"), py::arg("selected"), py::arg("radius"));
    m.def(
        "lasso_fit",
        [](const SurrogateDataset& d, double lam, double radius) {
            py::gil_scoped_release release;
            return lasso_fit(d, lam, solver_options(radius, 0.0, 10000, 1e-6));
        },
        py::arg("data"), py::arg("lam"), py::arg("radius"));

    m.def("split_dataset", &split_dataset, py::arg("data"), py::arg("test_fraction") = 0.5);
    m.def("lambda_grid", &lambda_grid);
    m.def("a_n_grid", &a_n_grid, py::arg("n"), py::arg("p"));
    m.def(
        "cross_validate",
        [](const SurrogateDataset& train, const SurrogateDataset& test, const std::vector<double>& grid,
           const std::string& method, double radius) {
            FitRule rule;
            rule.method = method_from_string(method);
            rule.opts.radius = radius;
            CvResult cv;
            {
                py::gil_scoped_release release;
                cv = cross_validate(train, test, grid, rule);
            }
            return py::make_tuple(cv.best_value, cv.losses);
        },
        py::arg("train"), py::arg("test"), py::arg("grid"), py::arg("method"), py::arg("radius"),
        "Returns (best value, per-value test losses); method is 'cs', 'l1cls' or 'lasso'");

    m.def(
        "estimate_precision",
        [](const SurrogateDataset& d, int a_n, double radius) {
            PrecisionEstimate est;
            {
                py::gil_scoped_release release;
                est = estimate_precision(d, a_n, radius);
            }
            py::dict out;
            out["theta"] = est.theta;
            out["theta_raw"] = est.theta_raw;
            out["d"] = est.d;
            out["supports"] = est.neighborhood_supports;
            out["fallback_used"] = est.fallback_used;
            return out;
        },
        py::arg("data"), py::arg("a_n"), py::arg("radius"));

    m.def("ar1_covariance", &ar1_covariance, py::arg("p"), py::arg("phi"), py::arg("scale") = 1.0);
    m.def(
        "simulate_regression",
        [](Index n, Index p, Index s, const std::string& noise, double sigma_eps, double c_w,
           std::pair<double, double> rho_range, std::uint64_t seed) {
            SimConfig cfg;
            cfg.n = n;
            cfg.p = p;
            cfg.s = s;
            cfg.noise_kind = noise_kind_from_string(noise);
            cfg.sigma_eps = sigma_eps;
            cfg.c_w = c_w;
            cfg.rho_lo = rho_range.first;
            cfg.rho_hi = rho_range.second;
            cfg.seed = seed;
            auto sim = gen_regression(cfg);
            py::dict out;
            out["data"] = sim.data;
            out["x"] = sim.x;
            out["beta0"] = sim.beta0;
            out["support"] = sim.support;
            return out;
        },
        py::arg("n"), py::arg("p"), py::arg("s"), py::arg("noise") = "missing", py::arg("sigma_eps") = 0.25,
        py::arg("c_w") = 0.25, py::arg("rho_range") = std::make_pair(0.05, 0.75), py::arg("seed") = 0);
    m.def("band_precision", [](Index p, Index bw) {
        auto pair = generate_band_precision(p, bw);
        return py::make_tuple(pair.theta, pair.sigma);
    }, py::arg("p"), py::arg("bandwidth"), "Returns (theta, sigma)");
    m.def("cluster_precision", [](Index p, Index k) {
        auto pair = generate_cluster_precision(p, k);
        return py::make_tuple(pair.theta, pair.sigma);
    }, py::arg("p"), py::arg("clusters"), "Returns (theta, sigma)");
    m.def("graph_data", &gen_graph_data, py::arg("sigma"), py::arg("n"), py::arg("c_x") = 1.0,
          py::arg("rho_lo") = 0.05, py::arg("rho_hi") = 0.75, py::arg("seed") = 0);

    m.def("ree", &ree, py::arg("beta_hat"), py::arg("beta0"));
    m.def("false_positives", &false_positives, py::arg("selected"), py::arg("truth"));
    m.def("column_norm_error", &column_norm_error, py::arg("a"), py::arg("b"));
    m.def(
        "run_experiment",
        [](const std::string& config_json, int workers, bool no_timing) {
            const GridSpec spec = grid_spec_from_json(config_json);
            RunOptions opts;
            opts.workers = workers;
            opts.no_timing = no_timing;
            py::gil_scoped_release release;
            return format_results(run_grid(spec, opts));
        },
        py::arg("config_json"), py::arg("workers") = 1, py::arg("no_timing") = false,
        "Run an experiment grid from a JSON config; returns the results CSV text");
}
