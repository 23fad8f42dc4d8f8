#include "postcls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "postcls/io.hpp"
#include "postcls/model_selection.hpp"
#include "postcls/post_estimation.hpp"
#include "postcls/rng.hpp"

namespace postcls {

double ree(const Vector& beta_hat, const Vector& beta0) {
    if (beta_hat.size() != beta0.size()) throw Error("REE: length mismatch");
    const double norm0 = beta0.norm();
    if (norm0 == 0.0) throw Error("REE undefined for a zero true coefficient vector");
    return (beta_hat - beta0).norm() / norm0;
}

int false_positives(const IndexSet& selected, const IndexSet& truth) {
    int count = 0;
    for (Index j : selected)
        if (std::find(truth.begin(), truth.end(), j) == truth.end()) ++count;
    return count;
}

double true_positive_rate(const IndexSet& selected, const IndexSet& truth) {
    if (truth.empty()) return 1.0;
    std::size_t hits = 0;
    for (Index j : truth)
        if (std::find(selected.begin(), selected.end(), j) != selected.end()) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double column_norm_error(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("shape mismatch");
    if (a.cols() == 0) return 0.0;
    return (a - b).colwise().norm().maxCoeff();
}

double rate_bound_en(double m, double s, double p, double n, double c3, double cover) {
    if (!(n >= 1.0)) throw Error("rate bound needs n >= 1");
    if (!(c3 > 0.0 && c3 <= 1.0)) throw Error("c3 must lie in (0, 1]");
    return std::sqrt(m * std::log(p) / n) + std::sqrt((m + s) * std::log(cover) / n) +
           std::sqrt((m + s + std::log(1.0 / c3)) / n);
}

void GridSpec::validate() const {
    if (ns.empty() || ps.empty() || ss.empty() || methods.empty()) {
        throw Error("grid lists must be non-empty");
    }
    auto positive = [](const std::vector<Index>& v) {
        return std::all_of(v.begin(), v.end(), [](Index x) { return x > 0; });
    };
    if (!positive(ns) || !positive(ps) || !positive(ss)) throw Error("grid values must be positive");
    if (replicates < 1) throw Error("replicates must be at least 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test_fraction must lie in (0, 1)");
    if (!(radius_factor > 0.0)) throw Error("radius_factor must be positive");
    SimConfig probe;
    probe.sigma_eps = sigma_eps;
    probe.ar_phi = ar_phi;
    probe.c_w = c_w;
    probe.rho_lo = rho_lo;
    probe.rho_hi = rho_hi;
    probe.validate();
}

std::size_t GridSpec::cell_count() const {
    return ns.size() * ps.size() * ss.size() * static_cast<std::size_t>(replicates);
}

namespace {

std::vector<Index> range(Index from, Index to, Index step) {
    std::vector<Index> out;
    for (Index v = from; v <= to; v += step) out.push_back(v);
    return out;
}

std::vector<Index> sizes_from_json(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_number_integer()) return {v.get<Index>()};
    if (v.is_array()) return v.get<std::vector<Index>>();
    if (v.is_object()) {
        const Index step = v.value("step", Index{1});
        if (step < 1) throw Error(std::string("range step for '") + key + "' must be positive");
        return range(v.at("from").get<Index>(), v.at("to").get<Index>(), step);
    }
    throw Error(std::string("'") + key + "' must be an integer, a list, or a range object");
}

}  // namespace

GridSpec standard_grid_a(NoiseKind noise) {
    GridSpec spec;
    spec.scenario = std::string("A-") + to_string(noise);
    spec.ns = range(100, 500, 40);
    spec.ps = range(100, 500, 65);
    spec.ss = {4, 8};
    spec.noise = noise;
    return spec;
}

GridSpec standard_grid_b(NoiseKind noise) {
    GridSpec spec;
    spec.scenario = std::string("B-") + to_string(noise);
    spec.ns = range(50, 500, 5);
    spec.ps = {750};
    spec.ss = {4};
    spec.noise = noise;
    return spec;
}

GridSpec grid_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        const NoiseKind noise = noise_kind_from_string(j.value("noise", std::string("additive")));
        GridSpec spec;
        if (j.contains("grid")) {
            const auto preset = j.at("grid").get<std::string>();
            if (preset == "A") spec = standard_grid_a(noise);
            else if (preset == "B") spec = standard_grid_b(noise);
            else throw Error("unknown grid preset '" + preset + "'");
        }
        spec.noise = noise;
        if (j.contains("scenario")) spec.scenario = j.at("scenario").get<std::string>();
        if (j.contains("n")) spec.ns = sizes_from_json(j, "n");
        if (j.contains("p")) spec.ps = sizes_from_json(j, "p");
        if (j.contains("s")) spec.ss = sizes_from_json(j, "s");
        spec.replicates = j.value("replicates", spec.replicates);
        spec.base_seed = j.value("seed", spec.base_seed);
        if (j.contains("methods")) {
            spec.methods.clear();
            for (const auto& m : j.at("methods")) spec.methods.push_back(method_from_string(m.get<std::string>()));
        }
        spec.sigma_eps = j.value("sigma_eps", spec.sigma_eps);
        spec.ar_phi = j.value("ar_phi", spec.ar_phi);
        spec.c_w = j.value("c_w", spec.c_w);
        if (j.contains("rho_range")) {
            const auto r = j.at("rho_range").get<std::vector<double>>();
            if (r.size() != 2) throw Error("rho_range must have two entries");
            spec.rho_lo = r[0];
            spec.rho_hi = r[1];
        }
        spec.test_fraction = j.value("test_fraction", spec.test_fraction);
        spec.radius_factor = j.value("radius_factor", spec.radius_factor);
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad config: ") + e.what());
    }
}

std::uint64_t cell_seed(std::uint64_t base, Index n, Index p, Index s, int replicate) {
    std::uint64_t seed = derive_seed(base, "n", static_cast<std::uint64_t>(n));
    seed = derive_seed(seed, "p", static_cast<std::uint64_t>(p));
    seed = derive_seed(seed, "s", static_cast<std::uint64_t>(s));
    return derive_seed(seed, "replicate", static_cast<std::uint64_t>(replicate));
}

std::vector<ExperimentRecord> run_cell(const GridSpec& spec, Index n, Index p, Index s,
                                       int replicate) {
    const std::uint64_t seed = cell_seed(spec.base_seed, n, p, s, replicate);
    auto base_record = [&](Method method) {
        ExperimentRecord r;
        r.scenario = spec.scenario;
        r.n = n;
        r.p = p;
        r.s = s;
        r.noise = spec.noise;
        r.method = method;
        r.seed = seed;
        return r;
    };
    auto failed = [&](Method method, const std::string& what) {
        ExperimentRecord r = base_record(method);
        r.error = what;
        r.ree = std::numeric_limits<double>::quiet_NaN();
        r.true_positive_rate = std::numeric_limits<double>::quiet_NaN();
        r.false_positives = -1;
        return r;
    };

    std::vector<ExperimentRecord> out;
    SimulatedRegression sim;
    std::pair<SurrogateDataset, SurrogateDataset> halves;
    double radius = 0.0;
    try {
        SimConfig config;
        config.n = n;
        config.p = p;
        config.s = s;
        config.noise_kind = spec.noise;
        config.sigma_eps = spec.sigma_eps;
        config.ar_phi = spec.ar_phi;
        config.c_w = spec.c_w;
        config.rho_lo = spec.rho_lo;
        config.rho_hi = spec.rho_hi;
        config.seed = seed;
        sim = gen_regression(config);
        if (spec.noise == NoiseKind::Missing) {
            sim.data.noise = MissingNoise{estimate_missing_rates(*sim.data.mask)};
        }
        radius = spec.radius_factor * sim.beta0.lpNorm<1>();
        halves = split_dataset(sim.data, spec.test_fraction);
    } catch (const Error& e) {
        for (Method m : spec.methods) out.push_back(failed(m, e.what()));
        return out;
    }

    for (Method method : spec.methods) {
        try {
            const auto start = std::chrono::steady_clock::now();
            FitRule rule;
            rule.method = method;
            rule.opts.radius = radius;
            const auto grid = method == Method::CsPost ? a_n_grid(n, p) : lambda_grid();
            const CvResult cv = cross_validate(halves.first, halves.second, grid, rule);
            const FitResult fit = fit_with_rule(sim.data, cv.best_value, rule);
            // same rule for every method: components estimated as nonzero
            const IndexSet selected = support(fit.beta, default_support_tol(fit.beta));

            ExperimentRecord r = base_record(method);
            r.tuning = cv.best_value;
            r.ree = ree(fit.beta, sim.beta0);
            r.false_positives = false_positives(selected, sim.support);
            r.true_positive_rate = true_positive_rate(selected, sim.support);
            r.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            r.beta_hat = fit.beta;
            r.beta0 = sim.beta0;
            out.push_back(std::move(r));
        } catch (const Error& e) {
            out.push_back(failed(method, e.what()));
        }
    }
    return out;
}

std::vector<ExperimentRecord> run_grid(const GridSpec& spec, const RunOptions& opts) {
    spec.validate();
    struct Cell {
        Index n, p, s;
        int replicate;
    };
    std::vector<Cell> cells;
    cells.reserve(spec.cell_count());
    for (Index n : spec.ns)
        for (Index p : spec.ps)
            for (Index s : spec.ss)
                for (int r = 0; r < spec.replicates; ++r) cells.push_back({n, p, s, r});

    std::vector<std::vector<ExperimentRecord>> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            if (c.s > c.p) {
                for (Method m : spec.methods) {
                    ExperimentRecord r;
                    r.scenario = spec.scenario;
                    r.n = c.n;
                    r.p = c.p;
                    r.s = c.s;
                    r.noise = spec.noise;
                    r.method = m;
                    r.seed = cell_seed(spec.base_seed, c.n, c.p, c.s, c.replicate);
                    r.error = "s exceeds p";
                    r.ree = r.true_positive_rate = std::numeric_limits<double>::quiet_NaN();
                    r.false_positives = -1;
                    results[i].push_back(std::move(r));
                }
                continue;
            }
            results[i] = run_cell(spec, c.n, c.p, c.s, c.replicate);
        }
    };

    const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(cells.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::vector<ExperimentRecord> records;
    for (auto& cell : results)
        for (auto& r : cell) {
            if (opts.no_timing) r.wall_time_s = 0.0;
            records.push_back(std::move(r));
        }
    return records;
}

std::string format_results(const std::vector<ExperimentRecord>& records) {
    using io::format_double;
    std::ostringstream out;
    out << "scenario,n,p,s,noise,method,seed,tuning,ree,fp,tpr,wall_s\n";
    for (const auto& r : records) {
        out << r.scenario << ',' << r.n << ',' << r.p << ',' << r.s << ',' << to_string(r.noise)
            << ',' << to_string(r.method) << ',' << r.seed << ',' << format_double(r.tuning) << ','
            << format_double(r.ree) << ',' << r.false_positives << ','
            << format_double(r.true_positive_rate) << ',' << format_double(r.wall_time_s) << '\n';
    }
    return out.str();
}

void emit_results(const std::vector<ExperimentRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << format_results(records);
    if (!out) throw Error("write to '" + path + "' failed");
}

void emit_coefficients(const std::vector<ExperimentRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "n,p,s,method,seed,kind,index,value\n";
    for (const auto& r : records) {
        auto dump = [&](const Vector& v, const char* kind) {
            for (Index j = 0; j < v.size(); ++j) {
                if (v[j] == 0.0) continue;
                out << r.n << ',' << r.p << ',' << r.s << ',' << to_string(r.method) << ',' << r.seed
                    << ',' << kind << ',' << j << ',' << io::format_double(v[j]) << '\n';
            }
        };
        dump(r.beta_hat, "beta_hat");
        dump(r.beta0, "beta0");
    }
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace postcls
