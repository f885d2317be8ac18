#include "levywave/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "levywave/kernel.hpp"
#include "levywave/malliavin.hpp"
#include "levywave/parallel.hpp"
#include "levywave/quadrature.hpp"
#include "levywave/statistics.hpp"
#include "levywave/stats_util.hpp"

namespace levywave {

using nlohmann::json;

// Pinned acceptance tolerances for the almost-sure CLT check. The
// logarithmic average converges like 1/sqrt(log T), so at T = 1e3 a single
// path scatters widely around the Gaussian expectation. These values are
// the maximum deviation observed in the 20-path pre-calibration at the
// default seed (tanh: 0.78, capped square: 0.88), rounded up; the suite
// re-runs the calibration and records it in the report notes.
inline constexpr double kAscltTolTanh = 0.8;
inline constexpr double kAscltTolSquareCap = 0.9;

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::variance: return "variance";
        case ExperimentKind::covariance: return "covariance";
        case ExperimentKind::lln: return "lln";
        case ExperimentKind::clt: return "clt";
        case ExperimentKind::asclt: return "asclt";
        case ExperimentKind::indep: return "indep";
        case ExperimentKind::probe: return "probe";
    }
    return "unknown";
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    static const std::vector<std::pair<std::string, ExperimentKind>> table = {
        {"variance", ExperimentKind::variance}, {"covariance", ExperimentKind::covariance},
        {"lln", ExperimentKind::lln},           {"clt", ExperimentKind::clt},
        {"asclt", ExperimentKind::asclt},       {"indep", ExperimentKind::indep},
        {"probe", ExperimentKind::probe}};
    for (const auto& [name, kind] : table)
        if (name == s) return kind;
    throw ConfigInvalid("experiment: unknown kind '" + s + "'");
}

void expect_keys(const json& obj, const std::vector<std::string>& allowed,
                 const std::string& where) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigInvalid("unknown field '" + item.key() + "' in " + where);
    }
}

double get_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw ConfigInvalid(where + ": missing field '" + std::string(key) + "'");
    if (!obj[key].is_number())
        throw ConfigInvalid(where + ": field '" + std::string(key) + "' must be a number");
    return obj[key].get<double>();
}

LevyMeasureSpec parse_measure(const json& m, std::vector<std::string>* warnings) {
    if (!m.is_object()) throw ConfigInvalid("measure must be an object");
    const std::string kind = m.value("kind", "");
    if (kind == "discrete_atoms") {
        expect_keys(m, {"kind", "atoms"}, "measure");
        if (!m.contains("atoms") || !m["atoms"].is_array())
            throw ConfigInvalid("measure.atoms: must be an array");
        std::vector<Atom> atoms;
        for (const auto& a : m["atoms"]) {
            expect_keys(a, {"z", "rate"}, "measure.atoms[]");
            atoms.push_back({get_number(a, "z", "measure.atoms[]"),
                             get_number(a, "rate", "measure.atoms[]")});
        }
        return LevyMeasureSpec::discrete_atoms(std::move(atoms));
    }
    if (kind == "scaled_density" || kind == "truncated_density") {
        const std::string family = m.value("family", "");
        const bool truncated = kind == "truncated_density";
        LevyMeasureSpec base = [&] {
            if (family == "laplace") {
                expect_keys(m, {"kind", "family", "total_rate", "scale", "eps"}, "measure");
                return LevyMeasureSpec::laplace(get_number(m, "total_rate", "measure"),
                                                get_number(m, "scale", "measure"));
            }
            if (family == "pareto_tail") {
                expect_keys(m, {"kind", "family", "total_rate", "alpha", "z_min", "eps"},
                            "measure");
                return LevyMeasureSpec::pareto_tail(get_number(m, "total_rate", "measure"),
                                                    get_number(m, "alpha", "measure"),
                                                    get_number(m, "z_min", "measure"));
            }
            if (family == "tempered_stable") {
                expect_keys(m, {"kind", "family", "c", "alpha", "beta", "eps"}, "measure");
                return LevyMeasureSpec::tempered_stable(get_number(m, "c", "measure"),
                                                        get_number(m, "alpha", "measure"),
                                                        get_number(m, "beta", "measure"));
            }
            throw ConfigInvalid("measure.family: unknown family '" + family + "'");
        }();
        if (truncated) {
            const double eps = get_number(m, "eps", "measure");
            auto [spec, discarded] = base.truncate(eps);
            if (warnings && discarded > 0.0) {
                std::ostringstream os;
                os << "truncation at eps=" << eps << " discards jump variance " << discarded;
                warnings->push_back(os.str());
            }
            return spec;
        }
        if (m.contains("eps"))
            throw ConfigInvalid("measure.eps is only valid for kind 'truncated_density'");
        if (!base.finite_activity())
            throw ConfigInvalid(
                "measure: tempered_stable has infinite activity; use kind 'truncated_density' "
                "with an eps");
        return base;
    }
    throw ConfigInvalid("measure.kind: unknown kind '" + kind + "'");
}

Nonlinearity parse_sigma(const json& s) {
    if (!s.is_object()) throw ConfigInvalid("sigma must be an object");
    const std::string kind = s.value("kind", "");
    if (kind == "constant") {
        expect_keys(s, {"kind", "c"}, "sigma");
        return Nonlinearity::constant(get_number(s, "c", "sigma"));
    }
    if (kind == "identity") {
        expect_keys(s, {"kind"}, "sigma");
        return Nonlinearity::identity();
    }
    if (kind == "one_plus_half_sin") {
        expect_keys(s, {"kind"}, "sigma");
        return Nonlinearity::one_plus_half_sin();
    }
    if (kind == "table") {
        expect_keys(s, {"kind", "points", "lip"}, "sigma");
        if (!s.contains("points") || !s["points"].is_array())
            throw ConfigInvalid("sigma.points must be an array of [u, value] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : s["points"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigInvalid("sigma.points entries must be [u, value] pairs");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return Nonlinearity::table(std::move(pts), get_number(s, "lip", "sigma"));
    }
    throw ConfigInvalid("sigma.kind: unknown kind '" + kind + "'");
}

double builtin_test_fn(const std::string& name, double v) {
    if (name == "tanh") return std::tanh(v);
    if (name == "square_cap4") return std::min(v * v, 4.0);
    if (name == "one") return 1.0;
    throw ConfigInvalid("unknown asclt test function '" + name + "'");
}

std::function<double(double)> make_test_fn(const std::string& name) {
    builtin_test_fn(name, 0.0);  // validate eagerly
    return [name](double v) { return builtin_test_fn(name, v); };
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void validate(ExperimentConfig& cfg) {
    if (!(cfg.t > 0.0)) throw ConfigInvalid("t must be positive");
    if (cfg.kind == ExperimentKind::covariance && cfg.s < 0.0)
        throw ConfigInvalid("s must be nonnegative");
    if (cfg.kind != ExperimentKind::probe && cfg.kind != ExperimentKind::asclt) {
        if (cfg.R_grid.empty()) throw ConfigInvalid("R_grid must be non-empty");
        if (!std::is_sorted(cfg.R_grid.begin(), cfg.R_grid.end()))
            throw ConfigInvalid("R_grid must be increasing");
        if (cfg.R_grid.front() <= 0.0) throw ConfigInvalid("R_grid entries must be positive");
    }
    if (cfg.kind != ExperimentKind::probe && cfg.kind != ExperimentKind::asclt &&
        cfg.n_replicates < 2)
        throw ConfigInvalid("n_replicates must be at least 2");
    // m2 in (0, inf) is enforced by LevyMeasureSpec construction; the CLT
    // family of experiments additionally needs a finite fourth moment
    const bool needs_m4 = cfg.kind == ExperimentKind::clt || cfg.kind == ExperimentKind::asclt ||
                          cfg.kind == ExperimentKind::indep;
    if (needs_m4 && !cfg.measure.moment_is_finite(4.0))
        throw ConfigInvalid("experiment '" + std::string(to_string(cfg.kind)) +
                            "' requires m4 < infinity, but measure '" + cfg.measure.id() +
                            "' has a divergent fourth moment");
    if (cfg.sigma.value_at_one() == 0.0)
        cfg.warnings.push_back(
            "sigma(1) = 0: u = 1 is the unique solution and every statistic is trivial");
    if (cfg.kind == ExperimentKind::asclt) {
        if (!(cfg.R_min > 0.0) || !(cfg.R_max > cfg.R_min))
            throw ConfigInvalid("asclt needs 0 < R_min < R_max");
        if (cfg.test_fns.empty()) throw ConfigInvalid("asclt needs at least one test function");
        for (const auto& f : cfg.test_fns) builtin_test_fn(f, 0.0);
    }
    if (cfg.kind == ExperimentKind::indep && cfg.eval_points.empty())
        throw ConfigInvalid("indep needs at least one eval point");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
    expect_keys(j,
                {"schema_version", "experiment", "measure", "sigma", "t", "s", "R_grid",
                 "n_replicates", "master_seed", "workers", "out_dir", "check", "asclt",
                 "eval_points", "probe"},
                "config");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw ConfigInvalid("config requires schema_version = 1");
    if (!j.contains("experiment")) throw ConfigInvalid("config: missing 'experiment'");

    ExperimentConfig cfg;
    cfg.kind = kind_from_string(j["experiment"].get<std::string>());
    if (j.contains("measure")) cfg.measure = parse_measure(j["measure"], &cfg.warnings);
    if (j.contains("sigma")) cfg.sigma = parse_sigma(j["sigma"]);
    if (j.contains("t")) cfg.t = get_number(j, "t", "config");
    if (j.contains("s")) cfg.s = get_number(j, "s", "config");
    if (j.contains("R_grid")) {
        if (!j["R_grid"].is_array()) throw ConfigInvalid("R_grid must be an array");
        cfg.R_grid.clear();
        for (const auto& r : j["R_grid"]) cfg.R_grid.push_back(r.get<double>());
    }
    if (j.contains("n_replicates")) cfg.n_replicates = j["n_replicates"].get<std::size_t>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<unsigned>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("check")) cfg.check_mode = j["check"].get<bool>();
    if (j.contains("asclt")) {
        const json& a = j["asclt"];
        expect_keys(a, {"R_min", "R_max", "grid", "test_fns", "aux_replicates"}, "asclt");
        if (a.contains("R_min")) cfg.R_min = a["R_min"].get<double>();
        if (a.contains("R_max")) cfg.R_max = a["R_max"].get<double>();
        if (a.contains("grid")) cfg.asclt_grid = a["grid"].get<std::size_t>();
        if (a.contains("aux_replicates"))
            cfg.asclt_aux_replicates = a["aux_replicates"].get<std::size_t>();
        if (a.contains("test_fns")) {
            cfg.test_fns.clear();
            for (const auto& f : a["test_fns"]) cfg.test_fns.push_back(f.get<std::string>());
        }
    }
    if (j.contains("eval_points")) {
        if (!j["eval_points"].is_array()) throw ConfigInvalid("eval_points must be an array");
        cfg.eval_points.clear();
        for (const auto& p : j["eval_points"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigInvalid("eval_points entries must be [t, x] pairs");
            cfg.eval_points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    }
    if (j.contains("probe")) {
        const json& p = j["probe"];
        expect_keys(p, {"skeletons", "xis"}, "probe");
        if (p.contains("skeletons")) cfg.probe_skeletons = p["skeletons"].get<std::size_t>();
        if (p.contains("xis")) cfg.probe_xis = p["xis"].get<std::size_t>();
    }
    cfg.canonical_json = j.dump();
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    switch (kind) {
        case ExperimentKind::variance:
            cfg.sigma = Nonlinearity::constant(1.0);
            cfg.R_grid = {1.0};
            cfg.n_replicates = 10000;
            break;
        case ExperimentKind::covariance:
            cfg.sigma = Nonlinearity::constant(1.0);
            cfg.s = 1.0;
            cfg.R_grid = {16.0};
            cfg.n_replicates = 10000;
            break;
        case ExperimentKind::lln:
            cfg.sigma = Nonlinearity::identity();
            cfg.R_grid = {4.0, 16.0, 64.0};
            cfg.n_replicates = 5000;
            break;
        case ExperimentKind::clt:
            cfg.sigma = Nonlinearity::identity();
            cfg.R_grid = {2.0, 4.0, 8.0, 16.0, 32.0};
            cfg.n_replicates = 10000;
            break;
        case ExperimentKind::asclt:
            cfg.sigma = Nonlinearity::constant(1.0);
            cfg.R_min = 1.0;
            cfg.R_max = 1000.0;
            break;
        case ExperimentKind::indep:
            cfg.sigma = Nonlinearity::identity();
            cfg.R_grid = {4.0, 16.0, 64.0};
            cfg.n_replicates = 20000;
            cfg.eval_points = {{1.0, 0.0}};
            break;
        case ExperimentKind::probe:
            cfg.sigma = Nonlinearity::identity();
            break;
    }
    json j;
    j["schema_version"] = 1;
    j["experiment"] = to_string(kind);
    cfg.canonical_json = j.dump();
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// run(): execute one experiment and persist results
// ---------------------------------------------------------------------------

namespace {

struct ResultWriter {
    std::ofstream jsonl;
    std::ofstream csv;
    std::ofstream plot;
    const ExperimentConfig* cfg = nullptr;

    void open(const ExperimentConfig& config, RunManifest& manifest) {
        cfg = &config;
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        fs::create_directories(fs::path(config.out_dir) / "plotdata");
        const std::string jsonl_path = config.out_dir + "/results.jsonl";
        const std::string csv_path = config.out_dir + "/summary.csv";
        const std::string plot_path =
            config.out_dir + "/plotdata/" + to_string(config.kind) + ".csv";
        jsonl.open(jsonl_path);
        csv.open(csv_path);
        plot.open(plot_path);
        if (!jsonl || !csv || !plot)
            throw Error("cannot open output files under '" + config.out_dir + "'");
        csv << "experiment,statistic,t,s,R,estimate,std_error,n,master_seed,measure,sigma\n";
        plot << "x,y,y_err\n";
        manifest.outputs = {jsonl_path, csv_path, plot_path};
    }

    void record(const std::string& statistic, double t, double s, double R, double estimate,
                double std_error, std::size_t n, const json& extra = json::object()) {
        json row;
        row["experiment"] = to_string(cfg->kind);
        row["statistic"] = statistic;
        row["t"] = t;
        row["s"] = s;
        row["R"] = R;
        row["estimate"] = estimate;
        row["std_error"] = std_error;
        row["n"] = n;
        row["master_seed"] = cfg->master_seed;
        row["measure"] = cfg->measure.id();
        row["sigma"] = cfg->sigma.id();
        for (const auto& item : extra.items()) row[item.key()] = item.value();
        jsonl << row.dump() << "\n";
        csv << to_string(cfg->kind) << "," << statistic << "," << t << "," << s << "," << R << ","
            << std::setprecision(12) << estimate << "," << std_error << "," << n << ","
            << cfg->master_seed << "," << cfg->measure.id() << "," << cfg->sigma.id() << "\n";
    }

    void plot_point(double x, double y, double y_err) {
        plot << std::setprecision(12) << x << "," << y << "," << y_err << "\n";
    }
};

}  // namespace

RunManifest run(const ExperimentConfig& cfg) {
    RunManifest manifest;
    manifest.config_hash = fnv1a64(cfg.canonical_json);
    manifest.tool_version = kToolVersion;
    manifest.started_at = now_iso8601();
    manifest.master_seed = cfg.master_seed;
    manifest.experiment = to_string(cfg.kind);
    manifest.n_replicates = cfg.n_replicates;
    for (const auto& w : cfg.warnings) manifest.notes.push_back("warning: " + w);

    ResultWriter out;
    out.open(cfg, manifest);

    switch (cfg.kind) {
        case ExperimentKind::variance: {
            for (double R : cfg.R_grid) {
                const EstimatorReport rep = mc_variance(cfg.t, R, cfg.sigma, cfg.measure,
                                                        cfg.n_replicates, cfg.master_seed,
                                                        cfg.workers);
                json extra;
                extra["ci95"] = {rep.ci95_lo, rep.ci95_hi};
                extra["sample_mean"] = rep.sample_mean;
                extra["mean_std_error"] = rep.mean_std_error;
                out.record("var_FR", cfg.t, 0.0, R, rep.estimate, rep.std_error, rep.n_replicates,
                           extra);
                out.plot_point(R, rep.estimate, rep.std_error);
                if (cfg.check_mode &&
                    std::fabs(rep.sample_mean) > 4.0 * rep.mean_std_error + 1e-12) {
                    manifest.checks_passed = false;
                    manifest.notes.push_back("centering check failed at R=" + std::to_string(R));
                }
            }
            break;
        }
        case ExperimentKind::covariance: {
            for (double R : cfg.R_grid) {
                const LimitCovariance cov =
                    mc_limit_covariance(cfg.t, cfg.s, R, cfg.sigma, cfg.measure, cfg.n_replicates,
                                        cfg.master_seed, cfg.workers);
                out.record("K_hat", cfg.t, cfg.s, R, cov.K_hat, cov.std_error, cov.n_replicates);
                out.plot_point(R, cov.K_hat, cov.std_error);
            }
            break;
        }
        case ExperimentKind::lln: {
            const auto points = lln_check(cfg.t, cfg.R_grid, cfg.sigma, cfg.measure,
                                          cfg.n_replicates, cfg.master_seed, cfg.workers);
            for (const auto& p : points) {
                out.record("mean_sq_FR_over_R", cfg.t, 0.0, p.R, p.mean_sq, p.std_error,
                           cfg.n_replicates);
                out.plot_point(p.R, p.mean_sq, p.std_error);
            }
            break;
        }
        case ExperimentKind::clt: {
            const CltRateResult res =
                clt_rate_experiment(cfg.t, cfg.R_grid, cfg.sigma, cfg.measure, cfg.n_replicates,
                                    cfg.master_seed, cfg.workers);
            for (const auto& p : res.points) {
                json extra;
                extra["d_corrected"] = p.d_corrected;
                out.record("wasserstein", cfg.t, 0.0, p.R, p.d_wass, p.std_error,
                           cfg.n_replicates, extra);
                out.plot_point(p.R, p.d_wass, p.std_error);
            }
            out.record("noise_floor", cfg.t, 0.0, 0.0, res.noise_floor, 0.0, cfg.n_replicates);
            if (res.noise_floor_reached) {
                manifest.notes.push_back(
                    "NoiseFloorReached: too few points above twice the noise floor to fit a "
                    "slope");
            } else {
                out.record("log_log_slope", cfg.t, 0.0, 0.0, res.slope, 0.0, cfg.n_replicates);
            }
            break;
        }
        case ExperimentKind::asclt: {
            const std::size_t grid =
                cfg.asclt_grid > 0
                    ? cfg.asclt_grid
                    : static_cast<std::size_t>(64.0 * std::log10(cfg.R_max / cfg.R_min)) + 1;
            for (const auto& fn_name : cfg.test_fns) {
                const AscltResult res = asclt_experiment(
                    cfg.t, cfg.R_min, cfg.R_max, grid, cfg.sigma, cfg.measure,
                    make_test_fn(fn_name), cfg.master_seed, 0, cfg.asclt_aux_replicates,
                    cfg.workers);
                json extra;
                extra["test_fn"] = fn_name;
                extra["gaussian_expectation"] = res.gaussian_expectation;
                extra["grid_points"] = res.grid_points;
                out.record("asclt_log_average", cfg.t, 0.0, cfg.R_max, res.log_average, 0.0, 1,
                           extra);
                out.plot_point(cfg.R_max, res.log_average, 0.0);
            }
            break;
        }
        case ExperimentKind::indep: {
            const auto points = independence_experiment(
                cfg.t, cfg.R_grid, cfg.eval_points, [](double v) { return std::tanh(v); },
                [](std::span<const double> u) { return std::tanh(u[0]); }, cfg.sigma, cfg.measure,
                cfg.n_replicates, cfg.master_seed, cfg.workers);
            for (const auto& p : points) {
                out.record("cov_f1_f2", cfg.t, 0.0, p.R, p.covariance, p.std_error,
                           cfg.n_replicates);
                out.plot_point(p.R, p.covariance, p.std_error);
            }
            break;
        }
        case ExperimentKind::probe: {
            // commutation + light-cone probes on random skeletons
            const SpaceTimeWindow window{cfg.t, -2.0 * cfg.t, 2.0 * cfg.t};
            double max_residual = 0.0;
            double max_outside = 0.0;
            std::size_t row_count = 0;
            for (std::size_t k = 0; k < cfg.probe_skeletons; ++k) {
                CounterRng rng(cfg.master_seed, stream::probe, k);
                const JumpSkeleton skel = sample_skeleton(window, cfg.measure, rng);
                for (std::size_t q = 0; q < cfg.probe_xis; ++q) {
                    const JumpPoint xi{rng.uniform(0.0, window.t_max),
                                       rng.uniform(window.x_min, window.x_max),
                                       cfg.measure.sample_jump(rng)};
                    const double tq = rng.uniform(0.3 * cfg.t, cfg.t);
                    const double xq_max = 2.0 * cfg.t - tq;
                    const double xq = rng.uniform(-xq_max, xq_max);
                    const CommutationReport rep = commutation_check(skel, xi, cfg.sigma, tq, xq);
                    const double rel = rep.residual / (1.0 + std::fabs(rep.u_value));
                    max_residual = std::max(max_residual, rel);
                    json row;
                    row["xi"] = {{"r", xi.s}, {"y", xi.y}, {"z", xi.z}};
                    row["query"] = {{"t", tq}, {"x", xq}};
                    row["D_plus"] = rep.d_plus;
                    row["rhs_sum"] = rep.rhs;
                    row["residual"] = rep.residual;
                    out.jsonl << row.dump() << "\n";
                    ++row_count;
                    if (cfg.check_mode && rel > 1e-10) manifest.checks_passed = false;

                    // light-cone probe: query outside the cone of xi
                    const double t_out = rng.uniform(0.0, cfg.t);
                    const double xo_max = 2.0 * cfg.t - t_out;
                    const double x_out = rng.uniform(-xo_max, xo_max);
                    const bool outside =
                        t_out <= xi.s || std::fabs(x_out - xi.y) >= t_out - xi.s;
                    if (outside) {
                        const std::pair<double, double> q[1] = {{t_out, x_out}};
                        const auto field = add_one_cost(skel, xi, cfg.sigma, q);
                        max_outside = std::max(max_outside, std::fabs(field.values[0]));
                    }
                }
            }
            out.record("max_commutation_residual", cfg.t, 0.0, 0.0, max_residual, 0.0, row_count);
            out.record("max_D_outside_cone", cfg.t, 0.0, 0.0, max_outside, 0.0, row_count);
            if (cfg.check_mode && max_outside != 0.0) manifest.checks_passed = false;
            break;
        }
    }

    manifest.finished_at = now_iso8601();
    json mj;
    mj["config_hash"] = manifest.config_hash;
    mj["tool_version"] = manifest.tool_version;
    mj["started_at"] = manifest.started_at;
    mj["finished_at"] = manifest.finished_at;
    mj["master_seed"] = manifest.master_seed;
    mj["experiment"] = manifest.experiment;
    mj["n_replicates"] = manifest.n_replicates;
    mj["outputs"] = manifest.outputs;
    mj["checks_passed"] = manifest.checks_passed;
    mj["notes"] = manifest.notes;
    std::ofstream mf(cfg.out_dir + "/manifest.json");
    mf << mj.dump(2) << "\n";
    manifest.outputs.push_back(cfg.out_dir + "/manifest.json");
    return manifest;
}

// ---------------------------------------------------------------------------
// check_suite(): the acceptance criteria, one row each
// ---------------------------------------------------------------------------

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt_g(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// quadrature oracle for phi_sq_mass: nested adaptive Simpson over r and y
double phi_sq_mass_quadrature(double t, double R) {
    return adaptive_simpson(
        [&](double r) {
            const double a = t - r;
            const double span = R + a + 1.0;
            return adaptive_simpson(
                [&](double y) {
                    const double p = kernel::phi(t, R, r, y);
                    return p * p;
                },
                -span, span, 1e-12);
        },
        0.0, t, 1e-11);
}

LevyMeasureSpec unit_atoms() {
    return LevyMeasureSpec::discrete_atoms({{1.0, 1.0}, {-1.0, 1.0}});
}

}  // namespace

CheckReport check_suite(std::uint64_t master_seed, unsigned workers, std::ostream* progress) {
    CheckReport report;
    const LevyMeasureSpec atoms = unit_atoms();  // m2 = 2, mu1 = 0
    const Nonlinearity sig_one = Nonlinearity::constant(1.0);
    const Nonlinearity sig_id = Nonlinearity::identity();
    const Nonlinearity sig_sin = Nonlinearity::one_plus_half_sin();

    const auto push = [&](CheckRow row) {
        report.rows.push_back(std::move(row));
        if (progress) {
            const CheckRow& r = report.rows.back();
            *progress << (r.pass ? "PASS" : "FAIL") << "  [" << r.index << "] " << r.name << ": "
                      << r.observed << " vs " << r.expected << " (tol " << r.tolerance << ", "
                      << fmt_g(r.seconds, 3) << "s)\n";
        }
    };

    // 1. isometry oracle: Var(F_1(1)) = m2 * phi_sq_mass(1,1) = 1 for sigma = 1
    {
        Timer timer;
        const double closed = kernel::phi_sq_mass(1.0, 1.0);
        const double quad = phi_sq_mass_quadrature(1.0, 1.0);
        const bool quad_ok = std::fabs(closed - quad) <= 1e-9;
        const EstimatorReport rep =
            mc_variance(1.0, 1.0, sig_one, atoms, 10000, master_seed, workers);
        const double expected = atoms.m2() * closed;
        const bool pass = quad_ok && std::fabs(rep.estimate - expected) <= 3.0 * rep.std_error;
        push({1, "isometry variance", fmt_g(expected), fmt_g(rep.estimate),
              "3*SE=" + fmt_g(3.0 * rep.std_error) + (quad_ok ? "" : " quad-mismatch"), pass,
              timer.elapsed()});
    }

    // 2. limiting covariance: K(1,1) = 2 m2 int_0^1 (1-r)^2 dr = 4/3
    {
        Timer timer;
        const double oracle = limit_covariance_const_sigma(1.0, 1.0, atoms.m2(), 1.0);
        const double quad = 2.0 * atoms.m2() *
                            adaptive_simpson([](double r) { return (1.0 - r) * (1.0 - r); }, 0.0,
                                             1.0, 1e-12);
        const bool quad_ok = std::fabs(oracle - quad) <= 1e-9;
        const LimitCovariance cov =
            mc_limit_covariance(1.0, 1.0, 16.0, sig_one, atoms, 10000, master_seed, workers);
        const bool pass = quad_ok && std::fabs(cov.K_hat - oracle) <= 3.0 * cov.std_error;
        push({2, "limiting covariance", fmt_g(oracle), fmt_g(cov.K_hat),
              "3*SE=" + fmt_g(3.0 * cov.std_error) + (quad_ok ? "" : " quad-mismatch"), pass,
              timer.elapsed()});
    }

    // 3. variance scaling: sigma(u) = u, var_16/var_8 = 2 up to propagated SE
    {
        Timer timer;
        const std::size_t n = 10000;
        const double grid[2] = {8.0, 16.0};
        const std::vector<double> samples =
            mc_spatial_samples(1.0, grid, sig_id, atoms, n, master_seed, stream::scaling, workers);
        std::vector<double> f8(n), f16(n);
        for (std::size_t i = 0; i < n; ++i) {
            f8[i] = samples[2 * i];
            f16[i] = samples[2 * i + 1];
        }
        const double m8 = mean_of(f8), m16 = mean_of(f16);
        std::vector<double> u(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = (f8[i] - m8) * (f8[i] - m8);
            v[i] = (f16[i] - m16) * (f16[i] - m16);
        }
        const double mu = mean_of(u), mv = mean_of(v);
        const double ratio = mv / mu;
        const double var_u = sample_variance(u), var_v = sample_variance(v);
        const double cov_uv = sample_covariance(u, v).covariance * (static_cast<double>(n) - 1.0) /
                              static_cast<double>(n);
        const double rel_var =
            (var_v / (mv * mv) + var_u / (mu * mu) - 2.0 * cov_uv / (mu * mv)) /
            static_cast<double>(n);
        const double se_ratio = ratio * std::sqrt(std::max(0.0, rel_var));
        const bool pass = std::fabs(ratio - 2.0) <= 3.0 * se_ratio;
        push({3, "variance scaling 16/8", "2", fmt_g(ratio), "3*SE=" + fmt_g(3.0 * se_ratio),
              pass, timer.elapsed()});
    }

    // 4. LLN: E[(F_R/R)^2] strictly decreasing, R=64 below quarter of R=4
    {
        Timer timer;
        const double grid[3] = {4.0, 16.0, 64.0};
        const auto points = lln_check(1.0, grid, sig_id, atoms, 5000, master_seed, workers);
        const bool decreasing = points[0].mean_sq > points[1].mean_sq &&
                                points[1].mean_sq > points[2].mean_sq;
        const double bound = points[0].mean_sq / 4.0 +
                             3.0 * std::sqrt(points[2].std_error * points[2].std_error +
                                             points[0].std_error * points[0].std_error / 16.0);
        const bool pass = decreasing && points[2].mean_sq < bound;
        push({4, "LLN decay", "<" + fmt_g(bound),
              fmt_g(points[0].mean_sq) + ">" + fmt_g(points[1].mean_sq) + ">" +
                  fmt_g(points[2].mean_sq),
              "quarter+3*SE", pass, timer.elapsed()});
    }

    // 5. CLT rate: W1 monotone up to SE, slope in [-0.8,-0.2], floor at R=32
    {
        Timer timer;
        const double grid[5] = {2.0, 4.0, 8.0, 16.0, 32.0};
        const CltRateResult res =
            clt_rate_experiment(1.0, grid, sig_id, atoms, 10000, master_seed, workers);
        bool monotone = true;
        for (std::size_t k = 1; k < res.points.size(); ++k) {
            const double slack = std::sqrt(res.points[k].std_error * res.points[k].std_error +
                                           res.points[k - 1].std_error * res.points[k - 1].std_error);
            if (res.points[k].d_wass > res.points[k - 1].d_wass + slack) monotone = false;
        }
        const bool slope_ok =
            !res.noise_floor_reached && res.slope >= -0.8 && res.slope <= -0.2;
        const bool floor_ok = res.points.back().d_wass <= 2.5 * res.noise_floor;
        const bool pass = monotone && slope_ok && floor_ok;
        std::string observed = "slope=" + fmt_g(res.slope, 3) +
                               " d32=" + fmt_g(res.points.back().d_wass, 3) +
                               " floor=" + fmt_g(res.noise_floor, 3);
        if (!monotone) observed += " non-monotone";
        push({5, "CLT Wasserstein rate", "slope in [-0.8,-0.2]", observed,
              "monotone+2.5*floor", pass, timer.elapsed()});
        std::ostringstream note;
        note << "clt d_wass (corrected) by R:";
        for (const auto& p : res.points)
            note << " " << p.R << ":" << fmt_g(p.d_wass, 4) << "(" << fmt_g(p.d_corrected, 4)
                 << ")";
        report.notes.push_back(note.str());
    }

    // 6. commutation identity, pathwise, two nonlinearities
    {
        Timer timer;
        const SpaceTimeWindow window{1.0, -2.0, 2.0};
        double max_rel = 0.0;
        for (int variant = 0; variant < 2; ++variant) {
            const Nonlinearity& sig = variant == 0 ? sig_id : sig_sin;
            for (std::size_t k = 0; k < 50; ++k) {
                CounterRng rng(master_seed, stream::commutation,
                               k + (variant == 0 ? 0 : 1000));
                const JumpSkeleton skel = sample_skeleton(window, atoms, rng);
                for (std::size_t q = 0; q < 20; ++q) {
                    const JumpPoint xi{rng.uniform(0.0, 1.0), rng.uniform(-2.0, 2.0),
                                       atoms.sample_jump(rng)};
                    const double tq = rng.uniform(0.3, 1.0);
                    const double xq = rng.uniform(-(2.0 - tq), 2.0 - tq);
                    const CommutationReport rep = commutation_check(skel, xi, sig, tq, xq);
                    max_rel = std::max(max_rel, rep.residual / (1.0 + std::fabs(rep.u_value)));
                }
            }
        }
        push({6, "commutation identity", "<=1e-10", fmt_g(max_rel, 3), "relative residual",
              max_rel <= 1e-10, timer.elapsed()});
    }

    // 7. light-cone support: D+ vanishes bit-exactly outside the cone of xi
    {
        Timer timer;
        const SpaceTimeWindow window{1.0, -2.0, 2.0};
        double max_abs = 0.0;
        std::size_t tested = 0;
        CounterRng rng(master_seed, stream::lightcone, 0);
        while (tested < 1000) {
            const JumpSkeleton skel = sample_skeleton(window, atoms, rng);
            const JumpPoint xi{rng.uniform(0.0, 1.0), rng.uniform(-2.0, 2.0),
                               atoms.sample_jump(rng)};
            const double tq = rng.uniform(0.0, 1.0);
            const double xq = rng.uniform(-(2.0 - tq), 2.0 - tq);
            if (tq > xi.s && std::fabs(xq - xi.y) < tq - xi.s) continue;  // inside the cone
            const std::pair<double, double> q[1] = {{tq, xq}};
            const auto field = add_one_cost(skel, xi, sig_id, q);
            max_abs = std::max(max_abs, std::fabs(field.values[0]));
            ++tested;
        }
        push({7, "light-cone support", "0 (bit-exact)", fmt_g(max_abs), "exact", max_abs == 0.0,
              timer.elapsed()});
    }

    // 8. stationarity: two-sample KS on u(1,0) vs u(1,5)
    {
        Timer timer;
        const auto [u1, u2] =
            stationarity_samples(1.0, 0.0, 5.0, sig_id, atoms, 10000, master_seed, workers);
        const KsResult ks = ks_two_sample(u1, u2);
        push({8, "stationarity KS", "p>0.01", "p=" + fmt_g(ks.p_value, 4),
              "D=" + fmt_g(ks.statistic, 4), ks.p_value > 0.01, timer.elapsed()});
    }

    // 9. skeleton law: chi-square GOF to Poisson(4) and disjoint-cell covariance
    {
        Timer timer;
        const SpaceTimeWindow window{1.0, -1.0, 1.0};
        const std::size_t n = 10000;
        std::vector<double> counts(n), left(n), right(n);
        parallel_replicates(n, workers, [&](std::size_t i) {
            CounterRng rng(master_seed, stream::skeleton_law, i);
            const JumpSkeleton skel = sample_skeleton(window, atoms, rng);
            double l = 0.0, r = 0.0;
            for (const JumpPoint& p : skel.points) (p.y < 0.0 ? l : r) += 1.0;
            counts[i] = static_cast<double>(skel.points.size());
            left[i] = l;
            right[i] = r;
        });
        // pool bins so every expected count is at least 5
        const double lambda = 4.0;
        std::vector<double> expected_p;
        double tail = 1.0;
        double pk = std::exp(-lambda);
        for (int k = 0;; ++k) {
            if (static_cast<double>(n) * pk < 5.0 && k > static_cast<int>(lambda)) break;
            expected_p.push_back(pk);
            tail -= pk;
            pk *= lambda / static_cast<double>(k + 1);
        }
        expected_p.push_back(std::max(tail, 1e-12));
        const std::size_t nbins = expected_p.size();
        std::vector<double> observed(nbins, 0.0);
        for (double c : counts) {
            const std::size_t k = std::min(static_cast<std::size_t>(c), nbins - 1);
            observed[k] += 1.0;
        }
        double chi2 = 0.0;
        for (std::size_t k = 0; k < nbins; ++k) {
            const double e = static_cast<double>(n) * expected_p[k];
            chi2 += (observed[k] - e) * (observed[k] - e) / e;
        }
        const double p_gof = chi_square_sf(chi2, static_cast<double>(nbins - 1));
        const CovarianceEstimate cc = sample_covariance(left, right);
        const bool pass = p_gof > 0.01 && std::fabs(cc.covariance) <= 4.0 * cc.std_error;
        push({9, "skeleton Poisson law", "GOF p>0.01, |cov|<4*SE",
              "p=" + fmt_g(p_gof, 4) + " cov=" + fmt_g(cc.covariance, 3),
              "4*SE=" + fmt_g(4.0 * cc.std_error, 3), pass, timer.elapsed()});
    }

    // 10. asymptotic independence of F_R/sigma_R from u(1,0)
    {
        Timer timer;
        const double grid[3] = {4.0, 16.0, 64.0};
        const std::pair<double, double> pts[1] = {{1.0, 0.0}};
        const auto points = independence_experiment(
            1.0, grid, pts, [](double v) { return std::tanh(v); },
            [](std::span<const double> u) { return std::tanh(u[0]); }, sig_id, atoms, 20000,
            master_seed, workers);
        bool monotone = true;
        for (std::size_t k = 1; k < points.size(); ++k) {
            const double slack = std::sqrt(points[k].std_error * points[k].std_error +
                                           points[k - 1].std_error * points[k - 1].std_error);
            if (std::fabs(points[k].covariance) >
                std::fabs(points[k - 1].covariance) + slack)
                monotone = false;
        }
        const double bound =
            0.5 * std::fabs(points[0].covariance) +
            3.0 * std::sqrt(points[2].std_error * points[2].std_error +
                            0.25 * points[0].std_error * points[0].std_error);
        const bool pass = monotone && std::fabs(points[2].covariance) < bound;
        push({10, "asymptotic independence", "<" + fmt_g(bound, 3),
              "cov=" + fmt_g(points[0].covariance, 3) + "/" + fmt_g(points[1].covariance, 3) +
                  "/" + fmt_g(points[2].covariance, 3),
              "half+3*SE", pass, timer.elapsed()});
    }

    // 11. ASCLT: logarithmic average against the Gaussian expectation; the
    // tolerance was locked from the 20-path pre-calibration recorded below
    {
        Timer timer;
        const std::size_t grid = 193;  // 64 nodes per decade, 3 decades
        const struct {
            const char* name;
            double tol;
        } fns[] = {{"tanh", kAscltTolTanh}, {"square_cap4", kAscltTolSquareCap}};
        bool pass = true;
        std::string observed;
        for (const auto& fn : fns) {
            const auto test_fn = make_test_fn(fn.name);
            const AscltResult acc = asclt_experiment(1.0, 1.0, 1000.0, grid, sig_one, atoms,
                                                     test_fn, master_seed, 0, 2000, workers);
            const double dev0 = std::fabs(acc.log_average - acc.gaussian_expectation);
            double sum = 0.0, max_dev = 0.0;
            for (std::uint64_t path = 1; path <= 20; ++path) {
                const AscltResult cal = asclt_experiment(1.0, 1.0, 1000.0, grid, sig_one, atoms,
                                                         test_fn, master_seed, path, 2000,
                                                         workers);
                const double dev = std::fabs(cal.log_average - cal.gaussian_expectation);
                sum += dev;
                max_dev = std::max(max_dev, dev);
            }
            report.notes.push_back(std::string("asclt calibration ") + fn.name + ": mean dev=" +
                                   fmt_g(sum / 20.0, 3) + ", max dev=" + fmt_g(max_dev, 3) +
                                   " over 20 paths; pinned tol=" + fmt_g(fn.tol, 3));
            if (!observed.empty()) observed += " ";
            observed += std::string(fn.name) + ":" + fmt_g(dev0, 3);
            if (dev0 > fn.tol) pass = false;
        }
        push({11, "ASCLT log average", "tanh<=" + fmt_g(kAscltTolTanh) + " sq<=" +
                                           fmt_g(kAscltTolSquareCap),
              observed, "pre-calibrated", pass, timer.elapsed()});
    }

    // 12. Picard grid solver agrees with the exact recursion at jump points
    {
        Timer timer;
        const SpaceTimeWindow window{1.0, -0.5, 0.5};
        const LevyMeasureSpec sparse_atoms =
            LevyMeasureSpec::discrete_atoms({{1.0, 0.5}, {-1.0, 0.5}});
        const double dt = 1.0 / 256.0, dx = 1.0 / 256.0;
        double sup = 0.0;
        for (std::uint64_t k = 0; k < 20; ++k) {
            CounterRng rng(master_seed, stream::picard, k);
            const JumpSkeleton skel = sample_skeleton(window, sparse_atoms, rng);
            const SolutionAtJumps exact = solve_on_skeleton(skel, sig_id);
            const GridSolution grid = picard_solve(skel, sig_id, dt, dx);
            for (std::size_t j = 0; j < skel.points.size(); ++j) {
                const double g = grid.value_at(skel.points[j].s, skel.points[j].y);
                sup = std::max(sup, std::fabs(g - exact.values[j]));
            }
        }
        const double bound = 5.0 * (dt + dx);
        push({12, "Picard vs exact", "<" + fmt_g(bound, 4), fmt_g(sup, 4), "5*(dt+dx)",
              sup < bound, timer.elapsed()});
    }

    report.all_pass = std::all_of(report.rows.begin(), report.rows.end(),
                                  [](const CheckRow& r) { return r.pass; });
    return report;
}

void print_check_report(const CheckReport& report, std::ostream& os) {
    os << "criterion                         expected      observed      tolerance        verdict\n";
    os << "-----------------------------------------------------------------------------------\n";
    for (const CheckRow& r : report.rows) {
        os << std::left << std::setw(34) << (std::to_string(r.index) + ". " + r.name)
           << std::setw(14) << r.expected << std::setw(14) << r.observed << std::setw(17)
           << r.tolerance << (r.pass ? "PASS" : "FAIL") << "  (" << fmt_g(r.seconds, 3) << "s)\n";
    }
    os << (report.all_pass ? "ALL CRITERIA PASS\n" : "SOME CRITERIA FAILED\n");
    for (const auto& n : report.notes) os << "note: " << n << "\n";
}

void write_check_report_json(const CheckReport& report, const std::string& path) {
    json j;
    j["all_pass"] = report.all_pass;
    j["tool_version"] = kToolVersion;
    j["rows"] = json::array();
    for (const CheckRow& r : report.rows) {
        json row;
        row["index"] = r.index;
        row["name"] = r.name;
        row["expected"] = r.expected;
        row["observed"] = r.observed;
        row["tolerance"] = r.tolerance;
        row["pass"] = r.pass;
        row["seconds"] = r.seconds;
        j["rows"].push_back(row);
    }
    j["notes"] = report.notes;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace levywave
