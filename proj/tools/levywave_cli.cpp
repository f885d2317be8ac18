// Command-line front end: simulate one skeleton, run the Monte-Carlo
// experiments, probe the derivative structure, or run the full check suite.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "levywave/harness.hpp"
#include "levywave/kernel.hpp"
#include "levywave/malliavin.hpp"
#include "levywave/statistics.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config (JSON)");
    cmd->add_option("--seed", flags.seed, "master seed override");
    cmd->add_option("--workers", flags.workers, "worker count (0 = all cores)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_flag("--check", flags.check, "fail with nonzero exit on failed internal checks");
}

// Env overrides apply to seed and worker count only.
void apply_env(levywave::ExperimentConfig& cfg) {
    if (const char* s = std::getenv("LEVYWAVE_SEED")) cfg.master_seed = std::strtoull(s, nullptr, 10);
    if (const char* w = std::getenv("LEVYWAVE_WORKERS"))
        cfg.workers = static_cast<unsigned>(std::strtoul(w, nullptr, 10));
}

levywave::ExperimentConfig resolve_config(const CommonFlags& flags,
                                          levywave::ExperimentKind fallback_kind) {
    levywave::ExperimentConfig cfg = flags.config_path.empty()
                                         ? levywave::default_config(fallback_kind)
                                         : levywave::load_config_file(flags.config_path);
    apply_env(cfg);
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.check) cfg.check_mode = true;
    return cfg;
}

int run_experiment(const CommonFlags& flags, levywave::ExperimentKind kind) {
    const levywave::ExperimentConfig cfg = resolve_config(flags, kind);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    const levywave::RunManifest manifest = levywave::run(cfg);
    std::cout << "experiment " << manifest.experiment << " done, outputs under " << cfg.out_dir
              << " (config hash " << manifest.config_hash << ")\n";
    for (const auto& note : manifest.notes) std::cout << "note: " << note << "\n";
    if (cfg.check_mode && !manifest.checks_passed) {
        std::cerr << "internal checks failed\n";
        return 1;
    }
    return 0;
}

int run_simulate(const CommonFlags& flags, double t, double R, bool with_grid) {
    levywave::ExperimentConfig cfg = resolve_config(flags, levywave::ExperimentKind::variance);
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    levywave::CounterRng rng(cfg.master_seed, levywave::stream::unit_test, 0);
    const auto window = levywave::required_window(t, R);
    const auto skel = levywave::sample_skeleton(window, cfg.measure, rng);
    const auto sol = levywave::solve_on_skeleton(skel, cfg.sigma);

    std::ofstream sk(cfg.out_dir + "/skeleton.txt");
    levywave::write_skeleton(sk, skel);
    std::ofstream sv(cfg.out_dir + "/solution.csv");
    sv << "s,y,z,u,sigma_u\n";
    sv.precision(17);
    for (std::size_t j = 0; j < skel.points.size(); ++j)
        sv << skel.points[j].s << "," << skel.points[j].y << "," << skel.points[j].z << ","
           << sol.values[j] << "," << sol.sigma_values[j] << "\n";
    const double f = levywave::spatial_integral(t, R, skel, sol);
    std::cout << "skeleton with " << skel.points.size() << " jumps written to " << cfg.out_dir
              << "; F_R(t) = " << f << "\n";
    if (with_grid) {
        const auto grid = levywave::picard_solve(skel, cfg.sigma, t / 128.0,
                                                 (window.x_max - window.x_min) / 256.0);
        std::ofstream gv(cfg.out_dir + "/grid.csv");
        grid.write_csv(gv);
        std::cout << "picard grid (" << grid.nt << "x" << grid.nx << ", "
                  << grid.iterations << " iterations) written\n";
    }
    return 0;
}

int run_check(const CommonFlags& flags) {
    std::uint64_t seed = levywave::kDefaultMasterSeed;
    unsigned workers = 0;
    if (const char* s = std::getenv("LEVYWAVE_SEED")) seed = std::strtoull(s, nullptr, 10);
    if (const char* w = std::getenv("LEVYWAVE_WORKERS"))
        workers = static_cast<unsigned>(std::strtoul(w, nullptr, 10));
    if (flags.seed) seed = *flags.seed;
    if (flags.workers) workers = *flags.workers;
    const levywave::CheckReport report = levywave::check_suite(seed, workers, &std::cerr);
    levywave::print_check_report(report, std::cout);
    if (flags.out_dir) {
        std::filesystem::create_directories(*flags.out_dir);
        levywave::write_check_report_json(report, *flags.out_dir + "/check_report.json");
    }
    return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo harness for the stochastic wave equation driven by pure-jump "
                 "Levy white noise"};
    app.require_subcommand(1);

    CommonFlags sim_flags, est_flags, clt_flags, asclt_flags, indep_flags, probe_flags,
        check_flags;
    double sim_t = 1.0, sim_R = 2.0;
    bool sim_grid = false;

    CLI::App* simulate = app.add_subcommand("simulate", "dump one skeleton and its solution");
    add_common(simulate, sim_flags);
    simulate->add_option("--t", sim_t, "time horizon");
    simulate->add_option("--R", sim_R, "spatial radius");
    simulate->add_flag("--grid", sim_grid, "also write a Picard grid solution");

    CLI::App* estimate =
        app.add_subcommand("estimate", "variance / covariance / lln estimators");
    add_common(estimate, est_flags);
    CLI::App* clt = app.add_subcommand("clt", "Wasserstein distance vs R and rate fit");
    add_common(clt, clt_flags);
    CLI::App* asclt = app.add_subcommand("asclt", "almost-sure CLT logarithmic average");
    add_common(asclt, asclt_flags);
    CLI::App* indep = app.add_subcommand("indep", "asymptotic independence covariances");
    add_common(indep, indep_flags);
    CLI::App* probe = app.add_subcommand("probe", "Malliavin add-one-cost probes");
    add_common(probe, probe_flags);
    CLI::App* check = app.add_subcommand("check", "run the full acceptance suite");
    add_common(check, check_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(sim_flags, sim_t, sim_R, sim_grid);
        if (estimate->parsed())
            return run_experiment(est_flags, levywave::ExperimentKind::variance);
        if (clt->parsed()) return run_experiment(clt_flags, levywave::ExperimentKind::clt);
        if (asclt->parsed()) return run_experiment(asclt_flags, levywave::ExperimentKind::asclt);
        if (indep->parsed()) return run_experiment(indep_flags, levywave::ExperimentKind::indep);
        if (probe->parsed()) return run_experiment(probe_flags, levywave::ExperimentKind::probe);
        if (check->parsed()) return run_check(check_flags);
    } catch (const levywave::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
