#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levywave/levy_measure.hpp"
#include "levywave/solver.hpp"

namespace levywave {

inline constexpr const char* kToolVersion = "levywave 0.1.0";
inline constexpr std::uint64_t kDefaultMasterSeed = 20250801ull;

enum class ExperimentKind { variance, covariance, lln, clt, asclt, indep, probe };

const char* to_string(ExperimentKind kind);

// Declarative description of one experiment. Parsed from a strict JSON
// config (schema_version 1, unknown fields rejected) or built from the
// per-kind defaults that mirror the acceptance setups.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::variance;
    LevyMeasureSpec measure = LevyMeasureSpec::discrete_atoms({{1.0, 1.0}, {-1.0, 1.0}});
    Nonlinearity sigma = Nonlinearity::identity();
    double t = 1.0;
    double s = 1.0;                     // second time for covariance
    std::vector<double> R_grid{1.0};
    std::size_t n_replicates = 10000;
    std::uint64_t master_seed = kDefaultMasterSeed;
    unsigned workers = 0;               // 0 = hardware concurrency
    std::string out_dir = "out";
    bool check_mode = false;
    // asclt
    double R_min = 1.0;
    double R_max = 1000.0;
    std::size_t asclt_grid = 0;         // 0 = 64 nodes per decade
    std::vector<std::string> test_fns{"tanh", "square_cap4"};
    std::size_t asclt_aux_replicates = 2000;
    // indep
    std::vector<std::pair<double, double>> eval_points{{1.0, 0.0}};
    // probe
    std::size_t probe_skeletons = 50;
    std::size_t probe_xis = 20;

    std::string canonical_json;         // normalized dump used for hashing
    std::vector<std::string> warnings;  // validator notes (e.g. sigma(1) = 0)
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig default_config(ExperimentKind kind);

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::uint64_t master_seed = 0;
    std::string experiment;
    std::size_t n_replicates = 0;
    std::vector<std::string> outputs;
    bool checks_passed = true;          // centering/validator checks in --check mode
    std::vector<std::string> notes;
};

// Executes the configured experiment, writing results.jsonl, summary.csv,
// plotdata/<kind>.csv and manifest.json under config.out_dir.
RunManifest run(const ExperimentConfig& config);

struct CheckRow {
    int index = 0;
    std::string name;
    std::string expected;
    std::string observed;
    std::string tolerance;
    bool pass = false;
    double seconds = 0.0;
};

struct CheckReport {
    std::vector<CheckRow> rows;
    bool all_pass = false;
    std::vector<std::string> notes;  // e.g. the ASCLT pre-calibration record
};

// Runs every acceptance criterion at pinned seeds and parameters.
CheckReport check_suite(std::uint64_t master_seed = kDefaultMasterSeed, unsigned workers = 0,
                        std::ostream* progress = nullptr);

void print_check_report(const CheckReport& report, std::ostream& os);
void write_check_report_json(const CheckReport& report, const std::string& path);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace levywave
