#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "levywave/harness.hpp"

using namespace levywave;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tmp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("levywave_test_" + tag);
    std::filesystem::remove_all(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("config parsing accepts a full experiment description") {
    const std::string text = R"({
        "schema_version": 1,
        "experiment": "variance",
        "measure": {"kind": "discrete_atoms",
                    "atoms": [{"z": 1.0, "rate": 1.0}, {"z": -1.0, "rate": 1.0}]},
        "sigma": {"kind": "constant", "c": 1.0},
        "t": 1.0,
        "R_grid": [1.0, 2.0],
        "n_replicates": 200,
        "master_seed": 7,
        "workers": 1,
        "out_dir": "unused"
    })";
    const ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.kind == ExperimentKind::variance);
    CHECK(cfg.R_grid.size() == 2);
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.measure.m2() == doctest::Approx(2.0));
    CHECK(cfg.sigma.is_constant());
}

TEST_CASE("config validation") {
    SUBCASE("unknown fields are errors, not warnings") {
        CHECK_THROWS_AS(parse_config(R"({"schema_version":1,"experiment":"variance",
                                         "n_replicats":100})"),
                        ConfigInvalid);
        CHECK_THROWS_AS(parse_config(R"({"schema_version":1,"experiment":"variance",
                                         "sigma":{"kind":"identity","extra":1}})"),
                        ConfigInvalid);
    }
    SUBCASE("schema_version is required") {
        CHECK_THROWS_AS(parse_config(R"({"experiment":"variance"})"), ConfigInvalid);
        CHECK_THROWS_AS(parse_config(R"({"schema_version":2,"experiment":"variance"})"),
                        ConfigInvalid);
    }
    SUBCASE("clt with an m4 = infinity measure is rejected with the hypothesis named") {
        const std::string text = R"({
            "schema_version": 1,
            "experiment": "clt",
            "measure": {"kind": "scaled_density", "family": "pareto_tail",
                        "total_rate": 1.0, "alpha": 3.0, "z_min": 0.5}
        })";
        try {
            parse_config(text);
            FAIL("expected ConfigInvalid");
        } catch (const ConfigInvalid& e) {
            CHECK(std::string(e.what()).find("m4") != std::string::npos);
        }
        // the same measure is fine for variance estimation
        const std::string ok = R"({
            "schema_version": 1,
            "experiment": "variance",
            "measure": {"kind": "scaled_density", "family": "pareto_tail",
                        "total_rate": 1.0, "alpha": 3.0, "z_min": 0.5}
        })";
        CHECK_NOTHROW(parse_config(ok));
    }
    SUBCASE("sigma(1) = 0 produces a warning, not an error") {
        const std::string text = R"({
            "schema_version": 1,
            "experiment": "variance",
            "sigma": {"kind": "constant", "c": 0.0}
        })";
        const ExperimentConfig cfg = parse_config(text);
        REQUIRE(cfg.warnings.size() == 1);
        CHECK(cfg.warnings[0].find("sigma(1) = 0") != std::string::npos);
    }
    SUBCASE("non-increasing R grid is rejected") {
        CHECK_THROWS_AS(parse_config(R"({"schema_version":1,"experiment":"lln",
                                         "R_grid":[4.0,2.0]})"),
                        ConfigInvalid);
    }
    SUBCASE("untruncated tempered stable cannot be simulated") {
        CHECK_THROWS_AS(parse_config(R"({"schema_version":1,"experiment":"variance",
            "measure":{"kind":"scaled_density","family":"tempered_stable",
                       "c":1.0,"alpha":0.5,"beta":1.0}})"),
                        ConfigInvalid);
        CHECK_NOTHROW(parse_config(R"({"schema_version":1,"experiment":"variance",
            "measure":{"kind":"truncated_density","family":"tempered_stable",
                       "c":1.0,"alpha":0.5,"beta":1.0,"eps":0.05}})"));
    }
}

TEST_CASE("default configs are valid for every kind") {
    for (ExperimentKind kind :
         {ExperimentKind::variance, ExperimentKind::covariance, ExperimentKind::lln,
          ExperimentKind::clt, ExperimentKind::asclt, ExperimentKind::indep,
          ExperimentKind::probe}) {
        const ExperimentConfig cfg = default_config(kind);
        CHECK(cfg.kind == kind);
        CHECK(cfg.master_seed == kDefaultMasterSeed);
    }
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("abc") == 0xe71fa2190541574bull);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
}

TEST_CASE("run() writes deterministic outputs") {
    const std::string base = R"({
        "schema_version": 1,
        "experiment": "variance",
        "sigma": {"kind": "identity"},
        "t": 1.0,
        "R_grid": [1.0],
        "n_replicates": 300,
        "master_seed": 4242,
        "workers": %W%,
        "out_dir": "%OUT%"
    })";
    auto make = [&](const std::string& out, int workers) {
        std::string text = base;
        text.replace(text.find("%W%"), 3, std::to_string(workers));
        text.replace(text.find("%OUT%"), 5, out);
        return parse_config(text);
    };
    const std::string out1 = tmp_dir("run1");
    const std::string out2 = tmp_dir("run2");
    const std::string out3 = tmp_dir("run3");
    run(make(out1, 1));
    run(make(out2, 1));
    run(make(out3, 3));
    const std::string r1 = slurp(out1 + "/results.jsonl");
    CHECK(!r1.empty());
    // identical outputs for a repeated run and for a different worker count
    CHECK(r1 == slurp(out2 + "/results.jsonl"));
    CHECK(r1 == slurp(out3 + "/results.jsonl"));
    CHECK(slurp(out1 + "/summary.csv") == slurp(out2 + "/summary.csv"));
    CHECK(slurp(out1 + "/plotdata/variance.csv") == slurp(out3 + "/plotdata/variance.csv"));
    CHECK(std::filesystem::exists(out1 + "/manifest.json"));
    std::filesystem::remove_all(out1);
    std::filesystem::remove_all(out2);
    std::filesystem::remove_all(out3);
}

TEST_CASE("run() executes every experiment kind at toy sizes") {
    const auto run_json = [](const std::string& text, const std::string& tag) {
        ExperimentConfig cfg = parse_config(text);
        cfg.out_dir = tmp_dir(tag);
        const RunManifest manifest = run(cfg);
        CHECK(manifest.checks_passed);
        CHECK(std::filesystem::exists(cfg.out_dir + "/results.jsonl"));
        std::filesystem::remove_all(cfg.out_dir);
    };
    run_json(R"({"schema_version":1,"experiment":"covariance","s":1.0,
                 "sigma":{"kind":"constant","c":1.0},
                 "R_grid":[2.0],"n_replicates":100,"workers":1})",
             "cov");
    run_json(R"({"schema_version":1,"experiment":"lln","sigma":{"kind":"identity"},
                 "R_grid":[1.0,2.0],"n_replicates":100,"workers":1})",
             "lln");
    run_json(R"({"schema_version":1,"experiment":"clt","sigma":{"kind":"identity"},
                 "R_grid":[1.0,2.0],"n_replicates":200,"workers":1})",
             "clt");
    run_json(R"({"schema_version":1,"experiment":"asclt","sigma":{"kind":"constant","c":1.0},
                 "asclt":{"R_min":1.0,"R_max":16.0,"grid":48,"test_fns":["tanh"]},
                 "workers":1})",
             "asclt");
    run_json(R"({"schema_version":1,"experiment":"indep","sigma":{"kind":"identity"},
                 "R_grid":[1.0,4.0],"n_replicates":200,"eval_points":[[1.0,0.0]],
                 "workers":1})",
             "indep");
    run_json(R"({"schema_version":1,"experiment":"probe","sigma":{"kind":"identity"},
                 "probe":{"skeletons":5,"xis":4},"check":true,"workers":1})",
             "probe");
}
