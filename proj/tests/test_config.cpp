#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "orch/config.hpp"

using namespace orch;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("defaults are the paper-scale recipe") {
    const RunConfig cfg = load_run_config("", {});
    CHECK(cfg.gen.n_records == 300000);
    CHECK(cfg.gen.disruption_rate == 0.05);
    CHECK(cfg.gen.multilingual_rate == 0.10);
    CHECK(cfg.gen.missing_rate == 0.03);
    CHECK(cfg.gen.field_count == 900);
    CHECK(cfg.hp.learning_rate == 0.01);
    CHECK(cfg.hp.hidden_layers == 5);
    CHECK(cfg.hp.gamma == 0.95);
    CHECK(cfg.cv_folds == 5);
    CHECK(cfg.feature_limit == 100);
}

TEST_CASE("config file entries override defaults; flags override the file") {
    write_file("test_cfg.config",
               "# comment line\n"
               "n = 5000\n"
               "seed = 11\n"
               "fields = 40   # trailing comment\n"
               "\n"
               "learning_rate = 0.002\n");
    const RunConfig file_only = load_run_config("test_cfg.config", {});
    CHECK(file_only.gen.n_records == 5000);
    CHECK(file_only.gen.seed == 11);
    CHECK(file_only.gen.field_count == 40);
    CHECK(file_only.hp.learning_rate == 0.002);

    const RunConfig with_flags =
        load_run_config("test_cfg.config", {{"n", "1234"}, {"seed", "99"}});
    CHECK(with_flags.gen.n_records == 1234);
    CHECK(with_flags.gen.seed == 99);
    CHECK(with_flags.hp.learning_rate == 0.002);
    std::remove("test_cfg.config");
}

TEST_CASE("unknown keys are config errors") {
    write_file("test_bad.config", "definitely_not_a_key = 1\n");
    try {
        load_run_config("test_bad.config", {});
        FAIL("expected InvalidConfig");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        CHECK(std::string(e.what()).find("definitely_not_a_key") != std::string::npos);
    }
    std::remove("test_bad.config");

    try {
        load_run_config("", {{"nope", "1"}});
        FAIL("expected InvalidConfig");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
}

TEST_CASE("invalid values name the key") {
    try {
        load_run_config("", {{"disruption_rate", "1.5"}});
        FAIL("expected InvalidConfig");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    try {
        load_run_config("", {{"n", "abc"}});
        FAIL("expected InvalidConfig");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        CHECK(std::string(e.what()).find("n:") != std::string::npos);
    }
}

TEST_CASE("ORCH_SEED overrides the file but not an explicit flag") {
    write_file("test_seed.config", "seed = 5\n");
    setenv("ORCH_SEED", "77", 1);
    const RunConfig env_wins = load_run_config("test_seed.config", {});
    CHECK(env_wins.gen.seed == 77);
    const RunConfig flag_wins = load_run_config("test_seed.config", {{"seed", "123"}});
    CHECK(flag_wins.gen.seed == 123);
    unsetenv("ORCH_SEED");
    const RunConfig file_wins = load_run_config("test_seed.config", {});
    CHECK(file_wins.gen.seed == 5);
    std::remove("test_seed.config");
}

TEST_CASE("list-valued keys parse comma lists") {
    const RunConfig cfg = load_run_config(
        "", {{"sweep_fields", "100, 300,500"}, {"grid_learning_rates", "0.01,0.002"}});
    CHECK(cfg.sweep_fields == std::vector<int>{100, 300, 500});
    CHECK(cfg.grid_learning_rates == std::vector<double>{0.01, 0.002});
}

TEST_CASE("workdir resolves relative paths only") {
    RunConfig cfg = load_run_config("", {{"workdir", "/tmp/w"}});
    CHECK(cfg.resolve("data.jsonl") == "/tmp/w/data.jsonl");
    CHECK(cfg.resolve("/abs/path.json") == "/abs/path.json");
}

TEST_CASE("missing config file is a missing input") {
    try {
        load_run_config("no_such_file.config", {});
        FAIL("expected MissingInput");
    } catch (const OrchError& e) {
        CHECK(e.code() == ErrorCode::MissingInput);
    }
}
