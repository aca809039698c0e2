#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobsched/cli.hpp"
#include "mobsched/engine.hpp"

using namespace mobsched;

namespace {

const std::string kEcho = ADAPTER_ECHO_PATH;

CampaignConfig small_config(std::size_t rounds, std::uint64_t budget, std::uint64_t seed = 9) {
    CampaignConfig cfg;
    cfg.total_rounds = rounds;
    cfg.round_budget = budget;
    cfg.rng_seed = seed;
    return cfg;
}

std::size_t line_count(const std::string& path) {
    const std::string text = read_file(path);
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("a campaign pioneers every combination then keeps selecting") {
    Campaign c(builtin_target("shallow-magic"), small_config(8, 40));
    c.run();

    const auto& log = c.selection_log();
    REQUIRE(log.size() == 8);
    for (std::uint32_t m = 1; m <= 7; ++m) REQUIRE(log[m - 1] == m);
    REQUIRE(log[7] >= 1);
    REQUIRE(log[7] <= 7);

    REQUIRE(c.rounds_run() == 8);
    // every budgeted trial executes, plus the initial seed
    REQUIRE(c.main_execs() == 1 + 8 * 40);
    REQUIRE(c.stats().cumulative_execs() == c.main_execs() + c.nic_execs());

    const nlohmann::json j = c.summary();
    REQUIRE(j.at("rounds") == 8);
    REQUIRE(j.at("execs_main") == c.main_execs());
    REQUIRE(j.at("execs_nic") == c.nic_execs());
    REQUIRE(j.at("adapter_errors") == 0);
    REQUIRE(j.at("cumulative_avg").contains("speed"));
    REQUIRE(j.at("cumulative_avg").contains("stack"));
    REQUIRE(j.at("cumulative_avg").contains("cmp"));
    REQUIRE(j.at("pool").at("size").get<std::size_t>() == c.pool().size());
    REQUIRE(j.at("pool").at("origins").contains("initial"));
    REQUIRE(j.at("speed_combo_fraction").get<double>() >= 0.0);
    REQUIRE(j.at("speed_combo_fraction").get<double>() <= 1.0);
    const auto explo = j.at("assignments").at("exploration").get<std::uint64_t>();
    const auto expl = j.at("assignments").at("exploitation").get<std::uint64_t>();
    REQUIRE(explo + expl > 0);
}

TEST_CASE("identical configs replay identically") {
    Campaign a(builtin_target("nested-magic-deep-stack"), small_config(6, 50, 21));
    Campaign b(builtin_target("nested-magic-deep-stack"), small_config(6, 50, 21));
    a.run();
    b.run();
    REQUIRE(a.selection_log() == b.selection_log());
    REQUIRE(a.summary().dump() == b.summary().dump());

    Campaign other(builtin_target("nested-magic-deep-stack"), small_config(6, 50, 22));
    other.run();
    REQUIRE(a.summary().dump() != other.summary().dump());
}

TEST_CASE("telemetry files land in the run directory and pass the audit") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mobsched-engine-telemetry";
    fs::remove_all(dir);

    CampaignConfig cfg = small_config(10, 60, 5);
    cfg.out_dir = dir.string();
    Campaign c(builtin_target("cmp-heavy"), cfg);
    c.run();

    for (const char* f : {"rounds.csv", "selections.csv", "energy.csv", "summary.json",
                          "credit_tables.json", "pool.json"})
        REQUIRE(fs::exists(dir / f));
    REQUIRE(line_count((dir / "rounds.csv").string()) == 1 + 10);
    REQUIRE(line_count((dir / "selections.csv").string()) == 1 + 10);

    REQUIRE(cli_detail::audit_run_dir(dir.string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("a resumed campaign matches one that never stopped") {
    const auto cfg = small_config(12, 45, 33);

    Campaign straight(builtin_target("shallow-magic"), cfg);
    straight.run_rounds(12);

    Campaign first_half(builtin_target("shallow-magic"), cfg);
    first_half.run_rounds(6);
    const nlohmann::json snap = first_half.snapshot();

    Campaign second_half = Campaign::resume(snap);
    second_half.run_rounds(6);

    REQUIRE(second_half.rounds_run() == 12);
    REQUIRE(second_half.selection_log() == straight.selection_log());
    REQUIRE(second_half.summary().dump() == straight.summary().dump());
}

TEST_CASE("snapshots are only taken at round boundaries") {
    // the constructor's initial execution is already part of round one
    Campaign c(builtin_target("shallow-magic"), small_config(4, 30));
    REQUIRE_THROWS_AS(c.snapshot(), std::logic_error);
    c.run_rounds(1);
    REQUIRE_NOTHROW(c.snapshot());
}

TEST_CASE("a snapshot with the wrong version is rejected") {
    Campaign c(builtin_target("shallow-magic"), small_config(4, 30));
    c.run_rounds(1);
    nlohmann::json snap = c.snapshot();
    snap["version"] = "bogus";
    REQUIRE_THROWS_AS(Campaign::resume(snap), std::invalid_argument);
}

TEST_CASE("a campaign drives an external harness process") {
    Campaign c(std::make_shared<AdapterProcess>(kEcho), small_config(3, 30));
    c.run();
    REQUIRE(c.rounds_run() == 3);
    REQUIRE(c.main_execs() == 1 + 3 * 30);
    REQUIRE(c.summary().at("adapter_errors") == 0);
}

TEST_CASE("one malformed reply is retried and the campaign continues") {
    Campaign c(std::make_shared<AdapterProcess>(kEcho + " --malformed-once"),
               small_config(2, 20));
    c.run();
    REQUIRE(c.rounds_run() == 2);
    REQUIRE(c.summary().at("adapter_errors") == 0);
}

TEST_CASE("a dying harness aborts the campaign") {
    Campaign c(std::make_shared<AdapterProcess>(kEcho + " --die-after 5"),
               small_config(4, 50));
    REQUIRE_THROWS_AS(c.run(), CampaignAborted);
}

TEST_CASE("nonsense configurations are rejected up front") {
    const TargetSpec t = builtin_target("shallow-magic");
    REQUIRE_THROWS_AS(Campaign(t, small_config(0, 10)), std::invalid_argument);
    REQUIRE_THROWS_AS(Campaign(t, small_config(10, 0)), std::invalid_argument);
    CampaignConfig bad_lambda = small_config(10, 10);
    bad_lambda.lambda = -0.5;
    REQUIRE_THROWS_AS(Campaign(t, bad_lambda), std::invalid_argument);
    CampaignConfig bad_gamma = small_config(10, 10);
    bad_gamma.gamma = -1.0;
    REQUIRE_THROWS_AS(Campaign(t, bad_gamma), std::invalid_argument);
}
