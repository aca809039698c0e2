#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mobsched/simtarget.hpp"

using namespace mobsched;

namespace {

std::size_t count_edge(const ExecutionRecord& rec, std::uint32_t edge) {
    return static_cast<std::size_t>(std::count(rec.edges.begin(), rec.edges.end(), edge));
}

}  // namespace

TEST_CASE("entry edges fire once plus the stride multiplicity") {
    TargetSpec t;
    t.name = "entry-only";
    t.entry_edges = {{1, 8}, {2, 0}};
    validate_target(t);

    const std::vector<std::uint8_t> input(20, 0x00);
    const ExecutionRecord rec = execute(t, input);
    REQUIRE(count_edge(rec, 1) == 1 + 20 / 8);
    REQUIRE(count_edge(rec, 2) == 1);
    REQUIRE(rec.cmp_matched == 0);
    REQUIRE(rec.exec_cost_us == 20 + 1 * rec.edges.size());
}

TEST_CASE("comparison sites count matched prefix bytes and fire per byte") {
    const TargetSpec t = shallow_magic_target();

    ExecutionRecord miss = execute(t, t.initial_input);
    REQUIRE(miss.cmp_matched == 0);
    REQUIRE(count_edge(miss, 10) == 0);
    REQUIRE(miss.exec_cost_us == 20 + 2 * miss.edges.size());

    // all four sites fully matched
    std::vector<std::uint8_t> full = {0xff, 0x80, 0x7f, 0x10, 0x40, 0x64, 0x45, 0x21, 0xaa, 0xaa};
    ExecutionRecord hit = execute(t, full);
    REQUIRE(hit.cmp_matched == 8);
    REQUIRE(count_edge(hit, 1) == 1 + full.size() / 8);
    REQUIRE(count_edge(hit, 10) == 2);
    REQUIRE(count_edge(hit, 12) == 2);
    REQUIRE(count_edge(hit, 13) == 2);
    REQUIRE(hit.stack_bytes == 512 + 256 + 256 + 384 + 128 + 256);

    // a one-byte prefix counts once
    std::vector<std::uint8_t> partial(10, 0xaa);
    partial[0] = 0xff;
    ExecutionRecord part = execute(t, partial);
    REQUIRE(part.cmp_matched == 1);
    REQUIRE(count_edge(part, 10) == 1);
}

TEST_CASE("a site stays inert until its requirement fully matches") {
    const TargetSpec t = nested_magic_deep_stack_target();

    std::vector<std::uint8_t> in(10, 0xaa);
    in[0] = 0x01;  // half of site 0
    in[2] = 0x80;
    in[3] = 0x7f;  // site 1 bytes present but gated
    ExecutionRecord gated = execute(t, in);
    REQUIRE(gated.cmp_matched == 1);
    REQUIRE(count_edge(gated, 20) == 1);
    REQUIRE(count_edge(gated, 21) == 0);

    in[1] = 0xff;  // site 0 complete, site 1 unlocks
    ExecutionRecord open = execute(t, in);
    REQUIRE(open.cmp_matched == 4);
    REQUIRE(count_edge(open, 21) == 2);
    REQUIRE(open.stack_bytes == 256 + 4096 + 8192);
}

TEST_CASE("stack bytes sum over unique live edges and respect the depth cap") {
    const TargetSpec t = nested_magic_deep_stack_target();
    const std::vector<std::uint8_t> all = {0x01, 0xff, 0x80, 0x7f, 0x10,
                                           0x20, 0x40, 0x01, 0x64, 0xff};
    const ExecutionRecord rec = execute(t, all);
    REQUIRE(rec.cmp_matched == 10);
    // uncapped sum would be 256 + 4096 + 8192 + 12288 + 16384 + 20480 = 61696
    REQUIRE(rec.stack_bytes == t.max_depth);
}

TEST_CASE("the ladder target has flat cost and byte-for-byte cmp progress") {
    const TargetSpec t = cmp_heavy_target();
    const ExecutionRecord base = execute(t, t.initial_input);
    REQUIRE(base.cmp_matched == 0);
    REQUIRE(base.exec_cost_us == 25);

    std::vector<std::uint8_t> in = t.initial_input;
    in[0] = 0xff;
    in[1] = 0x10;  // site 0 of the ladder
    const ExecutionRecord one = execute(t, in);
    REQUIRE(one.cmp_matched == 2);
    REQUIRE(count_edge(one, 30) == 2);
    REQUIRE(one.exec_cost_us == 25);  // cost does not move with progress
    REQUIRE(objectives_from_record(one)[0] == Catch::Approx(1e6 / 25.0));
}

TEST_CASE("execution is a pure function of spec and input") {
    const TargetSpec t = shallow_magic_target();
    std::vector<std::uint8_t> in(10, 0x3c);
    const ExecutionRecord a = execute(t, in);
    const ExecutionRecord b = execute(t, in);
    REQUIRE(a.edges == b.edges);
    REQUIRE(a.exec_cost_us == b.exec_cost_us);
    REQUIRE(a.stack_bytes == b.stack_bytes);
    REQUIRE(a.cmp_matched == b.cmp_matched);
}

TEST_CASE("objective observations derive from the record") {
    ExecutionRecord rec;
    rec.exec_cost_us = 50;
    rec.stack_bytes = 4096;
    rec.cmp_matched = 7;
    const std::vector<double> obs = objectives_from_record(rec);
    REQUIRE(obs.size() == 3);
    REQUIRE(obs[0] == Catch::Approx(1e6 / 50.0));
    REQUIRE(obs[1] == 4096.0);
    REQUIRE(obs[2] == 7.0);

    rec.exec_cost_us = 0;  // guarded against division by zero
    REQUIRE(objectives_from_record(rec)[0] == Catch::Approx(1e6));
}

TEST_CASE("target validation rejects malformed specs") {
    TargetSpec t;
    t.name = "bad";
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);  // no entry edges

    t.entry_edges = {{1, 0}};
    t.sites = {{0, {0xff}, {1}, -1}};  // duplicate edge id
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);

    t.sites = {{0, {}, {10}, -1}};  // empty expected bytes
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);

    t.sites = {{0, {0xff}, {10}, 0}};  // requirement must name an earlier site
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);

    t.sites = {{0, {0xff}, {kMapSize}, -1}};  // edge id beyond the map
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);

    t.sites = {{0, {0xff}, {10}, -1}};
    t.stack_model = {{99, 64}};  // stack entry for an undeclared edge
    REQUIRE_THROWS_AS(validate_target(t), std::invalid_argument);

    t.stack_model.clear();
    REQUIRE_NOTHROW(validate_target(t));
}

TEST_CASE("target specs survive a json round trip") {
    for (const std::string& name : builtin_target_names()) {
        const TargetSpec orig = builtin_target(name);
        const TargetSpec back = target_from_json(target_to_json(orig));
        REQUIRE(target_to_json(back).dump() == target_to_json(orig).dump());
    }
    REQUIRE_THROWS_AS(builtin_target("no-such-target"), std::invalid_argument);
}

TEST_CASE("json targets validate their fields") {
    nlohmann::json j;
    j["name"] = "x";
    REQUIRE_THROWS_AS(target_from_json(j), std::invalid_argument);  // missing entry_edges
    j["entry_edges"] = {{{"edge", 1}, {"stride", 4}}};
    REQUIRE_NOTHROW(target_from_json(j));
    j["sites"] = {{{"offset", 0}, {"expected", "zz"}, {"guarded_edges", {9}}}};
    REQUIRE_THROWS_AS(target_from_json(j), std::invalid_argument);  // bad hex
    j["sites"][0]["expected"] = "ff";
    REQUIRE_NOTHROW(target_from_json(j));
    REQUIRE(target_from_json(j).sites[0].requires_site == -1);
}
