#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "mobsched/corpus.hpp"
#include "mobsched/power.hpp"

using namespace mobsched;

namespace {

ExecutionRecord record_for(std::vector<std::uint32_t> edges, std::uint64_t cost = 100,
                           std::uint64_t stack = 0, std::uint64_t cmp = 0) {
    ExecutionRecord rec;
    rec.edges = std::move(edges);
    rec.exec_cost_us = cost;
    rec.stack_bytes = stack;
    rec.cmp_matched = cmp;
    return rec;
}

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> vals) {
    std::vector<std::uint8_t> out;
    for (int v : vals) out.push_back(static_cast<std::uint8_t>(v));
    return out;
}

}  // namespace

TEST_CASE("hit counts collapse into the standard buckets") {
    const std::vector<std::pair<std::uint64_t, std::uint8_t>> table = {
        {1, 0}, {2, 1}, {3, 2},  {4, 3},  {7, 3},  {8, 4},   {15, 4},
        {16, 5}, {31, 5}, {32, 6}, {127, 6}, {128, 7}, {100000, 7}};
    for (const auto& [count, bucket] : table) REQUIRE(bucketize(count) == bucket);
}

TEST_CASE("footprints aggregate edge multiplicity into sorted buckets") {
    const auto fp = SeedPool::footprint(record_for({5, 9, 5, 5, 5}));
    REQUIRE(fp.size() == 2);
    REQUIRE(fp[0] == std::make_pair(std::uint32_t{5}, std::uint8_t{3}));
    REQUIRE(fp[1] == std::make_pair(std::uint32_t{9}, std::uint8_t{0}));
}

TEST_CASE("only new edges or deeper buckets are admitted") {
    SeedPool pool;
    REQUIRE(pool.add_if_new_coverage(bytes_of({1}), record_for({5}), SeedOrigin::Initial));
    REQUIRE(pool.size() == 1);
    REQUIRE(pool.at(0).id == 1);
    REQUIRE(pool.at(0).origin == SeedOrigin::Initial);

    // identical footprint: rejected
    REQUIRE(pool.add_if_new_coverage(bytes_of({2}), record_for({5}), SeedOrigin::MainLoop) ==
            nullptr);
    REQUIRE(pool.size() == 1);

    // same edge, deeper bucket: admitted
    REQUIRE(pool.add_if_new_coverage(bytes_of({3}), record_for({5, 5, 5, 5}),
                                     SeedOrigin::MainLoop));
    REQUIRE(pool.size() == 2);
    REQUIRE(pool.edge_bucket(5) == 3);

    // unseen edge: admitted
    REQUIRE(pool.add_if_new_coverage(bytes_of({4}), record_for({6}), SeedOrigin::Nic));
    REQUIRE(pool.edges_covered() == 2);
    REQUIRE(pool.edge_seen(6));
    REQUIRE_FALSE(pool.edge_seen(7));

    REQUIRE_THROWS_AS(pool.is_novel(record_for({kMapSize})), std::invalid_argument);
    REQUIRE_THROWS_AS(
        pool.add_if_new_coverage(std::vector<std::uint8_t>{}, record_for({8}), SeedOrigin::Nic),
        std::invalid_argument);
}

TEST_CASE("front members merge into existing seeds by content") {
    SeedPool pool;
    pool.add_if_new_coverage(bytes_of({1, 2}), record_for({5}, 100, 50, 0),
                             SeedOrigin::Initial);
    const Seed* merged =
        pool.add_front_member(bytes_of({1, 2}), record_for({5}, 100, 900, 3));
    REQUIRE(pool.size() == 1);
    REQUIRE(merged == &pool.at(0));
    REQUIRE(pool.at(0).best_objectives[1] == 900.0);  // stack maximum moved up
    REQUIRE(pool.at(0).best_objectives[2] == 3.0);
    REQUIRE(pool.at(0).origin == SeedOrigin::Initial);

    // novel bytes enter as optimizer seeds even without new coverage
    const Seed* added = pool.add_front_member(bytes_of({9, 9}), record_for({5}, 80, 10, 0));
    REQUIRE(pool.size() == 2);
    REQUIRE(added->origin == SeedOrigin::Nic);
}

TEST_CASE("the cheapest seed per edge is favored") {
    SeedPool pool;
    // A covers edges 10 and 11, B covers 10 more cheaply, C covers 10 expensively
    pool.add_if_new_coverage(bytes_of({1, 1, 1, 1}), record_for({10, 11}, 100),
                             SeedOrigin::Initial);
    pool.add_if_new_coverage(bytes_of({2, 2, 2, 2}), record_for({10, 10, 10, 10}, 50),
                             SeedOrigin::MainLoop);
    REQUIRE(pool.size() == 2);
    REQUIRE(pool.is_favored(0));  // champion of edge 11
    REQUIRE(pool.is_favored(1));  // cheaper on edge 10
    REQUIRE(pool.favored_count() == 2);

    // deepening the bucket on edge 10 at equal cost steals the crown
    pool.add_if_new_coverage(bytes_of({3, 3, 3, 3}),
                             record_for({10, 10, 10, 10, 10, 10, 10, 10}, 50),
                             SeedOrigin::MainLoop);
    REQUIRE(pool.size() == 3);
    REQUIRE(pool.is_favored(2));
    REQUIRE_FALSE(pool.is_favored(1));
    REQUIRE(pool.favored_count() == 2);
}

TEST_CASE("the queue heavily prefers favored seeds") {
    SeedPool pool;
    pool.add_if_new_coverage(bytes_of({1, 1}), record_for({10, 11}, 50), SeedOrigin::Initial);
    pool.add_if_new_coverage(bytes_of({2, 2}), record_for({10, 10, 10, 10}, 400),
                             SeedOrigin::MainLoop);
    REQUIRE(pool.favored_count() == 1);
    REQUIRE(pool.is_favored(0));

    Rng rng(13);
    std::size_t favored_picks = 0;
    for (int i = 0; i < 10000; ++i)
        if (pool.pick_next(rng) == 0) ++favored_picks;
    REQUIRE(favored_picks >= 8500);
}

TEST_CASE("the queue cycles through favored seeds in insertion order") {
    SeedPool pool;
    pool.add_if_new_coverage(bytes_of({1}), record_for({10}), SeedOrigin::Initial);
    pool.add_if_new_coverage(bytes_of({2}), record_for({11}), SeedOrigin::MainLoop);
    pool.add_if_new_coverage(bytes_of({3}), record_for({12}), SeedOrigin::MainLoop);
    REQUIRE(pool.favored_count() == 3);
    Rng rng(1);
    std::vector<std::size_t> picks;
    for (int i = 0; i < 6; ++i) picks.push_back(pool.pick_next(rng));
    REQUIRE(picks == std::vector<std::size_t>{0, 1, 2, 0, 1, 2});
}

TEST_CASE("good seeds beat the running averages of the active combination") {
    RoundStats s(3);
    s.record_execution({200.0, 60.0, 0.0});
    s.close_round();

    SeedPool pool;
    Seed strong;
    strong.best_objectives = {400.0, 30.0, 5.0};
    REQUIRE(is_good_seed(strong, s, CombinationId{0b001}));         // speed ratio 2
    REQUIRE_FALSE(is_good_seed(strong, s, CombinationId{0b010}));   // stack ratio 0.5
    REQUIRE_FALSE(is_good_seed(strong, s, CombinationId{0b100}));   // parity is not strict

    pool.add_if_new_coverage(bytes_of({1}), record_for({10}, 2500, 30, 5),
                             SeedOrigin::Initial);  // speed 400
    pool.add_if_new_coverage(bytes_of({2}), record_for({11}, 10000, 30, 5),
                             SeedOrigin::MainLoop);  // speed 100
    REQUIRE(good_seed_fraction(pool, s, CombinationId{0b001}) == Catch::Approx(0.5));
    REQUIRE(good_seed_fraction(SeedPool{}, s, CombinationId{0b001}) == 0.0);
}

TEST_CASE("exploration lasts until every seed has been fuzzed") {
    SeedPool pool;
    REQUIRE(update_state(pool) == FuzzState::Exploration);
    pool.add_if_new_coverage(bytes_of({1}), record_for({10}), SeedOrigin::Initial);
    pool.add_if_new_coverage(bytes_of({2}), record_for({11}), SeedOrigin::MainLoop);
    REQUIRE(update_state(pool) == FuzzState::Exploration);
    pool.at(0).fuzz_count = 3;
    REQUIRE(update_state(pool) == FuzzState::Exploration);
    pool.at(1).fuzz_count = 1;
    REQUIRE(update_state(pool) == FuzzState::Exploitation);
}

TEST_CASE("pools survive a json round trip") {
    SeedPool pool;
    pool.add_if_new_coverage(bytes_of({1, 2, 3}), record_for({10, 11}, 60, 500, 2),
                             SeedOrigin::Initial);
    pool.add_if_new_coverage(bytes_of({4}), record_for({12, 12, 12, 12, 12}, 90, 100, 0),
                             SeedOrigin::MainLoop);
    pool.add_front_member(bytes_of({8, 8}), record_for({10}, 55, 40, 1));
    pool.at(0).fuzz_count = 17;
    Rng rng(3);
    pool.pick_next(rng);  // move the cursor off zero

    const SeedPool back = SeedPool::from_json(pool.to_json());
    REQUIRE(back.to_json().dump() == pool.to_json().dump());
    REQUIRE(back.size() == pool.size());
    REQUIRE(back.favored_count() == pool.favored_count());
    REQUIRE(back.edges_covered() == pool.edges_covered());
    REQUIRE(back.edge_bucket(12) == pool.edge_bucket(12));
    REQUIRE(back.find_by_id(1) != nullptr);
    REQUIRE(back.find_by_id(99) == nullptr);
}

TEST_CASE("seed origins round trip through their names") {
    for (SeedOrigin o : {SeedOrigin::Initial, SeedOrigin::MainLoop, SeedOrigin::Nic})
        REQUIRE(seed_origin_from_string(to_string(o)) == o);
    REQUIRE_THROWS_AS(seed_origin_from_string("weird"), std::invalid_argument);
}
