#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "mobsched/nic.hpp"

using namespace mobsched;

namespace {

SeedPool pool_from_target(const TargetSpec& target, std::size_t extra_mutants, Rng& rng) {
    SeedPool pool;
    auto admit = [&](std::vector<std::uint8_t> bytes) {
        const ExecutionRecord rec = execute(target, bytes);
        pool.add_if_new_coverage(std::move(bytes), rec, SeedOrigin::MainLoop);
    };
    admit(target.initial_input);
    // crafted variety so the pool never depends on mutation luck: comparison
    // prefixes plus lengths that move the entry-edge hit bucket
    std::vector<std::uint8_t> prefix = target.initial_input;
    if (!prefix.empty()) prefix[0] = 0xff;
    admit(prefix);
    admit({0xff, 0x80, 0x7f, 0x10, 0x40, 0x64, 0x45, 0x21, 0xaa, 0xaa});
    admit(std::vector<std::uint8_t>(40, 0xaa));
    admit(std::vector<std::uint8_t>(80, 0xaa));
    CreditTable credits;
    for (std::size_t i = 0; i < extra_mutants; ++i) {
        const Seed& base = pool.at(rng.index(pool.size()));
        const MutOp op = pick_operator(credits, rng);
        const std::size_t pos = pick_position(credits, base.bytes.size(), rng);
        admit(apply_operator(op, base.bytes, pos, rng));
    }
    return pool;
}

struct NicHarness {
    TargetSpec target;
    std::uint64_t execs = 0;
    std::uint64_t admissions_offered = 0;
    SeedPool* pool = nullptr;

    NicResult run(SeedPool& p, CombinationId combo, const NicConfig& cfg, Rng& rng,
                  std::uint64_t budget, CreditTable& credits) {
        pool = &p;
        auto execute_fn = [this](const std::vector<std::uint8_t>& b) {
            ++execs;
            return execute(target, b);
        };
        auto admit_fn = [this](const std::vector<std::uint8_t>& b, const ExecutionRecord& rec) {
            ++admissions_offered;
            return pool->add_if_new_coverage(b, rec, SeedOrigin::Nic) != nullptr;
        };
        return run_nic(*pool, combo, credits, cfg, rng, budget, execute_fn, admit_fn);
    }
};

}  // namespace

TEST_CASE("the optimizer starts on a steep enough drop") {
    REQUIRE(should_start_nic(1.0, 0.80, -0.15));
    REQUIRE_FALSE(should_start_nic(1.0, 0.90, -0.15));
    REQUIRE_FALSE(should_start_nic(1.0, 1.20, -0.15));
    REQUIRE(should_start_nic(1.0, 0.84));  // default threshold
    REQUIRE_FALSE(should_start_nic(0.0, 0.0, -0.15));
    REQUIRE_FALSE(should_start_nic(0.0, 5.0, -0.15));
}

TEST_CASE("population size is a clamped even tenth of the pool") {
    const NicConfig cfg;
    REQUIRE(nic_population_size(100, cfg) == 10);
    REQUIRE(nic_population_size(1, cfg) == cfg.pop_min);
    REQUIRE(nic_population_size(10000, cfg) == cfg.pop_max);
    REQUIRE(nic_population_size(70, cfg) == 8);   // 7 rounds up to even
    REQUIRE(nic_population_size(140, cfg) == 14);

    NicConfig odd_cap = cfg;
    odd_cap.pop_max = 7;
    REQUIRE(nic_population_size(70, odd_cap) == 6);  // cannot round up past the cap
}

TEST_CASE("an empty pool yields an empty result") {
    SeedPool pool;
    CreditTable credits;
    Rng rng(1);
    NicHarness h{shallow_magic_target()};
    const NicResult res = h.run(pool, CombinationId{0b111}, NicConfig{}, rng, 100, credits);
    REQUIRE(res.front.empty());
    REQUIRE(res.execs_used == 0);
    REQUIRE(res.generations_run == 0);
    REQUIRE(h.execs == 0);
}

TEST_CASE("the optimizer respects generation and execution budgets") {
    Rng seed_rng(7);
    const TargetSpec target = shallow_magic_target();
    SeedPool pool = pool_from_target(target, 60, seed_rng);
    REQUIRE(pool.size() >= 4);

    NicConfig cfg;
    cfg.generations = 5;

    SECTION("generation count binds first") {
        CreditTable credits;
        Rng rng(2);
        SeedPool work = pool;
        NicHarness h{target};
        const NicResult res = h.run(work, CombinationId{0b111}, cfg, rng, 1000000, credits);
        REQUIRE(res.generations_run == 5);
        REQUIRE(res.execs_used == h.execs);
        REQUIRE(res.generation_log.size() == 5);
        REQUIRE(res.generation_log.back().execs_used == res.execs_used);
    }

    SECTION("execution budget binds first") {
        CreditTable credits;
        Rng rng(2);
        SeedPool work = pool;
        NicHarness h{target};
        const std::size_t pop = nic_population_size(work.size(), cfg);
        const NicResult res = h.run(work, CombinationId{0b111}, cfg, rng, 3, credits);
        REQUIRE(res.generations_run == 1);  // the budget check runs between generations
        REQUIRE(res.execs_used <= 3 + pop);
    }
}

TEST_CASE("the final front is mutually non-dominated") {
    Rng seed_rng(19);
    const TargetSpec target = shallow_magic_target();
    SeedPool pool = pool_from_target(target, 60, seed_rng);
    CreditTable credits;
    Rng rng(3);
    NicHarness h{target};
    const NicResult res = h.run(pool, CombinationId{0b011}, NicConfig{}, rng, 400, credits);
    REQUIRE_FALSE(res.front.empty());
    REQUIRE(res.final_front_objectives.size() == res.front.size());
    for (const auto& a : res.final_front_objectives) {
        REQUIRE(a.size() == 2);  // restricted to the active combination
        for (const auto& b : res.final_front_objectives) REQUIRE_FALSE(dominates(a, b));
    }
}

TEST_CASE("admitted offspring land in the shared pool") {
    Rng seed_rng(11);
    const TargetSpec target = shallow_magic_target();
    SeedPool pool = pool_from_target(target, 40, seed_rng);
    const std::size_t before = pool.size();

    CreditTable credits;
    Rng rng(5);
    NicHarness h{target};
    const NicResult res = h.run(pool, CombinationId{0b111}, NicConfig{}, rng, 600, credits);
    REQUIRE(h.admissions_offered == res.execs_used);  // every offspring is offered
    REQUIRE(pool.size() == before + res.admitted);
    std::size_t nic_seeds = 0;
    for (const Seed& s : pool.seeds())
        if (s.origin == SeedOrigin::Nic) ++nic_seeds;
    REQUIRE(nic_seeds == res.admitted);
}

TEST_CASE("the optimizer is deterministic under a fixed rng seed") {
    Rng seed_rng(13);
    const TargetSpec target = nested_magic_deep_stack_target();
    const SeedPool pool = pool_from_target(target, 50, seed_rng);

    auto run_once = [&](std::uint64_t seed) {
        SeedPool work = pool;
        CreditTable credits;
        Rng rng(seed);
        NicHarness h{target};
        return h.run(work, CombinationId{0b110}, NicConfig{}, rng, 300, credits);
    };
    const NicResult a = run_once(21);
    const NicResult b = run_once(21);
    REQUIRE(a.execs_used == b.execs_used);
    REQUIRE(a.generations_run == b.generations_run);
    REQUIRE(a.admitted == b.admitted);
    REQUIRE(a.final_front_objectives == b.final_front_objectives);
    REQUIRE(a.front.size() == b.front.size());
    for (std::size_t i = 0; i < a.front.size(); ++i)
        REQUIRE(a.front[i].bytes == b.front[i].bytes);
}
