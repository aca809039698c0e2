#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "corpus.hpp"
#include "mpmab.hpp"
#include "mutation.hpp"
#include "pareto.hpp"
#include "rng.hpp"
#include "simtarget.hpp"

namespace mobsched {

struct NicConfig {
    bool enabled = true;
    double population_fraction = 0.10;
    std::size_t pop_min = 4;
    std::size_t pop_max = 256;
    std::size_t generations = 100;
    double start_threshold = -0.15;
    double budget_fraction = 0.08;  // of cumulative main-loop executions
};

// Starts the optimizer when the aggregate value fell by more than the
// threshold fraction between consecutive rounds.
inline bool should_start_nic(double v_prev, double v_cur, double threshold = -0.15) {
    const double denom = std::max(v_prev, 1e-9);
    return (v_cur - v_prev) / denom < threshold;
}

// Population is a tenth of the pool, clamped and forced even.
inline std::size_t nic_population_size(std::size_t pool_size, const NicConfig& cfg) {
    auto size = static_cast<std::size_t>(std::llround(cfg.population_fraction *
                                                      static_cast<double>(pool_size)));
    size = std::clamp(size, cfg.pop_min, cfg.pop_max);
    if (size % 2 != 0) size = size + 1 <= cfg.pop_max ? size + 1 : size - 1;
    return size;
}

struct Individual {
    std::vector<std::uint8_t> bytes;
    std::vector<double> objectives;  // full arity; dominance restricts to the combination
    ExecutionRecord record;
    bool executed = false;  // false for pool-sampled members reusing recorded values
};

struct NicGenerationLog {
    std::size_t generation = 0;
    std::vector<std::size_t> front_sizes;
    std::uint64_t execs_used = 0;
};

struct NicResult {
    std::vector<Individual> front;
    std::vector<std::vector<double>> initial_front_objectives;  // restricted to the combination
    std::vector<std::vector<double>> final_front_objectives;
    std::uint64_t execs_used = 0;
    std::size_t generations_run = 0;
    std::uint64_t admitted = 0;
    std::vector<NicGenerationLog> generation_log;
};

namespace detail {

inline std::vector<double> restrict_to(const std::vector<double>& full, CombinationId combo) {
    std::vector<double> out;
    out.reserve(combo.size());
    for (std::size_t i : combo.members()) out.push_back(full.at(i));
    return out;
}

inline std::vector<std::vector<double>> active_points(const std::vector<Individual>& pop,
                                                      CombinationId combo) {
    std::vector<std::vector<double>> pts;
    pts.reserve(pop.size());
    for (const Individual& ind : pop) pts.push_back(restrict_to(ind.objectives, combo));
    return pts;
}

}  // namespace detail

// One optimizer run: sample a population from the pool, then iterate
// crossover + credit-guided mutation + execution + NSGA-II survivor
// selection until the generation count or the execution budget runs out.
// `execute_fn` performs (and accounts) one target execution; `admit_fn`
// offers each offspring to the shared pool and reports whether it was kept.
inline NicResult run_nic(const SeedPool& pool, CombinationId combo, CreditTable& credits,
                         const NicConfig& cfg, Rng& rng, std::uint64_t exec_budget,
                         const std::function<ExecutionRecord(const std::vector<std::uint8_t>&)>&
                             execute_fn,
                         const std::function<bool(const std::vector<std::uint8_t>&,
                                                  const ExecutionRecord&)>& admit_fn) {
    NicResult result;
    if (pool.empty()) return result;

    const std::size_t pop_size = nic_population_size(pool.size(), cfg);
    std::vector<Individual> population;
    population.reserve(pop_size);
    if (pool.size() >= pop_size) {
        // sample without replacement: partial Fisher-Yates over index space
        std::vector<std::size_t> idx(pool.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < pop_size; ++i) {
            const std::size_t j = i + rng.index(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(pop_size);
        for (std::size_t i : idx) {
            const Seed& s = pool.at(i);
            population.push_back({s.bytes, s.best_objectives, {}, false});
        }
    } else {
        for (std::size_t i = 0; i < pop_size; ++i) {
            const Seed& s = pool.at(rng.index(pool.size()));
            population.push_back({s.bytes, s.best_objectives, {}, false});
        }
    }

    {
        auto pts = detail::active_points(population, combo);
        const auto fronts = non_dominated_sort(pts);
        for (std::size_t i : fronts.front()) result.initial_front_objectives.push_back(pts[i]);
    }

    while (result.generations_run < cfg.generations && result.execs_used < exec_budget) {
        // random disjoint parent pairs
        std::vector<std::size_t> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const std::size_t j = i + rng.index(order.size() - i);
            std::swap(order[i], order[j]);
        }

        std::vector<Individual> offspring;
        offspring.reserve(population.size());
        for (std::size_t p = 0; p + 1 < order.size(); p += 2) {
            const Individual& pa = population[order[p]];
            const Individual& pb = population[order[p + 1]];
            auto [ca, cb] = crossover(pa.bytes, pb.bytes, rng);
            std::array<std::vector<std::uint8_t>*, 2> children = {&ca, &cb};
            std::array<const Individual*, 2> base = {&pa, &pb};
            for (std::size_t c = 0; c < 2; ++c) {
                const MutOp op = pick_operator(credits, rng);
                const std::size_t pos = pick_position(credits, children[c]->size(), rng);
                const Individual& donor = population[rng.index(population.size())];
                std::vector<std::uint8_t> mutated =
                    apply_operator(op, *children[c], pos, rng, donor.bytes);
                ExecutionRecord rec = execute_fn(mutated);
                ++result.execs_used;
                std::vector<double> objs = objectives_from_record(rec);
                bool improved = false;
                for (std::size_t i : combo.members())
                    if (objs.at(i) > base[c]->objectives.at(i)) improved = true;
                credit_update(credits, op, decile_of(pos, children[c]->size()), improved);
                if (admit_fn(mutated, rec)) ++result.admitted;
                offspring.push_back({std::move(mutated), std::move(objs), std::move(rec), true});
            }
        }

        std::vector<Individual> merged = std::move(population);
        for (Individual& o : offspring) merged.push_back(std::move(o));
        auto pts = detail::active_points(merged, combo);
        std::vector<std::size_t> keep = select_survivors(pts, pop_size);
        population.clear();
        for (std::size_t i : keep) population.push_back(std::move(merged[i]));

        ++result.generations_run;
        NicGenerationLog log;
        log.generation = result.generations_run;
        for (const auto& front : non_dominated_sort(detail::active_points(population, combo)))
            log.front_sizes.push_back(front.size());
        log.execs_used = result.execs_used;
        result.generation_log.push_back(std::move(log));
    }

    auto pts = detail::active_points(population, combo);
    const auto fronts = non_dominated_sort(pts);
    for (std::size_t i : fronts.front()) {
        result.final_front_objectives.push_back(pts[i]);
        result.front.push_back(population[i]);
    }
    return result;
}

}  // namespace mobsched
