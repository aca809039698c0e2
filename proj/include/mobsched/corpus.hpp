#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "power.hpp"
#include "rng.hpp"
#include "simtarget.hpp"
#include "util.hpp"

namespace mobsched {

// Hit-count buckets: 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+.
inline std::uint8_t bucketize(std::uint64_t count) {
    if (count <= 3) return static_cast<std::uint8_t>(count - 1);
    if (count <= 7) return 3;
    if (count <= 15) return 4;
    if (count <= 31) return 5;
    if (count <= 127) return 6;
    return 7;
}

enum class SeedOrigin { Initial, MainLoop, Nic };

inline const char* to_string(SeedOrigin o) {
    switch (o) {
        case SeedOrigin::Initial: return "initial";
        case SeedOrigin::MainLoop: return "mainloop";
        default: return "nic";
    }
}

inline SeedOrigin seed_origin_from_string(const std::string& s) {
    if (s == "initial") return SeedOrigin::Initial;
    if (s == "mainloop") return SeedOrigin::MainLoop;
    if (s == "nic") return SeedOrigin::Nic;
    throw std::invalid_argument("unknown seed origin: " + s);
}

struct Seed {
    std::uint64_t id = 0;
    std::vector<std::uint8_t> bytes;
    std::vector<double> best_objectives;
    // (edge, bucket) footprint of the admitting execution, sorted by edge.
    std::vector<std::pair<std::uint32_t, std::uint8_t>> coverage;
    std::uint64_t exec_cost_us = 0;
    std::uint64_t fuzz_count = 0;
    SeedOrigin origin = SeedOrigin::Initial;
};

// Shared seed pool with bucketed edge-coverage admission and AFL-style
// favored cycling. Seeds are never evicted.
class SeedPool {
public:
    SeedPool() { global_bucket_.assign(kMapSize, kUnseen); }

    std::size_t size() const { return seeds_.size(); }
    bool empty() const { return seeds_.empty(); }
    const std::vector<Seed>& seeds() const { return seeds_; }
    Seed& at(std::size_t idx) { return seeds_.at(idx); }
    const Seed& at(std::size_t idx) const { return seeds_.at(idx); }

    const Seed* find_by_id(std::uint64_t id) const {
        for (const Seed& s : seeds_)
            if (s.id == id) return &s;
        return nullptr;
    }

    static std::vector<std::pair<std::uint32_t, std::uint8_t>> footprint(
        const ExecutionRecord& rec) {
        std::map<std::uint32_t, std::uint64_t> counts;
        for (std::uint32_t e : rec.edges) counts[e] += 1;
        std::vector<std::pair<std::uint32_t, std::uint8_t>> out;
        out.reserve(counts.size());
        for (const auto& [edge, count] : counts) out.emplace_back(edge, bucketize(count));
        return out;
    }

    bool is_novel(const ExecutionRecord& rec) const {
        for (const auto& [edge, bucket] : footprint(rec)) {
            if (edge >= kMapSize) throw std::invalid_argument("edge id exceeds map size");
            if (global_bucket_[edge] == kUnseen || bucket > global_bucket_[edge]) return true;
        }
        return false;
    }

    // Admits the input iff it reaches a new edge or a higher hit bucket on a
    // known edge. Returns the stored seed or nullptr when rejected.
    const Seed* add_if_new_coverage(std::vector<std::uint8_t> bytes, const ExecutionRecord& rec,
                                    SeedOrigin origin) {
        if (bytes.empty()) throw std::invalid_argument("seed bytes must be non-empty");
        if (!is_novel(rec)) return nullptr;
        return &insert(std::move(bytes), rec, origin);
    }

    // Unconditional keep for optimizer survivors. Duplicate content merges
    // objective records into the existing seed instead of inserting.
    const Seed* add_front_member(std::vector<std::uint8_t> bytes, const ExecutionRecord& rec) {
        if (bytes.empty()) throw std::invalid_argument("seed bytes must be non-empty");
        if (Seed* existing = find_content(bytes)) {
            std::vector<double> objs = objectives_from_record(rec);
            for (std::size_t i = 0; i < objs.size(); ++i)
                existing->best_objectives[i] = std::max(existing->best_objectives[i], objs[i]);
            return existing;
        }
        return &insert(std::move(bytes), rec, SeedOrigin::Nic);
    }

    bool is_favored(std::size_t idx) const { return favored_.at(idx); }

    std::size_t favored_count() const {
        std::size_t n = 0;
        for (bool f : favored_)
            if (f) ++n;
        return n;
    }

    // Cycles the pool in insertion order; favored seeds are always taken,
    // non-favored ones are skipped with probability 0.9. After two fruitless
    // full passes the current candidate is taken so a draw always terminates.
    // Returns an index because admissions may reallocate the seed vector.
    std::size_t pick_next(Rng& rng) {
        if (seeds_.empty()) throw std::logic_error("pick_next on empty pool");
        std::size_t steps = 0;
        const std::size_t limit = 2 * seeds_.size();
        while (true) {
            if (cursor_ >= seeds_.size()) cursor_ = 0;
            const std::size_t cand = cursor_;
            const bool take = favored_[cand] || steps >= limit || rng.chance(0.1);
            ++cursor_;
            ++steps;
            if (take) return cand;
        }
    }

    std::uint8_t edge_bucket(std::uint32_t edge) const {
        return global_bucket_.at(edge) == kUnseen ? 0 : global_bucket_.at(edge);
    }
    bool edge_seen(std::uint32_t edge) const { return global_bucket_.at(edge) != kUnseen; }

    std::size_t edges_covered() const {
        std::size_t n = 0;
        for (std::int16_t b : global_bucket_)
            if (b != kUnseen) ++n;
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["next_id"] = next_id_;
        j["cursor"] = cursor_;
        j["seeds"] = nlohmann::json::array();
        for (const Seed& s : seeds_) {
            nlohmann::json js;
            js["id"] = s.id;
            js["bytes"] = hex_encode(s.bytes);
            js["best"] = s.best_objectives;
            nlohmann::json cov = nlohmann::json::array();
            for (const auto& [edge, bucket] : s.coverage) cov.push_back({edge, bucket});
            js["coverage"] = cov;
            js["exec_cost_us"] = s.exec_cost_us;
            js["fuzz_count"] = s.fuzz_count;
            js["origin"] = to_string(s.origin);
            j["seeds"].push_back(js);
        }
        return j;
    }

    static SeedPool from_json(const nlohmann::json& j) {
        SeedPool pool;
        pool.next_id_ = j.at("next_id").get<std::uint64_t>();
        pool.cursor_ = j.at("cursor").get<std::size_t>();
        for (const auto& js : j.at("seeds")) {
            Seed s;
            s.id = js.at("id").get<std::uint64_t>();
            s.bytes = hex_decode(js.at("bytes").get<std::string>());
            s.best_objectives = js.at("best").get<std::vector<double>>();
            for (const auto& pair : js.at("coverage"))
                s.coverage.emplace_back(pair[0].get<std::uint32_t>(),
                                        pair[1].get<std::uint8_t>());
            s.exec_cost_us = js.at("exec_cost_us").get<std::uint64_t>();
            s.fuzz_count = js.at("fuzz_count").get<std::uint64_t>();
            s.origin = seed_origin_from_string(js.at("origin").get<std::string>());
            pool.seeds_.push_back(std::move(s));
            pool.index_content(pool.seeds_.size() - 1);
        }
        for (const Seed& s : pool.seeds_)
            for (const auto& [edge, bucket] : s.coverage)
                if (pool.global_bucket_[edge] == kUnseen || bucket > pool.global_bucket_[edge])
                    pool.global_bucket_[edge] = static_cast<std::int16_t>(bucket);
        pool.recompute_favored();
        return pool;
    }

private:
    static constexpr std::int16_t kUnseen = -1;

    Seed& insert(std::vector<std::uint8_t> bytes, const ExecutionRecord& rec, SeedOrigin origin) {
        Seed s;
        s.id = next_id_++;
        s.bytes = std::move(bytes);
        s.best_objectives = objectives_from_record(rec);
        s.coverage = footprint(rec);
        s.exec_cost_us = rec.exec_cost_us;
        s.origin = origin;
        for (const auto& [edge, bucket] : s.coverage)
            if (global_bucket_[edge] == kUnseen || bucket > global_bucket_[edge])
                global_bucket_[edge] = static_cast<std::int16_t>(bucket);
        seeds_.push_back(std::move(s));
        index_content(seeds_.size() - 1);
        recompute_favored();
        return seeds_.back();
    }

    Seed* find_content(const std::vector<std::uint8_t>& bytes) {
        auto range = content_index_.equal_range(content_hash(bytes));
        for (auto it = range.first; it != range.second; ++it)
            if (seeds_[it->second].bytes == bytes) return &seeds_[it->second];
        return nullptr;
    }

    static std::size_t content_hash(const std::vector<std::uint8_t>& bytes) {
        return std::hash<std::string_view>{}(
            std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }

    void index_content(std::size_t idx) {
        content_index_.emplace(content_hash(seeds_[idx].bytes), idx);
    }

    // A seed is favored when it is the cheapest representative (exec cost
    // times length) of some covered edge. Score ties go to the deeper hit
    // bucket on that edge, then to the newer seed, so a fresh admission
    // that merely deepened a bucket still gets queue priority over the
    // incumbent instead of rotting unfavored.
    void recompute_favored() {
        struct Entry {
            std::size_t idx;
            long double score;
            std::int16_t bucket;
        };
        std::unordered_map<std::uint32_t, Entry> champion;
        for (std::size_t idx = 0; idx < seeds_.size(); ++idx) {
            const Seed& s = seeds_[idx];
            const long double score =
                static_cast<long double>(s.exec_cost_us) * static_cast<long double>(s.bytes.size());
            for (const auto& [edge, bucket] : s.coverage) {
                auto [it, inserted] = champion.try_emplace(edge, Entry{idx, score, bucket});
                if (inserted) continue;
                Entry& cur = it->second;
                if (score < cur.score || (score == cur.score && bucket >= cur.bucket))
                    cur = Entry{idx, score, bucket};
            }
        }
        favored_.assign(seeds_.size(), false);
        for (const auto& [edge, e] : champion) favored_[e.idx] = true;
    }

    std::vector<Seed> seeds_;
    std::vector<bool> favored_;
    std::vector<std::int16_t> global_bucket_;
    std::unordered_multimap<std::size_t, std::size_t> content_index_;
    std::uint64_t next_id_ = 1;
    std::size_t cursor_ = 0;
};

// A seed is good when its member values beat the cumulative averages of the
// active combination on aggregate, strictly.
inline bool is_good_seed(const Seed& seed, const RoundStats& stats, CombinationId combo) {
    return aggregate_ratio(seed.best_objectives, stats, combo) > 1.0;
}

inline double good_seed_fraction(const SeedPool& pool, const RoundStats& stats,
                                 CombinationId combo) {
    if (pool.empty()) return 0.0;
    std::size_t good = 0;
    for (const Seed& s : pool.seeds())
        if (is_good_seed(s, stats, combo)) ++good;
    return static_cast<double>(good) / static_cast<double>(pool.size());
}

// Exploration while any seed is still unfuzzed (or the pool is empty);
// exploitation once every seed has been tried.
inline FuzzState update_state(const SeedPool& pool) {
    if (pool.empty()) return FuzzState::Exploration;
    for (const Seed& s : pool.seeds())
        if (s.fuzz_count == 0) return FuzzState::Exploration;
    return FuzzState::Exploitation;
}

}  // namespace mobsched
