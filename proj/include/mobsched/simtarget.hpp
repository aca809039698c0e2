#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "util.hpp"

namespace mobsched {

inline constexpr std::uint32_t kMapSize = 65536;  // logical edge id space

struct ExecutionRecord {
    std::vector<std::uint32_t> edges;  // with multiplicity
    std::uint64_t exec_cost_us = 0;
    std::uint64_t stack_bytes = 0;
    std::uint64_t cmp_matched = 0;
};

// Per-execution objective observation for the standard registry:
// speed proxy (execs per virtual second), stack bytes, matched cmp bytes.
inline std::vector<double> objectives_from_record(const ExecutionRecord& rec) {
    const double cost = rec.exec_cost_us == 0 ? 1.0 : static_cast<double>(rec.exec_cost_us);
    return {1e6 / cost, static_cast<double>(rec.stack_bytes),
            static_cast<double>(rec.cmp_matched)};
}

struct ComparisonSite {
    std::uint32_t offset = 0;
    std::vector<std::uint8_t> expected;        // non-empty
    std::vector<std::uint32_t> guarded_edges;  // fire once per matched prefix byte
    std::int32_t requires_site = -1;           // earlier site that must fully match first
};

// An entry edge fires on every execution: once, plus floor(len/stride) extra
// hits when stride > 0. Length-dependent multiplicity exercises hit buckets
// and gives the cost model a length gradient.
struct EntryEdge {
    std::uint32_t edge = 0;
    std::uint32_t stride = 0;
};

struct TargetSpec {
    std::string name;
    std::vector<EntryEdge> entry_edges;
    std::vector<ComparisonSite> sites;
    std::uint64_t base_cost_us = 20;
    std::uint64_t per_edge_cost_us = 1;
    std::map<std::uint32_t, std::uint64_t> stack_model;  // edge -> bytes while live
    std::uint64_t max_depth = 1u << 20;                  // cap on summed stack bytes
    std::vector<std::uint8_t> initial_input;
};

inline void validate_target(const TargetSpec& spec) {
    if (spec.name.empty()) throw std::invalid_argument("target: name must be non-empty");
    if (spec.entry_edges.empty())
        throw std::invalid_argument("target: entry_edges must be non-empty");
    std::map<std::uint32_t, std::string> seen;
    auto claim = [&](std::uint32_t edge, const std::string& where) {
        if (edge >= kMapSize)
            throw std::invalid_argument("target: " + where + ": edge id " + std::to_string(edge) +
                                        " exceeds map size");
        auto [it, inserted] = seen.emplace(edge, where);
        if (!inserted)
            throw std::invalid_argument("target: duplicate edge id " + std::to_string(edge) +
                                        " (" + it->second + " and " + where + ")");
    };
    for (std::size_t i = 0; i < spec.entry_edges.size(); ++i)
        claim(spec.entry_edges[i].edge, "entry_edges[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        const auto& site = spec.sites[i];
        const std::string where = "sites[" + std::to_string(i) + "]";
        if (site.expected.empty())
            throw std::invalid_argument("target: " + where + ".expected must be non-empty");
        if (site.guarded_edges.empty())
            throw std::invalid_argument("target: " + where + ".guarded_edges must be non-empty");
        if (site.requires_site >= 0 && static_cast<std::size_t>(site.requires_site) >= i)
            throw std::invalid_argument("target: " + where +
                                        ".requires must name an earlier site");
        for (std::size_t j = 0; j < site.guarded_edges.size(); ++j)
            claim(site.guarded_edges[j], where + ".guarded_edges[" + std::to_string(j) + "]");
    }
    for (const auto& [edge, bytes] : spec.stack_model)
        if (!seen.count(edge))
            throw std::invalid_argument("target: stack_model names undeclared edge " +
                                        std::to_string(edge));
}

// Pure function of (spec, input). A comparison site behaves like a byte-wise
// compare loop with early exit: the matched prefix length goes into
// cmp_matched and the guarded edges fire once per matched byte, so partial
// progress lands in higher hit buckets. Only a full match unlocks sites that
// require this one; a site with an unmet requirement is inert.
inline ExecutionRecord execute(const TargetSpec& spec, std::span<const std::uint8_t> input) {
    ExecutionRecord rec;
    const std::size_t len = input.size();
    for (const EntryEdge& e : spec.entry_edges) {
        std::uint64_t hits = 1;
        if (e.stride > 0) hits += len / e.stride;
        for (std::uint64_t h = 0; h < hits; ++h) rec.edges.push_back(e.edge);
    }
    std::vector<bool> full(spec.sites.size(), false);
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        const ComparisonSite& site = spec.sites[i];
        if (site.requires_site >= 0 && !full[static_cast<std::size_t>(site.requires_site)])
            continue;
        std::size_t avail = 0;
        if (len > site.offset)
            avail = std::min(site.expected.size(), len - site.offset);
        std::size_t matched = 0;
        while (matched < avail && input[site.offset + matched] == site.expected[matched])
            ++matched;
        rec.cmp_matched += matched;
        for (std::size_t m = 0; m < matched; ++m)
            for (std::uint32_t e : site.guarded_edges) rec.edges.push_back(e);
        if (matched == site.expected.size()) full[i] = true;
    }
    std::uint64_t stack = 0;
    std::vector<std::uint32_t> unique_edges = rec.edges;
    std::sort(unique_edges.begin(), unique_edges.end());
    unique_edges.erase(std::unique(unique_edges.begin(), unique_edges.end()),
                       unique_edges.end());
    for (std::uint32_t e : unique_edges) {
        auto it = spec.stack_model.find(e);
        if (it != spec.stack_model.end()) stack += it->second;
    }
    rec.stack_bytes = std::min(stack, spec.max_depth);
    rec.exec_cost_us = spec.base_cost_us + spec.per_edge_cost_us * rec.edges.size();
    return rec;
}

// --- JSON schema ---------------------------------------------------------
//
// {
//   "name": "...",
//   "entry_edges": [{"edge": 1, "stride": 8}, ...],
//   "sites": [{"offset": 0, "expected": "4d5a", "guarded_edges": [10],
//              "requires": -1}, ...],
//   "base_cost_us": 20, "per_edge_cost_us": 2,
//   "stack_model": {"1": 512, ...},
//   "max_depth": 4096,
//   "initial_input": "0000..."   (hex, optional)
// }

inline nlohmann::json target_to_json(const TargetSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["entry_edges"] = nlohmann::json::array();
    for (const auto& e : spec.entry_edges)
        j["entry_edges"].push_back({{"edge", e.edge}, {"stride", e.stride}});
    j["sites"] = nlohmann::json::array();
    for (const auto& s : spec.sites) {
        nlohmann::json js;
        js["offset"] = s.offset;
        js["expected"] = hex_encode(s.expected);
        js["guarded_edges"] = s.guarded_edges;
        js["requires"] = s.requires_site;
        j["sites"].push_back(js);
    }
    j["base_cost_us"] = spec.base_cost_us;
    j["per_edge_cost_us"] = spec.per_edge_cost_us;
    nlohmann::json sm = nlohmann::json::object();
    for (const auto& [edge, bytes] : spec.stack_model) sm[std::to_string(edge)] = bytes;
    j["stack_model"] = sm;
    j["max_depth"] = spec.max_depth;
    j["initial_input"] = hex_encode(spec.initial_input);
    return j;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::invalid_argument("target json: missing field " + path + key);
    return *it;
}

template <typename T>
T field_as(const nlohmann::json& j, const std::string& key, const std::string& path) {
    try {
        return require_field(j, key, path).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("target json: bad value at " + path + key + ": " + e.what());
    }
}

}  // namespace detail

inline TargetSpec target_from_json(const nlohmann::json& j) {
    using detail::field_as;
    TargetSpec spec;
    spec.name = field_as<std::string>(j, "name", "");
    for (std::size_t i = 0; i < detail::require_field(j, "entry_edges", "").size(); ++i) {
        const auto& je = j["entry_edges"][i];
        const std::string path = "entry_edges[" + std::to_string(i) + "].";
        spec.entry_edges.push_back(
            {field_as<std::uint32_t>(je, "edge", path), field_as<std::uint32_t>(je, "stride", path)});
    }
    if (j.contains("sites")) {
        for (std::size_t i = 0; i < j["sites"].size(); ++i) {
            const auto& js = j["sites"][i];
            const std::string path = "sites[" + std::to_string(i) + "].";
            ComparisonSite site;
            site.offset = field_as<std::uint32_t>(js, "offset", path);
            site.expected = hex_decode(field_as<std::string>(js, "expected", path));
            site.guarded_edges = field_as<std::vector<std::uint32_t>>(js, "guarded_edges", path);
            site.requires_site = js.value("requires", -1);
            spec.sites.push_back(std::move(site));
        }
    }
    spec.base_cost_us = j.value("base_cost_us", std::uint64_t{20});
    spec.per_edge_cost_us = j.value("per_edge_cost_us", std::uint64_t{1});
    if (j.contains("stack_model")) {
        for (const auto& [key, val] : j["stack_model"].items()) {
            std::uint32_t edge = 0;
            try {
                edge = static_cast<std::uint32_t>(std::stoul(key));
            } catch (...) {
                throw std::invalid_argument("target json: bad edge key in stack_model: " + key);
            }
            spec.stack_model[edge] = val.get<std::uint64_t>();
        }
    }
    spec.max_depth = j.value("max_depth", std::uint64_t{1u << 20});
    if (j.contains("initial_input"))
        spec.initial_input = hex_decode(j["initial_input"].get<std::string>());
    validate_target(spec);
    return spec;
}

inline TargetSpec load_target_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("target json: parse failure in " + path + ": " + e.what());
    }
    return target_from_json(j);
}

// --- Built-in targets ----------------------------------------------------

// Four independent two-byte magic checks near the front of the input. Cheap
// executions, small stacks; a byte-wise greedy search solves it quickly.
inline TargetSpec shallow_magic_target() {
    TargetSpec t;
    t.name = "shallow-magic";
    t.entry_edges = {{1, 8}};
    t.sites = {
        {0, {0xff, 0x80}, {10}, -1},
        {2, {0x7f, 0x10}, {11}, -1},
        {4, {0x40, 0x64}, {12, 13}, -1},
        {6, {0x45, 0x21}, {14}, -1},
    };
    t.base_cost_us = 20;
    t.per_edge_cost_us = 2;
    t.stack_model = {{1, 512}, {10, 256}, {11, 256}, {12, 384}, {13, 128}, {14, 256}};
    t.max_depth = 4096;
    t.initial_input.assign(10, 0xaa);
    validate_target(t);
    return t;
}

// A chain of dependent magic checks; every unlocked level adds a large stack
// frame and the cap trims the deepest level.
inline TargetSpec nested_magic_deep_stack_target() {
    TargetSpec t;
    t.name = "nested-magic-deep-stack";
    t.entry_edges = {{2, 16}};
    t.sites = {
        {0, {0x01, 0xff}, {20}, -1},
        {2, {0x80, 0x7f}, {21}, 0},
        {4, {0x10, 0x20}, {22}, 1},
        {6, {0x40, 0x01}, {23}, 2},
        {8, {0x64, 0xff}, {24}, 3},
    };
    t.base_cost_us = 30;
    t.per_edge_cost_us = 3;
    t.stack_model = {{2, 256}, {20, 4096}, {21, 8192}, {22, 12288}, {23, 16384}, {24, 20480}};
    t.max_depth = 49152;
    t.initial_input.assign(10, 0xaa);
    validate_target(t);
    return t;
}

// A very long chain of two-byte magic comparisons in the header of a large
// input, with a flat execution cost. Matched bytes pile up the cmp
// objective while speed stays constant, so progress on this target is all
// about the ladder, and forty chained sites keep it from topping out inside
// a normal campaign. Each site unlocks the next, left to right through the
// first eighty bytes.
inline TargetSpec cmp_heavy_target() {
    TargetSpec t;
    t.name = "cmp-heavy";
    t.entry_edges = {{3, 4}};
    static constexpr std::uint8_t kWord[8] = {0xff, 0x80, 0x01, 0x10,
                                              0x7f, 0x40, 0x20, 0x64};
    for (std::uint32_t i = 0; i < 40; ++i) {
        ComparisonSite site;
        site.offset = 2 * i;
        site.expected = {kWord[i % 8], kWord[(i + 3) % 8]};
        site.guarded_edges = {30 + i};
        site.requires_site = i == 0 ? -1 : static_cast<std::int32_t>(i) - 1;
        t.sites.push_back(site);
        t.stack_model[30 + i] = 64 + 16 * i;
    }
    t.base_cost_us = 25;
    t.per_edge_cost_us = 0;
    t.stack_model[3] = 128;
    t.max_depth = 1u << 20;
    t.initial_input.assign(800, 0xaa);
    validate_target(t);
    return t;
}

inline const std::vector<std::string>& builtin_target_names() {
    static const std::vector<std::string> names = {"shallow-magic", "nested-magic-deep-stack",
                                                   "cmp-heavy"};
    return names;
}

inline TargetSpec builtin_target(const std::string& name) {
    if (name == "shallow-magic") return shallow_magic_target();
    if (name == "nested-magic-deep-stack") return nested_magic_deep_stack_target();
    if (name == "cmp-heavy") return cmp_heavy_target();
    throw std::invalid_argument("unknown built-in target: " + name);
}

// Resolves a built-in name or a path to a JSON spec file.
inline TargetSpec resolve_target(const std::string& name_or_path) {
    for (const std::string& n : builtin_target_names())
        if (n == name_or_path) return builtin_target(n);
    return load_target_file(name_or_path);
}

}  // namespace mobsched
