#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mobsched {

// All objectives are maximized: a dominates b when a is >= everywhere and
// strictly greater somewhere.
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dominance arity mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

// Fast non-dominated sort. Returns fronts of point indices; front 0 is the
// non-dominated set of the whole input.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(
    const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q]))
                dominated[p].push_back(q);
            else if (dominates(points[q], points[p]))
                ++dom_count[p];
        }
        if (dom_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t p : current)
            for (std::size_t q : dominated[p])
                if (--dom_count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

// NSGA-II crowding distance within one front. Boundary points get infinity;
// interior points sum normalized neighbour gaps per objective.
inline std::vector<double> crowding_distances(const std::vector<std::vector<double>>& points,
                                              const std::vector<std::size_t>& front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    const std::size_t m = points[front[0]].size();
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[front[a]][obj] < points[front[b]][obj];
        });
        const double lo = points[front[order.front()]][obj];
        const double hi = points[front[order.back()]][obj];
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        if (hi == lo) continue;
        for (std::size_t k = 1; k + 1 < n; ++k)
            dist[order[k]] +=
                (points[front[order[k + 1]]][obj] - points[front[order[k - 1]]][obj]) / (hi - lo);
    }
    return dist;
}

// Selects exactly k survivors: whole fronts in rank order, then the boundary
// front truncated by descending crowding distance (ties by index, so the
// result is deterministic).
inline std::vector<std::size_t> select_survivors(const std::vector<std::vector<double>>& points,
                                                 std::size_t k) {
    if (k > points.size()) throw std::invalid_argument("cannot select more survivors than points");
    std::vector<std::size_t> chosen;
    for (const auto& front : non_dominated_sort(points)) {
        if (chosen.size() + front.size() <= k) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            if (chosen.size() == k) break;
            continue;
        }
        std::vector<double> dist = crowding_distances(points, front);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (dist[a] != dist[b]) return dist[a] > dist[b];
            return front[a] < front[b];
        });
        for (std::size_t i = 0; chosen.size() < k; ++i) chosen.push_back(front[order[i]]);
        break;
    }
    return chosen;
}

}  // namespace mobsched
