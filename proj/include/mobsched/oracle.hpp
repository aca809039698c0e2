#pragma once

// Reference implementations kept deliberately separate from the engine
// headers: everything here recomputes results from raw logged numbers with
// its own arithmetic so the two paths can check each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mobsched::oracle {

// Prefix means of a value series with compensated summation.
inline std::vector<double> prefix_means(const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    long double sum = 0.0L, comp = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long double y = static_cast<long double>(values[i]) - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.push_back(static_cast<double>(sum / static_cast<long double>(i + 1)));
    }
    return out;
}

// Reward of one objective for round t (1-based into the series), recomputed
// from the raw per-round values.
inline double objective_reward_replay(const std::vector<double>& series,
                                      const std::vector<double>& speed_series, std::size_t t,
                                      double lambda) {
    if (t == 0 || t > series.size() || series.size() != speed_series.size())
        throw std::invalid_argument("bad replay round");
    auto ratio_at = [](const std::vector<double>& v, std::size_t round) {
        long double sum = 0.0L;
        for (std::size_t k = 0; k < round; ++k) sum += static_cast<long double>(v[k]);
        const long double mean = sum / static_cast<long double>(round);
        if (mean == 0.0L) return 1.0;
        return static_cast<double>(static_cast<long double>(v[round - 1]) / mean);
    };
    return static_cast<double>(t) *
           (ratio_at(series, t) - lambda * ratio_at(speed_series, t));
}

// Combination reward replay: mean of member rewards plus t * L.
inline double combination_reward_replay(const std::vector<std::vector<double>>& per_objective,
                                        const std::vector<std::size_t>& members, std::size_t t,
                                        double lambda) {
    long double sum = 0.0L;
    for (std::size_t i : members)
        sum += objective_reward_replay(per_objective.at(i), per_objective.at(0), t, lambda);
    return static_cast<double>(sum / static_cast<long double>(members.size())) +
           static_cast<double>(t) * static_cast<double>(members.size());
}

// UCB selection replay from raw per-arm histories. Arms are given in mask
// order; each history holds the rewards observed when that arm was chosen.
// Returns the index the bandit must pick next (unsampled arms first,
// smallest index wins ties).
inline std::size_t ucb_select_replay(const std::vector<std::vector<double>>& histories,
                                     double gamma) {
    std::uint64_t total = 0;
    for (const auto& h : histories) total += h.size();
    for (std::size_t i = 0; i < histories.size(); ++i)
        if (histories[i].empty()) return i;
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < histories.size(); ++i) {
        long double sum = 0.0L;
        for (double r : histories[i]) sum += static_cast<long double>(r);
        const double avg = static_cast<double>(sum / static_cast<long double>(histories[i].size()));
        const double score =
            avg + gamma * std::sqrt(std::log(static_cast<double>(total)) /
                                    static_cast<double>(histories[i].size()));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

// Average objective energy replay (execs / mean, cap when the mean is zero).
inline double energy_replay(std::uint64_t execs, double vbar, double cap) {
    if (vbar == 0.0) return cap;
    return static_cast<double>(execs) / vbar;
}

// O(n^2) dominance front peeling; maximization semantics.
inline bool dominates_ref(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

inline std::vector<std::vector<std::size_t>> brute_force_fronts(
    const std::vector<std::vector<double>>& points) {
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<bool> assigned(points.size(), false);
    std::size_t remaining = points.size();
    while (remaining > 0) {
        std::vector<std::size_t> front;
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (assigned[p]) continue;
            bool dominated = false;
            for (std::size_t q = 0; q < points.size(); ++q) {
                if (q == p || assigned[q]) continue;
                if (dominates_ref(points[q], points[p])) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) front.push_back(p);
        }
        for (std::size_t p : front) assigned[p] = true;
        remaining -= front.size();
        fronts.push_back(std::move(front));
    }
    return fronts;
}

// Hypervolume dominated by a point set against the origin, all coordinates
// maximized and non-negative. Recursive slicing over the last dimension.
inline double hypervolume(std::vector<std::vector<double>> points) {
    if (points.empty()) return 0.0;
    const std::size_t dim = points[0].size();
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("hypervolume arity mismatch");
        for (double v : p)
            if (v < 0.0) throw std::invalid_argument("hypervolume needs non-negative points");
    }
    if (dim == 1) {
        double best = 0.0;
        for (const auto& p : points) best = std::max(best, p[0]);
        return best;
    }
    std::sort(points.begin(), points.end(), [dim](const auto& a, const auto& b) {
        return a[dim - 1] > b[dim - 1];
    });
    double volume = 0.0;
    std::vector<std::vector<double>> prefix;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<double> proj(points[i].begin(), points[i].end() - 1);
        // drop projections dominated within the prefix to keep recursion small
        bool dominated = false;
        for (const auto& q : prefix) {
            bool ge = true;
            for (std::size_t k = 0; k < proj.size(); ++k)
                if (q[k] < proj[k]) {
                    ge = false;
                    break;
                }
            if (ge) {
                dominated = true;
                break;
            }
        }
        if (!dominated) prefix.push_back(proj);
        const double height =
            points[i][dim - 1] - (i + 1 < points.size() ? points[i + 1][dim - 1] : 0.0);
        if (height > 0.0) volume += height * hypervolume(prefix);
    }
    return volume;
}

}  // namespace mobsched::oracle
