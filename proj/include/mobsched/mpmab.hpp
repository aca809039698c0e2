#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "objectives.hpp"

namespace mobsched {

struct CombinationId {
    std::uint32_t mask = 0;

    std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask)); }
    bool contains(std::size_t i) const { return (mask >> i) & 1u; }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < 32; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }

    bool operator==(const CombinationId&) const = default;
};

// All non-empty subsets of {0..n-1}, ascending by mask.
inline std::vector<CombinationId> enumerate_combinations(std::size_t n_objectives) {
    if (n_objectives == 0 || n_objectives > 16)
        throw std::invalid_argument("objective count out of range");
    std::vector<CombinationId> out;
    const std::uint32_t top = (1u << n_objectives) - 1;
    out.reserve(top);
    for (std::uint32_t m = 1; m <= top; ++m) out.push_back({m});
    return out;
}

struct CombinationStats {
    CombinationId combo;
    std::uint64_t times_selected = 0;
    // (round, reward) observed in rounds this combination was active.
    std::vector<std::pair<std::uint32_t, double>> reward_history;

    double avg_reward() const {
        if (reward_history.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& [round, r] : reward_history) sum += r;
        return sum / static_cast<double>(reward_history.size());
    }
};

// Combination reward for the last closed round t: the mean of the member
// rewards plus t * L, L being the member count.
inline double combination_reward(const RoundStats& s, CombinationId combo, double lambda) {
    const std::size_t l = combo.size();
    if (l == 0) throw std::invalid_argument("empty combination");
    double sum = 0.0;
    for (std::size_t i : combo.members()) sum += objective_reward(s, i, lambda);
    const double t = static_cast<double>(s.completed_rounds());
    return sum / static_cast<double>(l) + t * static_cast<double>(l);
}

// Upper-confidence score: avg reward plus gamma * sqrt(ln(total)/n_l).
inline double ucb_score(const CombinationStats& cs, std::uint64_t total_selections, double gamma) {
    if (cs.times_selected == 0) throw std::logic_error("ucb_score needs a selected arm");
    return cs.avg_reward() +
           gamma * std::sqrt(std::log(static_cast<double>(total_selections)) /
                             static_cast<double>(cs.times_selected));
}

// Arm bookkeeping plus the two-stage selection rule: a pioneer pass that
// tries every combination once in ascending mask order, then UCB argmax with
// ties resolved toward the smaller mask.
class CombinationSelector {
public:
    explicit CombinationSelector(std::size_t n_objectives, double gamma)
        : gamma_(gamma) {
        for (CombinationId c : enumerate_combinations(n_objectives))
            arms_.push_back(CombinationStats{c, 0, {}});
    }

    std::size_t arm_count() const { return arms_.size(); }
    const std::vector<CombinationStats>& arms() const { return arms_; }
    double gamma() const { return gamma_; }

    std::uint64_t total_selections() const {
        std::uint64_t total = 0;
        for (const auto& a : arms_) total += a.times_selected;
        return total;
    }

    bool pioneer_done() const {
        for (const auto& a : arms_)
            if (a.times_selected == 0) return false;
        return true;
    }

    // Scores for logging: UCB for sampled arms, +inf for never-sampled ones.
    std::vector<double> scores() const {
        std::vector<double> out(arms_.size());
        const std::uint64_t total = total_selections();
        for (std::size_t i = 0; i < arms_.size(); ++i)
            out[i] = arms_[i].times_selected == 0
                         ? std::numeric_limits<double>::infinity()
                         : ucb_score(arms_[i], total, gamma_);
        return out;
    }

    CombinationId select(std::vector<double>* scores_out = nullptr) {
        std::vector<double> sc = scores();
        if (scores_out) *scores_out = sc;
        std::size_t best = 0;
        for (std::size_t i = 1; i < arms_.size(); ++i)
            if (sc[i] > sc[best]) best = i;  // ascending masks, so ties keep the smaller
        arms_[best].times_selected += 1;
        last_selected_ = best;
        return arms_[best].combo;
    }

    CombinationId last_selected() const { return arms_.at(last_selected_).combo; }

    // Reward observed for the combination chosen for round `round`.
    void record_reward(std::uint32_t round, double reward) {
        arms_.at(last_selected_).reward_history.emplace_back(round, reward);
    }

    CombinationStats& arm_by_mask(std::uint32_t mask) {
        for (auto& a : arms_)
            if (a.combo.mask == mask) return a;
        throw std::invalid_argument("unknown combination mask");
    }

    // Deserialization hooks.
    void restore_arm(std::uint32_t mask, std::uint64_t times_selected,
                     std::vector<std::pair<std::uint32_t, double>> history) {
        CombinationStats& a = arm_by_mask(mask);
        a.times_selected = times_selected;
        a.reward_history = std::move(history);
    }

    void set_last_selected(std::uint32_t mask) {
        for (std::size_t i = 0; i < arms_.size(); ++i)
            if (arms_[i].combo.mask == mask) {
                last_selected_ = i;
                return;
            }
        throw std::invalid_argument("unknown combination mask");
    }

private:
    double gamma_;
    std::vector<CombinationStats> arms_;
    std::size_t last_selected_ = 0;
};

}  // namespace mobsched
