#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mpmab.hpp"
#include "objectives.hpp"

namespace mobsched {

enum class FuzzState { Exploration, Exploitation };

inline const char* to_string(FuzzState s) {
    return s == FuzzState::Exploration ? "exploration" : "exploitation";
}

inline constexpr double kDefaultEnergyCap = 1024.0;

// Average energy spent per unit of objective i: Execs(t) / vbar^t_i, both
// taken at the last closed round so every assignment within a round sees the
// same schedule. A zero average means the objective never produced value;
// the cap stands in.
inline double average_objective_energy(const RoundStats& s, std::size_t i,
                                       double cap = kDefaultEnergyCap) {
    const double vbar = s.completed_rounds() == 0 ? 0.0 : s.cumulative_avg(i);
    if (vbar == 0.0) return cap;
    return static_cast<double>(s.cumulative_execs_at(s.completed_rounds())) / vbar;
}

// Mean of the member objective energies.
inline double combination_energy(const RoundStats& s, CombinationId combo,
                                 double cap = kDefaultEnergyCap) {
    double sum = 0.0;
    for (std::size_t i : combo.members()) sum += average_objective_energy(s, i, cap);
    return sum / static_cast<double>(combo.size());
}

// Mean ratio of a seed's best value to the cumulative average across the
// combination's members, with the neutral-1 rule for empty averages.
inline double aggregate_ratio(const std::vector<double>& seed_best, const RoundStats& s,
                              CombinationId combo) {
    double sum = 0.0;
    for (std::size_t i : combo.members()) {
        const double vbar = s.completed_rounds() == 0 ? 0.0 : s.cumulative_avg(i);
        sum += neutral_ratio(seed_best.at(i), vbar);
    }
    return sum / static_cast<double>(combo.size());
}

// Count of member objectives where the seed holds the running maximum
// (ties inclusive).
inline std::size_t max_hit_count(const std::vector<double>& seed_best, const RoundStats& s,
                                 CombinationId combo) {
    std::size_t hits = 0;
    for (std::size_t i : combo.members())
        if (seed_best.at(i) >= s.max_value(i)) ++hits;
    return hits;
}

struct EnergyAssignment {
    FuzzState state = FuzzState::Exploration;
    double basis = 0.0;   // raw schedule value before cap and rounding
    double ratio = 0.0;   // aggregate ratio (exploitation only; 0 otherwise)
    std::size_t max_hits = 0;
    std::uint32_t trials = 1;
};

// Exploration spends the combination energy as-is; exploitation scales it by
// the seed's aggregate ratio plus one per maximum it holds.
inline EnergyAssignment assign_energy(const std::vector<double>& seed_best, FuzzState state,
                                      const RoundStats& s, CombinationId combo,
                                      double cap = kDefaultEnergyCap) {
    EnergyAssignment ea;
    ea.state = state;
    const double ebar = combination_energy(s, combo, cap);
    if (state == FuzzState::Exploration) {
        ea.basis = ebar;
    } else {
        ea.ratio = aggregate_ratio(seed_best, s, combo);
        ea.max_hits = max_hit_count(seed_best, s, combo);
        ea.basis = ebar * (ea.ratio + static_cast<double>(ea.max_hits));
    }
    const double clipped = std::min(ea.basis, cap);
    ea.trials = static_cast<std::uint32_t>(std::max(1.0, std::ceil(clipped)));
    return ea;
}

}  // namespace mobsched
