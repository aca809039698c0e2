#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobsched {

struct ObjectiveSpec {
    std::string name;
    std::string unit;
    bool is_speed = false;
};

// Objective 0 is always the execution-speed objective; rewards penalize
// against it and the power schedule normalizes by it.
class ObjectiveRegistry {
public:
    explicit ObjectiveRegistry(std::vector<ObjectiveSpec> specs) : specs_(std::move(specs)) {
        if (specs_.empty()) throw std::invalid_argument("objective registry must not be empty");
        if (!specs_[0].is_speed)
            throw std::invalid_argument("objective 0 must be the speed objective");
        for (std::size_t i = 1; i < specs_.size(); ++i) {
            if (specs_[i].is_speed)
                throw std::invalid_argument("only objective 0 may be the speed objective");
            for (std::size_t j = 0; j < i; ++j)
                if (specs_[j].name == specs_[i].name)
                    throw std::invalid_argument("duplicate objective name: " + specs_[i].name);
        }
    }

    static ObjectiveRegistry standard() {
        return ObjectiveRegistry({{"speed", "execs/vsec", true},
                                  {"stack", "bytes", false},
                                  {"cmp", "bytes", false}});
    }

    std::size_t size() const { return specs_.size(); }
    const ObjectiveSpec& at(std::size_t i) const { return specs_.at(i); }

private:
    std::vector<ObjectiveSpec> specs_;
};

// Per-round and cumulative objective-value accounting.
//
// Round t's value of objective i is the mean of the observations recorded
// while round t was open. The cumulative average after closing round t is the
// mean of the per-round values 1..t, matching a sum that starts from a zero
// value at round 0 divided by t.
class RoundStats {
public:
    explicit RoundStats(std::size_t n_objectives)
        : n_(n_objectives), sum_(n_objectives, 0.0), max_(n_objectives, 0.0) {
        if (n_ == 0) throw std::invalid_argument("need at least one objective");
    }

    std::size_t objectives() const { return n_; }

    void record_execution(const std::vector<double>& obs) {
        if (obs.size() != n_) throw std::invalid_argument("observation arity mismatch");
        for (double v : obs) {
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("objective values must be finite and non-negative");
        }
        for (std::size_t i = 0; i < n_; ++i) {
            sum_[i] += obs[i];
            if (obs[i] > max_[i]) max_[i] = obs[i];
        }
        ++count_;
        ++total_execs_;
    }

    void close_round() {
        std::vector<double> avg(n_, 0.0);
        if (count_ > 0)
            for (std::size_t i = 0; i < n_; ++i) avg[i] = sum_[i] / static_cast<double>(count_);
        history_.push_back(avg);
        const std::size_t t = history_.size();
        std::vector<double> cum(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double prev = t > 1 ? cum_history_[t - 2][i] * static_cast<double>(t - 1) : 0.0;
            cum[i] = (prev + avg[i]) / static_cast<double>(t);
        }
        cum_history_.push_back(cum);
        execs_history_.push_back(count_);
        cum_execs_history_.push_back(total_execs_);
        sum_.assign(n_, 0.0);
        count_ = 0;
    }

    std::size_t completed_rounds() const { return history_.size(); }
    std::size_t current_round() const { return history_.size() + 1; }
    std::uint64_t execs_in_round() const { return count_; }
    std::uint64_t cumulative_execs() const { return total_execs_; }

    // v^t_i of the last closed round.
    double round_avg(std::size_t i) const { return history_.at(checked_t() - 1).at(i); }
    // cumulative average through the last closed round.
    double cumulative_avg(std::size_t i) const { return cum_history_.at(checked_t() - 1).at(i); }

    double round_avg_at(std::size_t t, std::size_t i) const { return history_.at(t - 1).at(i); }
    double cumulative_avg_at(std::size_t t, std::size_t i) const {
        return cum_history_.at(t - 1).at(i);
    }
    std::uint64_t execs_in_round_at(std::size_t t) const { return execs_history_.at(t - 1); }
    std::uint64_t cumulative_execs_at(std::size_t t) const { return cum_execs_history_.at(t - 1); }

    // Running maximum of every observation ever recorded, per objective.
    double max_value(std::size_t i) const { return max_.at(i); }
    const std::vector<double>& max_values() const { return max_; }

    const std::vector<std::vector<double>>& history() const { return history_; }

    // Deserialization: re-append one closed round using the same arithmetic
    // as close_round so restored cumulative averages match bit for bit.
    void restore_closed_round(const std::vector<double>& avg, std::uint64_t execs) {
        if (avg.size() != n_) throw std::invalid_argument("restored round arity mismatch");
        if (count_ != 0) throw std::logic_error("cannot restore into an open round");
        history_.push_back(avg);
        const std::size_t t = history_.size();
        std::vector<double> cum(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double prev = t > 1 ? cum_history_[t - 2][i] * static_cast<double>(t - 1) : 0.0;
            cum[i] = (prev + avg[i]) / static_cast<double>(t);
        }
        cum_history_.push_back(cum);
        execs_history_.push_back(execs);
        total_execs_ += execs;
        cum_execs_history_.push_back(total_execs_);
    }

    void restore_max_values(const std::vector<double>& maxima) {
        if (maxima.size() != n_) throw std::invalid_argument("restored maxima arity mismatch");
        max_ = maxima;
    }

private:
    std::size_t checked_t() const {
        if (history_.empty()) throw std::logic_error("no closed round yet");
        return history_.size();
    }

    std::size_t n_;
    std::vector<double> sum_;
    std::vector<double> max_;
    std::uint64_t count_ = 0;
    std::uint64_t total_execs_ = 0;
    std::vector<std::vector<double>> history_;
    std::vector<std::vector<double>> cum_history_;
    std::vector<std::uint64_t> execs_history_;
    std::vector<std::uint64_t> cum_execs_history_;
};

// Ratio of a value to its cumulative average; a zero average means the
// objective has produced nothing yet and the ratio is defined as neutral 1.
inline double neutral_ratio(double v, double vbar) { return vbar == 0.0 ? 1.0 : v / vbar; }

// Per-objective reward for the last closed round t:
//   R(O_i, t) = t * (v^t_i / vbar^t_i - lambda * v^t_0 / vbar^t_0)
// For the speed objective itself this collapses to t * (1 - lambda) * ratio0.
inline double objective_reward(const RoundStats& s, std::size_t i, double lambda) {
    const double t = static_cast<double>(s.completed_rounds());
    const double ri = neutral_ratio(s.round_avg(i), s.cumulative_avg(i));
    const double r0 = neutral_ratio(s.round_avg(0), s.cumulative_avg(0));
    return t * (ri - lambda * r0);
}

}  // namespace mobsched
