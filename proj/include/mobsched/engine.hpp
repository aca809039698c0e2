#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adapter.hpp"
#include "corpus.hpp"
#include "mpmab.hpp"
#include "mutation.hpp"
#include "nic.hpp"
#include "objectives.hpp"
#include "power.hpp"
#include "rng.hpp"
#include "simtarget.hpp"
#include "util.hpp"

namespace mobsched {

inline constexpr const char* kSnapshotVersion = "mobsched-snapshot-v1";

struct CampaignConfig {
    std::size_t total_rounds = 1440;
    std::uint64_t round_budget = 1000;
    double lambda = 0.10;
    double gamma = 0.01;
    double energy_cap = kDefaultEnergyCap;
    std::uint64_t rng_seed = 1;
    NicConfig nic;
    std::string out_dir;  // empty disables telemetry files
};

struct CampaignAborted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One fuzzing campaign: bandit-selected objective combinations drive the
// power schedule, the mutation credits and the in-loop optimizer against a
// shared seed pool. Virtual rounds are execution budgets, not wall time.
class Campaign {
public:
    Campaign(TargetSpec target, CampaignConfig cfg)
        : cfg_(std::move(cfg)),
          registry_(ObjectiveRegistry::standard()),
          stats_(registry_.size()),
          selector_(registry_.size(), cfg_.gamma),
          rng_(cfg_.rng_seed),
          target_(std::move(target)) {
        init_common();
    }

    Campaign(std::shared_ptr<AdapterProcess> adapter, CampaignConfig cfg)
        : cfg_(std::move(cfg)),
          registry_(ObjectiveRegistry::standard()),
          stats_(registry_.size()),
          selector_(registry_.size(), cfg_.gamma),
          rng_(cfg_.rng_seed),
          adapter_(std::move(adapter)) {
        init_common();
    }

    const RoundStats& stats() const { return stats_; }
    const SeedPool& pool() const { return pool_; }
    const CombinationSelector& selector() const { return selector_; }
    const CampaignConfig& config() const { return cfg_; }
    std::size_t rounds_run() const { return stats_.completed_rounds(); }
    std::uint64_t nic_execs() const { return nic_execs_total_; }
    std::uint64_t main_execs() const { return main_execs_total_; }
    std::uint64_t nic_invocations() const { return nic_invocations_; }
    const std::vector<std::uint32_t>& selection_log() const { return selection_log_; }

    void run() {
        while (stats_.completed_rounds() < cfg_.total_rounds) run_round();
        finalize();
    }

    void run_rounds(std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) run_round();
    }

    void run_round() {
        const auto round = static_cast<std::uint32_t>(stats_.current_round());
        std::vector<double> scores;
        const CombinationId combo = selector_.select(&scores);
        selection_log_.push_back(combo.mask);
        write_selection_row(round, combo, scores);

        CreditTable& credits = credit_tables_[combo.mask];
        std::uint64_t spent = 0, recorded = 0;
        std::uint64_t assignments = 0;
        double basis_sum = 0.0, trials_sum = 0.0;
        std::optional<FuzzState> first_state;
        while (spent < cfg_.round_budget) {
            const FuzzState state = update_state(pool_);
            if (!first_state) first_state = state;
            const std::size_t seed_idx = pool_.pick_next(rng_);
            const EnergyAssignment ea = assign_energy(pool_.at(seed_idx).best_objectives, state,
                                                      stats_, combo, cfg_.energy_cap);
            const std::uint64_t granted =
                std::min<std::uint64_t>(ea.trials, cfg_.round_budget - spent);
            ++assignments;
            basis_sum += ea.basis;
            trials_sum += ea.trials;
            if (state == FuzzState::Exploration)
                ++exploration_assignments_;
            else
                ++exploitation_assignments_;
            write_energy_row(round, pool_.at(seed_idx).id, ea, granted);

            bool skip_seed = false;
            for (std::uint64_t trial = 0; trial < granted && !skip_seed; ++trial) {
                ++spent;
                pool_.at(seed_idx).fuzz_count += 1;
                const MutOp op = pick_operator(credits, rng_);
                const std::size_t len = pool_.at(seed_idx).bytes.size();
                const std::size_t pos = pick_position(credits, len, rng_);
                std::vector<std::uint8_t> cand;
                if (op == MutOp::Splice || op == MutOp::OverwriteBlock) {
                    const Seed& donor = pool_.at(rng_.index(pool_.size()));
                    cand = apply_operator(op, pool_.at(seed_idx).bytes, pos, rng_, donor.bytes);
                } else {
                    cand = apply_operator(op, pool_.at(seed_idx).bytes, pos, rng_);
                }
                ExecutionRecord rec;
                try {
                    rec = execute_input(cand);
                } catch (const AdapterError& e) {
                    log_debug(std::string("seed skipped after retry: ") + e.what());
                    ++adapter_errors_;
                    skip_seed = true;
                    continue;
                }
                ++recorded;
                const std::vector<double> obs = objectives_from_record(rec);
                stats_.record_execution(obs);
                pool_.add_if_new_coverage(cand, rec, SeedOrigin::MainLoop);
                bool improved = false;
                for (std::size_t i : combo.members())
                    if (obs[i] > pool_.at(seed_idx).best_objectives[i]) improved = true;
                credit_update(credits, op, decile_of(pos, len), improved);
            }
        }
        main_execs_total_ += recorded;

        bool nic_fired = false;
        std::uint64_t nic_recorded = 0;
        if (cfg_.nic.enabled && stats_.completed_rounds() >= 2) {
            const std::size_t closed = stats_.completed_rounds();
            const double v_prev = combo_aggregate_at(closed - 1, combo);
            const double v_cur = combo_aggregate_at(closed, combo);
            if (should_start_nic(v_prev, v_cur, cfg_.nic.start_threshold)) {
                const auto allowance = static_cast<std::uint64_t>(
                    cfg_.nic.budget_fraction * static_cast<double>(main_execs_total_));
                if (allowance > nic_execs_total_) {
                    nic_fired = true;
                    nic_recorded = run_nic_pass(round, combo, credits, v_prev, v_cur,
                                                allowance - nic_execs_total_);
                }
            }
        }

        stats_.close_round();
        const double reward = combination_reward(stats_, combo, cfg_.lambda);
        selector_.record_reward(round, reward);
        const double good_frac = good_seed_fraction(pool_, stats_, combo);
        good_frac_sum_ += good_frac;

        write_round_row(round, combo, first_state.value_or(FuzzState::Exploration), recorded,
                        nic_recorded, reward, good_frac, nic_fired, assignments, basis_sum,
                        trials_sum);
    }

    // Aggregate normalized value of a combination at closed round k.
    double combo_aggregate_at(std::size_t k, CombinationId combo) const {
        double sum = 0.0;
        for (std::size_t i : combo.members())
            sum += neutral_ratio(stats_.round_avg_at(k, i), stats_.cumulative_avg_at(k, i));
        return sum / static_cast<double>(combo.size());
    }

    nlohmann::json summary() const {
        nlohmann::json j;
        const std::size_t rounds = stats_.completed_rounds();
        j["rounds"] = rounds;
        j["execs_total"] = stats_.cumulative_execs();
        j["execs_main"] = main_execs_total_;
        j["execs_nic"] = nic_execs_total_;
        j["nic_invocations"] = nic_invocations_;
        j["nic_admitted"] = nic_admitted_total_;
        j["adapter_errors"] = adapter_errors_;
        for (std::size_t i = 0; i < registry_.size(); ++i) {
            const std::string& name = registry_.at(i).name;
            j["cumulative_avg"][name] = rounds > 0 ? stats_.cumulative_avg(i) : 0.0;
            j["max_values"][name] = stats_.max_value(i);
        }
        j["mean_good_seed_fraction"] =
            rounds > 0 ? good_frac_sum_ / static_cast<double>(rounds) : 0.0;
        j["pool"]["size"] = pool_.size();
        j["pool"]["favored"] = pool_.favored_count();
        j["pool"]["edges_covered"] = pool_.edges_covered();
        std::map<std::string, std::size_t> origin_counts;
        for (const Seed& s : pool_.seeds()) origin_counts[to_string(s.origin)] += 1;
        j["pool"]["origins"] = origin_counts;
        std::uint64_t speed_selections = 0;
        for (const auto& arm : selector_.arms()) {
            j["selections"][std::to_string(arm.combo.mask)] = arm.times_selected;
            if (arm.combo.contains(0)) speed_selections += arm.times_selected;
        }
        const std::uint64_t total_sel = selector_.total_selections();
        j["speed_combo_fraction"] =
            total_sel > 0 ? static_cast<double>(speed_selections) / static_cast<double>(total_sel)
                          : 0.0;
        j["assignments"]["exploration"] = exploration_assignments_;
        j["assignments"]["exploitation"] = exploitation_assignments_;
        j["config"] = config_to_json();
        return j;
    }

    void finalize() {
        if (cfg_.out_dir.empty()) return;
        write_file(cfg_.out_dir + "/summary.json", summary().dump(2) + "\n");
        nlohmann::json credits;
        for (const auto& [mask, table] : credit_tables_)
            credits[std::to_string(mask)] = credit_table_to_json(table);
        write_file(cfg_.out_dir + "/credit_tables.json", credits.dump(2) + "\n");
        write_file(cfg_.out_dir + "/pool.json", pool_.to_json().dump(2) + "\n");
        flush_telemetry();
    }

    nlohmann::json snapshot() const {
        if (stats_.execs_in_round() != 0)
            throw std::logic_error("snapshot only at round boundaries");
        nlohmann::json j;
        j["version"] = kSnapshotVersion;
        j["config"] = config_to_json();
        if (target_)
            j["target"] = target_to_json(*target_);
        else
            j["adapter_command"] = adapter_->command();
        nlohmann::json hist = nlohmann::json::array();
        for (std::size_t t = 1; t <= stats_.completed_rounds(); ++t) {
            nlohmann::json row;
            std::vector<double> avg;
            for (std::size_t i = 0; i < registry_.size(); ++i)
                avg.push_back(stats_.round_avg_at(t, i));
            row["avg"] = avg;
            row["execs"] = stats_.execs_in_round_at(t);
            hist.push_back(row);
        }
        j["stats"]["rounds"] = hist;
        j["stats"]["max"] = stats_.max_values();
        nlohmann::json arms = nlohmann::json::array();
        for (const auto& arm : selector_.arms()) {
            nlohmann::json ja;
            ja["mask"] = arm.combo.mask;
            ja["n"] = arm.times_selected;
            nlohmann::json hist_a = nlohmann::json::array();
            for (const auto& [round, reward] : arm.reward_history)
                hist_a.push_back({round, reward});
            ja["history"] = hist_a;
            arms.push_back(ja);
        }
        j["selector"]["arms"] = arms;
        j["selector"]["last_mask"] = selector_.total_selections() > 0
                                         ? selector_.last_selected().mask
                                         : 0;
        j["pool"] = pool_.to_json();
        nlohmann::json credits;
        for (const auto& [mask, table] : credit_tables_)
            credits[std::to_string(mask)] = credit_table_to_json(table);
        j["credits"] = credits;
        j["rng"] = rng_.save();
        j["counters"]["main_execs"] = main_execs_total_;
        j["counters"]["nic_execs"] = nic_execs_total_;
        j["counters"]["nic_invocations"] = nic_invocations_;
        j["counters"]["nic_admitted"] = nic_admitted_total_;
        j["counters"]["adapter_errors"] = adapter_errors_;
        j["counters"]["exploration_assignments"] = exploration_assignments_;
        j["counters"]["exploitation_assignments"] = exploitation_assignments_;
        j["counters"]["good_frac_sum"] = good_frac_sum_;
        j["selection_log"] = selection_log_;
        return j;
    }

    void snapshot_to_file(const std::string& path) const {
        write_file(path, snapshot().dump(2) + "\n");
    }

    static Campaign resume(const nlohmann::json& snap, const std::string& out_dir_override = "",
                           const std::string& adapter_command_override = "") {
        if (!snap.contains("version") || snap["version"] != kSnapshotVersion)
            throw std::invalid_argument("snapshot version mismatch");
        CampaignConfig cfg = config_from_json(snap.at("config"));
        if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
        std::optional<Campaign> campaign;
        if (snap.contains("target")) {
            campaign.emplace(target_from_json(snap.at("target")), cfg);
        } else {
            std::string cmd = adapter_command_override.empty()
                                  ? snap.at("adapter_command").get<std::string>()
                                  : adapter_command_override;
            campaign.emplace(std::make_shared<AdapterProcess>(cmd), cfg);
        }
        campaign->restore_state(snap);
        return std::move(*campaign);
    }

    static Campaign resume_from_file(const std::string& path,
                                     const std::string& out_dir_override = "",
                                     const std::string& adapter_command_override = "") {
        return resume(nlohmann::json::parse(read_file(path)), out_dir_override,
                      adapter_command_override);
    }

private:
    void init_common() {
        if (cfg_.total_rounds == 0) throw std::invalid_argument("total_rounds must be positive");
        if (cfg_.round_budget == 0) throw std::invalid_argument("round_budget must be positive");
        if (cfg_.lambda < 0.0 || cfg_.gamma < 0.0)
            throw std::invalid_argument("lambda and gamma must be non-negative");
        if (!cfg_.out_dir.empty()) std::filesystem::create_directories(cfg_.out_dir);
        if (target_) {
            std::vector<std::uint8_t> seed0 = target_->initial_input;
            if (seed0.empty()) seed0.assign(16, 0x00);
            if (seed0.size() > kMaxInputLen) throw std::invalid_argument("initial input too long");
            admit_initial(seed0);
        } else {
            admit_initial(std::vector<std::uint8_t>(16, 0x00));
        }
    }

    void admit_initial(std::vector<std::uint8_t> seed0) {
        ExecutionRecord rec = execute_input(seed0);
        stats_.record_execution(objectives_from_record(rec));
        // the first real execution lands in round 1's accumulator
        if (!pool_.add_if_new_coverage(std::move(seed0), rec, SeedOrigin::Initial))
            throw std::logic_error("initial seed must be admissible");
        main_execs_total_ += 1;
    }

    ExecutionRecord execute_input(const std::vector<std::uint8_t>& bytes) {
        if (target_) return execute(*target_, bytes);
        try {
            return adapter_->execute_once(bytes);
        } catch (const AdapterError& e) {
            log_debug(std::string("adapter retry: ") + e.what());
            try {
                return adapter_->execute_once(bytes);
            } catch (const AdapterDead&) {
                abort_with_snapshot();
                throw;
            }
        } catch (const AdapterDead&) {
            abort_with_snapshot();
            throw;
        }
    }

    [[noreturn]] void abort_with_snapshot() {
        // mid-round state cannot be resumed exactly; keep the last boundary
        if (!cfg_.out_dir.empty() && stats_.execs_in_round() == 0)
            snapshot_to_file(cfg_.out_dir + "/abort_snapshot.json");
        throw CampaignAborted("target failure: harness process died");
    }

    std::uint64_t run_nic_pass(std::uint32_t round, CombinationId combo, CreditTable& credits,
                               double v_prev, double v_cur, std::uint64_t budget) {
        std::vector<std::uint64_t> admitted_ids;
        auto execute_fn = [this](const std::vector<std::uint8_t>& b) {
            ExecutionRecord rec = execute_input(b);
            stats_.record_execution(objectives_from_record(rec));
            return rec;
        };
        auto admit_fn = [this, &admitted_ids](const std::vector<std::uint8_t>& b,
                                              const ExecutionRecord& rec) {
            const Seed* s = pool_.add_if_new_coverage(b, rec, SeedOrigin::Nic);
            if (s) admitted_ids.push_back(s->id);
            return s != nullptr;
        };
        NicResult res;
        try {
            res = run_nic(pool_, combo, credits, cfg_.nic, rng_, budget, execute_fn, admit_fn);
        } catch (const AdapterError&) {
            // seed-level failures inside the optimizer end the pass early
        }
        for (const Individual& ind : res.front)
            if (ind.executed) pool_.add_front_member(ind.bytes, ind.record);
        nic_execs_total_ += res.execs_used;
        nic_invocations_ += 1;
        nic_admitted_total_ += res.admitted;
        write_nic_record(round, combo, v_prev, v_cur, res, admitted_ids);
        return res.execs_used;
    }

    nlohmann::json config_to_json() const {
        nlohmann::json j;
        j["total_rounds"] = cfg_.total_rounds;
        j["round_budget"] = cfg_.round_budget;
        j["lambda"] = cfg_.lambda;
        j["gamma"] = cfg_.gamma;
        j["energy_cap"] = cfg_.energy_cap;
        j["rng_seed"] = cfg_.rng_seed;
        j["out_dir"] = cfg_.out_dir;
        j["nic"]["enabled"] = cfg_.nic.enabled;
        j["nic"]["population_fraction"] = cfg_.nic.population_fraction;
        j["nic"]["pop_min"] = cfg_.nic.pop_min;
        j["nic"]["pop_max"] = cfg_.nic.pop_max;
        j["nic"]["generations"] = cfg_.nic.generations;
        j["nic"]["start_threshold"] = cfg_.nic.start_threshold;
        j["nic"]["budget_fraction"] = cfg_.nic.budget_fraction;
        return j;
    }

    static CampaignConfig config_from_json(const nlohmann::json& j) {
        CampaignConfig cfg;
        cfg.total_rounds = j.at("total_rounds").get<std::size_t>();
        cfg.round_budget = j.at("round_budget").get<std::uint64_t>();
        cfg.lambda = j.at("lambda").get<double>();
        cfg.gamma = j.at("gamma").get<double>();
        cfg.energy_cap = j.at("energy_cap").get<double>();
        cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        cfg.out_dir = j.at("out_dir").get<std::string>();
        const auto& n = j.at("nic");
        cfg.nic.enabled = n.at("enabled").get<bool>();
        cfg.nic.population_fraction = n.at("population_fraction").get<double>();
        cfg.nic.pop_min = n.at("pop_min").get<std::size_t>();
        cfg.nic.pop_max = n.at("pop_max").get<std::size_t>();
        cfg.nic.generations = n.at("generations").get<std::size_t>();
        cfg.nic.start_threshold = n.at("start_threshold").get<double>();
        cfg.nic.budget_fraction = n.at("budget_fraction").get<double>();
        return cfg;
    }

    void restore_state(const nlohmann::json& snap) {
        // the constructor ran the initial execution; rebuild from scratch
        stats_ = RoundStats(registry_.size());
        for (const auto& row : snap.at("stats").at("rounds"))
            stats_.restore_closed_round(row.at("avg").get<std::vector<double>>(),
                                        row.at("execs").get<std::uint64_t>());
        stats_.restore_max_values(snap.at("stats").at("max").get<std::vector<double>>());
        for (const auto& ja : snap.at("selector").at("arms")) {
            std::vector<std::pair<std::uint32_t, double>> hist;
            for (const auto& h : ja.at("history"))
                hist.emplace_back(h[0].get<std::uint32_t>(), h[1].get<double>());
            selector_.restore_arm(ja.at("mask").get<std::uint32_t>(),
                                  ja.at("n").get<std::uint64_t>(), std::move(hist));
        }
        if (snap.at("selector").at("last_mask").get<std::uint32_t>() != 0)
            selector_.set_last_selected(snap.at("selector").at("last_mask").get<std::uint32_t>());
        pool_ = SeedPool::from_json(snap.at("pool"));
        credit_tables_.clear();
        for (const auto& [mask, table] : snap.at("credits").items())
            credit_tables_[static_cast<std::uint32_t>(std::stoul(mask))] =
                credit_table_from_json(table);
        rng_.restore(snap.at("rng").get<std::string>());
        const auto& c = snap.at("counters");
        main_execs_total_ = c.at("main_execs").get<std::uint64_t>();
        nic_execs_total_ = c.at("nic_execs").get<std::uint64_t>();
        nic_invocations_ = c.at("nic_invocations").get<std::uint64_t>();
        nic_admitted_total_ = c.at("nic_admitted").get<std::uint64_t>();
        adapter_errors_ = c.at("adapter_errors").get<std::uint64_t>();
        exploration_assignments_ = c.at("exploration_assignments").get<std::uint64_t>();
        exploitation_assignments_ = c.at("exploitation_assignments").get<std::uint64_t>();
        good_frac_sum_ = c.at("good_frac_sum").get<double>();
        selection_log_ = snap.at("selection_log").get<std::vector<std::uint32_t>>();
        resumed_ = true;
    }

    // --- telemetry ---------------------------------------------------------

    std::ofstream& stream(std::unique_ptr<std::ofstream>& slot, const std::string& file,
                          const std::string& header) {
        if (!slot) {
            const std::string path = cfg_.out_dir + "/" + file;
            bool fresh = true;
            if (resumed_) {
                std::error_code ec;
                const auto sz = std::filesystem::file_size(path, ec);
                fresh = ec || sz == 0;
            }
            slot = std::make_unique<std::ofstream>(path,
                                                   resumed_ ? std::ios::app : std::ios::trunc);
            if (!*slot) throw std::runtime_error("cannot open " + path);
            if (fresh) *slot << header;
        }
        return *slot;
    }

    void write_selection_row(std::uint32_t round, CombinationId combo,
                             const std::vector<double>& scores) {
        if (cfg_.out_dir.empty()) return;
        std::string header = "round,mask";
        for (const auto& arm : selector_.arms())
            header += ",score_m" + std::to_string(arm.combo.mask);
        header += "\n";
        std::vector<std::string> cells = {fmt_u64(round), fmt_u64(combo.mask)};
        for (double s : scores) cells.push_back(fmt_double(s));
        stream(selections_, "selections.csv", header) << join_csv(cells);
    }

    void write_energy_row(std::uint32_t round, std::uint64_t seed_id, const EnergyAssignment& ea,
                          std::uint64_t granted) {
        if (cfg_.out_dir.empty()) return;
        stream(energy_, "energy.csv",
               "round,seed,state,basis,ratio,max_hits,trials,granted\n")
            << join_csv({fmt_u64(round), fmt_u64(seed_id), to_string(ea.state),
                         fmt_double(ea.basis), fmt_double(ea.ratio), fmt_u64(ea.max_hits),
                         fmt_u64(ea.trials), fmt_u64(granted)});
    }

    void write_round_row(std::uint32_t round, CombinationId combo, FuzzState first_state,
                         std::uint64_t execs_main, std::uint64_t execs_nic, double reward,
                         double good_frac, bool nic_fired, std::uint64_t assignments,
                         double basis_sum, double trials_sum) {
        if (cfg_.out_dir.empty()) return;
        std::string header = "round,mask,state,execs_main,execs_nic,execs_cum";
        for (std::size_t i = 0; i < registry_.size(); ++i) header += ",avg_" + registry_.at(i).name;
        for (std::size_t i = 0; i < registry_.size(); ++i) header += ",cum_" + registry_.at(i).name;
        header += ",reward,pool_size,favored,good_frac,nic_fired,assignments,mean_basis,mean_trials\n";
        std::vector<std::string> cells = {fmt_u64(round), fmt_u64(combo.mask),
                                          to_string(first_state), fmt_u64(execs_main),
                                          fmt_u64(execs_nic), fmt_u64(stats_.cumulative_execs())};
        const std::size_t t = stats_.completed_rounds();
        for (std::size_t i = 0; i < registry_.size(); ++i)
            cells.push_back(fmt_double(stats_.round_avg_at(t, i)));
        for (std::size_t i = 0; i < registry_.size(); ++i)
            cells.push_back(fmt_double(stats_.cumulative_avg_at(t, i)));
        cells.push_back(fmt_double(reward));
        cells.push_back(fmt_u64(pool_.size()));
        cells.push_back(fmt_u64(pool_.favored_count()));
        cells.push_back(fmt_double(good_frac));
        cells.push_back(fmt_u64(nic_fired ? 1 : 0));
        cells.push_back(fmt_u64(assignments));
        cells.push_back(fmt_double(assignments > 0 ? basis_sum / static_cast<double>(assignments)
                                                   : 0.0));
        cells.push_back(fmt_double(assignments > 0 ? trials_sum / static_cast<double>(assignments)
                                                   : 0.0));
        stream(rounds_, "rounds.csv", header) << join_csv(cells);
    }

    void write_nic_record(std::uint32_t round, CombinationId combo, double v_prev, double v_cur,
                          const NicResult& res, const std::vector<std::uint64_t>& admitted_ids) {
        if (cfg_.out_dir.empty()) return;
        nlohmann::json j;
        j["round"] = round;
        j["mask"] = combo.mask;
        j["v_prev"] = v_prev;
        j["v_cur"] = v_cur;
        j["gradient"] = (v_cur - v_prev) / std::max(v_prev, 1e-9);
        j["generations"] = res.generations_run;
        j["execs"] = res.execs_used;
        j["admitted"] = res.admitted;
        j["admitted_ids"] = admitted_ids;
        j["initial_front"] = res.initial_front_objectives;
        j["final_front"] = res.final_front_objectives;
        nlohmann::json gens = nlohmann::json::array();
        for (const auto& g : res.generation_log)
            gens.push_back({{"generation", g.generation},
                            {"front_sizes", g.front_sizes},
                            {"execs_used", g.execs_used}});
        j["per_generation"] = gens;
        stream(nic_, "nic.jsonl", "") << j.dump() << "\n";
    }

    void flush_telemetry() {
        if (rounds_) rounds_->flush();
        if (selections_) selections_->flush();
        if (energy_) energy_->flush();
        if (nic_) nic_->flush();
    }

    CampaignConfig cfg_;
    ObjectiveRegistry registry_;
    RoundStats stats_;
    CombinationSelector selector_;
    Rng rng_;
    std::optional<TargetSpec> target_;
    std::shared_ptr<AdapterProcess> adapter_;
    SeedPool pool_;
    std::map<std::uint32_t, CreditTable> credit_tables_;
    std::vector<std::uint32_t> selection_log_;

    std::uint64_t main_execs_total_ = 0;
    std::uint64_t nic_execs_total_ = 0;
    std::uint64_t nic_invocations_ = 0;
    std::uint64_t nic_admitted_total_ = 0;
    std::uint64_t adapter_errors_ = 0;
    std::uint64_t exploration_assignments_ = 0;
    std::uint64_t exploitation_assignments_ = 0;
    double good_frac_sum_ = 0.0;
    bool resumed_ = false;

    std::unique_ptr<std::ofstream> rounds_;
    std::unique_ptr<std::ofstream> selections_;
    std::unique_ptr<std::ofstream> energy_;
    std::unique_ptr<std::ofstream> nic_;
};

}  // namespace mobsched
