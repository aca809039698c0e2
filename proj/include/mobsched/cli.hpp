#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "engine.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "simtarget.hpp"

namespace mobsched {

namespace cli_detail {

inline bool close(double a, double b, double tol = 1e-9) {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

struct RoundsView {
    report::Csv csv;
    std::size_t mask_col, reward_col, execs_cum_col;
    std::vector<std::size_t> avg_cols, cum_cols;

    explicit RoundsView(report::Csv c) : csv(std::move(c)) {
        mask_col = csv.column("mask");
        reward_col = csv.column("reward");
        execs_cum_col = csv.column("execs_cum");
        for (std::size_t i = 0; i < csv.header.size(); ++i) {
            if (csv.header[i].rfind("avg_", 0) == 0) avg_cols.push_back(i);
            if (csv.header[i].rfind("cum_", 0) == 0) cum_cols.push_back(i);
        }
    }

    std::size_t rounds() const { return csv.rows.size(); }
    std::uint32_t mask(std::size_t t) const {
        return static_cast<std::uint32_t>(std::stoul(csv.rows[t - 1][mask_col]));
    }
    double reward(std::size_t t) const { return std::stod(csv.rows[t - 1][reward_col]); }
    double avg(std::size_t t, std::size_t i) const {
        return std::stod(csv.rows[t - 1][avg_cols[i]]);
    }
    double cum(std::size_t t, std::size_t i) const {
        return std::stod(csv.rows[t - 1][cum_cols[i]]);
    }
    std::uint64_t execs_cum(std::size_t t) const {
        return std::stoull(csv.rows[t - 1][execs_cum_col]);
    }
};

// Recomputes every logged reward from the logged per-round averages.
inline std::size_t audit_rewards(const RoundsView& v, double lambda) {
    for (std::size_t t = 1; t <= v.rounds(); ++t) {
        const CombinationId combo{v.mask(t)};
        double sum = 0.0;
        const double r0 = neutral_ratio(v.avg(t, 0), v.cum(t, 0));
        for (std::size_t i : combo.members())
            sum += static_cast<double>(t) * (neutral_ratio(v.avg(t, i), v.cum(t, i)) - lambda * r0);
        const double want = sum / static_cast<double>(combo.size()) +
                            static_cast<double>(t) * static_cast<double>(combo.size());
        if (!close(want, v.reward(t)))
            throw std::runtime_error("reward mismatch at round " + std::to_string(t) + ": logged " +
                                     fmt_double(v.reward(t)) + " recomputed " + fmt_double(want));
    }
    return v.rounds();
}

// Replays the bandit from the logged rewards and checks each round's winner.
inline std::size_t audit_selections(const RoundsView& v, std::size_t n_objectives, double gamma) {
    std::vector<std::vector<double>> histories(
        enumerate_combinations(n_objectives).size());
    for (std::size_t t = 1; t <= v.rounds(); ++t) {
        const std::size_t want = oracle::ucb_select_replay(histories, gamma);
        const std::size_t got = v.mask(t) - 1;
        if (want != got)
            throw std::runtime_error("selection mismatch at round " + std::to_string(t) +
                                     ": logged mask " + std::to_string(got + 1) +
                                     " replay mask " + std::to_string(want + 1));
        histories[got].push_back(v.reward(t));
    }
    return v.rounds();
}

// Recomputes each energy assignment from the preceding round boundary.
inline std::size_t audit_energy(const RoundsView& v, const report::Csv& energy, double cap) {
    const std::size_t round_col = energy.column("round");
    const std::size_t state_col = energy.column("state");
    const std::size_t basis_col = energy.column("basis");
    const std::size_t ratio_col = energy.column("ratio");
    const std::size_t hits_col = energy.column("max_hits");
    const std::size_t trials_col = energy.column("trials");
    for (const auto& row : energy.rows) {
        const std::size_t t = std::stoull(row[round_col]);
        const CombinationId combo{v.mask(t)};
        double ebar = 0.0;
        for (std::size_t i : combo.members()) {
            const double vbar = t >= 2 ? v.cum(t - 1, i) : 0.0;
            ebar += vbar == 0.0 ? cap : static_cast<double>(v.execs_cum(t - 1)) / vbar;
        }
        ebar /= static_cast<double>(combo.size());
        double want = ebar;
        if (row[state_col] == "exploitation")
            want = ebar * (std::stod(row[ratio_col]) + std::stod(row[hits_col]));
        if (!close(want, std::stod(row[basis_col])))
            throw std::runtime_error("energy basis mismatch at round " + std::to_string(t) +
                                     ": logged " + row[basis_col] + " recomputed " +
                                     fmt_double(want));
        const auto want_trials =
            static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::min(want, cap))));
        if (want_trials != std::stoull(row[trials_col]))
            throw std::runtime_error("trial count mismatch at round " + std::to_string(t));
    }
    return energy.rows.size();
}

inline int audit_run_dir(const std::string& run_dir) {
    const nlohmann::json summary = nlohmann::json::parse(read_file(run_dir + "/summary.json"));
    const double lambda = summary.at("config").at("lambda").get<double>();
    const double gamma = summary.at("config").at("gamma").get<double>();
    const double cap = summary.at("config").at("energy_cap").get<double>();
    const RoundsView v(report::parse_csv(read_file(run_dir + "/rounds.csv")));
    const std::size_t n_objectives = v.avg_cols.size();
    const std::size_t rewards = audit_rewards(v, lambda);
    const std::size_t selections = audit_selections(v, n_objectives, gamma);
    const std::size_t energy =
        audit_energy(v, report::parse_csv(read_file(run_dir + "/energy.csv")), cap);
    std::cout << "rewards ok (" << rewards << " rounds); selections ok (" << selections
              << " rounds); energy ok (" << energy << " assignments)\n";
    return 0;
}

// Cross-checks the scheduler arithmetic against the replay implementations
// on generated data, so a fresh checkout can verify itself without a
// campaign directory.
inline int run_oracle_suite() {
    Rng rng(42);

    {
        RoundStats s(1);
        std::vector<double> series;
        for (std::size_t t = 0; t < 1000; ++t) {
            const double v = rng.chance(0.1) ? 0.0 : rng.real01() * 100.0;
            series.push_back(v);
            s.record_execution({v});
            s.close_round();
        }
        const std::vector<double> want = oracle::prefix_means(series);
        for (std::size_t t = 1; t <= series.size(); ++t)
            if (!close(s.cumulative_avg_at(t, 0), want[t - 1])) {
                std::cerr << "prefix-mean oracle mismatch at round " << t << "\n";
                return 1;
            }
        std::cout << "prefix-mean oracle ok (" << series.size() << " rounds)\n";
    }

    for (double gamma : {0.0, 0.01, 10.0}) {
        CombinationSelector sel(3, gamma);
        std::vector<std::vector<double>> histories(sel.arm_count());
        for (std::uint32_t t = 1; t <= 500; ++t) {
            const std::size_t want = oracle::ucb_select_replay(histories, gamma);
            const CombinationId got = sel.select();
            if (got.mask != want + 1) {
                std::cerr << "ucb oracle mismatch at round " << t << " (gamma " << gamma
                          << "): picked mask " << got.mask << ", replay wants "
                          << want + 1 << "\n";
                return 1;
            }
            const double reward = rng.real01() * 40.0 - 10.0;
            sel.record_reward(t, reward);
            histories[want].push_back(reward);
        }
    }
    std::cout << "ucb replay oracle ok (3 gammas x 500 rounds)\n";

    for (std::size_t inst = 0; inst < 200; ++inst) {
        const std::size_t n = 1 + rng.index(200);
        const std::size_t m = 1 + rng.index(4);
        std::vector<std::vector<double>> pts(n, std::vector<double>(m));
        for (auto& p : pts)
            for (double& x : p) x = static_cast<double>(rng.below(10));
        if (non_dominated_sort(pts) != oracle::brute_force_fronts(pts)) {
            std::cerr << "dominance oracle mismatch on instance " << inst << "\n";
            return 1;
        }
    }
    std::cout << "dominance oracle ok (200 instances)\n";

    {
        if (!close(oracle::hypervolume({{1.0, 1.0}}), 1.0) ||
            !close(oracle::hypervolume({{1.0, 0.5}, {0.5, 1.0}}), 0.75)) {
            std::cerr << "hypervolume oracle failed its pinned cases\n";
            return 1;
        }
        for (std::size_t inst = 0; inst < 50; ++inst) {
            const std::size_t n = 1 + rng.index(30);
            const std::size_t m = 1 + rng.index(3);
            std::vector<std::vector<double>> pts(n, std::vector<double>(m));
            for (auto& p : pts)
                for (double& x : p) x = rng.real01() * 5.0;
            std::vector<std::vector<double>> front;
            const auto fronts = non_dominated_sort(pts);
            for (std::size_t i : fronts.front()) front.push_back(pts[i]);
            // dominated points add no volume
            if (!close(oracle::hypervolume(pts), oracle::hypervolume(front))) {
                std::cerr << "hypervolume oracle mismatch on instance " << inst << "\n";
                return 1;
            }
        }
        std::cout << "hypervolume oracle ok (pinned cases + 50 instances)\n";
    }

    return 0;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"adaptive multi-objective fuzzing scheduler"};
    app.require_subcommand(1);

    std::string target = "shallow-magic";
    std::string adapter_cmd;
    std::size_t rounds = 60;
    std::uint64_t round_budget = 1000;
    double lambda = 0.10, gamma = 0.01, cap = kDefaultEnergyCap;
    std::string nic_mode = "on";
    double nic_budget = NicConfig{}.budget_fraction;
    double nic_threshold = NicConfig{}.start_threshold;
    std::uint64_t rng_seed = 1;
    std::string out_dir, resume_path, snapshot_out;

    CLI::App* fuzz = app.add_subcommand("fuzz", "run one campaign");
    fuzz->add_option("--target", target, "built-in target name or spec file");
    fuzz->add_option("--adapter", adapter_cmd, "external harness command");
    CLI::Option* rounds_opt = fuzz->add_option("--rounds", rounds, "virtual rounds to run");
    fuzz->add_option("--round-budget", round_budget, "executions per round");
    fuzz->add_option("--lambda", lambda, "speed penalty weight");
    fuzz->add_option("--gamma", gamma, "exploration weight");
    fuzz->add_option("--energy-cap", cap, "trial cap per assignment");
    fuzz->add_option("--nic", nic_mode, "in-loop optimizer on|off")
        ->check(CLI::IsMember({"on", "off"}));
    fuzz->add_option("--nic-budget", nic_budget, "optimizer share of main-loop executions");
    fuzz->add_option("--nic-threshold", nic_threshold, "relative drop that starts the optimizer");
    fuzz->add_option("--seed", rng_seed, "rng seed");
    fuzz->add_option("--out", out_dir, "telemetry directory");
    fuzz->add_option("--resume", resume_path, "snapshot file to continue from");
    fuzz->add_option("--snapshot-out", snapshot_out, "write a snapshot here at the end");

    std::vector<double> sweep_lambdas{0.1};
    std::vector<double> sweep_gammas{0.01};
    std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
    CLI::App* sweep = app.add_subcommand("sweep", "run a lambda/gamma/seed grid");
    sweep->add_option("--target", target, "built-in target name or spec file");
    sweep->add_option("--rounds", rounds, "virtual rounds per run");
    sweep->add_option("--round-budget", round_budget, "executions per round");
    sweep->add_option("--lambda", sweep_lambdas, "lambda values");
    sweep->add_option("--gamma", sweep_gammas, "gamma values");
    sweep->add_option("--seeds", sweep_seeds, "rng seeds");
    sweep->add_option("--nic", nic_mode, "in-loop optimizer on|off")
        ->check(CLI::IsMember({"on", "off"}));
    sweep->add_option("--nic-budget", nic_budget, "optimizer share of main-loop executions");
    sweep->add_option("--nic-threshold", nic_threshold, "relative drop that starts the optimizer");
    sweep->add_option("--out", out_dir, "directory for sweep.csv")->required();

    std::string run_dir, report_out;
    CLI::App* report_cmd = app.add_subcommand("report", "render charts from a run directory");
    report_cmd->add_option("--run", run_dir, "campaign telemetry directory")->required();
    report_cmd->add_option("--out", report_out, "chart output directory")->required();

    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle", "self-check the formula replays, or audit a run directory's logs");
    oracle_cmd->add_option("--run", run_dir, "campaign telemetry directory");

    std::string dump_name;
    CLI::App* targets_cmd = app.add_subcommand("targets", "list built-in targets");
    targets_cmd->add_option("--dump", dump_name, "print one target spec as json");

    try {
        std::vector<const char*> argv;
        argv.push_back("mobsched");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(fuzz)) {
            std::optional<Campaign> c;
            if (!resume_path.empty()) {
                c.emplace(Campaign::resume_from_file(resume_path, out_dir, adapter_cmd));
            } else {
                CampaignConfig cfg;
                cfg.total_rounds = rounds;
                cfg.round_budget = round_budget;
                cfg.lambda = lambda;
                cfg.gamma = gamma;
                cfg.energy_cap = cap;
                cfg.rng_seed = rng_seed;
                cfg.nic.enabled = nic_mode == "on";
                cfg.nic.budget_fraction = nic_budget;
                cfg.nic.start_threshold = nic_threshold;
                cfg.out_dir = out_dir;
                if (!adapter_cmd.empty())
                    c.emplace(std::make_shared<AdapterProcess>(adapter_cmd), cfg);
                else
                    c.emplace(resolve_target(target), cfg);
            }
            std::size_t total = c->config().total_rounds;
            if (!resume_path.empty() && rounds_opt->count() > 0) total = rounds;
            while (c->rounds_run() < total) c->run_rounds(1);
            c->finalize();
            if (!snapshot_out.empty()) c->snapshot_to_file(snapshot_out);
            std::cout << "rounds=" << c->rounds_run() << " execs=" << c->stats().cumulative_execs()
                      << " pool=" << c->pool().size() << " edges=" << c->pool().edges_covered()
                      << "\n";
            return 0;
        }
        if (app.got_subcommand(sweep)) {
            std::filesystem::create_directories(out_dir);
            std::string csv =
                "lambda,gamma,seed,cum_speed,cum_stack,cum_cmp,speed_combo_fraction,"
                "mean_good_frac,execs_total,pool_size\n";
            for (double lam : sweep_lambdas)
                for (double gam : sweep_gammas)
                    for (std::uint64_t sd : sweep_seeds) {
                        CampaignConfig cfg;
                        cfg.total_rounds = rounds;
                        cfg.round_budget = round_budget;
                        cfg.lambda = lam;
                        cfg.gamma = gam;
                        cfg.rng_seed = sd;
                        cfg.nic.enabled = nic_mode == "on";
                        cfg.nic.budget_fraction = nic_budget;
                        cfg.nic.start_threshold = nic_threshold;
                        Campaign c(resolve_target(target), cfg);
                        c.run_rounds(rounds);
                        const nlohmann::json s = c.summary();
                        csv += join_csv(
                            {fmt_double(lam), fmt_double(gam), fmt_u64(sd),
                             fmt_double(s.at("cumulative_avg").at("speed").get<double>()),
                             fmt_double(s.at("cumulative_avg").at("stack").get<double>()),
                             fmt_double(s.at("cumulative_avg").at("cmp").get<double>()),
                             fmt_double(s.at("speed_combo_fraction").get<double>()),
                             fmt_double(s.at("mean_good_seed_fraction").get<double>()),
                             fmt_u64(s.at("execs_total").get<std::uint64_t>()),
                             fmt_u64(s.at("pool").at("size").get<std::uint64_t>())});
                    }
            write_file(out_dir + "/sweep.csv", csv);
            std::cout << "wrote " << out_dir << "/sweep.csv ("
                      << sweep_lambdas.size() * sweep_gammas.size() * sweep_seeds.size()
                      << " runs)\n";
            return 0;
        }
        if (app.got_subcommand(report_cmd)) {
            report::write_report(run_dir, report_out);
            std::cout << "wrote charts to " << report_out << "\n";
            return 0;
        }
        if (app.got_subcommand(oracle_cmd))
            return run_dir.empty() ? cli_detail::run_oracle_suite()
                                   : cli_detail::audit_run_dir(run_dir);
        if (app.got_subcommand(targets_cmd)) {
            if (!dump_name.empty()) {
                std::cout << target_to_json(builtin_target(dump_name)).dump(2) << "\n";
            } else {
                for (const std::string& name : builtin_target_names()) std::cout << name << "\n";
            }
            return 0;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mobsched
