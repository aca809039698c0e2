#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "util.hpp"

namespace mobsched::report {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("missing column: " + name);
    }
};

inline Csv parse_csv(const std::string& text) {
    Csv out;
    bool first = true;
    for (const std::string& line : split(text, '\n')) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line, ',');
        if (first) {
            out.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != out.header.size())
                throw std::invalid_argument("ragged csv row: " + line);
            out.rows.push_back(std::move(cells));
        }
    }
    if (first) throw std::invalid_argument("empty csv");
    return out;
}

namespace detail {

inline const char* band_color(std::uint32_t mask) {
    static const char* palette[] = {"#cfe8ff", "#ffe4c9", "#d8f5d0", "#f6d6f0",
                                    "#fff3b0", "#d9d2f0", "#c9f0ee", "#f0d2d2"};
    return palette[mask % 8];
}

inline const char* line_color(std::size_t series) {
    static const char* palette[] = {"#1b6ca8", "#c2571a", "#2f8f41", "#8d3fb0",
                                    "#a89a1b", "#5146c9"};
    return palette[series % 6];
}

inline std::string svg_open(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
           std::to_string(h) + "\">\n";
}

inline std::string rect(double x, double y, double w, double h, const std::string& fill,
                        const std::string& extra = "") {
    return "<rect x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) + "\" width=\"" +
           fmt_double(w) + "\" height=\"" + fmt_double(h) + "\" fill=\"" + fill + "\"" +
           (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string text_at(double x, double y, const std::string& s, int size = 12) {
    return "<text x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) +
           "\" font-family=\"monospace\" font-size=\"" + std::to_string(size) + "\">" + s +
           "</text>\n";
}

}  // namespace detail

// Per-round averages of every objective, normalized by the series maximum,
// over a background band per round colored by the active combination mask.
inline std::string objectives_svg(const Csv& rounds) {
    const int w = 960, h = 380;
    const double left = 50, right = 20, top = 40, bottom = 30;
    const double plot_w = w - left - right, plot_h = h - top - bottom;
    const std::size_t n = rounds.rows.size();

    std::vector<std::string> names;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < rounds.header.size(); ++i)
        if (rounds.header[i].rfind("avg_", 0) == 0) {
            names.push_back(rounds.header[i].substr(4));
            cols.push_back(i);
        }
    const std::size_t mask_col = rounds.column("mask");

    std::string svg = detail::svg_open(w, h);
    svg += detail::rect(0, 0, w, h, "#ffffff");
    svg += detail::text_at(left, 20, "per-round objective averages (each series scaled to its max)");
    if (n == 0) return svg + "</svg>\n";

    const double band_w = plot_w / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto mask = static_cast<std::uint32_t>(std::stoul(rounds.rows[r][mask_col]));
        svg += detail::rect(left + band_w * static_cast<double>(r), top, band_w, plot_h,
                            detail::band_color(mask), "class=\"band\" fill-opacity=\"0.5\"");
    }

    for (std::size_t s = 0; s < cols.size(); ++s) {
        double hi = 0.0;
        std::vector<double> vals(n);
        for (std::size_t r = 0; r < n; ++r) {
            vals[r] = std::stod(rounds.rows[r][cols[s]]);
            hi = std::max(hi, vals[r]);
        }
        if (hi <= 0.0) hi = 1.0;
        std::string pts;
        for (std::size_t r = 0; r < n; ++r) {
            const double x = left + band_w * (static_cast<double>(r) + 0.5);
            const double y = top + plot_h * (1.0 - vals[r] / hi);
            pts += fmt_double(x) + "," + fmt_double(y) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(detail::line_color(s)) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        svg += detail::text_at(left + 110.0 * static_cast<double>(s), h - 8.0,
                               names[s] + " (max " + fmt_double(hi) + ")", 11);
        svg += detail::rect(left + 110.0 * static_cast<double>(s) - 14, h - 16, 10, 10,
                            detail::line_color(s));
    }
    svg += detail::rect(left, top, plot_w, plot_h, "none", "stroke=\"#333333\"");
    return svg + "</svg>\n";
}

// How often each combination mask won a round.
inline std::string selection_share_svg(const Csv& rounds) {
    const int w = 960, h = 260;
    const double left = 50, top = 40, bottom = 40, plot_h = h - top - bottom;
    const std::size_t mask_col = rounds.column("mask");
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& row : rounds.rows)
        counts[static_cast<std::uint32_t>(std::stoul(row[mask_col]))] += 1;

    std::string svg = detail::svg_open(w, h);
    svg += detail::rect(0, 0, w, h, "#ffffff");
    svg += detail::text_at(left, 20, "rounds per objective combination");
    std::size_t peak = 1;
    for (const auto& [mask, c] : counts) peak = std::max(peak, c);
    double x = left;
    const double bar_w = 60, gap = 24;
    for (const auto& [mask, c] : counts) {
        const double bh = plot_h * static_cast<double>(c) / static_cast<double>(peak);
        svg += detail::rect(x, top + plot_h - bh, bar_w, bh, detail::band_color(mask),
                            "class=\"bar\" stroke=\"#333333\"");
        svg += detail::text_at(x, h - 22, "m" + std::to_string(mask), 12);
        svg += detail::text_at(x, h - 8, std::to_string(c), 12);
        x += bar_w + gap;
    }
    return svg + "</svg>\n";
}

// Rounds that started in exploration versus exploitation.
inline std::string state_share_svg(const Csv& rounds) {
    const int w = 480, h = 220;
    const double left = 50, top = 40, bottom = 40, plot_h = h - top - bottom;
    const std::size_t state_col = rounds.column("state");
    std::map<std::string, std::size_t> counts;
    for (const auto& row : rounds.rows) counts[row[state_col]] += 1;

    std::string svg = detail::svg_open(w, h);
    svg += detail::rect(0, 0, w, h, "#ffffff");
    svg += detail::text_at(left, 20, "round-opening fuzz state");
    std::size_t peak = 1;
    for (const auto& [name, c] : counts) peak = std::max(peak, c);
    double x = left;
    for (const auto& [name, c] : counts) {
        const double bh = plot_h * static_cast<double>(c) / static_cast<double>(peak);
        svg += detail::rect(x, top + plot_h - bh, 90, bh, name == "exploration" ? "#cfe8ff" : "#ffe4c9",
                            "class=\"bar\" stroke=\"#333333\"");
        svg += detail::text_at(x, h - 22, name, 12);
        svg += detail::text_at(x, h - 8, std::to_string(c), 12);
        x += 130;
    }
    return svg + "</svg>\n";
}

inline std::string text_report(const Csv& rounds, const nlohmann::json& summary) {
    std::string out;
    out += "campaign report\n";
    out += "===============\n";
    out += "rounds:           " + std::to_string(rounds.rows.size()) + "\n";
    out += "execs total:      " + fmt_u64(summary.at("execs_total").get<std::uint64_t>()) + "\n";
    out += "execs main loop:  " + fmt_u64(summary.at("execs_main").get<std::uint64_t>()) + "\n";
    out += "execs optimizer:  " + fmt_u64(summary.at("execs_nic").get<std::uint64_t>()) + "\n";
    out += "optimizer runs:   " + fmt_u64(summary.at("nic_invocations").get<std::uint64_t>()) + "\n";
    out += "optimizer seeds:  " + fmt_u64(summary.at("nic_admitted").get<std::uint64_t>()) + "\n";
    out += "pool size:        " + fmt_u64(summary.at("pool").at("size").get<std::uint64_t>()) + "\n";
    out += "favored seeds:    " + fmt_u64(summary.at("pool").at("favored").get<std::uint64_t>()) + "\n";
    out += "edges covered:    " + fmt_u64(summary.at("pool").at("edges_covered").get<std::uint64_t>()) + "\n";
    out += "mean good frac:   " +
           fmt_double(summary.at("mean_good_seed_fraction").get<double>()) + "\n";
    out += "\ncumulative objective averages\n";
    for (const auto& [name, v] : summary.at("cumulative_avg").items())
        out += "  " + name + ": " + fmt_double(v.get<double>()) + "\n";
    out += "\npeak observations\n";
    for (const auto& [name, v] : summary.at("max_values").items())
        out += "  " + name + ": " + fmt_double(v.get<double>()) + "\n";
    out += "\nrounds won per combination mask\n";
    for (const auto& [mask, c] : summary.at("selections").items())
        out += "  m" + mask + ": " + fmt_u64(c.get<std::uint64_t>()) + "\n";
    return out;
}

// Reads rounds.csv and summary.json from run_dir and renders charts plus a
// text digest into out_dir.
inline void write_report(const std::string& run_dir, const std::string& out_dir) {
    const Csv rounds = parse_csv(read_file(run_dir + "/rounds.csv"));
    const nlohmann::json summary = nlohmann::json::parse(read_file(run_dir + "/summary.json"));
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/objectives.svg", objectives_svg(rounds));
    write_file(out_dir + "/selections.svg", selection_share_svg(rounds));
    write_file(out_dir + "/states.svg", state_share_svg(rounds));
    write_file(out_dir + "/report.txt", text_report(rounds, summary));
}

}  // namespace mobsched::report
