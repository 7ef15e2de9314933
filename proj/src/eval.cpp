#include "difffake/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace difffake {

namespace {

void check_samples(std::span<const ScoredSample> samples, std::size_t& n_pos, std::size_t& n_neg) {
    n_pos = 0;
    n_neg = 0;
    for (const ScoredSample& s : samples) {
        if (!std::isfinite(s.score)) {
            throw std::invalid_argument("scores must be finite");
        }
        if (s.label == 1) {
            ++n_pos;
        } else if (s.label == 0) {
            ++n_neg;
        } else {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("AUC needs at least one positive and one negative sample");
    }
}

struct Table {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
};

Table tabulate(std::span<const EvalReport> reports) {
    Table t;
    for (const EvalReport& r : reports) {
        const std::string row = r.config.label();
        auto ri = std::find(t.rows.begin(), t.rows.end(), row);
        if (ri == t.rows.end()) ri = t.rows.insert(t.rows.end(), row);
        auto ci = std::find(t.columns.begin(), t.columns.end(), r.dataset);
        if (ci == t.columns.end()) ci = t.columns.insert(t.columns.end(), r.dataset);
        t.cells[{static_cast<std::size_t>(ri - t.rows.begin()), static_cast<std::size_t>(ci - t.columns.begin())}] =
            r.auc;
    }
    return t;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return buf;
}

} // namespace

double auc(std::span<const ScoredSample> samples) {
    std::size_t n_pos, n_neg;
    check_samples(samples, n_pos, n_neg);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a].score < samples[b].score; });

    // Sum of midranks (1-based) of the positives.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::size_t positives = 0;
        while (j < order.size() && samples[order[j]].score == samples[order[i]].score) {
            positives += samples[order[j]].label == 1;
            ++j;
        }
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        rank_sum += midrank * static_cast<double>(positives);
        i = j;
    }
    const double p = static_cast<double>(n_pos);
    const double u = rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(n_neg));
}

double auc_pair_count(std::span<const ScoredSample> samples) {
    std::size_t n_pos, n_neg;
    check_samples(samples, n_pos, n_neg);
    // Doubled counts keep the tally integral.
    std::uint64_t twice_wins = 0;
    for (const ScoredSample& pos : samples) {
        if (pos.label != 1) continue;
        for (const ScoredSample& neg : samples) {
            if (neg.label != 0) continue;
            twice_wins += pos.score > neg.score ? 2 : (pos.score == neg.score ? 1 : 0);
        }
    }
    return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::string ConfigEcho::label() const {
    if (components == 0) {
        return mode;
    }
    return mode + " (k=" + std::to_string(components) + ", seed=" + std::to_string(seed) + ")";
}

EvalReport evaluate(std::string dataset, std::span<const ScoredSample> samples, ConfigEcho config) {
    EvalReport r;
    r.dataset = std::move(dataset);
    r.auc = auc(samples);
    for (const ScoredSample& s : samples) {
        (s.label == 1 ? r.n_pos : r.n_neg)++;
    }
    r.config = std::move(config);
    return r;
}

EvalReport validate_backbone_protocol(std::span<const double> real_scores, std::span<const double> pseudo_scores,
                                      std::string dataset) {
    if (real_scores.empty() || pseudo_scores.empty()) {
        throw std::invalid_argument("validation needs both real and pseudo-deepfake scores");
    }
    std::vector<ScoredSample> samples;
    samples.reserve(real_scores.size() + pseudo_scores.size());
    for (double s : real_scores) samples.push_back({"", s, 0});
    for (double s : pseudo_scores) samples.push_back({"", s, 1});
    return evaluate(std::move(dataset), samples, ConfigEcho{"validation", 0, 0});
}

std::vector<double> row_averages(std::span<const EvalReport> reports) {
    const Table t = tabulate(reports);
    std::vector<double> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (auto it = t.cells.find({r, c}); it != t.cells.end()) {
                sum += it->second;
                ++count;
            }
        }
        out.push_back(sum / static_cast<double>(count));
    }
    return out;
}

std::string render_report(std::span<const EvalReport> reports) {
    if (reports.empty()) {
        throw std::invalid_argument("nothing to render");
    }
    const Table t = tabulate(reports);
    const std::vector<double> averages = row_averages(reports);

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Config"};
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    header.push_back("Avg.");
    grid.push_back(std::move(header));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<std::string> line{t.rows[r]};
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            auto it = t.cells.find({r, c});
            line.push_back(it == t.cells.end() ? "-" : percent(it->second));
        }
        line.push_back(percent(averages[r]));
        grid.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(grid.front().size(), 0);
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            widths[c] = std::max(widths[c], line[c].size());
        }
    }
    std::ostringstream out;
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c == 0) {
                out << line[c] << std::string(widths[c] - line[c].size(), ' ');
            } else {
                out << "  " << std::string(widths[c] - line[c].size(), ' ') << line[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace difffake
