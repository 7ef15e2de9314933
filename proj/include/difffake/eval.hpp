#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace difffake {

/// label: 0 = real (negative), 1 = fake (positive).
struct ScoredSample {
    std::string id;
    double score = 0.0;
    int label = 0;
};

/// Area under the ROC curve in its Mann-Whitney form: the fraction of
/// positive-negative pairs where the positive scores higher, ties counting
/// one half. Computed from midranks in O(n log n). Throws std::invalid_argument
/// when either class is empty or a score is non-finite.
double auc(std::span<const ScoredSample> samples);

/// The same quantity by explicit pair counting, O(n_pos * n_neg).
double auc_pair_count(std::span<const ScoredSample> samples);

/// Run configuration echoed into a report row.
struct ConfigEcho {
    std::string mode;
    std::uint32_t components = 0;
    std::uint64_t seed = 0;

    /// "SUB2 (k=3, seed=0)"; just the mode when components is 0.
    std::string label() const;
};

struct EvalReport {
    std::string dataset;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    double auc = 0.5;
    ConfigEcho config;
};

EvalReport evaluate(std::string dataset, std::span<const ScoredSample> samples, ConfigEcho config = {});

/// Backbone validation: real images are negatives, pseudo-deepfakes
/// positives; higher score = more likely fake.
EvalReport validate_backbone_protocol(std::span<const double> real_scores, std::span<const double> pseudo_scores,
                                      std::string dataset = "validation");

/// Aligned text table of AUC percentages (one decimal): one row per distinct
/// configuration, one column per dataset in first-seen order, and a final
/// "Avg." column holding the mean of the row's entries. Missing cells print
/// as "-". Throws std::invalid_argument on an empty list.
std::string render_report(std::span<const EvalReport> reports);

/// Row averages used by render_report, in row order (for callers that need
/// the numbers).
std::vector<double> row_averages(std::span<const EvalReport> reports);

} // namespace difffake
