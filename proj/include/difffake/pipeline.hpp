#pragma once

#include "difffake/diffcomb.hpp"
#include "difffake/eval.hpp"
#include "difffake/features.hpp"
#include "difffake/gmm.hpp"
#include "difffake/manifest_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace difffake {

inline constexpr std::uint32_t kDefaultMinGap = 5;
inline constexpr std::size_t kDefaultTrainingPairs = 60;
inline constexpr std::size_t kInferencePairs = 30;

/// Two frames of one video, frame_i < frame_j.
struct PairSample {
    std::string video_id;
    std::uint32_t frame_i = 0;
    std::uint32_t frame_j = 0;

    std::uint32_t gap() const { return frame_j - frame_i; }
    friend bool operator==(const PairSample&, const PairSample&) = default;
};

/// Every (i, j) with j - i >= min_gap, in lexicographic order.
std::vector<PairSample> eligible_pairs(const VideoRecord& record, std::uint32_t min_gap);

/// Up to k distinct eligible pairs drawn uniformly without replacement,
/// returned in lexicographic order. Fake-labeled records are rejected.
std::vector<PairSample> sample_training_pairs(const VideoRecord& record, std::size_t k_pairs,
                                              std::uint32_t min_gap, std::uint64_t seed);

/// Exactly `count` pairs: drawn without replacement when at least `count`
/// eligible pairs exist, with replacement otherwise.
std::vector<PairSample> sample_inference_pairs(const VideoRecord& record, std::uint64_t seed,
                                               std::uint32_t min_gap = kDefaultMinGap,
                                               std::size_t count = kInferencePairs);

/// Seed for one video's sampling, derived from the run seed and the video id
/// so results do not depend on manifest order.
std::uint64_t video_seed(std::uint64_t run_seed, std::string_view video_id);

CombinedFeature combine_pair(const EmbeddingStore& store, const PairSample& pair, CombinationMode mode,
                             Label source_label);

struct VideoScore {
    std::string video_id;
    std::optional<Label> label;
    double score = 0.0;
    std::size_t n_pairs = 0;
};

/// Mean pair anomaly score over the video's inference pairs.
VideoScore score_video(const VideoRecord& record, const EmbeddingStore& store, const AnomalyModel& model,
                       CombinationMode mode, std::uint64_t seed, std::uint32_t min_gap = kDefaultMinGap);

struct TrainConfig {
    CombinationMode mode = CombinationMode::Sub2;
    std::size_t pairs_per_video = kDefaultTrainingPairs;
    std::uint32_t min_gap = kDefaultMinGap;
    std::uint64_t seed = 0;
    FitOptions fit;
};

struct TrainReport {
    std::size_t n_videos = 0;
    std::size_t n_fake_skipped = 0;
    std::size_t n_pairs = 0;
    std::uint32_t dim = 0;
    std::uint32_t components = 0;
    std::string mode;
    std::uint64_t seed = 0;
    std::uint32_t iterations = 0;
    bool converged = false;
    double final_log_likelihood = 0.0;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

struct TrainResult {
    GmmModel model;
    TrainReport report;
};

/// Builds training pairs from the train-split real records (fake records in
/// the split are skipped and counted), combines them and fits the mixture.
/// cfg.fit.seed is overridden by cfg.seed.
TrainResult train_adm(std::span<const VideoRecord> records, const EmbeddingStore& store, const TrainConfig& cfg);

/// Scores every record of the given split, in manifest order.
std::vector<VideoScore> score_videos(std::span<const VideoRecord> records, const EmbeddingStore& store,
                                     const AnomalyModel& model, CombinationMode mode, std::uint64_t seed,
                                     std::uint32_t min_gap = kDefaultMinGap);

/// Tab-separated: header "video_id\tlabel\tscore\tn_pairs", scores printed
/// with round-trip precision.
void write_score_table(std::span<const VideoScore> scores, std::ostream& out);
void write_score_table(std::span<const VideoScore> scores, const std::filesystem::path& path);
std::vector<VideoScore> read_score_table(const std::filesystem::path& path);

/// Score rows as evaluation samples. Rows without a label are rejected.
std::vector<ScoredSample> to_samples(std::span<const VideoScore> scores);

std::vector<VideoRecord> select_split(std::span<const VideoRecord> records, Split split);

/// Either a precomputed embedding file or an extractor run over the manifest.
struct EmbeddingSource {
    std::optional<std::filesystem::path> embeddings;
    ExtractorSpec extractor;
};

EmbeddingStore obtain_embeddings(std::span<const VideoRecord> records, const EmbeddingSource& source);

/// File-level training: manifest -> embeddings -> model file (+ optional
/// JSON report).
TrainReport run_train(const std::filesystem::path& manifest, const EmbeddingSource& source,
                      const TrainConfig& cfg, const std::filesystem::path& model_out,
                      const std::optional<std::filesystem::path>& report_out = std::nullopt);

struct InferConfig {
    CombinationMode mode = CombinationMode::Sub2;
    std::uint32_t min_gap = kDefaultMinGap;
    std::uint64_t seed = 0;
    Split split = Split::Test;
};

/// File-level inference: one row per record of the split, written to
/// `table_out`.
std::vector<VideoScore> run_infer(const std::filesystem::path& manifest, const EmbeddingSource& source,
                                  const std::filesystem::path& model_path, const InferConfig& cfg,
                                  const std::filesystem::path& table_out);

/// One dataset of the combination ablation.
struct AblationDataset {
    std::string name;
    std::vector<VideoRecord> records;
    const EmbeddingStore* store = nullptr;
};

/// Trains and evaluates every combination mode on every dataset (train split
/// for fitting, test split for scoring). One report per (mode, dataset).
std::vector<EvalReport> run_ablation(std::span<const AblationDataset> datasets, const TrainConfig& base,
                                     std::span<const CombinationMode> modes = kAllModes);

} // namespace difffake
