#include "difffake/pipeline.hpp"

#include "difffake/error.hpp"
#include "difffake/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace difffake {

namespace fs = std::filesystem;

namespace {

// Moves k uniformly chosen elements to the front (partial Fisher-Yates).
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(items.size() - i));
        std::swap(items[i], items[j]);
    }
}

} // namespace

std::vector<PairSample> eligible_pairs(const VideoRecord& record, std::uint32_t min_gap) {
    const auto n = static_cast<std::uint32_t>(record.frame_paths.size());
    const std::uint32_t gap = std::max<std::uint32_t>(min_gap, 1);
    std::vector<PairSample> out;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + gap; j < n; ++j) {
            out.push_back({record.video_id, i, j});
        }
    }
    return out;
}

std::vector<PairSample> sample_training_pairs(const VideoRecord& record, std::size_t k_pairs,
                                              std::uint32_t min_gap, std::uint64_t seed) {
    if (record.label != Label::Real) {
        throw DataError("video '" + record.video_id + "' is labeled fake; anomaly-model training uses real videos only");
    }
    std::vector<PairSample> pairs = eligible_pairs(record, min_gap);
    if (pairs.empty()) {
        throw DataError("video '" + record.video_id + "' has no frame pair with gap >= " + std::to_string(min_gap));
    }
    if (pairs.size() > k_pairs) {
        Rng rng(seed);
        partial_shuffle(pairs, k_pairs, rng);
        pairs.resize(k_pairs);
        std::sort(pairs.begin(), pairs.end(), [](const PairSample& a, const PairSample& b) {
            return std::tie(a.frame_i, a.frame_j) < std::tie(b.frame_i, b.frame_j);
        });
    }
    return pairs;
}

std::vector<PairSample> sample_inference_pairs(const VideoRecord& record, std::uint64_t seed,
                                               std::uint32_t min_gap, std::size_t count) {
    std::vector<PairSample> pairs = eligible_pairs(record, min_gap);
    if (pairs.empty()) {
        throw DataError("video '" + record.video_id + "' has no frame pair with gap >= " + std::to_string(min_gap));
    }
    Rng rng(seed);
    if (pairs.size() >= count) {
        partial_shuffle(pairs, count, rng);
        pairs.resize(count);
        return pairs;
    }
    std::vector<PairSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(pairs[static_cast<std::size_t>(rng.below(pairs.size()))]);
    }
    return out;
}

std::uint64_t video_seed(std::uint64_t run_seed, std::string_view video_id) {
    return mix_seed(run_seed, video_id);
}

CombinedFeature combine_pair(const EmbeddingStore& store, const PairSample& pair, CombinationMode mode,
                             Label source_label) {
    const auto& a = store.at(pair.video_id, pair.frame_i);
    const auto& b = store.at(pair.video_id, pair.frame_j);
    return combine(a, b, mode, PairProvenance{pair.video_id, pair.frame_i, pair.frame_j, source_label});
}

VideoScore score_video(const VideoRecord& record, const EmbeddingStore& store, const AnomalyModel& model,
                       CombinationMode mode, std::uint64_t seed, std::uint32_t min_gap) {
    const auto pairs = sample_inference_pairs(record, seed, min_gap);
    // Running mean: exact when every pair scores the same.
    double mean = 0.0;
    std::size_t n = 0;
    for (const PairSample& p : pairs) {
        const double s = model.score(combine_pair(store, p, mode, record.label).values);
        mean += (s - mean) / static_cast<double>(++n);
    }
    return {record.video_id, record.label, mean, pairs.size()};
}

std::string TrainReport::to_json() const {
    nlohmann::json j;
    j["n_videos"] = n_videos;
    j["n_fake_skipped"] = n_fake_skipped;
    j["n_pairs"] = n_pairs;
    j["dim"] = dim;
    j["components"] = components;
    j["mode"] = mode;
    j["seed"] = seed;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["final_log_likelihood"] = final_log_likelihood;
    j["warnings"] = warnings;
    return j.dump(2);
}

TrainResult train_adm(std::span<const VideoRecord> records, const EmbeddingStore& store, const TrainConfig& cfg) {
    TrainReport report;
    std::vector<CombinedFeature> features;
    for (const VideoRecord& r : records) {
        if (r.split != Split::Train) continue;
        if (r.label != Label::Real) {
            ++report.n_fake_skipped;
            continue;
        }
        ++report.n_videos;
        for (const PairSample& p :
             sample_training_pairs(r, cfg.pairs_per_video, cfg.min_gap, video_seed(cfg.seed, r.video_id))) {
            features.push_back(combine_pair(store, p, cfg.mode, r.label));
        }
    }
    if (report.n_videos == 0) {
        throw DataError("no real training videos in the manifest");
    }
    FitOptions options = cfg.fit;
    options.seed = cfg.seed;
    GmmModel model = fit_gmm(features, options);

    report.n_pairs = features.size();
    report.dim = model.dim();
    report.components = model.n_components();
    report.mode = std::string(to_string(cfg.mode));
    report.seed = cfg.seed;
    report.iterations = model.fit_info().iterations;
    report.converged = model.fit_info().converged;
    report.final_log_likelihood = model.fit_info().final_log_likelihood;
    report.warnings = model.fit_info().warnings;
    return {std::move(model), std::move(report)};
}

std::vector<VideoScore> score_videos(std::span<const VideoRecord> records, const EmbeddingStore& store,
                                     const AnomalyModel& model, CombinationMode mode, std::uint64_t seed,
                                     std::uint32_t min_gap) {
    std::vector<VideoScore> out;
    out.reserve(records.size());
    for (const VideoRecord& r : records) {
        out.push_back(score_video(r, store, model, mode, video_seed(seed, r.video_id), min_gap));
    }
    return out;
}

void write_score_table(std::span<const VideoScore> scores, std::ostream& out) {
    out << "video_id\tlabel\tscore\tn_pairs\n";
    char buf[64];
    for (const VideoScore& s : scores) {
        auto res = std::to_chars(buf, buf + sizeof buf, s.score);
        out << s.video_id << '\t' << (s.label ? to_string(*s.label) : std::string_view("-")) << '\t'
            << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\t' << s.n_pairs << '\n';
    }
}

void write_score_table(std::span<const VideoScore> scores, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_score_table(scores, out);
}

std::vector<VideoScore> read_score_table(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line.rfind("video_id\tlabel\tscore\tn_pairs", 0) != 0) {
        throw ParseError("score table must start with the header video_id, label, score, n_pairs", 1);
    }
    std::vector<VideoScore> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 4) {
            throw ParseError("expected 4 tab-separated columns", line_no);
        }
        VideoScore s;
        s.video_id = fields[0];
        if (fields[1] != "-") {
            try {
                s.label = parse_label(fields[1]);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_no);
            }
        }
        auto r1 = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), s.score);
        auto r2 = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), s.n_pairs);
        if (r1.ec != std::errc() || r1.ptr != fields[2].data() + fields[2].size() || r2.ec != std::errc() ||
            r2.ptr != fields[3].data() + fields[3].size()) {
            throw ParseError("malformed score or pair count", line_no);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScoredSample> to_samples(std::span<const VideoScore> scores) {
    std::vector<ScoredSample> out;
    out.reserve(scores.size());
    for (const VideoScore& s : scores) {
        if (!s.label) {
            throw DataError("score row '" + s.video_id + "' has no label");
        }
        out.push_back({s.video_id, s.score, *s.label == Label::Fake ? 1 : 0});
    }
    return out;
}

std::vector<VideoRecord> select_split(std::span<const VideoRecord> records, Split split) {
    std::vector<VideoRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [split](const VideoRecord& r) { return r.split == split; });
    return out;
}

EmbeddingStore obtain_embeddings(std::span<const VideoRecord> records, const EmbeddingSource& source) {
    if (source.embeddings) {
        EmbeddingStore store = read_embeddings(*source.embeddings);
        for (const VideoRecord& r : records) {
            for (std::size_t f = 0; f < r.frame_paths.size(); ++f) {
                if (!store.find(r.video_id, static_cast<std::uint32_t>(f))) {
                    throw DataError("embedding file lacks video '" + r.video_id + "' frame " + std::to_string(f));
                }
            }
        }
        return store;
    }
    return extract_all(records, source.extractor);
}

TrainReport run_train(const fs::path& manifest, const EmbeddingSource& source, const TrainConfig& cfg,
                      const fs::path& model_out, const std::optional<fs::path>& report_out) {
    const auto records = load_manifest(manifest);
    std::vector<VideoRecord> training;
    for (const VideoRecord& r : records) {
        if (r.split == Split::Train && r.label == Label::Real) training.push_back(r);
    }
    const EmbeddingStore store = obtain_embeddings(training, source);
    TrainResult result = train_adm(records, store, cfg);
    save_model(result.model, model_out);
    if (report_out) {
        std::ofstream out(*report_out, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + report_out->string());
        }
        out << result.report.to_json() << '\n';
    }
    return result.report;
}

std::vector<VideoScore> run_infer(const fs::path& manifest, const EmbeddingSource& source,
                                  const fs::path& model_path, const InferConfig& cfg, const fs::path& table_out) {
    const auto records = select_split(load_manifest(manifest), cfg.split);
    std::vector<VideoScore> scores;
    if (!records.empty()) {
        const EmbeddingStore store = obtain_embeddings(records, source);
        const GmmModel model = load_model(model_path, store.dim());
        scores = score_videos(records, store, model, cfg.mode, cfg.seed, cfg.min_gap);
    }
    write_score_table(scores, table_out);
    return scores;
}

std::vector<EvalReport> run_ablation(std::span<const AblationDataset> datasets, const TrainConfig& base,
                                     std::span<const CombinationMode> modes) {
    std::vector<EvalReport> reports;
    for (CombinationMode mode : modes) {
        TrainConfig cfg = base;
        cfg.mode = mode;
        for (const AblationDataset& ds : datasets) {
            if (!ds.store) {
                throw std::invalid_argument("ablation dataset '" + ds.name + "' has no embedding store");
            }
            const TrainResult trained = train_adm(ds.records, *ds.store, cfg);
            const auto test = select_split(ds.records, Split::Test);
            const auto scores = score_videos(test, *ds.store, trained.model, mode, cfg.seed, cfg.min_gap);
            const auto samples = to_samples(scores);
            reports.push_back(evaluate(ds.name, samples,
                                       ConfigEcho{std::string(display_name(mode)), cfg.fit.n_components, cfg.seed}));
        }
    }
    return reports;
}

} // namespace difffake
