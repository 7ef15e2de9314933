// difffake: command-line front end for the differential deepfake detection
// toolkit.
//
//   difffake synth    --manifest m.jsonl --out dir [--scheme all] [--count 4]
//   difffake extract  --manifest m.jsonl --out emb.bin [--extractor toy|external]
//   difffake fit-adm  --manifest m.jsonl --embeddings emb.bin --out model.bin
//   difffake score    --manifest m.jsonl --embeddings emb.bin --model model.bin --out scores.tsv
//   difffake eval     scores.tsv [NAME=other.tsv ...] [--oracle-check]

#include "difffake/diffcomb.hpp"
#include "difffake/error.hpp"
#include "difffake/eval.hpp"
#include "difffake/features.hpp"
#include "difffake/gmm.hpp"
#include "difffake/image_io.hpp"
#include "difffake/manifest_io.hpp"
#include "difffake/mask_gen.hpp"
#include "difffake/pipeline.hpp"
#include "difffake/rng.hpp"
#include "difffake/synth.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;
using namespace difffake;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string manifest;
    std::string out;
};

struct EmbeddingFlags {
    std::string embeddings;
    std::string extractor = "toy";
    std::string external_file;
    std::uint32_t dim = 0;

    EmbeddingSource source() const {
        EmbeddingSource s;
        if (!embeddings.empty()) {
            s.embeddings = embeddings;
        }
        s.extractor.kind = parse_extractor_kind(extractor);
        s.extractor.external_file = external_file;
        s.extractor.dim = dim ? dim : (s.extractor.kind == ExtractorKind::Toy ? kToyDim : kBackboneDim);
        return s;
    }
};

void add_embedding_flags(CLI::App* cmd, EmbeddingFlags& flags) {
    cmd->add_option("--embeddings", flags.embeddings, "Precomputed embedding file");
    cmd->add_option("--extractor", flags.extractor, "Extractor used when no embedding file is given")
        ->check(CLI::IsMember({"toy", "external"}));
    cmd->add_option("--external-file", flags.external_file, "Embedding file from an external backbone");
    cmd->add_option("--dim", flags.dim, "Declared embedding dim (default 448 toy, 1792 external)");
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw CLI::ValidationError(flag, "is required");
    }
}

int run_synth(const GlobalOptions& g, const std::string& scheme_name, std::size_t count, bool dump_masks,
              const std::string& recipients) {
    require(g.manifest, "--manifest");
    require(g.out, "--out");
    const auto records = load_manifest(g.manifest);
    fs::create_directories(g.out);

    SynthConfig cfg;
    cfg.recipients = recipients == "source" ? RecipientPolicy::SourceOnly : RecipientPolicy::RandomPerTransform;

    std::size_t written = 0;
    for (const VideoRecord& r : records) {
        if (r.label != Label::Real) {
            continue;
        }
        const auto landmarks = load_landmarks(r.landmark_path, r.frame_paths.size());
        Rng rng(video_seed(g.seed, r.video_id));
        std::vector<std::uint32_t> frames(r.frame_paths.size());
        std::iota(frames.begin(), frames.end(), 0u);
        const std::size_t n = std::min(count, frames.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::swap(frames[i], frames[i + rng.below(frames.size() - i)]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t f = frames[i];
            const std::uint64_t seed = rng.next();
            const MaskScheme scheme =
                scheme_name == "all" ? kAllSchemes[mix_seed(seed, 7) % 4] : parse_scheme(scheme_name);
            const PreprocessedFace face = load_face_frame(r, f, landmarks);
            PseudoDeepfake fake = make_pseudo_deepfake(face.image, face.landmarks, scheme, cfg, seed);
            fake.provenance.video_id = r.video_id;
            fake.provenance.frame_index = f;

            const std::string stem = r.video_id + "_f" + std::to_string(f) + "_" + std::string(to_string(scheme));
            write_image(fake.image, fs::path(g.out) / (stem + ".png"));
            std::ofstream sidecar(fs::path(g.out) / (stem + ".json"));
            sidecar << provenance_json(fake.provenance) << '\n';
            if (dump_masks) {
                write_mask_image(fake.mask, fs::path(g.out) / (stem + "_mask.png"));
            }
            ++written;
        }
    }
    std::cout << "wrote " << written << " pseudo-deepfakes to " << g.out << '\n';
    return 0;
}

int run_extract(const GlobalOptions& g, const EmbeddingFlags& flags) {
    require(g.manifest, "--manifest");
    require(g.out, "--out");
    const auto records = load_manifest(g.manifest);
    EmbeddingSource source = flags.source();
    source.embeddings.reset();
    const EmbeddingStore store = extract_all(records, source.extractor);
    write_embeddings(store, g.out);
    std::cout << "wrote " << store.size() << " embeddings of dim " << store.dim() << " to " << g.out << '\n';
    return 0;
}

int run_fit(const GlobalOptions& g, const EmbeddingFlags& flags, TrainConfig cfg, const std::string& combine,
            bool full_covariance, const std::string& report) {
    require(g.manifest, "--manifest");
    require(g.out, "--out");
    cfg.mode = parse_mode(combine);
    cfg.seed = g.seed;
    cfg.fit.covariance = full_covariance ? CovarianceType::Full : CovarianceType::Diagonal;
    std::optional<fs::path> report_path;
    if (!report.empty()) report_path = report;
    const TrainReport r = run_train(g.manifest, flags.source(), cfg, g.out, report_path);
    for (const auto& w : r.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    std::cout << "fitted " << r.components << "-component model (d=" << r.dim << ") on " << r.n_pairs
              << " real pairs from " << r.n_videos << " videos; " << r.iterations << " iterations, log-likelihood "
              << r.final_log_likelihood << (r.converged ? "" : " (not converged)") << '\n';
    return 0;
}

int run_score(const GlobalOptions& g, const EmbeddingFlags& flags, const std::string& model,
              const std::string& combine, std::uint32_t min_gap, const std::string& split) {
    require(g.manifest, "--manifest");
    require(g.out, "--out");
    require(model, "--model");
    InferConfig cfg;
    cfg.mode = parse_mode(combine);
    cfg.min_gap = min_gap;
    cfg.seed = g.seed;
    cfg.split = parse_split(split);
    const auto scores = run_infer(g.manifest, flags.source(), model, cfg, g.out);
    std::cout << "scored " << scores.size() << " videos into " << g.out << '\n';
    return 0;
}

int run_eval(const GlobalOptions& g, const std::vector<std::string>& tables, const std::string& config,
             std::uint32_t components, bool oracle_check) {
    if (tables.empty()) {
        throw CLI::ValidationError("tables", "at least one score table is required");
    }
    std::vector<EvalReport> reports;
    bool oracle_ok = true;
    for (const std::string& spec : tables) {
        std::string name;
        fs::path path;
        if (auto eq = spec.find('='); eq != std::string::npos) {
            name = spec.substr(0, eq);
            path = spec.substr(eq + 1);
        } else {
            path = spec;
            name = path.stem().string();
        }
        const auto samples = to_samples(read_score_table(path));
        EvalReport report = evaluate(name, samples, ConfigEcho{config, components, g.seed});
        if (oracle_check) {
            if (samples.size() >= 10000) {
                std::cerr << "oracle check skipped for " << name << " (" << samples.size() << " samples)\n";
            } else {
                const double brute = auc_pair_count(samples);
                const bool ok = std::abs(brute - report.auc) <= 1e-12;
                oracle_ok = oracle_ok && ok;
                std::cerr << "oracle check " << name << ": rank AUC " << report.auc << ", pair-count AUC " << brute
                          << (ok ? " [ok]" : " [MISMATCH]") << '\n';
            }
        }
        reports.push_back(std::move(report));
    }
    const std::string text = render_report(reports);
    if (g.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream(g.out) << text;
    }
    return oracle_ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential anomaly detection toolkit for deepfake videos"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed for every randomized step");
    app.add_option("--manifest", g.manifest, "JSON-lines dataset manifest");
    app.add_option("--out", g.out, "Output path (file or directory, per subcommand)");

    auto* synth = app.add_subcommand("synth", "Generate pseudo-deepfakes from real frames");
    std::string scheme = "all";
    std::size_t count = 4;
    bool dump_masks = false;
    std::string recipients = "random";
    synth->add_option("--scheme", scheme, "full, eye, mouth, jaw, or all (random per sample)")
        ->check(CLI::IsMember({"full", "eye", "mouth", "jaw", "all"}));
    synth->add_option("--count", count, "Pseudo-deepfakes per video");
    synth->add_flag("--dump-masks", dump_masks, "Also write each blending mask as 8-bit grayscale");
    synth->add_option("--recipients", recipients, "Which image receives transforms: random or source")
        ->check(CLI::IsMember({"random", "source"}));

    auto* extract = app.add_subcommand("extract", "Compute or import face embeddings");
    EmbeddingFlags extract_flags;
    add_embedding_flags(extract, extract_flags);

    auto* fit = app.add_subcommand("fit-adm", "Fit the Gaussian-mixture anomaly model on real pairs");
    EmbeddingFlags fit_flags;
    add_embedding_flags(fit, fit_flags);
    TrainConfig train;
    std::string fit_combine = "sub2";
    bool full_covariance = false;
    std::string report;
    fit->add_option("--components", train.fit.n_components, "Mixture components")->capture_default_str();
    fit->add_option("--combine", fit_combine, "abs, sub, sub2 or sub3")->capture_default_str();
    fit->add_option("--tol", train.fit.tol, "Relative log-likelihood tolerance")->capture_default_str();
    fit->add_option("--max-iter", train.fit.max_iter, "EM iteration cap")->capture_default_str();
    fit->add_option("--min-gap", train.min_gap, "Minimum frame gap within a pair")->capture_default_str();
    fit->add_option("--pairs-per-video", train.pairs_per_video, "Training pairs per video")->capture_default_str();
    fit->add_flag("--full-covariance", full_covariance, "Full instead of diagonal covariances (small d only)");
    fit->add_option("--report", report, "Write a JSON run report here");

    auto* score = app.add_subcommand("score", "Score videos with a fitted model");
    EmbeddingFlags score_flags;
    add_embedding_flags(score, score_flags);
    std::string model;
    std::string score_combine = "sub2";
    std::uint32_t min_gap = kDefaultMinGap;
    std::string split = "test";
    score->add_option("--model", model, "Model file from fit-adm");
    score->add_option("--combine", score_combine, "abs, sub, sub2 or sub3")->capture_default_str();
    score->add_option("--min-gap", min_gap, "Minimum frame gap within a pair")->capture_default_str();
    score->add_option("--split", split, "Manifest split to score")->check(CLI::IsMember({"train", "val", "test"}));

    auto* eval = app.add_subcommand("eval", "AUC report from score tables");
    std::vector<std::string> tables;
    std::string config = "SUB2";
    std::uint32_t components = 0;
    bool oracle_check = false;
    eval->add_option("tables", tables, "Score tables, optionally NAME=path");
    eval->add_option("--config", config, "Row label for the report")->capture_default_str();
    eval->add_option("--components", components, "Echo the component count in the row label");
    eval->add_flag("--oracle-check", oracle_check, "Cross-check AUC by O(n^2) pair counting (< 10^4 samples)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(g, scheme, count, dump_masks, recipients);
        if (extract->parsed()) return run_extract(g, extract_flags);
        if (fit->parsed()) return run_fit(g, fit_flags, train, fit_combine, full_covariance, report);
        if (score->parsed()) return run_score(g, score_flags, model, score_combine, min_gap, split);
        if (eval->parsed()) return run_eval(g, tables, config, components, oracle_check);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
