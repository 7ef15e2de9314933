#include "difffake/features.hpp"

#include "difffake/error.hpp"
#include "difffake/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace difffake {

ExtractorKind parse_extractor_kind(std::string_view text) {
    if (text == "toy") return ExtractorKind::Toy;
    if (text == "external") return ExtractorKind::External;
    throw std::invalid_argument("extractor must be 'toy' or 'external'");
}

void ExtractorSpec::validate() const {
    if (dim == 0) {
        throw std::invalid_argument("extractor dim must be positive");
    }
    if (kind == ExtractorKind::Toy && dim != kToyDim) {
        throw std::invalid_argument("the toy extractor has dim 448");
    }
    if (kind == ExtractorKind::External && external_file.empty()) {
        throw std::invalid_argument("external extractor requires an embedding file");
    }
}

double normalize_channel(std::uint8_t value, double mean, double std) {
    return (value / 255.0 - mean) / std;
}

FaceImage face_from_channel_values(std::span<const double> values, int width, int height) {
    if (width <= 0 || height <= 0 ||
        values.size() != static_cast<std::size_t>(width) * height * 3) {
        throw DimensionError("channel buffer does not match width x height x 3");
    }
    FaceImage out(width, height);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
            throw DataError("pixel values must be integers in [0, 255]; normalization is applied by the extractor");
        }
        out.data()[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

Embedding toy_extract(const FaceImage& image) {
    if (image.width() != kFaceSize || image.height() != kFaceSize) {
        throw DimensionError("toy extractor expects a 224x224 image");
    }
    constexpr int cell = kFaceSize / kToyGrid;
    constexpr double n = static_cast<double>(cell) * cell;
    const int w = image.width();
    const int h = image.height();

    std::vector<double> gray(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            gray[static_cast<std::size_t>(y) * w + x] = 0.299 * normalize_channel(image.at(x, y, 0)) +
                                                        0.587 * normalize_channel(image.at(x, y, 1)) +
                                                        0.114 * normalize_channel(image.at(x, y, 2));
        }
    }
    auto g = [&](int x, int y) {
        return gray[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };

    Embedding out(kToyDim);
    for (int r = 0; r < kToyGrid; ++r) {
        for (int c = 0; c < kToyGrid; ++c) {
            const int cell_index = r * kToyGrid + c;
            for (int ch = 0; ch < 3; ++ch) {
                // Raw integer sums keep constant cells exact.
                std::uint64_t sum = 0;
                for (int y = r * cell; y < (r + 1) * cell; ++y) {
                    for (int x = c * cell; x < (c + 1) * cell; ++x) {
                        sum += image.at(x, y, ch);
                    }
                }
                const double raw_mean = static_cast<double>(sum) / n;
                double sq = 0.0;
                for (int y = r * cell; y < (r + 1) * cell; ++y) {
                    for (int x = c * cell; x < (c + 1) * cell; ++x) {
                        const double d = image.at(x, y, ch) - raw_mean;
                        sq += d * d;
                    }
                }
                const double mean = (raw_mean / 255.0 - ExtractorSpec::kNormMean) / ExtractorSpec::kNormStd;
                const double sd = std::sqrt(sq / n) / 255.0 / ExtractorSpec::kNormStd;
                out[static_cast<std::size_t>((cell_index * 3 + ch) * 2)] = static_cast<float>(mean);
                out[static_cast<std::size_t>((cell_index * 3 + ch) * 2 + 1)] = static_cast<float>(sd);
            }
            double lap = 0.0;
            for (int y = r * cell; y < (r + 1) * cell; ++y) {
                for (int x = c * cell; x < (c + 1) * cell; ++x) {
                    lap += std::abs(g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1) - 4.0 * g(x, y));
                }
            }
            out[static_cast<std::size_t>(384 + cell_index)] = static_cast<float>(lap / n);
        }
    }
    return out;
}

PreprocessedFace load_face_frame(const VideoRecord& record, std::size_t frame_index,
                                 std::span<const LandmarkSet> landmarks) {
    if (frame_index >= record.frame_paths.size() || frame_index >= landmarks.size()) {
        throw DataError("frame " + std::to_string(frame_index) + " out of range for video '" +
                        record.video_id + "'");
    }
    FaceImage raw = read_image(record.frame_paths[frame_index]);
    if (!record.boxes.empty()) {
        return preprocess(raw, record.boxes[frame_index], landmarks[frame_index]);
    }
    if (raw.width() != kFaceSize || raw.height() != kFaceSize) {
        throw DimensionError("frame " + record.frame_paths[frame_index].string() +
                             " is not 224x224 and the record has no face boxes");
    }
    return {std::move(raw), landmarks[frame_index]};
}

EmbeddingStore extract_all(std::span<const VideoRecord> records, const ExtractorSpec& spec) {
    spec.validate();
    if (spec.kind == ExtractorKind::External) {
        EmbeddingStore store = read_embeddings(spec.external_file, spec.dim);
        for (const VideoRecord& r : records) {
            for (std::size_t f = 0; f < r.frame_paths.size(); ++f) {
                if (!store.find(r.video_id, static_cast<std::uint32_t>(f))) {
                    throw DataError("external embeddings lack video '" + r.video_id + "' frame " +
                                    std::to_string(f));
                }
            }
        }
        return store;
    }

    std::vector<const VideoRecord*> ordered;
    for (const VideoRecord& r : records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const VideoRecord* a, const VideoRecord* b) { return a->video_id < b->video_id; });

    EmbeddingStore store(kToyDim);
    for (const VideoRecord* r : ordered) {
        const auto landmarks = load_landmarks(r->landmark_path, r->frame_paths.size());
        for (std::size_t f = 0; f < r->frame_paths.size(); ++f) {
            const PreprocessedFace face = load_face_frame(*r, f, landmarks);
            store.insert(r->video_id, static_cast<std::uint32_t>(f), toy_extract(face.image));
        }
    }
    return store;
}

} // namespace difffake
