#pragma once

#include "difffake/image.hpp"
#include "difffake/manifest_io.hpp"
#include "difffake/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace difffake {

using Embedding = std::vector<float>;

/// Width of the built-in grid-statistics extractor.
inline constexpr std::uint32_t kToyDim = 448;
/// Penultimate feature width of the default real backbone.
inline constexpr std::uint32_t kBackboneDim = 1792;

inline constexpr int kToyGrid = 8;

enum class ExtractorKind { Toy, External };

ExtractorKind parse_extractor_kind(std::string_view text);

struct ExtractorSpec {
    ExtractorKind kind = ExtractorKind::Toy;
    std::uint32_t dim = kToyDim;
    /// Embedding file produced by an external backbone (kind External only).
    std::filesystem::path external_file;
    /// Per-channel normalization applied at extractor input.
    static constexpr double kNormMean = 0.5;
    static constexpr double kNormStd = 0.5;

    void validate() const;
};

/// (v / 255 - mean) / std
double normalize_channel(std::uint8_t value, double mean = ExtractorSpec::kNormMean,
                         double std = ExtractorSpec::kNormStd);

/// Builds an image from interleaved RGB channel values. Values must be
/// integral and within [0, 255]; anything else (for example an already
/// normalized image) is rejected with DataError.
FaceImage face_from_channel_values(std::span<const double> values, int width, int height);

/// Deterministic 448-dim descriptor of a 224 x 224 image, computed on
/// normalized pixels over an 8 x 8 grid of 28 x 28 cells (row-major cells):
///
///   [0, 384)   cell (r, c), channel ch: index ((r*8 + c)*3 + ch)*2 + {0: mean, 1: std}
///   [384, 448) cell (r, c): mean |discrete Laplacian| of the grayscale,
///              index 384 + r*8 + c
///
/// std is the population standard deviation. Grayscale is
/// 0.299 R + 0.587 G + 0.114 B of normalized values; the 4-neighbour
/// Laplacian replicates the image border.
Embedding toy_extract(const FaceImage& image);

/// Reads frame `frame_index` of the record; when the record carries face
/// boxes, applies crop/resize preprocessing. The result is 224 x 224.
PreprocessedFace load_face_frame(const VideoRecord& record, std::size_t frame_index,
                                 std::span<const LandmarkSet> landmarks);

/// Toy: extracts every frame of every record, in (video_id, frame) order.
/// External: loads spec.external_file, checks its dim against spec.dim and
/// that every frame of every record is present.
EmbeddingStore extract_all(std::span<const VideoRecord> records, const ExtractorSpec& spec);

} // namespace difffake
