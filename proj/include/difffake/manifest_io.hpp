#pragma once

#include "difffake/image.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace difffake {

enum class Label { Real, Fake };
enum class Split { Train, Val, Test };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);

/// Face box in raw-frame pixels: top-left corner plus extent.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One video's worth of already-extracted frames.
///
/// When `boxes` is empty the frames are taken to be 224x224 face crops.
/// Otherwise there is one box per frame and frames are raw; consumers run
/// the crop/resize preprocessing on load.
struct VideoRecord {
    std::string video_id;
    std::string subject_id;
    Label label = Label::Real;
    std::vector<std::filesystem::path> frame_paths;
    std::filesystem::path landmark_path;
    Split split = Split::Train;
    std::vector<BoundingBox> boxes;

    friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

/// Reads a JSON-lines manifest. Relative paths resolve against the manifest's
/// directory. When `check_landmarks` is set, each referenced landmark file is
/// parsed and must hold one 68-point set per frame.
std::vector<VideoRecord> load_manifest(const std::filesystem::path& path,
                                       bool check_landmarks = true);

/// Writes records one JSON object per line. Paths are written as stored.
void write_manifest(std::span<const VideoRecord> records, const std::filesystem::path& path);

/// Text landmark format: 68 "x y" rows per frame, frames separated by a blank
/// line.
std::vector<LandmarkSet> load_landmarks(const std::filesystem::path& path, std::size_t n_frames);
std::vector<LandmarkSet> parse_landmarks(std::string_view text, std::size_t n_frames);

/// Values are written with round-trip precision, so a reread is bit-identical.
void write_landmarks(std::span<const LandmarkSet> sets, const std::filesystem::path& path);

struct EmbeddingKey {
    std::string video_id;
    std::uint32_t frame_index = 0;
    friend auto operator<=>(const EmbeddingKey&, const EmbeddingKey&) = default;
    friend bool operator==(const EmbeddingKey&, const EmbeddingKey&) = default;
};

/// Face embeddings keyed by (video, frame), iterated in sorted key order.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::uint32_t dim);

    std::uint32_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Inserts or replaces. Throws DimensionError on length mismatch and
    /// DataError on non-finite components.
    void insert(std::string video_id, std::uint32_t frame_index, std::vector<float> values);

    /// nullptr when absent.
    const std::vector<float>* find(std::string_view video_id, std::uint32_t frame_index) const;

    /// Throws DataError naming the (video, frame) when absent.
    const std::vector<float>& at(std::string_view video_id, std::uint32_t frame_index) const;

    const std::map<EmbeddingKey, std::vector<float>>& entries() const noexcept { return entries_; }

    friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

private:
    std::uint32_t dim_;
    std::map<EmbeddingKey, std::vector<float>> entries_;
};

/// Binary little-endian layout:
///   "DFEM" | u32 version (1) | u32 dim | u64 count
///   then per entry: u32 id length | id bytes | u32 frame index | dim x f32
void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

/// Throws FormatError when the header is wrong or the length does not match it.
/// When `expected_dim` is given, a different header dim is a DimensionError.
EmbeddingStore read_embeddings(const std::filesystem::path& path,
                               std::optional<std::uint32_t> expected_dim = std::nullopt);

} // namespace difffake
