#pragma once

#include "difffake/image.hpp"
#include "difffake/manifest_io.hpp"
#include "difffake/mask_gen.hpp"

#include "difffake/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace difffake {

// ---------------------------------------------------------------------------
// Preprocessing: square crop of the enlarged face box, resized to 224 x 224.
// ---------------------------------------------------------------------------

inline constexpr double kCropEnlargement = 1.3;

/// Square crop region in raw-frame pixels.
struct CropRegion {
    double x = 0.0;
    double y = 0.0;
    double side = 0.0;
};

/// Square of side factor * max(w, h) centered on the box, shrunk to the frame
/// when larger and shifted to lie inside it. Throws GeometryError for a box
/// with zero or non-finite area.
CropRegion enlarged_crop(const BoundingBox& box, double factor, int frame_width, int frame_height);

struct PreprocessedFace {
    FaceImage image;
    LandmarkSet landmarks;
};

/// Crops and resizes with bilinear sampling. Landmarks are mapped into crop
/// coordinates and clamped to [0, out_size). Pixels stay in [0, 255].
PreprocessedFace preprocess(const FaceImage& raw, const BoundingBox& box, const LandmarkSet& landmarks,
                            double factor = kCropEnlargement, int out_size = kFaceSize);

// ---------------------------------------------------------------------------
// Source-target transformations.
// ---------------------------------------------------------------------------

enum class TransformKind { RgbShift, HsvShift, BrightnessContrast, Sharpen, Downscale };

inline constexpr std::array<TransformKind, 5> kAllTransforms = {
    TransformKind::RgbShift, TransformKind::HsvShift, TransformKind::BrightnessContrast,
    TransformKind::Sharpen, TransformKind::Downscale};

std::string_view to_string(TransformKind kind);

/// Parameter ranges are fixed; what varies is how often each transform fires
/// and how far the source may be displaced.
struct TransformConfig {
    static constexpr double kRgbShiftLimit = 20.0;           // per channel, [-20, 20]
    static constexpr double kHsvShiftLimit = 0.3;            // fraction of channel range
    static constexpr double kBrightnessContrastLimit = 0.3;  // both terms
    static constexpr double kSharpenMin = 0.2;
    static constexpr double kSharpenMax = 0.5;
    static constexpr std::array<int, 2> kDownscaleFactors = {2, 4};

    /// Firing probability per transform, indexed by TransformKind.
    std::array<double, 5> probability = {0.3, 0.3, 0.3, 0.3, 0.3};
    double affine_translate_frac = 0.03;
    double affine_resize_frac = 0.05;

    /// Throws std::invalid_argument for probabilities outside [0, 1] or affine
    /// fractions outside [0, listed maximum].
    void validate() const;

    /// Every probability and affine extent set to zero.
    static TransformConfig identity();
};

/// One sampled transform with its drawn parameters.
struct TransformDraw {
    TransformKind kind = TransformKind::RgbShift;
    std::array<double, 3> params{};
};

/// Each transform fires independently with its probability. With
/// `force_one`, a run in which nothing fired fires one transform chosen
/// uniformly among those with non-zero probability.
std::vector<TransformDraw> draw_transforms(const TransformConfig& cfg, Rng& rng, bool force_one);

FaceImage apply_transform(const FaceImage& image, const TransformDraw& draw);

FaceImage rgb_shift(const FaceImage& image, double red, double green, double blue);
/// Hue shift wraps around; saturation and value shifts clamp to [0, 1].
FaceImage hsv_shift(const FaceImage& image, double hue, double saturation, double value);
/// out = (1 + contrast) * x + brightness * 255
FaceImage brightness_contrast(const FaceImage& image, double brightness, double contrast);
/// Blend of identity and a 3x3 sharpening kernel (center 9, neighbours -1).
FaceImage sharpen(const FaceImage& image, double intensity);
/// Box-averaged downscale by an integer factor followed by bilinear upscale.
FaceImage downscale(const FaceImage& image, int factor);

/// Draws and applies all firing transforms in TransformKind order.
FaceImage apply_st_transforms(const FaceImage& image, const TransformConfig& cfg, std::uint64_t seed);

/// Translation by (tx, ty) pixels followed by scaling about the image center;
/// out-of-frame samples replicate the edge.
FaceImage affine_warp(const FaceImage& image, double tx, double ty, double scale);

struct AffineDraw {
    double tx = 0.0;
    double ty = 0.0;
    double scale = 1.0;
};

AffineDraw draw_affine(const TransformConfig& cfg, int width, int height, Rng& rng);

FaceImage affine_source(const FaceImage& image, const TransformConfig& cfg, std::uint64_t seed);
FaceImage affine_source(const FaceImage& image, std::uint64_t seed);

/// out = source * M + target * (1 - M), per channel, rounded to 8 bits.
/// Evaluated as target + M * (source - target) so M = 0, M = 1 and
/// source == target reproduce their inputs bit-exactly.
FaceImage blend(const FaceImage& source, const FaceImage& target, const BlendMask& mask);

// ---------------------------------------------------------------------------
// Pseudo-deepfake generation from one real image.
// ---------------------------------------------------------------------------

enum class Recipient { Source, Target };

/// Which image of the pair receives each fired transform.
enum class RecipientPolicy { RandomPerTransform, SourceOnly };

struct SynthConfig {
    TransformConfig transforms;
    MaskParams mask;
    std::vector<double> blend_ratios{std::begin(kBlendRatios), std::end(kBlendRatios)};
    RecipientPolicy recipients = RecipientPolicy::RandomPerTransform;
    bool force_one_transform = true;

    void validate() const;
};

struct AppliedTransform {
    TransformDraw draw;
    Recipient recipient = Recipient::Source;
};

struct Provenance {
    std::string video_id;
    std::uint32_t frame_index = 0;
    std::uint64_t seed = 0;
    MaskScheme scheme = MaskScheme::FullFace;
    double blend_ratio = 1.0;
    AffineDraw affine;
    std::vector<AppliedTransform> transforms;
};

struct PseudoDeepfake {
    FaceImage image;
    /// The target after its share of transforms; pixels where the mask is 0
    /// equal it exactly.
    FaceImage target;
    BlendMask mask;
    MaskScheme scheme = MaskScheme::FullFace;
    Provenance provenance;
};

PseudoDeepfake make_pseudo_deepfake(const FaceImage& real, const LandmarkSet& landmarks, MaskScheme scheme,
                                    const SynthConfig& cfg, std::uint64_t seed);

/// Provenance as a JSON object string (the sidecar written next to each
/// synthesized image).
std::string provenance_json(const Provenance& provenance);

} // namespace difffake
