#pragma once

#include "difffake/image.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace difffake {

/// Landmark subsets whose convex hull seeds a blending mask (iBUG-68 indices):
///
///   FullFace      0-67
///   EyeRegion     eyebrows 17-26, eyes 36-47                  (22 points)
///   MouthNoseJaw  lower jaw 4-12, nose apex 33, mouth 48-67   (30 points)
///   JawlineNose   jawline 0-16, nose tip 30-35                (23 points)
enum class MaskScheme { FullFace, EyeRegion, MouthNoseJaw, JawlineNose };

inline constexpr MaskScheme kAllSchemes[] = {MaskScheme::FullFace, MaskScheme::EyeRegion,
                                             MaskScheme::MouthNoseJaw, MaskScheme::JawlineNose};

std::string_view to_string(MaskScheme scheme);

/// Accepts "full", "eye", "mouth", "jaw" and the enumerator spellings.
MaskScheme parse_scheme(std::string_view text);

/// Ascending landmark indices used by the scheme.
std::span<const int> scheme_indices(MaskScheme scheme);

std::vector<Point> scheme_landmarks(MaskScheme scheme, const LandmarkSet& landmarks);

/// Convex hull by monotone chain. Vertices are returned with positive signed
/// area (counter-clockwise with y pointing up, i.e. clockwise on screen),
/// starting from the lowest-x (then lowest-y) point; collinear boundary
/// points are dropped. Throws GeometryError when fewer than three
/// non-collinear points exist.
std::vector<Point> convex_hull(std::span<const Point> points);

/// Fills a W x H mask with 1 where the pixel center (x + 0.5, y + 0.5) lies
/// inside the convex polygon, 0 elsewhere. Centers exactly on an edge are
/// inside only for top and left edges.
BlendMask rasterize_hull(std::span<const Point> polygon, int width, int height);

/// Random displacement field (components uniform in [-1, 1]), Gaussian
/// smoothed with `sigma`, scaled by `alpha` and applied by bilinear
/// resampling; samples outside the grid read 0. Output is clamped to [0, 1].
BlendMask elastic_deform(const BlendMask& mask, double alpha, double sigma, std::uint64_t seed);

/// Separable Gaussian blur truncated at 3 sigma, replicated borders. The
/// discrete kernel sums to exactly 1 so constant regions are preserved.
BlendMask gaussian_smooth(const BlendMask& mask, double kernel_sigma);

/// Elementwise scaling by r in (0, 1].
BlendMask apply_blend_ratio(const BlendMask& mask, double r);

/// Normalized 1-D kernel of radius ceil(3 sigma); index radius is the center.
std::vector<double> gaussian_kernel(double sigma);

struct MaskParams {
    double deform_alpha = 50.0;
    double deform_sigma = 7.0;
    double smooth_sigma = 5.0;
};

inline constexpr double kBlendRatios[] = {0.25, 0.5, 0.75, 1.0};

/// Hull -> rasterize -> elastic deform -> smooth -> blend ratio.
BlendMask make_blend_mask(MaskScheme scheme, const LandmarkSet& landmarks, int width, int height,
                          const MaskParams& params, double blend_ratio, std::uint64_t seed);

} // namespace difffake
