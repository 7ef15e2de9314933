#include "difffake/mask_gen.hpp"

#include "difffake/error.hpp"
#include "difffake/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace difffake {

namespace {

template <std::size_t N>
constexpr std::array<int, N> index_range(int first) {
    std::array<int, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = first + static_cast<int>(i);
    }
    return out;
}

constexpr auto kFullFace = index_range<68>(0);

constexpr std::array<int, 22> kEyeRegion = {17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 36,
                                            37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47};

constexpr std::array<int, 30> kMouthNoseJaw = {4,  5,  6,  7,  8,  9,  10, 11, 12, 33,
                                               48, 49, 50, 51, 52, 53, 54, 55, 56, 57,
                                               58, 59, 60, 61, 62, 63, 64, 65, 66, 67};

constexpr std::array<int, 23> kJawlineNose = {0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11,
                                              12, 13, 14, 15, 16, 30, 31, 32, 33, 34, 35};

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Separable convolution with edge replication. The center tap is added last
// so that a kernel summing to one maps constants to themselves exactly.
std::vector<double> convolve_separable(const std::vector<double>& in, int width, int height,
                                       const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    std::vector<double> tmp(in.size());
    std::vector<double> out(in.size());
    for (int y = 0; y < height; ++y) {
        const double* row = &in[static_cast<std::size_t>(y) * width];
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                if (k == 0) continue;
                acc += kernel[k + radius] * row[std::clamp(x + k, 0, width - 1)];
            }
            tmp[static_cast<std::size_t>(y) * width + x] = acc + kernel[radius] * row[x];
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                if (k == 0) continue;
                acc += kernel[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, height - 1)) * width + x];
            }
            out[static_cast<std::size_t>(y) * width + x] =
                acc + kernel[radius] * tmp[static_cast<std::size_t>(y) * width + x];
        }
    }
    return out;
}

double sample_zero_padded(const BlendMask& mask, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto value = [&](int xi, int yi) {
        if (xi < 0 || yi < 0 || xi >= mask.width() || yi >= mask.height()) return 0.0;
        return mask.at(xi, yi);
    };
    const double v00 = value(x0, y0);
    if (fx == 0.0 && fy == 0.0) {
        return v00;
    }
    const double top = v00 + fx * (value(x0 + 1, y0) - v00);
    const double v01 = value(x0, y0 + 1);
    const double bottom = v01 + fx * (value(x0 + 1, y0 + 1) - v01);
    return top + fy * (bottom - top);
}

} // namespace

std::string_view to_string(MaskScheme scheme) {
    switch (scheme) {
    case MaskScheme::FullFace:
        return "full";
    case MaskScheme::EyeRegion:
        return "eye";
    case MaskScheme::MouthNoseJaw:
        return "mouth";
    case MaskScheme::JawlineNose:
        return "jaw";
    }
    return "full";
}

MaskScheme parse_scheme(std::string_view text) {
    if (text == "full" || text == "FullFace") return MaskScheme::FullFace;
    if (text == "eye" || text == "EyeRegion") return MaskScheme::EyeRegion;
    if (text == "mouth" || text == "MouthNoseJaw") return MaskScheme::MouthNoseJaw;
    if (text == "jaw" || text == "JawlineNose") return MaskScheme::JawlineNose;
    throw std::invalid_argument("unknown mask scheme '" + std::string(text) + "'");
}

std::span<const int> scheme_indices(MaskScheme scheme) {
    switch (scheme) {
    case MaskScheme::FullFace:
        return kFullFace;
    case MaskScheme::EyeRegion:
        return kEyeRegion;
    case MaskScheme::MouthNoseJaw:
        return kMouthNoseJaw;
    case MaskScheme::JawlineNose:
        return kJawlineNose;
    }
    return kFullFace;
}

std::vector<Point> scheme_landmarks(MaskScheme scheme, const LandmarkSet& landmarks) {
    std::vector<Point> out;
    for (int i : scheme_indices(scheme)) {
        out.push_back(landmarks.points[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<Point> convex_hull(std::span<const Point> points) {
    std::vector<Point> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.size() < 3) {
        throw GeometryError("convex hull needs at least 3 distinct points");
    }

    std::vector<Point> hull(2 * sorted.size());
    std::size_t k = 0;
    for (const Point& p : sorted) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = sorted.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], sorted[i]) <= 0) --k;
        hull[k++] = sorted[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        throw GeometryError("convex hull is degenerate: all points are collinear");
    }
    return hull;
}

BlendMask rasterize_hull(std::span<const Point> polygon, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("mask dimensions must be positive");
    }
    if (polygon.size() < 3) {
        throw GeometryError("polygon needs at least 3 vertices");
    }
    BlendMask mask(width, height, 0.0);

    double min_x = polygon[0].x, max_x = polygon[0].x;
    double min_y = polygon[0].y, max_y = polygon[0].y;
    for (const Point& p : polygon) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    auto pixel_bound = [](double v, int extent) {
        return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(extent)));
    };
    const int x_begin = std::max(0, pixel_bound(std::floor(min_x - 0.5), width));
    const int x_end = std::min(width - 1, pixel_bound(std::ceil(max_x - 0.5), width));
    const int y_begin = std::max(0, pixel_bound(std::floor(min_y - 0.5), height));
    const int y_end = std::min(height - 1, pixel_bound(std::ceil(max_y - 0.5), height));

    const std::size_t n = polygon.size();
    for (int y = y_begin; y <= y_end; ++y) {
        for (int x = x_begin; x <= x_end; ++x) {
            const Point c{x + 0.5, y + 0.5};
            bool inside = true;
            for (std::size_t i = 0; i < n && inside; ++i) {
                const Point& a = polygon[i];
                const Point& b = polygon[(i + 1) % n];
                const double e = cross(a, b, c);
                if (e > 0) continue;
                if (e < 0) {
                    inside = false;
                    continue;
                }
                // On the edge line: keep only top (horizontal, heading +x)
                // and left (heading -y) edges.
                const double dx = b.x - a.x;
                const double dy = b.y - a.y;
                const bool top = dy == 0 && dx > 0;
                const bool left = dy < 0;
                inside = top || left;
            }
            if (inside) {
                mask.at(x, y) = 1.0;
            }
        }
    }
    return mask;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0)) {
        throw std::invalid_argument("gaussian sigma must be positive");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    }
    const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (double& w : kernel) {
        w /= total;
    }
    // Re-derive the center tap so the sum, accumulated in the order the
    // convolution uses (off-center taps first), is exactly one.
    double off = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        if (i != 0) off += kernel[i + radius];
    }
    kernel[radius] = 1.0 - off;
    return kernel;
}

BlendMask gaussian_smooth(const BlendMask& mask, double kernel_sigma) {
    const auto kernel = gaussian_kernel(kernel_sigma);
    BlendMask out(mask.width(), mask.height());
    out.values() = convolve_separable(mask.values(), mask.width(), mask.height(), kernel);
    for (double& v : out.values()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

BlendMask elastic_deform(const BlendMask& mask, double alpha, double sigma, std::uint64_t seed) {
    if (!(alpha >= 0)) {
        throw std::invalid_argument("elastic alpha must be non-negative");
    }
    if (!(sigma > 0)) {
        throw std::invalid_argument("elastic sigma must be positive");
    }
    const int w = mask.width();
    const int h = mask.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;

    Rng rng(seed);
    std::vector<double> dx(n), dy(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = rng.uniform(-1.0, 1.0);
        dy[i] = rng.uniform(-1.0, 1.0);
    }
    const auto kernel = gaussian_kernel(sigma);
    dx = convolve_separable(dx, w, h, kernel);
    dy = convolve_separable(dy, w, h, kernel);

    BlendMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double v = sample_zero_padded(mask, x + alpha * dx[i], y + alpha * dy[i]);
            out.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

BlendMask apply_blend_ratio(const BlendMask& mask, double r) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw std::invalid_argument("blend ratio must lie in (0, 1]");
    }
    BlendMask out = mask;
    for (double& v : out.values()) {
        v *= r;
    }
    return out;
}

BlendMask make_blend_mask(MaskScheme scheme, const LandmarkSet& landmarks, int width, int height,
                          const MaskParams& params, double blend_ratio, std::uint64_t seed) {
    const auto hull = convex_hull(scheme_landmarks(scheme, landmarks));
    BlendMask mask = rasterize_hull(hull, width, height);
    mask = elastic_deform(mask, params.deform_alpha, params.deform_sigma, seed);
    mask = gaussian_smooth(mask, params.smooth_sigma);
    return apply_blend_ratio(mask, blend_ratio);
}

} // namespace difffake
