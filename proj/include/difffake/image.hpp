#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace difffake {

inline constexpr int kFaceSize = 224;
inline constexpr std::size_t kNumLandmarks = 68;

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// 68 facial keypoints in iBUG ordering, pixel coordinates of the owning frame.
struct LandmarkSet {
    std::array<Point, kNumLandmarks> points{};
    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

/// 8-bit RGB image, interleaved, row-major. Channel values are the [0,255]
/// pixel domain; normalization happens only at extractor input.
class FaceImage {
public:
    FaceImage() = default;
    FaceImage(int width, int height, std::uint8_t fill = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }

    std::vector<std::uint8_t>& data() noexcept { return pixels_; }
    const std::vector<std::uint8_t>& data() const noexcept { return pixels_; }

    /// Bilinear sample of channel c at continuous pixel coordinates (pixel
    /// centers at integers); coordinates outside the frame replicate the edge.
    double sample(double x, double y, int c) const;

    friend bool operator==(const FaceImage&, const FaceImage&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Real-valued W x H grid, row-major. Used for blending masks.
class BlendMask {
public:
    BlendMask() = default;
    BlendMask(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          values_(static_cast<std::size_t>(width) * height, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double sum() const;
    double max() const;
    double min() const;

    friend bool operator==(const BlendMask&, const BlendMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Round and clamp a real channel value into the 8-bit domain.
std::uint8_t to_pixel(double v);

/// Bilinear resize to the given size (pixel-center aligned).
FaceImage resize_bilinear(const FaceImage& image, int width, int height);

} // namespace difffake
