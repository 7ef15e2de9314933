#include "difffake/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace difffake {

FaceImage::FaceImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * height * 3, fill) {}

double FaceImage::sample(double x, double y, int c) const {
    x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, width_ - 1);
    const int y1 = std::min(y0 + 1, height_ - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0, c) + fx * (at(x1, y0, c) - at(x0, y0, c));
    const double bottom = at(x0, y1, c) + fx * (at(x1, y1, c) - at(x0, y1, c));
    return top + fy * (bottom - top);
}

double BlendMask::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double BlendMask::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double BlendMask::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

std::uint8_t to_pixel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

FaceImage resize_bilinear(const FaceImage& image, int width, int height) {
    FaceImage out(width, height);
    const double sx = static_cast<double>(image.width()) / width;
    const double sy = static_cast<double>(image.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < width; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = to_pixel(image.sample(src_x, src_y, c));
            }
        }
    }
    return out;
}

} // namespace difffake
