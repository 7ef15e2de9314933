#include "difffake/image_io.hpp"

#include "difffake/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cstring>

namespace difffake {

FaceImage read_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) {
        throw Error("cannot read image " + path.string());
    }
    FaceImage out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            out.at(x, y, 0) = row[x][2];
            out.at(x, y, 1) = row[x][1];
            out.at(x, y, 2) = row[x][0];
        }
    }
    return out;
}

void write_image(const FaceImage& image, const std::filesystem::path& path) {
    cv::Mat bgr(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            row[x] = cv::Vec3b(image.at(x, y, 2), image.at(x, y, 1), image.at(x, y, 0));
        }
    }
    if (!cv::imwrite(path.string(), bgr)) {
        throw Error("cannot write image " + path.string());
    }
}

void write_mask_image(const BlendMask& mask, const std::filesystem::path& path) {
    cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) {
            row[x] = to_pixel(mask.at(x, y) * 255.0);
        }
    }
    if (!cv::imwrite(path.string(), gray)) {
        throw Error("cannot write mask image " + path.string());
    }
}

} // namespace difffake
