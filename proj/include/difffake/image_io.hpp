#pragma once

#include "difffake/image.hpp"

#include <filesystem>

namespace difffake {

/// Decodes any format OpenCV reads into 8-bit RGB.
FaceImage read_image(const std::filesystem::path& path);

/// Encoding follows the extension (PNG recommended; lossless).
void write_image(const FaceImage& image, const std::filesystem::path& path);

/// Mask values scaled to 0..255 and written as 8-bit grayscale.
void write_mask_image(const BlendMask& mask, const std::filesystem::path& path);

} // namespace difffake
