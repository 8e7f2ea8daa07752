#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "promptaug/imgcore.hpp"

namespace promptaug {

// 8-bit PNG I/O through libpng's simplified API. Images come back as gray
// when the file has no color, RGB otherwise; alpha is composited away.
Image read_png(const std::filesystem::path& path);
Image decode_png(std::span<const std::uint8_t> bytes);

// Any nonzero channel value is foreground.
BinaryMask read_mask_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& img);
std::vector<std::uint8_t> encode_png(const Image& img);

// 0 / 255 grayscale.
Image mask_to_image(const BinaryMask& mask);
BinaryMask image_to_mask(const Image& img);

}  // namespace promptaug
