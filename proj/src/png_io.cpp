#include "promptaug/png_io.hpp"

#include <png.h>

#include <cstring>
#include <string>

namespace promptaug {

namespace {

Image finish_read(png_image& image, const std::string& what) {
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, what + ": empty PNG");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  // Black background for alpha compositing.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, what + ": " + msg);
  }
  return Image(static_cast<int>(image.width), static_cast<int>(image.height),
               channels, std::move(buffer));
}

png_image make_write_image(const Image& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  return image;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, path.string() + ": " + msg);
  }
  return finish_read(image, path.string());
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, std::string("inline PNG: ") + msg);
  }
  return finish_read(image, "inline PNG");
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  return image_to_mask(read_png(path));
}

void write_png(const std::filesystem::path& path, const Image& img) {
  png_image image = make_write_image(img);
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0,
                               nullptr)) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + image.message);
  }
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  png_image image = make_write_image(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0,
                                 img.pixels().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("encode PNG: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0,
                                 img.pixels().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("encode PNG: ") + image.message);
  }
  out.resize(size);
  return out;
}

Image mask_to_image(const BinaryMask& mask) {
  Image img(mask.width(), mask.height(), 1);
  auto px = img.pixels();
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) px[i] = bits[i] ? 255 : 0;
  return img;
}

BinaryMask image_to_mask(const Image& img) {
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool on = false;
      for (int c = 0; c < img.channels(); ++c) on = on || img.at(x, y, c) != 0;
      if (on) mask.set(x, y);
    }
  }
  return mask;
}

}  // namespace promptaug
