#pragma once

#include <png.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "genb/error.hpp"
#include "genb/image.hpp"

namespace genb {

/// Reads an 8-bit PNG as gray (1 channel) or RGB (3 channels); alpha is dropped.
inline ImageU8 read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::MissingAsset, path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(Errc::CorruptHeader, path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  ImageU8 out(static_cast<int>(image.width), static_cast<int>(image.height), color ? 3 : 1);
  if (!png_image_finish_read(&image, nullptr, out.data().data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(Errc::CorruptHeader, path.string() + ": " + image.message);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const ImageU8& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(Errc::ShapeMismatch, "write_png supports 1 or 3 channels");
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw Error(Errc::IoError, path.string() + ": " + image.message);
  }
}

}  // namespace genb
