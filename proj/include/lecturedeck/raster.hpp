#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lecturedeck {

/// 8-bit single-channel image, row-major, no padding.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  /// Fills the rectangle clipped to the image bounds.
  void fill_rect(int x, int y, int w, int h, std::uint8_t value);

  GrayImage crop(int x, int y, int w, int h) const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Decodes PNG or JPEG from disk, converting to grayscale. Throws Error(Io).
GrayImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const GrayImage& image);
GrayImage decode_image(std::span<const std::uint8_t> bytes);
void save_png(const GrayImage& image, const std::filesystem::path& path);

}  // namespace lecturedeck
