#include "lecturedeck/raster.hpp"

#include <algorithm>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "lecturedeck/error.hpp"

namespace lecturedeck {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(std::max(width, 0)),
      height_(std::max(height, 0)),
      pixels_(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), fill) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidInput, "pixel buffer does not match image dimensions");
  }
}

void GrayImage::fill_rect(int x, int y, int w, int h, std::uint8_t value) {
  const int x0 = std::clamp(x, 0, width_);
  const int y0 = std::clamp(y, 0, height_);
  const int x1 = std::clamp(x + w, 0, width_);
  const int y1 = std::clamp(y + h, 0, height_);
  for (int yy = y0; yy < y1; ++yy) {
    std::fill_n(pixels_.begin() + static_cast<std::ptrdiff_t>(index(x0, yy)), x1 - x0, value);
  }
}

GrayImage GrayImage::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width_ || y + h > height_) {
    throw Error(ErrorCode::InvalidInput, "crop rectangle outside image bounds");
  }
  GrayImage out(w, h);
  for (int yy = 0; yy < h; ++yy) {
    auto src = pixels_.begin() + static_cast<std::ptrdiff_t>(index(x, y + yy));
    std::copy_n(src, w, out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.index(0, yy)));
  }
  return out;
}

namespace {

GrayImage from_mat(const cv::Mat& mat) {
  GrayImage out(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) out.at(x, y) = row[x];
  }
  return out;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read image: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, std::string(e.what()) + ": " + path.string());
  }
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::Io, "empty image data");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_GRAYSCALE);
  if (mat.empty()) throw Error(ErrorCode::Io, "undecodable image data");
  return from_mat(mat);
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  if (image.empty()) throw Error(ErrorCode::InvalidInput, "cannot encode empty image");
  cv::Mat mat(image.height(), image.width(), CV_8UC1,
              const_cast<std::uint8_t*>(image.pixels().data()));
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat, out)) {
    throw Error(ErrorCode::Io, "png encoding failed");
  }
  return out;
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "cannot write image: " + path.string());
}

}  // namespace lecturedeck
