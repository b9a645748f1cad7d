#include "lecturedeck/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>

#include "httplib.h"
#include "json.hpp"

#include "http_url.hpp"
#include "lecturedeck/error.hpp"

namespace lecturedeck {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Title: return "Title";
    case RegionKind::BodyText: return "BodyText";
    case RegionKind::Figure: return "Figure";
    case RegionKind::Table: return "Table";
  }
  return "BodyText";
}

RegionKind region_kind_from_string(std::string_view name) {
  if (name == "Title") return RegionKind::Title;
  if (name == "BodyText") return RegionKind::BodyText;
  if (name == "Figure") return RegionKind::Figure;
  if (name == "Table") return RegionKind::Table;
  throw Error(ErrorCode::Format, "unknown region kind: " + std::string(name));
}

namespace {

using Mask = std::vector<std::uint8_t>;

/// Summed-area table with a zero border row/column.
class Integral {
 public:
  template <typename Get>
  Integral(int w, int h, Get get) : w_(w), sums_(static_cast<std::size_t>(w + 1) * (h + 1), 0) {
    for (int y = 0; y < h; ++y) {
      std::int64_t row = 0;
      for (int x = 0; x < w; ++x) {
        row += get(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  /// Sum over [x0, x1) x [y0, y1).
  std::int64_t sum(int x0, int y0, int x1, int y1) const {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  std::int64_t& at(int x, int y) { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  std::int64_t at(int x, int y) const { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_;
  std::vector<std::int64_t> sums_;
};

std::uint8_t page_background(const GrayImage& image) {
  std::array<std::size_t, 256> hist{};
  for (auto p : image.pixels()) ++hist[p];
  return static_cast<std::uint8_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());
}

Mask binarize(const GrayImage& image, const LayoutParams& params) {
  const int w = image.width();
  const int h = image.height();
  const int bg = page_background(image);
  const Integral integral(w, h, [&](int x, int y) { return image.at(x, y); });
  const int r = params.local_radius;
  Mask mask(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r);
    const int y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r);
      const int x1 = std::min(w, x + r + 1);
      const std::int64_t area = static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
      const int p = image.at(x, y);
      const bool off_page = std::abs(p - bg) > params.ink_delta;
      const bool locally_dark = static_cast<std::int64_t>(p + params.local_offset) * area <
                                integral.sum(x0, y0, x1, y1);
      mask[static_cast<std::size_t>(y) * w + x] = off_page || locally_dark ? 1 : 0;
    }
  }
  return mask;
}

Mask close(const Mask& mask, int w, int h, int rx, int ry) {
  const Integral fg(w, h, [&](int x, int y) { return mask[static_cast<std::size_t>(y) * w + x]; });
  Mask dilated(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      dilated[static_cast<std::size_t>(y) * w + x] =
          fg.sum(std::max(0, x - rx), std::max(0, y - ry), std::min(w, x + rx + 1),
                 std::min(h, y + ry + 1)) > 0;
    }
  }
  const Integral dil(w, h, [&](int x, int y) { return dilated[static_cast<std::size_t>(y) * w + x]; });
  Mask closed(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Outside the image counts as set so borders do not erode.
      const int x0 = std::max(0, x - rx);
      const int y0 = std::max(0, y - ry);
      const int x1 = std::min(w, x + rx + 1);
      const int y1 = std::min(h, y + ry + 1);
      closed[static_cast<std::size_t>(y) * w + x] =
          dil.sum(x0, y0, x1, y1) == static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
    }
  }
  return closed;
}

std::vector<BBox> label_components(const Mask& closed, const Mask& ink, int w, int h) {
  std::vector<std::uint8_t> seen(closed.size(), 0);
  std::vector<BBox> boxes;
  std::deque<std::pair<int, int>> queue;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const auto start = static_cast<std::size_t>(sy) * w + sx;
      if (!closed[start] || seen[start]) continue;
      // Bounding box of the original ink inside the component.
      int x0 = w, y0 = h, x1 = -1, y1 = -1;
      seen[start] = 1;
      queue.emplace_back(sx, sy);
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        if (ink[static_cast<std::size_t>(y) * w + x]) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto n = static_cast<std::size_t>(ny) * w + nx;
            if (closed[n] && !seen[n]) {
              seen[n] = 1;
              queue.emplace_back(nx, ny);
            }
          }
        }
      }
      if (x1 >= 0) boxes.push_back(BBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
    }
  }
  return boxes;
}

std::vector<BBox> merge_overlapping(std::vector<BBox> boxes) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < boxes.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (!boxes[i].intersects(boxes[j])) continue;
        const int x0 = std::min(boxes[i].x, boxes[j].x);
        const int y0 = std::min(boxes[i].y, boxes[j].y);
        const int x1 = std::max(boxes[i].right(), boxes[j].right());
        const int y1 = std::max(boxes[i].bottom(), boxes[j].bottom());
        boxes[i] = BBox{x0, y0, x1 - x0, y1 - y0};
        boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
        break;
      }
    }
  }
  return boxes;
}

/// Counts thin groups of consecutive rows (or columns) whose longest ink run
/// spans at least `span` of the block.
int count_rules(const Mask& ink, int w, const BBox& b, bool horizontal, const LayoutParams& p) {
  const int lines = horizontal ? b.height : b.width;
  const int length = horizontal ? b.width : b.height;
  const int need = static_cast<int>(std::ceil(p.grid_line_span * length));
  const int max_thickness =
      std::max(2, static_cast<int>(std::lround(p.grid_max_line_thickness * lines)));
  int count = 0;
  int run_of_rules = 0;
  auto flush = [&] {
    if (run_of_rules > 0 && run_of_rules <= max_thickness) ++count;
    run_of_rules = 0;
  };
  for (int i = 0; i < lines; ++i) {
    int best = 0;
    int current = 0;
    for (int k = 0; k < length; ++k) {
      const int x = horizontal ? b.x + k : b.x + i;
      const int y = horizontal ? b.y + i : b.y + k;
      current = ink[static_cast<std::size_t>(y) * w + x] ? current + 1 : 0;
      best = std::max(best, current);
    }
    if (best >= need) {
      ++run_of_rules;
    } else {
      flush();
    }
  }
  flush();
  return count;
}

int odd_at_least_3(double v) {
  int k = std::max(3, static_cast<int>(std::lround(v)));
  return k % 2 == 0 ? k + 1 : k;
}

}  // namespace

std::vector<Region> segment_regions(const GrayImage& image, const LayoutParams& params) {
  if (image.width() < params.min_image_side || image.height() < params.min_image_side) {
    throw Error(ErrorCode::InvalidInput, "segment_regions: image smaller than " +
                                             std::to_string(params.min_image_side) + " px");
  }
  const int w = image.width();
  const int h = image.height();
  const Mask ink = binarize(image, params);
  const int kw = odd_at_least_3(params.close_width * w);
  const int kh = odd_at_least_3(params.close_height * h);
  const Mask closed = close(ink, w, h, kw / 2, kh / 2);
  auto boxes = merge_overlapping(label_components(closed, ink, w, h));
  std::sort(boxes.begin(), boxes.end(),
            [](const BBox& a, const BBox& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });

  const Integral ink_sum(w, h, [&](int x, int y) { return ink[static_cast<std::size_t>(y) * w + x]; });
  const double image_area = static_cast<double>(w) * h;

  std::vector<Region> regions;
  std::optional<std::size_t> title;
  for (const auto& b : boxes) {
    const double area = static_cast<double>(b.width) * b.height;
    const double density =
        static_cast<double>(ink_sum.sum(b.x, b.y, b.right(), b.bottom())) / area;
    const bool text_like = density >= params.text_density_min &&
                           density <= params.text_density_max &&
                           b.height <= params.text_max_height * h;
    if (text_like) {
      regions.push_back(Region{RegionKind::BodyText, b, std::nullopt, std::nullopt});
      if (b.bottom() <= params.title_band * h &&
          (!title || b.height > regions[*title].bbox.height)) {
        title = regions.size() - 1;
      }
    } else if (count_rules(ink, w, b, true, params) >= params.grid_min_lines &&
               count_rules(ink, w, b, false, params) >= params.grid_min_lines) {
      regions.push_back(Region{RegionKind::Table, b, std::nullopt, std::nullopt});
    } else if (area >= params.figure_min_area * image_area) {
      regions.push_back(Region{RegionKind::Figure, b, std::nullopt, std::nullopt});
    }
  }
  if (title) regions[*title].kind = RegionKind::Title;
  return regions;
}

HttpOcrClient::HttpOcrClient(std::string url) : url_(std::move(url)) {}

std::string HttpOcrClient::recognize(std::span<const std::uint8_t> png) {
  const auto target = detail::split_url(url_);
  httplib::Client client(target.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  const auto res = client.Post(target.path, reinterpret_cast<const char*>(png.data()),
                               png.size(), "image/png");
  if (!res) {
    throw Error(ErrorCode::Transport,
                "ocr request to " + url_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::Transport,
                "ocr service " + url_ + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Transport, std::string("malformed ocr response: ") + e.what());
  }
}

std::vector<Region> attach_text(std::vector<Region> regions, const GrayImage& image,
                                OcrClient& ocr, AssetSink& assets, int segment_index) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    auto& r = regions[i];
    const auto crop = image.crop(r.bbox.x, r.bbox.y, r.bbox.width, r.bbox.height);
    if (r.kind == RegionKind::Title || r.kind == RegionKind::BodyText) {
      try {
        r.text = ocr.recognize(encode_png(crop));
      } catch (const std::exception& e) {
        throw Error(ErrorCode::Transport,
                    "ocr failed for region " + std::to_string(i) + ": " + e.what());
      }
    } else {
      char name[64];
      std::snprintf(name, sizeof name, "seg%03d-r%02zu-%s.png", segment_index, i,
                    r.kind == RegionKind::Table ? "table" : "figure");
      r.asset_ref = assets.put(name, encode_png(crop));
    }
  }
  return regions;
}

std::string extract_title(const std::vector<Region>& regions, int segment_index) {
  for (const auto& r : regions) {
    if (r.kind != RegionKind::Title || !r.text) continue;
    const auto& t = *r.text;
    const auto first = t.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string::npos) break;
    const auto last = t.find_last_not_of(" \t\r\n\f\v");
    return t.substr(first, last - first + 1);
  }
  return "Slide " + std::to_string(segment_index + 1);
}

}  // namespace lecturedeck
