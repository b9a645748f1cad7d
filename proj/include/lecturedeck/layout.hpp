#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lecturedeck/assets.hpp"
#include "lecturedeck/raster.hpp"

namespace lecturedeck {

enum class RegionKind { Title, BodyText, Figure, Table };

std::string_view to_string(RegionKind kind);
/// Throws Error(Format) on unknown names.
RegionKind region_kind_from_string(std::string_view name);

struct BBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const noexcept { return x + width; }
  int bottom() const noexcept { return y + height; }
  bool intersects(const BBox& o) const noexcept {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }
  bool operator==(const BBox&) const = default;
};

struct Region {
  RegionKind kind = RegionKind::BodyText;
  BBox bbox;
  std::optional<std::string> text;
  std::optional<std::string> asset_ref;

  bool operator==(const Region&) const = default;
};

struct SlideLayout {
  int segment_index = 0;
  std::vector<Region> regions;
  std::string title;

  bool operator==(const SlideLayout&) const = default;
};

/// Heuristic segmenter knobs. Fractions are relative to the image (or block)
/// dimensions.
struct LayoutParams {
  int min_image_side = 32;
  int ink_delta = 48;         // |pixel - page background| that counts as ink
  int local_radius = 7;       // adaptive mean window half-size
  int local_offset = 12;      // darker than local mean by this much counts as ink
  double close_width = 0.02;  // closing kernel, fraction of image width
  double close_height = 0.01;
  double text_density_min = 0.05;
  double text_density_max = 0.45;
  double text_max_height = 0.15;
  double title_band = 0.25;
  double grid_line_span = 0.60;
  int grid_min_lines = 2;
  double grid_max_line_thickness = 0.05;
  double figure_min_area = 0.02;
};

/// Binarize, close, label and classify. Regions come back sorted top-to-bottom
/// then left-to-right, pairwise disjoint, without text.
std::vector<Region> segment_regions(const GrayImage& image, const LayoutParams& params = {});

class OcrClient {
 public:
  virtual ~OcrClient() = default;
  virtual std::string recognize(std::span<const std::uint8_t> png) = 0;
};

class StubOcrClient : public OcrClient {
 public:
  std::string recognize(std::span<const std::uint8_t>) override { return {}; }
};

/// POSTs the crop as image/png and reads {"text": ...} from the JSON reply.
class HttpOcrClient : public OcrClient {
 public:
  explicit HttpOcrClient(std::string url);
  std::string recognize(std::span<const std::uint8_t> png) override;

 private:
  std::string url_;
};

/// OCR for Title/BodyText crops; Figure/Table crops are written to `assets`.
std::vector<Region> attach_text(std::vector<Region> regions, const GrayImage& image,
                                OcrClient& ocr, AssetSink& assets, int segment_index);

/// Trimmed Title text, or "Slide N" (1-based) when missing or blank.
std::string extract_title(const std::vector<Region>& regions, int segment_index);

}  // namespace lecturedeck
