#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lecturedeck/layout.hpp"
#include "lecturedeck/media_ingest.hpp"
#include "lecturedeck/transcript.hpp"

namespace lecturedeck {

using Json = nlohmann::ordered_json;

/// One slide of a VideoDocument, in document.json shape.
struct DocumentSegment {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string keyframe;
  std::string title;
  std::vector<Region> regions;
  std::string speech;
  std::vector<Cue> cues;

  bool operator==(const DocumentSegment&) const = default;
};

struct VideoDocument {
  std::string video_id;
  std::string title;
  std::int64_t duration_ms = 0;
  std::optional<std::string> source_ref;
  std::vector<DocumentSegment> segments;

  bool operator==(const VideoDocument&) const = default;
};

struct VideoMeta {
  std::string video_id;
  std::string title;
  std::int64_t duration_ms = 0;
  std::optional<std::string> source_ref;
};

struct PosterChapter {
  std::string title;
  std::int64_t start_ms = 0;
  std::vector<std::string> figure_refs;
  std::string summary;

  bool operator==(const PosterChapter&) const = default;
};

struct Poster {
  std::string video_id;
  std::vector<PosterChapter> chapters;

  bool operator==(const Poster&) const = default;
};

inline constexpr std::size_t kDefaultSummaryChars = 400;

bool is_valid_video_id(std::string_view id);
/// Lowercase ASCII slug of `title`, at most 64 chars; "video" when nothing survives.
std::string slugify(std::string_view title);

/// Joins slides, layouts and aligned cues. Throws Error(Consistency) when the
/// inputs disagree on segment count or the alignment is not a partition.
VideoDocument build_document(const std::vector<SlideSegment>& segments,
                             const Alignment& alignment,
                             const std::vector<SlideLayout>& layouts,
                             const Transcript& transcript, const VideoMeta& meta);

/// Throws Error(Consistency) naming the first violated invariant.
void validate_document(const VideoDocument& doc);

Poster build_poster(const VideoDocument& doc, std::size_t max_summary_chars = kDefaultSummaryChars);

/// Longest whole-sentence prefix within max_chars code points; a first
/// sentence that is too long is cut at a word boundary and gets "…".
std::string summarize_text(std::string_view text, std::size_t max_chars);

Json to_json(const VideoDocument& doc);
Json to_json(const DocumentSegment& segment);
Json to_json(const Poster& poster);
Json to_json(const Region& region);
Json to_json(const Cue& cue);

/// Throw Error(Format) describing the first schema violation.
VideoDocument document_from_json(const Json& j);
Poster poster_from_json(const Json& j);

/// "mm:ss", minutes not wrapped at the hour.
std::string format_clock(std::int64_t ms);

/// Markdown rendering: one "## <title> [mm:ss]" heading per chapter.
std::string poster_markdown(const Poster& poster, std::string_view video_title);

}  // namespace lecturedeck
