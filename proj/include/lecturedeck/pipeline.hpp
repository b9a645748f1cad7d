#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lecturedeck/document.hpp"
#include "lecturedeck/layout.hpp"
#include "lecturedeck/media_ingest.hpp"
#include "lecturedeck/store.hpp"
#include "lecturedeck/transcript.hpp"

namespace lecturedeck {

struct IngestOptions {
  std::filesystem::path source;  // frame directory or video file
  std::optional<std::filesystem::path> subtitles;
  std::optional<std::string> title;
  std::optional<std::string> video_id;
  /// Defaults to last sample timestamp + one sample period.
  std::optional<std::int64_t> duration_ms;
  IngestParams params;
  LayoutParams layout;
  std::string decoder_template = DecoderFrameProvider::kDefaultTemplate;
  std::string language = "en";
  std::size_t max_summary_chars = kDefaultSummaryChars;
};

struct IngestReport {
  std::string video_id;
  std::size_t segment_count = 0;
  std::size_t cue_count = 0;
  std::vector<std::string> warnings;
  std::int64_t elapsed_ms = 0;
};

Json to_json(const IngestReport& report);

/// Everything the offline pass produces before it touches the store.
struct IngestResult {
  VideoDocument document;
  Poster poster;
  AssetBundle assets{""};
  Transcript transcript;
  std::vector<SlideSegment> segments;
  std::vector<std::string> warnings;
};

/// sample -> detect -> layout -> transcript -> align -> document -> poster.
IngestResult process_video(const IngestOptions& options, FrameProvider& frames,
                           OcrClient& ocr, AsrClient& asr);

/// process_video, then index and save under the store's writer lock.
IngestReport ingest(const IngestOptions& options, const Store& store, OcrClient& ocr,
                    AsrClient& asr);

}  // namespace lecturedeck
