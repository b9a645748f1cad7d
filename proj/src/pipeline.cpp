#include "lecturedeck/pipeline.hpp"

#include <chrono>
#include <cstdio>

#include "lecturedeck/error.hpp"

namespace lecturedeck {

namespace fs = std::filesystem;

Json to_json(const IngestReport& r) {
  return Json{{"video_id", r.video_id},
              {"segment_count", r.segment_count},
              {"cue_count", r.cue_count},
              {"warnings", r.warnings},
              {"elapsed_ms", r.elapsed_ms}};
}

namespace {

std::string resolve_title(const IngestOptions& options) {
  if (options.title && !options.title->empty()) return *options.title;
  auto stem = options.source.filename().string();
  if (stem.empty()) stem = options.source.parent_path().filename().string();
  if (fs::is_regular_file(options.source)) stem = options.source.stem().string();
  return stem.empty() ? "Untitled" : stem;
}

std::string resolve_id(const IngestOptions& options, const std::string& title) {
  if (options.video_id) {
    if (!is_valid_video_id(*options.video_id)) {
      throw Error(ErrorCode::InvalidInput,
                  "video id must match [a-z0-9-]{1,64}: " + *options.video_id);
    }
    return *options.video_id;
  }
  return slugify(title);
}

}  // namespace

IngestResult process_video(const IngestOptions& options, FrameProvider& frames, OcrClient& ocr,
                           AsrClient& asr) {
  options.params.validate();
  const std::string title = resolve_title(options);
  const std::string video_id = resolve_id(options, title);

  const auto samples = sample_frames(frames, options.params);
  const std::int64_t duration =
      options.duration_ms.value_or(samples.back().timestamp_ms + options.params.sample_period_ms());
  auto segments = detect_boundaries(samples, options.params, duration);

  IngestResult out;
  out.assets = AssetBundle(video_id);
  std::vector<SlideLayout> layouts;
  for (auto& seg : segments) {
    const GrayImage image = frames.load(FrameInfo{seg.start_ms, seg.keyframe_ref});
    char name[32];
    std::snprintf(name, sizeof name, "keyframe-%03d.png", seg.index);
    seg.keyframe_ref = out.assets.put(name, encode_png(image));

    std::vector<Region> regions;
    try {
      regions = segment_regions(image, options.layout);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidInput) throw;
      out.warnings.push_back("segment " + std::to_string(seg.index) + ": layout skipped: " + e.what());
    }
    regions = attach_text(std::move(regions), image, ocr, out.assets, seg.index);
    SlideLayout layout;
    layout.segment_index = seg.index;
    layout.title = extract_title(regions, seg.index);
    layout.regions = std::move(regions);
    layouts.push_back(std::move(layout));
  }

  std::optional<std::string> audio_ref;
  if (fs::is_regular_file(options.source)) audio_ref = options.source.string();
  if (options.subtitles || audio_ref) {
    out.transcript = acquire_transcript(options.subtitles, asr, audio_ref, options.language);
  } else {
    out.transcript.source = TranscriptSource::SubtitleFile;
    out.transcript.warnings.push_back("no transcript: no subtitle file and no audio source");
  }
  for (const auto& w : out.transcript.warnings) out.warnings.push_back(w);

  const auto alignment = align_cues(segments, out.transcript);
  VideoMeta meta{video_id, title, duration, std::nullopt};
  if (fs::is_regular_file(options.source)) meta.source_ref = options.source.string();
  out.document = build_document(segments, alignment, layouts, out.transcript, meta);
  out.poster = build_poster(out.document, options.max_summary_chars);
  out.segments = std::move(segments);
  return out;
}

IngestReport ingest(const IngestOptions& options, const Store& store, OcrClient& ocr,
                    AsrClient& asr) {
  const auto started = std::chrono::steady_clock::now();
  std::error_code ec;
  if (!fs::exists(options.source, ec)) {
    throw Error(ErrorCode::Io, "source not found: " + options.source.string());
  }

  // Fail fast on duplicates before doing any work.
  const std::string video_id = resolve_id(options, resolve_title(options));
  for (const auto& e : store.list_videos()) {
    if (e.video_id == video_id) throw Error(ErrorCode::Conflict, "video already stored: " + video_id);
  }

  std::unique_ptr<FrameProvider> frames;
  if (fs::is_directory(options.source)) {
    frames = std::make_unique<DirectoryFrameProvider>(options.source);
  } else {
    frames = std::make_unique<DecoderFrameProvider>(options.source, options.decoder_template,
                                                    options.params.sample_rate_hz);
  }
  auto result = process_video(options, *frames, ocr, asr);

  StoreWriter writer(store);
  auto index = store.load_index();
  index.index_document(result.document);
  writer.save_document(result.document, result.poster, result.assets);
  writer.save_index(index);

  IngestReport report;
  report.video_id = result.document.video_id;
  report.segment_count = result.document.segments.size();
  report.cue_count = result.transcript.cues.size();
  report.warnings = std::move(result.warnings);
  report.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return report;
}

}  // namespace lecturedeck
