#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lecturedeck/media_ingest.hpp"

namespace lecturedeck {

struct Cue {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string text;

  bool operator==(const Cue&) const = default;
};

enum class TranscriptSource { SubtitleFile, AsrClient };

struct Transcript {
  std::vector<Cue> cues;
  TranscriptSource source = TranscriptSource::SubtitleFile;
  /// Non-fatal problems found while parsing or acquiring (skipped blocks etc).
  std::vector<std::string> warnings;
};

/// cues_by_segment[s] lists transcript cue indices assigned to segment s.
struct Alignment {
  std::vector<std::vector<std::size_t>> cues_by_segment;

  bool operator==(const Alignment&) const = default;
};

Transcript parse_srt(std::string_view text);
Transcript parse_vtt(std::string_view text);

/// Serializes cues as SRT (1-based numbering, CRLF-free).
std::string format_srt(const Transcript& transcript);
std::string format_timestamp(std::int64_t ms, char millis_separator);

struct AsrRequest {
  std::string audio_ref;
  std::string language = "en";
};

class AsrClient {
 public:
  virtual ~AsrClient() = default;
  virtual std::vector<Cue> transcribe(const AsrRequest& request) = 0;
  /// The built-in stub reports true; acquisition then records a warning.
  virtual bool is_stub() const { return false; }
};

class StubAsrClient : public AsrClient {
 public:
  std::vector<Cue> transcribe(const AsrRequest&) override { return {}; }
  bool is_stub() const override { return true; }
};

/// POSTs {"audio_ref","language"} as JSON and expects a JSON array of
/// {"start_ms","end_ms","text"}.
class HttpAsrClient : public AsrClient {
 public:
  explicit HttpAsrClient(std::string url);
  std::vector<Cue> transcribe(const AsrRequest& request) override;

 private:
  std::string url_;
};

std::string asr_request_json(const AsrRequest& request);
/// Throws Error(Transport) when the body is not a well-formed cue list.
std::vector<Cue> parse_asr_response(std::string_view body);

/// Subtitle file wins over ASR. Format comes from the extension (.srt/.vtt),
/// falling back to sniffing for a WEBVTT header.
Transcript acquire_transcript(const std::optional<std::filesystem::path>& subtitle_file,
                              AsrClient& asr, const std::optional<std::string>& audio_ref,
                              const std::string& language = "en");

/// Assigns each cue to the segment it overlaps most (earlier segment on ties).
/// Cues overlapping nothing go to the segment with the nearest midpoint.
Alignment align_cues(const std::vector<SlideSegment>& segments, const Transcript& transcript);

}  // namespace lecturedeck
