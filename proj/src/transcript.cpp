#include "lecturedeck/transcript.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "http_url.hpp"
#include "lecturedeck/error.hpp"

namespace lecturedeck {

namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  if (text.substr(0, kBom.size()) == kBom) text.remove_prefix(kBom.size());
  std::vector<Line> lines;
  std::size_t number = 1;
  while (!text.empty()) {
    const auto nl = text.find_first_of("\r\n");
    if (nl == std::string_view::npos) {
      lines.push_back({number, text});
      break;
    }
    lines.push_back({number++, text.substr(0, nl)});
    const bool crlf = text[nl] == '\r' && nl + 1 < text.size() && text[nl + 1] == '\n';
    text.remove_prefix(nl + (crlf ? 2 : 1));
  }
  return lines;
}

std::vector<std::vector<Line>> split_blocks(const std::vector<Line>& lines) {
  std::vector<std::vector<Line>> blocks;
  std::vector<Line> current;
  for (const auto& line : lines) {
    if (trim(line.text).empty()) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(line);
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

std::optional<std::int64_t> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// [HH:]MM:SS(,|.)mmm
std::optional<std::int64_t> parse_time(std::string_view s, bool hours_optional) {
  s = trim(s);
  const auto frac = s.find_last_of(",.");
  if (frac == std::string_view::npos) return std::nullopt;
  const auto millis = s.substr(frac + 1);
  if (millis.size() != 3) return std::nullopt;
  std::vector<std::string_view> parts;
  std::string_view clock = s.substr(0, frac);
  while (true) {
    const auto colon = clock.find(':');
    parts.push_back(clock.substr(0, colon));
    if (colon == std::string_view::npos) break;
    clock.remove_prefix(colon + 1);
  }
  if (parts.size() != 3 && !(hours_optional && parts.size() == 2)) return std::nullopt;
  std::int64_t hours = 0;
  std::size_t p = 0;
  if (parts.size() == 3) {
    auto h = parse_number(parts[p++]);
    if (!h || *h < 0) return std::nullopt;
    hours = *h;
  }
  const auto minutes = parse_number(parts[p++]);
  const auto seconds = parse_number(parts[p]);
  const auto ms = parse_number(millis);
  if (!minutes || !seconds || !ms || parts[p - 1].size() != 2 || parts[p].size() != 2 ||
      *minutes < 0 || *minutes > 59 || *seconds < 0 || *seconds > 59 || *ms < 0) {
    return std::nullopt;
  }
  return ((hours * 60 + *minutes) * 60 + *seconds) * 1000 + *ms;
}

struct TimeLine {
  std::int64_t start;
  std::int64_t end;
};

std::optional<TimeLine> parse_time_line(std::string_view line, bool vtt) {
  const auto arrow = line.find("-->");
  if (arrow == std::string_view::npos) return std::nullopt;
  auto rest = trim(line.substr(arrow + 3));
  // Anything after the end timestamp is cue settings.
  const auto settings = rest.find_first_of(" \t");
  if (settings != std::string_view::npos) {
    if (!vtt) return std::nullopt;
    rest = rest.substr(0, settings);
  }
  const auto start = parse_time(line.substr(0, arrow), vtt);
  const auto end = parse_time(rest, vtt);
  if (!start || !end) return std::nullopt;
  return TimeLine{*start, *end};
}

std::string join_text(const std::vector<Line>& block, std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < block.size(); ++i) {
    // Collapse runs of whitespace inside the line as well.
    std::string_view t = trim(block[i].text);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (is_space(t[k])) {
        if (!out.empty() && out.back() != ' ') out += ' ';
      } else {
        if (k == 0 && !out.empty() && out.back() != ' ') out += ' ';
        out += t[k];
      }
    }
  }
  return out;
}

class CueCollector {
 public:
  void reject(const Line& line, std::string_view why) {
    if (!first_offending_) first_offending_ = line;
    warnings_.push_back("line " + std::to_string(line.number) + ": " + std::string(why));
  }

  void accept(const Line& time_line, const TimeLine& t, std::string text) {
    if (t.start >= t.end) {
      reject(time_line, "cue end not after start; skipped");
      return;
    }
    if (text.empty()) {
      reject(time_line, "cue without text; skipped");
      return;
    }
    cues_.push_back(Cue{t.start, t.end, std::move(text)});
  }

  Transcript finish(bool had_content, std::string_view format) {
    if (cues_.empty() && first_offending_ && had_content) {
      throw Error(ErrorCode::Format,
                  std::string(format) + ": no parseable cues; first offending line " +
                      std::to_string(first_offending_->number) + ": \"" +
                      std::string(first_offending_->text) + "\"");
    }
    std::stable_sort(cues_.begin(), cues_.end(), [](const Cue& a, const Cue& b) {
      return a.start_ms != b.start_ms ? a.start_ms < b.start_ms : a.end_ms < b.end_ms;
    });
    Transcript t;
    t.cues = std::move(cues_);
    t.source = TranscriptSource::SubtitleFile;
    t.warnings = std::move(warnings_);
    return t;
  }

 private:
  std::vector<Cue> cues_;
  std::vector<std::string> warnings_;
  std::optional<Line> first_offending_;
};

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  if (line.substr(0, keyword.size()) != keyword) return false;
  return line.size() == keyword.size() || is_space(line[keyword.size()]);
}

}  // namespace

Transcript parse_srt(std::string_view text) {
  const auto lines = split_lines(text);
  const auto blocks = split_blocks(lines);
  CueCollector collector;
  for (const auto& block : blocks) {
    // Index line is optional in the wild; the time line is first or second.
    std::size_t time_idx = block.size();
    for (std::size_t i = 0; i < std::min<std::size_t>(2, block.size()); ++i) {
      if (block[i].text.find("-->") != std::string_view::npos) {
        time_idx = i;
        break;
      }
    }
    if (time_idx == block.size()) {
      collector.reject(block.front(), "block without time line; skipped");
      continue;
    }
    const auto t = parse_time_line(block[time_idx].text, false);
    if (!t) {
      collector.reject(block[time_idx], "malformed time line; skipped");
      continue;
    }
    collector.accept(block[time_idx], *t, join_text(block, time_idx + 1));
  }
  return collector.finish(!blocks.empty(), "srt");
}

Transcript parse_vtt(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || !starts_with_keyword(lines.front().text, "WEBVTT")) {
    throw Error(ErrorCode::Format, "vtt: missing WEBVTT header");
  }
  const auto blocks = split_blocks(lines);
  CueCollector collector;
  bool had_cue_blocks = false;
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    const auto first = trim(block.front().text);
    if (starts_with_keyword(first, "NOTE") || starts_with_keyword(first, "STYLE") ||
        starts_with_keyword(first, "REGION")) {
      continue;
    }
    had_cue_blocks = true;
    std::size_t time_idx = block.size();
    for (std::size_t i = 0; i < std::min<std::size_t>(2, block.size()); ++i) {
      if (block[i].text.find("-->") != std::string_view::npos) {
        time_idx = i;
        break;
      }
    }
    if (time_idx == block.size()) {
      collector.reject(block.front(), "block without time line; skipped");
      continue;
    }
    const auto t = parse_time_line(block[time_idx].text, true);
    if (!t) {
      collector.reject(block[time_idx], "malformed time line; skipped");
      continue;
    }
    collector.accept(block[time_idx], *t, join_text(block, time_idx + 1));
  }
  return collector.finish(had_cue_blocks, "vtt");
}

std::string format_timestamp(std::int64_t ms, char millis_separator) {
  const std::int64_t h = ms / 3'600'000;
  const std::int64_t m = (ms / 60'000) % 60;
  const std::int64_t s = (ms / 1000) % 60;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld%c%03lld", static_cast<long long>(h),
                static_cast<long long>(m), static_cast<long long>(s), millis_separator,
                static_cast<long long>(ms % 1000));
  return buf;
}

std::string format_srt(const Transcript& transcript) {
  std::string out;
  for (std::size_t i = 0; i < transcript.cues.size(); ++i) {
    const auto& cue = transcript.cues[i];
    out += std::to_string(i + 1) + "\n";
    out += format_timestamp(cue.start_ms, ',') + " --> " + format_timestamp(cue.end_ms, ',') + "\n";
    out += cue.text + "\n\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASR

std::string asr_request_json(const AsrRequest& request) {
  return nlohmann::ordered_json{{"audio_ref", request.audio_ref},
                                {"language", request.language}}
      .dump();
}

std::vector<Cue> parse_asr_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (!j.is_array()) throw Error(ErrorCode::Transport, "asr response is not a JSON array");
    std::vector<Cue> cues;
    for (const auto& item : j) {
      cues.push_back(Cue{item.at("start_ms").get<std::int64_t>(),
                         item.at("end_ms").get<std::int64_t>(),
                         item.at("text").get<std::string>()});
    }
    return cues;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Transport, std::string("malformed asr response: ") + e.what());
  }
}

HttpAsrClient::HttpAsrClient(std::string url) : url_(std::move(url)) {}

std::vector<Cue> HttpAsrClient::transcribe(const AsrRequest& request) {
  const auto target = detail::split_url(url_);
  httplib::Client client(target.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(600);
  const auto res = client.Post(target.path, asr_request_json(request), "application/json");
  if (!res) {
    throw Error(ErrorCode::Transport,
                "asr request to " + url_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::Transport, "asr service " + url_ + " returned HTTP " +
                                          std::to_string(res->status) + ": " + res->body);
  }
  return parse_asr_response(res->body);
}

Transcript acquire_transcript(const std::optional<std::filesystem::path>& subtitle_file,
                              AsrClient& asr, const std::optional<std::string>& audio_ref,
                              const std::string& language) {
  if (subtitle_file) {
    std::ifstream in(*subtitle_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read subtitle file: " + subtitle_file->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    auto ext = subtitle_file->extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".srt") return parse_srt(text);
    if (ext == ".vtt") return parse_vtt(text);
    auto body = std::string_view(text);
    if (body.substr(0, kBom.size()) == kBom) body.remove_prefix(kBom.size());
    return starts_with_keyword(body.substr(0, body.find_first_of("\r\n")), "WEBVTT")
               ? parse_vtt(text)
               : parse_srt(text);
  }
  if (!audio_ref) {
    throw Error(ErrorCode::InvalidInput, "acquire_transcript: neither subtitles nor audio given");
  }

  Transcript t;
  t.source = TranscriptSource::AsrClient;
  if (asr.is_stub()) {
    t.warnings.push_back("no transcript: no subtitle file and ASR client is the stub");
    return t;
  }
  std::vector<Cue> raw;
  try {
    raw = asr.transcribe(AsrRequest{*audio_ref, language});
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Transport, std::string("asr client failed: ") + e.what());
  }
  for (auto& cue : raw) {
    const auto text = std::string(trim(cue.text));
    if (cue.start_ms >= cue.end_ms || text.empty()) {
      t.warnings.push_back("asr cue at " + std::to_string(cue.start_ms) + " ms skipped");
      continue;
    }
    t.cues.push_back(Cue{cue.start_ms, cue.end_ms, text});
  }
  std::stable_sort(t.cues.begin(), t.cues.end(), [](const Cue& a, const Cue& b) {
    return a.start_ms != b.start_ms ? a.start_ms < b.start_ms : a.end_ms < b.end_ms;
  });
  return t;
}

// ---------------------------------------------------------------------------
// Alignment

Alignment align_cues(const std::vector<SlideSegment>& segments, const Transcript& transcript) {
  if (segments.empty()) throw Error(ErrorCode::InvalidInput, "align_cues: no segments");

  std::vector<std::int64_t> starts;
  std::vector<std::int64_t> doubled_mid;
  starts.reserve(segments.size());
  for (const auto& s : segments) {
    starts.push_back(s.start_ms);
    doubled_mid.push_back(s.start_ms + s.end_ms);
  }

  Alignment out;
  out.cues_by_segment.resize(segments.size());
  for (std::size_t c = 0; c < transcript.cues.size(); ++c) {
    const auto& cue = transcript.cues[c];
    auto it = std::upper_bound(starts.begin(), starts.end(), cue.start_ms);
    std::size_t idx = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;

    std::size_t best = segments.size();
    std::int64_t best_overlap = 0;
    for (std::size_t s = idx; s < segments.size() && segments[s].start_ms < cue.end_ms; ++s) {
      const std::int64_t ov = std::min(cue.end_ms, segments[s].end_ms) -
                              std::max(cue.start_ms, segments[s].start_ms);
      if (ov > best_overlap) {
        best_overlap = ov;
        best = s;
      }
    }

    if (best == segments.size()) {
      const std::int64_t cue_mid = cue.start_ms + cue.end_ms;
      auto m = std::lower_bound(doubled_mid.begin(), doubled_mid.end(), cue_mid);
      std::size_t right = static_cast<std::size_t>(m - doubled_mid.begin());
      if (right == segments.size()) {
        best = segments.size() - 1;
      } else if (right == 0) {
        best = 0;
      } else {
        const std::int64_t d_left = cue_mid - doubled_mid[right - 1];
        const std::int64_t d_right = doubled_mid[right] - cue_mid;
        best = d_left <= d_right ? right - 1 : right;
      }
    }
    out.cues_by_segment[best].push_back(c);
  }
  return out;
}

}  // namespace lecturedeck
