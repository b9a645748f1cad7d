#include "lecturedeck/document.hpp"

#include <algorithm>
#include <cstdio>

#include "lecturedeck/error.hpp"
#include "lecturedeck/text.hpp"

namespace lecturedeck {

bool is_valid_video_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

std::string slugify(std::string_view title) {
  std::string out;
  for (char c : title) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) && u < 0x80) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  if (out.size() > 64) out.resize(64);
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "video" : out;
}

void validate_document(const VideoDocument& doc) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::Consistency, "document " + doc.video_id + ": " + why);
  };
  if (!is_valid_video_id(doc.video_id)) fail("video_id must match [a-z0-9-]{1,64}");
  if (doc.duration_ms < 0) fail("negative duration");
  std::int64_t expected_start = 0;
  for (std::size_t i = 0; i < doc.segments.size(); ++i) {
    const auto& s = doc.segments[i];
    if (s.index != static_cast<int>(i)) fail("segment index " + std::to_string(s.index) +
                                             " at position " + std::to_string(i));
    if (s.start_ms >= s.end_ms) fail("segment " + std::to_string(i) + " is empty");
    if (s.start_ms != expected_start) fail("segments do not tile the timeline");
    expected_start = s.end_ms;
    if (s.title.empty()) fail("segment " + std::to_string(i) + " has an empty title");
    if (std::count_if(s.regions.begin(), s.regions.end(),
                      [](const Region& r) { return r.kind == RegionKind::Title; }) > 1) {
      fail("segment " + std::to_string(i) + " has more than one Title region");
    }
  }
  if (!doc.segments.empty() && expected_start != doc.duration_ms) {
    fail("last segment does not end at duration_ms");
  }
}

VideoDocument build_document(const std::vector<SlideSegment>& segments,
                             const Alignment& alignment,
                             const std::vector<SlideLayout>& layouts,
                             const Transcript& transcript, const VideoMeta& meta) {
  if (alignment.cues_by_segment.size() != segments.size()) {
    throw Error(ErrorCode::Consistency,
                "alignment covers " + std::to_string(alignment.cues_by_segment.size()) +
                    " segments but there are " + std::to_string(segments.size()));
  }
  if (layouts.size() != segments.size()) {
    throw Error(ErrorCode::Consistency, "got " + std::to_string(layouts.size()) +
                                            " layouts for " + std::to_string(segments.size()) +
                                            " segments");
  }
  std::vector<int> used(transcript.cues.size(), 0);

  VideoDocument doc;
  doc.video_id = meta.video_id;
  doc.title = meta.title;
  doc.duration_ms = meta.duration_ms;
  doc.source_ref = meta.source_ref;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& layout = layouts[i];
    if (layout.segment_index != static_cast<int>(i) || segments[i].index != static_cast<int>(i)) {
      throw Error(ErrorCode::Consistency,
                  "segment/layout index mismatch at position " + std::to_string(i));
    }
    DocumentSegment seg;
    seg.index = static_cast<int>(i);
    seg.start_ms = segments[i].start_ms;
    seg.end_ms = segments[i].end_ms;
    seg.keyframe = segments[i].keyframe_ref;
    seg.title = layout.title.empty() ? extract_title(layout.regions, seg.index) : layout.title;
    seg.regions = layout.regions;
    for (auto& r : seg.regions) {
      if (r.kind == RegionKind::Title && text::trim(r.text.value_or("")).empty()) r.text = seg.title;
    }
    for (const auto c : alignment.cues_by_segment[i]) {
      if (c >= transcript.cues.size()) {
        throw Error(ErrorCode::Consistency, "alignment references cue " + std::to_string(c) +
                                                " of " + std::to_string(transcript.cues.size()));
      }
      ++used[c];
      if (!seg.speech.empty()) seg.speech += ' ';
      seg.speech += transcript.cues[c].text;
      seg.cues.push_back(transcript.cues[c]);
    }
    doc.segments.push_back(std::move(seg));
  }
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c] != 1) {
      throw Error(ErrorCode::Consistency, "cue " + std::to_string(c) + " assigned " +
                                              std::to_string(used[c]) + " times");
    }
  }
  validate_document(doc);
  return doc;
}

// ---------------------------------------------------------------------------
// Poster

std::string summarize_text(std::string_view input, std::size_t max_chars) {
  const std::string body = text::trim(input);
  if (body.empty() || max_chars == 0) return {};
  if (text::count_code_points(body) <= max_chars) return body;

  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t best_end = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if ((c == '.' || c == '?' || c == '!') && (i + 1 == body.size() || is_ws(body[i + 1]))) {
      if (text::count_code_points(std::string_view(body).substr(0, i + 1)) > max_chars) break;
      best_end = i + 1;
    }
  }
  if (best_end > 0) return body.substr(0, best_end);

  // First sentence alone is too long: cut at the last space before max_chars.
  std::size_t cp = 0;
  std::size_t cut = std::string::npos;
  std::size_t hard = 0;
  for (std::size_t i = 0; i < body.size() && cp < max_chars; ++i) {
    if ((static_cast<unsigned char>(body[i]) & 0xC0) == 0x80) continue;
    if (is_ws(body[i])) cut = i;
    if (cp + 1 < max_chars) {
      hard = i + 1;
      while (hard < body.size() && (static_cast<unsigned char>(body[hard]) & 0xC0) == 0x80) ++hard;
    }
    ++cp;
  }
  std::string out = cut != std::string::npos ? text::trim(body.substr(0, cut))
                                             : body.substr(0, max_chars > 1 ? hard : 0);
  return out + "…";
}

Poster build_poster(const VideoDocument& doc, std::size_t max_summary_chars) {
  Poster poster;
  poster.video_id = doc.video_id;
  std::size_t i = 0;
  while (i < doc.segments.size()) {
    const auto key = text::normalize_title(doc.segments[i].title);
    PosterChapter chapter;
    chapter.title = doc.segments[i].title;
    chapter.start_ms = doc.segments[i].start_ms;
    std::string speech;
    for (; i < doc.segments.size() && text::normalize_title(doc.segments[i].title) == key; ++i) {
      const auto& seg = doc.segments[i];
      for (const auto& r : seg.regions) {
        if ((r.kind == RegionKind::Figure || r.kind == RegionKind::Table) && r.asset_ref) {
          chapter.figure_refs.push_back(*r.asset_ref);
        }
      }
      if (!seg.speech.empty()) {
        if (!speech.empty()) speech += ' ';
        speech += seg.speech;
      }
    }
    chapter.summary = summarize_text(speech, max_summary_chars);
    poster.chapters.push_back(std::move(chapter));
  }
  return poster;
}

std::string format_clock(std::int64_t ms) {
  const std::int64_t total = std::max<std::int64_t>(0, ms) / 1000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(total / 60),
                static_cast<long long>(total % 60));
  return buf;
}

std::string poster_markdown(const Poster& poster, std::string_view video_title) {
  std::string out = "# " + std::string(video_title) + "\n";
  for (const auto& ch : poster.chapters) {
    out += "\n## " + ch.title + " [" + format_clock(ch.start_ms) + "]\n";
    for (const auto& f : ch.figure_refs) out += "\n![](" + f + ")\n";
    if (!ch.summary.empty()) out += "\n" + ch.summary + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json optional_string(const std::optional<std::string>& v) {
  return v ? Json(*v) : Json(nullptr);
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Format, where + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing \"") + key + "\"");
  return *it;
}

std::string get_string(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) schema_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& obj, const char* key,
                                               const std::string& where) {
  const auto& v = field(obj, key, where);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) schema_error(where + "." + key, "expected a string or null");
  return v.get<std::string>();
}

std::int64_t get_int(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

const Json& get_array(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_array()) schema_error(where + "." + key, "expected an array");
  return v;
}

Region region_from_json(const Json& j, const std::string& where) {
  Region r;
  try {
    r.kind = region_kind_from_string(get_string(j, "kind", where));
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
  const auto& bbox = get_array(j, "bbox", where);
  if (bbox.size() != 4 || !std::all_of(bbox.begin(), bbox.end(),
                                       [](const Json& v) { return v.is_number_integer(); })) {
    schema_error(where + ".bbox", "expected [x,y,w,h] integers");
  }
  r.bbox = BBox{bbox[0].get<int>(), bbox[1].get<int>(), bbox[2].get<int>(), bbox[3].get<int>()};
  r.text = get_optional_string(j, "text", where);
  r.asset_ref = get_optional_string(j, "asset", where);
  return r;
}

Cue cue_from_json(const Json& j, const std::string& where) {
  return Cue{get_int(j, "start_ms", where), get_int(j, "end_ms", where),
             get_string(j, "text", where)};
}

}  // namespace

Json to_json(const Region& r) {
  return Json{{"kind", std::string(to_string(r.kind))},
              {"bbox", Json::array({r.bbox.x, r.bbox.y, r.bbox.width, r.bbox.height})},
              {"text", optional_string(r.text)},
              {"asset", optional_string(r.asset_ref)}};
}

Json to_json(const Cue& c) {
  return Json{{"start_ms", c.start_ms}, {"end_ms", c.end_ms}, {"text", c.text}};
}

Json to_json(const DocumentSegment& s) {
  Json regions = Json::array();
  for (const auto& r : s.regions) regions.push_back(to_json(r));
  Json cues = Json::array();
  for (const auto& c : s.cues) cues.push_back(to_json(c));
  return Json{{"index", s.index},       {"start_ms", s.start_ms}, {"end_ms", s.end_ms},
              {"keyframe", s.keyframe}, {"title", s.title},       {"regions", std::move(regions)},
              {"speech", s.speech},     {"cues", std::move(cues)}};
}

Json to_json(const VideoDocument& doc) {
  Json segments = Json::array();
  for (const auto& s : doc.segments) segments.push_back(to_json(s));
  return Json{{"video_id", doc.video_id},
              {"title", doc.title},
              {"duration_ms", doc.duration_ms},
              {"source_ref", optional_string(doc.source_ref)},
              {"segments", std::move(segments)}};
}

Json to_json(const Poster& poster) {
  Json chapters = Json::array();
  for (const auto& ch : poster.chapters) {
    chapters.push_back(Json{{"title", ch.title},
                            {"start_ms", ch.start_ms},
                            {"figures", ch.figure_refs},
                            {"summary", ch.summary}});
  }
  return Json{{"video_id", poster.video_id}, {"chapters", std::move(chapters)}};
}

VideoDocument document_from_json(const Json& j) {
  VideoDocument doc;
  doc.video_id = get_string(j, "video_id", "document");
  doc.title = get_string(j, "title", "document");
  doc.duration_ms = get_int(j, "duration_ms", "document");
  doc.source_ref = get_optional_string(j, "source_ref", "document");
  const auto& segments = get_array(j, "segments", "document");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string where = "document.segments[" + std::to_string(i) + "]";
    const auto& js = segments[i];
    DocumentSegment s;
    s.index = static_cast<int>(get_int(js, "index", where));
    s.start_ms = get_int(js, "start_ms", where);
    s.end_ms = get_int(js, "end_ms", where);
    s.keyframe = get_string(js, "keyframe", where);
    s.title = get_string(js, "title", where);
    const auto& regions = get_array(js, "regions", where);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      s.regions.push_back(region_from_json(regions[r], where + ".regions[" + std::to_string(r) + "]"));
    }
    s.speech = get_string(js, "speech", where);
    const auto& cues = get_array(js, "cues", where);
    for (std::size_t c = 0; c < cues.size(); ++c) {
      s.cues.push_back(cue_from_json(cues[c], where + ".cues[" + std::to_string(c) + "]"));
    }
    doc.segments.push_back(std::move(s));
  }
  try {
    validate_document(doc);
  } catch (const Error& e) {
    schema_error("document", e.what());
  }
  return doc;
}

Poster poster_from_json(const Json& j) {
  Poster poster;
  poster.video_id = get_string(j, "video_id", "poster");
  const auto& chapters = get_array(j, "chapters", "poster");
  for (std::size_t i = 0; i < chapters.size(); ++i) {
    const std::string where = "poster.chapters[" + std::to_string(i) + "]";
    PosterChapter ch;
    ch.title = get_string(chapters[i], "title", where);
    ch.start_ms = get_int(chapters[i], "start_ms", where);
    for (const auto& f : get_array(chapters[i], "figures", where)) {
      if (!f.is_string()) schema_error(where + ".figures", "expected strings");
      ch.figure_refs.push_back(f.get<std::string>());
    }
    ch.summary = get_string(chapters[i], "summary", where);
    poster.chapters.push_back(std::move(ch));
  }
  return poster;
}

}  // namespace lecturedeck
