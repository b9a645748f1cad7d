#include "lecturedeck/search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lecturedeck/error.hpp"
#include "lecturedeck/text.hpp"

namespace lecturedeck {

std::string_view to_string(Field field) {
  switch (field) {
    case Field::VideoTitle: return "VideoTitle";
    case Field::SlideTitle: return "SlideTitle";
    case Field::Speech: return "Speech";
  }
  return "Speech";
}

Field field_from_string(std::string_view name) {
  if (name == "VideoTitle") return Field::VideoTitle;
  if (name == "SlideTitle") return Field::SlideTitle;
  if (name == "Speech") return Field::Speech;
  throw Error(ErrorCode::Format, "unknown field: " + std::string(name));
}

std::vector<Token> tokenize_with_offsets(std::string_view input) {
  const auto cps = text::decode_utf8(input);
  std::vector<Token> out;
  std::u32string current;
  std::size_t begin = 0;
  auto flush = [&](std::size_t end) {
    if (current.size() >= 2) out.push_back(Token{text::encode_utf8(current), begin, end});
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (text::is_alnum(cps[i])) {
      if (current.empty()) begin = i;
      current.push_back(text::to_lower(cps[i]));
    } else {
      flush(i);
    }
  }
  flush(cps.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(input)) out.push_back(std::move(t.term));
  return out;
}

double CorpusStats::average_length(Field f) const {
  if (document_count == 0) return 0.0;
  return static_cast<double>(total_length[static_cast<std::size_t>(f)]) /
         static_cast<double>(document_count);
}

namespace {

void add_terms(std::map<std::string, int>& counts, std::string_view text, std::int64_t& length) {
  for (auto& t : tokenize(text)) {
    ++counts[t];
    ++length;
  }
}

}  // namespace

const CorpusStats& SearchIndex::index_document(const VideoDocument& doc) {
  if (videos_.contains(doc.video_id)) {
    throw Error(ErrorCode::Conflict, "video already indexed: " + doc.video_id);
  }
  StoredVideo video;
  video.title = doc.title;

  std::vector<Posting> fresh;
  auto emit = [&](const std::map<std::string, int>& counts, Field field, int segment) {
    for (const auto& [term, tf] : counts) {
      postings_[term].push_back(Posting{doc.video_id, field, segment, tf});
    }
  };

  std::map<std::string, int> title_counts;
  add_terms(title_counts, doc.title, video.length[0]);
  emit(title_counts, Field::VideoTitle, -1);
  for (const auto& seg : doc.segments) {
    video.segment_starts.push_back(seg.start_ms);
    video.slide_titles.push_back(seg.title);
    video.speech.push_back(seg.speech);
    std::map<std::string, int> slide_counts;
    std::map<std::string, int> speech_counts;
    add_terms(slide_counts, seg.title, video.length[1]);
    add_terms(speech_counts, seg.speech, video.length[2]);
    emit(slide_counts, Field::SlideTitle, seg.index);
    emit(speech_counts, Field::Speech, seg.index);
  }

  ++stats_.document_count;
  for (std::size_t f = 0; f < kFieldCount; ++f) stats_.total_length[f] += video.length[f];
  videos_.emplace(doc.video_id, std::move(video));
  return stats_;
}

const CorpusStats& SearchIndex::remove(const std::string& video_id) {
  const auto it = videos_.find(video_id);
  if (it == videos_.end()) throw Error(ErrorCode::NotFound, "video not indexed: " + video_id);
  for (std::size_t f = 0; f < kFieldCount; ++f) stats_.total_length[f] -= it->second.length[f];
  --stats_.document_count;
  videos_.erase(it);
  for (auto p = postings_.begin(); p != postings_.end();) {
    std::erase_if(p->second, [&](const Posting& x) { return x.video_id == video_id; });
    p = p->second.empty() ? postings_.erase(p) : std::next(p);
  }
  return stats_;
}

std::vector<Posting> SearchIndex::postings(const std::string& term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? std::vector<Posting>{} : it->second;
}

std::string SearchIndex::snippet_for(const StoredVideo& video, Field field, int segment,
                                     const std::vector<std::string>& terms) const {
  const std::string& source = field == Field::VideoTitle   ? video.title
                              : field == Field::SlideTitle ? video.slide_titles[static_cast<std::size_t>(segment)]
                                                           : video.speech[static_cast<std::size_t>(segment)];
  const auto cps = text::decode_utf8(source);
  std::size_t center = 0;
  for (const auto& tok : tokenize_with_offsets(source)) {
    if (std::find(terms.begin(), terms.end(), tok.term) != terms.end()) {
      center = (tok.begin + tok.end) / 2;
      break;
    }
  }
  const std::size_t half = kSnippetChars / 2;
  std::size_t begin = center > half ? center - half : 0;
  const std::size_t end = std::min(cps.size(), begin + kSnippetChars);
  begin = end > kSnippetChars ? std::min(begin, end - kSnippetChars) : 0;
  return text::encode_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

std::vector<Hit> SearchIndex::search(std::string_view query, int limit) const {
  if (limit < 1) throw Error(ErrorCode::InvalidInput, "limit must be at least 1");
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty() || stats_.document_count == 0) return {};

  const double n = static_cast<double>(stats_.document_count);
  std::map<std::string, double> scores;
  std::map<std::string, std::set<std::pair<Field, int>>> matched;

  for (const auto& term : terms) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    // Field-level term frequency per video; postings are per segment.
    std::array<std::map<std::string, std::int64_t>, kFieldCount> tf;
    for (const auto& p : it->second) {
      tf[static_cast<std::size_t>(p.field)][p.video_id] += p.term_frequency;
      matched[p.video_id].insert({p.field, p.segment_index});
    }
    for (std::size_t f = 0; f < kFieldCount; ++f) {
      if (tf[f].empty()) continue;
      const double df = static_cast<double>(tf[f].size());
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double avgdl = stats_.average_length(static_cast<Field>(f));
      for (const auto& [video_id, freq] : tf[f]) {
        const double dl = static_cast<double>(videos_.at(video_id).length[f]);
        const double x = static_cast<double>(freq);
        const double norm = params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl);
        scores[video_id] += params_.boost[f] * idf * x * (params_.k1 + 1.0) / (x + norm);
      }
    }
  }

  std::vector<Hit> hits;
  for (const auto& [video_id, score] : scores) {
    const auto& video = videos_.at(video_id);
    Hit hit;
    hit.video_id = video_id;
    hit.title = video.title;
    hit.score = score;
    for (const auto& [field, segment] : matched[video_id]) {
      Match m;
      m.field = field;
      m.segment_index = segment;
      m.start_ms = segment >= 0 ? video.segment_starts[static_cast<std::size_t>(segment)]
                   : video.segment_starts.empty() ? 0
                                                  : video.segment_starts.front();
      m.snippet = snippet_for(video, field, segment, terms);
      hit.matches.push_back(std::move(m));
    }
    std::sort(hit.matches.begin(), hit.matches.end(), [](const Match& a, const Match& b) {
      return std::tie(a.start_ms, a.field, a.segment_index) <
             std::tie(b.start_ms, b.field, b.segment_index);
    });
    hits.push_back(std::move(hit));
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.score != b.score ? a.score > b.score : a.video_id < b.video_id;
  });
  if (hits.size() > static_cast<std::size_t>(limit)) hits.resize(static_cast<std::size_t>(limit));
  return hits;
}

// ---------------------------------------------------------------------------
// Persistence

Json SearchIndex::to_json() const {
  Json postings = Json::object();
  for (const auto& [term, list] : postings_) {
    Json arr = Json::array();
    for (const auto& p : list) {
      arr.push_back(Json::array({p.video_id, std::string(to_string(p.field)), p.segment_index,
                                 p.term_frequency}));
    }
    postings[term] = std::move(arr);
  }
  Json videos = Json::object();
  for (const auto& [id, v] : videos_) {
    videos[id] = Json{{"title", v.title},
                      {"segment_starts", v.segment_starts},
                      {"slide_titles", v.slide_titles},
                      {"speech", v.speech},
                      {"length", v.length}};
  }
  return Json{{"format_version", kFormatVersion},
              {"params", {{"k1", params_.k1}, {"b", params_.b}, {"boost", params_.boost}}},
              {"stats",
               {{"document_count", stats_.document_count},
                {"total_length", stats_.total_length}}},
              {"videos", std::move(videos)},
              {"postings", std::move(postings)}};
}

SearchIndex SearchIndex::from_json(const Json& j) {
  try {
    if (!j.is_object() || j.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::Format, "index: unsupported format_version");
    }
    Bm25Params params;
    params.k1 = j.at("params").at("k1").get<double>();
    params.b = j.at("params").at("b").get<double>();
    params.boost = j.at("params").at("boost").get<std::array<double, kFieldCount>>();
    SearchIndex index(params);
    index.stats_.document_count = j.at("stats").at("document_count").get<std::size_t>();
    index.stats_.total_length =
        j.at("stats").at("total_length").get<std::array<std::int64_t, kFieldCount>>();
    for (const auto& [id, v] : j.at("videos").items()) {
      StoredVideo video;
      video.title = v.at("title").get<std::string>();
      video.segment_starts = v.at("segment_starts").get<std::vector<std::int64_t>>();
      video.slide_titles = v.at("slide_titles").get<std::vector<std::string>>();
      video.speech = v.at("speech").get<std::vector<std::string>>();
      video.length = v.at("length").get<std::array<std::int64_t, kFieldCount>>();
      if (video.slide_titles.size() != video.segment_starts.size() ||
          video.speech.size() != video.segment_starts.size()) {
        throw Error(ErrorCode::Format, "index: inconsistent stored video " + id);
      }
      index.videos_.emplace(id, std::move(video));
    }
    for (const auto& [term, list] : j.at("postings").items()) {
      auto& out = index.postings_[term];
      for (const auto& p : list) {
        Posting posting{p.at(0).get<std::string>(), field_from_string(p.at(1).get<std::string>()),
                        p.at(2).get<int>(), p.at(3).get<int>()};
        const auto v = index.videos_.find(posting.video_id);
        if (v == index.videos_.end() || posting.term_frequency < 1 ||
            (posting.field == Field::VideoTitle) != (posting.segment_index == -1) ||
            posting.segment_index >= static_cast<int>(v->second.segment_starts.size())) {
          throw Error(ErrorCode::Format, "index: invalid posting for term " + term);
        }
        out.push_back(std::move(posting));
      }
    }
    if (index.stats_.document_count != index.videos_.size()) {
      throw Error(ErrorCode::Format, "index: document_count disagrees with stored videos");
    }
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("index: ") + e.what());
  }
}

Json to_json(const Hit& hit) {
  Json matches = Json::array();
  for (const auto& m : hit.matches) {
    matches.push_back(Json{{"segment_index", m.segment_index},
                           {"start_ms", m.start_ms},
                           {"field", std::string(to_string(m.field))},
                           {"snippet", m.snippet}});
  }
  return Json{{"video_id", hit.video_id},
              {"title", hit.title},
              {"score", hit.score},
              {"matches", std::move(matches)}};
}

Hit hit_from_json(const Json& j) {
  try {
    Hit hit;
    hit.video_id = j.at("video_id").get<std::string>();
    hit.title = j.at("title").get<std::string>();
    hit.score = j.at("score").get<double>();
    for (const auto& m : j.at("matches")) {
      hit.matches.push_back(Match{m.at("segment_index").get<int>(), m.at("start_ms").get<std::int64_t>(),
                                  field_from_string(m.at("field").get<std::string>()),
                                  m.at("snippet").get<std::string>()});
    }
    return hit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("hit: ") + e.what());
  }
}

}  // namespace lecturedeck
