#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lecturedeck/document.hpp"

namespace lecturedeck {

enum class Field { VideoTitle = 0, SlideTitle = 1, Speech = 2 };
inline constexpr std::size_t kFieldCount = 3;

std::string_view to_string(Field field);
Field field_from_string(std::string_view name);

struct Token {
  std::string term;
  std::size_t begin = 0;  // code point offsets into the source text
  std::size_t end = 0;
};

/// Lowercase, split on non-alphanumerics, drop tokens shorter than 2 code points.
std::vector<std::string> tokenize(std::string_view text);
std::vector<Token> tokenize_with_offsets(std::string_view text);

struct Posting {
  std::string video_id;
  Field field = Field::Speech;
  int segment_index = -1;  // -1 for VideoTitle
  int term_frequency = 1;

  bool operator==(const Posting&) const = default;
};

struct Match {
  int segment_index = -1;
  std::int64_t start_ms = 0;
  Field field = Field::Speech;
  std::string snippet;

  bool operator==(const Match&) const = default;
};

struct Hit {
  std::string video_id;
  std::string title;
  double score = 0.0;
  std::vector<Match> matches;

  bool operator==(const Hit&) const = default;
};

struct CorpusStats {
  std::size_t document_count = 0;
  /// Token totals per field, summed over videos.
  std::array<std::int64_t, kFieldCount> total_length{};

  double average_length(Field f) const;
  bool operator==(const CorpusStats&) const = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  std::array<double, kFieldCount> boost{2.0, 1.5, 1.0};
};

inline constexpr std::size_t kSnippetChars = 160;

/// Inverted index over video titles, slide titles and speech. Each field of
/// each video is one BM25 document; field scores are boosted and summed.
class SearchIndex {
 public:
  static constexpr int kFormatVersion = 1;

  explicit SearchIndex(Bm25Params params = {}) : params_(params) {}

  /// Throws Error(Conflict) if the video is already indexed.
  const CorpusStats& index_document(const VideoDocument& doc);
  /// Throws Error(NotFound) for unknown ids.
  const CorpusStats& remove(const std::string& video_id);

  /// Throws Error(InvalidInput) when limit < 1.
  std::vector<Hit> search(std::string_view query, int limit = 10) const;

  bool contains(const std::string& video_id) const { return videos_.contains(video_id); }
  const CorpusStats& stats() const noexcept { return stats_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::vector<Posting> postings(const std::string& term) const;

  Json to_json() const;
  /// Throws Error(Format) on malformed input or an unknown format_version.
  static SearchIndex from_json(const Json& j);

 private:
  struct StoredVideo {
    std::string title;
    std::vector<std::int64_t> segment_starts;
    std::vector<std::string> slide_titles;
    std::vector<std::string> speech;
    std::array<std::int64_t, kFieldCount> length{};
  };

  std::string snippet_for(const StoredVideo& video, Field field, int segment,
                          const std::vector<std::string>& terms) const;

  Bm25Params params_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::map<std::string, StoredVideo> videos_;
  CorpusStats stats_;
};

Json to_json(const Hit& hit);
Hit hit_from_json(const Json& j);

}  // namespace lecturedeck
