#pragma once

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lecturedeck/document.hpp"
#include "lecturedeck/media_ingest.hpp"
#include "lecturedeck/raster.hpp"
#include "lecturedeck/store.hpp"
#include "lecturedeck/transcript.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace lecturedeck;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "lecturedeck-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Image whose dHash is exactly `hash`: each 9-pixel row walks +-12 gray
/// levels from 128, then every cell is blown up to a scale x scale block so
/// the box average reproduces the grid exactly. Values stay in [32, 224].
inline GrayImage image_for_hash(Hash64 hash, int scale = 8) {
  GrayImage img(9 * scale, 8 * scale);
  int bit = 63;
  for (int r = 0; r < 8; ++r) {
    int v = 128;
    for (int c = 0; c < 9; ++c) {
      if (c > 0) {
        const bool brighter_left = (hash >> bit) & 1u;
        v += brighter_left ? -12 : 12;
        --bit;
      }
      img.fill_rect(c * scale, r * scale, scale, scale, static_cast<std::uint8_t>(v));
    }
  }
  return img;
}

inline Hash64 flip_bits(Hash64 h, int count, std::mt19937_64& rng) {
  std::vector<int> bits(64);
  for (int i = 0; i < 64; ++i) bits[i] = i;
  std::shuffle(bits.begin(), bits.end(), rng);
  for (int i = 0; i < count; ++i) h ^= Hash64{1} << bits[i];
  return h;
}

/// Writes `<ts>.png` frames for a sequence of slides. Slide k is shown for
/// `frames_per_slide[k]` frames spaced `period_ms` apart; each frame flips up
/// to `noise_bits` bits of its slide hash. Returns the slide start times.
inline std::vector<std::int64_t> write_slide_frames(const fs::path& dir,
                                                    const std::vector<Hash64>& slides,
                                                    const std::vector<int>& frames_per_slide,
                                                    std::int64_t period_ms, int noise_bits,
                                                    std::mt19937_64& rng) {
  fs::create_directories(dir);
  std::vector<std::int64_t> starts;
  std::int64_t ts = 0;
  std::uniform_int_distribution<int> noise(0, noise_bits);
  for (std::size_t k = 0; k < slides.size(); ++k) {
    starts.push_back(ts);
    for (int f = 0; f < frames_per_slide[k]; ++f) {
      char name[32];
      std::snprintf(name, sizeof name, "%08lld.png", static_cast<long long>(ts));
      save_png(image_for_hash(flip_bits(slides[k], noise(rng), rng)), dir / name);
      ts += period_ms;
    }
  }
  return starts;
}

/// Hashes that are pairwise `distance` bits apart from their predecessor.
inline std::vector<Hash64> slide_hashes(std::size_t count, int distance, std::mt19937_64& rng) {
  std::vector<Hash64> out{rng()};
  while (out.size() < count) out.push_back(flip_bits(out.back(), distance, rng));
  return out;
}

inline DocumentSegment make_segment(int index, std::int64_t start, std::int64_t end,
                                    const std::string& video_id, const std::string& title,
                                    const std::string& speech) {
  DocumentSegment s;
  s.index = index;
  s.start_ms = start;
  s.end_ms = end;
  s.keyframe = video_id + "/keyframe-" + std::to_string(index) + ".png";
  s.title = title;
  s.regions.push_back(Region{RegionKind::Title, BBox{10, 10, 200, 20}, title, std::nullopt});
  s.speech = speech;
  if (!speech.empty()) s.cues.push_back(Cue{start, end, speech});
  return s;
}

/// Each (slide title, speech) pair becomes a 10 s segment.
inline VideoDocument make_document(const std::string& id, const std::string& title,
                                   const std::vector<std::pair<std::string, std::string>>& slides) {
  VideoDocument doc;
  doc.video_id = id;
  doc.title = title;
  for (std::size_t i = 0; i < slides.size(); ++i) {
    const auto start = static_cast<std::int64_t>(i) * 10000;
    doc.segments.push_back(
        make_segment(static_cast<int>(i), start, start + 10000, id, slides[i].first, slides[i].second));
  }
  doc.duration_ms = static_cast<std::int64_t>(slides.size()) * 10000;
  return doc;
}

/// The three-video corpus with hand-checked BM25 scores.
inline std::vector<VideoDocument> bm25_fixture() {
  return {
      make_document("alpha", "Image Synthesis with GANs",
                    {{"Introduction", "image synthesis is the task of generating an image"},
                     {"Image Models", "we compare models"}}),
      make_document("beta", "Video Retrieval",
                    {{"Overview", "retrieval of image and video content"},
                     {"Results", "image image image results"}}),
      make_document("gamma", "Lecture Navigation",
                    {{"Image Browsing Interface", "navigation interface for lectures"}}),
  };
}

inline std::string random_word(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "gradient", "descent", "network", "layer", "pixel", "camera", "vector", "matrix",
      "loss", "kernel", "image", "video", "slide", "lecture", "tensor", "graph",
      "naïve", "Größe", "théorème", "数据", "Ωmega", "ok", "a"};
  return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
}

inline std::string random_sentence(std::mt19937_64& rng, int max_words = 12) {
  const int n = std::uniform_int_distribution<int>(1, max_words)(rng);
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += random_word(rng);
  }
  static const char* enders[] = {".", "?", "!", ",", ""};
  s += enders[std::uniform_int_distribution<int>(0, 4)(rng)];
  return s;
}

/// A schema-valid document with random tiling, regions and cues.
inline VideoDocument random_document(std::mt19937_64& rng, const std::string& id) {
  VideoDocument doc;
  doc.video_id = id;
  doc.title = random_sentence(rng, 5);
  if (rng() % 2) doc.source_ref = "/media/" + id + ".mp4";
  const int n = std::uniform_int_distribution<int>(1, 12)(rng);
  std::int64_t t = 0;
  std::uniform_int_distribution<std::int64_t> len(1, 60000);
  for (int i = 0; i < n; ++i) {
    DocumentSegment s;
    s.index = i;
    s.start_ms = t;
    t += len(rng);
    s.end_ms = t;
    s.keyframe = id + "/keyframe-" + std::to_string(i) + ".png";
    s.title = random_sentence(rng, 4);
    const int regions = std::uniform_int_distribution<int>(0, 4)(rng);
    std::uniform_int_distribution<int> coord(0, 600);
    for (int r = 0; r < regions; ++r) {
      Region reg;
      reg.kind = static_cast<RegionKind>(r == 0 ? rng() % 4 : 1 + rng() % 3);
      reg.bbox = BBox{coord(rng), coord(rng), 1 + coord(rng), 1 + coord(rng)};
      if (reg.kind == RegionKind::Title || reg.kind == RegionKind::BodyText) {
        if (rng() % 3) reg.text = random_sentence(rng);
      } else {
        reg.asset_ref = id + "/seg-" + std::to_string(i) + "-" + std::to_string(r) + ".png";
      }
      s.regions.push_back(std::move(reg));
    }
    const int cues = std::uniform_int_distribution<int>(0, 5)(rng);
    std::int64_t c = s.start_ms;
    for (int k = 0; k < cues; ++k) {
      const std::int64_t end = c + std::uniform_int_distribution<std::int64_t>(1, 5000)(rng);
      s.cues.push_back(Cue{c, end, random_sentence(rng)});
      if (!s.speech.empty()) s.speech += ' ';
      s.speech += s.cues.back().text;
      c = end;
    }
    doc.segments.push_back(std::move(s));
  }
  doc.duration_ms = t;
  return doc;
}

/// A store holding `docs`, their posters and a search index.
inline Store make_store(const fs::path& root, const std::vector<VideoDocument>& docs) {
  auto store = Store::create(root);
  StoreWriter writer(store);
  writer.set_clock([] { return std::chrono::system_clock::time_point{std::chrono::seconds{1790000000}}; });
  SearchIndex index;
  for (const auto& doc : docs) {
    AssetBundle assets(doc.video_id);
    for (const auto& s : doc.segments) {
      assets.put(fs::path(s.keyframe).filename().string(), encode_png(GrayImage(40, 40, 200)));
    }
    writer.save_document(doc, build_poster(doc), assets);
    index.index_document(doc);
  }
  writer.save_index(index);
  return store;
}

}  // namespace fixtures
