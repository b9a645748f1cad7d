#include "lecturedeck/media_ingest.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include "lecturedeck/error.hpp"

namespace lecturedeck {

namespace fs = std::filesystem;

void IngestParams::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::InvalidInput, "sample_rate_hz must be positive");
  }
  if (hash_threshold < 0 || hash_threshold > 64) {
    throw Error(ErrorCode::InvalidInput, "hash_threshold must be in [0, 64]");
  }
  if (min_segment_ms < 0) {
    throw Error(ErrorCode::InvalidInput, "min_segment_ms must be non-negative");
  }
}

std::int64_t IngestParams::sample_period_ms() const {
  return std::max<std::int64_t>(1, std::llround(1000.0 / sample_rate_hz));
}

Hash64 dhash64(const GrayImage& image) {
  constexpr int kCols = 9;
  constexpr int kRows = 8;
  if (image.empty()) throw Error(ErrorCode::InvalidInput, "dhash64: empty image");
  const int w = image.width();
  const int h = image.height();
  if (w < kCols || h < kRows) {
    throw Error(ErrorCode::InvalidInput, "dhash64: image smaller than 9x8");
  }

  // Exact box averaging in integer arithmetic: pixel x covers [9x, 9x+9) and
  // column bin c covers [cW, cW+W) on a common grid (rows likewise with 8/H).
  // Every bin has the same total weight, so raw sums compare like means.
  auto overlap = [](std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
    return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
  };

  std::vector<std::array<std::int64_t, kRows>> column_sums(static_cast<std::size_t>(w));
  for (auto& col : column_sums) col.fill(0);
  for (int y = 0; y < h; ++y) {
    const std::int64_t y0 = static_cast<std::int64_t>(y) * kRows;
    const int first_bin = static_cast<int>(y0 / h);
    for (int r = first_bin; r < kRows && static_cast<std::int64_t>(r) * h < y0 + kRows; ++r) {
      const std::int64_t wy = overlap(y0, y0 + kRows, static_cast<std::int64_t>(r) * h,
                                      static_cast<std::int64_t>(r + 1) * h);
      if (wy == 0) continue;
      for (int x = 0; x < w; ++x) column_sums[static_cast<std::size_t>(x)][r] += wy * image.at(x, y);
    }
  }

  std::array<std::array<std::int64_t, kCols>, kRows> bins{};
  for (int x = 0; x < w; ++x) {
    const std::int64_t x0 = static_cast<std::int64_t>(x) * kCols;
    const int first_bin = static_cast<int>(x0 / w);
    for (int c = first_bin; c < kCols && static_cast<std::int64_t>(c) * w < x0 + kCols; ++c) {
      const std::int64_t wx = overlap(x0, x0 + kCols, static_cast<std::int64_t>(c) * w,
                                      static_cast<std::int64_t>(c + 1) * w);
      if (wx == 0) continue;
      for (int r = 0; r < kRows; ++r) bins[r][c] += wx * column_sums[static_cast<std::size_t>(x)][r];
    }
  }

  Hash64 hash = 0;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c + 1 < kCols; ++c) {
      hash = (hash << 1) | (bins[r][c] > bins[r][c + 1] ? 1u : 0u);
    }
  }
  return hash;
}

int hamming(Hash64 a, Hash64 b) noexcept { return std::popcount(a ^ b); }

// ---------------------------------------------------------------------------
// Frame providers

namespace {

bool is_frame_file(const fs::path& p, std::int64_t& timestamp_ms) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") return false;
  const auto stem = p.stem().string();
  if (stem.size() < 6 || stem.size() > 15) return false;
  if (!std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return false;
  }
  timestamp_ms = std::stoll(stem);
  return true;
}

}  // namespace

DirectoryFrameProvider::DirectoryFrameProvider(fs::path dir) : dir_(std::move(dir)) {}

std::vector<FrameInfo> DirectoryFrameProvider::frames() {
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) {
    throw Error(ErrorCode::Io, "frame directory not readable: " + dir_.string());
  }
  std::vector<std::pair<std::string, FrameInfo>> found;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    std::int64_t ts = 0;
    if (entry.is_regular_file() && is_frame_file(entry.path(), ts)) {
      found.push_back({entry.path().filename().string(), FrameInfo{ts, entry.path().string()}});
    }
  }
  if (ec) throw Error(ErrorCode::Io, "cannot list frame directory: " + dir_.string());
  // Zero-padded names: lexicographic order is chronological.
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<FrameInfo> out;
  out.reserve(found.size());
  for (auto& [name, info] : found) out.push_back(std::move(info));
  return out;
}

GrayImage DirectoryFrameProvider::load(const FrameInfo& frame) const {
  if (!frame.ref) throw Error(ErrorCode::Io, "frame without path in " + dir_.string());
  return load_image(*frame.ref);
}

std::string expand_decoder_template(const std::string& tmpl, const std::string& input,
                                    const std::string& outdir, double fps) {
  std::ostringstream fps_text;
  fps_text << fps;
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    auto try_sub = [&](std::string_view key, const std::string& value) {
      if (tmpl.compare(i, key.size(), key) == 0) {
        out += value;
        i += key.size();
        return true;
      }
      return false;
    };
    if (try_sub("{input}", input) || try_sub("{outdir}", outdir) ||
        try_sub("{fps}", fps_text.str())) {
      continue;
    }
    out += tmpl[i++];
  }
  return out;
}

DecoderFrameProvider::DecoderFrameProvider(fs::path input, std::string command_template,
                                           double fps)
    : input_(std::move(input)) {
  std::random_device rd;
  std::mt19937_64 rng(rd());
  outdir_ = fs::temp_directory_path() /
            ("lecturedeck-frames-" + std::to_string(rng() % 1000000000ULL));
  command_ = expand_decoder_template(command_template, input_.string(), outdir_.string(), fps);
}

DecoderFrameProvider::~DecoderFrameProvider() {
  std::error_code ec;
  fs::remove_all(outdir_, ec);
}

std::vector<FrameInfo> DecoderFrameProvider::frames() {
  if (!decoded_) {
    std::error_code ec;
    if (!fs::exists(input_, ec)) {
      throw Error(ErrorCode::Io, "video source not readable: " + input_.string());
    }
    fs::create_directories(outdir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + outdir_.string());
    const int status = std::system(command_.c_str());
    if (status != 0) {
      throw Error(ErrorCode::Io, "decoder command failed (status " + std::to_string(status) +
                                     "): " + command_);
    }
    decoded_ = std::make_unique<DirectoryFrameProvider>(outdir_);
  }
  return decoded_->frames();
}

GrayImage DecoderFrameProvider::load(const FrameInfo& frame) const {
  if (!decoded_) throw Error(ErrorCode::Io, "decoder has not run: " + command_);
  return decoded_->load(frame);
}

void MemoryFrameProvider::add(std::int64_t timestamp_ms, GrayImage image) {
  frames_.emplace_back(timestamp_ms, std::move(image));
}

std::vector<FrameInfo> MemoryFrameProvider::frames() {
  std::vector<FrameInfo> out;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    out.push_back({frames_[i].first, "memory:" + std::to_string(i)});
  }
  return out;
}

GrayImage MemoryFrameProvider::load(const FrameInfo& frame) const {
  if (!frame.ref || frame.ref->rfind("memory:", 0) != 0) {
    throw Error(ErrorCode::Io, "not a memory frame");
  }
  const auto i = std::stoul(frame.ref->substr(7));
  if (i >= frames_.size()) throw Error(ErrorCode::Io, "memory frame out of range");
  return frames_[i].second;
}

// ---------------------------------------------------------------------------
// Sampling and segmentation

std::vector<FrameSample> sample_frames(FrameProvider& source, const IngestParams& params) {
  params.validate();
  const auto all = source.frames();
  if (all.empty()) throw Error(ErrorCode::Io, "no frames from " + source.describe());

  const std::int64_t period = params.sample_period_ms();
  std::vector<FrameInfo> picked;
  for (const auto& f : all) {
    if (f.timestamp_ms < 0) {
      throw Error(ErrorCode::Io, "negative frame timestamp in " + source.describe());
    }
    if (!picked.empty() && f.timestamp_ms <= picked.back().timestamp_ms) {
      throw Error(ErrorCode::Io, "frame timestamps not increasing in " + source.describe());
    }
    if (picked.empty() || f.timestamp_ms >= picked.back().timestamp_ms + period) {
      picked.push_back(f);
    }
  }

  std::vector<FrameSample> samples(picked.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  const std::size_t chunk = (picked.size() + workers - 1) / workers;
  std::vector<std::future<void>> jobs;
  for (std::size_t begin = 0; begin < picked.size(); begin += chunk) {
    const std::size_t end = std::min(picked.size(), begin + chunk);
    jobs.push_back(std::async(std::launch::async, [&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        samples[i] = FrameSample{picked[i].timestamp_ms, dhash64(source.load(picked[i])),
                                 picked[i].ref};
      }
    }));
  }
  for (auto& job : jobs) job.get();
  return samples;
}

std::vector<SlideSegment> detect_boundaries(const std::vector<FrameSample>& samples,
                                            const IngestParams& params,
                                            std::int64_t duration_ms) {
  params.validate();
  if (samples.empty()) throw Error(ErrorCode::InvalidInput, "detect_boundaries: no samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].timestamp_ms <= samples[i - 1].timestamp_ms) {
      throw Error(ErrorCode::InvalidInput, "detect_boundaries: samples not sorted");
    }
  }
  if (samples.front().timestamp_ms < 0 || duration_ms <= samples.back().timestamp_ms) {
    throw Error(ErrorCode::InvalidInput,
                "detect_boundaries: duration must exceed the last sample timestamp");
  }

  std::vector<std::int64_t> cuts;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (hamming(samples[i - 1].hash, samples[i].hash) > params.hash_threshold) {
      cuts.push_back(samples[i].timestamp_ms);
    }
  }

  // Forward merge: a segment closes at the first cut leaving it long enough.
  std::vector<std::int64_t> starts{0};
  for (const auto cut : cuts) {
    if (cut - starts.back() >= params.min_segment_ms) starts.push_back(cut);
  }
  // Short tail folds backward.
  if (starts.size() > 1 && duration_ms - starts.back() < params.min_segment_ms) {
    starts.pop_back();
  }

  std::vector<SlideSegment> segments;
  segments.reserve(starts.size());
  auto sample_it = samples.begin();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::int64_t start = starts[i];
    const std::int64_t end = i + 1 < starts.size() ? starts[i + 1] : duration_ms;
    const FrameSample* best = nullptr;
    std::int64_t best_dist = 0;
    while (sample_it != samples.end() && sample_it->timestamp_ms < end) {
      const std::int64_t dist = std::llabs(2 * sample_it->timestamp_ms - (start + end));
      if (best == nullptr || dist < best_dist) {
        best = &*sample_it;
        best_dist = dist;
      }
      ++sample_it;
    }
    SlideSegment seg;
    seg.index = static_cast<int>(i);
    seg.start_ms = start;
    seg.end_ms = end;
    if (best != nullptr) {
      seg.keyframe_ref = best->frame_ref.value_or("");
      seg.hash = best->hash;
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace lecturedeck
