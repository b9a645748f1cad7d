#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lecturedeck/raster.hpp"

namespace lecturedeck {

using Hash64 = std::uint64_t;

struct FrameSample {
  std::int64_t timestamp_ms = 0;
  Hash64 hash = 0;
  std::optional<std::string> frame_ref;

  bool operator==(const FrameSample&) const = default;
};

/// One slide on screen over [start_ms, end_ms).
struct SlideSegment {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string keyframe_ref;
  Hash64 hash = 0;

  bool operator==(const SlideSegment&) const = default;
};

struct IngestParams {
  double sample_rate_hz = 1.0;
  int hash_threshold = 10;
  std::int64_t min_segment_ms = 3000;

  /// Throws Error(InvalidInput) on out-of-range values.
  void validate() const;
  std::int64_t sample_period_ms() const;
};

/// Difference hash: box-average down to 9x8, then one bit per horizontal
/// neighbour pair (left brighter than right). Row 0 col 0 is the MSB.
Hash64 dhash64(const GrayImage& image);

int hamming(Hash64 a, Hash64 b) noexcept;

/// A decoded frame handed out by a FrameProvider.
struct FrameInfo {
  std::int64_t timestamp_ms = 0;
  std::optional<std::string> ref;
};

class FrameProvider {
 public:
  virtual ~FrameProvider() = default;

  /// Frames in presentation order.
  virtual std::vector<FrameInfo> frames() = 0;
  /// Must be safe to call concurrently for distinct frames.
  virtual GrayImage load(const FrameInfo& frame) const = 0;
  virtual std::string describe() const = 0;
};

/// Pre-extracted frames named `<timestamp_ms>.png|.jpg` (zero-padded, 6+ digits).
class DirectoryFrameProvider : public FrameProvider {
 public:
  explicit DirectoryFrameProvider(std::filesystem::path dir);

  std::vector<FrameInfo> frames() override;
  GrayImage load(const FrameInfo& frame) const override;
  std::string describe() const override { return dir_.string(); }

 private:
  std::filesystem::path dir_;
};

/// Runs an external decoder command that fills a temporary directory using
/// the frame directory convention, then reads it back. The template accepts
/// the placeholders {input}, {outdir} and {fps}.
class DecoderFrameProvider : public FrameProvider {
 public:
  static constexpr const char* kDefaultTemplate =
      "ffmpeg -nostdin -loglevel error -i '{input}' "
      "-vf 'fps={fps},settb=1/1000' -frame_pts 1 -vsync passthrough '{outdir}/%06d.png'";

  DecoderFrameProvider(std::filesystem::path input, std::string command_template,
                       double fps);
  ~DecoderFrameProvider() override;
  DecoderFrameProvider(const DecoderFrameProvider&) = delete;
  DecoderFrameProvider& operator=(const DecoderFrameProvider&) = delete;

  std::vector<FrameInfo> frames() override;
  GrayImage load(const FrameInfo& frame) const override;
  std::string describe() const override { return command_; }

  const std::string& command() const noexcept { return command_; }

 private:
  std::filesystem::path input_;
  std::filesystem::path outdir_;
  std::string command_;
  std::unique_ptr<DirectoryFrameProvider> decoded_;
};

/// In-memory frames, mostly for tests and synthetic pipelines.
class MemoryFrameProvider : public FrameProvider {
 public:
  void add(std::int64_t timestamp_ms, GrayImage image);

  std::vector<FrameInfo> frames() override;
  GrayImage load(const FrameInfo& frame) const override;
  std::string describe() const override { return "<memory>"; }

 private:
  std::vector<std::pair<std::int64_t, GrayImage>> frames_;
};

std::string expand_decoder_template(const std::string& tmpl, const std::string& input,
                                    const std::string& outdir, double fps);

/// Frames whose timestamp is at least one sample period after the previously
/// kept frame are hashed; the rest are skipped.
std::vector<FrameSample> sample_frames(FrameProvider& source, const IngestParams& params);

/// Cuts wherever consecutive hashes differ by more than the threshold, then
/// folds segments shorter than min_segment_ms into their successor (the final
/// one into its predecessor). Keyframe = sample nearest the segment midpoint.
std::vector<SlideSegment> detect_boundaries(const std::vector<FrameSample>& samples,
                                            const IngestParams& params,
                                            std::int64_t duration_ms);

}  // namespace lecturedeck
