#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lecturedeck {

/// Receives binary assets produced during ingestion and hands back the
/// reference under which they will be served (`<video_id>/<file>`).
class AssetSink {
 public:
  virtual ~AssetSink() = default;
  virtual std::string put(std::string_view file_name, std::vector<std::uint8_t> bytes) = 0;
};

/// Collects assets in memory until the store writes them out.
class AssetBundle : public AssetSink {
 public:
  explicit AssetBundle(std::string video_id) : video_id_(std::move(video_id)) {}

  std::string put(std::string_view file_name, std::vector<std::uint8_t> bytes) override {
    files_[std::string(file_name)] = std::move(bytes);
    return video_id_ + "/" + std::string(file_name);
  }

  const std::string& video_id() const noexcept { return video_id_; }
  const std::map<std::string, std::vector<std::uint8_t>>& files() const noexcept {
    return files_;
  }

 private:
  std::string video_id_;
  std::map<std::string, std::vector<std::uint8_t>> files_;
};

}  // namespace lecturedeck
