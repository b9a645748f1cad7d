#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lecturedeck/assets.hpp"
#include "lecturedeck/document.hpp"
#include "lecturedeck/search.hpp"

namespace lecturedeck {

struct ManifestEntry {
  std::string video_id;
  std::string title;
  std::string ingested_at;  // ISO-8601 UTC, e.g. 2026-10-16T08:30:00Z
  std::int64_t duration_ms = 0;

  bool operator==(const ManifestEntry&) const = default;
};

Json to_json(const ManifestEntry& entry);

/// File-tree store:
///   manifest.json
///   index.json
///   videos/<id>/document.json, videos/<id>/poster.json
///   assets/<id>/*.png
/// Reads are safe from any number of threads; writes go through StoreWriter.
class Store {
 public:
  /// Opens an existing store. Throws Error(Io) if the root is not a directory.
  static Store open(const std::filesystem::path& root);
  /// Creates the directory skeleton (and an empty manifest) when missing.
  static Store create(const std::filesystem::path& root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Sorted by title, then video_id. Throws Error(CorruptStore).
  std::vector<ManifestEntry> list_videos() const;
  /// Throw Error(NotFound) or Error(CorruptStore).
  VideoDocument load_document(const std::string& video_id) const;
  Poster load_poster(const std::string& video_id) const;
  /// Empty index when index.json does not exist yet.
  SearchIndex load_index() const;

  /// Resolves `<video_id>/<file>` under assets/. Throws Error(InvalidInput) for
  /// traversal attempts and Error(NotFound) when the file does not exist.
  std::filesystem::path asset_path(std::string_view ref) const;

 private:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path root_;
};

/// Exclusive writer; holds root/.lock for its lifetime.
class StoreWriter {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;
  /// Called with a stage name right before each commit rename; throwing from it
  /// simulates a crash at that point.
  using FaultHook = std::function<void(std::string_view stage)>;

  /// Throws Error(Conflict) when another writer holds the lock.
  explicit StoreWriter(const Store& store);
  ~StoreWriter();
  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  /// Writes assets, document.json and poster.json, then commits the manifest.
  /// Returns the written asset refs. Throws Error(Conflict) on duplicate ids.
  std::vector<std::string> save_document(const VideoDocument& doc, const Poster& poster,
                                         const AssetBundle& assets);
  void save_index(const SearchIndex& index);

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

 private:
  const Store& store_;
  std::filesystem::path lock_path_;
  Clock clock_;
  FaultHook fault_hook_;
};

/// Write-temp, fsync, rename. `before_rename` runs between the two steps.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents,
                       const std::function<void()>& before_rename = {});

std::string format_utc(std::chrono::system_clock::time_point t);

}  // namespace lecturedeck
