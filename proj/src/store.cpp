#include "lecturedeck/store.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "lecturedeck/error.hpp"

namespace lecturedeck {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kIndex = "index.json";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json parse_store_file(const fs::path& root, const fs::path& rel) {
  std::string body;
  try {
    body = read_file(root / rel);
  } catch (const Error&) {
    throw Error(ErrorCode::CorruptStore, rel.string() + ": missing or unreadable");
  }
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptStore, rel.string() + ": " + e.what());
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& root) {
  if (!fs::exists(root / kManifest)) return {};
  const Json j = parse_store_file(root, kManifest);
  std::vector<ManifestEntry> out;
  try {
    if (!j.is_array()) throw Error(ErrorCode::CorruptStore, "expected an array");
    for (const auto& e : j) {
      ManifestEntry entry{e.at("video_id").get<std::string>(), e.at("title").get<std::string>(),
                          e.at("ingested_at").get<std::string>(),
                          e.at("duration_ms").get<std::int64_t>()};
      if (!is_valid_video_id(entry.video_id)) {
        throw Error(ErrorCode::CorruptStore, "invalid video_id " + entry.video_id);
      }
      if (std::any_of(out.begin(), out.end(),
                      [&](const ManifestEntry& x) { return x.video_id == entry.video_id; })) {
        throw Error(ErrorCode::CorruptStore, "duplicate video_id " + entry.video_id);
      }
      out.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptStore, std::string(kManifest) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptStore, std::string(kManifest) + ": " + e.what());
  }
  return out;
}

Json manifest_json(const std::vector<ManifestEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back(to_json(e));
  return arr;
}

}  // namespace

Json to_json(const ManifestEntry& e) {
  return Json{{"video_id", e.video_id},
              {"title", e.title},
              {"ingested_at", e.ingested_at},
              {"duration_ms", e.duration_ms}};
}

std::string format_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file_atomic(const fs::path& path, std::string_view contents,
                       const std::function<void()>& before_rename) {
  const fs::path tmp = path.string() + ".tmp-" + std::to_string(::getpid());
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::Io, "cannot create " + tmp.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < contents.size()) {
    const auto n = ::write(fd, contents.data() + written, contents.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string why = std::strerror(errno);
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error(ErrorCode::Io, "cannot write " + tmp.string() + ": " + why);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::Io, "cannot flush " + tmp.string());
  }
  if (before_rename) {
    try {
      before_rename();
    } catch (...) {
      ::unlink(tmp.c_str());
      throw;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::Io, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Store

Store Store::open(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::Io, "store root is not a directory: " + root.string());
  }
  return Store(root);
}

Store Store::create(const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root / "videos", ec);
  if (!ec) fs::create_directories(root / "assets", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create store at " + root.string() + ": " + ec.message());
  if (!fs::exists(root / kManifest)) write_file_atomic(root / kManifest, "[]\n");
  return Store(root);
}

std::vector<ManifestEntry> Store::list_videos() const {
  auto entries = read_manifest(root_);
  for (const auto& e : entries) {
    if (!fs::is_regular_file(root_ / "videos" / e.video_id / "document.json")) {
      throw Error(ErrorCode::CorruptStore,
                  "manifest.json: entry " + e.video_id + " has no document.json");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return a.title != b.title ? a.title < b.title : a.video_id < b.video_id;
  });
  return entries;
}

VideoDocument Store::load_document(const std::string& video_id) const {
  const auto entries = read_manifest(root_);
  if (!is_valid_video_id(video_id) ||
      std::none_of(entries.begin(), entries.end(),
                   [&](const ManifestEntry& e) { return e.video_id == video_id; })) {
    throw Error(ErrorCode::NotFound, "unknown video: " + video_id);
  }
  const fs::path rel = fs::path("videos") / video_id / "document.json";
  const Json j = parse_store_file(root_, rel);
  try {
    auto doc = document_from_json(j);
    if (doc.video_id != video_id) {
      throw Error(ErrorCode::Format, "video_id does not match its directory");
    }
    return doc;
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptStore, rel.string() + ": " + e.what());
  }
}

Poster Store::load_poster(const std::string& video_id) const {
  const auto entries = read_manifest(root_);
  if (!is_valid_video_id(video_id) ||
      std::none_of(entries.begin(), entries.end(),
                   [&](const ManifestEntry& e) { return e.video_id == video_id; })) {
    throw Error(ErrorCode::NotFound, "unknown video: " + video_id);
  }
  const fs::path rel = fs::path("videos") / video_id / "poster.json";
  const Json j = parse_store_file(root_, rel);
  try {
    auto poster = poster_from_json(j);
    if (poster.video_id != video_id) {
      throw Error(ErrorCode::Format, "video_id does not match its directory");
    }
    return poster;
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptStore, rel.string() + ": " + e.what());
  }
}

SearchIndex Store::load_index() const {
  if (!fs::exists(root_ / kIndex)) return SearchIndex{};
  const Json j = parse_store_file(root_, kIndex);
  try {
    return SearchIndex::from_json(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptStore, std::string(kIndex) + ": " + e.what());
  }
}

fs::path Store::asset_path(std::string_view ref) const {
  if (ref.empty() || ref.front() == '/' || ref.find('\\') != std::string_view::npos ||
      ref.find('\0') != std::string_view::npos) {
    throw Error(ErrorCode::InvalidInput, "invalid asset reference");
  }
  const fs::path rel(ref);
  for (const auto& part : rel) {
    if (part == ".." || part == ".") {
      throw Error(ErrorCode::InvalidInput, "asset reference may not contain '..'");
    }
  }
  const fs::path full = root_ / "assets" / rel;
  std::error_code ec;
  if (!fs::is_regular_file(full, ec)) {
    throw Error(ErrorCode::NotFound, "no such asset: " + std::string(ref));
  }
  return full;
}

// ---------------------------------------------------------------------------
// StoreWriter

StoreWriter::StoreWriter(const Store& store)
    : store_(store),
      lock_path_(store.root() / ".lock"),
      clock_([] { return std::chrono::system_clock::now(); }) {
  const int fd = ::open(lock_path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::Conflict, "store is locked by another writer: " + lock_path_.string());
    }
    throw Error(ErrorCode::Io, "cannot lock store " + lock_path_.string() + ": " +
                                   std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

StoreWriter::~StoreWriter() { ::unlink(lock_path_.c_str()); }

std::vector<std::string> StoreWriter::save_document(const VideoDocument& doc, const Poster& poster,
                                                    const AssetBundle& assets) {
  validate_document(doc);
  if (poster.video_id != doc.video_id || assets.video_id() != doc.video_id) {
    throw Error(ErrorCode::Consistency, "poster/assets belong to a different video than " +
                                            doc.video_id);
  }
  const fs::path& root = store_.root();
  auto entries = read_manifest(root);
  if (std::any_of(entries.begin(), entries.end(),
                  [&](const ManifestEntry& e) { return e.video_id == doc.video_id; })) {
    throw Error(ErrorCode::Conflict, "video already stored: " + doc.video_id);
  }

  // Leftovers from an interrupted save of the same id are not referenced by
  // the manifest and can be replaced.
  const fs::path asset_dir = root / "assets" / doc.video_id;
  const fs::path video_dir = root / "videos" / doc.video_id;
  std::error_code ec;
  fs::remove_all(asset_dir, ec);
  fs::create_directories(asset_dir, ec);
  if (!ec) fs::create_directories(video_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directories for " + doc.video_id);

  std::vector<std::string> refs;
  for (const auto& [name, bytes] : assets.files()) {
    write_file_atomic(asset_dir / name,
                      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    refs.push_back(doc.video_id + "/" + name);
  }
  write_file_atomic(video_dir / "document.json", to_json(doc).dump(2) + "\n");
  write_file_atomic(video_dir / "poster.json", to_json(poster).dump(2) + "\n");

  entries.push_back(ManifestEntry{doc.video_id, doc.title, format_utc(clock_()), doc.duration_ms});
  write_file_atomic(root / kManifest, manifest_json(entries).dump(2) + "\n", [this] {
    if (fault_hook_) fault_hook_("manifest");
  });
  return refs;
}

void StoreWriter::save_index(const SearchIndex& index) {
  write_file_atomic(store_.root() / kIndex, index.to_json().dump() + "\n", [this] {
    if (fault_hook_) fault_hook_("index");
  });
}

}  // namespace lecturedeck
