#include "lecturedeck/api.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "httplib.h"

namespace lecturedeck {

namespace fs = std::filesystem;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::Format:
    case ErrorCode::Usage: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    default: return 500;
  }
}

ApiResponse error_response(ErrorCode code, const std::string& message) {
  const int status = http_status(code);
  return ApiResponse{status, "application/json",
                     Json{{"status", status}, {"code", std::string(to_string(code))},
                          {"message", message}}
                         .dump()};
}

std::string content_type_for(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".mp4") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  return "application/octet-stream";
}

namespace {

ApiResponse json_response(const Json& j) { return ApiResponse{200, "application/json", j.dump()}; }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto slash = path.find('/', i);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end + 1;
  }
  return parts;
}

bool has_dotdot(std::string_view path) {
  for (const auto& part : split_path(path)) {
    if (part == "..") return true;
  }
  return false;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ApiService::ApiService(Store store, ApiOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
  try {
    index_ = store_.load_index();
  } catch (const Error& e) {
    index_error_ = e.what();
  }
}

ApiResponse ApiService::get(std::string_view path,
                            const std::multimap<std::string, std::string>& params) const {
  try {
    if (has_dotdot(path)) return error_response(ErrorCode::InvalidInput, "path may not contain '..'");
    const auto parts = split_path(path);
    if (!parts.empty() && parts[0] == "api") {
      if (parts.size() >= 2 && parts[1] == "videos") {
        return videos_route(std::vector<std::string>(parts.begin() + 2, parts.end()));
      }
      if (parts.size() == 2 && parts[1] == "search") return search_route(params);
      return error_response(ErrorCode::NotFound, "no such endpoint: " + std::string(path));
    }
    if (!parts.empty() && parts[0] == "assets") {
      constexpr std::string_view prefix = "/assets/";
      if (path.size() <= prefix.size()) return error_response(ErrorCode::NotFound, "no asset given");
      return asset_route(path.substr(prefix.size()));
    }
    return static_route(path);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::Io, e.what());
  }
}

ApiResponse ApiService::videos_route(const std::vector<std::string>& rest) const {
  if (rest.empty()) {
    Json arr = Json::array();
    for (const auto& e : store_.list_videos()) arr.push_back(to_json(e));
    return json_response(arr);
  }
  const auto& id = rest[0];
  if (rest.size() == 1) return json_response(to_json(store_.load_document(id)));
  if (rest.size() == 2 && rest[1] == "poster") return json_response(to_json(store_.load_poster(id)));
  if (rest.size() == 3 && rest[1] == "segments") {
    const auto doc = store_.load_document(id);
    const auto n = parse_int(rest[2]);
    if (!n) return error_response(ErrorCode::InvalidInput, "segment index must be an integer");
    if (*n < 0 || *n >= static_cast<long long>(doc.segments.size())) {
      return error_response(ErrorCode::NotFound, "segment " + rest[2] + " out of range for " + id);
    }
    const auto& seg = doc.segments[static_cast<std::size_t>(*n)];
    Json regions = Json::array();
    for (const auto& r : seg.regions) regions.push_back(to_json(r));
    Json cues = Json::array();
    for (const auto& c : seg.cues) cues.push_back(to_json(c));
    return json_response(Json{{"video_id", doc.video_id},
                              {"index", seg.index},
                              {"start_ms", seg.start_ms},
                              {"end_ms", seg.end_ms},
                              {"keyframe", seg.keyframe},
                              {"title", seg.title},
                              {"regions", std::move(regions)},
                              {"cues", std::move(cues)}});
  }
  return error_response(ErrorCode::NotFound, "no such video resource");
}

ApiResponse ApiService::search_route(const std::multimap<std::string, std::string>& params) const {
  int limit = 10;
  if (const auto it = params.find("limit"); it != params.end()) {
    const auto v = parse_int(it->second);
    if (!v) return error_response(ErrorCode::InvalidInput, "limit must be an integer");
    if (*v < 1) return error_response(ErrorCode::InvalidInput, "limit must be at least 1");
    limit = static_cast<int>(std::min<long long>(*v, 1000));
  }
  const auto q = params.find("q");
  if (q == params.end()) return json_response(Json::array());
  if (!index_) return error_response(ErrorCode::CorruptStore, *index_error_);
  Json arr = Json::array();
  for (const auto& hit : index_->search(q->second, limit)) arr.push_back(to_json(hit));
  return json_response(arr);
}

ApiResponse ApiService::asset_route(std::string_view ref) const {
  const auto path = store_.asset_path(ref);
  auto body = read_binary(path);
  if (!body) return error_response(ErrorCode::NotFound, "asset unreadable");
  return ApiResponse{200, content_type_for(path), std::move(*body)};
}

ApiResponse ApiService::static_route(std::string_view path) const {
  if (!options_.ui_dir) return error_response(ErrorCode::NotFound, "no UI configured");
  std::string rel(path);
  while (!rel.empty() && rel.front() == '/') rel.erase(rel.begin());
  if (rel.empty() || rel.back() == '/') rel += "index.html";
  const fs::path full = *options_.ui_dir / rel;
  std::error_code ec;
  if (!fs::is_regular_file(full, ec)) {
    return error_response(ErrorCode::NotFound, "no such file: " + std::string(path));
  }
  auto body = read_binary(full);
  if (!body) return error_response(ErrorCode::NotFound, "unreadable: " + std::string(path));
  return ApiResponse{200, content_type_for(full), std::move(*body)};
}

// ---------------------------------------------------------------------------
// Server

ApiServer::ApiServer(const ApiService& service, bool log_requests)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  // SO_REUSEPORT would let a second server share the port silently.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server_->Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    const auto out = service_.get(req.path, params);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
    if (service_.options().cors_origin) {
      res.set_header("Access-Control-Allow-Origin", *service_.options().cors_origin);
    }
  });
  if (log_requests) {
    server_->set_logger([](const httplib::Request& req, const httplib::Response& res) {
      std::fprintf(stderr, "%s %s %d\n", req.method.c_str(), req.target.c_str(), res.status);
    });
  }
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Bind, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::Bind, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ApiServer::listen() { server_->listen_after_bind(); }

void ApiServer::wait_until_ready() const { server_->wait_until_ready(); }

void ApiServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace lecturedeck
