#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lecturedeck/error.hpp"
#include "lecturedeck/search.hpp"
#include "lecturedeck/store.hpp"

namespace httplib {
class Server;
}

namespace lecturedeck {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ApiOptions {
  std::optional<std::filesystem::path> ui_dir;
  /// Value for Access-Control-Allow-Origin; unset disables CORS headers.
  std::optional<std::string> cors_origin;
};

/// HTTP status for an error code (400/404/409/500).
int http_status(ErrorCode code);
ApiResponse error_response(ErrorCode code, const std::string& message);

/// Read-only JSON API over a store plus static hosting of the web UI.
/// The index is loaded once; nothing is written while serving.
class ApiService {
 public:
  explicit ApiService(Store store, ApiOptions options = {});

  /// Routes a GET request. `path` is already percent-decoded.
  ApiResponse get(std::string_view path,
                  const std::multimap<std::string, std::string>& params) const;

  const ApiOptions& options() const noexcept { return options_; }

 private:
  ApiResponse videos_route(const std::vector<std::string>& parts) const;
  ApiResponse search_route(const std::multimap<std::string, std::string>& params) const;
  ApiResponse asset_route(std::string_view ref) const;
  ApiResponse static_route(std::string_view path) const;

  Store store_;
  ApiOptions options_;
  std::optional<SearchIndex> index_;
  std::optional<std::string> index_error_;
};

/// Owns the listening socket. bind() throws Error(Bind) when the port is taken.
class ApiServer {
 public:
  explicit ApiServer(const ApiService& service, bool log_requests = true);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  /// Returns once a concurrent listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  const ApiService& service_;
  std::unique_ptr<httplib::Server> server_;
};

std::string content_type_for(const std::filesystem::path& path);

}  // namespace lecturedeck
