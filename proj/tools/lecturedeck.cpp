// lecturedeck: ingest slide-based lecture videos, then search and browse them.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "CLI11.hpp"

#include "lecturedeck/api.hpp"
#include "lecturedeck/error.hpp"
#include "lecturedeck/pipeline.hpp"
#include "lecturedeck/store.hpp"

namespace {

using namespace lecturedeck;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int report_error(ErrorCode code, const std::string& message) {
  std::cerr << Json{{"code", std::string(to_string(code))}, {"message", message}}.dump() << "\n";
  return code == ErrorCode::Usage ? kExitUsage : kExitData;
}

struct IngestFlags {
  std::string source;
  std::string subtitles;
  double fps = 1.0;
  int threshold = 10;
  long long min_duration = 3000;
  long long duration = -1;
  std::string title;
  std::string id;
  std::string decoder = DecoderFrameProvider::kDefaultTemplate;
  std::string ocr_url;
  std::string asr_url;
  std::string language = "en";
  std::size_t summary_chars = kDefaultSummaryChars;
};

int run_ingest(const IngestFlags& f, const std::string& store_dir) {
  IngestOptions options;
  options.source = f.source;
  if (!f.subtitles.empty()) options.subtitles = f.subtitles;
  if (!f.title.empty()) options.title = f.title;
  if (!f.id.empty()) options.video_id = f.id;
  if (f.duration > 0) options.duration_ms = f.duration;
  options.params.sample_rate_hz = f.fps;
  options.params.hash_threshold = f.threshold;
  options.params.min_segment_ms = f.min_duration;
  options.decoder_template = f.decoder;
  options.language = f.language;
  options.max_summary_chars = f.summary_chars;

  std::unique_ptr<OcrClient> ocr;
  if (f.ocr_url.empty()) {
    ocr = std::make_unique<StubOcrClient>();
  } else {
    ocr = std::make_unique<HttpOcrClient>(f.ocr_url);
  }
  std::unique_ptr<AsrClient> asr;
  if (f.asr_url.empty()) {
    asr = std::make_unique<StubAsrClient>();
  } else {
    asr = std::make_unique<HttpAsrClient>(f.asr_url);
  }

  const auto store = Store::create(store_dir);
  const auto report = ingest(options, store, *ocr, *asr);
  std::cout << to_json(report).dump() << "\n";
  return 0;
}

int run_serve(const std::string& store_dir, const std::string& host, int port,
              const std::string& ui_dir, const std::string& cors) {
  ApiOptions options;
  if (!ui_dir.empty()) options.ui_dir = ui_dir;
  if (!cors.empty()) options.cors_origin = cors;

  // Block termination signals in every thread; a dedicated waiter stops the server.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const ApiService service(Store::open(store_dir), options);
  ApiServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "serving " << store_dir << " on http://" << host << ":" << bound << "\n";

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int run_search(const std::string& store_dir, const std::vector<std::string>& words, int limit) {
  std::string query;
  for (const auto& w : words) query += (query.empty() ? "" : " ") + w;
  const auto store = Store::open(store_dir);
  for (const auto& hit : store.load_index().search(query, limit)) {
    std::cout << to_json(hit).dump() << "\n";
  }
  return 0;
}

int run_poster(const std::string& store_dir, const std::string& video_id) {
  const auto store = Store::open(store_dir);
  const auto doc = store.load_document(video_id);
  std::cout << poster_markdown(store.load_poster(video_id), doc.title);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slide-based lecture video ingestion, search and browsing"};
  app.require_subcommand(1);

  std::string store_dir;
  auto add_store = [&](CLI::App* sub) {
    sub->add_option("--store", store_dir, "Store directory")->envname("LECTUREDECK_STORE")->required();
  };

  IngestFlags ingest_flags;
  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest a video file or frame directory");
  add_store(ingest_cmd);
  ingest_cmd->add_option("source", ingest_flags.source, "Video file or frame directory")->required();
  ingest_cmd->add_option("--subtitles", ingest_flags.subtitles, "SRT or WebVTT file");
  ingest_cmd->add_option("--fps", ingest_flags.fps, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--threshold", ingest_flags.threshold, "Hamming threshold for a slide change")
      ->check(CLI::Range(0, 64));
  ingest_cmd->add_option("--min-duration", ingest_flags.min_duration, "Minimum segment length (ms)")
      ->check(CLI::NonNegativeNumber);
  ingest_cmd->add_option("--duration", ingest_flags.duration, "Video duration (ms)");
  ingest_cmd->add_option("--title", ingest_flags.title, "Video title");
  ingest_cmd->add_option("--id", ingest_flags.id, "Video id ([a-z0-9-]{1,64})");
  ingest_cmd->add_option("--decoder", ingest_flags.decoder,
                         "Decoder command template ({input}, {outdir}, {fps})");
  ingest_cmd->add_option("--ocr-url", ingest_flags.ocr_url, "OCR service endpoint");
  ingest_cmd->add_option("--asr-url", ingest_flags.asr_url, "ASR service endpoint");
  ingest_cmd->add_option("--language", ingest_flags.language, "Language hint for ASR");
  ingest_cmd->add_option("--summary-chars", ingest_flags.summary_chars, "Poster summary length")
      ->check(CLI::PositiveNumber);

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  std::string cors;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API and web UI");
  add_store(serve_cmd);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--ui-dir", ui_dir, "Static UI directory");
  serve_cmd->add_option("--cors-origin", cors, "Allowed cross-origin UI origin");

  std::vector<std::string> query;
  int limit = 10;
  auto* search_cmd = app.add_subcommand("search", "Keyword search; one JSON hit per line");
  add_store(search_cmd);
  search_cmd->add_option("query", query, "Keywords")->required();
  search_cmd->add_option("--limit", limit, "Maximum hits")->check(CLI::PositiveNumber);

  std::string video_id;
  auto* poster_cmd = app.add_subcommand("poster", "Print a video's poster as Markdown");
  add_store(poster_cmd);
  poster_cmd->add_option("video_id", video_id, "Video id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error(ErrorCode::Usage, e.what());
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_flags, store_dir);
    if (*serve_cmd) return run_serve(store_dir, host, port, ui_dir, cors);
    if (*search_cmd) return run_search(store_dir, query, limit);
    if (*poster_cmd) return run_poster(store_dir, video_id);
  } catch (const Error& e) {
    return report_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error(ErrorCode::Io, e.what());
  }
  return kExitUsage;
}
