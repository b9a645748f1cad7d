#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "lecturedeck/error.hpp"
#include "lecturedeck/transcript.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace lecturedeck;
using fixtures::TempDir;

namespace {

std::vector<SlideSegment> tiled(const std::vector<std::int64_t>& bounds) {
  std::vector<SlideSegment> out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    SlideSegment s;
    s.index = static_cast<int>(i);
    s.start_ms = bounds[i];
    s.end_ms = bounds[i + 1];
    out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> flatten(const Alignment& a, std::size_t cue_count) {
  std::vector<std::size_t> seg_of(cue_count, SIZE_MAX);
  for (std::size_t s = 0; s < a.cues_by_segment.size(); ++s)
    for (auto c : a.cues_by_segment[s]) seg_of[c] = s;
  return seg_of;
}

struct Instance {
  std::vector<SlideSegment> segments;
  Transcript transcript;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  const int n = 1 + static_cast<int>(rng() % 50);
  std::vector<std::int64_t> bounds{0};
  for (int i = 0; i < n; ++i) bounds.push_back(bounds.back() + 1 + static_cast<std::int64_t>(rng() % 20000));
  in.segments = tiled(bounds);
  const int m = static_cast<int>(rng() % 501);
  const std::int64_t span = bounds.back() + 20000;
  for (int i = 0; i < m; ++i) {
    const std::int64_t start = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span));
    in.transcript.cues.push_back(Cue{start, start + 1 + static_cast<std::int64_t>(rng() % 15000), "x"});
  }
  return in;
}

}  // namespace

TEST(ParseSrt, ReadsBasicFile) {
  const auto t = parse_srt(
      "1\n00:00:01,000 --> 00:00:04,500\nHello   there\nworld\n\n"
      "2\n00:01:00,250 --> 01:00:00,000\nSecond cue\n");
  ASSERT_EQ(t.cues.size(), 2u);
  EXPECT_EQ(t.cues[0], (Cue{1000, 4500, "Hello there world"}));
  EXPECT_EQ(t.cues[1], (Cue{60250, 3600000, "Second cue"}));
  EXPECT_TRUE(t.warnings.empty());
  EXPECT_EQ(t.source, TranscriptSource::SubtitleFile);
}

TEST(ParseSrt, ToleratesBomCrlfAndMissingIndex) {
  const auto t = parse_srt("\xEF\xBB\xBF" "00:00:00,000 --> 00:00:02,000\r\nNo index\r\n\r\n");
  ASSERT_EQ(t.cues.size(), 1u);
  EXPECT_EQ(t.cues[0].text, "No index");
}

TEST(ParseSrt, SkipsBadBlocksWithWarnings) {
  const auto t = parse_srt(
      "1\n00:00:01,000 --> 00:00:02,000\nGood\n\n"
      "2\n00:00:05,000 --> 00:00:03,000\nBackwards\n\n"
      "3\nnot a time\nJunk\n\n"
      "4\n00:00:09,000 --> 00:00:10,000\n\n");
  ASSERT_EQ(t.cues.size(), 1u);
  ASSERT_EQ(t.warnings.size(), 3u);
  EXPECT_NE(t.warnings[0].find("line 6"), std::string::npos);
  EXPECT_NE(t.warnings[1].find("line 9"), std::string::npos);
}

TEST(ParseSrt, SortsCuesByTime) {
  const auto t = parse_srt(
      "1\n00:00:05,000 --> 00:00:06,000\nlate\n\n2\n00:00:01,000 --> 00:00:02,000\nearly\n");
  ASSERT_EQ(t.cues.size(), 2u);
  EXPECT_EQ(t.cues[0].text, "early");
}

TEST(ParseSrt, NothingParseableIsFormatErrorNamingTheLine) {
  try {
    parse_srt("hello\nworld\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Format);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  EXPECT_TRUE(parse_srt("").cues.empty());
  EXPECT_TRUE(parse_srt("\n\n").cues.empty());
}

TEST(ParseVtt, ReadsCuesAndSkipsMetadataBlocks) {
  const auto t = parse_vtt(
      "WEBVTT - lecture\n\nNOTE this is ignored\n\nSTYLE\n::cue { color: red }\n\n"
      "intro\n00:01.000 --> 00:04.000 align:start\nFirst\n\n"
      "01:00:00.000 --> 01:00:01.500\nSecond\n");
  ASSERT_EQ(t.cues.size(), 2u);
  EXPECT_EQ(t.cues[0], (Cue{1000, 4000, "First"}));
  EXPECT_EQ(t.cues[1], (Cue{3600000, 3601500, "Second"}));
}

TEST(ParseVtt, RequiresHeader) {
  EXPECT_THROW(parse_vtt("00:01.000 --> 00:02.000\nx\n"), Error);
  EXPECT_THROW(parse_vtt("WEBVTTX\n"), Error);
}

TEST(FormatTimestamp, PadsFields) {
  EXPECT_EQ(format_timestamp(0, ','), "00:00:00,000");
  EXPECT_EQ(format_timestamp(3723004, '.'), "01:02:03.004");
}

TEST(SrtProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    Transcript t;
    std::int64_t ts = 0;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      ts += 1 + static_cast<std::int64_t>(rng() % 5000);
      const std::int64_t end = ts + 1 + static_cast<std::int64_t>(rng() % 9000);
      t.cues.push_back(Cue{ts, end, fixtures::random_sentence(rng)});
    }
    const auto back = parse_srt(format_srt(t));
    EXPECT_EQ(back.cues, t.cues);
    EXPECT_TRUE(back.warnings.empty());
  }
}

TEST(AlignCues, AssignsByMaximalOverlapWithEarlierTieBreak) {
  const auto segs = tiled({0, 10000, 20000, 30000});
  Transcript t;
  t.cues = {{1000, 2000, "inside first"},
            {9000, 12000, "mostly second"},
            {8000, 12000, "tie"},
            {29000, 45000, "runs past the end"},
            {50000, 51000, "after everything"}};
  const auto a = align_cues(segs, t);
  EXPECT_EQ(a.cues_by_segment,
            (std::vector<std::vector<std::size_t>>{{0, 2}, {1}, {3, 4}}));
}

TEST(AlignCues, ZeroLengthCueUsesNearestMidpoint) {
  const auto segs = tiled({0, 10000, 20000});
  Transcript t;
  t.cues = {{10000, 10000, "instant"}, {4000, 4000, "early instant"}};
  const auto a = align_cues(segs, t);
  // Midpoints are 5000 and 15000; 10000 is equidistant and goes to the earlier one.
  EXPECT_EQ(a.cues_by_segment[0], (std::vector<std::size_t>{0, 1}));
}

TEST(AlignCues, NoSegmentsIsInvalid) {
  EXPECT_THROW(align_cues({}, Transcript{}), Error);
}

TEST(AlignCuesProperty, TotalAndMatchesExhaustiveOracle) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_instance(rng);
    const auto a = align_cues(in.segments, in.transcript);
    ASSERT_EQ(a.cues_by_segment.size(), in.segments.size());
    std::size_t total = 0;
    for (const auto& v : a.cues_by_segment) total += v.size();
    EXPECT_EQ(total, in.transcript.cues.size());

    std::vector<oracle::Interval> segs, cues;
    for (const auto& s : in.segments) segs.push_back({s.start_ms, s.end_ms});
    for (const auto& c : in.transcript.cues) cues.push_back({c.start_ms, c.end_ms});
    EXPECT_EQ(flatten(a, cues.size()), oracle::align(segs, cues));
  }
}

TEST(AlignCuesProperty, InvariantUnderTimeTranslation) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    const auto before = align_cues(in.segments, in.transcript);
    const std::int64_t offset = static_cast<std::int64_t>(rng() % 1000000);
    for (auto& s : in.segments) {
      s.start_ms += offset;
      s.end_ms += offset;
    }
    for (auto& c : in.transcript.cues) {
      c.start_ms += offset;
      c.end_ms += offset;
    }
    EXPECT_EQ(align_cues(in.segments, in.transcript), before);
  }
}

TEST(AcquireTranscript, PrefersSubtitleFile) {
  TempDir dir;
  fixtures::write_text(dir / "talk.srt", "1\n00:00:00,000 --> 00:00:01,000\nhi\n");
  StubAsrClient asr;
  const auto t = acquire_transcript(dir / "talk.srt", asr, std::string("audio.wav"));
  ASSERT_EQ(t.cues.size(), 1u);
  EXPECT_EQ(t.source, TranscriptSource::SubtitleFile);
}

TEST(AcquireTranscript, SniffsVttWithoutExtension) {
  TempDir dir;
  fixtures::write_text(dir / "talk.txt", "WEBVTT\n\n00:00.000 --> 00:01.000\nhi\n");
  StubAsrClient asr;
  EXPECT_EQ(acquire_transcript(dir / "talk.txt", asr, std::nullopt).cues.size(), 1u);
}

TEST(AcquireTranscript, ErrorsAndStubFallback) {
  TempDir dir;
  StubAsrClient asr;
  try {
    acquire_transcript(dir / "missing.srt", asr, std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
  EXPECT_THROW(acquire_transcript(std::nullopt, asr, std::nullopt), Error);
  const auto t = acquire_transcript(std::nullopt, asr, std::string("a.wav"));
  EXPECT_TRUE(t.cues.empty());
  EXPECT_EQ(t.source, TranscriptSource::AsrClient);
  ASSERT_EQ(t.warnings.size(), 1u);
  EXPECT_EQ(t.warnings[0].rfind("no transcript", 0), 0u);
}

TEST(AsrProtocol, RequestAndResponseShapes) {
  const auto req = nlohmann::json::parse(asr_request_json({"lecture.mp4", "de"}));
  EXPECT_EQ(req["audio_ref"], "lecture.mp4");
  EXPECT_EQ(req["language"], "de");
  const auto cues = parse_asr_response(R"([{"start_ms": 0, "end_ms": 900, "text": "hallo"}])");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0], (Cue{0, 900, "hallo"}));
  try {
    parse_asr_response(R"({"oops": 1})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
  }
}

TEST(HttpAsrClient, TalksToService) {
  httplib::Server server;
  std::string seen_language;
  server.Post("/asr", [&](const httplib::Request& req, httplib::Response& res) {
    seen_language = nlohmann::json::parse(req.body)["language"];
    res.set_content(R"([{"start_ms": 2000, "end_ms": 3000, "text": " two "},
                        {"start_ms": 0, "end_ms": 1000, "text": "one"},
                        {"start_ms": 5, "end_ms": 5, "text": "empty"}])",
                    "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  HttpAsrClient asr(base + "/asr");
  const auto t = acquire_transcript(std::nullopt, asr, std::string("a.wav"), "fr");
  EXPECT_EQ(seen_language, "fr");
  ASSERT_EQ(t.cues.size(), 2u);
  EXPECT_EQ(t.cues[0].text, "one");
  EXPECT_EQ(t.cues[1].text, "two");
  EXPECT_EQ(t.warnings.size(), 1u);

  HttpAsrClient broken(base + "/broken");
  try {
    broken.transcribe({"a.wav", "en"});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
  }
  server.stop();
  thread.join();

  HttpAsrClient unreachable(base + "/asr");
  EXPECT_THROW(unreachable.transcribe({"a.wav", "en"}), Error);
}
