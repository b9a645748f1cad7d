#include <gtest/gtest.h>

#include <random>

#include "lecturedeck/document.hpp"
#include "lecturedeck/error.hpp"
#include "lecturedeck/text.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace lecturedeck;

namespace {

struct Pipeline {
  std::vector<SlideSegment> segments;
  std::vector<SlideLayout> layouts;
  Transcript transcript;
  Alignment alignment;
};

/// With `sequential`, cues have positive length and never overlap, like a
/// subtitle track; otherwise they may overlap arbitrarily.
Pipeline random_pipeline(std::mt19937_64& rng, const std::vector<std::string>& title_pool,
                         bool sequential = false) {
  Pipeline p;
  const int n = 1 + static_cast<int>(rng() % 15);
  std::int64_t t = 0;
  for (int i = 0; i < n; ++i) {
    SlideSegment s;
    s.index = i;
    s.start_ms = t;
    t += 1000 + static_cast<std::int64_t>(rng() % 20000);
    s.end_ms = t;
    s.keyframe_ref = "v/keyframe-" + std::to_string(i) + ".png";
    p.segments.push_back(s);

    SlideLayout layout;
    layout.segment_index = i;
    layout.title = title_pool[rng() % title_pool.size()];
    layout.regions.push_back(Region{RegionKind::Title, BBox{0, 0, 100, 10}, layout.title, std::nullopt});
    if (rng() % 2) {
      layout.regions.push_back(
          Region{RegionKind::Figure, BBox{0, 20, 50, 50}, std::nullopt, "v/fig-" + std::to_string(i) + ".png"});
    }
    p.layouts.push_back(std::move(layout));
  }
  const int cues = static_cast<int>(rng() % 40);
  std::int64_t next = 0;
  for (int c = 0; c < cues; ++c) {
    std::int64_t start = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(t));
    if (sequential) start = next + static_cast<std::int64_t>(rng() % 3000);
    const std::int64_t end = start + 1 + static_cast<std::int64_t>(rng() % 4000);
    p.transcript.cues.push_back(Cue{start, end, fixtures::random_sentence(rng)});
    next = end;
  }
  std::stable_sort(p.transcript.cues.begin(), p.transcript.cues.end(),
                   [](const Cue& a, const Cue& b) { return a.start_ms < b.start_ms; });
  p.alignment = align_cues(p.segments, p.transcript);
  return p;
}

VideoMeta meta_for(const Pipeline& p) {
  return VideoMeta{"lecture-1", "Lecture One", p.segments.back().end_ms, std::nullopt};
}

}  // namespace

TEST(VideoId, ValidationAndSlugs) {
  EXPECT_TRUE(is_valid_video_id("intro-to-ml-2"));
  EXPECT_FALSE(is_valid_video_id(""));
  EXPECT_FALSE(is_valid_video_id("Caps"));
  EXPECT_FALSE(is_valid_video_id("a_b"));
  EXPECT_FALSE(is_valid_video_id(std::string(65, 'a')));
  EXPECT_EQ(slugify("Intro to ML: Part 2!"), "intro-to-ml-part-2");
  EXPECT_EQ(slugify("  ---  "), "video");
  EXPECT_EQ(slugify("Über Größe"), "ber-gr-e");
  EXPECT_EQ(slugify(std::string(100, 'x')).size(), 64u);
}

TEST(BuildDocument, JoinsSlidesLayoutsAndCues) {
  std::vector<SlideSegment> segs{{0, 0, 5000, "v/k0.png", 1}, {1, 5000, 9000, "v/k1.png", 2}};
  std::vector<SlideLayout> layouts(2);
  layouts[0].segment_index = 0;
  layouts[0].title = "Welcome";
  layouts[0].regions = {Region{RegionKind::Title, BBox{1, 2, 3, 4}, std::string(""), std::nullopt}};
  layouts[1].segment_index = 1;
  Transcript t;
  t.cues = {{0, 1000, "hello"}, {1000, 2000, "everyone"}, {6000, 7000, "next"}};
  const auto a = align_cues(segs, t);
  const auto doc = build_document(segs, a, layouts, t, VideoMeta{"talk", "Talk", 9000, "talk.mp4"});
  ASSERT_EQ(doc.segments.size(), 2u);
  EXPECT_EQ(doc.segments[0].title, "Welcome");
  EXPECT_EQ(doc.segments[0].regions[0].text, "Welcome");
  EXPECT_EQ(doc.segments[0].speech, "hello everyone");
  EXPECT_EQ(doc.segments[0].keyframe, "v/k0.png");
  EXPECT_EQ(doc.segments[1].title, "Slide 2");
  EXPECT_EQ(doc.segments[1].cues, (std::vector<Cue>{{6000, 7000, "next"}}));
  EXPECT_EQ(doc.source_ref, "talk.mp4");
}

TEST(BuildDocument, RejectsInconsistentInputs) {
  std::vector<SlideSegment> segs{{0, 0, 5000, "", 0}};
  std::vector<SlideLayout> layouts(1);
  Transcript t;
  t.cues = {{0, 1000, "a"}};
  const VideoMeta meta{"v", "V", 5000, std::nullopt};
  auto code_of = [&](const Alignment& a, const std::vector<SlideLayout>& l) {
    try {
      build_document(segs, a, l, t, meta);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Usage;
  };
  EXPECT_EQ(code_of(Alignment{{{0}, {}}}, layouts), ErrorCode::Consistency);
  EXPECT_EQ(code_of(Alignment{{{0}}}, {}), ErrorCode::Consistency);
  EXPECT_EQ(code_of(Alignment{{{}}}, layouts), ErrorCode::Consistency);
  EXPECT_EQ(code_of(Alignment{{{0, 0}}}, layouts), ErrorCode::Consistency);
  EXPECT_EQ(code_of(Alignment{{{3}}}, layouts), ErrorCode::Consistency);
  EXPECT_NO_THROW(build_document(segs, Alignment{{{0}}}, layouts, t, meta));
}

TEST(ValidateDocument, CatchesBrokenTiling) {
  auto doc = fixtures::make_document("ok", "Ok", {{"A", "a"}, {"B", "b"}});
  EXPECT_NO_THROW(validate_document(doc));
  auto gap = doc;
  gap.segments[1].start_ms += 1;
  EXPECT_THROW(validate_document(gap), Error);
  auto short_duration = doc;
  short_duration.duration_ms -= 1;
  EXPECT_THROW(validate_document(short_duration), Error);
  auto two_titles = doc;
  two_titles.segments[0].regions.push_back(two_titles.segments[0].regions[0]);
  EXPECT_THROW(validate_document(two_titles), Error);
  auto bad_id = doc;
  bad_id.video_id = "Bad Id";
  EXPECT_THROW(validate_document(bad_id), Error);
}

TEST(BuildDocumentProperty, SpeechIsLosslessInTranscriptOrder) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> pool{"Intro", "Method", "Results"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_pipeline(rng, pool, true);
    const auto doc = build_document(p.segments, p.alignment, p.layouts, p.transcript, meta_for(p));
    std::string joined_speech, joined_cues;
    std::vector<Cue> all_cues;
    for (const auto& s : doc.segments) {
      if (!s.speech.empty()) joined_speech += (joined_speech.empty() ? "" : " ") + s.speech;
      for (const auto& c : s.cues) all_cues.push_back(c);
    }
    for (const auto& c : p.transcript.cues) joined_cues += (joined_cues.empty() ? "" : " ") + c.text;
    EXPECT_EQ(joined_speech, joined_cues);
    EXPECT_EQ(all_cues, p.transcript.cues);
  }
}

TEST(Summarize, KeepsWholeSentences) {
  EXPECT_EQ(summarize_text("  Short text.  ", 100), "Short text.");
  EXPECT_EQ(summarize_text("One. Two two. Three three three.", 15), "One. Two two.");
  EXPECT_EQ(summarize_text("Is it? Yes! Maybe.", 12), "Is it? Yes!");
  EXPECT_EQ(summarize_text("", 10), "");
}

TEST(Summarize, CutsOverlongFirstSentenceAtWordBoundary) {
  EXPECT_EQ(summarize_text("alpha beta gamma delta epsilon", 12), "alpha beta…");
  EXPECT_EQ(summarize_text("abcdefghijklmnop", 5), "abcd…");
  EXPECT_EQ(summarize_text("ééééééé", 4), "ééé…");
  EXPECT_EQ(summarize_text("e.g. this", 3), "e.…");
}

TEST(SummarizeProperty, BoundedAndIdempotent) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string text;
    const int sentences = static_cast<int>(rng() % 6);
    for (int i = 0; i < sentences; ++i) text += fixtures::random_sentence(rng, 20) + " ";
    const std::size_t max = 1 + rng() % 120;
    const auto out = summarize_text(text, max);
    EXPECT_LE(text::count_code_points(out), max + 1);
    EXPECT_EQ(summarize_text(out, max), out);
  }
}

TEST(SummarizeProperty, SentenceCaseMatchesOracle) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int sentences = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < sentences; ++i) {
      if (i) text += ' ';
      text += "w" + std::string(1 + rng() % 30, 'x') + ".";
    }
    const std::size_t max = 1 + rng() % 150;
    std::string expected;
    for (const auto& prefix : oracle::sentence_prefixes(text)) {
      if (prefix.size() <= max) expected = prefix;
    }
    if (!expected.empty()) EXPECT_EQ(summarize_text(text, max), expected);
  }
}

TEST(Poster, MergesTitleRunsAndCollectsFigures) {
  auto doc = fixtures::make_document(
      "talk", "Talk",
      {{"Intro", "Hello."}, {"Method", "First step."}, {" method ", "Second step."}, {"Intro", "Back."}});
  doc.segments[2].regions.push_back(
      Region{RegionKind::Table, BBox{0, 0, 9, 9}, std::nullopt, std::string("talk/t.png")});
  doc.segments[1].regions.push_back(
      Region{RegionKind::Figure, BBox{0, 0, 9, 9}, std::nullopt, std::string("talk/f.png")});
  const auto poster = build_poster(doc);
  ASSERT_EQ(poster.chapters.size(), 3u);
  EXPECT_EQ(poster.chapters[1], (PosterChapter{"Method", 10000, {"talk/f.png", "talk/t.png"},
                                               "First step. Second step."}));
  EXPECT_EQ(poster.chapters[2].start_ms, 30000);
  EXPECT_EQ(poster_markdown(poster, "Talk"),
            "# Talk\n\n## Intro [00:00]\n\nHello.\n\n## Method [00:10]\n\n![](talk/f.png)\n\n"
            "![](talk/t.png)\n\nFirst step. Second step.\n\n## Intro [00:30]\n\nBack.\n");
}

TEST(PosterProperty, ChapterCountAndStartsMatchRunOracle) {
  std::mt19937_64 rng(55);
  const std::vector<std::string> pool{"Intro", "intro", "Intro  ", "Results", "RESULTS", "Demo"};
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_pipeline(rng, pool);
    const auto doc = build_document(p.segments, p.alignment, p.layouts, p.transcript, meta_for(p));
    const auto poster = build_poster(doc, 1 + rng() % 300);
    std::vector<std::string> titles;
    for (const auto& s : doc.segments) titles.push_back(s.title);
    const auto runs = oracle::title_run_starts(titles);
    ASSERT_EQ(poster.chapters.size(), runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
      EXPECT_EQ(poster.chapters[i].start_ms, doc.segments[runs[i]].start_ms);
    }
  }
}

TEST(FormatClock, MinutesAreNotWrapped) {
  EXPECT_EQ(format_clock(0), "00:00");
  EXPECT_EQ(format_clock(61999), "01:01");
  EXPECT_EQ(format_clock(3723000), "62:03");
}

TEST(DocumentJson, FieldOrderAndShape) {
  auto doc = fixtures::make_document("talk", "Talk", {{"Intro", "hi"}});
  const auto j = to_json(doc);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"video_id", "title", "duration_ms", "source_ref", "segments"}));
  EXPECT_TRUE(j["source_ref"].is_null());
  EXPECT_EQ(j["segments"][0]["regions"][0]["kind"], "Title");
  EXPECT_EQ(j["segments"][0]["regions"][0]["bbox"], Json::array({10, 10, 200, 20}));
  EXPECT_TRUE(j["segments"][0]["regions"][0]["asset"].is_null());
}

TEST(DocumentJsonProperty, RoundTrip) {
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 200; ++trial) {
    const auto doc = fixtures::random_document(rng, "doc-" + std::to_string(trial));
    const auto text = to_json(doc).dump();
    EXPECT_EQ(document_from_json(Json::parse(text)), doc);
    const auto poster = build_poster(doc, 1 + rng() % 200);
    EXPECT_EQ(poster_from_json(Json::parse(to_json(poster).dump())), poster);
  }
}

TEST(DocumentJson, SchemaViolationsAreFormatErrors) {
  const auto good = to_json(fixtures::make_document("talk", "Talk", {{"Intro", "hi"}}));
  auto expect_format = [](const Json& j, const std::string& needle) {
    try {
      document_from_json(j);
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Format);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto j = good;
  j.erase("title");
  expect_format(j, "title");
  j = good;
  j["segments"][0]["regions"][0]["kind"] = "chart";
  expect_format(j, "segments[0].regions[0]");
  j = good;
  j["segments"][0]["regions"][0]["bbox"] = Json::array({1, 2, 3});
  expect_format(j, "bbox");
  j = good;
  j["segments"][0]["start_ms"] = 5;
  expect_format(j, "tile");
  expect_format(Json::array(), "document");
  EXPECT_THROW(poster_from_json(Json{{"video_id", "x"}}), Error);
}
