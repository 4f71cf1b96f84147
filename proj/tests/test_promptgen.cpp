// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <set>

#include "avtime/error.hpp"
#include "avtime/evaluator.hpp"
#include "avtime/promptgen.hpp"
#include "support/tempdir.hpp"

namespace {

struct GoldenLine {
  int group = 0;
  std::string id;
  std::string text;
};

std::vector<GoldenLine> golden() {
  std::ifstream in(std::string(AVTIME_GOLDEN_DIR) + "/templates.txt");
  std::vector<GoldenLine> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    out.push_back({std::stoi(line.substr(0, t1)), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  return out;
}

std::vector<std::string> golden_group(int group) {
  std::vector<std::string> out;
  for (const auto& g : golden()) if (g.group == group) out.push_back(g.text);
  return out;
}

std::string render(const avtime::ResponseTemplate& t) {
  static const std::vector<std::string> one{"rain"}, many{"rain", "thunder"};
  return avtime::render_label_response(t, t.arity == avtime::Arity::single ? one : many);
}

avtime::PseudoUntrimmedVideo three_annotation_video() {
  avtime::PseudoUntrimmedVideo v;
  v.id = "pu-0000000-000";
  v.total_duration_s = 30.0;
  const char* captions[] = {"a dog barks.", "rain falls on a roof", "a train passes"};
  for (std::size_t i = 0; i < 3; ++i) {
    v.annotations.push_back({captions[i], 10.0 * i, 10.0 * (i + 1), i});
  }
  return v;
}

TEST(Templates, GoldenFileCoversAllGroups) {
  EXPECT_EQ(golden_group(1).size(), 9u);
  EXPECT_EQ(golden_group(2).size(), 7u);
  EXPECT_EQ(golden_group(3).size(), 22u);
}

TEST(Templates, AudioCaptionQueriesByteForByte) {
  EXPECT_EQ(avtime::default_template_bank().audio_caption_queries, golden_group(1));
}

TEST(Templates, TimeReferencedQueriesByteForByte) {
  std::vector<std::string> rendered;
  for (const auto& q : avtime::default_template_bank().cba_queries) {
    rendered.push_back(avtime::render_cba_query(q, avtime::tau_text(18, 34)));
  }
  EXPECT_EQ(rendered, golden_group(2));
}

TEST(Templates, LabelResponsesByteForByte) {
  const auto& bank = avtime::default_template_bank();
  ASSERT_EQ(bank.audioset_prefix.size(), 10u);
  ASSERT_EQ(bank.audioset_suffix.size(), 12u);
  std::vector<std::string> rendered;
  for (const auto& t : bank.audioset_prefix) rendered.push_back(render(t));
  for (const auto& t : bank.audioset_suffix) rendered.push_back(render(t));
  EXPECT_EQ(rendered, golden_group(3));
}

TEST(Templates, SeededDrawIsAGoldenString) {
  const auto queries_golden = golden_group(1);
  const auto responses_golden = golden_group(3);
  const std::set<std::string> queries(queries_golden.begin(), queries_golden.end());
  const std::set<std::string> responses(responses_golden.begin(), responses_golden.end());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    avtime::Rng r1(seed), r2(seed);
    const avtime::TrimmedClip one{"a", 1.0, "", std::nullopt, std::vector<std::string>{"rain"}};
    const avtime::TrimmedClip two{"b", 1.0, "", std::nullopt,
                                  std::vector<std::string>{"rain", "thunder"}};
    const auto p1 = avtime::gen_audio_pairs(one, avtime::default_template_bank(), r1);
    const auto p2 = avtime::gen_audio_pairs(two, avtime::default_template_bank(), r2);
    EXPECT_TRUE(queries.count(p1.query));
    EXPECT_TRUE(responses.count(p1.response)) << p1.response;
    EXPECT_TRUE(responses.count(p2.response)) << p2.response;
    EXPECT_EQ(p1.kind, avtime::PairKind::audioset_label);
  }
}

TEST(Templates, PrefixOneAndSuffixFourteen) {
  const auto& bank = avtime::default_template_bank();
  const std::vector<std::string> one{"rain"}, two{"rain", "thunder"};
  EXPECT_EQ(avtime::render_label_response(bank.audioset_prefix[0], one), "There is the sound of rain.");
  EXPECT_EQ(avtime::render_label_response(bank.audioset_suffix[3], two), "rain, thunder can be heard.");
}

TEST(Templates, ArityMismatchRejected) {
  const auto& bank = avtime::default_template_bank();
  const std::vector<std::string> two{"rain", "thunder"};
  EXPECT_THROW(avtime::render_label_response(bank.audioset_prefix[0], two), avtime::ValidationError);
}

TEST(Templates, BankFileRoundTripAndFallback) {
  testing_support::TempDir dir;
  avtime::write_template_bank(avtime::default_template_bank(), dir.file("bank.json"));
  EXPECT_EQ(avtime::load_template_bank(dir.file("bank.json")), avtime::default_template_bank());

  testing_support::spit(dir.file("partial.json"), R"({"cba_queries":["When <tau>, what happens?"]})");
  const auto partial = avtime::load_template_bank(dir.file("partial.json"));
  EXPECT_EQ(partial.cba_queries, (std::vector<std::string>{"When <tau>, what happens?"}));
  EXPECT_EQ(partial.audio_caption_queries, avtime::default_template_bank().audio_caption_queries);

  testing_support::spit(dir.file("bad.json"), R"({"cba_queries":["no placeholder"]})");
  EXPECT_THROW(avtime::load_template_bank(dir.file("bad.json")), avtime::ValidationError);
}

TEST(FormatInterval, NearestTokenBoundaries) {
  const auto tau = avtime::format_interval(35.0, 70.0, 200.0, 100);
  EXPECT_EQ(tau.start, 18);
  EXPECT_EQ(tau.end, 34);
  EXPECT_EQ(tau.text, "from 18 to 34");
}

TEST(FormatInterval, FullSpanClampsToLastToken) {
  const auto tau = avtime::format_interval(0.0, 200.0, 200.0, 100);
  EXPECT_EQ(tau.start, 0);
  EXPECT_EQ(tau.end, 99);
}

TEST(FormatInterval, ZeroLengthStaysOrdered) {
  const auto tau = avtime::format_interval(200.0, 200.0, 200.0, 100);
  EXPECT_EQ(tau.start, 99);
  EXPECT_EQ(tau.end, 99);
}

TEST(FormatInterval, BadInputs) {
  EXPECT_THROW(avtime::format_interval(5.0, 4.0, 10.0, 100), avtime::ValidationError);
  EXPECT_THROW(avtime::format_interval(0.0, 11.0, 10.0, 100), avtime::ValidationError);
  EXPECT_THROW(avtime::format_interval(0.0, 1.0, 0.0, 100), avtime::ValidationError);
}

TEST(FormatInterval, ParseThenFormatIsStable) {
  avtime::Rng rng(10);
  for (int i = 0; i < 5000; ++i) {
    const double total = 1.0 + rng.uniform01() * 500.0;
    double a = rng.uniform01() * total, b = rng.uniform01() * total;
    if (a > b) std::swap(a, b);
    const auto tau = avtime::format_interval(a, b, total, 100);
    const auto parsed = avtime::parse_response(tau.text, total, 100);
    ASSERT_EQ(parsed.events.size(), 1u);
    const auto again = avtime::format_interval(parsed.events[0].start_s, parsed.events[0].end_s, total, 100);
    EXPECT_EQ(again.start, tau.start);
    EXPECT_EQ(again.end, tau.end);
  }
}

TEST(CbaPairs, ThreeAnnotationsSixPairs) {
  avtime::Rng rng(3);
  const auto r = avtime::gen_cba_pairs(three_annotation_video(), avtime::default_template_bank(), rng);
  ASSERT_EQ(r.pairs.size(), 6u);
  int tq = 0, ta = 0;
  for (const auto& p : r.pairs) {
    tq += p.kind == avtime::PairKind::tq_tar;
    ta += p.kind == avtime::PairKind::taq_tr;
  }
  EXPECT_EQ(tq, 3);
  EXPECT_EQ(ta, 3);
}

TEST(CbaPairs, KindInvariantsHold) {
  const std::regex tau(R"(from\s+\d+\s+to\s+\d+)");
  avtime::Rng rng(9);
  const auto r = avtime::gen_cba_pairs(three_annotation_video(), avtime::default_template_bank(), rng);
  for (const auto& p : r.pairs) {
    EXPECT_NO_THROW(avtime::validate_pair(p));
    const bool q = std::regex_search(p.query, tau);
    const bool a = std::regex_search(p.response, tau);
    if (p.kind == avtime::PairKind::tq_tar) {
      EXPECT_TRUE(q && !a) << p.query << " | " << p.response;
    } else {
      EXPECT_TRUE(!q && a) << p.query << " | " << p.response;
    }
  }
  EXPECT_EQ(r.pairs[1].response, "a dog barks, " + avtime::tau_text(0, 32) + ".");
}

TEST(CbaPairs, Deterministic) {
  avtime::Rng a(5), b(5);
  const auto& bank = avtime::default_template_bank();
  EXPECT_EQ(avtime::gen_cba_pairs(three_annotation_video(), bank, a).pairs,
            avtime::gen_cba_pairs(three_annotation_video(), bank, b).pairs);
}

TEST(CbaPairs, TimeBearingCaptionSkipped) {
  auto v = three_annotation_video();
  v.annotations[0].caption = "a dog barks from 3 to 5";
  avtime::Rng rng(0);
  const auto r = avtime::gen_cba_pairs(v, avtime::default_template_bank(), rng);
  EXPECT_EQ(r.pairs.size(), 4u);
  EXPECT_EQ(r.skipped_annotations, 1u);
}

TEST(AudioPairs, CaptionedClip) {
  avtime::Rng rng(1);
  const avtime::TrimmedClip clip{"a", 1.0, "a bell rings", std::nullopt, std::nullopt};
  const auto p = avtime::gen_audio_pairs(clip, avtime::default_template_bank(), rng);
  EXPECT_EQ(p.kind, avtime::PairKind::audio_caption);
  EXPECT_EQ(p.response, "a bell rings");
  EXPECT_FALSE(p.tau.has_value());
}

TEST(AudioPairs, NeitherFieldRejected) {
  avtime::Rng rng(1);
  const avtime::TrimmedClip clip{"a", 1.0, "", std::nullopt, std::nullopt};
  EXPECT_THROW(avtime::gen_audio_pairs(clip, avtime::default_template_bank(), rng),
               avtime::ValidationError);
}

TEST(Pairs, JsonLineRoundTrip) {
  avtime::Rng rng(2);
  for (const auto& p : avtime::gen_cba_pairs(three_annotation_video(), avtime::default_template_bank(), rng).pairs) {
    EXPECT_EQ(avtime::pair_from_json_line(avtime::pair_to_json_line(p)), p);
  }
}

TEST(Pairs, ValidateCatchesWrongSide) {
  avtime::QAPair p{"v", avtime::PairKind::tq_tar, "what happened?", "a dog, from 1 to 2.", std::pair{1, 2}};
  EXPECT_THROW(avtime::validate_pair(p), avtime::ValidationError);
  p.tau = std::pair{5, 200};
  EXPECT_THROW(avtime::validate_pair(p), avtime::ValidationError);
}

}  // namespace
