#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "provkit/corpus.hpp"
#include "provkit/errors.hpp"

using namespace provkit;

namespace {

RecordSet parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in, "data.jsonl");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

RecordSet human_set(std::size_t n) {
  RecordSet set;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "r%03zu", i);
    set.records.push_back(PairedRecord{id, "some human text"});
  }
  return set;
}

std::map<Split, std::size_t> split_sizes(const RecordSet& set) {
  std::map<Split, std::size_t> sizes;
  for (const auto& r : set.records) ++sizes[*r.split];
  return sizes;
}

}  // namespace

TEST(Ingest, ValidRecords) {
  const auto set = parse(R"({"id":"b","original":"x y","source":"human"}
{"id":"a","original":"x y","polished":"x z","source":"polished"}
)");
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.records[0].id, "a");  // sorted by id
  EXPECT_EQ(set.records[0].polished, "x z");
  EXPECT_EQ(set.records[1].lang_mode, TokenMode::word);
}

TEST(Ingest, MissingOriginalNamesLine) {
  const auto msg = error_of("{\"id\":\"a\",\"original\":\"x\",\"source\":\"human\"}\n{\"id\":\"b\",\"source\":\"human\"}\n");
  EXPECT_NE(msg.find("data.jsonl:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("original"), std::string::npos) << msg;
}

TEST(Ingest, DuplicateId) {
  const auto msg = error_of(
      "{\"id\":\"a1\",\"original\":\"x\",\"source\":\"human\"}\n{\"id\":\"a1\",\"original\":\"y\",\"source\":\"human\"}\n");
  EXPECT_NE(msg.find("duplicate id 'a1'"), std::string::npos) << msg;
}

TEST(Ingest, RejectsMalformedInput) {
  EXPECT_NE(error_of("{not json}\n").find(":1:"), std::string::npos);
  EXPECT_FALSE(error_of(R"({"id":"a","original":"x","source":"robot"})").empty());
  EXPECT_FALSE(error_of(R"({"id":"a","original":"x","source":"polished"})").empty());
  EXPECT_FALSE(error_of(R"({"id":"a","original":"x","source":"human","extra":1})").empty());
  EXPECT_FALSE(error_of(R"({"id":"a","original":"x","source":"human","labels":{"jaccard":0.5,"levenshtein_norm":0.5}})").empty());
  EXPECT_FALSE(
      error_of(R"({"id":"a","original":"x","polished":"y","source":"polished","labels":{"jaccard":1.5,"levenshtein_norm":0}})")
          .empty());
  EXPECT_FALSE(error_of("{\"id\":\"a\",\"original\":\"x\",\"source\":\"human\",\"lang_mode\":\"word\"}\n"
                        "{\"id\":\"b\",\"original\":\"x\",\"source\":\"human\",\"lang_mode\":\"char\"}\n")
                   .empty());
}

TEST(Ingest, SkipsBlankLines) {
  EXPECT_EQ(parse("\n{\"id\":\"a\",\"original\":\"x\",\"source\":\"human\"}\n\n").size(), 1u);
}

TEST(Ingest, MissingFile) {
  EXPECT_THROW(ingest("/nonexistent/provkit/data.jsonl"), ValidationError);
}

TEST(Jsonl, RoundTripIsByteStable) {
  RecordSet set;
  set.records.push_back(PairedRecord{"p1", "a b c", std::string("a c"), Source::polished, TokenMode::word,
                                     SimilarityLabels{1.0 / 3.0, 1.0 / 3.0}, Split::test});
  set.records.push_back(PairedRecord{"h\"1", "多语言 text", std::nullopt, Source::human});
  std::ostringstream a;
  write_jsonl(label(set), a);
  std::istringstream in(a.str());
  std::ostringstream b;
  write_jsonl(parse_jsonl(in), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Jsonl, FixedKeyOrder) {
  const PairedRecord r{"x", "o", std::string("p"), Source::polished, TokenMode::word, SimilarityLabels{0.5, 0.25},
                       Split::train};
  EXPECT_EQ(record_to_json_line(r),
            R"({"id": "x", "original": "o", "polished": "p", "source": "polished", "lang_mode": "word", )"
            R"("labels": {"jaccard": 0.500000, "levenshtein_norm": 0.250000}, "split": "train"})");
}

TEST(Label, IdentityAndHuman) {
  RecordSet set;
  set.records.push_back(PairedRecord{"a", "same text", std::string("same text"), Source::polished});
  set.records.push_back(PairedRecord{"b", "human", std::nullopt, Source::human});
  const auto out = label(set);
  EXPECT_EQ(*out.records[0].labels, (SimilarityLabels{0.0, 0.0}));
  EXPECT_EQ(*out.records[1].labels, (SimilarityLabels{0.0, 0.0}));
}

TEST(Label, WordExample) {
  RecordSet set;
  set.records.push_back(PairedRecord{"a", "a b c", std::string("a c"), Source::polished});
  const auto l = *label(set).records[0].labels;
  EXPECT_DOUBLE_EQ(l.jaccard, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(l.levenshtein_norm, 1.0 / 3.0);
}

TEST(Label, CharModeForChinese) {
  RecordSet set;
  set.records.push_back(PairedRecord{"a", "你好世界", std::string("你好世人"), Source::polished, TokenMode::char_});
  const auto l = *label(set).records[0].labels;
  EXPECT_DOUBLE_EQ(l.levenshtein_norm, 0.25);
  EXPECT_DOUBLE_EQ(l.jaccard, 2.0 / 5.0);
}

TEST(Label, Idempotent) {
  RecordSet set;
  set.records.push_back(PairedRecord{"a", "one two three", std::string("one 2 three four"), Source::polished});
  const auto once = label(set);
  EXPECT_EQ(label(once).records, once.records);
}

TEST(Split, ParseRatios) {
  const auto r = parse_ratios("6:3:1");
  EXPECT_EQ(r.train, 6u);
  EXPECT_EQ(r.test, 3u);
  EXPECT_EQ(r.val, 1u);
  EXPECT_THROW(parse_ratios("6:3"), ValidationError);
  EXPECT_THROW(parse_ratios("0:0:0"), ValidationError);
  EXPECT_THROW(parse_ratios("a:b:c"), ValidationError);
}

TEST(Split, ApportionSumsAndFollowsRatios) {
  EXPECT_EQ(apportion(10, {6, 3, 1}), (std::array<std::size_t, 3>{6, 3, 1}));
  EXPECT_EQ(apportion(100, {6, 3, 1}), (std::array<std::size_t, 3>{60, 30, 10}));
  for (std::size_t n = 0; n < 200; ++n) {
    const auto a = apportion(n, {6, 3, 1});
    EXPECT_EQ(a[0] + a[1] + a[2], n);
    // Each share is within one of its exact quota.
    EXPECT_LE(std::abs(static_cast<double>(a[0]) - 0.6 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(a[1]) - 0.3 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(a[2]) - 0.1 * n), 1.0);
  }
}

TEST(Split, TenRecords631) {
  const auto sizes = split_sizes(split(human_set(10), {6, 3, 1}, 1));
  EXPECT_EQ(sizes.at(Split::train), 6u);
  EXPECT_EQ(sizes.at(Split::test), 3u);
  EXPECT_EQ(sizes.at(Split::val), 1u);
}

TEST(Split, DeterministicPerSeedAndSeedsDiffer) {
  const auto a = split(human_set(100), {6, 3, 1}, 7);
  const auto b = split(human_set(100), {6, 3, 1}, 7);
  const auto c = split(human_set(100), {6, 3, 1}, 8);
  EXPECT_EQ(a.records, b.records);
  EXPECT_NE(a.records, c.records);
  for (const auto& s : {a, c}) {
    const auto sizes = split_sizes(s);
    EXPECT_EQ(sizes.at(Split::train), 60u);
    EXPECT_EQ(sizes.at(Split::test), 30u);
    EXPECT_EQ(sizes.at(Split::val), 10u);
  }
}

TEST(Split, IndependentOfInputOrder) {
  auto set = human_set(40);
  auto reversed = set;
  std::reverse(reversed.records.begin(), reversed.records.end());
  EXPECT_EQ(split(set, {6, 3, 1}, 3).records, split(reversed, {6, 3, 1}, 3).records);
}

TEST(Split, PairsNeverStraddle) {
  RecordSet set;
  for (int i = 0; i < 50; ++i) {
    const std::string stem = "doc" + std::to_string(i);
    set.records.push_back(PairedRecord{stem + "#h", "human text"});
    set.records.push_back(PairedRecord{stem + "#p", "human text", std::string("polished text"), Source::polished});
  }
  const auto out = split(set, {6, 3, 1}, 11);
  std::map<std::string, std::set<Split>> by_group;
  for (const auto& r : out.records) by_group[std::string(pair_key(r.id))].insert(*r.split);
  EXPECT_EQ(by_group.size(), 50u);
  for (const auto& [k, splits] : by_group) EXPECT_EQ(splits.size(), 1u) << k;
}

TEST(Split, PairKey) {
  EXPECT_EQ(pair_key("a17#h"), "a17");
  EXPECT_EQ(pair_key("a17"), "a17");
  EXPECT_EQ(pair_key("a#b#c"), "a");
}

TEST(Split, TooFewGroups) {
  EXPECT_THROW(split(human_set(2), {6, 3, 1}, 0), ValidationError);
  EXPECT_THROW(split(RecordSet{}, {6, 3, 1}, 0), ValidationError);
}
