#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include <neurolabel/error.hpp>
#include <neurolabel/scoreboard.hpp>

#include "test_support.hpp"

using namespace nlab;
using nlab::test::L;

namespace {

ScoreboardEntry pre(const char* l, double s) { return {L(l), s, 0, Origin::predefined, {}}; }
ScoreboardEntry gen(const char* l, double s, std::size_t step) { return {L(l), s, step, Origin::generated, {}}; }
Scoreboard board() { return Scoreboard(NeuronAddress{"avgpool", 1255}); }

}  // namespace

TEST(ScoreboardInsert, FirstEntry) {
  auto b = board();
  EXPECT_TRUE(b.insert(pre("pool table", 0.96)));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.entries()[0].label.text(), "pool table");
  EXPECT_DOUBLE_EQ(b.entries()[0].score, 0.96);
}

TEST(ScoreboardInsert, DuplicateKeepsSingleEntry) {
  auto b = board();
  EXPECT_TRUE(b.insert(gen("weightlifting", 1.47, 7)));
  EXPECT_FALSE(b.insert(gen("weightlifting", 1.47, 9)));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.entries()[0].step, 7u);
  EXPECT_EQ(b.proposal_history().size(), 2u);
}

TEST(ScoreboardInsert, DuplicateNeverOverwritesScore) {
  auto b = board();
  b.insert(gen("gym", 1.91, 4));
  b.insert(gen("GYM", 5.0, 5));
  EXPECT_DOUBLE_EQ(b.find(L("gym"))->score, 1.91);
}

TEST(ScoreboardInsert, PreservesEarlierLabels) {
  auto b = nlab::test::golden_board();
  const auto before = b.entries();
  b.insert(gen("kettlebell", 0.5, 12));
  for (const auto& e : before) EXPECT_TRUE(b.contains(e.label)) << e.label.text();
}

TEST(ScoreboardInsert, RejectsInconsistentOriginAndStep) {
  auto b = board();
  EXPECT_THROW(b.insert({L("x"), 1.0, 0, Origin::generated, {}}), std::invalid_argument);
  EXPECT_THROW(b.insert({L("x"), 1.0, 3, Origin::predefined, {}}), std::invalid_argument);
}

TEST(ScoreboardInsert, RejectsDecreasingStep) {
  auto b = board();
  b.insert(gen("a", 1.0, 5));
  EXPECT_THROW(b.insert(gen("b", 1.0, 4)), std::invalid_argument);
}

TEST(ScoreboardInsert, PredefinedNotInHistory) {
  auto b = board();
  b.insert(pre("pool table", 0.96));
  EXPECT_TRUE(b.proposal_history().empty());
}

TEST(ScoreboardBest, GoldenBest) {
  const auto b = nlab::test::golden_board();
  EXPECT_EQ(b.best().label.text(), "strength training");
  EXPECT_DOUBLE_EQ(b.best().score, 2.08);
}

TEST(ScoreboardBest, SingleEntry) {
  auto b = board();
  b.insert(gen("gym", 1.91, 4));
  EXPECT_EQ(b.best().label.text(), "gym");
}

TEST(ScoreboardBest, TieBreaksOnEarlierStep) {
  auto b = board();
  b.insert(gen("zebra", 1.0, 3));
  b.insert(gen("apple", 1.0, 7));
  EXPECT_EQ(b.best().step, 3u);
}

TEST(ScoreboardBest, TieBreaksOnLabelAtSameStep) {
  auto b = board();
  b.insert(pre("zebra", 1.0));
  b.insert(pre("apple", 1.0));
  EXPECT_EQ(b.best().label.text(), "apple");
}

TEST(ScoreboardBest, EmptyBoardThrows) {
  auto b = board();
  try {
    (void)b.best();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_scoreboard);
  }
}

TEST(ScoreboardTopK, GoldenTopThree) {
  const auto top = nlab::test::golden_board().top_k(3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].label.text(), "strength training");
  EXPECT_EQ(top[1].label.text(), "gym");
  EXPECT_EQ(top[2].label.text(), "weightlifting");
  EXPECT_DOUBLE_EQ(top[0].score, 2.08);
  EXPECT_DOUBLE_EQ(top[1].score, 1.91);
  EXPECT_DOUBLE_EQ(top[2].score, 1.47);
}

TEST(ScoreboardTopK, LargerThanBoardReturnsAllSorted) {
  const auto b = nlab::test::golden_board();
  const auto all = b.top_k(1000);
  ASSERT_EQ(all.size(), b.size());
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), ranks_before));
}

TEST(ScoreboardTopK, KOneIsBest) {
  const auto b = nlab::test::golden_board();
  ASSERT_EQ(b.top_k(1).size(), 1u);
  EXPECT_EQ(b.top_k(1)[0].label, b.best().label);
}

TEST(ScoreboardForbidden, AfterStepFour) {
  auto b = board();
  for (const char* l : {"pool table", "barbell", "exercise mat"}) b.insert(pre(l, 0.5));
  b.insert(gen("exercise mat", 0.59, 1));
  b.insert(gen("flat surface", 0.11, 2));
  b.insert(gen("weight plate", 0.08, 3));
  b.insert(gen("gym", 1.91, 4));
  for (const char* l : {"exercise mat", "flat surface", "weight plate", "gym"}) EXPECT_TRUE(b.is_forbidden(L(l))) << l;
  EXPECT_FALSE(b.is_forbidden(L("pool table")));
}

TEST(ScoreboardForbidden, FreshBoardIsEmpty) {
  auto b = board();
  b.insert(pre("pool table", 0.96));
  EXPECT_TRUE(b.forbidden_set().empty());
}

TEST(ScoreboardForbidden, DuplicatesCollapse) {
  const auto f = nlab::test::golden_board().forbidden_set();
  EXPECT_EQ(std::count(f.begin(), f.end(), L("weightlifting")), 1);
}

TEST(ScoreboardForbidden, NoteProposalCountsAsProposed) {
  auto b = board();
  b.note_proposal(L("Weightlifting"));
  EXPECT_TRUE(b.is_forbidden(L("weightlifting")));
  EXPECT_TRUE(b.empty());
}

TEST(ScoreboardProperty, RandomInsertsKeepInvariants) {
  std::mt19937_64 gen64(5);
  std::uniform_real_distribution<double> score(-3, 3);
  std::uniform_int_distribution<int> pick(0, 29);
  for (int trial = 0; trial < 200; ++trial) {
    auto b = board();
    double running_max = -1e300;
    std::size_t forbidden_size = 0;
    std::size_t step = 0;
    for (int i = 0; i < 40; ++i) {
      const bool predefined = i < 5;
      if (!predefined && pick(gen64) % 3 == 0) ++step;
      if (!predefined && step == 0) step = 1;
      const auto label = L("c" + std::to_string(pick(gen64)));
      const double s = score(gen64);
      const bool dup = b.contains(label);
      const double prev_best = b.empty() ? -1e300 : b.best().score;
      b.insert({label, s, predefined ? 0 : step, predefined ? Origin::predefined : Origin::generated, {}});
      if (!dup) {
        ASSERT_DOUBLE_EQ(b.best().score, std::max(prev_best, s));
      }
      ASSERT_GE(b.best().score, running_max);
      running_max = b.best().score;
      const auto f = b.forbidden_set().size();
      ASSERT_GE(f, forbidden_size);
      forbidden_size = f;
    }
    // unique labels, non-decreasing steps, generated labels in history
    std::set<std::string> seen;
    std::size_t last = 0;
    for (const auto& e : b.entries()) {
      ASSERT_TRUE(seen.insert(e.label.text()).second);
      ASSERT_GE(e.step, last);
      last = e.step;
      if (e.origin != Origin::predefined) ASSERT_TRUE(b.is_forbidden(e.label));
    }
  }
}

TEST(ScoreboardProperty, BestInvariantUnderEqualScorePermutations) {
  std::vector<std::pair<std::string, std::size_t>> items{{"d", 4}, {"b", 2}, {"a", 3}, {"c", 2}};
  std::sort(items.begin(), items.end());
  std::string expected;
  do {
    auto b = board();
    auto sorted = items;
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.second < y.second; });
    // steps must be non-decreasing on insert, so permute only within a step
    for (auto& [l, s] : sorted) b.insert(gen(l.c_str(), 1.0, s));
    if (expected.empty()) expected = b.best().label.text();
    EXPECT_EQ(b.best().label.text(), expected);
  } while (std::next_permutation(items.begin(), items.end()));
  EXPECT_EQ(expected, "b");
}

TEST(ScoreboardJson, ByteStableLayout) {
  auto b = board();
  b.insert(pre("pool table", 0.96));
  b.insert(gen("gym", 1.91, 4));
  const std::string expected =
      "{\n"
      "  \"neuron\": {\"layer\": \"avgpool\", \"index\": 1255},\n"
      "  \"entries\": [\n"
      "    {\"label\": \"pool table\", \"score\": 0.960000, \"step\": 0, \"origin\": \"predefined\"},\n"
      "    {\"label\": \"gym\", \"score\": 1.910000, \"step\": 4, \"origin\": \"generated\"}\n"
      "  ],\n"
      "  \"proposal_history\": [\"gym\"]\n"
      "}\n";
  EXPECT_EQ(to_json(b), expected);
}

TEST(ScoreboardJson, RoundTrip) {
  const auto b = nlab::test::golden_board();
  const auto text = to_json(b);
  const auto back = scoreboard_from_json(text);
  EXPECT_EQ(to_json(back), text);
  EXPECT_EQ(back.proposal_history(), b.proposal_history());
  EXPECT_EQ(back.neuron(), b.neuron());
}

TEST(ScoreboardJson, EscapesQuotes) {
  auto b = board();
  b.insert(gen("say \"hi\"", 1.0, 1));
  const auto back = scoreboard_from_json(to_json(b));
  EXPECT_EQ(back.entries()[0].label.text(), "say \"hi\"");
}

TEST(Origin, TextRoundTrip) {
  for (auto o : {Origin::predefined, Origin::generated, Origin::summary}) EXPECT_EQ(parse_origin(to_string(o)), o);
  EXPECT_THROW(parse_origin("novel"), Error);
}
