#include <gtest/gtest.h>

#include <neurolabel/error.hpp>
#include <neurolabel/label.hpp>

using namespace nlab;

TEST(NormalizeLabel, TrimsCollapsesAndLowercases) {
  EXPECT_EQ(normalize_label("  Strength  Training ").text(), "strength training");
}

TEST(NormalizeLabel, AlreadyNormalizedIsUnchanged) {
  const auto once = normalize_label("polka dots");
  EXPECT_EQ(once.text(), "polka dots");
  EXPECT_EQ(normalize_label(once.text()), once);
}

TEST(NormalizeLabel, CaseFolding) { EXPECT_EQ(normalize_label("Pool Table"), normalize_label("pool table")); }

TEST(NormalizeLabel, TabsAndNewlinesAreWhitespace) {
  EXPECT_EQ(normalize_label("\tred\n\n fruit\r").text(), "red fruit");
}

TEST(NormalizeLabel, EmptyAndBlankRejected) {
  for (const char* raw : {"", " ", "\t\n "}) {
    try {
      normalize_label(raw);
      FAIL() << "accepted '" << raw << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_label);
    }
  }
}

TEST(NormalizeLabel, IdempotentOnMessyInputs) {
  for (const char* raw : {"A  B", " x ", "MiXeD Case  Words ", "ünï  Cödé"}) {
    const auto a = normalize_label(raw);
    EXPECT_EQ(normalize_label(a.text()), a) << raw;
  }
}

TEST(ConceptLabel, WordCount) {
  EXPECT_EQ(normalize_label("gym").word_count(), 1u);
  EXPECT_EQ(normalize_label(" weightlifting   equipment ").word_count(), 2u);
}
