#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctxk/glob.hpp"
#include "ctxk/text.hpp"
#include "ctxk/tier.hpp"
#include "fixtures.hpp"

using namespace ctxk;

TEST(Glob, Examples) {
  const std::vector<std::string> assigned{"henderson", "acme"};
  EXPECT_TRUE(glob_match("*", "any/deep/path.md"));
  EXPECT_TRUE(glob_match("clients/${assigned}/*", "clients/henderson/profile.md", assigned));
  EXPECT_TRUE(glob_match("clients/${assigned}/*", "clients/acme/x.md", assigned));
  EXPECT_FALSE(glob_match("clients/${assigned}/*", "clients/globex/x.md", assigned));
  EXPECT_FALSE(glob_match("clients/${assigned}/*", "clients/henderson/a/b.md", assigned));
  EXPECT_FALSE(glob_match("clients/${assigned}/*", "clients/henderson/profile.md"));
  EXPECT_TRUE(glob_match("*/contracts/*", "henderson/contracts/msa.md"));
  EXPECT_FALSE(glob_match("*/contracts/*", "contracts/msa.md"));
  EXPECT_TRUE(glob_match("pipeline/*", "pipeline/q3.md"));
  EXPECT_TRUE(glob_match("report-*.md", "report-2026.md"));
}

TEST(Glob, Validity) {
  for (const char* ok : {"*", "a/*", "clients/${assigned}/*", "*/x/*", "a-b_c.d"}) EXPECT_TRUE(valid_glob(ok)) << ok;
  for (const char* bad : {"", "**", "a/**/b", "/abs", "a//b", "${user}/x", "a/"}) EXPECT_FALSE(valid_glob(bad)) << bad;
  EXPECT_TRUE(glob_uses_assigned("x/${assigned}"));
  EXPECT_FALSE(glob_uses_assigned("x/*"));
}

TEST(Glob, AgreesWithRegexOracle) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> segs{"a", "b", "clients", "henderson", "x.md", "q3-report", "acme"};
  const std::vector<std::string> pat_segs{"*", "a", "b*", "*.md", "clients", "${assigned}", "q*-report", "*e*"};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  int agreed = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string pattern;
    std::string path;
    const int pn = 1 + static_cast<int>(rng() % 3);
    const int sn = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < pn; ++k) pattern += (k ? "/" : "") + pick(pat_segs);
    for (int k = 0; k < sn; ++k) path += (k ? "/" : "") + pick(segs);
    std::vector<std::string> assigned;
    for (int k = 0, n = static_cast<int>(rng() % 3); k < n; ++k) assigned.push_back(pick(segs));
    ASSERT_TRUE(valid_glob(pattern)) << pattern;
    ASSERT_EQ(glob_match(pattern, path, assigned), ctxk::testing::glob_oracle(pattern, path, assigned))
        << pattern << " vs " << path;
    ++agreed;
  }
  EXPECT_EQ(agreed, 3000);
}

TEST(Text, TokenCountIsCeilOfCodePointsOverFour) {
  EXPECT_EQ(text::token_count(""), 0u);
  EXPECT_EQ(text::token_count("a"), 1u);
  EXPECT_EQ(text::token_count("abcd"), 1u);
  EXPECT_EQ(text::token_count("abcde"), 2u);
  EXPECT_EQ(text::token_count(std::string(12000, 'x')), 3000u);
  // Four two-byte code points.
  EXPECT_EQ(text::token_count("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9"), 1u);
  EXPECT_EQ(text::utf8_length("\xc3\xa9x"), 2u);
}

TEST(Text, TruncateRespectsBudgetAndCodePoints) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string s;
    for (int k = 0, n = static_cast<int>(rng() % 300); k < n; ++k) s += (rng() % 3 == 0) ? "\xc3\xa9" : "q";
    const std::size_t budget = rng() % 80;
    const auto t = text::truncate_to_tokens(s, budget);
    EXPECT_LE(text::token_count(t), budget);
    EXPECT_EQ(s.compare(0, t.size(), t), 0);
    if (text::token_count(s) <= budget) EXPECT_EQ(t, s);
    // Never ends inside a multi-byte sequence.
    if (!t.empty()) EXPECT_NE(static_cast<unsigned char>(t.back()), 0xc3);
  }
}

TEST(Text, TokenizeDropsStopwordsAndSingles) {
  EXPECT_EQ(text::tokenize("What is the Henderson deal status?"),
            (std::vector<std::string>{"henderson", "deal", "status"}));
  EXPECT_TRUE(text::tokenize("a I of the").empty());
  EXPECT_EQ(text::to_lower("AbC"), "abc");
}

TEST(Text, CosineMatchesDotOfNormalisedVectors) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> vocab{"pricing", "henderson", "renewal", "salary", "budget", "q3", "deal", "report"};
  for (int i = 0; i < 300; ++i) {
    std::string a;
    std::string b;
    for (int k = 0; k < 6; ++k) a += vocab[rng() % vocab.size()] + " ";
    for (int k = 0; k < 6; ++k) b += vocab[rng() % vocab.size()] + " ";
    const auto va = text::term_vector(a);
    const auto vb = text::term_vector(b);
    ASSERT_EQ(va.size(), text::kVectorDim);
    EXPECT_NEAR(ctxk::testing::dot(va, va), 1.0, 1e-9);
    EXPECT_NEAR(text::cosine(va, vb), ctxk::testing::dot(va, vb), 1e-9);
    EXPECT_NEAR(text::cosine(va, va), 1.0, 1e-9);
  }
  const auto zero = text::term_vector("the of a");
  EXPECT_DOUBLE_EQ(ctxk::testing::dot(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(text::cosine(zero, text::term_vector("pricing")), 0.0);
}

TEST(Tier, TotalOrder) {
  const std::vector<Tier> all{Tier::autonomous, Tier::soft_approval, Tier::strong_approval, Tier::excluded};
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(parse_tier(to_string(all[i])), all[i]);
    for (std::size_t j = 0; j < all.size(); ++j) EXPECT_EQ(at_least_as_restrictive(all[i], all[j]), i >= j);
  }
  EXPECT_FALSE(parse_tier("soft"));
}
