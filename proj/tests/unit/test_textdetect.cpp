#include "../support/oracles.hpp"
#include "../support/rng.hpp"

#include <nontextpd/docmodel.hpp>
#include <nontextpd/textdetect.hpp>

#include <gtest/gtest.h>

using namespace nontextpd;

namespace {

std::string random_letters(testsupport::Rng& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng.range(0, 25)));
    return s;
}

std::vector<Token> random_words(testsupport::Rng& rng, std::size_t n, int vocab) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) text += "w" + std::to_string(rng.range(0, vocab - 1)) + " ";
    return tokenize_text(text);
}

} // namespace

TEST(Fnv1a, ReferenceValues) {
    EXPECT_EQ(fnv1a_64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a_64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a_64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Fingerprint, RetainedHashesHaveZeroLowBits) {
    testsupport::Rng rng(53);
    const auto toks = random_words(rng, 2000, 500);
    const auto fp = build_fingerprint(toks);
    for (auto h : fp.signatures) EXPECT_EQ(h & 0xF, 0U);
    EXPECT_TRUE(std::is_sorted(fp.signatures.begin(), fp.signatures.end()));
    EXPECT_EQ(build_fingerprint(toks).signatures, fp.signatures);
}

TEST(Fingerprint, RetentionFractionNearOneInSixteen) {
    testsupport::Rng rng(59);
    const auto toks = random_words(rng, 10000, 100000);
    const double share = static_cast<double>(build_fingerprint(toks).signatures.size()) / (toks.size() - 2);
    EXPECT_GE(share, 0.7 / 16);
    EXPECT_LE(share, 1.3 / 16);
}

TEST(Fingerprint, TooFewTokens) {
    EXPECT_TRUE(build_fingerprint(tokenize_text("two words")).signatures.empty());
    EXPECT_DOUBLE_EQ(fingerprint_similarity(build_fingerprint(std::vector<Token>{}), build_fingerprint(std::vector<Token>{})),
                     0.0);
}

TEST(Fingerprint, SimilarityFormula) {
    EXPECT_NEAR(fingerprint_similarity(5, 10, 10), 100.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(fingerprint_similarity(4, 4, 4), 100.0);
    testsupport::Rng rng(61);
    const auto toks = random_words(rng, 3000, 1000);
    const auto fp = build_fingerprint(toks);
    EXPECT_DOUBLE_EQ(fingerprint_similarity(fp, fp), 100.0);
}

TEST(Encoplot, IdenticalTextPairsTheDiagonal) {
    testsupport::Rng rng(67);
    const auto s = random_letters(rng, 300);
    const auto m = encoplot_matches(s, s);
    ASSERT_EQ(m.size(), 300U - 15U);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m[i], (GramMatch{i, i}));
    EXPECT_DOUBLE_EQ(encoplot_score(m, s, s), 100.0);
    EXPECT_DOUBLE_EQ(encoplot_score(m, s, s, EncoplotNormalization::gram_count), 100.0);
}

TEST(Encoplot, SingleSharedGramCoversSixteenBytes) {
    testsupport::Rng rng(71);
    const auto a = random_letters(rng, 100);
    const auto b = std::string(100, '#') + a.substr(40, 16) + std::string(100, '#');
    const auto m = encoplot_matches(a, b);
    ASSERT_EQ(m.size(), 1U);
    EXPECT_EQ(m[0], (GramMatch{40, 100}));
    EXPECT_DOUBLE_EQ(encoplot_score(m, a, b), 16.0);
}

TEST(Encoplot, RepeatedGramsPairInOrder) {
    const std::string g = "abcdefghijklmnop";
    const auto m = encoplot_matches(g + "#" + g + "#" + g, "$" + g + "$");
    ASSERT_EQ(m.size(), 1U);
    EXPECT_EQ(m[0], (GramMatch{0, 1}));
    const auto oracle = oracle::gram_pairs(g + "#" + g, g + "%" + g);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& x : encoplot_matches(g + "#" + g, g + "%" + g)) got.emplace(x.a_pos, x.b_pos);
    EXPECT_EQ(got, oracle);
}

TEST(Encoplot, CaseFolding) {
    const std::string a = "The Quick Brown Fox Jumps";
    const std::string b = "the quick brown fox jumps";
    EXPECT_EQ(encoplot_matches(a, b).size(), a.size() - 15);
    EXPECT_TRUE(encoplot_matches(a, b, EncoplotConfig{false}).empty());
    EXPECT_TRUE(encoplot_matches("short", b).empty());
}

TEST(Encoplot, SpansMergeDiagonalRuns) {
    testsupport::Rng rng(73);
    const auto a = random_letters(rng, 80);
    const auto b = "xx" + a.substr(10, 40) + "yy";
    const auto spans = encoplot_spans(encoplot_matches(a, b));
    ASSERT_EQ(spans.size(), 1U);
    EXPECT_EQ(spans[0].a_start, 10U);
    EXPECT_EQ(spans[0].a_end, 50U);
    EXPECT_EQ(spans[0].b_start, 2U);
    EXPECT_EQ(spans[0].b_end, 42U);
}

TEST(CommonSubstrings, MaximalSpanWithOffsets) {
    const std::string a = "the quick brown fox jumps over the lazy dog";
    const std::string b = "a b the quick brown fox jumps over the lazy dog c";
    const auto spans = common_substrings(tokenize_text(a), tokenize_text(b));
    ASSERT_EQ(spans.size(), 1U);
    EXPECT_EQ(spans[0].token_count, 9U);
    EXPECT_EQ(spans[0].a_start, 0U);
    EXPECT_EQ(spans[0].a_end, a.size());
    EXPECT_EQ(spans[0].b_start, 4U);
    EXPECT_EQ(b.substr(spans[0].b_start, spans[0].b_end - spans[0].b_start), a);
}

TEST(CommonSubstrings, TokenAndCharacterFloors) {
    EXPECT_TRUE(common_substrings(tokenize_text("one two three four five"), tokenize_text("one two three four five")).empty());
    const auto t = tokenize_text("a b c d e f");
    EXPECT_TRUE(common_substrings(t, t).empty());
    EXPECT_EQ(common_substrings(t, t, SubstringConfig{6, 6}).size(), 1U);
}

TEST(CommonSubstrings, SpansAreMaximal) {
    testsupport::Rng rng(79);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_words(rng, 200, 6);
        const auto b = random_words(rng, 200, 6);
        for (const auto& s : common_substrings(a, b, SubstringConfig{4, 4})) {
            std::size_t i = 0, j = 0;
            while (a[i].offset != s.a_start) ++i;
            while (b[j].offset != s.b_start) ++j;
            for (std::size_t k = 0; k < s.token_count; ++k) ASSERT_EQ(a[i + k].text, b[j + k].text);
            if (i > 0 && j > 0) EXPECT_NE(a[i - 1].text, b[j - 1].text);
            if (i + s.token_count < a.size() && j + s.token_count < b.size())
                EXPECT_NE(a[i + s.token_count].text, b[j + s.token_count].text);
        }
    }
}
