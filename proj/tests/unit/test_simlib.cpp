#include "../support/rng.hpp"

#include <nontextpd/simlib.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace nontextpd;

namespace {

std::vector<double> random_vec(testsupport::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-10, 10);
    return v;
}

// Bit-vector reading of simple matching: positions where both agree.
double simple_matching_bits(const std::set<int>& a, const std::set<int>& b, int universe) {
    int agree = 0;
    for (int i = 0; i < universe; ++i) agree += (a.contains(i) == b.contains(i)) ? 1 : 0;
    return static_cast<double>(agree) / universe;
}

} // namespace

TEST(SetSimilarity, JaccardHalf) {
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::jaccard, {1, 2, 3}, {2, 3, 4}), 0.5);
}

TEST(SetSimilarity, DiceIdentity) {
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::dice, {4, 5, 6}, {4, 5, 6}), 1.0);
}

TEST(SetSimilarity, SimpleMatchingByHand) {
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::simple_matching, {1}, {2}, 4), 0.5);
}

TEST(SetSimilarity, SimpleMatchingAgreesWithBitVectors) {
    testsupport::Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const int universe = rng.range(1, 12);
        std::set<int> a, b;
        for (int i = 0; i < universe; ++i) {
            if (rng.chance(0.4)) a.insert(i);
            if (rng.chance(0.4)) b.insert(i);
        }
        EXPECT_DOUBLE_EQ(set_similarity(Measure::simple_matching, a, b, static_cast<std::size_t>(universe)),
                         simple_matching_bits(a, b, universe));
    }
}

TEST(SetSimilarity, SimpleMatchingNeedsUniverse) {
    EXPECT_THROW(set_similarity<int>(Measure::simple_matching, {1}, {2}), Error);
    EXPECT_THROW(set_similarity<int>(Measure::simple_matching, {1}, {2}, 1), Error);
}

TEST(SetSimilarity, EmptyConventions) {
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::jaccard, {}, {}), 1.0);
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::dice, {}, {}), 1.0);
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::overlap, {}, {}), 1.0);
    try {
        set_similarity<int>(Measure::containment, {}, {1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_denominator);
    }
}

TEST(SetSimilarity, ContainmentIsAsymmetric) {
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::containment, {1, 2}, {1, 2, 3, 4}), 1.0);
    EXPECT_DOUBLE_EQ(set_similarity<int>(Measure::containment, {1, 2, 3, 4}, {1, 2}), 0.5);
}

TEST(SetSimilarity, RangeSymmetryAndIdentity) {
    testsupport::Rng rng(5);
    for (int t = 0; t < 1000; ++t) {
        std::set<int> a, b;
        for (int i = rng.range(1, 8); i > 0; --i) a.insert(rng.range(0, 12));
        for (int i = rng.range(1, 8); i > 0; --i) b.insert(rng.range(0, 12));
        for (auto m : {Measure::jaccard, Measure::dice, Measure::overlap}) {
            const double s = set_similarity(m, a, b);
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
            EXPECT_DOUBLE_EQ(s, set_similarity(m, b, a));
            EXPECT_DOUBLE_EQ(set_similarity(m, a, a), 1.0);
        }
        const double c = set_similarity(Measure::containment, a, b);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
    }
}

TEST(SequenceSimilarity, Examples) {
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_hamming, "kitten", "sitten"), 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_lcs, std::vector<int>{1, 2, 3, 4}, std::vector<int>{2, 4, 1, 3}),
                     0.5);
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_levenshtein, "ab", "ab"), 0.0);
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_levenshtein, "kitten", "sitting"), 3.0 / 13.0);
}

TEST(SequenceSimilarity, HammingLengthMismatch) {
    try {
        sequence_similarity(Measure::norm_hamming, "abc", "ab");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::length_mismatch);
    }
}

TEST(SequenceSimilarity, EmptyConventions) {
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_hamming, "", ""), 1.0);
    EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_lcs, "", ""), 1.0);
}

TEST(SequenceSimilarity, NormLcsProperties) {
    testsupport::Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        std::vector<int> a(static_cast<std::size_t>(rng.range(1, 15))), b(static_cast<std::size_t>(rng.range(1, 15)));
        for (auto& x : a) x = rng.range(0, 3);
        for (auto& x : b) x = rng.range(0, 3);
        EXPECT_DOUBLE_EQ(sequence_similarity(Measure::norm_lcs, a, a), 1.0);
        // deleting an element of b never raises the score
        const double before = sequence_similarity(Measure::norm_lcs, a, b);
        auto shorter = b;
        shorter.erase(shorter.begin() + static_cast<long>(rng.below(shorter.size())));
        EXPECT_LE(sequence_similarity(Measure::norm_lcs, a, shorter), before);
    }
}

TEST(VectorDistance, Examples) {
    EXPECT_DOUBLE_EQ(vector_distance(Measure::euclidean, {0, 0}, {3, 4}), 5.0);
    EXPECT_DOUBLE_EQ(vector_distance(Measure::chebyshev, {1, 5}, {4, 1}), 4.0);
    EXPECT_NEAR(vector_distance(MeasureId::minkowski(3), {0, 0}, {1, 1}), std::cbrt(2.0), 1e-15);
}

TEST(VectorDistance, CanberraZeroTermsAndVariant) {
    EXPECT_DOUBLE_EQ(vector_distance(Measure::canberra, {0, 1}, {0, 3}), 0.5);
    EXPECT_DOUBLE_EQ(vector_distance(Measure::canberra, {0, 1}, {0, 3}, CanberraVariant::squared), 1.0);
}

TEST(VectorDistance, MinkowskiLimits) {
    testsupport::Rng rng(9);
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_vec(rng, 6), b = random_vec(rng, 6);
        EXPECT_NEAR(vector_distance(MeasureId::minkowski(1), a, b), vector_distance(Measure::manhattan, a, b), 1e-12);
        EXPECT_NEAR(vector_distance(MeasureId::minkowski(2), a, b), vector_distance(Measure::euclidean, a, b), 1e-12);
    }
    EXPECT_THROW(MeasureId::minkowski(0.5), Error);
}

TEST(VectorDistance, TriangleInequality) {
    testsupport::Rng rng(13);
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_vec(rng, 5), b = random_vec(rng, 5), c = random_vec(rng, 5);
        for (auto m : {Measure::euclidean, Measure::manhattan, Measure::chebyshev})
            EXPECT_LE(vector_distance(m, a, c), vector_distance(m, a, b) + vector_distance(m, b, c) + 1e-12);
    }
}

TEST(VectorDistance, Errors) {
    EXPECT_THROW(vector_distance(Measure::euclidean, {1, 2}, {1}), Error);
    EXPECT_THROW(cosine_similarity({0, 0}, {1, 1}), Error);
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {-1, 0}), -1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 2}, {2, 4}), 1.0);
}
