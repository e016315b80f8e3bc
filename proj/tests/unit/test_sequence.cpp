#include "../support/oracles.hpp"
#include "../support/rng.hpp"

#include <nontextpd/sequence.hpp>

#include <gtest/gtest.h>

#include <string>
#include <vector>

using namespace nontextpd;

TEST(Lcs, Examples) {
    const std::vector<char> a{'A', 'B', 'C', 'B', 'D', 'A', 'B'}, b{'B', 'D', 'C', 'A', 'B', 'A'};
    EXPECT_EQ(lcs_length(a, b), 4U);
    EXPECT_EQ(lcs_alignment(a, b).size(), 4U);
    EXPECT_TRUE(lcs_alignment(std::vector<int>{}, std::vector<int>{1, 2}).empty());
}

TEST(Lcs, AlignmentIsIncreasingAndMatches) {
    testsupport::Rng rng(31);
    for (int t = 0; t < 2000; ++t) {
        std::vector<int> a(rng.below(30)), b(rng.below(30));
        for (auto& x : a) x = rng.range(0, 4);
        for (auto& x : b) x = rng.range(0, 4);
        const auto pairs = lcs_alignment(a, b);
        ASSERT_EQ(pairs.size(), oracle::lcs(a, b));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            EXPECT_EQ(a[pairs[k].first], b[pairs[k].second]);
            if (k) {
                EXPECT_LT(pairs[k - 1].first, pairs[k].first);
                EXPECT_LT(pairs[k - 1].second, pairs[k].second);
            }
        }
    }
}

TEST(GreedyTiling, LongestFirstWithTieBreak) {
    const std::vector<int> a{1, 2, 3, 9, 4, 5}, b{4, 5, 1, 2, 3};
    const auto tiles = greedy_tiling(a, b, 2);
    ASSERT_EQ(tiles.size(), 2U);
    EXPECT_EQ(tiles[0], (Tile{0, 2, 3}));
    EXPECT_EQ(tiles[1], (Tile{4, 0, 2}));
    EXPECT_EQ(greedy_tiling(a, b, 4).size(), 0U);
}

TEST(GreedyTiling, TilesDoNotOverlapAndMatchOracle) {
    testsupport::Rng rng(37);
    for (int t = 0; t < 2000; ++t) {
        std::vector<int> a(rng.below(25)), b(rng.below(25));
        for (auto& x : a) x = rng.range(0, 3);
        for (auto& x : b) x = rng.range(0, 3);
        const std::size_t min_len = 1 + rng.below(3);
        const auto tiles = greedy_tiling(a, b, min_len);
        EXPECT_EQ(tiles, oracle::tiling(a, b, min_len));
        std::vector<int> used_a(a.size()), used_b(b.size());
        for (const auto& tile : tiles) {
            EXPECT_GE(tile.length, min_len);
            for (std::size_t k = 0; k < tile.length; ++k) {
                EXPECT_EQ(a[tile.s1 + k], b[tile.s2 + k]);
                EXPECT_EQ(used_a[tile.s1 + k]++, 0);
                EXPECT_EQ(used_b[tile.s2 + k]++, 0);
            }
        }
    }
}

TEST(EditDistance, Examples) {
    EXPECT_EQ(edit_distance(std::string("kitten"), std::string("sitting")), 3U);
    EXPECT_EQ(edit_distance(std::string(""), std::string("abc")), 3U);
    EXPECT_EQ(edit_distance(std::string("abc"), std::string("abc")), 0U);
}
