#pragma once

// Sequence engines shared by the citation, identifier, and text detectors:
// longest common subsequence (length and alignment), greedy tiling, and
// edit distance. All are generic over any equality-comparable element type.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace nontextpd {

/// A maximal block of identical consecutive elements: a[s1 + i] == b[s2 + i]
/// for 0 <= i < length.
struct Tile {
    std::size_t s1 = 0;
    std::size_t s2 = 0;
    std::size_t length = 0;
    friend bool operator==(const Tile&, const Tile&) = default;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t up = row[j + 1];
            row[j + 1] = (a[i] == b[j]) ? diag + 1 : std::max(up, row[j]);
            diag = up;
        }
    }
    return row[b.size()];
}

template <class T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
    return lcs_length(std::span<const T>(a), std::span<const T>(b));
}

namespace detail {

// Last DP row of LCS(a, b); reverse=true processes both sequences back to front.
template <class T>
std::vector<std::size_t> lcs_row(std::span<const T> a, std::span<const T> b, bool reverse) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> row(m + 1, 0);
    for (std::size_t ii = 0; ii < n; ++ii) {
        const T& x = reverse ? a[n - 1 - ii] : a[ii];
        std::size_t diag = 0;
        for (std::size_t jj = 0; jj < m; ++jj) {
            const T& y = reverse ? b[m - 1 - jj] : b[jj];
            const std::size_t up = row[jj + 1];
            row[jj + 1] = (x == y) ? diag + 1 : std::max(up, row[jj]);
            diag = up;
        }
    }
    return row;
}

template <class T>
void hirschberg(std::span<const T> a, std::span<const T> b, std::size_t a_off, std::size_t b_off,
                std::vector<IndexPair>& out) {
    if (a.empty() || b.empty()) return;
    if (a.size() == 1) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (a[0] == b[j]) {
                out.emplace_back(a_off, b_off + j);
                return;
            }
        }
        return;
    }
    const std::size_t mid = a.size() / 2;
    const auto fwd = lcs_row(a.first(mid), b, false);
    const auto bwd = lcs_row(a.subspan(mid), b, true);
    std::size_t split = 0, best = 0;
    for (std::size_t k = 0; k <= b.size(); ++k) {
        const std::size_t v = fwd[k] + bwd[b.size() - k];
        if (v > best || k == 0) {
            best = v;
            split = k;
        }
    }
    hirschberg(a.first(mid), b.first(split), a_off, b_off, out);
    hirschberg(a.subspan(mid), b.subspan(split), a_off + mid, b_off + split, out);
}

} // namespace detail

/// One longest common subsequence as index pairs, strictly increasing in
/// both coordinates. Linear memory (Hirschberg).
template <class T>
std::vector<IndexPair> lcs_alignment(std::span<const T> a, std::span<const T> b) {
    std::vector<IndexPair> out;
    detail::hirschberg(a, b, 0, 0, out);
    return out;
}

template <class T>
std::vector<IndexPair> lcs_alignment(const std::vector<T>& a, const std::vector<T>& b) {
    return lcs_alignment(std::span<const T>(a), std::span<const T>(b));
}

/// Greedy tiling: repeatedly takes the longest common block of consecutive
/// elements not covered by earlier tiles, ties broken by smaller s1 then
/// smaller s2, and stops once the longest remaining block is shorter than
/// `min_length`. Tiles are returned in discovery order.
template <class T>
std::vector<Tile> greedy_tiling(std::span<const T> a, std::span<const T> b, std::size_t min_length = 1) {
    std::vector<Tile> tiles;
    min_length = std::max<std::size_t>(min_length, 1);
    if (a.empty() || b.empty()) return tiles;
    std::vector<char> marked_a(a.size(), 0), marked_b(b.size(), 0);
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (;;) {
        Tile best;
        std::fill(prev.begin(), prev.end(), 0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            cur[0] = 0;
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (!marked_a[i] && !marked_b[j] && a[i] == b[j]) {
                    const std::size_t len = prev[j] + 1;
                    cur[j + 1] = len;
                    const std::size_t s1 = i + 1 - len, s2 = j + 1 - len;
                    if (len > best.length ||
                        (len == best.length && (s1 < best.s1 || (s1 == best.s1 && s2 < best.s2)))) {
                        best = {s1, s2, len};
                    }
                } else {
                    cur[j + 1] = 0;
                }
            }
            std::swap(prev, cur);
        }
        if (best.length < min_length) break;
        for (std::size_t k = 0; k < best.length; ++k) {
            marked_a[best.s1 + k] = 1;
            marked_b[best.s2 + k] = 1;
        }
        tiles.push_back(best);
    }
    return tiles;
}

template <class T>
std::vector<Tile> greedy_tiling(const std::vector<T>& a, const std::vector<T>& b, std::size_t min_length = 1) {
    return greedy_tiling(std::span<const T>(a), std::span<const T>(b), min_length);
}

template <class T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
            diag = up;
        }
    }
    return row[b.size()];
}

template <class Range>
std::size_t edit_distance(const Range& a, const Range& b) {
    using T = std::remove_cvref_t<decltype(*std::begin(a))>;
    return edit_distance(std::span<const T>(std::data(a), std::size(a)), std::span<const T>(std::data(b), std::size(b)));
}

} // namespace nontextpd
