#pragma once

// Lexical baselines: hashed word n-gram fingerprints with zero-bit
// retention, first-to-first character 16-gram matching, and maximal
// repeated token substrings.

#include "docmodel.hpp"
#include "utf8.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nontextpd {

inline constexpr std::uint64_t fnv1a_64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct FingerprintConfig {
    std::size_t ngram_len = 3;
    unsigned retention_zero_bits = 4; // keeps on average 1 in 2^bits signatures
};

struct Fingerprint {
    std::vector<std::uint64_t> signatures; // ascending, duplicates kept
    std::size_t ngram_len = 3;
    unsigned retention_zero_bits = 4;
};

/// Hashes every word n-gram (tokens joined by single spaces) with FNV-1a and
/// keeps the hashes whose lowest `retention_zero_bits` bits are zero.
inline Fingerprint build_fingerprint(std::span<const Token> tokens, const FingerprintConfig& cfg = {}) {
    Fingerprint fp{{}, cfg.ngram_len, cfg.retention_zero_bits};
    if (cfg.ngram_len == 0 || tokens.size() < cfg.ngram_len) return fp;
    const std::uint64_t mask = cfg.retention_zero_bits >= 64 ? ~0ULL : ((1ULL << cfg.retention_zero_bits) - 1);
    std::string gram;
    for (std::size_t i = 0; i + cfg.ngram_len <= tokens.size(); ++i) {
        gram.clear();
        for (std::size_t k = 0; k < cfg.ngram_len; ++k) {
            if (k) gram.push_back(' ');
            gram += tokens[i + k].text;
        }
        const auto h = fnv1a_64(gram);
        if ((h & mask) == 0) fp.signatures.push_back(h);
    }
    std::sort(fp.signatures.begin(), fp.signatures.end());
    return fp;
}

inline Fingerprint build_fingerprint(const std::vector<Token>& tokens, const FingerprintConfig& cfg = {}) {
    return build_fingerprint(std::span<const Token>(tokens), cfg);
}

inline std::size_t matching_signatures(const Fingerprint& a, const Fingerprint& b) {
    std::size_t m = 0;
    auto i = a.signatures.begin();
    auto j = b.signatures.begin();
    while (i != a.signatures.end() && j != b.signatures.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else { ++m; ++i; ++j; }
    }
    return m;
}

/// 100 |m| / (|d1| + |d2| - |m|); 0 when both fingerprints are empty.
inline double fingerprint_similarity(std::size_t matches, std::size_t d1, std::size_t d2) {
    const std::size_t den = d1 + d2 - matches;
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(matches) / static_cast<double>(den);
}

inline double fingerprint_similarity(const Fingerprint& a, const Fingerprint& b) {
    return fingerprint_similarity(matching_signatures(a, b), a.signatures.size(), b.signatures.size());
}

// ---------------------------------------------------------------------------
// Character 16-gram matching

inline constexpr std::size_t encoplot_gram = 16;

struct GramMatch {
    std::size_t a_pos = 0;
    std::size_t b_pos = 0;
    friend bool operator==(const GramMatch&, const GramMatch&) = default;
};

struct EncoplotConfig {
    bool lowercase = true;
};

inline std::string encoplot_prepare(std::string_view text, const EncoplotConfig& cfg) {
    std::string s(text);
    if (cfg.lowercase)
        for (auto& c : s)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

namespace detail {

inline std::vector<std::size_t> sorted_gram_positions(std::string_view s) {
    std::vector<std::size_t> pos(s.size() + 1 - encoplot_gram);
    std::iota(pos.begin(), pos.end(), 0);
    std::stable_sort(pos.begin(), pos.end(), [&](std::size_t x, std::size_t y) {
        return s.substr(x, encoplot_gram) < s.substr(y, encoplot_gram);
    });
    return pos;
}

} // namespace detail

/// Pairs the k-th occurrence of every byte 16-gram in A with its k-th
/// occurrence in B; surplus occurrences stay unmatched. Sorted by a_pos.
inline std::vector<GramMatch> encoplot_matches(std::string_view text_a, std::string_view text_b,
                                               const EncoplotConfig& cfg = {}) {
    std::vector<GramMatch> out;
    if (text_a.size() < encoplot_gram || text_b.size() < encoplot_gram) return out;
    const auto a = encoplot_prepare(text_a, cfg);
    const auto b = encoplot_prepare(text_b, cfg);
    const auto pa = detail::sorted_gram_positions(a);
    const auto pb = detail::sorted_gram_positions(b);
    const std::string_view va(a), vb(b);
    std::size_t i = 0, j = 0;
    while (i < pa.size() && j < pb.size()) {
        const auto ga = va.substr(pa[i], encoplot_gram);
        const auto gb = vb.substr(pb[j], encoplot_gram);
        if (ga < gb) ++i;
        else if (gb < ga) ++j;
        else {
            out.push_back({pa[i], pb[j]});
            ++i;
            ++j;
        }
    }
    std::sort(out.begin(), out.end(), [](const GramMatch& x, const GramMatch& y) {
        return x.a_pos != y.a_pos ? x.a_pos < y.a_pos : x.b_pos < y.b_pos;
    });
    return out;
}

enum class EncoplotNormalization {
    coverage_of_shorter, // share of the shorter text's bytes inside a matched gram
    gram_count,          // matches / min(gram count of A, gram count of B)
};

/// Encoplot similarity as a percentage in [0, 100].
inline double encoplot_score(const std::vector<GramMatch>& matches, std::string_view text_a, std::string_view text_b,
                             EncoplotNormalization norm = EncoplotNormalization::coverage_of_shorter) {
    if (matches.empty()) return 0.0;
    if (norm == EncoplotNormalization::gram_count) {
        const std::size_t grams = std::min(text_a.size(), text_b.size()) + 1 - encoplot_gram;
        return 100.0 * static_cast<double>(matches.size()) / static_cast<double>(grams);
    }
    const bool use_a = text_a.size() <= text_b.size();
    const std::size_t len = use_a ? text_a.size() : text_b.size();
    std::vector<std::size_t> starts;
    starts.reserve(matches.size());
    for (const auto& m : matches) starts.push_back(use_a ? m.a_pos : m.b_pos);
    std::sort(starts.begin(), starts.end());
    std::size_t covered = 0, reach = 0;
    for (auto s : starts) {
        const std::size_t e = s + encoplot_gram;
        if (e <= reach) continue;
        covered += e - std::max(s, reach);
        reach = e;
    }
    return 100.0 * static_cast<double>(covered) / static_cast<double>(len);
}

// ---------------------------------------------------------------------------
// Repeated substrings

enum class SpanKind { char16gram, substring, fingerprint };

inline std::string_view to_string(SpanKind k) {
    switch (k) {
    case SpanKind::char16gram: return "char16gram";
    case SpanKind::substring: return "substring";
    case SpanKind::fingerprint: return "fingerprint";
    }
    return "?";
}

struct MatchSpan {
    std::size_t a_start = 0, a_end = 0; // byte offsets, end exclusive
    std::size_t b_start = 0, b_end = 0;
    SpanKind kind = SpanKind::substring;
    std::size_t token_count = 0;
    friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

/// Collapses matched 16-grams into spans: consecutive diagonal grams merge.
inline std::vector<MatchSpan> encoplot_spans(const std::vector<GramMatch>& matches) {
    std::vector<GramMatch> sorted = matches;
    std::sort(sorted.begin(), sorted.end(), [](const GramMatch& x, const GramMatch& y) {
        const auto dx = static_cast<long long>(x.a_pos) - static_cast<long long>(x.b_pos);
        const auto dy = static_cast<long long>(y.a_pos) - static_cast<long long>(y.b_pos);
        return dx != dy ? dx < dy : x.a_pos < y.a_pos;
    });
    std::vector<MatchSpan> spans;
    for (const auto& m : sorted) {
        if (!spans.empty()) {
            auto& s = spans.back();
            if (s.a_start + m.b_pos == s.b_start + m.a_pos && m.a_pos <= s.a_end) {
                s.a_end = std::max(s.a_end, m.a_pos + encoplot_gram);
                s.b_end = std::max(s.b_end, m.b_pos + encoplot_gram);
                continue;
            }
        }
        spans.push_back({m.a_pos, m.a_pos + encoplot_gram, m.b_pos, m.b_pos + encoplot_gram, SpanKind::char16gram, 0});
    }
    std::sort(spans.begin(), spans.end(), [](const MatchSpan& x, const MatchSpan& y) {
        return x.a_start != y.a_start ? x.a_start < y.a_start : x.b_start < y.b_start;
    });
    return spans;
}

struct SubstringConfig {
    std::size_t min_tokens = 6;
    std::size_t min_chars = 12;
};

/// All maximal common token substrings with at least `min_tokens` tokens whose
/// tokens hold at least `min_chars` characters in total. Spans map back to
/// byte offsets in the original texts.
inline std::vector<MatchSpan> common_substrings(const std::vector<Token>& a, const std::vector<Token>& b,
                                                const SubstringConfig& cfg = {}) {
    std::vector<MatchSpan> out;
    const std::size_t k = std::max<std::size_t>(cfg.min_tokens, 1);
    if (a.size() < k || b.size() < k) return out;
    auto window_key = [k](const std::vector<Token>& t, std::size_t i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t x = 0; x < k; ++x) {
            h ^= fnv1a_64(t[i + x].text) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seeds;
    for (std::size_t j = 0; j + k <= b.size(); ++j) seeds[window_key(b, j)].push_back(j);
    for (std::size_t i = 0; i + k <= a.size(); ++i) {
        const auto it = seeds.find(window_key(a, i));
        if (it == seeds.end()) continue;
        for (std::size_t j : it->second) {
            if (i > 0 && j > 0 && a[i - 1].text == b[j - 1].text) continue; // not left-maximal
            std::size_t len = 0;
            while (i + len < a.size() && j + len < b.size() && a[i + len].text == b[j + len].text) ++len;
            if (len < k) continue; // hash collision
            std::size_t chars = 0;
            for (std::size_t x = 0; x < len; ++x) chars += utf8::length(a[i + x].text);
            if (chars < cfg.min_chars) continue;
            const auto& la = a[i + len - 1];
            const auto& lb = b[j + len - 1];
            out.push_back({a[i].offset, la.offset + la.length, b[j].offset, lb.offset + lb.length, SpanKind::substring, len});
        }
    }
    return out;
}

/// Text spans of shared retained n-grams: the k-th occurrence of a signature
/// in A pairs with its k-th occurrence in B.
inline std::vector<MatchSpan> fingerprint_spans(const std::vector<Token>& a, const std::vector<Token>& b,
                                                const FingerprintConfig& cfg = {}) {
    std::vector<MatchSpan> out;
    const std::size_t n = cfg.ngram_len;
    if (n == 0 || a.size() < n || b.size() < n) return out;
    const std::uint64_t mask = cfg.retention_zero_bits >= 64 ? ~0ULL : ((1ULL << cfg.retention_zero_bits) - 1);
    auto retained = [&](const std::vector<Token>& t) {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> at;
        std::string gram;
        for (std::size_t i = 0; i + n <= t.size(); ++i) {
            gram.clear();
            for (std::size_t k = 0; k < n; ++k) {
                if (k) gram.push_back(' ');
                gram += t[i + k].text;
            }
            const auto h = fnv1a_64(gram);
            if ((h & mask) == 0) at[h].push_back(i);
        }
        return at;
    };
    const auto ra = retained(a);
    const auto rb = retained(b);
    for (const auto& [h, pa] : ra) {
        const auto it = rb.find(h);
        if (it == rb.end()) continue;
        for (std::size_t k = 0; k < std::min(pa.size(), it->second.size()); ++k) {
            const std::size_t i = pa[k], j = it->second[k];
            out.push_back({a[i].offset, a[i + n - 1].offset + a[i + n - 1].length, b[j].offset,
                           b[j + n - 1].offset + b[j + n - 1].length, SpanKind::fingerprint, n});
        }
    }
    std::sort(out.begin(), out.end(), [](const MatchSpan& x, const MatchSpan& y) {
        return x.a_start != y.a_start ? x.a_start < y.a_start : x.b_start < y.b_start;
    });
    return out;
}

} // namespace nontextpd
