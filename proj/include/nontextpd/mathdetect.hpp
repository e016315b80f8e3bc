#pragma once

#include "docmodel.hpp"
#include "error.hpp"
#include "sequence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nontextpd {

enum class FeatureType { ci, cn, co };

inline std::string_view to_string(FeatureType t) {
    switch (t) {
    case FeatureType::ci: return "ci";
    case FeatureType::cn: return "cn";
    case FeatureType::co: return "co";
    }
    return "?";
}

/// Occurrence histogram of one feature type (identifiers, numbers, operators).
struct FeatureDescriptor {
    FeatureType type = FeatureType::ci;
    std::map<std::string, std::size_t> freq;

    static FeatureDescriptor of(FeatureType type, const std::vector<std::string>& tokens) {
        FeatureDescriptor d{type, {}};
        for (const auto& t : tokens)
            if (!t.empty()) ++d.freq[t];
        return d;
    }

    bool empty() const noexcept { return freq.empty(); }
    std::size_t total() const noexcept {
        std::size_t n = 0;
        for (const auto& [_, c] : freq) n += c;
        return n;
    }
};

using DescriptorSet = std::array<FeatureDescriptor, 3>; // ci, cn, co

inline DescriptorSet descriptors_of(const std::vector<std::string>& identifiers, const std::vector<std::string>& numbers,
                                    const std::vector<std::string>& operators) {
    return {FeatureDescriptor::of(FeatureType::ci, identifiers), FeatureDescriptor::of(FeatureType::cn, numbers),
            FeatureDescriptor::of(FeatureType::co, operators)};
}

inline DescriptorSet descriptors_of(const DocumentRecord& doc) {
    return descriptors_of(doc.identifiers, doc.numbers, doc.operators);
}

/// Sum of absolute count differences over the sum of per-token maxima, taken
/// over the union of both supports. 0 for identical histograms, 1 for
/// disjoint ones.
inline double feature_distance(const FeatureDescriptor& k1, const FeatureDescriptor& k2) {
    if (k1.type != k2.type) throw Error(ErrorCode::invalid_argument, "feature types differ");
    if (k1.empty() && k2.empty()) throw Error(ErrorCode::both_empty, "no feature instances on either side");
    double num = 0, den = 0;
    auto i = k1.freq.begin();
    auto j = k2.freq.begin();
    auto add = [&](double x, double y) {
        num += std::abs(x - y);
        den += std::max(x, y);
    };
    while (i != k1.freq.end() || j != k2.freq.end()) {
        if (j == k2.freq.end() || (i != k1.freq.end() && i->first < j->first)) {
            add(static_cast<double>(i->second), 0);
            ++i;
        } else if (i == k1.freq.end() || j->first < i->first) {
            add(0, static_cast<double>(j->second));
            ++j;
        } else {
            add(static_cast<double>(i->second), static_cast<double>(j->second));
            ++i;
            ++j;
        }
    }
    return num / den;
}

/// Sum of the per-type distances; types absent on both sides contribute 0.
inline double aggregated_distance(const DescriptorSet& a, const DescriptorSet& b) {
    double d = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        if (a[t].empty() && b[t].empty()) continue;
        d += feature_distance(a[t], b[t]);
    }
    return d;
}

/// Shared identifier count used for the floor: over identifiers present in
/// both documents, the smaller of the two documents' occurrence totals.
inline std::size_t shared_identifier_count(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto ha = FeatureDescriptor::of(FeatureType::ci, a);
    const auto hb = FeatureDescriptor::of(FeatureType::ci, b);
    std::size_t sa = 0, sb = 0;
    for (const auto& [tok, n] : ha.freq) {
        if (auto it = hb.freq.find(tok); it != hb.freq.end()) {
            sa += n;
            sb += it->second;
        }
    }
    return std::min(sa, sb);
}

struct MathConfig {
    std::size_t identifier_floor = 20;
    std::size_t min_tile = 5;
};

enum class MathMethod { histo, lcis, git };

inline std::string_view to_string(MathMethod m) {
    switch (m) {
    case MathMethod::histo: return "histo";
    case MathMethod::lcis: return "lcis";
    case MathMethod::git: return "git";
    }
    return "?";
}

struct MathScore {
    MathMethod method = MathMethod::histo;
    double score = 0;
    double raw = 0;                     // d_ci, LCIS length, or identifiers inside tiles
    std::vector<IndexPair> index_pairs; // lcis
    std::vector<Tile> tiles;            // git, qualifying tiles only
};

inline void check_identifier_floor(const DocumentRecord& a, const DocumentRecord& b, const MathConfig& cfg) {
    const auto shared = shared_identifier_count(a.identifiers, b.identifiers);
    if (shared < cfg.identifier_floor)
        throw Error(ErrorCode::below_identifier_floor, "pair shares " + std::to_string(shared) + " identifiers, needs " +
                                                           std::to_string(cfg.identifier_floor));
}

/// 1 - d_ci over the identifier histograms.
inline MathScore histo_similarity(const DocumentRecord& a, const DocumentRecord& b, const MathConfig& cfg = {}) {
    check_identifier_floor(a, b, cfg);
    MathScore s;
    s.method = MathMethod::histo;
    s.raw = feature_distance(FeatureDescriptor::of(FeatureType::ci, a.identifiers),
                             FeatureDescriptor::of(FeatureType::ci, b.identifiers));
    s.score = 1.0 - s.raw;
    return s;
}

/// LCS of the identifier sequences over the suspicious document's identifier count.
inline MathScore lcis_score(const DocumentRecord& suspicious, const DocumentRecord& other, const MathConfig& cfg = {}) {
    check_identifier_floor(suspicious, other, cfg);
    MathScore s;
    s.method = MathMethod::lcis;
    s.index_pairs = lcs_alignment(suspicious.identifiers, other.identifiers);
    s.raw = static_cast<double>(s.index_pairs.size());
    s.score = suspicious.identifiers.empty() ? 0.0 : s.raw / static_cast<double>(suspicious.identifiers.size());
    return s;
}

/// Fraction of the suspicious document's identifiers covered by greedy tiles
/// of at least `min_tile` identifiers.
inline MathScore git_score(const DocumentRecord& suspicious, const DocumentRecord& other, const MathConfig& cfg = {}) {
    check_identifier_floor(suspicious, other, cfg);
    MathScore s;
    s.method = MathMethod::git;
    s.tiles = greedy_tiling(suspicious.identifiers, other.identifiers, cfg.min_tile);
    for (const auto& t : s.tiles) s.raw += static_cast<double>(t.length);
    s.score = suspicious.identifiers.empty() ? 0.0 : s.raw / static_cast<double>(suspicious.identifiers.size());
    return s;
}

inline MathScore math_method_score(MathMethod m, const DocumentRecord& a, const DocumentRecord& b,
                                   const MathConfig& cfg = {}) {
    switch (m) {
    case MathMethod::histo: return histo_similarity(a, b, cfg);
    case MathMethod::lcis: return lcis_score(a, b, cfg);
    case MathMethod::git: return git_score(a, b, cfg);
    }
    throw Error(ErrorCode::unknown_method, "unknown math method");
}

// ---------------------------------------------------------------------------
// Partitioning

inline constexpr std::size_t partition_count = 5;

struct Partition {
    std::size_t index = 0;
    std::size_t begin = 0; // byte range [begin, end) including overlap extensions
    std::size_t end = 0;
    DescriptorSet descriptors;
    std::vector<std::string> identifier_subsequence;
};

namespace detail {

// Offset of every token: explicit offsets when present, otherwise spread
// evenly over the text in document order.
inline std::vector<std::size_t> token_positions(const std::vector<std::string>& tokens,
                                                const std::vector<std::size_t>& offsets, std::size_t text_len) {
    if (!offsets.empty()) return offsets;
    std::vector<std::size_t> out(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
        out[i] = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * static_cast<double>(text_len) /
                                          static_cast<double>(tokens.size()));
    return out;
}

inline std::vector<std::string> tokens_in(const std::vector<std::string>& tokens, const std::vector<std::size_t>& pos,
                                          std::size_t begin, std::size_t end) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (pos[i] >= begin && pos[i] < end) out.push_back(tokens[i]);
    return out;
}

} // namespace detail

/// Five equal base partitions of ceil(len/5) bytes, each widened by a quarter
/// of the base length towards every existing neighbour.
inline std::vector<Partition> partition_document(const DocumentRecord& doc) {
    const std::size_t len = doc.text.size();
    if (len < partition_count) throw Error(ErrorCode::document_too_short, "text shorter than five characters");
    const std::size_t base = (len + partition_count - 1) / partition_count;
    const std::size_t ext = base / 4;
    const auto id_pos = detail::token_positions(doc.identifiers, doc.identifier_offsets, len);
    const auto num_pos = detail::token_positions(doc.numbers, doc.number_offsets, len);
    const auto op_pos = detail::token_positions(doc.operators, doc.operator_offsets, len);
    std::vector<Partition> parts;
    for (std::size_t i = 0; i < partition_count; ++i) {
        const std::size_t b0 = std::min(i * base, len);
        const std::size_t e0 = std::min((i + 1) * base, len);
        Partition p;
        p.index = i;
        p.begin = i == 0 ? b0 : (b0 > ext ? b0 - ext : 0);
        p.end = i + 1 == partition_count ? e0 : std::min(e0 + ext, len);
        p.identifier_subsequence = detail::tokens_in(doc.identifiers, id_pos, p.begin, p.end);
        p.descriptors = descriptors_of(p.identifier_subsequence, detail::tokens_in(doc.numbers, num_pos, p.begin, p.end),
                                       detail::tokens_in(doc.operators, op_pos, p.begin, p.end));
        parts.push_back(std::move(p));
    }
    return parts;
}

enum class PartitionMeasure { identifier_distance, aggregated_distance };

struct PartitionPairResult {
    double distance = 0;
    std::size_t index_a = 0;
    std::size_t index_b = 0;
    // distance matrix; NaN where both partitions lack the compared features
    std::array<std::array<double, partition_count>, partition_count> matrix{};
};

/// Lowest distance over all 5x5 partition pairs.
inline PartitionPairResult partition_pair_distance(const DocumentRecord& a, const DocumentRecord& b,
                                                   PartitionMeasure measure = PartitionMeasure::identifier_distance) {
    const auto pa = partition_document(a);
    const auto pb = partition_document(b);
    PartitionPairResult out;
    bool any = false;
    for (std::size_t i = 0; i < partition_count; ++i) {
        for (std::size_t j = 0; j < partition_count; ++j) {
            double d = std::numeric_limits<double>::quiet_NaN();
            try {
                d = measure == PartitionMeasure::identifier_distance
                        ? feature_distance(pa[i].descriptors[0], pb[j].descriptors[0])
                        : aggregated_distance(pa[i].descriptors, pb[j].descriptors);
                if (measure == PartitionMeasure::aggregated_distance && pa[i].descriptors[0].empty() &&
                    pb[j].descriptors[0].empty() && pa[i].descriptors[1].empty() && pb[j].descriptors[1].empty() &&
                    pa[i].descriptors[2].empty() && pb[j].descriptors[2].empty())
                    d = std::numeric_limits<double>::quiet_NaN();
            } catch (const Error& e) {
                if (e.code() != ErrorCode::both_empty) throw;
            }
            out.matrix[i][j] = d;
            if (!std::isnan(d) && (!any || d < out.distance)) {
                out.distance = d;
                out.index_a = i;
                out.index_b = j;
                any = true;
            }
        }
    }
    if (!any) throw Error(ErrorCode::both_empty, "no partition pair has comparable features");
    return out;
}

} // namespace nontextpd
