#pragma once

// Citation-based detection: bibliographic coupling, longest common citation
// sequence, greedy citation tiling, and citation chunking.
//
// The first document of every pair is the suspicious one; normalized scores
// divide by the length of its citation sequence.

#include "docmodel.hpp"
#include "error.hpp"
#include "sequence.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nontextpd {

using CitationSequence = std::vector<std::string>;

enum class BcNormalizer {
    min_size,      // abs / min(|R_A|, |R_B|)
    suspicious,    // abs / |R_A|
    jaccard,       // abs / |R_A u R_B|
};

struct BibliographicCoupling {
    std::size_t abs = 0;
    std::optional<double> rel; // absent when either bibliography is empty

    double rel_or_throw() const {
        if (!rel) throw Error(ErrorCode::rel_undefined, "relative coupling needs two nonempty bibliographies");
        return *rel;
    }
};

inline BibliographicCoupling bibliographic_coupling(const DocumentRecord& a, const DocumentRecord& b,
                                                    BcNormalizer normalizer = BcNormalizer::min_size) {
    std::set<std::string> ra, rb;
    for (const auto& r : a.references) ra.insert(r.ref_key);
    for (const auto& r : b.references) rb.insert(r.ref_key);
    BibliographicCoupling out;
    for (const auto& k : ra) out.abs += rb.count(k);
    if (ra.empty() || rb.empty()) return out;
    double den = 0;
    switch (normalizer) {
    case BcNormalizer::min_size: den = static_cast<double>(std::min(ra.size(), rb.size())); break;
    case BcNormalizer::suspicious: den = static_cast<double>(ra.size()); break;
    case BcNormalizer::jaccard: den = static_cast<double>(ra.size() + rb.size() - out.abs); break;
    }
    out.rel = static_cast<double>(out.abs) / den;
    return out;
}

struct LccsResult {
    std::size_t length = 0;
    std::vector<IndexPair> index_pairs; // indices into the original sequences
};

/// Longest common citation sequence. With `distinct`, each sequence is first
/// reduced to the first occurrence of every ref_key, so no key repeats
/// inside the result.
inline LccsResult lccs(const CitationSequence& a, const CitationSequence& b, bool distinct = false) {
    LccsResult out;
    if (!distinct) {
        out.index_pairs = lcs_alignment(a, b);
    } else {
        auto firsts = [](const CitationSequence& s, std::vector<std::size_t>& idx) {
            std::set<std::string_view> seen;
            CitationSequence reduced;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (seen.insert(s[i]).second) {
                    reduced.push_back(s[i]);
                    idx.push_back(i);
                }
            }
            return reduced;
        };
        std::vector<std::size_t> ia, ib;
        const auto ra = firsts(a, ia);
        const auto rb = firsts(b, ib);
        for (const auto& [i, j] : lcs_alignment(ra, rb)) out.index_pairs.emplace_back(ia[i], ib[j]);
    }
    out.length = out.index_pairs.size();
    return out;
}

inline std::vector<Tile> greedy_citation_tiling(const CitationSequence& a, const CitationSequence& b,
                                                std::size_t min_tile_len = 1) {
    return greedy_tiling(a, b, min_tile_len);
}

// ---------------------------------------------------------------------------
// Citation chunking

enum class Side { a, b };

struct Chunk {
    Side side = Side::a;
    std::size_t start_index = 0; // inclusive positions in the side's citation sequence
    std::size_t end_index = 0;
    std::vector<std::string> members; // shared ref_keys in the span, sorted (multiset)

    std::size_t span_units() const { return end_index - start_index + 1; }
    std::size_t shared_count() const { return members.size(); }
    friend bool operator==(const Chunk&, const Chunk&) = default;
};

enum class TextUnit { chars, words, sentences, paragraphs };

inline std::string_view to_string(TextUnit u) {
    switch (u) {
    case TextUnit::chars: return "chars";
    case TextUnit::words: return "words";
    case TextUnit::sentences: return "sentences";
    case TextUnit::paragraphs: return "paragraphs";
    }
    return "?";
}

/// Consecutive shared citations only (both sides).
struct ConsecutiveChunking {};
/// A shared citation joins the open chunk iff the number of non-shared
/// citations separating it from the chunk's last shared citation is smaller
/// than the number of citations the chunk already spans.
struct PriorDependentChunking {};
/// A shared citation joins the open chunk iff its distance to the chunk's last
/// shared citation, in the given unit, is below max_distance.
struct TextualRangeChunking {
    TextUnit unit = TextUnit::words;
    double max_distance = 0;
};

using ChunkStrategy = std::variant<ConsecutiveChunking, PriorDependentChunking, TextualRangeChunking>;

struct ChunkSets {
    std::vector<Chunk> a;
    std::vector<Chunk> b;
};

inline std::set<std::string> shared_citations(const CitationSequence& a, const CitationSequence& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    std::set<std::string> out;
    for (const auto& k : b)
        if (sa.contains(k)) out.insert(k);
    return out;
}

namespace detail {

inline Chunk make_chunk(Side side, const CitationSequence& seq, const std::set<std::string>& shared,
                        std::size_t start, std::size_t end) {
    Chunk c{side, start, end, {}};
    for (std::size_t i = start; i <= end; ++i)
        if (shared.contains(seq[i])) c.members.push_back(seq[i]);
    std::sort(c.members.begin(), c.members.end());
    return c;
}

inline std::vector<std::pair<std::size_t, std::size_t>> shared_runs(const CitationSequence& seq,
                                                                    const std::set<std::string>& shared) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!shared.contains(seq[i])) continue;
        if (!runs.empty() && runs.back().second + 1 == i) runs.back().second = i;
        else runs.emplace_back(i, i);
    }
    return runs;
}

// Splits every run of `self` so that all members of a piece co-occur in one
// run of `other`. Returns true if anything was split.
inline bool refine_runs(std::vector<std::pair<std::size_t, std::size_t>>& self, const CitationSequence& self_seq,
                        const std::vector<std::pair<std::size_t, std::size_t>>& other,
                        const CitationSequence& other_seq) {
    std::map<std::string_view, std::set<std::size_t>> runs_of_key;
    for (std::size_t r = 0; r < other.size(); ++r)
        for (std::size_t i = other[r].first; i <= other[r].second; ++i) runs_of_key[other_seq[i]].insert(r);
    std::vector<std::pair<std::size_t, std::size_t>> refined;
    bool changed = false;
    for (const auto& [start, end] : self) {
        std::size_t piece_start = start;
        std::set<std::size_t> live = runs_of_key[self_seq[start]];
        for (std::size_t i = start + 1; i <= end; ++i) {
            const auto& ids = runs_of_key[self_seq[i]];
            std::set<std::size_t> next;
            std::set_intersection(live.begin(), live.end(), ids.begin(), ids.end(), std::inserter(next, next.end()));
            if (next.empty()) {
                refined.emplace_back(piece_start, i - 1);
                piece_start = i;
                live = ids;
                changed = true;
            } else {
                live = std::move(next);
            }
        }
        refined.emplace_back(piece_start, end);
    }
    self = std::move(refined);
    return changed;
}

inline std::optional<double> unit_position(const CitationMarker& m, TextUnit unit) {
    switch (unit) {
    case TextUnit::chars: return static_cast<double>(m.char_offset);
    case TextUnit::words: return m.word_index ? std::optional<double>(*m.word_index) : std::nullopt;
    case TextUnit::sentences: return m.sentence_index ? std::optional<double>(*m.sentence_index) : std::nullopt;
    case TextUnit::paragraphs: return m.paragraph_index ? std::optional<double>(*m.paragraph_index) : std::nullopt;
    }
    return std::nullopt;
}

template <class Joins>
std::vector<Chunk> chunk_left_to_right(Side side, const CitationSequence& seq, const std::set<std::string>& shared,
                                       Joins&& joins) {
    std::vector<Chunk> out;
    std::optional<std::size_t> start, last;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!shared.contains(seq[i])) continue;
        if (start && joins(*start, *last, i)) {
            last = i;
            continue;
        }
        if (start) out.push_back(make_chunk(side, seq, shared, *start, *last));
        start = last = i;
    }
    if (start) out.push_back(make_chunk(side, seq, shared, *start, *last));
    return out;
}

inline std::vector<Chunk> prior_dependent_chunks(Side side, const CitationSequence& seq,
                                                 const std::set<std::string>& shared) {
    return chunk_left_to_right(side, seq, shared, [](std::size_t start, std::size_t last, std::size_t next) {
        const std::size_t gap = next - last - 1; // only non-shared citations lie between
        const std::size_t contained = last - start + 1;
        return gap < contained;
    });
}

inline std::vector<Chunk> textual_range_chunks(Side side, const std::vector<CitationMarker>& markers,
                                               const std::set<std::string>& shared, TextualRangeChunking cfg) {
    CitationSequence seq;
    std::vector<double> pos;
    for (const auto& m : markers) {
        seq.push_back(m.ref_key);
        if (!shared.contains(m.ref_key)) {
            pos.push_back(0);
            continue;
        }
        const auto p = unit_position(m, cfg.unit);
        if (!p)
            throw Error(ErrorCode::unit_unavailable,
                        "citation positions lack " + std::string(to_string(cfg.unit)) + " indices");
        pos.push_back(*p);
    }
    return chunk_left_to_right(side, seq, shared, [&](std::size_t, std::size_t last, std::size_t next) {
        return pos[next] - pos[last] < cfg.max_distance;
    });
}

} // namespace detail

/// Consecutive-shared-citation chunking on two plain sequences. Runs of shared
/// citations are split until every chunk on one side lies within a single
/// chunk of the other side, so chunk contents are consecutive in both.
inline ChunkSets consecutive_chunks(const CitationSequence& a, const CitationSequence& b) {
    const auto shared = shared_citations(a, b);
    auto runs_a = detail::shared_runs(a, shared);
    auto runs_b = detail::shared_runs(b, shared);
    for (;;) {
        const bool ca = detail::refine_runs(runs_a, a, runs_b, b);
        const bool cb = detail::refine_runs(runs_b, b, runs_a, a);
        if (!ca && !cb) break;
    }
    ChunkSets out;
    for (const auto& [s, e] : runs_a) out.a.push_back(detail::make_chunk(Side::a, a, shared, s, e));
    for (const auto& [s, e] : runs_b) out.b.push_back(detail::make_chunk(Side::b, b, shared, s, e));
    return out;
}

inline ChunkSets prior_dependent_chunks(const CitationSequence& a, const CitationSequence& b) {
    const auto shared = shared_citations(a, b);
    return {detail::prior_dependent_chunks(Side::a, a, shared), detail::prior_dependent_chunks(Side::b, b, shared)};
}

inline ChunkSets form_chunks(const ChunkStrategy& strategy, const DocumentRecord& doc_a,
                             const DocumentRecord& doc_b) {
    const auto a = citation_sequence(doc_a);
    const auto b = citation_sequence(doc_b);
    if (std::holds_alternative<ConsecutiveChunking>(strategy)) return consecutive_chunks(a, b);
    if (std::holds_alternative<PriorDependentChunking>(strategy)) return prior_dependent_chunks(a, b);
    const auto cfg = std::get<TextualRangeChunking>(strategy);
    const auto shared = shared_citations(a, b);
    return {detail::textual_range_chunks(Side::a, doc_a.citations, shared, cfg),
            detail::textual_range_chunks(Side::b, doc_b.citations, shared, cfg)};
}

/// Mean number of `unit`s per paragraph over a collection, the default range
/// for textual-range chunking.
inline double mean_units_per_paragraph(const std::vector<const DocumentRecord*>& docs, TextUnit unit) {
    double units = 0, paragraphs = 0;
    for (const auto* d : docs) {
        const auto layout = TextLayout::of(d->text);
        paragraphs += static_cast<double>(layout.paragraph_starts.size());
        switch (unit) {
        case TextUnit::chars: units += static_cast<double>(d->text.size()); break;
        case TextUnit::words: units += static_cast<double>(layout.word_starts.size()); break;
        case TextUnit::sentences: units += static_cast<double>(layout.sentence_starts.size()); break;
        case TextUnit::paragraphs: units += static_cast<double>(layout.paragraph_starts.size()); break;
        }
    }
    return paragraphs == 0 ? 0.0 : units / paragraphs;
}

/// Merges neighbouring chunks while the non-shared citations separating them
/// number at most the shared citations of the first. Each pass merges
/// disjoint neighbouring pairs left to right; passes repeat until none merges.
inline std::vector<Chunk> merge_chunks(std::vector<Chunk> chunks, const CitationSequence& seq,
                                       const std::set<std::string>& shared, std::size_t* passes = nullptr) {
    std::size_t n_passes = 0;
    for (;;) {
        ++n_passes;
        std::vector<Chunk> next;
        bool merged = false;
        std::size_t i = 0;
        while (i < chunks.size()) {
            if (i + 1 < chunks.size()) {
                const auto& first = chunks[i];
                const auto& second = chunks[i + 1];
                std::size_t gap = 0;
                for (std::size_t k = first.end_index + 1; k < second.start_index; ++k)
                    gap += shared.contains(seq[k]) ? 0 : 1;
                if (gap <= first.shared_count()) {
                    Chunk m = first;
                    m.end_index = second.end_index;
                    m.members.insert(m.members.end(), second.members.begin(), second.members.end());
                    std::sort(m.members.begin(), m.members.end());
                    next.push_back(std::move(m));
                    merged = true;
                    i += 2;
                    continue;
                }
            }
            next.push_back(chunks[i]);
            ++i;
        }
        chunks = std::move(next);
        if (!merged) break;
    }
    if (passes) *passes = n_passes;
    return chunks;
}

struct ChunkMatch {
    Chunk chunk_a;
    Chunk chunk_b; // a B chunk, or the matched window of B's sequence
    std::size_t overlap = 0;
};

inline std::size_t multiset_overlap(const std::vector<std::string>& x, const std::vector<std::string>& y) {
    std::size_t n = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

/// For every A chunk, all B chunks sharing the maximal number of citations
/// with it (order-agnostic). Chunks without any overlap produce no match.
inline std::vector<ChunkMatch> compare_chunks_pairwise(const std::vector<Chunk>& a_chunks,
                                                       const std::vector<Chunk>& b_chunks) {
    std::vector<ChunkMatch> out;
    for (const auto& ca : a_chunks) {
        std::size_t best = 0;
        for (const auto& cb : b_chunks) best = std::max(best, multiset_overlap(ca.members, cb.members));
        if (best == 0) continue;
        for (const auto& cb : b_chunks)
            if (multiset_overlap(ca.members, cb.members) == best) out.push_back({ca, cb, best});
    }
    return out;
}

/// Slides a window as wide as each A chunk over B's whole citation sequence
/// and keeps all windows with maximal overlap.
inline std::vector<ChunkMatch> compare_chunks_sliding(const std::vector<Chunk>& a_chunks,
                                                      const CitationSequence& seq_b,
                                                      const std::set<std::string>& shared) {
    std::vector<ChunkMatch> out;
    if (seq_b.empty()) return out;
    for (const auto& ca : a_chunks) {
        const std::size_t width = std::min(ca.span_units(), seq_b.size());
        std::vector<Chunk> windows;
        for (std::size_t s = 0; s + width <= seq_b.size(); ++s)
            windows.push_back(detail::make_chunk(Side::b, seq_b, shared, s, s + width - 1));
        std::size_t best = 0;
        for (const auto& w : windows) best = std::max(best, multiset_overlap(ca.members, w.members));
        if (best == 0) continue;
        for (auto& w : windows)
            if (multiset_overlap(ca.members, w.members) == best) out.push_back({ca, std::move(w), best});
    }
    return out;
}

enum class ChunkComparison { both_chunked, sliding };

inline std::vector<ChunkMatch> compare_chunks(ChunkComparison strategy, const ChunkSets& chunks,
                                              const CitationSequence& seq_a, const CitationSequence& seq_b) {
    if (strategy == ChunkComparison::both_chunked) return compare_chunks_pairwise(chunks.a, chunks.b);
    return compare_chunks_sliding(chunks.a, seq_b, shared_citations(seq_a, seq_b));
}

// ---------------------------------------------------------------------------
// Method variants

enum class CitationMethod { bc_abs, bc_rel, lccs, lccs_distinct, max_gct, cc_bcn, cc_bpn };

inline std::string_view to_string(CitationMethod m) {
    switch (m) {
    case CitationMethod::bc_abs: return "bc_abs";
    case CitationMethod::bc_rel: return "bc_rel";
    case CitationMethod::lccs: return "lccs";
    case CitationMethod::lccs_distinct: return "lccs_distinct";
    case CitationMethod::max_gct: return "max_gct";
    case CitationMethod::cc_bcn: return "cc_bcn";
    case CitationMethod::cc_bpn: return "cc_bpn";
    }
    return "?";
}

inline constexpr CitationMethod all_citation_methods[] = {
    CitationMethod::bc_abs, CitationMethod::bc_rel, CitationMethod::lccs,  CitationMethod::lccs_distinct,
    CitationMethod::max_gct, CitationMethod::cc_bcn, CitationMethod::cc_bpn};

struct CitationScore {
    CitationMethod method = CitationMethod::lccs;
    double score = 0;
    double raw = 0;
    std::vector<IndexPair> index_pairs; // lccs variants
    std::vector<Tile> tiles;            // max_gct: all tiles, longest first
    std::vector<ChunkMatch> chunk_matches;
};

struct CitationConfig {
    BcNormalizer bc_normalizer = BcNormalizer::min_size;
};

inline CitationScore citation_method_score(CitationMethod method, const DocumentRecord& doc_a,
                                           const DocumentRecord& doc_b, const CitationConfig& cfg = {}) {
    CitationScore out;
    out.method = method;
    const auto a = citation_sequence(doc_a);
    const auto b = citation_sequence(doc_b);
    const double norm = a.empty() ? 0.0 : static_cast<double>(a.size());
    auto normalized = [&](double raw) { return norm == 0.0 ? 0.0 : raw / norm; };
    switch (method) {
    case CitationMethod::bc_abs: {
        const auto bc = bibliographic_coupling(doc_a, doc_b, cfg.bc_normalizer);
        out.raw = out.score = static_cast<double>(bc.abs);
        break;
    }
    case CitationMethod::bc_rel: {
        const auto bc = bibliographic_coupling(doc_a, doc_b, cfg.bc_normalizer);
        out.raw = static_cast<double>(bc.abs);
        out.score = bc.rel.value_or(0.0);
        break;
    }
    case CitationMethod::lccs:
    case CitationMethod::lccs_distinct: {
        auto r = lccs(a, b, method == CitationMethod::lccs_distinct);
        out.raw = static_cast<double>(r.length);
        out.score = normalized(out.raw);
        out.index_pairs = std::move(r.index_pairs);
        break;
    }
    case CitationMethod::max_gct: {
        out.tiles = greedy_citation_tiling(a, b, 1);
        std::size_t longest = 0;
        for (const auto& t : out.tiles) longest = std::max(longest, t.length);
        out.raw = static_cast<double>(longest);
        out.score = normalized(out.raw);
        break;
    }
    case CitationMethod::cc_bcn:
    case CitationMethod::cc_bpn: {
        const auto chunks = method == CitationMethod::cc_bcn ? consecutive_chunks(a, b) : prior_dependent_chunks(a, b);
        out.chunk_matches = compare_chunks_pairwise(chunks.a, chunks.b);
        std::size_t best = 0;
        for (const auto& m : out.chunk_matches) best = std::max(best, m.overlap);
        out.raw = static_cast<double>(best);
        out.score = normalized(out.raw);
        break;
    }
    }
    return out;
}

} // namespace nontextpd
