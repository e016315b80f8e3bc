#pragma once

// Two-stage detection: candidate retrieval against an IndexStore, then
// pairwise detailed analysis with every requested detector, significance
// flags, pooling and exclusion rules.

#include "citedetect.hpp"
#include "docmodel.hpp"
#include "error.hpp"
#include "imagedetect.hpp"
#include "index.hpp"
#include "mathdetect.hpp"
#include "textdetect.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace nontextpd {

// ---------------------------------------------------------------------------
// Method catalog

enum class MethodFamily { citation, math, text, image };

inline std::string_view to_string(MethodFamily f) {
    switch (f) {
    case MethodFamily::citation: return "citation";
    case MethodFamily::math: return "math";
    case MethodFamily::text: return "text";
    case MethodFamily::image: return "image";
    }
    return "?";
}

inline MethodFamily parse_family(std::string_view s) {
    for (auto f : {MethodFamily::citation, MethodFamily::math, MethodFamily::text, MethodFamily::image})
        if (to_string(f) == s) return f;
    throw Error(ErrorCode::unknown_method, "unknown retrieval method '" + std::string(s) +
                                               "' (expected citation, text, math or image)");
}

struct MethodInfo {
    std::string_view name;
    MethodFamily family;
};

inline constexpr MethodInfo method_catalog[] = {
    {"bc_abs", MethodFamily::citation},  {"bc_rel", MethodFamily::citation}, {"lccs", MethodFamily::citation},
    {"lccs_distinct", MethodFamily::citation}, {"max_gct", MethodFamily::citation},
    {"cc_bcn", MethodFamily::citation},  {"cc_bpn", MethodFamily::citation}, {"histo", MethodFamily::math},
    {"lcis", MethodFamily::math},        {"git", MethodFamily::math},        {"sherlock", MethodFamily::text},
    {"enco", MethodFamily::text},        {"substrings", MethodFamily::text}, {"phash", MethodFamily::image},
    {"ratio", MethodFamily::image},      {"ntm", MethodFamily::image},       {"ptm", MethodFamily::image},
};

inline std::vector<std::string> method_names() {
    std::vector<std::string> out;
    for (const auto& m : method_catalog) out.emplace_back(m.name);
    return out;
}

inline MethodFamily method_family(std::string_view name) {
    for (const auto& m : method_catalog)
        if (m.name == name) return m.family;
    std::string list;
    for (const auto& m : method_catalog) list += (list.empty() ? "" : ", ") + std::string(m.name);
    throw Error(ErrorCode::unknown_method, "unknown method '" + std::string(name) + "'; known methods: " + list);
}

/// Validates and deduplicates method names, keeping catalog order. "all"
/// selects every method.
inline std::vector<std::string> normalize_methods(const std::vector<std::string>& requested) {
    std::set<std::string> want;
    for (const auto& r : requested) {
        if (r == "all") {
            for (const auto& m : method_catalog) want.emplace(m.name);
            continue;
        }
        method_family(r);
        want.insert(r);
    }
    std::vector<std::string> out;
    for (const auto& m : method_catalog)
        if (want.contains(std::string(m.name))) out.emplace_back(m.name);
    return out;
}

inline std::vector<std::string> parse_method_list(std::string_view csv) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto end = csv.find(',', start);
        if (end == std::string_view::npos) end = csv.size();
        auto part = csv.substr(start, end - start);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        if (!part.empty()) parts.emplace_back(part);
        start = end + 1;
    }
    return normalize_methods(parts);
}

// ---------------------------------------------------------------------------
// Configuration

inline std::map<std::string, double> default_thresholds() {
    return {{"histo", 0.56}, {"lcis", 0.76}, {"git", 0.15}, {"bc_rel", 0.13},
            {"lccs", 0.22},  {"max_gct", 0.10}, {"enco", 0.06}};
}

struct ThresholdConfig {
    std::map<std::string, double> min_score = default_thresholds();
    double image_suspiciousness = 0.5; // image methods flag on the outlier score
    double epsilon = 1e-12;
};

struct AnalysisConfig {
    CitationConfig citation;
    MathConfig math;
    FingerprintConfig fingerprint;
    SubstringConfig substrings;
    EncoplotConfig encoplot;
    EncoplotNormalization encoplot_normalization = EncoplotNormalization::coverage_of_shorter;
    PositionalConfig positional;
    SuspicionConfig suspicion;
    ThresholdConfig thresholds;
    std::size_t k = 100;       // candidates per text/citation/math retrieval
    std::size_t image_k = 9;   // candidate documents per image method and input image
    unsigned threads = 0;      // 0: hardware concurrency
};

// ---------------------------------------------------------------------------
// Results

/// One piece of evidence. Index fields address citation or identifier
/// sequences; [start, end) fields are byte offsets into the texts. For
/// sequence evidence the byte range runs from the first element's offset to
/// one past the last element's offset.
struct EvidenceItem {
    std::string type; // citation_pair, identifier_pair, tile, chunk, span, image_pair
    std::optional<std::size_t> a_index, b_index, a_count, b_count;
    std::optional<std::size_t> a_start, a_end, b_start, b_end;
    std::string label;
    std::optional<double> value;
};

struct MethodScore {
    std::string method;
    double score = 0;
    double raw = 0;
    std::optional<double> suspiciousness;
    std::optional<double> threshold;
    bool flagged = false;
    std::vector<EvidenceItem> evidence;
    std::optional<std::string> error;
    std::string error_message;
    bool ok() const noexcept { return !error.has_value(); }
};

struct CandidateResult {
    std::string doc_id;
    std::map<std::string, double> retrieval; // family -> retrieval score
    std::vector<MethodScore> scores;         // in method catalog order
    std::size_t flagged_count = 0;
};

struct AnalysisResult {
    std::string query_doc;
    std::string scope = "full_collection";
    std::vector<std::string> methods;
    std::vector<CandidateResult> candidates;               // ranked
    std::map<std::string, std::vector<std::string>> rankings; // method -> doc ids by score
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Candidate retrieval

struct CandidateEntry {
    std::string doc_id;
    double score = 0;
};

struct CandidateSet {
    MethodFamily method = MethodFamily::citation;
    std::vector<CandidateEntry> entries;
};

inline double retrieval_idf(std::size_t n_docs, std::size_t df) {
    return 1.0 + std::log(static_cast<double>(n_docs) / static_cast<double>(df + 1));
}

namespace detail {

// sum over shared terms of boost * sqrt(tf) * idf^2 / sqrt(|d|)
template <class Key>
std::map<std::string, double> tfidf_scores(const IndexStore& index, const std::map<Key, std::size_t>& query_terms,
                                           const PostingMap<Key>& postings,
                                           const std::function<std::size_t(const std::string&)>& doc_len) {
    std::map<std::string, double> scores;
    const std::size_t n = index.size();
    for (const auto& [term, boost] : query_terms) {
        const auto it = postings.find(term);
        if (it == postings.end()) continue;
        const double idf = retrieval_idf(n, it->second.size());
        for (const auto& p : it->second) {
            const auto len = std::max<std::size_t>(doc_len(p.doc_id), 1);
            scores[p.doc_id] += static_cast<double>(boost) * std::sqrt(static_cast<double>(p.tf)) * idf * idf /
                                std::sqrt(static_cast<double>(len));
        }
    }
    return scores;
}

inline std::vector<CandidateEntry> top_k(const std::map<std::string, double>& scores, std::size_t k) {
    std::vector<CandidateEntry> out;
    for (const auto& [id, s] : scores) out.push_back({id, s});
    std::sort(out.begin(), out.end(), [](const CandidateEntry& x, const CandidateEntry& y) {
        return x.score != y.score ? x.score > y.score : x.doc_id < y.doc_id;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Image outlier lists

inline constexpr std::string_view image_methods[] = {"phash", "ratio", "ntm", "ptm"};

/// Distance of two image descriptors under one image method; nullopt when
/// either side lacks the feature or the pair is not comparable.
inline std::optional<double> image_distance(std::string_view method, const ImageDescriptor& a, const ImageDescriptor& b,
                                            const PositionalConfig& pcfg = {}) {
    if (method == "phash") {
        if (!a.phash || !b.phash) return std::nullopt;
        return static_cast<double>(phash_distance(*a.phash, *b.phash));
    }
    if (method == "ratio") {
        if (!a.ratio || !b.ratio || a.ratio->ratios.size() != b.ratio->ratios.size()) return std::nullopt;
        return ratio_hash_distance(*a.ratio, *b.ratio);
    }
    if (method == "ntm") {
        if (!a.trigrams || !b.trigrams) return std::nullopt;
        const double d = ngram_text_distance(*a.trigrams, *b.trigrams);
        if (!std::isfinite(d)) return std::nullopt;
        return d;
    }
    if (method == "ptm") {
        if (!a.ocr_tokens || !b.ocr_tokens) return std::nullopt;
        return 1.0 - positional_text_match(*a.ocr_tokens, *b.ocr_tokens, pcfg);
    }
    throw Error(ErrorCode::unknown_method, "not an image method: " + std::string(method));
}

/// Similarity shown for a single image pair: 1 - d/64 for pHash, 1/(1+d)
/// for the ratio and trigram distances, the match share for positional text.
inline double image_similarity(std::string_view method, double distance) {
    if (method == "phash") return 1.0 - distance / 64.0;
    if (method == "ptm") return 1.0 - distance;
    return 1.0 / (1.0 + distance);
}

struct ImageSuspicion {
    std::string query_image;
    std::string method;
    DistanceList list;              // entries keyed "doc_id/image_id"
    std::optional<Suspiciousness> result;
    std::set<std::string> outlier_docs;
};

struct ImageContextEntry {
    std::string doc_id;
    const std::vector<ImageDescriptor>* images;
};

/// For every query image and image method, ranks all context images by
/// distance and scores the gap to the closest outlier set.
inline std::vector<ImageSuspicion> image_suspicion(const std::vector<ImageDescriptor>& query,
                                                   const std::vector<ImageContextEntry>& context,
                                                   const AnalysisConfig& cfg) {
    std::vector<ImageSuspicion> out;
    for (const auto& qi : query) {
        for (auto method : image_methods) {
            std::vector<DistanceEntry> entries;
            for (const auto& ctx : context)
                for (const auto& ci : *ctx.images)
                    if (auto d = image_distance(method, qi, ci, cfg.positional))
                        entries.push_back({ctx.doc_id + "/" + ci.image_id, *d});
            if (entries.empty()) continue;
            ImageSuspicion s{qi.image_id, std::string(method), make_distance_list(std::string(method), entries), {}, {}};
            try {
                s.result = suspiciousness_score(s.list, cfg.suspicion);
                for (std::size_t i = 0; i < s.result->outlier_count && i < s.list.entries.size(); ++i) {
                    const auto& id = s.list.entries[i].id;
                    s.outlier_docs.insert(id.substr(0, id.rfind('/')));
                }
            } catch (const Error&) {
                // fewer than two comparable images: no score for this list
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

inline std::vector<ImageContextEntry> collection_image_context(const IndexStore& index, const std::string& exclude) {
    std::vector<ImageContextEntry> ctx;
    for (const auto& id : index.doc_ids())
        if (id != exclude && !index.images(id).empty()) ctx.push_back({id, &index.images(id)});
    return ctx;
}

/// Top-k candidates of one retrieval method, ties broken by ascending doc id.
/// The query document itself is never returned.
inline CandidateSet retrieve_candidates(const IndexStore& index, const DocumentRecord& query, MethodFamily method,
                                        const AnalysisConfig& cfg = {}) {
    CandidateSet out{method, {}};
    std::map<std::string, double> scores;
    const auto terms = document_terms(query, index.fingerprint_config());
    switch (method) {
    case MethodFamily::citation: {
        if (query.citations.empty() && query.references.empty()) return out;
        scores = detail::tfidf_scores<std::string>(index, terms.references, index.reference_postings(),
                                                   [&](const std::string& id) { return index.stats(id).references; });
        break;
    }
    case MethodFamily::text:
        scores = detail::tfidf_scores<std::uint64_t>(index, terms.signatures, index.signature_postings(),
                                                     [&](const std::string& id) { return index.stats(id).signatures; });
        break;
    case MethodFamily::math:
        scores = detail::tfidf_scores<std::string>(index, terms.identifiers, index.identifier_postings(),
                                                   [&](const std::string& id) { return index.stats(id).identifiers; });
        break;
    case MethodFamily::image: {
        const auto qimgs = describe_images(query);
        if (qimgs.empty()) return out;
        for (const auto& s : image_suspicion(qimgs, collection_image_context(index, query.doc_id), cfg)) {
            if (!s.result || s.result->score + cfg.thresholds.epsilon < cfg.suspicion.report_threshold) continue;
            std::set<std::string> seen;
            for (std::size_t i = 0; i < s.result->outlier_count && i < s.list.entries.size(); ++i) {
                const auto& id = s.list.entries[i].id;
                const auto doc = id.substr(0, id.rfind('/'));
                if (!seen.contains(doc) && seen.size() >= cfg.image_k) break;
                seen.insert(doc);
                scores[doc] = std::max(scores[doc], s.result->score);
            }
        }
        scores.erase(query.doc_id);
        out.entries = detail::top_k(scores, cfg.k);
        return out;
    }
    }
    scores.erase(query.doc_id);
    if (method == MethodFamily::citation) {
        // bibliographic coupling strength of at least one is implied by a
        // shared reference posting; drop anything else defensively
        std::erase_if(scores, [](const auto& kv) { return !(kv.second > 0); });
    }
    out.entries = detail::top_k(scores, cfg.k);
    return out;
}

// ---------------------------------------------------------------------------
// Detailed analysis

namespace detail {

inline void set_range(const std::vector<std::size_t>& offsets, std::size_t text_len, std::size_t first,
                      std::size_t count, std::optional<std::size_t>& start, std::optional<std::size_t>& end) {
    if (offsets.empty() || count == 0 || first + count > offsets.size()) return;
    start = offsets[first];
    end = std::min(offsets[first + count - 1] + 1, text_len);
    if (*end < *start) end = start;
}

inline std::vector<std::size_t> citation_offsets(const DocumentRecord& d) {
    std::vector<std::size_t> out;
    for (const auto& c : d.citations) out.push_back(c.char_offset);
    return out;
}

inline EvidenceItem sequence_item(std::string type, std::size_t ia, std::size_t ib, std::size_t na, std::size_t nb,
                                  const std::vector<std::size_t>& off_a, std::size_t len_a,
                                  const std::vector<std::size_t>& off_b, std::size_t len_b, std::string label = {}) {
    EvidenceItem e;
    e.type = std::move(type);
    e.a_index = ia;
    e.b_index = ib;
    e.a_count = na;
    e.b_count = nb;
    e.label = std::move(label);
    set_range(off_a, len_a, ia, na, e.a_start, e.a_end);
    set_range(off_b, len_b, ib, nb, e.b_start, e.b_end);
    return e;
}

inline EvidenceItem span_item(const MatchSpan& s) {
    EvidenceItem e;
    e.type = "span";
    e.label = std::string(to_string(s.kind));
    e.a_start = s.a_start;
    e.a_end = s.a_end;
    e.b_start = s.b_start;
    e.b_end = s.b_end;
    if (s.token_count) e.a_count = e.b_count = s.token_count;
    return e;
}

inline MethodScore citation_score(std::string_view name, const DocumentRecord& q, const DocumentRecord& c,
                                  const AnalysisConfig& cfg) {
    static const std::map<std::string_view, CitationMethod> ids = {
        {"bc_abs", CitationMethod::bc_abs}, {"bc_rel", CitationMethod::bc_rel},
        {"lccs", CitationMethod::lccs},     {"lccs_distinct", CitationMethod::lccs_distinct},
        {"max_gct", CitationMethod::max_gct}, {"cc_bcn", CitationMethod::cc_bcn},
        {"cc_bpn", CitationMethod::cc_bpn}};
    const auto r = citation_method_score(ids.at(name), q, c, cfg.citation);
    MethodScore m;
    m.score = r.score;
    m.raw = r.raw;
    const auto oa = citation_offsets(q), ob = citation_offsets(c);
    const auto sa = citation_sequence(q);
    for (const auto& [i, j] : r.index_pairs)
        m.evidence.push_back(sequence_item("citation_pair", i, j, 1, 1, oa, q.text.size(), ob, c.text.size(), sa[i]));
    for (const auto& t : r.tiles)
        m.evidence.push_back(sequence_item("tile", t.s1, t.s2, t.length, t.length, oa, q.text.size(), ob, c.text.size()));
    for (const auto& cm : r.chunk_matches) {
        auto e = sequence_item("chunk", cm.chunk_a.start_index, cm.chunk_b.start_index, cm.chunk_a.span_units(),
                               cm.chunk_b.span_units(), oa, q.text.size(), ob, c.text.size());
        e.value = static_cast<double>(cm.overlap);
        m.evidence.push_back(std::move(e));
    }
    if (name == "bc_abs" || name == "bc_rel") {
        std::set<std::string> rb;
        for (const auto& ref : c.references) rb.insert(ref.ref_key);
        for (const auto& ref : q.references)
            if (rb.contains(ref.ref_key)) {
                EvidenceItem e;
                e.type = "shared_reference";
                e.label = ref.ref_key;
                m.evidence.push_back(std::move(e));
            }
    }
    return m;
}

inline MethodScore math_score(std::string_view name, const DocumentRecord& q, const DocumentRecord& c,
                              const AnalysisConfig& cfg) {
    const MathMethod id = name == "histo" ? MathMethod::histo : name == "lcis" ? MathMethod::lcis : MathMethod::git;
    const auto r = math_method_score(id, q, c, cfg.math);
    MethodScore m;
    m.score = r.score;
    m.raw = r.raw;
    for (const auto& [i, j] : r.index_pairs)
        m.evidence.push_back(sequence_item("identifier_pair", i, j, 1, 1, q.identifier_offsets, q.text.size(),
                                           c.identifier_offsets, c.text.size(), q.identifiers[i]));
    for (const auto& t : r.tiles)
        m.evidence.push_back(sequence_item("tile", t.s1, t.s2, t.length, t.length, q.identifier_offsets, q.text.size(),
                                           c.identifier_offsets, c.text.size()));
    return m;
}

inline MethodScore text_score(std::string_view name, const DocumentRecord& q, const DocumentRecord& c,
                              const AnalysisConfig& cfg) {
    MethodScore m;
    const auto ta = tokenize_text(q.text);
    const auto tb = tokenize_text(c.text);
    if (name == "sherlock") {
        const auto fa = build_fingerprint(ta, cfg.fingerprint);
        const auto fb = build_fingerprint(tb, cfg.fingerprint);
        m.raw = fingerprint_similarity(fa, fb);
        m.score = m.raw / 100.0;
        for (const auto& s : fingerprint_spans(ta, tb, cfg.fingerprint)) m.evidence.push_back(span_item(s));
    } else if (name == "enco") {
        const auto matches = encoplot_matches(q.text, c.text, cfg.encoplot);
        m.raw = encoplot_score(matches, q.text, c.text, cfg.encoplot_normalization);
        m.score = m.raw / 100.0;
        for (const auto& s : encoplot_spans(matches)) m.evidence.push_back(span_item(s));
    } else {
        const auto spans = common_substrings(ta, tb, cfg.substrings);
        m.raw = static_cast<double>(spans.size());
        // share of the query's tokens inside at least one span
        std::vector<char> covered(ta.size(), 0);
        for (const auto& s : spans)
            for (std::size_t i = 0; i < ta.size(); ++i)
                if (ta[i].offset >= s.a_start && ta[i].offset < s.a_end) covered[i] = 1;
        const auto n = static_cast<double>(std::count(covered.begin(), covered.end(), 1));
        m.score = ta.empty() ? 0.0 : n / static_cast<double>(ta.size());
        for (const auto& s : spans) m.evidence.push_back(span_item(s));
    }
    return m;
}

inline MethodScore image_score(std::string_view name, const std::vector<ImageDescriptor>& qi,
                               const std::vector<ImageDescriptor>& ci, const std::string& cand_id,
                               const std::vector<ImageSuspicion>* suspicion, const AnalysisConfig& cfg) {
    MethodScore m;
    std::optional<double> best;
    for (const auto& a : qi)
        for (const auto& b : ci) {
            const auto d = image_distance(name, a, b, cfg.positional);
            if (!d) continue;
            EvidenceItem e;
            e.type = "image_pair";
            e.label = a.image_id + "|" + b.image_id;
            e.value = *d;
            m.evidence.push_back(std::move(e));
            if (!best || *d < *best) best = d;
        }
    if (!best) throw Error(ErrorCode::invalid_argument, "no comparable image pair");
    std::stable_sort(m.evidence.begin(), m.evidence.end(),
                     [](const EvidenceItem& x, const EvidenceItem& y) { return *x.value < *y.value; });
    m.raw = *best;
    m.score = image_similarity(name, *best);
    if (suspicion) {
        double s = 0;
        bool any = false;
        for (const auto& sus : *suspicion) {
            if (sus.method != name || !sus.result) continue;
            any = true;
            if (sus.outlier_docs.contains(cand_id)) s = std::max(s, sus.result->score);
        }
        if (any) m.suspiciousness = s;
    }
    return m;
}

} // namespace detail

/// Scores one pair with one method. Detector errors are recorded on the
/// returned score instead of propagating.
inline MethodScore score_pair(std::string_view method, const DocumentRecord& query, const DocumentRecord& candidate,
                              const AnalysisConfig& cfg = {}, const std::vector<ImageDescriptor>* query_images = nullptr,
                              const std::vector<ImageDescriptor>* candidate_images = nullptr,
                              const std::vector<ImageSuspicion>* suspicion = nullptr) {
    MethodScore m;
    try {
        switch (method_family(method)) {
        case MethodFamily::citation: m = detail::citation_score(method, query, candidate, cfg); break;
        case MethodFamily::math: m = detail::math_score(method, query, candidate, cfg); break;
        case MethodFamily::text: m = detail::text_score(method, query, candidate, cfg); break;
        case MethodFamily::image: {
            std::vector<ImageDescriptor> qi, ci;
            if (!query_images) qi = describe_images(query);
            if (!candidate_images) ci = describe_images(candidate);
            m = detail::image_score(method, query_images ? *query_images : qi, candidate_images ? *candidate_images : ci,
                                    candidate.doc_id, suspicion, cfg);
            break;
        }
        }
    } catch (const Error& e) {
        m = MethodScore{};
        m.error = std::string(e.name());
        m.error_message = e.what();
    }
    m.method = std::string(method);
    return m;
}

/// Sets threshold and flagged on every score. Image methods flag on their
/// outlier score; methods without a configured threshold are never flagged.
inline void flag_scores(CandidateResult& c, const ThresholdConfig& t) {
    c.flagged_count = 0;
    for (auto& s : c.scores) {
        s.flagged = false;
        s.threshold.reset();
        if (!s.ok()) continue;
        if (method_family(s.method) == MethodFamily::image) {
            s.threshold = t.image_suspiciousness;
            s.flagged = s.suspiciousness && *s.suspiciousness + t.epsilon >= t.image_suspiciousness;
        } else if (const auto it = t.min_score.find(s.method); it != t.min_score.end()) {
            s.threshold = it->second;
            s.flagged = s.score + t.epsilon >= it->second;
        }
        if (s.flagged) ++c.flagged_count;
    }
}

namespace detail {

// Highest score on a unit scale; bc_abs counts are left out.
inline double best_unit_score(const CandidateResult& c) {
    double best = 0;
    for (const auto& s : c.scores)
        if (s.ok() && s.method != "bc_abs") best = std::max(best, s.score);
    return best;
}

inline void rank(AnalysisResult& r) {
    std::stable_sort(r.candidates.begin(), r.candidates.end(), [](const CandidateResult& x, const CandidateResult& y) {
        if (x.flagged_count != y.flagged_count) return x.flagged_count > y.flagged_count;
        const double bx = best_unit_score(x), by = best_unit_score(y);
        if (bx != by) return bx > by;
        return x.doc_id < y.doc_id;
    });
    r.rankings.clear();
    for (const auto& method : r.methods) {
        std::vector<std::pair<double, std::string>> rows;
        for (const auto& c : r.candidates)
            for (const auto& s : c.scores)
                if (s.method == method && s.ok()) rows.emplace_back(s.score, c.doc_id);
        std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        });
        auto& out = r.rankings[method];
        for (const auto& [_, id] : rows) out.push_back(id);
    }
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

struct AnalysisCandidate {
    const DocumentRecord* doc = nullptr;
    const std::vector<ImageDescriptor>* images = nullptr; // precomputed, optional
    std::map<std::string, double> retrieval;
};

/// Compares the query with every candidate under every method. Image outlier
/// scores are computed against `image_context` when given.
inline AnalysisResult detailed_analysis(const DocumentRecord& query, const std::vector<AnalysisCandidate>& candidates,
                                        const std::vector<std::string>& methods, const AnalysisConfig& cfg = {},
                                        const std::vector<ImageContextEntry>* image_context = nullptr) {
    AnalysisResult r;
    r.query_doc = query.doc_id;
    r.methods = normalize_methods(methods);
    const bool images = std::any_of(r.methods.begin(), r.methods.end(),
                                    [](const std::string& m) { return method_family(m) == MethodFamily::image; });
    const auto query_images = images ? describe_images(query) : std::vector<ImageDescriptor>{};
    std::vector<std::vector<ImageDescriptor>> owned(candidates.size());
    std::vector<ImageSuspicion> suspicion;
    if (images) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (!candidates[i].images) owned[i] = describe_images(*candidates[i].doc);
        std::vector<ImageContextEntry> ctx;
        if (image_context) {
            ctx = *image_context;
        } else {
            for (std::size_t i = 0; i < candidates.size(); ++i)
                ctx.push_back({candidates[i].doc->doc_id, candidates[i].images ? candidates[i].images : &owned[i]});
        }
        suspicion = image_suspicion(query_images, ctx, cfg);
    }
    r.candidates.resize(candidates.size());
    detail::parallel_for(candidates.size(), cfg.threads, [&](std::size_t i) {
        const auto& cand = candidates[i];
        auto& out = r.candidates[i];
        out.doc_id = cand.doc->doc_id;
        out.retrieval = cand.retrieval;
        const auto* ci = cand.images ? cand.images : &owned[i];
        for (const auto& m : r.methods)
            out.scores.push_back(score_pair(m, query, *cand.doc, cfg, &query_images, ci, images ? &suspicion : nullptr));
        flag_scores(out, cfg.thresholds);
    });
    detail::rank(r);
    return r;
}

/// Re-applies thresholds; with `flagged_only`, candidates without any flag
/// are dropped.
inline AnalysisResult apply_thresholds(AnalysisResult r, const ThresholdConfig& t, bool flagged_only = false) {
    for (auto& c : r.candidates) flag_scores(c, t);
    if (flagged_only) std::erase_if(r.candidates, [](const CandidateResult& c) { return c.flagged_count == 0; });
    detail::rank(r);
    return r;
}

/// Retrieves candidates with every family the methods need, unions the
/// sets, and runs the detailed analysis on the union.
inline AnalysisResult analyze_collection(const IndexStore& index, const DocumentRecord& query,
                                         const std::vector<std::string>& methods, const AnalysisConfig& cfg = {}) {
    const auto normalized = normalize_methods(methods);
    std::set<MethodFamily> families;
    for (const auto& m : normalized) families.insert(method_family(m));
    std::map<std::string, std::map<std::string, double>> pooled;
    for (auto f : families)
        for (const auto& e : retrieve_candidates(index, query, f, cfg).entries)
            pooled[e.doc_id][std::string(to_string(f))] = e.score;
    std::vector<AnalysisCandidate> cands;
    for (const auto& [id, retrieval] : pooled)
        cands.push_back({&index.document(id), &index.images(id), retrieval});
    const auto ctx = collection_image_context(index, query.doc_id);
    auto r = detailed_analysis(query, cands, normalized, cfg, &ctx);
    r.scope = "full_collection";
    if (!index.contains(query.doc_id)) r.warnings.push_back("query document is not part of the index");
    return r;
}

/// Pairwise comparison of the query with an explicit document list
/// (collusion check); image outliers are ranked within the list only.
inline AnalysisResult analyze_explicit(const DocumentRecord& query, const std::vector<const DocumentRecord*>& docs,
                                       const std::vector<std::string>& methods, const AnalysisConfig& cfg = {}) {
    std::vector<AnalysisCandidate> cands;
    for (const auto* d : docs) cands.push_back({d, nullptr, {}});
    auto r = detailed_analysis(query, cands, methods, cfg);
    r.scope = "explicit";
    return r;
}

// ---------------------------------------------------------------------------
// Pooling and exclusions

struct RankedPair {
    std::string query;
    std::string candidate;
    double score = 0;
};

struct PooledPair {
    std::string query;
    std::string candidate;
    std::vector<std::string> methods; // provenance, sorted
    friend bool operator==(const PooledPair&, const PooledPair&) = default;
};

/// Union of each method's n best pairs (score descending, then ids),
/// deduplicated, sorted by (query, candidate).
inline std::vector<PooledPair> pool_top_n(const std::map<std::string, std::vector<RankedPair>>& ranked, std::size_t n) {
    std::map<std::pair<std::string, std::string>, std::set<std::string>> pool;
    for (const auto& [method, list] : ranked) {
        auto sorted = list;
        std::sort(sorted.begin(), sorted.end(), [](const RankedPair& x, const RankedPair& y) {
            if (x.score != y.score) return x.score > y.score;
            if (x.query != y.query) return x.query < y.query;
            return x.candidate < y.candidate;
        });
        for (std::size_t i = 0; i < std::min(n, sorted.size()); ++i)
            pool[{sorted[i].query, sorted[i].candidate}].insert(method);
    }
    std::vector<PooledPair> out;
    for (const auto& [key, methods] : pool)
        out.push_back({key.first, key.second, std::vector<std::string>(methods.begin(), methods.end())});
    return out;
}

struct ExclusionRules {
    bool shared_author = true;
    bool cites_other = true;
};

struct ExcludedPair {
    PooledPair pair;
    std::string reason; // shared_author or cites_other
};

struct ExclusionOutcome {
    std::vector<PooledPair> kept;
    std::vector<ExcludedPair> excluded;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string normalize_name(std::string_view s) {
    std::string out;
    bool space = false;
    for (char ch : utf8::to_lower(s)) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '.' || ch == ',') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(ch);
    }
    return out;
}

// `later` lists `earlier` by doc id as a ref_key, or by an identical title.
inline bool cites(const DocumentRecord& later, const DocumentRecord& earlier) {
    const auto title = normalize_name(earlier.title);
    for (const auto& r : later.references) {
        if (r.ref_key == earlier.doc_id) return true;
        if (!title.empty() && normalize_name(r.title) == title) return true;
    }
    return false;
}

} // namespace detail

/// Drops pairs whose documents share an author, or where the later document
/// cites the earlier one. Without years both directions are checked. Pairs
/// lacking the metadata a rule needs are kept with a warning.
inline ExclusionOutcome exclusion_filters(const std::vector<PooledPair>& pairs,
                                          const std::function<const DocumentRecord*(const std::string&)>& lookup,
                                          const ExclusionRules& rules = {}) {
    ExclusionOutcome out;
    for (const auto& p : pairs) {
        const auto* a = lookup(p.query);
        const auto* b = lookup(p.candidate);
        if (!a || !b) {
            out.warnings.push_back(p.query + " / " + p.candidate + ": document metadata unavailable, pair kept");
            out.kept.push_back(p);
            continue;
        }
        if (rules.shared_author) {
            if (a->authors.empty() || b->authors.empty()) {
                out.warnings.push_back(p.query + " / " + p.candidate + ": authors missing, shared_author not applied");
            } else {
                std::set<std::string> names;
                for (const auto& n : a->authors) names.insert(detail::normalize_name(n));
                const bool shared = std::any_of(b->authors.begin(), b->authors.end(), [&](const std::string& n) {
                    return names.contains(detail::normalize_name(n));
                });
                if (shared) {
                    out.excluded.push_back({p, "shared_author"});
                    continue;
                }
            }
        }
        if (rules.cites_other) {
            bool hit = false;
            if (a->year && b->year) {
                if (*a->year >= *b->year) hit = hit || detail::cites(*a, *b);
                if (*b->year >= *a->year) hit = hit || detail::cites(*b, *a);
            } else {
                out.warnings.push_back(p.query + " / " + p.candidate + ": year missing, citation checked both ways");
                hit = detail::cites(*a, *b) || detail::cites(*b, *a);
            }
            if (hit) {
                out.excluded.push_back({p, "cites_other"});
                continue;
            }
        }
        out.kept.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const EvidenceItem& e) {
    json j{{"type", e.type}};
    auto put = [&](const char* k, const std::optional<std::size_t>& v) {
        if (v) j[k] = *v;
    };
    put("a_index", e.a_index);
    put("b_index", e.b_index);
    put("a_count", e.a_count);
    put("b_count", e.b_count);
    put("a_start", e.a_start);
    put("a_end", e.a_end);
    put("b_start", e.b_start);
    put("b_end", e.b_end);
    if (!e.label.empty()) j["label"] = e.label;
    if (e.value) j["value"] = *e.value;
    return j;
}

inline json to_json(const MethodScore& s) {
    json j{{"method", s.method}, {"flagged", s.flagged}};
    if (s.ok()) {
        j["score"] = s.score;
        j["raw"] = s.raw;
    } else {
        j["error"] = *s.error;
        j["message"] = s.error_message;
    }
    if (s.suspiciousness) j["suspiciousness"] = *s.suspiciousness;
    if (s.threshold) j["threshold"] = *s.threshold;
    json ev = json::array();
    for (const auto& e : s.evidence) ev.push_back(to_json(e));
    j["evidence"] = std::move(ev);
    return j;
}

inline json to_json(const CandidateResult& c, std::size_t rank) {
    json scores = json::array();
    for (const auto& s : c.scores) scores.push_back(to_json(s));
    return {{"doc_id", c.doc_id},
            {"rank", rank},
            {"retrieval", c.retrieval},
            {"flagged_count", c.flagged_count},
            {"scores", std::move(scores)}};
}

inline json to_json(const AnalysisResult& r) {
    json cands = json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) cands.push_back(to_json(r.candidates[i], i + 1));
    return {{"format_version", "1"},
            {"query_doc", r.query_doc},
            {"scope", r.scope},
            {"methods", r.methods},
            {"candidates", std::move(cands)},
            {"rankings", r.rankings},
            {"warnings", r.warnings}};
}

} // namespace nontextpd
