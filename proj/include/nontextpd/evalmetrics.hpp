#pragma once

// Character-, case- and document-level detection metrics, granularity,
// PlagDet, mean reciprocal rank, mid-ranks and Fleiss' kappa.

#include "docmodel.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nontextpd {

/// Half-open character range [begin, end).
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
    friend bool operator==(const Span&, const Span&) = default;
};

inline bool overlaps(const Span& a, const Span& b) noexcept {
    return std::max(a.begin, b.begin) < std::min(a.end, b.end);
}

inline Span intersect(const Span& a, const Span& b) noexcept {
    const std::size_t lo = std::max(a.begin, b.begin), hi = std::min(a.end, b.end);
    return lo < hi ? Span{lo, hi} : Span{lo, lo};
}

/// Total length of the union of spans.
inline std::size_t union_length(std::vector<Span> spans) {
    std::erase_if(spans, [](const Span& s) { return s.size() == 0; });
    std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) { return x.begin < y.begin; });
    std::size_t total = 0, reach = 0;
    bool open = false;
    for (const auto& s : spans) {
        if (open && s.begin < reach) {
            if (s.end > reach) {
                total += s.end - reach;
                reach = s.end;
            }
            continue;
        }
        total += s.size();
        reach = s.end;
        open = true;
    }
    return total;
}

struct PlagCase {
    Span c_plg;
    std::string d_plg;
    Span c_src;
    std::string d_src;
};

struct Detection {
    Span x_plg;
    std::string d_plg;
    Span x_src;
    std::string d_src;
};

/// x detects c: same document pair and overlapping spans on both sides.
inline bool detects(const Detection& x, const PlagCase& c) {
    return x.d_plg == c.d_plg && x.d_src == c.d_src && overlaps(x.x_plg, c.c_plg) && overlaps(x.x_src, c.c_src);
}

inline void check_spans(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets) {
    for (const auto& c : cases)
        if (c.c_plg.size() == 0 || c.c_src.size() == 0)
            throw Error(ErrorCode::invalid_argument, "plagiarism case spans must be nonempty");
    for (const auto& x : dets)
        if (x.x_plg.size() == 0 || x.x_src.size() == 0)
            throw Error(ErrorCode::invalid_argument, "detection spans must be nonempty");
}

struct PrecisionRecall {
    double precision = 0;
    double recall = 0;
    bool precision_defined = true; // false when there are no detections
    bool recall_defined = true;    // false when there are no cases
};

/// Character precision and recall, measured on the plagiarism-side spans:
/// P averages over detections the share of x covered by detected cases, R
/// averages over cases the share of c covered by its detections.
inline PrecisionRecall char_precision_recall(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets) {
    check_spans(cases, dets);
    PrecisionRecall pr;
    pr.precision_defined = !dets.empty();
    pr.recall_defined = !cases.empty();
    if (!dets.empty()) {
        double sum = 0;
        for (const auto& x : dets) {
            std::vector<Span> parts;
            for (const auto& c : cases)
                if (detects(x, c)) parts.push_back(intersect(c.c_plg, x.x_plg));
            sum += static_cast<double>(union_length(parts)) / static_cast<double>(x.x_plg.size());
        }
        pr.precision = sum / static_cast<double>(dets.size());
    }
    if (!cases.empty()) {
        double sum = 0;
        for (const auto& c : cases) {
            std::vector<Span> parts;
            for (const auto& x : dets)
                if (detects(x, c)) parts.push_back(intersect(c.c_plg, x.x_plg));
            sum += static_cast<double>(union_length(parts)) / static_cast<double>(c.c_plg.size());
        }
        pr.recall = sum / static_cast<double>(cases.size());
    }
    return pr;
}

/// Mean number of detections per detected case; 1 when no case is detected.
inline double granularity(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets) {
    std::size_t detected = 0, hits = 0;
    for (const auto& c : cases) {
        std::size_t n = 0;
        for (const auto& x : dets) n += detects(x, c) ? 1 : 0;
        if (n) {
            ++detected;
            hits += n;
        }
    }
    return detected == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(detected);
}

inline double f1_score(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

inline double plagdet_from(double p, double r, double g) {
    if (!(g >= 1)) throw Error(ErrorCode::invalid_argument, "granularity must be >= 1");
    return f1_score(p, r) / std::log2(1 + g);
}

struct PlagDetReport {
    PrecisionRecall pr;
    double granularity = 1;
    double f1 = 0;
    double plagdet = 0;
};

inline PlagDetReport plagdet_report(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets) {
    PlagDetReport r;
    r.pr = char_precision_recall(cases, dets);
    r.granularity = granularity(cases, dets);
    r.f1 = f1_score(r.pr.precision, r.pr.recall);
    r.plagdet = plagdet_from(r.pr.precision, r.pr.recall, r.granularity);
    return r;
}

inline double plagdet(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets) {
    return plagdet_report(cases, dets).plagdet;
}

struct EvalThresholds {
    double tau1 = 0.5; // minimum share of the case reported (recall side)
    double tau2 = 0.5; // minimum share of the detection inside the case (precision side)
};

struct CaseDocLevel {
    double case_precision = 0;
    double case_recall = 0;
    double doc_precision = 0;
    double doc_recall = 0;
};

/// Case level: x is a true positive for c when it detects c, covers at least
/// tau1*|c| characters of c, and at least tau2*|x| of its characters lie in c.
/// Document level applies the same rule to the union of all case spans and
/// all detection spans of one (d_plg, d_src) pair.
inline CaseDocLevel case_doc_level(const std::vector<PlagCase>& cases, const std::vector<Detection>& dets,
                                   const EvalThresholds& t = {}) {
    if (!(t.tau1 > 0 && t.tau1 <= 1 && t.tau2 > 0 && t.tau2 <= 1))
        throw Error(ErrorCode::invalid_argument, "tau1 and tau2 must lie in (0, 1]");
    check_spans(cases, dets);
    auto qualifies = [&](std::size_t inter, std::size_t case_len, std::size_t det_len) {
        return inter > 0 && static_cast<double>(inter) >= t.tau1 * static_cast<double>(case_len) &&
               static_cast<double>(inter) >= t.tau2 * static_cast<double>(det_len);
    };
    CaseDocLevel out;
    std::vector<char> case_hit(cases.size(), 0), det_hit(dets.size(), 0);
    for (std::size_t i = 0; i < cases.size(); ++i)
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (!detects(dets[j], cases[i])) continue;
            const auto inter = intersect(cases[i].c_plg, dets[j].x_plg).size();
            if (qualifies(inter, cases[i].c_plg.size(), dets[j].x_plg.size())) case_hit[i] = det_hit[j] = 1;
        }
    auto share = [](const std::vector<char>& v) {
        return v.empty() ? 0.0 : static_cast<double>(std::count(v.begin(), v.end(), 1)) / static_cast<double>(v.size());
    };
    out.case_recall = share(case_hit);
    out.case_precision = share(det_hit);

    using DocKey = std::pair<std::string, std::string>;
    std::map<DocKey, std::pair<std::vector<Span>, std::vector<Span>>> docs;
    for (const auto& c : cases) docs[{c.d_plg, c.d_src}].first.push_back(c.c_plg);
    for (const auto& x : dets) docs[{x.d_plg, x.d_src}].second.push_back(x.x_plg);
    std::size_t with_cases = 0, with_dets = 0, tp = 0;
    for (const auto& [key, sides] : docs) {
        const auto& [cs, xs] = sides;
        if (!cs.empty()) ++with_cases;
        if (!xs.empty()) ++with_dets;
        if (cs.empty() || xs.empty()) continue;
        std::vector<Span> inter;
        for (const auto& c : cs)
            for (const auto& x : xs) inter.push_back(intersect(c, x));
        if (qualifies(union_length(inter), union_length(cs), union_length(xs))) ++tp;
    }
    out.doc_recall = with_cases ? static_cast<double>(tp) / static_cast<double>(with_cases) : 0.0;
    out.doc_precision = with_dets ? static_cast<double>(tp) / static_cast<double>(with_dets) : 0.0;
    return out;
}

/// Mean reciprocal rank of 1-based ranks.
inline double mrr(const std::vector<std::size_t>& ranks) {
    if (ranks.empty()) throw Error(ErrorCode::invalid_argument, "mrr of an empty rank list");
    double sum = 0;
    for (auto r : ranks) {
        if (r == 0) throw Error(ErrorCode::invalid_argument, "ranks are 1-based");
        sum += 1.0 / static_cast<double>(r);
    }
    return sum / static_cast<double>(ranks.size());
}

enum class MidRankVariant {
    standard, // ranks before the group + (group size + 1) / 2
    printed,  // (r_{i-1} + (|d_i| - 1)) / 2 taken literally, r_{i-1} = last rank before the group
};

/// Mid-ranks for consecutive tie groups given by their sizes, one value per
/// item, in order.
inline std::vector<double> mid_ranks(const std::vector<std::size_t>& group_sizes,
                                     MidRankVariant variant = MidRankVariant::standard) {
    std::vector<double> out;
    std::size_t before = 0;
    for (auto g : group_sizes) {
        if (g == 0) throw Error(ErrorCode::invalid_argument, "tie groups must be nonempty");
        const double v = variant == MidRankVariant::standard
                             ? static_cast<double>(before) + (static_cast<double>(g) + 1.0) / 2.0
                             : (static_cast<double>(before) + (static_cast<double>(g) - 1.0)) / 2.0;
        out.insert(out.end(), g, v);
        before += g;
    }
    return out;
}

/// Mid-rank of one tie group of `group_size` items preceded by `ranks_before` items.
inline double mid_rank(std::size_t ranks_before, std::size_t group_size,
                       MidRankVariant variant = MidRankVariant::standard) {
    std::vector<std::size_t> groups;
    if (ranks_before) groups.push_back(ranks_before);
    groups.push_back(group_size);
    return mid_ranks(groups, variant).back();
}

/// Mid-ranks of scores sorted descending (rank 1 = highest), ties averaged.
inline std::vector<double> mid_ranks_of(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
    std::vector<double> ranks(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double v = static_cast<double>(i) + (static_cast<double>(j - i) + 1.0) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = v;
        i = j;
    }
    return ranks;
}

/// Fleiss' kappa over a subjects x categories matrix of rating counts.
inline double fleiss_kappa(const std::vector<std::vector<std::size_t>>& ratings) {
    if (ratings.size() < 2) throw Error(ErrorCode::invalid_argument, "Fleiss' kappa needs at least two subjects");
    const std::size_t k = ratings.front().size();
    std::size_t n = 0;
    for (auto v : ratings.front()) n += v;
    if (n < 2) throw Error(ErrorCode::invalid_argument, "Fleiss' kappa needs at least two raters");
    std::vector<double> p_j(k, 0.0);
    double p_bar = 0;
    for (const auto& row : ratings) {
        if (row.size() != k) throw Error(ErrorCode::dimension_mismatch, "rating rows differ in category count");
        std::size_t sum = 0, sq = 0;
        for (std::size_t j = 0; j < k; ++j) {
            sum += row[j];
            sq += row[j] * row[j];
            p_j[j] += static_cast<double>(row[j]);
        }
        if (sum != n) throw Error(ErrorCode::invalid_argument, "every subject needs the same number of raters");
        p_bar += static_cast<double>(sq - n) / static_cast<double>(n * (n - 1));
    }
    const auto subjects = static_cast<double>(ratings.size());
    p_bar /= subjects;
    double p_e = 0;
    for (auto& p : p_j) {
        p /= subjects * static_cast<double>(n);
        p_e += p * p;
    }
    if (p_e == 1.0) return 1.0; // every rating in one category: perfect agreement
    return (p_bar - p_e) / (1.0 - p_e);
}

// ---------------------------------------------------------------------------
// JSON

inline Span span_from_json(const json& j) {
    if (j.is_array() && j.size() == 2) return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
    return {j.at("begin").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

inline json to_json(const Span& s) { return json::array({s.begin, s.end}); }

/// Reads a list of {d_plg, plg: [b, e], d_src, src: [b, e]} records; cases
/// and detections share the layout.
template <class T>
std::vector<T> spans_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::schema_error, "expected a JSON array of span records");
    std::vector<T> out;
    try {
        for (const auto& r : j)
            out.push_back(T{span_from_json(r.at("plg")), r.at("d_plg").get<std::string>(), span_from_json(r.at("src")),
                            r.at("d_src").get<std::string>()});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("span record: ") + e.what());
    }
    return out;
}

inline json to_json(const PlagDetReport& r, const CaseDocLevel& cd, const EvalThresholds& t) {
    return {{"precision", r.pr.precision},
            {"recall", r.pr.recall},
            {"precision_defined", r.pr.precision_defined},
            {"recall_defined", r.pr.recall_defined},
            {"granularity", r.granularity},
            {"f1", r.f1},
            {"plagdet", r.plagdet},
            {"tau1", t.tau1},
            {"tau2", t.tau2},
            {"case_precision", cd.case_precision},
            {"case_recall", cd.case_recall},
            {"doc_precision", cd.doc_precision},
            {"doc_recall", cd.doc_recall}};
}

} // namespace nontextpd
