// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 when any fails.

#include "../support/corpus.hpp"
#include "../support/oracles.hpp"
#include "../support/render.hpp"
#include "../support/rng.hpp"

#include <nontextpd/citedetect.hpp>
#include <nontextpd/evalmetrics.hpp>
#include <nontextpd/imagedetect.hpp>
#include <nontextpd/index.hpp>
#include <nontextpd/mathdetect.hpp>
#include <nontextpd/pipeline.hpp>
#include <nontextpd/sequence.hpp>
#include <nontextpd/textdetect.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nontextpd;
using testsupport::Rng;

namespace {

// Tolerances and budgets.
constexpr double plagdet_tolerance = 1e-9;
constexpr double sequence_budget_s = 60;
constexpr double retrieval_budget_s = 300;
constexpr std::size_t retrieval_k = 10;
constexpr std::size_t per_method_minimum = 8;
constexpr double calibration_share = 0.99;
constexpr std::size_t calibration_pairs = 10000;
constexpr double bar_height_tolerance_px = 1;
constexpr double bar_ratio_tolerance = 0.02;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

// ---------------------------------------------------------------------------

/// Calls f(a, b) for every pair of sequences with |a|,|b| <= max_len over an
/// alphabet of at most `alphabet` symbols, one representative per symbol
/// relabeling: the concatenation a+b is a restricted growth string.
template <class F>
void for_each_canonical_pair(std::size_t max_len, int alphabet, F&& f) {
    std::vector<int> s;
    std::function<void(std::size_t, int)> grow = [&](std::size_t n, int used) {
        if (s.size() == n) {
            for (std::size_t la = n > max_len ? n - max_len : 0; la <= std::min(n, max_len); ++la)
                f(std::vector<int>(s.begin(), s.begin() + static_cast<long>(la)),
                  std::vector<int>(s.begin() + static_cast<long>(la), s.end()));
            return;
        }
        for (int c = 0; c <= std::min(used, alphabet - 1); ++c) {
            s.push_back(c);
            grow(n, std::max(used, c + 1));
            s.pop_back();
        }
    };
    for (std::size_t n = 0; n <= 2 * max_len; ++n) grow(n, 0);
}

bool valid_alignment(const std::vector<int>& a, const std::vector<int>& b, const std::vector<IndexPair>& pairs) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        if (i >= a.size() || j >= b.size() || a[i] != b[j]) return false;
        if (k && (i <= pairs[k - 1].first || j <= pairs[k - 1].second)) return false;
    }
    return true;
}

DocumentRecord identifier_doc(const std::vector<int>& seq) {
    DocumentRecord d;
    d.doc_id = "seq";
    for (int x : seq) d.identifiers.push_back(std::string(1, static_cast<char>('a' + x)));
    return d;
}

Outcome sequence_oracle_equivalence() {
    const auto t0 = Clock::now();
    std::size_t checked = 0, mismatches = 0;
    auto check_tiling = [&](const std::vector<int>& a, const std::vector<int>& b) {
        ++checked;
        if (greedy_tiling(a, b, 1) != oracle::tiling(a, b, 1)) ++mismatches;
        if (greedy_tiling(a, b, 5) != oracle::tiling(a, b, 5)) ++mismatches;
    };
    // exhaustive up to relabeling: |a|,|b| <= 6 over four symbols
    for_each_canonical_pair(6, 4, check_tiling);
    const std::size_t exhaustive = checked;
    // binary alphabet, every pair up to length 8
    for (std::size_t la = 0; la <= 8; ++la)
        for (std::size_t lb = 0; lb <= 8; ++lb)
            for (std::uint32_t m = 0; m < (1U << (la + lb)); ++m) {
                std::vector<int> a(la), b(lb);
                for (std::size_t i = 0; i < la; ++i) a[i] = static_cast<int>((m >> i) & 1U);
                for (std::size_t i = 0; i < lb; ++i) b[i] = static_cast<int>((m >> (la + i)) & 1U);
                check_tiling(a, b);
            }
    Rng rng(11);
    auto random_seq = [&](std::size_t max_len, int alphabet) {
        std::vector<int> v(rng.below(max_len + 1));
        for (auto& x : v) x = static_cast<int>(rng.below(static_cast<std::size_t>(alphabet)));
        return v;
    };
    // random pairs up to length 12, including the GIT path through documents
    MathConfig no_floor{0, 5};
    for (int t = 0; t < 20000; ++t) {
        const int alphabet = 1 + static_cast<int>(rng.below(4));
        const auto a = random_seq(12, alphabet), b = random_seq(12, alphabet);
        check_tiling(a, b);
        const auto g = git_score(identifier_doc(a), identifier_doc(b), no_floor);
        if (g.tiles != oracle::tiling(a, b, 5)) ++mismatches;
    }
    // LCCS and LCIS against the DP table
    std::size_t lcs_checked = 0;
    for (int t = 0; t < 10000; ++t) {
        const int alphabet = 1 + static_cast<int>(rng.below(6));
        const auto a = random_seq(40, alphabet), b = random_seq(40, alphabet);
        const auto want = oracle::lcs(a, b);
        CitationSequence ca, cb;
        for (int x : a) ca.push_back("r" + std::to_string(x));
        for (int x : b) cb.push_back("r" + std::to_string(x));
        const auto lc = lccs(ca, cb);
        const auto li = lcis_score(identifier_doc(a), identifier_doc(b), no_floor);
        ++lcs_checked;
        if (lc.length != want || !valid_alignment(a, b, lc.index_pairs)) ++mismatches;
        if (static_cast<std::size_t>(li.raw) != want || !valid_alignment(a, b, li.index_pairs)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < sequence_budget_s,
            std::to_string(exhaustive) + " canonical pairs (|a|,|b|<=6, 4 symbols), " +
                std::to_string(checked - exhaustive) + " binary/random tiling pairs, " + std::to_string(lcs_checked) +
                " LCS pairs, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

Outcome formula_fixed_points() {
    std::vector<std::string> failed;
    auto expect = [&](const char* what, double got, double want) {
        if (got != want) failed.push_back(std::string(what) + "=" + fmt(got, 17));
    };
    expect("sherlock(5,10,15)", fingerprint_similarity(5, 10, 15), 25.0);
    const auto tokens = tokenize_text("the quick brown fox jumps over the lazy dog and keeps running far away");
    const auto fp = build_fingerprint(tokens, FingerprintConfig{3, 0});
    expect("sherlock(identical)", fingerprint_similarity(fp, fp), 100.0);
    const auto other = build_fingerprint(tokenize_text("entirely different words without any shared trigram here"),
                                         FingerprintConfig{3, 0});
    expect("sherlock(disjoint)", fingerprint_similarity(fp, other), 0.0);

    const auto k1 = FeatureDescriptor::of(FeatureType::ci, {"x", "x", "x", "y"});
    const auto k2 = FeatureDescriptor::of(FeatureType::ci, {"x", "z", "z"});
    expect("feature_distance", feature_distance(k1, k2), 5.0 / 6.0);

    const auto d1 = trigram_descriptor({{"abcd", 0, 0, 100}});
    const auto d2 = trigram_descriptor({{"bcde", 0, 0, 100}});
    expect("ntm", ngram_text_distance(d1, d2), 2.0);

    expect("ratio", ratio_hash_distance(ratio_hash({100, 50, 25}), ratio_hash({200, 100, 50})), 0.0);
    std::string detail = failed.empty() ? "sherlock 25/100/0, feature distance 5/6, ntm 2.0, ratio 0" : "";
    for (const auto& f : failed) detail += f + " ";
    return {failed.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome suspiciousness_anchors() {
    auto list = [](std::vector<double> d) {
        std::vector<DistanceEntry> e;
        for (std::size_t i = 0; i < d.size(); ++i) e.push_back({"img" + std::to_string(100 + i), d[i]});
        return make_distance_list("phash", e);
    };
    std::vector<double> one = {2};
    one.resize(20, 4);
    std::vector<double> three = {1, 1, 1};
    three.resize(20, 4);
    std::vector<double> late(10, 1.0);
    late.resize(25, 5);
    const auto s1 = suspiciousness_score(list(one));
    const auto s3 = suspiciousness_score(list(three));
    const auto s10 = suspiciousness_score(list(late));
    const bool ok = s1.score == 0.5 && s1.outlier_count == 1 && s3.score == 0.75 && s3.outlier_count == 3 &&
                    s10.score == 0.0 && s10.argmax_index == 10;
    return {ok, "gap 1 -> " + fmt(s1.score) + " (k=" + std::to_string(s1.outlier_count) + "), gap 3 -> " +
                    fmt(s3.score) + " (k=" + std::to_string(s3.outlier_count) + "), max delta at index " +
                    std::to_string(s10.argmax_index) + " -> " + fmt(s10.score)};
}

// ---------------------------------------------------------------------------

Outcome plagdet_worked_values() {
    const std::vector<PlagCase> cases = {{{0, 100}, "plg", {0, 100}, "src"}};
    const double half = plagdet(cases, {{{0, 50}, "plg", {0, 50}, "src"}});
    const double split = plagdet(cases, {{{0, 25}, "plg", {0, 25}, "src"}, {{25, 50}, "plg", {25, 50}, "src"}});
    const double perfect = plagdet(cases, {{{0, 100}, "plg", {0, 100}, "src"}});
    const double want_split = (2.0 / 3.0) / std::log2(3.0);
    const bool ok = std::abs(half - 2.0 / 3.0) <= plagdet_tolerance &&
                    std::abs(split - want_split) <= plagdet_tolerance && std::abs(perfect - 1.0) <= plagdet_tolerance;
    return {ok, "half recall " + fmt(half, 12) + ", split " + fmt(split, 12) + " (want " + fmt(want_split, 12) +
                    "), perfect " + fmt(perfect, 12)};
}

// ---------------------------------------------------------------------------

Outcome default_thresholds_match() {
    const std::map<std::string, double> table = {{"histo", 0.56}, {"lcis", 0.76}, {"git", 0.15}, {"bc_rel", 0.13},
                                                  {"lccs", 0.22},  {"max_gct", 0.10}, {"enco", 0.06}};
    const auto got = default_thresholds();
    const auto cfg = AnalysisConfig{}.thresholds.min_score;
    std::string detail;
    for (const auto& [k, v] : got) detail += k + "=" + fmt(v, 3) + " ";
    return {got == table && cfg == table, detail};
}

// ---------------------------------------------------------------------------

struct SharedCorpus {
    testsupport::Corpus corpus;
    std::unique_ptr<IndexStore> index;
    double build_seconds = 0;
};

SharedCorpus& planted_corpus() {
    static SharedCorpus s = [] {
        const auto t0 = Clock::now();
        SharedCorpus c;
        c.corpus = testsupport::generate_corpus({});
        c.index = std::make_unique<IndexStore>(build_index(c.corpus.docs));
        c.build_seconds = seconds_since(t0);
        return c;
    }();
    return s;
}

double share_in(const std::vector<std::string>& xs, const std::set<std::string>& pool) {
    if (xs.empty()) return 0;
    std::size_t n = 0;
    for (const auto& x : xs) n += pool.contains(x) ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(xs.size());
}

Outcome planted_source_retrieval() {
    const auto t0 = Clock::now();
    auto& sc = planted_corpus();
    const auto& corpus = sc.corpus;
    AnalysisConfig cfg;
    cfg.k = retrieval_k;
    constexpr std::array families = {MethodFamily::citation, MethodFamily::math, MethodFamily::text, MethodFamily::image};
    std::array<std::vector<bool>, families.size()> found;
    bool construction_ok = true;
    for (const auto& p : corpus.planted) {
        const auto& q = corpus.doc(p.query);
        const auto& s = corpus.doc(p.source);
        std::set<std::string> src_refs(s.identifiers.begin(), s.identifiers.end()), src_cites;
        for (const auto& r : s.references) src_cites.insert(r.ref_key);
        const auto qcites = citation_sequence(q);
        if (std::max(share_in(qcites, src_cites), share_in(q.identifiers, src_refs)) < 0.5) construction_ok = false;
        for (std::size_t f = 0; f < families.size(); ++f) {
            bool hit = false;
            for (const auto& e : retrieve_candidates(*sc.index, q, families[f], cfg).entries)
                hit = hit || e.doc_id == p.source;
            found[f].push_back(hit);
        }
    }
    const std::size_t n = corpus.planted.size();
    std::string detail;
    bool ok = construction_ok && n == 10;
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto hits = static_cast<std::size_t>(std::count(found[f].begin(), found[f].end(), true));
        ok = ok && hits >= per_method_minimum;
        detail += std::string(to_string(families[f])) + " " + std::to_string(hits) + "/" + std::to_string(n) + ", ";
    }
    std::size_t worst_union = n;
    for (std::size_t f = 0; f < families.size(); ++f)
        for (std::size_t g = f + 1; g < families.size(); ++g) {
            std::size_t u = 0;
            for (std::size_t i = 0; i < n; ++i) u += (found[f][i] || found[g][i]) ? 1 : 0;
            worst_union = std::min(worst_union, u);
        }
    ok = ok && worst_union == n;
    const double secs = seconds_since(t0) + sc.build_seconds;
    ok = ok && secs < retrieval_budget_s;
    detail += "worst pairwise union " + std::to_string(worst_union) + "/" + std::to_string(n) + ", k=" +
              std::to_string(retrieval_k) + ", " + std::to_string(corpus.docs.size()) + " docs" +
              (construction_ok ? "" : ", planted pair below 50% shared citations/identifiers") + ", " +
              fmt(secs, 3) + " s";
    return {ok, detail};
}

// ---------------------------------------------------------------------------

Outcome random_pair_calibration() {
    auto& sc = planted_corpus();
    const auto& docs = sc.corpus.docs;
    std::set<std::pair<std::string, std::string>> related;
    for (const auto& p : sc.corpus.planted) {
        related.insert({p.query, p.source});
        related.insert({p.source, p.query});
    }
    const auto thresholds = default_thresholds();
    AnalysisConfig cfg;
    Rng rng(31);
    std::size_t below = 0;
    std::map<std::string, std::size_t> flags;
    std::set<std::pair<std::size_t, std::size_t>> used;
    while (used.size() < calibration_pairs) {
        const auto i = rng.below(docs.size()), j = rng.below(docs.size());
        if (i == j || related.contains({docs[i].doc_id, docs[j].doc_id}) || !used.insert({i, j}).second) continue;
        bool any = false;
        for (const auto& [method, thr] : thresholds) {
            const auto s = score_pair(method, docs[i], docs[j], cfg);
            if (s.ok() && s.score + cfg.thresholds.epsilon >= thr) {
                any = true;
                ++flags[method];
            }
        }
        below += any ? 0 : 1;
    }
    const double share = static_cast<double>(below) / static_cast<double>(calibration_pairs);
    std::string detail = fmt(100 * share, 5) + "% of " + std::to_string(calibration_pairs) + " pairs below all thresholds";
    for (const auto& [m, n] : flags) detail += ", " + m + " " + std::to_string(n);
    return {share >= calibration_share, detail};
}

// ---------------------------------------------------------------------------

Outcome encoplot_pairing() {
    Rng rng(41);
    const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"};
    auto text = [&] {
        std::string s;
        for (std::size_t n = rng.below(120); n > 0; --n) s += rng.pick(words) + " ";
        return s;
    };
    std::size_t mismatches = 0, total = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto a = text(), b = text();
        const auto got = encoplot_matches(a, b);
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& m : got) pairs.emplace(m.a_pos, m.b_pos);
        total += got.size();
        if (got.size() != oracle::gram_min_count_sum(a, b) || pairs != oracle::gram_pairs(a, b)) ++mismatches;
    }
    return {mismatches == 0, "1000 pairs, " + std::to_string(total) + " matches, " + std::to_string(mismatches) +
                                 " mismatches"};
}

// ---------------------------------------------------------------------------

Outcome phash_properties() {
    Rng rng(51);
    std::size_t failures = 0;
    for (int t = 0; t < 50; ++t) {
        const auto img = testsupport::render_photo(rng);
        const auto h = dct_phash(img);
        if (phash_distance(h, dct_phash(img)) != 0) ++failures;
        if (phash_distance(h, dct_phash(testsupport::brighten(img, rng.range(-25, 25)))) != 0) ++failures;
    }
    for (int t = 0; t < 1000; ++t) {
        const auto a = rng.bits(), b = rng.bits(), c = rng.bits();
        const int ab = phash_distance(a, b), bc = phash_distance(b, c), ac = phash_distance(a, c);
        if (ab != oracle::hamming(a, b) || bc != oracle::hamming(b, c) || ac != oracle::hamming(a, c)) ++failures;
        if (phash_distance(a, a) != 0 || ab != phash_distance(b, a) || ac > ab + bc) ++failures;
        if (a != b && ab == 0) ++failures;
    }
    return {failures == 0, "50 images x (identical, brightness offset), 1000 hash triples, " +
                               std::to_string(failures) + " failures"};
}

// ---------------------------------------------------------------------------

Outcome bar_chart_extraction() {
    const std::vector<int> bars = {100, 50, 25};
    testsupport::BarChartStyle style;
    style.frame = true;
    const auto one = testsupport::render_bar_chart(bars, style);
    style.scale = 2;
    const auto two = testsupport::render_bar_chart(bars, style);
    const auto h1 = extract_bar_heights(one);
    const auto h2 = extract_bar_heights(two);
    bool ok = h1.size() == 3 && h2.size() == 3;
    std::string detail = "heights";
    for (double h : h1) detail += " " + fmt(h);
    if (ok) {
        // bars stand on a 1-px axis, which the extraction counts with the bar
        for (std::size_t i = 0; i < 3; ++i)
            ok = ok && std::abs(h1[i] - (bars[i] + 1)) <= bar_height_tolerance_px;
        const double d = ratio_hash_distance(ratio_hash(h1), ratio_hash(h2));
        ok = ok && d <= bar_ratio_tolerance;
        detail += " (+1 px axis), ratio distance to 2x rendering " + fmt(d);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------------------

std::string run_capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) out.append(buf.data(), n);
    status = pclose(p);
    return out;
}

Outcome compare_determinism() {
    const std::string cli = NONTEXTPD_CLI;
    const std::string samples = NONTEXTPD_SAMPLES;
    const std::string cmd = "'" + cli + "' compare '" + samples + "/docs/suspicious.json' '" + samples +
                            "/docs/source.json' --methods all";
    int s1 = 0, s2 = 0;
    const auto first = run_capture(cmd, s1);
    const auto second = run_capture(cmd, s2);
    const bool ok = s1 == 0 && s2 == 0 && !first.empty() && first == second;
    return {ok, std::to_string(first.size()) + " bytes, exit " + std::to_string(s1) + "/" + std::to_string(s2) +
                    (first == second ? ", identical" : ", differ")};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"sequence-oracle-equivalence", sequence_oracle_equivalence},
        {"formula-fixed-points", formula_fixed_points},
        {"suspiciousness-anchors", suspiciousness_anchors},
        {"plagdet-worked-values", plagdet_worked_values},
        {"default-thresholds", default_thresholds_match},
        {"planted-source-retrieval", planted_source_retrieval},
        {"random-pair-calibration", random_pair_calibration},
        {"encoplot-pairing", encoplot_pairing},
        {"phash-properties", phash_properties},
        {"bar-chart-extraction", bar_chart_extraction},
        {"compare-determinism", compare_determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
