#pragma once

// Image similarity: DCT perceptual hash, bar-chart ratio hash, OCR trigram
// matching, positional text matching, and outlier-based scoring of ranked
// distance lists.

#include "docmodel.hpp"
#include "error.hpp"
#include "raster.hpp"
#include "utf8.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace nontextpd {

// ---------------------------------------------------------------------------
// Perceptual hash

struct PHash {
    std::uint64_t bits = 0;
    bool low_confidence = false; // constant image: no AC energy to threshold
    friend bool operator==(const PHash&, const PHash&) = default;
};

namespace detail {

// weights[o * in + i]: share of output cell o covered by input cell i.
inline std::vector<double> area_weights(std::size_t in, std::size_t out) {
    std::vector<double> w(out * in, 0.0);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double lo = static_cast<double>(o) * scale, hi = static_cast<double>(o + 1) * scale;
        for (auto i = static_cast<std::size_t>(lo); i < in && static_cast<double>(i) < hi; ++i) {
            const double ov = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
            if (ov > 0) w[o * in + i] = ov / scale;
        }
    }
    return w;
}

} // namespace detail

/// Area-average resampling to out_w x out_h, row-major doubles.
inline std::vector<double> resize_area(const Raster& img, std::size_t out_w, std::size_t out_h) {
    const auto wx = detail::area_weights(img.width, out_w);
    const auto wy = detail::area_weights(img.height, out_h);
    std::vector<double> rows(img.height * out_w, 0.0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t o = 0; o < out_w; ++o) {
            double acc = 0;
            for (std::size_t x = 0; x < img.width; ++x) {
                const double w = wx[o * img.width + x];
                if (w != 0.0) acc += w * img.at(x, y);
            }
            rows[y * out_w + o] = acc;
        }
    std::vector<double> out(out_w * out_h, 0.0);
    for (std::size_t o = 0; o < out_h; ++o)
        for (std::size_t y = 0; y < img.height; ++y) {
            const double w = wy[o * img.height + y];
            if (w == 0.0) continue;
            for (std::size_t x = 0; x < out_w; ++x) out[o * out_w + x] += w * rows[y * out_w + x];
        }
    return out;
}

inline constexpr std::size_t phash_resize = 32;
inline constexpr std::size_t phash_block = 8;

/// Orthonormal 2-D DCT-II of an n x n block, row-major.
inline std::vector<double> dct2d(const std::vector<double>& m, std::size_t n) {
    std::vector<double> basis(n * n);
    for (std::size_t u = 0; u < n; ++u) {
        const double alpha = u == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
        for (std::size_t x = 0; x < n; ++x)
            basis[u * n + x] = alpha * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) *
                                                static_cast<double>(u) / (2.0 * static_cast<double>(n)));
    }
    std::vector<double> tmp(n * n, 0.0), out(n * n, 0.0);
    for (std::size_t u = 0; u < n; ++u) // tmp = basis * m
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0;
            for (std::size_t k = 0; k < n; ++k) acc += basis[u * n + k] * m[k * n + x];
            tmp[u * n + x] = acc;
        }
    for (std::size_t u = 0; u < n; ++u) // out = tmp * basis^T
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0;
            for (std::size_t k = 0; k < n; ++k) acc += tmp[u * n + k] * basis[v * n + k];
            out[u * n + v] = acc;
        }
    return out;
}

/// 32x32 area resize, 2-D DCT-II, then bit (u*8+v) of the top-left 8x8 block
/// is set iff the coefficient exceeds the median of the 63 AC coefficients.
/// The DC bit is always clear.
inline PHash dct_phash(const Raster& img) {
    if (img.width < phash_block || img.height < phash_block)
        throw Error(ErrorCode::invalid_argument, "pHash needs images of at least 8x8 pixels");
    const auto small = resize_area(img, phash_resize, phash_resize);
    const auto [lo, hi] = std::minmax_element(small.begin(), small.end());
    if (*hi - *lo < 1e-9) return {0, true};
    const auto coeffs = dct2d(small, phash_resize);
    std::array<double, phash_block * phash_block> block{};
    for (std::size_t u = 0; u < phash_block; ++u)
        for (std::size_t v = 0; v < phash_block; ++v) block[u * phash_block + v] = coeffs[u * phash_resize + v];
    std::vector<double> ac(block.begin() + 1, block.end());
    std::nth_element(ac.begin(), ac.begin() + ac.size() / 2, ac.end());
    const double median = ac[ac.size() / 2];
    PHash h;
    for (std::size_t i = 1; i < block.size(); ++i)
        if (block[i] > median) h.bits |= (1ULL << i);
    return h;
}

inline int phash_distance(const PHash& a, const PHash& b) noexcept { return std::popcount(a.bits ^ b.bits); }
inline int phash_distance(std::uint64_t a, std::uint64_t b) noexcept { return std::popcount(a ^ b); }

// ---------------------------------------------------------------------------
// Bar charts

/// Otsu's threshold: pixels <= threshold form the dark class.
inline int otsu_threshold(const Raster& img) {
    std::array<double, 256> hist{};
    for (auto p : img.pixels) hist[p] += 1;
    const double total = static_cast<double>(img.pixels.size());
    double sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
    double w0 = 0, sum0 = 0, best = -1;
    int threshold = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const double w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            threshold = t;
        }
    }
    return threshold;
}

struct BarExtractionConfig {
    double border_coverage = 0.8;     // frame bounding box share of the image area
    double border_line_fill = 0.9;    // share of black pixels along each frame side
    double cluster_tolerance = 0.10;  // relative run-length variation inside one bar
    std::size_t min_bar_width = 3;    // narrower clusters are axis lines or whiskers
    std::size_t min_run = 3;          // shorter vertical runs are treated as noise
    double min_relative_height = 0.05; // clusters below this share of the tallest are labels
};

namespace detail {

struct BinaryImage {
    std::size_t w = 0, h = 0;
    std::vector<char> black;
    char& at(std::size_t x, std::size_t y) { return black[y * w + x]; }
    char at(std::size_t x, std::size_t y) const { return black[y * w + x]; }
};

// White pixels 4-connected to the image corner.
inline std::vector<char> outside_fill(const BinaryImage& b) {
    std::vector<char> seen(b.w * b.h, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        const std::size_t x = p % b.w, y = p / b.w;
        auto visit = [&](std::size_t nx, std::size_t ny) {
            const std::size_t q = ny * b.w + nx;
            if (!seen[q] && !b.black[q]) {
                seen[q] = 1;
                stack.push_back(q);
            }
        };
        if (x > 0) visit(x - 1, y);
        if (x + 1 < b.w) visit(x + 1, y);
        if (y > 0) visit(x, y - 1);
        if (y + 1 < b.h) visit(x, y + 1);
    }
    return seen;
}

// Clears a rectangular frame if the region enclosed by black pixels spans most
// of the image and its bounding box sides are (nearly) solid black lines.
inline void remove_frame(BinaryImage& b, const BarExtractionConfig& cfg) {
    for (int guard = 0; guard < 16; ++guard) {
        const auto outside = outside_fill(b);
        std::size_t x0 = b.w, y0 = b.h, x1 = 0, y1 = 0;
        for (std::size_t y = 0; y < b.h; ++y)
            for (std::size_t x = 0; x < b.w; ++x)
                if (!outside[y * b.w + x]) {
                    x0 = std::min(x0, x);
                    y0 = std::min(y0, y);
                    x1 = std::max(x1, x);
                    y1 = std::max(y1, y);
                }
        if (x0 > x1) return;
        const double box = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
        const double area = static_cast<double>((b.w - 4) * (b.h - 4));
        if (box < cfg.border_coverage * area) return;
        auto row_fill = [&](std::size_t y) {
            std::size_t n = 0;
            for (std::size_t x = x0; x <= x1; ++x) n += b.at(x, y) ? 1 : 0;
            return static_cast<double>(n) / static_cast<double>(x1 - x0 + 1);
        };
        auto col_fill = [&](std::size_t x) {
            std::size_t n = 0;
            for (std::size_t y = y0; y <= y1; ++y) n += b.at(x, y) ? 1 : 0;
            return static_cast<double>(n) / static_cast<double>(y1 - y0 + 1);
        };
        if (row_fill(y0) < cfg.border_line_fill || row_fill(y1) < cfg.border_line_fill ||
            col_fill(x0) < cfg.border_line_fill || col_fill(x1) < cfg.border_line_fill)
            return;
        for (std::size_t x = x0; x <= x1; ++x) b.at(x, y0) = b.at(x, y1) = 0;
        for (std::size_t y = y0; y <= y1; ++y) b.at(x0, y) = b.at(x1, y) = 0;
    }
}

} // namespace detail

/// Bar heights in pixels, left to right: Otsu binarization, 2 px white
/// padding, frame removal, solid filling of enclosed regions, longest vertical
/// black run per column, and clustering of neighbouring columns with similar
/// runs into bars (mean run per cluster).
inline std::vector<double> extract_bar_heights(const Raster& img, const BarExtractionConfig& cfg = {}) {
    if (img.empty()) throw Error(ErrorCode::no_bars_found, "empty image");
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    if (*lo == *hi) throw Error(ErrorCode::no_bars_found, "uniform image");
    const int t = otsu_threshold(img);
    detail::BinaryImage b{img.width + 4, img.height + 4, {}};
    b.black.assign(b.w * b.h, 0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) b.at(x + 2, y + 2) = img.at(x, y) <= t ? 1 : 0;
    detail::remove_frame(b, cfg);
    const auto outside = detail::outside_fill(b);

    std::vector<std::size_t> runs(b.w, 0);
    for (std::size_t x = 0; x < b.w; ++x) {
        std::size_t cur = 0, best = 0;
        for (std::size_t y = 0; y < b.h; ++y) {
            cur = outside[y * b.w + x] ? 0 : cur + 1;
            best = std::max(best, cur);
        }
        runs[x] = best >= cfg.min_run ? best : 0;
    }

    struct Cluster {
        std::size_t width = 0;
        double sum = 0;
        double mean() const { return sum / static_cast<double>(width); }
    };
    std::vector<Cluster> clusters;
    bool open = false;
    for (std::size_t x = 0; x < b.w; ++x) {
        if (runs[x] == 0) {
            open = false;
            continue;
        }
        const auto r = static_cast<double>(runs[x]);
        if (open && std::abs(r - clusters.back().mean()) <= cfg.cluster_tolerance * clusters.back().mean()) {
            clusters.back().width += 1;
            clusters.back().sum += r;
        } else {
            clusters.push_back({1, r});
            open = true;
        }
    }
    double tallest = 0;
    for (const auto& c : clusters)
        if (c.width >= cfg.min_bar_width) tallest = std::max(tallest, c.mean());
    std::vector<double> heights;
    for (const auto& c : clusters)
        if (c.width >= cfg.min_bar_width && c.mean() >= cfg.min_relative_height * tallest) heights.push_back(c.mean());
    if (heights.empty()) throw Error(ErrorCode::no_bars_found, "no bar-shaped regions");
    return heights;
}

/// Bar heights relative to the tallest bar, sorted descending.
struct RatioHash {
    std::vector<double> ratios;
};

inline RatioHash ratio_hash(std::vector<double> heights) {
    std::erase_if(heights, [](double h) { return !(h > 0); });
    if (heights.empty()) throw Error(ErrorCode::invalid_argument, "ratio hash needs a positive bar height");
    std::sort(heights.begin(), heights.end(), std::greater<>());
    RatioHash r;
    for (double h : heights) r.ratios.push_back(h / heights.front());
    return r;
}

inline double ratio_hash_distance(const RatioHash& a, const RatioHash& b) {
    if (a.ratios.size() != b.ratios.size())
        throw Error(ErrorCode::bar_count_mismatch, std::to_string(a.ratios.size()) + " vs " +
                                                       std::to_string(b.ratios.size()) + " bars");
    double d = 0;
    for (std::size_t i = 0; i < a.ratios.size(); ++i) d += std::abs(a.ratios[i] - b.ratios[i]);
    return d;
}

// ---------------------------------------------------------------------------
// OCR text

struct TrigramDescriptor {
    std::set<std::string> grams;
};

/// Character trigrams inside each token (no grams across token boundaries).
/// With `pad_short_tokens`, tokens are wrapped in '_' markers first so one-
/// and two-character tokens also yield grams.
inline TrigramDescriptor trigram_descriptor(const std::vector<OcrToken>& tokens, bool pad_short_tokens = false) {
    TrigramDescriptor d;
    for (const auto& t : tokens) {
        std::vector<std::string> cps;
        if (pad_short_tokens) cps.emplace_back("_");
        for (std::size_t pos = 0; pos < t.text.size();) {
            const auto dec = utf8::decode(t.text, pos);
            cps.emplace_back(t.text.substr(pos, dec.length));
            pos += dec.length;
        }
        if (pad_short_tokens) cps.emplace_back("_");
        for (std::size_t i = 0; i + 3 <= cps.size(); ++i) d.grams.insert(cps[i] + cps[i + 1] + cps[i + 2]);
    }
    return d;
}

/// |K1 symmetric-difference K2| / |K1 n K2|; +infinity without shared grams.
inline double ngram_text_distance(const TrigramDescriptor& k1, const TrigramDescriptor& k2) {
    std::size_t inter = 0;
    for (const auto& g : k1.grams) inter += k2.grams.count(g);
    if (inter == 0) return std::numeric_limits<double>::infinity();
    const std::size_t symdiff = k1.grams.size() + k2.grams.size() - 2 * inter;
    return static_cast<double>(symdiff) / static_cast<double>(inter);
}

struct PositionalConfig {
    double radius = 25.0;
    double norm_height = 800.0;
};

struct CharPoint {
    char32_t cp;
    double x, y;
};

/// Characters of every token at the token's coordinates, rescaled so the
/// source image is norm_height pixels tall.
inline std::vector<CharPoint> ocr_char_points(const std::vector<OcrToken>& tokens, double norm_height) {
    std::vector<CharPoint> out;
    for (const auto& t : tokens) {
        const double s = t.img_height > 0 ? norm_height / t.img_height : 1.0;
        for (std::size_t pos = 0; pos < t.text.size();) {
            const auto d = utf8::decode(t.text, pos);
            out.push_back({d.cp, t.x * s, t.y * s});
            pos += d.length;
        }
    }
    return out;
}

/// Greedy nearest-first one-to-one matching of identical characters within
/// the radius. Returns the number of matched pairs.
inline std::size_t positional_match_count(const std::vector<CharPoint>& a, const std::vector<CharPoint>& b,
                                          double radius) {
    std::unordered_map<char32_t, std::vector<std::size_t>> by_char;
    for (std::size_t j = 0; j < b.size(); ++j) by_char[b[j].cp].push_back(j);
    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto it = by_char.find(a[i].cp);
        if (it == by_char.end()) continue;
        for (std::size_t j : it->second) {
            const double d = std::hypot(a[i].x - b[j].x, a[i].y - b[j].y);
            if (d <= radius) cand.emplace_back(d, i, j);
        }
    }
    std::sort(cand.begin(), cand.end());
    std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
    std::size_t n = 0;
    for (const auto& [d, i, j] : cand) {
        if (used_a[i] || used_b[j]) continue;
        used_a[i] = used_b[j] = 1;
        ++n;
    }
    return n;
}

/// Matched characters over the character count of the longer text, in [0, 1].
inline double positional_text_match(const std::vector<OcrToken>& a, const std::vector<OcrToken>& b,
                                    const PositionalConfig& cfg = {}) {
    const auto pa = ocr_char_points(a, cfg.norm_height);
    const auto pb = ocr_char_points(b, cfg.norm_height);
    const std::size_t longer = std::max(pa.size(), pb.size());
    if (longer == 0) return 0.0;
    return static_cast<double>(positional_match_count(pa, pb, cfg.radius)) / static_cast<double>(longer);
}

// ---------------------------------------------------------------------------
// Scoring

struct DistanceEntry {
    std::string id;
    double distance = 0;
};

struct DistanceList {
    std::string method;
    std::vector<DistanceEntry> entries; // ascending by distance, then id
};

/// Sorts ascending and drops non-finite distances (no comparable evidence).
inline DistanceList make_distance_list(std::string method, std::vector<DistanceEntry> entries) {
    std::erase_if(entries, [](const DistanceEntry& e) { return !std::isfinite(e.distance) || e.distance < 0; });
    std::sort(entries.begin(), entries.end(), [](const DistanceEntry& x, const DistanceEntry& y) {
        return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
    });
    return {std::move(method), std::move(entries)};
}

struct SuspicionConfig {
    std::size_t cutoff = 10;       // outlier sets must hold fewer than this many images
    std::size_t window = 20;       // deltas examined; 0 examines the whole list
    double report_threshold = 0.5;
};

struct Suspiciousness {
    double score = 0;
    std::size_t outlier_count = 0; // k: the leading entries forming the outlier set
    std::size_t argmax_index = 0;  // 1-based index of the largest relative delta
    bool exact_copy = false;       // leading zero distances; score is then 1
};

/// Relative deltas d'_i = (d_{i+1} - d_i) / d_i over the ascending list; the
/// largest delta at 1-based index k < cutoff yields s = d'_k / (1 + d'_k).
/// A largest delta at or beyond the cutoff means the input resembles too many
/// images, and s = 0.
inline Suspiciousness suspiciousness_score(const DistanceList& list, const SuspicionConfig& cfg = {}) {
    std::vector<double> d;
    for (const auto& e : list.entries)
        if (std::isfinite(e.distance)) d.push_back(e.distance);
    if (d.size() < 2) throw Error(ErrorCode::too_few_distances, "scoring needs at least two distances");
    if (!std::is_sorted(d.begin(), d.end())) throw Error(ErrorCode::invalid_argument, "distance list not ascending");
    Suspiciousness out;
    if (d.front() == 0.0) {
        const auto zeros = static_cast<std::size_t>(std::count(d.begin(), d.end(), 0.0));
        if (zeros < cfg.cutoff) {
            out.exact_copy = true;
            out.score = 1.0;
            out.outlier_count = zeros;
            out.argmax_index = zeros;
        }
        return out;
    }
    const std::size_t limit = cfg.window == 0 ? d.size() : std::min(d.size(), cfg.window + 1);
    double best = 0;
    std::size_t k = 0;
    for (std::size_t i = 1; i < limit; ++i) { // 1-based delta index i uses d_i, d_{i+1}
        const double delta = (d[i] - d[i - 1]) / d[i - 1];
        if (delta > best) {
            best = delta;
            k = i;
        }
    }
    out.argmax_index = k;
    if (k == 0 || k >= cfg.cutoff) return out;
    out.outlier_count = k;
    out.score = best / (1.0 + best);
    return out;
}

} // namespace nontextpd
