#pragma once

// Set-, sequence-, and vector-based similarity and distance measures.
//
// Conventions where the textbook formulas are indeterminate:
//   * jaccard/dice/overlap of two empty sets is 1.0;
//   * similarity-shaped sequence measures of two empty sequences are 1.0
//     (norm_levenshtein, a distance, yields 0.0);
//   * a canberra term with a_i = b_i = 0 contributes 0.

#include "error.hpp"
#include "sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nontextpd {

enum class Measure {
    jaccard,
    dice,
    containment,
    overlap,
    simple_matching,
    norm_hamming,
    norm_levenshtein,
    norm_lcs,
    cosine,
    euclidean,
    minkowski,
    manhattan,
    canberra,
    chebyshev,
};

/// A measure plus its parameter (the order p of minkowski).
struct MeasureId {
    Measure kind = Measure::jaccard;
    double p = 2.0;

    constexpr MeasureId() = default;
    constexpr MeasureId(Measure m) : kind(m) {} // NOLINT(google-explicit-constructor)

    static MeasureId minkowski(double order) {
        if (!(order >= 1.0)) throw Error(ErrorCode::invalid_argument, "minkowski order p must be >= 1");
        MeasureId id(Measure::minkowski);
        id.p = order;
        return id;
    }
};

inline std::string_view to_string(Measure m) {
    switch (m) {
    case Measure::jaccard: return "jaccard";
    case Measure::dice: return "dice";
    case Measure::containment: return "containment";
    case Measure::overlap: return "overlap";
    case Measure::simple_matching: return "simple_matching";
    case Measure::norm_hamming: return "norm_hamming";
    case Measure::norm_levenshtein: return "norm_levenshtein";
    case Measure::norm_lcs: return "norm_lcs";
    case Measure::cosine: return "cosine";
    case Measure::euclidean: return "euclidean";
    case Measure::minkowski: return "minkowski";
    case Measure::manhattan: return "manhattan";
    case Measure::canberra: return "canberra";
    case Measure::chebyshev: return "chebyshev";
    }
    return "?";
}

/// Set similarity; A is the suspicious side (matters for containment only).
/// simple_matching needs the universe size to count mutual absences.
template <class T>
double set_similarity(MeasureId measure, const std::set<T>& a, const std::set<T>& b,
                      std::optional<std::size_t> universe_size = std::nullopt) {
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    switch (measure.kind) {
    case Measure::jaccard:
        return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    case Measure::dice:
        return uni == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
    case Measure::containment:
        if (a.empty()) throw Error(ErrorCode::empty_denominator, "containment of an empty set");
        return static_cast<double>(inter) / static_cast<double>(a.size());
    case Measure::overlap: {
        const std::size_t m = std::min(a.size(), b.size());
        if (m == 0) return uni == 0 ? 1.0 : 0.0;
        return static_cast<double>(inter) / static_cast<double>(m);
    }
    case Measure::simple_matching: {
        if (!universe_size || *universe_size < uni)
            throw Error(ErrorCode::invalid_argument, "simple_matching requires universe_size >= |A u B|");
        if (*universe_size == 0) return 1.0;
        const std::size_t absent = *universe_size - uni;
        return static_cast<double>(inter + absent) / static_cast<double>(uni + absent);
    }
    default:
        throw Error(ErrorCode::invalid_argument, std::string(to_string(measure.kind)) + " is not a set measure");
    }
}

/// Sequence measures. norm_hamming and norm_lcs are similarities normalized
/// by |a|; norm_levenshtein is the distance d_L / (|a| + |b|).
template <class T>
double sequence_similarity(MeasureId measure, std::span<const T> a, std::span<const T> b) {
    switch (measure.kind) {
    case Measure::norm_hamming: {
        if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "hamming requires equal lengths");
        if (a.empty()) return 1.0;
        std::size_t diff = 0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] == b[i]) ? 0 : 1;
        return 1.0 - static_cast<double>(diff) / static_cast<double>(a.size());
    }
    case Measure::norm_levenshtein: {
        if (a.empty() && b.empty()) return 0.0;
        return static_cast<double>(edit_distance(a, b)) / static_cast<double>(a.size() + b.size());
    }
    case Measure::norm_lcs: {
        if (a.empty()) return b.empty() ? 1.0 : 0.0;
        return static_cast<double>(lcs_length(a, b)) / static_cast<double>(a.size());
    }
    default:
        throw Error(ErrorCode::invalid_argument, std::string(to_string(measure.kind)) + " is not a sequence measure");
    }
}

template <class T>
double sequence_similarity(MeasureId measure, const std::vector<T>& a, const std::vector<T>& b) {
    return sequence_similarity(measure, std::span<const T>(a), std::span<const T>(b));
}

inline double sequence_similarity(MeasureId measure, std::string_view a, std::string_view b) {
    return sequence_similarity(measure, std::span<const char>(a.data(), a.size()), std::span<const char>(b.data(), b.size()));
}

enum class CanberraVariant {
    absolute, // sum |a_i - b_i| / |a_i + b_i|
    squared,  // sum |a_i - b_i|^2 / |a_i + b_i|, as some tables print it
};

inline double vector_distance(MeasureId measure, std::span<const double> a, std::span<const double> b,
                              CanberraVariant canberra = CanberraVariant::absolute) {
    if (a.size() != b.size()) throw Error(ErrorCode::dimension_mismatch, "vectors differ in dimension");
    double acc = 0.0;
    switch (measure.kind) {
    case Measure::euclidean:
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc);
    case Measure::manhattan:
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    case Measure::minkowski:
        if (!(measure.p >= 1.0)) throw Error(ErrorCode::invalid_argument, "minkowski order p must be >= 1");
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), measure.p);
        return std::pow(acc, 1.0 / measure.p);
    case Measure::chebyshev:
        for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::abs(a[i] - b[i]));
        return acc;
    case Measure::canberra:
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double den = std::abs(a[i] + b[i]);
            const double num = std::abs(a[i] - b[i]);
            if (den == 0.0) continue;
            acc += (canberra == CanberraVariant::squared ? num * num : num) / den;
        }
        return acc;
    default:
        throw Error(ErrorCode::invalid_argument, std::string(to_string(measure.kind)) + " is not a vector distance");
    }
}

inline double vector_distance(MeasureId measure, const std::vector<double>& a, const std::vector<double>& b,
                              CanberraVariant canberra = CanberraVariant::absolute) {
    return vector_distance(measure, std::span<const double>(a), std::span<const double>(b), canberra);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::dimension_mismatch, "vectors differ in dimension");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::zero_vector, "cosine of a zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
}

} // namespace nontextpd
