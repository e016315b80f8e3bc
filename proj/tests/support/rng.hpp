#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

// std::uniform_*_distribution and std::shuffle differ between standard
// libraries; fixtures must not, so only the engine output is used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(eng_() % n); }
    int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    bool chance(double p) { return unit() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

    /// Index drawn from a cumulative weight table.
    std::size_t weighted(const std::vector<double>& cdf) {
        const double x = unit() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    }

private:
    std::mt19937_64 eng_;
};

/// Cumulative Zipf weights 1/(rank+1)^s for n items.
inline std::vector<double> zipf_cdf(std::size_t n, double s) {
    std::vector<double> cdf(n);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
        cdf[i] = acc;
    }
    return cdf;
}

} // namespace testsupport
