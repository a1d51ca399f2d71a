#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace jobval {

// Mean of the standard Gumbel distribution.
inline constexpr double kEulerGamma = 0.57721566490153286060651209;

// Error taxonomy used across the library. The CLI maps these onto
// distinct exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

// log(exp(a) + exp(b)) with max subtraction.
inline double log_add_exp(double a, double b) {
    double m = std::max(a, b);
    if (!std::isfinite(m)) return m;  // both -inf, or an inf dominates
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_sum_exp(const std::vector<double>& xs) {
    if (xs.empty()) throw ContractError("log_sum_exp: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// 1 / (1 + exp(-x)), overflow-safe.
inline double logistic(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// Weighted mean / variance / sd / correlation. Weights must be
// non-negative with positive sum; variance uses the population form
// (denominator = sum of weights), matching worker-year weighting.
inline double weighted_mean(const std::vector<double>& x, const std::vector<double>& w) {
    require(x.size() == w.size(), "weighted_mean: size mismatch");
    double sw = 0.0, sx = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
    }
    require(sw > 0.0, "weighted_mean: weights sum to zero");
    return sx / sw;
}

inline double weighted_var(const std::vector<double>& x, const std::vector<double>& w) {
    double m = weighted_mean(x, w);
    double sw = 0.0, s2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - m;
        sw += w[i];
        s2 += w[i] * d * d;
    }
    return s2 / sw;
}

inline double weighted_sd(const std::vector<double>& x, const std::vector<double>& w) {
    return std::sqrt(weighted_var(x, w));
}

inline double weighted_corr(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& w) {
    require(x.size() == y.size() && x.size() == w.size(), "weighted_corr: size mismatch");
    double mx = weighted_mean(x, w), my = weighted_mean(y, w);
    double sw = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sw += w[i];
        sxx += w[i] * dx * dx;
        syy += w[i] * dy * dy;
        sxy += w[i] * dx * dy;
    }
    double denom = std::sqrt(sxx * syy);
    if (denom <= 0.0) throw NumericError("weighted_corr: degenerate variance");
    (void)sw;
    return sxy / denom;
}

// Spearman rank correlation (unweighted, average ranks on ties).
inline double spearman_corr(const std::vector<double>& x, const std::vector<double>& y);

namespace detail {
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    const size_t n = x.size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}
}  // namespace detail

inline double spearman_corr(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && !x.empty(), "spearman_corr: size mismatch");
    std::vector<double> rx = detail::average_ranks(x);
    std::vector<double> ry = detail::average_ranks(y);
    std::vector<double> w(x.size(), 1.0);
    return weighted_corr(rx, ry, w);
}

}  // namespace jobval
