#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/state.hpp"

namespace podc {

// High-probability band for the top m occupancy levels, the level-(m+1)
// remainder, and the tail beyond it. All log-probabilities are natural logs
// of the respective violation-probability bounds.
struct band_report {
    double n = 0.0;
    double gamma = 0.0;
    double d = 0.0;
    int m = 0;
    int b = 0;
    std::vector<double> leading;    // plateau center per level, 1..m
    std::vector<double> lower;      // may be negative; clamp at 0 when checking states
    std::vector<double> upper;      // may exceed n; clamp at n when checking states
    double s_mplus1_upper = 0.0;
    double tail_sum_upper = 1.0;
    double log_prob_lower = 0.0;
    double log_prob_upper = 0.0;
    double log_prob_mplus1 = 0.0;
    double log_prob_tail = 0.0;
    double correction_ratio_value = 0.0;
};

// Size of the fluctuation terms relative to the leading plateau gap,
// uniform over levels. Bands are only meaningful once this is < 1/2.
inline double correction_ratio(double n, double gamma, int m, double d) {
    const double ld = std::log(d);
    const double ln_n = std::log(n);
    double r = 2.0 * std::sqrt(static_cast<double>(m)) * std::pow(d, m) * ln_n / (std::sqrt(n) * ld) +
               8.0 * m * m * ld / d;
    if (m > 1) r += d * std::pow(n, -gamma) / (2.0 * m * ld);
    return r;
}

// Per-level slack absorbed above the plateau: the level-(m+1) mass bound and
// the building block of the upper-band construction.
inline double b_term(double n, double gamma, int m, double d, int i) {
    const double ld = std::log(d);
    const double ln_n = std::log(n);
    const double sqrt_mn = std::sqrt(m * n);
    double v = 18.0 * m * std::pow(d, i - 1) * sqrt_mn * ln_n +
               36.0 * m * m * m * n * ld * ld / std::pow(d, m - i + 2);
    if (m > 1) v += std::pow(n, 1.0 - gamma) / std::pow(d, m - i);
    return v;
}

struct b_term_row {
    int i = 0;
    double value = 0.0;
    double ratio_to_prev = 0.0;    // value_i / value_{i-1}, 0 for i = 1
};

inline std::vector<b_term_row> b_terms(double n, double gamma, int m, double d) {
    std::vector<b_term_row> rows;
    double prev = 0.0;
    for (int i = 1; i <= m; ++i) {
        const double v = b_term(n, gamma, m, d, i);
        rows.push_back({i, v, i == 1 ? 0.0 : v / prev});
        prev = v;
    }
    return rows;
}

inline double band_leading(double n, int m, double d, int i) {
    return n - 2.0 * m * n * std::log(d) / std::pow(d, m - i + 1);
}

inline double lower_band_level(double n, int m, double d, int i) {
    const double ld = std::log(d);
    const double ln_n = std::log(n);
    const double sqrt_mn = std::sqrt(m * n);
    return band_leading(n, m, d, i) - 4.0 * m * std::pow(d, i - 1) * sqrt_mn * ln_n -
           16.0 * m * m * m * n * ld * ld / std::pow(d, m - i + 2);
}

inline double upper_band_level(double n, double gamma, int m, double d, int i) {
    const double ld = std::log(d);
    const double ln_n = std::log(n);
    const double sqrt_mn = std::sqrt(m * n);
    double v = band_leading(n, m, d, i) + 19.0 * m * std::pow(d, i - 1) * sqrt_mn * ln_n +
               39.0 * m * m * m * n * ld * ld / std::pow(d, m - i + 2);
    if (m > 1) v += std::pow(n, 1.0 - gamma) / std::pow(d, m - i);
    return v;
}

inline std::vector<double> lower_band(double n, int m, double d) {
    std::vector<double> v;
    for (int i = 1; i <= m; ++i) v.push_back(lower_band_level(n, m, d, i));
    return v;
}

inline std::vector<double> upper_band(double n, double gamma, int m, double d) {
    std::vector<double> v;
    for (int i = 1; i <= m; ++i) v.push_back(upper_band_level(n, gamma, m, d, i));
    return v;
}

inline band_report make_band_report(double n, double gamma, int m, double d, int b) {
    if (m < 1) throw config_error("band report requires m >= 1");
    if (d <= 1.0) throw config_error("band report requires d > 1");
    band_report r;
    r.n = n;
    r.gamma = gamma;
    r.d = d;
    r.m = m;
    r.b = b;
    for (int i = 1; i <= m; ++i) r.leading.push_back(band_leading(n, m, d, i));
    r.lower = lower_band(n, m, d);
    r.upper = upper_band(n, gamma, m, d);
    r.s_mplus1_upper = b_term(n, gamma, m, d, m);
    r.tail_sum_upper = 1.0;
    const double ln_n2 = std::log(n) * std::log(n);
    r.log_prob_lower = -m * ln_n2 / 5.0;
    r.log_prob_upper = -m * ln_n2 / 9.0;
    r.log_prob_mplus1 = -m * ln_n2 / 8.0;
    r.log_prob_tail = -m * ln_n2 / 7.0;
    r.correction_ratio_value = correction_ratio(n, gamma, m, d);
    return r;
}

struct band_check {
    std::vector<char> in_level;    // per level 1..m
    bool s_mplus1_ok = true;
    bool tail_ok = true;
    bool all = true;
};

// Check a state against the band, clamping the analytic bounds into [0, n]
// (a lower bound below 0 or an upper bound above n is vacuous).
inline band_check band_containment(const state_vector& s, const band_report& r) {
    band_check c;
    const auto n_int = static_cast<std::int64_t>(r.n);
    for (int i = 1; i <= r.m; ++i) {
        const double lo = std::max(0.0, r.lower[static_cast<std::size_t>(i - 1)]);
        const double hi = std::min(r.n, r.upper[static_cast<std::size_t>(i - 1)]);
        const auto si = static_cast<double>(s.at(i, n_int));
        c.in_level.push_back(si >= lo && si <= hi ? 1 : 0);
        if (!c.in_level.back()) c.all = false;
    }
    c.s_mplus1_ok = static_cast<double>(s.at(r.m + 1, n_int)) <= r.s_mplus1_upper;
    double tail = 0.0;
    for (int l = r.m + 2; l <= r.b; ++l) tail += static_cast<double>(s.at(l, n_int));
    c.tail_ok = tail <= r.tail_sum_upper;
    if (!c.s_mplus1_ok || !c.tail_ok) c.all = false;
    return c;
}

// Smallest n on a grid where the correction ratio drops below 1/2 and the
// band is strictly separated (lower_i < upper_i for all i).
inline std::optional<double> band_separation_threshold(const std::vector<double>& n_grid,
                                                       double gamma, int m, double d) {
    for (double n : n_grid) {
        if (correction_ratio(n, gamma, m, d) >= 0.5) continue;
        bool sep = true;
        for (int i = 1; i <= m; ++i)
            if (!(lower_band_level(n, m, d, i) < upper_band_level(n, gamma, m, d, i))) sep = false;
        if (sep) return n;
    }
    return std::nullopt;
}

}  // namespace podc
