#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "podc/errors.hpp"

namespace podc {

// Grid checks of the three scalar inequalities the asymptotic constants rest
// on, evaluated in log space so huge exponents stay finite.

struct taylor_a1_row {
    double d = 0.0;
    double r = 0.0;
    double f = 0.0;
    bool base_nonpos = false;    // 1 - r log(d)/d + f <= 0 makes the claim vacuous
    double lhs_log = 0.0;
    double rhs_log = 0.0;
    bool holds = false;
};

// (1 - r log(d)/d + f)^d <= 2 / d^r, an eventually-in-d statement.
inline taylor_a1_row taylor_a1(double d, double r, double f) {
    if (d <= 1.0) throw config_error("a1 grid needs d > 1");
    taylor_a1_row row;
    row.d = d;
    row.r = r;
    row.f = f;
    row.rhs_log = std::log(2.0) - r * std::log(d);
    const double base = 1.0 - r * std::log(d) / d + f;
    if (base <= 0.0) {
        row.base_nonpos = true;
        row.lhs_log = -std::numeric_limits<double>::infinity();
        row.holds = true;
        return row;
    }
    row.lhs_log = d * std::log(base);
    row.holds = row.lhs_log <= row.rhs_log;
    return row;
}

struct taylor_a2_row {
    double d = 0.0;
    double f = 0.0;
    double value = 0.0;          // (1 - f)^d
    double lower_bound = 0.0;    // 1 - d f
    double upper_bound = 0.0;    // 1 - d f + d^2 f^2 / 2
    bool lower_holds = false;
    bool upper_holds = false;
};

// 1 - d f <= (1 - f)^d <= 1 - d f + d^2 f^2 / 2 for f in [0, 1].
inline taylor_a2_row taylor_a2(double d, double f) {
    if (d < 1.0) throw config_error("a2 grid needs d >= 1");
    if (f < 0.0 || f > 1.0) throw config_error("a2 grid needs f in [0, 1]");
    taylor_a2_row row;
    row.d = d;
    row.f = f;
    row.value = std::pow(1.0 - f, d);
    row.lower_bound = 1.0 - d * f;
    row.upper_bound = 1.0 - d * f + d * d * f * f / 2.0;
    const double guard = 1e-12 * std::max({1.0, std::abs(row.lower_bound), std::abs(row.upper_bound)});
    row.lower_holds = row.value >= row.lower_bound - guard;
    row.upper_holds = row.value <= row.upper_bound + guard;
    return row;
}

struct taylor_a3_row {
    double n = 0.0;
    int m = 0;
    double lhs_log = 0.0;
    double rhs_log = 0.0;
    bool holds = false;
};

// (n / (n + sqrt(mn) log n))^(sqrt(mn) log n / 2) <= n^(-m log n / 4).
inline taylor_a3_row taylor_a3(double n, int m) {
    if (n <= 1.0 || m < 1) throw config_error("a3 grid needs n > 1, m >= 1");
    taylor_a3_row row;
    row.n = n;
    row.m = m;
    const double g = std::sqrt(m * n) * std::log(n);
    row.lhs_log = (g / 2.0) * std::log(n / (n + g));
    row.rhs_log = -(m * std::log(n) / 4.0) * std::log(n);
    row.holds = row.lhs_log <= row.rhs_log;
    return row;
}

// Smallest grid index from which the predicate holds for every later row;
// callers order rows by the asymptotic parameter.
template <typename Row, typename Pred>
std::optional<std::size_t> holds_from_index(const std::vector<Row>& rows, Pred&& holds) {
    std::optional<std::size_t> from;
    for (std::size_t i = rows.size(); i-- > 0;) {
        if (!holds(rows[i])) break;
        from = i;
    }
    return from;
}

// Default grids, shared by the CLI and the persisted-threshold fixtures.
// A1 is scanned in d for each (r, f = r/d^2); the threshold is the smallest
// grid d from which it holds onward.
inline const std::vector<double>& taylor_a1_r_values() {
    static const std::vector<double> r = {1.0, 2.0, 3.0};
    return r;
}

inline const std::vector<double>& taylor_a1_d_grid() {
    static const std::vector<double> d = {2,  3,  4,  5,  6,  8,  10,  12,  16,  20,
                                          24, 32, 48, 64, 96, 128, 192, 256, 384, 512};
    return d;
}

inline std::vector<taylor_a1_row> taylor_a1_scan(double r) {
    std::vector<taylor_a1_row> rows;
    for (double d : taylor_a1_d_grid()) rows.push_back(taylor_a1(d, r, r / (d * d)));
    return rows;
}

inline const std::vector<double>& taylor_a2_d_grid() {
    static const std::vector<double> d = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
    return d;
}

inline const std::vector<double>& taylor_a2_f_grid() {
    static const std::vector<double> f = {0.0,  1e-6, 1e-4, 1e-3, 0.01, 0.05,
                                          0.1,  0.2,  0.3,  0.5,  0.7,  0.9, 1.0};
    return f;
}

inline const std::vector<int>& taylor_a3_m_values() {
    static const std::vector<int> m = {1, 2, 3, 5};
    return m;
}

inline const std::vector<double>& taylor_a3_n_grid() {
    static const std::vector<double> n = {3, 10, 30, 100, 1e3, 1e4, 1e5, 1e6};
    return n;
}

inline std::vector<taylor_a3_row> taylor_a3_scan(int m) {
    std::vector<taylor_a3_row> rows;
    for (double n : taylor_a3_n_grid()) rows.push_back(taylor_a3(n, m));
    return rows;
}

}  // namespace podc
