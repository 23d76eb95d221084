#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "podc/config.hpp"
#include "podc/errors.hpp"

namespace podc {

enum class regime_class { zero_delay, finite_delay, infinite_delay_polylog, infinite_delay_open };

inline std::string to_string(regime_class rc) {
    switch (rc) {
        case regime_class::zero_delay: return "zero_delay";
        case regime_class::finite_delay: return "finite_delay";
        case regime_class::infinite_delay_polylog: return "infinite_delay_polylog";
        default: return "infinite_delay_open";
    }
}

// Solution of the coupling d^m = 2 m n^gamma log d for a target plateau m.
struct regime_solution {
    int m = 1;
    double d_real = 0.0;
    int d_int = 0;
    double bracket_lo = 0.0;    // (2 m n^gamma)^{1/m}
    double bracket_hi = 0.0;    // bracket_lo * (log n)^{1/m}
    bool bracket_valid = true;  // the root lies inside [bracket_lo, bracket_hi]
    double residual = 0.0;      // |d^m - 2 m n^gamma log d| / d^m
    regime_class klass = regime_class::finite_delay;
};

struct m_inference {
    double m_real = 0.0;
    int m_int = 1;
    double m_leading = 0.0;  // gamma log n / log d, the leading-order value
};

namespace detail {

// g(d) = d^m - c log d with c = 2 m n^gamma; increasing for d >= (c/m)^{1/m}.
inline double implicit_gap(double d, int m, double c) {
    return std::pow(d, m) - c * std::log(d);
}

inline double bisect_implicit(double lo, double hi, int m, double c) {
    double flo = implicit_gap(lo, m, c);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = implicit_gap(mid, m, c);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Solve d^m = 2 m n^gamma log d for the root matching d ~ n^{gamma/m}.
//
// The documented bracket [(2m n^gamma)^{1/m}, (2m n^gamma)^{1/m} (log n)^{1/m}]
// contains that root iff bracket_lo >= e (equivalently 2 m n^gamma >= e^m);
// below that the root still exists as long as 2 n^gamma > e but sits under
// bracket_lo, and the solution is returned with bracket_valid = false.
inline regime_solution solve_implicit_d(std::int64_t n, double gamma, int m,
                                        d_rounding mode = d_rounding::nearest) {
    if (n < 2) throw config_error("solve_implicit_d requires n >= 2");
    if (m < 1) throw config_error("solve_implicit_d requires m >= 1");
    if (gamma <= 0.0 || gamma >= 0.5) throw config_error("gamma must lie in (0, 0.5)");

    const double dn = static_cast<double>(n);
    const double c = 2.0 * m * std::pow(dn, gamma);
    regime_solution sol;
    sol.m = m;
    sol.bracket_lo = std::pow(c, 1.0 / m);
    sol.bracket_hi = sol.bracket_lo * std::pow(std::log(dn), 1.0 / m);
    sol.bracket_valid = sol.bracket_lo >= std::exp(1.0);

    // Search interval with a guaranteed sign change of g.
    double lo, hi;
    if (sol.bracket_valid) {
        lo = sol.bracket_lo;  // g(lo) <= 0 here
        hi = sol.bracket_hi;
        for (int it = 0; detail::implicit_gap(hi, m, c) < 0.0; ++it) {
            hi *= 2.0;  // extreme parameters: extend past the documented bracket
            if (it > 60) throw numeric_error("implicit-d search interval blew up");
        }
    } else {
        // The minimum of g sits at d_min = (2 n^gamma)^{1/m}; a root above it
        // exists iff g(d_min) < 0, i.e. 2 n^gamma > e.
        const double d_min = std::pow(2.0 * std::pow(dn, gamma), 1.0 / m);
        if (detail::implicit_gap(d_min, m, c) >= 0.0)
            throw numeric_error("implicit-d equation has no root: n too small for "
                                "this (gamma, m)");
        lo = d_min;
        hi = sol.bracket_lo;
    }

    // Damped fixed-point iteration d <- (c log d)^{1/m}; contraction rate is
    // 1/(m log d) near the root, so this converges fast in the valid regime.
    double d = 0.5 * (lo + hi);
    bool converged = false;
    for (int it = 0; it < 128; ++it) {
        const double next = std::pow(c * std::log(d), 1.0 / m);
        if (!std::isfinite(next) || next < lo || next > hi) break;
        const double step = next - d;
        d = next;
        if (std::abs(step) <= 1e-14 * d) {
            converged = true;
            break;
        }
    }
    if (!converged) d = detail::bisect_implicit(lo, hi, m, c);

    // Newton polish on g; g'(d) = m d^{m-1} - c/d.
    for (int it = 0; it < 8; ++it) {
        const double g = detail::implicit_gap(d, m, c);
        const double gp = m * std::pow(d, m - 1) - c / d;
        if (gp == 0.0) break;
        const double step = g / gp;
        d -= step;
        if (std::abs(step) <= 1e-15 * d) break;
    }

    sol.d_real = d;
    sol.residual = std::abs(std::pow(d, m) - c * std::log(d)) / std::pow(d, m);
    if (!(sol.residual <= 1e-12))
        throw numeric_error("implicit-d solver did not converge: residual " +
                            std::to_string(sol.residual));
    sol.d_int = round_d(d, mode);
    return sol;
}

// Invert the coupling: given d, recover the plateau level m solving
// m = gamma log n / log d + log(2 m log d) / log d.
inline m_inference infer_m(std::int64_t n, double gamma, double d) {
    if (d <= 1.0) throw config_error("infer_m requires d > 1");
    const double ld = std::log(d);
    const double lead = gamma * std::log(static_cast<double>(n)) / ld;
    m_inference out;
    out.m_leading = lead;

    auto step = [&](double m) { return lead + std::log(2.0 * m * ld) / ld; };
    double m = std::max(lead, 1.0);
    bool converged = false;
    for (int it = 0; it < 256; ++it) {
        const double next = step(m);
        if (!std::isfinite(next) || next <= 0.0) break;
        const double delta = std::abs(next - m);
        m = next;
        if (delta <= 1e-12 * std::max(1.0, m)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        // Fall back to bisection on phi(m) = m - step(m), increasing in m.
        double lo = 1e-6, hi = 256.0;
        if (!(step(lo) > lo) || !(step(hi) < hi))
            throw numeric_error("infer_m fixed point out of range");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (step(mid) > mid) lo = mid; else hi = mid;
        }
        m = 0.5 * (lo + hi);
    }
    if (std::abs(m - step(m)) > 1e-10 * std::max(1.0, m))
        throw numeric_error("infer_m did not converge");
    out.m_real = m;
    out.m_int = static_cast<int>(std::max<std::int64_t>(1, std::llround(m)));
    return out;
}

// Delay class of a (n, gamma, d) operating point:
//   zero_delay              d >= n^gamma log n
//   finite_delay            implied integer m >= 2 and d at least the
//                           canonical polynomial value (2 m n^gamma)^{1/m}
//   infinite_delay_polylog  otherwise, if d >= log(n)^3
//   infinite_delay_open     d below log(n)^3 (outside the analyzed range)
inline regime_class classify_regime(std::int64_t n, double gamma, double d) {
    const double dn = static_cast<double>(n);
    const double ln = std::log(dn);
    if (d >= std::pow(dn, gamma) * ln) return regime_class::zero_delay;
    if (d > 1.0) {
        const m_inference mi = infer_m(n, gamma, d);
        if (mi.m_int >= 2) {
            const double poly_threshold = std::pow(2.0 * mi.m_int * std::pow(dn, gamma),
                                                   1.0 / mi.m_int);
            if (d >= poly_threshold) return regime_class::finite_delay;
        }
    }
    if (d >= ln * ln * ln) return regime_class::infinite_delay_polylog;
    return regime_class::infinite_delay_open;
}

}  // namespace podc
