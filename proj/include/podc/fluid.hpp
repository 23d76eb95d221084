#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"

namespace podc {

struct fluid_sample {
    double t = 0.0;
    std::vector<double> x;    // x[i-1] is the mass at level i, in [0, n]
};

// d/dt x_i = lambda * ((x_{i-1}/n)^d - (x_i/n)^d) - (x_i - x_{i+1}),
// with x_0 = n and x_{b+1} = 0. The exponent may be non-integral.
inline std::vector<double> fluid_rhs(const std::vector<double>& x, const system_config& cfg) {
    const double n = cfg.dn();
    const double d = cfg.effective_d_real();
    const int b = static_cast<int>(x.size());
    std::vector<double> dx(x.size());
    auto p = [&](int i) -> double {
        if (i <= 0) return 1.0;
        if (i > b) return 0.0;
        const double r = x[static_cast<std::size_t>(i - 1)] / n;
        return r <= 0.0 ? 0.0 : std::pow(r, d);
    };
    auto xv = [&](int i) -> double {
        if (i <= 0) return n;
        if (i > b) return 0.0;
        return x[static_cast<std::size_t>(i - 1)];
    };
    for (int i = 1; i <= b; ++i)
        dx[static_cast<std::size_t>(i - 1)] = cfg.lambda * (p(i - 1) - p(i)) - (xv(i) - xv(i + 1));
    return dx;
}

struct ode_options {
    double t_end = 10.0;
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-3;
    double h_max = 0.0;    // 0 = no cap
    std::size_t max_steps = 2000000;
};

// Dormand-Prince 5(4) with FSAL and a PI-free step controller. Every accepted
// state is checked against the cone n >= x_1 >= ... >= x_b >= 0 (tiny
// excursions are clamped, real ones abort).
inline std::vector<fluid_sample> integrate(const system_config& cfg, std::vector<double> x0,
                                           const ode_options& opt = {}) {
    const double n = cfg.dn();
    const int b = cfg.b;
    if (static_cast<int>(x0.size()) != b) throw config_error("ode initial state has wrong length");

    static constexpr std::array<double, 6> c = {1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr std::array<std::array<double, 6>, 6> a = {{
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    }};
    static constexpr std::array<double, 7> b5 = {35.0 / 384,      0, 500.0 / 1113, 125.0 / 192,
                                                 -2187.0 / 6784, 11.0 / 84, 0};
    static constexpr std::array<double, 7> b4 = {5179.0 / 57600,    0,           7571.0 / 16695,
                                                 393.0 / 640,       -92097.0 / 339200,
                                                 187.0 / 2100,      1.0 / 40};

    auto check_cone = [&](std::vector<double>& x) {
        const double slack = 1e-7 * std::max(1.0, n);
        double prev = n;
        for (int i = 0; i < b; ++i) {
            double& v = x[static_cast<std::size_t>(i)];
            if (v < -slack || v > prev + slack)
                throw numeric_error("ode state left the occupancy cone at level " + std::to_string(i + 1));
            v = std::clamp(v, 0.0, prev);
            prev = v;
        }
    };

    std::vector<fluid_sample> traj;
    double t = 0.0;
    std::vector<double> x = x0;
    check_cone(x);
    traj.push_back({t, x});

    std::array<std::vector<double>, 7> k;
    k[0] = fluid_rhs(x, cfg);
    double h = std::min(opt.h_init, opt.t_end);
    if (opt.h_max > 0) h = std::min(h, opt.h_max);

    std::size_t steps = 0;
    while (t < opt.t_end) {
        if (++steps > opt.max_steps) throw numeric_error("ode exceeded max step count");
        h = std::min(h, opt.t_end - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw numeric_error("ode step size underflow at t=" + std::to_string(t));

        for (int stage = 1; stage < 7; ++stage) {
            std::vector<double> xs = x;
            for (int j = 0; j < stage; ++j) {
                const double aij = a[static_cast<std::size_t>(stage - 1)][static_cast<std::size_t>(j)];
                if (aij == 0.0) continue;
                for (int i = 0; i < b; ++i)
                    xs[static_cast<std::size_t>(i)] += h * aij * k[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            }
            (void)c;
            k[static_cast<std::size_t>(stage)] = fluid_rhs(xs, cfg);
        }

        std::vector<double> x5 = x;
        double err = 0.0;
        for (int i = 0; i < b; ++i) {
            double d5 = 0.0, d4 = 0.0;
            for (int j = 0; j < 7; ++j) {
                d5 += b5[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                d4 += b4[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            }
            x5[static_cast<std::size_t>(i)] += h * d5;
            const double scale = opt.atol + opt.rtol * std::max(std::abs(x[static_cast<std::size_t>(i)]),
                                                                std::abs(x5[static_cast<std::size_t>(i)]));
            const double e = h * (d5 - d4) / scale;
            err += e * e;
        }
        err = std::sqrt(err / std::max(1, b));

        if (err <= 1.0) {
            t += h;
            x = x5;
            check_cone(x);
            traj.push_back({t, x});
            k[0] = fluid_rhs(x, cfg);    // FSAL would reuse k7; recompute after clamping
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (opt.h_max > 0) h = std::min(h, opt.h_max);
    }
    return traj;
}

struct fixed_point {
    std::vector<double> x;
    std::string kind;
    bool clamped = false;      // some closed-form entries underflowed to 0
    double residual = 0.0;     // finite-b only: max balance violation
};

// Infinite-buffer closed form x_i/n = (lambda/n)^((d^i - 1)/(d - 1)),
// evaluated in log space. Exponents below exp(-690) are clamped to zero.
inline fixed_point fixed_point_closed_form(const system_config& cfg) {
    const double n = cfg.dn();
    const double d = cfg.effective_d_real();
    const double log_rho = std::log(cfg.lambda / n);
    fixed_point fp;
    fp.kind = "closed_form";
    fp.x.resize(static_cast<std::size_t>(cfg.b));
    double e_i = 1.0;    // (d^i - 1)/(d - 1) via e_{i+1} = e_i * d + 1
    for (int i = 1; i <= cfg.b; ++i) {
        const double log_xi = std::log(n) + e_i * log_rho;
        if (log_xi < -690.0) {
            fp.x[static_cast<std::size_t>(i - 1)] = 0.0;
            fp.clamped = true;
        } else {
            fp.x[static_cast<std::size_t>(i - 1)] = std::exp(log_xi);
        }
        e_i = e_i * d + 1.0;
    }
    return fp;
}

// Finite-b fixed point from the telescoped balance
// x_i = lambda * ((x_{i-1}/n)^d - (x_b/n)^d), solved by damped forward
// sweeps. Throughput balance lambda * (1 - (x_b/n)^d) = x_1 holds at the
// solution by the i = 1 equation.
inline fixed_point fixed_point_finite_b(const system_config& cfg, double tol = 1e-13,
                                        std::size_t max_iters = 100000) {
    const double n = cfg.dn();
    const double d = cfg.effective_d_real();
    const int b = cfg.b;
    auto pw = [&](double v) { return v <= 0.0 ? 0.0 : std::pow(v / n, d); };

    std::vector<double> x(static_cast<std::size_t>(b), 0.0);
    double change = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        change = 0.0;
        const double pb = pw(x[static_cast<std::size_t>(b - 1)]);
        double prev = n;
        for (int i = 1; i <= b; ++i) {
            double target = cfg.lambda * (pw(prev) - pb);
            target = std::clamp(target, 0.0, prev);
            double& xi = x[static_cast<std::size_t>(i - 1)];
            const double next = 0.5 * xi + 0.5 * target;
            change = std::max(change, std::abs(next - xi));
            xi = next;
            prev = xi;
        }
        if (change < tol * std::max(1.0, n) && it > 4) break;
    }

    fixed_point fp;
    fp.kind = "finite_b";
    fp.x = x;
    auto xv = [&](int i) -> double {
        if (i <= 0) return n;
        if (i > b) return 0.0;
        return x[static_cast<std::size_t>(i - 1)];
    };
    for (int i = 1; i <= b; ++i) {
        const double r = cfg.lambda * (pw(xv(i - 1)) - pw(xv(i))) - (xv(i) - xv(i + 1));
        fp.residual = std::max(fp.residual, std::abs(r));
    }
    const double scale = std::max(1.0, cfg.lambda);
    if (fp.residual > 1e-9 * scale)
        throw numeric_error("finite-b fixed point did not converge: residual " +
                            std::to_string(fp.residual));
    return fp;
}

// Plateau approximation of the fixed point in the heavy-load window:
// x_i ~ n - 2 m n log(d) / d^(m-i+1) for i <= m, and 0 beyond level m.
// Successive gaps n - x_i grow by a factor d per level.
inline fixed_point asymptotic_plateau(const system_config& cfg, int m) {
    const double n = cfg.dn();
    const double d = cfg.effective_d_real();
    if (m < 1) throw config_error("plateau requires m >= 1");
    fixed_point fp;
    fp.kind = "plateau";
    fp.x.resize(static_cast<std::size_t>(cfg.b), 0.0);
    for (int i = 1; i <= std::min(m, cfg.b); ++i) {
        const double gap = 2.0 * m * n * std::log(d) / std::pow(d, m - i + 1);
        fp.x[static_cast<std::size_t>(i - 1)] = n - gap;
    }
    return fp;
}

}  // namespace podc
