#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/generator.hpp"
#include "podc/state.hpp"
#include "podc/stationary.hpp"

namespace podc {

// Inputs of the iterated drift-to-tail argument: on {V >= B} intersected with
// the good event E the drift is <= -gamma_drift, off E it is <= delta; jumps
// change V by at most nu_max and the total rate of V-increasing transitions
// is at most q_max.
struct tail_bound_input {
    double B = 0.0;
    double gamma_drift = 0.0;
    double delta = 0.0;
    double nu_max = 0.0;
    double q_max = 0.0;
    double prob_not_E = 0.0;
    std::uint64_t j = 1;    // the bound controls P(V >= B + 2 nu_max j)
};

struct tail_bound {
    double alpha = 0.0;
    double beta = 0.0;
    double log_bound = 0.0;    // natural log of alpha^j + beta * prob_not_E
};

inline double logsumexp2(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline tail_bound ssc_tail_bound(const tail_bound_input& in) {
    if (!(in.gamma_drift > 0.0)) throw config_error("tail bound needs gamma_drift > 0");
    if (!(in.nu_max > 0.0)) throw config_error("tail bound needs nu_max > 0");
    if (in.q_max < 0.0 || in.delta < 0.0 || in.B < 0.0)
        throw config_error("tail bound needs q_max, delta, B >= 0");
    if (in.prob_not_E < 0.0 || in.prob_not_E > 1.0)
        throw config_error("prob_not_E must be a probability");
    if (in.j < 1) throw config_error("tail bound needs j >= 1");

    tail_bound out;
    const double qv = in.q_max * in.nu_max;
    out.alpha = qv / (qv + in.gamma_drift);
    out.beta = in.delta / in.gamma_drift + 1.0;
    const double log_geo = out.alpha > 0.0 ? static_cast<double>(in.j) * std::log(out.alpha)
                                           : -std::numeric_limits<double>::infinity();
    const double log_esc = in.prob_not_E > 0.0
                               ? std::log(out.beta) + std::log(in.prob_not_E)
                               : -std::numeric_limits<double>::infinity();
    out.log_bound = logsumexp2(log_geo, log_esc);
    return out;
}

// The parameterization used throughout the concentration arguments: unit
// jumps, total rate at most n both ways, drift -sqrt(mn) log n inside the
// region, and depth j = sqrt(mn) log n / 2 so the bound is n^{-m log n / 4}
// before the escape term.
inline tail_bound_input template_tail_input(double n, int m, double prob_not_E = 0.0) {
    tail_bound_input in;
    in.B = 0.0;
    in.gamma_drift = std::sqrt(m * n) * std::log(n);
    in.delta = n;
    in.nu_max = 1.0;
    in.q_max = n;
    in.prob_not_E = prob_not_E;
    in.j = static_cast<std::uint64_t>(std::ceil(std::sqrt(m * n) * std::log(n) / 2.0));
    if (in.j < 1) in.j = 1;
    return in;
}

struct readoff_result {
    double B = 0.0;
    double gamma_drift = 0.0;
    double nu_max = 0.0;
    double q_max = 0.0;
};

// Read the tail-bound constants directly off a finite chain: nu_max and
// q_max from the transition structure, and the smallest level B (on the grid
// of attained V values) above which the exact drift is uniformly negative.
inline readoff_result read_off_tail_params(const std::function<double(const state_vector&)>& V,
                                           const system_config& cfg,
                                           std::size_t max_states = 200000) {
    const auto states = enumerate_states(cfg.n, cfg.b, max_states);
    readoff_result out;
    std::vector<std::pair<double, double>> vd;    // (V, drift)
    vd.reserve(states.size());
    for (const auto& s : states) {
        const double here = V(s);
        double dr = 0.0;
        double q_up = 0.0;
        for (const auto& [target, rate] : generator_row(s, cfg)) {
            const double dv = V(target) - here;
            dr += rate * dv;
            out.nu_max = std::max(out.nu_max, std::abs(dv));
            if (dv > 0.0) q_up += rate;
        }
        out.q_max = std::max(out.q_max, q_up);
        vd.emplace_back(here, dr);
    }
    std::sort(vd.begin(), vd.end());
    // Suffix maxima of drift over {V >= candidate B}, scanning from the top.
    double suffix = -std::numeric_limits<double>::infinity();
    double best_B = std::numeric_limits<double>::quiet_NaN();
    double best_gamma = 0.0;
    for (std::size_t idx = vd.size(); idx-- > 0;) {
        suffix = std::max(suffix, vd[idx].second);
        if (suffix < 0.0) {
            best_B = vd[idx].first;
            best_gamma = -suffix;
        }
    }
    if (!(best_gamma > 0.0))
        throw numeric_error("no level set of V has uniformly negative drift");
    out.B = best_B;
    out.gamma_drift = best_gamma;
    return out;
}

}  // namespace podc
