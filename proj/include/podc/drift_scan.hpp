#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/lyapunov.hpp"
#include "podc/rng.hpp"
#include "podc/state.hpp"

namespace podc {

enum class drift_target {
    template_target,    // drift <= -sqrt(mn) log n, the concentration rate
    zero,               // drift <= 0, for balance-type statements
};

inline const char* to_string(drift_target t) {
    return t == drift_target::template_target ? "template" : "zero";
}

inline drift_target drift_target_from_string(const std::string& s) {
    if (s == "template") return drift_target::template_target;
    if (s == "zero") return drift_target::zero;
    throw config_error("unknown drift target: " + s);
}

struct scan_options {
    std::uint64_t budget = 10000;    // accepted in-region states to evaluate
    std::uint64_t seed = 1;
    drift_target target = drift_target::template_target;
};

struct scan_counterexample {
    state_vector state;
    double drift_value = 0.0;
    double v_value = 0.0;
};

struct scan_report {
    bool empty_region = false;
    std::uint64_t corners_evaluated = 0;
    std::uint64_t sampled_evaluated = 0;
    std::uint64_t attempts = 0;
    double target_value = 0.0;
    double max_drift = 0.0;
    state_vector argmax_state;
    double argmax_v = 0.0;
    double fraction_satisfying = 0.0;
    std::vector<scan_counterexample> counterexamples;    // worst first, capped at 16
};

// Numerically explore a drift statement: over states in the canonical region
// with V >= 0, evaluate the exact drift and compare against the target. The
// state pool is the region's bounding box intersected with the occupancy
// cone, covered by its corners plus sequential random fills.
inline scan_report drift_scan(const lyap_spec& sp, const region_spec& region,
                              const system_config& cfg, const scan_options& opts = {}) {
    validate_spec(sp);
    const int b = cfg.b;
    const std::int64_t n = cfg.n;

    std::vector<std::int64_t> lo(static_cast<std::size_t>(b) + 1, 0);
    std::vector<std::int64_t> hi(static_cast<std::size_t>(b) + 1, n);
    for (const auto& c : region.coords) {
        if (c.level < 1 || c.level > b) {
            // A bound on a level outside the buffer: floors above s_b = 0 or
            // caps below are unsatisfiable, the rest are vacuous.
            if (c.is_floor && c.bound > 0.0) {
                scan_report empty;
                empty.empty_region = true;
                return empty;
            }
            continue;
        }
        auto& ref_lo = lo[static_cast<std::size_t>(c.level)];
        auto& ref_hi = hi[static_cast<std::size_t>(c.level)];
        if (c.is_floor)
            ref_lo = std::max(ref_lo, static_cast<std::int64_t>(std::ceil(c.bound - 1e-9)));
        else
            ref_hi = std::min(ref_hi, static_cast<std::int64_t>(std::floor(c.bound + 1e-9)));
    }
    bool infeasible = false;
    for (int l = 1; l <= b; ++l)
        if (lo[static_cast<std::size_t>(l)] > hi[static_cast<std::size_t>(l)]) infeasible = true;
    // The cone also forces every floor to be reachable from above.
    for (int l = 2; l <= b; ++l)
        if (lo[static_cast<std::size_t>(l)] > hi[static_cast<std::size_t>(l - 1)]) infeasible = true;
    if (infeasible) {
        scan_report empty;
        empty.empty_region = true;
        return empty;
    }

    scan_report rep;
    rep.target_value = opts.target == drift_target::template_target
                           ? -std::sqrt(static_cast<double>(sp.p.m) * sp.p.n) * std::log(sp.p.n)
                           : 0.0;
    rep.max_drift = -std::numeric_limits<double>::infinity();

    std::set<state_vector> seen;
    std::uint64_t satisfied = 0;
    std::uint64_t evaluated = 0;
    auto consider = [&](state_vector s) {
        // Monotonize into the cone, then re-check the box floors.
        for (int l = 2; l <= b; ++l)
            s.level(l) = std::min(s.level(l), s.level(l - 1));
        for (int l = 1; l <= b; ++l)
            if (s.level(l) < lo[static_cast<std::size_t>(l)] ||
                s.level(l) > hi[static_cast<std::size_t>(l)])
                return false;
        if (!seen.insert(s).second) return false;
        if (!region.member(s)) return false;
        const double v = evaluate(sp, s);
        if (v < 0.0) return false;
        const double dr = drift(sp, s, cfg);
        ++evaluated;
        if (dr <= rep.target_value) {
            ++satisfied;
        } else {
            scan_counterexample ce{s, dr, v};
            auto pos = std::upper_bound(rep.counterexamples.begin(), rep.counterexamples.end(), dr,
                                        [](double val, const scan_counterexample& c) {
                                            return val > c.drift_value;
                                        });
            rep.counterexamples.insert(pos, std::move(ce));
            if (rep.counterexamples.size() > 16) rep.counterexamples.pop_back();
        }
        if (dr > rep.max_drift) {
            rep.max_drift = dr;
            rep.argmax_state = s;
            rep.argmax_v = v;
        }
        return true;
    };

    // Corners of the box over levels where it is not pinned.
    std::vector<int> active;
    for (int l = 1; l <= b; ++l)
        if (lo[static_cast<std::size_t>(l)] < hi[static_cast<std::size_t>(l)]) active.push_back(l);
    philox_rng rng(opts.seed, 0x5ca11ull);
    const std::size_t max_corner_bits = 12;
    if (active.size() <= max_corner_bits) {
        const std::uint64_t combos = 1ull << active.size();
        for (std::uint64_t mask = 0; mask < combos; ++mask) {
            state_vector s(b);
            for (int l = 1; l <= b; ++l) s.level(l) = lo[static_cast<std::size_t>(l)];
            for (std::size_t j = 0; j < active.size(); ++j)
                if (mask & (1ull << j))
                    s.level(active[j]) = hi[static_cast<std::size_t>(active[j])];
            if (consider(std::move(s))) ++rep.corners_evaluated;
        }
    } else {
        for (std::uint64_t trial = 0; trial < 4096; ++trial) {
            state_vector s(b);
            for (int l = 1; l <= b; ++l)
                s.level(l) = rng.next_u32() & 1 ? hi[static_cast<std::size_t>(l)]
                                                : lo[static_cast<std::size_t>(l)];
            if (consider(std::move(s))) ++rep.corners_evaluated;
        }
    }

    // Sequential random fill of box-intersect-cone.
    const std::uint64_t max_attempts = opts.budget * 50;
    while (rep.sampled_evaluated + rep.corners_evaluated < opts.budget &&
           rep.attempts < max_attempts) {
        ++rep.attempts;
        state_vector s(b);
        std::int64_t prev = n;
        bool ok = true;
        for (int l = 1; l <= b && ok; ++l) {
            const std::int64_t h = std::min(hi[static_cast<std::size_t>(l)], prev);
            const std::int64_t lo_l = lo[static_cast<std::size_t>(l)];
            if (lo_l > h) {
                ok = false;
                break;
            }
            s.level(l) = lo_l + static_cast<std::int64_t>(
                                    rng.uniform_int(static_cast<std::uint64_t>(h - lo_l + 1)));
            prev = s.level(l);
        }
        if (!ok) continue;
        if (consider(std::move(s))) ++rep.sampled_evaluated;
    }

    if (evaluated == 0) {
        rep.empty_region = true;
        return rep;
    }
    rep.fraction_satisfying = static_cast<double>(satisfied) / static_cast<double>(evaluated);
    return rep;
}

}  // namespace podc
