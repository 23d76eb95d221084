#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "podc/config.hpp"
#include "podc/state.hpp"

namespace podc {

enum class event_kind { none, arrival_to_level, departure_from_level };

inline const char* to_string(event_kind k) {
    switch (k) {
        case event_kind::none: return "none";
        case event_kind::arrival_to_level: return "arrival";
        case event_kind::departure_from_level: return "departure";
    }
    return "?";
}

// One transition class of the occupancy chain: either an arrival that joins a
// queue of length i-1 (raising s_i), or a completion at a queue of length i
// (lowering s_i). Arrivals whose d samples all have length b are dropped and
// do not appear as transitions.
struct transition_class {
    event_kind kind = event_kind::none;
    int level = 0;
    double rate = 0.0;
};

// (x/n)^d with integer d; exact 1 at x == n and 0 at x == 0.
inline double ratio_pow(std::int64_t x, std::int64_t n, int d) {
    if (x <= 0) return 0.0;
    if (x >= n) return 1.0;
    return std::pow(static_cast<double>(x) / static_cast<double>(n), d);
}

inline double arrival_rate(const state_vector& s, int i, const system_config& cfg) {
    const int d = cfg.require_d_int();
    const double p_prev = ratio_pow(s.at(i - 1, cfg.n), cfg.n, d);
    const double p_here = ratio_pow(s.at(i, cfg.n), cfg.n, d);
    const double r = cfg.lambda * (p_prev - p_here);
    return r > 0.0 ? r : 0.0;
}

inline double departure_rate(const state_vector& s, int i, const system_config& cfg) {
    return cfg.mu * static_cast<double>(s.at(i, cfg.n) - s.at(i + 1, cfg.n));
}

// All 2b transition classes in fixed order: arrivals to levels 1..b, then
// departures from levels 1..b. Zero-rate classes are included so callers can
// index by class.
inline std::vector<transition_class> transition_classes(const state_vector& s,
                                                        const system_config& cfg) {
    const int b = s.b();
    std::vector<transition_class> out;
    out.reserve(2 * static_cast<std::size_t>(b));
    for (int i = 1; i <= b; ++i)
        out.push_back({event_kind::arrival_to_level, i, arrival_rate(s, i, cfg)});
    for (int i = 1; i <= b; ++i)
        out.push_back({event_kind::departure_from_level, i, departure_rate(s, i, cfg)});
    return out;
}

inline state_vector apply_event(state_vector s, event_kind kind, int level) {
    if (kind == event_kind::arrival_to_level)
        s.level(level) += 1;
    else if (kind == event_kind::departure_from_level)
        s.level(level) -= 1;
    return s;
}

// Off-diagonal generator row: positive-rate transitions out of s, one entry
// per distinct target state.
inline std::vector<std::pair<state_vector, double>> generator_row(const state_vector& s,
                                                                  const system_config& cfg) {
    std::vector<std::pair<state_vector, double>> row;
    for (const auto& tc : transition_classes(s, cfg)) {
        if (tc.rate <= 0.0) continue;
        row.emplace_back(apply_event(s, tc.kind, tc.level), tc.rate);
    }
    return row;
}

inline double total_exit_rate(const state_vector& s, const system_config& cfg) {
    double tot = 0.0;
    for (const auto& tc : transition_classes(s, cfg)) tot += tc.rate;
    return tot;
}

}  // namespace podc
