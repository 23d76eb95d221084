#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/rng.hpp"
#include "podc/state.hpp"

namespace podc {

// Per-queue view of the same system: n individual queue lengths in [0, b].
// Used to cross-validate the aggregate occupancy chain.
struct per_queue_state {
    std::vector<int> lengths;

    explicit per_queue_state(std::int64_t n) : lengths(static_cast<std::size_t>(n), 0) {}

    state_vector occupancy(int b) const {
        state_vector s(b);
        for (int len : lengths)
            for (int i = 1; i <= std::min(len, b); ++i) s.level(i) += 1;
        return s;
    }

    std::int64_t busy() const {
        return static_cast<std::int64_t>(
            std::count_if(lengths.begin(), lengths.end(), [](int l) { return l > 0; }));
    }
};

struct per_queue_event {
    event_kind kind = event_kind::none;
    int queue = -1;    // index of the affected queue, -1 if the arrival was dropped
    bool dropped = false;
};

// Arrival: sample d queues uniformly with replacement, join the shortest
// (first sampled wins ties); if every sample has length b the job is dropped.
inline per_queue_event arrive_per_queue(per_queue_state& st, const system_config& cfg,
                                        philox_rng& rng) {
    const int d = cfg.require_d_int();
    int best_queue = -1;
    int best_len = 0;
    for (int k = 0; k < d; ++k) {
        const auto q = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(cfg.n)));
        const int len = st.lengths[q];
        if (best_queue < 0 || len < best_len) {
            best_queue = static_cast<int>(q);
            best_len = len;
        }
    }
    if (best_len >= cfg.b) return {event_kind::arrival_to_level, -1, true};
    st.lengths[static_cast<std::size_t>(best_queue)] += 1;
    return {event_kind::arrival_to_level, best_queue, false};
}

// Completion: each busy queue works at rate mu, so the completing queue is
// uniform among busy ones.
inline per_queue_event depart_per_queue(per_queue_state& st, philox_rng& rng) {
    const std::int64_t busy = st.busy();
    if (busy == 0) throw numeric_error("departure drawn with no busy queue");
    std::int64_t pick = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(busy)));
    for (std::size_t q = 0; q < st.lengths.size(); ++q) {
        if (st.lengths[q] == 0) continue;
        if (pick-- == 0) {
            st.lengths[q] -= 1;
            return {event_kind::departure_from_level, static_cast<int>(q), false};
        }
    }
    throw numeric_error("busy-queue scan failed");
}

// One Gillespie step of the per-queue chain. Arrivals are generated at the
// full rate lambda and thinned by dropping, which matches the aggregate chain
// in law. Returns the elapsed time; out_event reports what happened.
inline double step_per_queue(per_queue_state& st, const system_config& cfg, philox_rng& rng,
                             per_queue_event& out_event) {
    const double total = cfg.lambda + cfg.mu * static_cast<double>(st.busy());
    if (total <= 0.0) throw numeric_error("per-queue chain is absorbed (no active rate)");
    const double dt = rng.exponential(total);
    if (rng.uniform01() * total <= cfg.lambda)
        out_event = arrive_per_queue(st, cfg, rng);
    else
        out_event = depart_per_queue(st, rng);
    return dt;
}

}  // namespace podc
