#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/generator.hpp"
#include "podc/per_queue.hpp"
#include "podc/rng.hpp"
#include "podc/state.hpp"
#include "podc/stats.hpp"

namespace podc {

struct sim_horizon {
    enum class by { events, time };
    by kind = by::events;
    std::uint64_t n_events = 1000000;
    double t_end = 0.0;
};

struct snapshot_policy {
    std::uint64_t every_events = 0;    // 0 = off
    double dt = 0.0;                   // 0 = off; time-grid snapshots
};

struct sim_options {
    sim_horizon horizon;
    double warmup_fraction = 0.2;
    int n_batches = 32;
    snapshot_policy snapshots;
    std::uint64_t replication_id = 0;
    std::vector<indicator_def> indicators;
    const band_report* bands = nullptr;
    state_vector initial;    // empty -> start from the all-empty state
};

struct sim_result {
    steady_state_estimate est;
    state_vector final_state;
    double t_final = 0.0;
    std::uint64_t events = 0;
};

using snapshot_fn = std::function<void(const trajectory_sample&)>;

// Gillespie simulation of the occupancy chain. Rates are maintained
// incrementally (an event at level i only touches the two adjacent arrival
// rates and two departure rates); the running total is refreshed from scratch
// every 4096 events to stop floating-point drift.
inline sim_result simulate(const system_config& cfg, const sim_options& opts,
                           const snapshot_fn& on_snapshot = {}) {
    const int b = cfg.b;
    const int d = cfg.require_d_int();
    const bool by_events = opts.horizon.kind == sim_horizon::by::events;
    if (!by_events && opts.horizon.t_end <= 0.0) throw config_error("time horizon must be positive");
    if (by_events && opts.horizon.n_events == 0) throw config_error("event horizon must be positive");
    if (opts.warmup_fraction < 0.0 || opts.warmup_fraction >= 1.0)
        throw config_error("warmup fraction must be in [0, 1)");

    state_vector s = opts.initial.b() == 0 ? state_vector(b) : opts.initial;
    if (s.b() != b) throw config_error("initial state has wrong number of levels");
    s.require_valid(cfg.n);

    // powc[i] = (s_i/n)^d with sentinels powc[0] = 1, powc[b+1] = 0.
    std::vector<double> powc(static_cast<std::size_t>(b) + 2, 0.0);
    std::vector<double> arr(static_cast<std::size_t>(b) + 1, 0.0);
    std::vector<double> dep(static_cast<std::size_t>(b) + 1, 0.0);
    powc[0] = 1.0;
    auto refresh_level = [&](int i) {
        powc[static_cast<std::size_t>(i)] = ratio_pow(s.level(i), cfg.n, d);
    };
    auto refresh_rates_at = [&](int i) {
        if (i >= 1 && i <= b) {
            arr[static_cast<std::size_t>(i)] =
                std::max(0.0, cfg.lambda * (powc[static_cast<std::size_t>(i - 1)] - powc[static_cast<std::size_t>(i)]));
            dep[static_cast<std::size_t>(i)] =
                cfg.mu * static_cast<double>(s.level(i) - s.at(i + 1, cfg.n));
        }
    };
    auto full_recompute = [&]() {
        for (int i = 1; i <= b; ++i) refresh_level(i);
        double tot = 0.0;
        for (int i = 1; i <= b; ++i) {
            refresh_rates_at(i);
            tot += arr[static_cast<std::size_t>(i)] + dep[static_cast<std::size_t>(i)];
        }
        return tot;
    };
    double total = full_recompute();

    philox_rng rng(cfg.seed, opts.replication_id);
    streaming_estimator est(cfg, opts.n_batches, opts.indicators, opts.bands);

    // Event-horizon bookkeeping: equal event-count batches after warmup.
    const std::uint64_t n_events = opts.horizon.n_events;
    const std::uint64_t warmup_events =
        by_events ? static_cast<std::uint64_t>(static_cast<double>(n_events) * opts.warmup_fraction) : 0;
    std::uint64_t per_batch = 0;
    if (by_events) {
        const std::uint64_t measured = n_events - warmup_events;
        if (measured < static_cast<std::uint64_t>(opts.n_batches))
            throw config_error("insufficient data: fewer post-warmup events than batches");
        per_batch = measured / static_cast<std::uint64_t>(opts.n_batches);
    }

    // Time-horizon bookkeeping: equal time batches after warmup.
    const double t_end = opts.horizon.t_end;
    const double t_warm = by_events ? 0.0 : t_end * opts.warmup_fraction;
    const double batch_dt = by_events ? 0.0 : (t_end - t_warm) / opts.n_batches;

    double t = 0.0;
    std::uint64_t ev = 0;
    std::uint64_t in_batch = 0;
    int batches_done = 0;
    double warmup_time = 0.0;
    double next_batch_end = t_warm + batch_dt;

    // Credit a holding interval [from, to) at state s, splitting at the
    // warmup point and the time-batch boundaries when running to a deadline.
    auto credit_time_mode = [&](double from, double to) {
        if (to <= t_warm) return;
        double lo = std::max(from, t_warm);
        while (batches_done < opts.n_batches - 1 && to > next_batch_end) {
            if (next_batch_end > lo) est.add(s, next_batch_end - lo);
            est.end_batch();
            ++batches_done;
            lo = std::max(lo, next_batch_end);
            next_batch_end += batch_dt;
        }
        if (to > lo) est.add(s, to - lo);
    };

    std::uint64_t next_snap_ev =
        opts.snapshots.every_events > 0 ? opts.snapshots.every_events : UINT64_MAX;
    double next_snap_t = opts.snapshots.dt > 0 ? opts.snapshots.dt : 0.0;
    if (on_snapshot) on_snapshot({0.0, s, event_kind::none, 0});

    std::uint64_t since_recompute = 0;
    while (true) {
        if (by_events && ev == n_events) break;
        if (total <= 0.0) {
            if (by_events) throw numeric_error("chain absorbed before reaching the event horizon");
            credit_time_mode(t, t_end);
            t = t_end;
            break;
        }
        const double dt = rng.exponential(total);
        const double t_next = t + dt;
        if (!by_events && t_next >= t_end) {
            credit_time_mode(t, t_end);
            t = t_end;
            break;
        }

        if (by_events) {
            if (ev >= warmup_events) {
                est.add(s, dt);
                if (++in_batch == per_batch && batches_done < opts.n_batches - 1) {
                    est.end_batch();
                    in_batch = 0;
                    ++batches_done;
                }
            } else if (ev + 1 == warmup_events) {
                warmup_time = t_next;
            }
        } else {
            credit_time_mode(t, t_next);
        }

        // Grid snapshots for instants inside [t, t_next) see the holding state.
        if (on_snapshot && opts.snapshots.dt > 0) {
            while (next_snap_t < t_next) {
                on_snapshot({next_snap_t, s, event_kind::none, 0});
                next_snap_t += opts.snapshots.dt;
            }
        }

        // Pick the transition class: arrivals to levels 1..b, then departures.
        double r = rng.uniform01() * total;
        int level = 0;
        bool is_arrival = true;
        for (int i = 1; i <= b && level == 0; ++i) {
            if (r < arr[static_cast<std::size_t>(i)]) level = i;
            else r -= arr[static_cast<std::size_t>(i)];
        }
        if (level == 0) {
            is_arrival = false;
            for (int i = 1; i <= b && level == 0; ++i) {
                if (r < dep[static_cast<std::size_t>(i)]) level = i;
                else r -= dep[static_cast<std::size_t>(i)];
            }
        }
        if (level == 0) {    // numerical leftover: take the last positive class
            for (int i = b; i >= 1; --i) {
                if (dep[static_cast<std::size_t>(i)] > 0.0) { level = i; is_arrival = false; break; }
                if (arr[static_cast<std::size_t>(i)] > 0.0) { level = i; is_arrival = true; break; }
            }
            if (level == 0) throw numeric_error("no positive transition rate to select");
        }

        const double old = arr[static_cast<std::size_t>(level)] + dep[static_cast<std::size_t>(level)] +
                           (level > 1 ? dep[static_cast<std::size_t>(level - 1)] : 0.0) +
                           (level < b ? arr[static_cast<std::size_t>(level + 1)] : 0.0);
        s.level(level) += is_arrival ? 1 : -1;
        refresh_level(level);
        refresh_rates_at(level);
        if (level > 1) refresh_rates_at(level - 1);
        if (level < b) refresh_rates_at(level + 1);
        const double fresh = arr[static_cast<std::size_t>(level)] + dep[static_cast<std::size_t>(level)] +
                             (level > 1 ? dep[static_cast<std::size_t>(level - 1)] : 0.0) +
                             (level < b ? arr[static_cast<std::size_t>(level + 1)] : 0.0);
        total += fresh - old;
        if (++since_recompute == 4096) {
            total = full_recompute();
            since_recompute = 0;
        }

        t = t_next;
        ++ev;
        if (on_snapshot && ev == next_snap_ev) {
            const auto kind = is_arrival ? event_kind::arrival_to_level : event_kind::departure_from_level;
            on_snapshot({t, s, kind, level});
            next_snap_ev += opts.snapshots.every_events;
        }
    }

    if (on_snapshot && opts.snapshots.dt > 0 && !by_events) {
        while (next_snap_t <= t_end) {
            on_snapshot({next_snap_t, s, event_kind::none, 0});
            next_snap_t += opts.snapshots.dt;
        }
    }

    if (est.batch_open()) est.end_batch();
    sim_result res;
    res.est = est.finalize(by_events ? warmup_time : t_warm);
    res.final_state = s;
    res.t_final = t;
    res.events = ev;
    return res;
}

struct per_queue_sim_result {
    std::vector<double> mean_s;    // time-averaged occupancy per level
    state_vector final_occupancy;
    double t_final = 0.0;
    std::uint64_t events = 0;
    std::uint64_t dropped = 0;
};

// Plain time-average run of the per-queue chain, used to cross-check the
// aggregate simulator on small systems.
inline per_queue_sim_result simulate_per_queue(const system_config& cfg, std::uint64_t n_events,
                                               double warmup_fraction = 0.2,
                                               std::uint64_t replication_id = 0) {
    philox_rng rng(cfg.seed, replication_id);
    per_queue_state pq(cfg.n);
    state_vector s = pq.occupancy(cfg.b);
    std::vector<double> integral(static_cast<std::size_t>(cfg.b), 0.0);
    double measured = 0.0;
    const std::uint64_t warm = static_cast<std::uint64_t>(static_cast<double>(n_events) * warmup_fraction);
    double t = 0.0;
    std::uint64_t dropped = 0;
    for (std::uint64_t ev = 0; ev < n_events; ++ev) {
        per_queue_event pe;
        const double dt = step_per_queue(pq, cfg, rng, pe);
        if (ev >= warm) {
            for (int i = 1; i <= cfg.b; ++i)
                integral[static_cast<std::size_t>(i - 1)] += dt * static_cast<double>(s.level(i));
            measured += dt;
        }
        t += dt;
        if (pe.dropped) {
            ++dropped;
        } else if (pe.kind == event_kind::arrival_to_level) {
            const int len = pq.lengths[static_cast<std::size_t>(pe.queue)];
            s.level(len) += 1;    // queue moved from len-1 to len
        } else if (pe.kind == event_kind::departure_from_level) {
            const int len = pq.lengths[static_cast<std::size_t>(pe.queue)];
            s.level(len + 1) -= 1;    // queue moved from len+1 to len
        }
    }
    per_queue_sim_result res;
    if (measured <= 0.0) throw config_error("insufficient data: no post-warmup time");
    for (double v : integral) res.mean_s.push_back(v / measured);
    res.final_occupancy = pq.occupancy(cfg.b);
    res.t_final = t;
    res.events = n_events;
    res.dropped = dropped;
    return res;
}

}  // namespace podc
