#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "podc/bounds.hpp"
#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/generator.hpp"
#include "podc/state.hpp"

namespace podc {

struct trajectory_sample {
    double t = 0.0;
    state_vector state;
    event_kind kind = event_kind::none;
    int level = 0;
};

// An indicator tracked as a time fraction: 1{s_level >= threshold} or
// 1{s_level <= threshold}.
struct indicator_def {
    int level = 1;
    bool ge = true;
    std::int64_t threshold = 0;
    std::string name;

    bool eval(const state_vector& s, std::int64_t n) const {
        const auto v = s.at(level, n);
        return ge ? v >= threshold : v <= threshold;
    }
};

struct scalar_estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct steady_state_estimate {
    std::vector<scalar_estimate> mean_s;            // per level 1..b
    std::vector<scalar_estimate> indicators;        // matches the indicator defs
    std::vector<scalar_estimate> band_level_frac;   // time fraction in band, per level 1..m
    scalar_estimate s_mplus1_frac;
    scalar_estimate tail_frac;
    scalar_estimate joint_band_frac;
    bool has_bands = false;
    double measured_time = 0.0;
    double warmup_time = 0.0;
    std::uint64_t events = 0;
    int batches_used = 0;
};

// Time-weighted batch-means estimator. Batches hold an equal number of
// post-warmup events; within a batch everything is integrated against the
// holding times, and the standard error comes from the spread of batch means.
class streaming_estimator {
  public:
    streaming_estimator(const system_config& cfg, int n_batches,
                        std::vector<indicator_def> indicators = {},
                        const band_report* bands = nullptr)
        : cfg_(cfg), n_batches_(n_batches), indicators_(std::move(indicators)) {
        if (n_batches_ < 8) throw config_error("batch means needs at least 8 batches");
        if (bands) bands_ = *bands;
        n_tracks_ = static_cast<std::size_t>(cfg_.b) + indicators_.size();
        if (bands_) n_tracks_ += static_cast<std::size_t>(bands_->m) + 3;
        cur_.assign(n_tracks_, 0.0);
    }

    // Integrate the state over the holding time dt.
    void add(const state_vector& s, double dt) {
        std::size_t t = 0;
        for (int i = 1; i <= cfg_.b; ++i)
            cur_[t++] += dt * static_cast<double>(s.level(i));
        for (const auto& ind : indicators_)
            cur_[t++] += ind.eval(s, cfg_.n) ? dt : 0.0;
        if (bands_) {
            const auto c = band_containment(s, *bands_);
            for (int i = 0; i < bands_->m; ++i)
                cur_[t++] += c.in_level[static_cast<std::size_t>(i)] ? dt : 0.0;
            cur_[t++] += c.s_mplus1_ok ? dt : 0.0;
            cur_[t++] += c.tail_ok ? dt : 0.0;
            cur_[t++] += c.all ? dt : 0.0;
        }
        cur_time_ += dt;
        ++cur_events_;
    }

    void end_batch() {
        if (cur_time_ <= 0.0) throw numeric_error("batch with zero elapsed time");
        std::vector<double> means(n_tracks_);
        for (std::size_t i = 0; i < n_tracks_; ++i) means[i] = cur_[i] / cur_time_;
        batch_means_.push_back(std::move(means));
        batch_times_.push_back(cur_time_);
        total_time_ += cur_time_;
        total_events_ += cur_events_;
        cur_.assign(n_tracks_, 0.0);
        cur_time_ = 0.0;
        cur_events_ = 0;
    }

    bool batch_open() const { return cur_events_ > 0; }
    int planned_batches() const { return n_batches_; }

    steady_state_estimate finalize(double warmup_time) const {
        const auto K = batch_means_.size();
        if (K < 8) throw config_error("insufficient data: only " + std::to_string(K) + " batches");
        steady_state_estimate est;
        est.measured_time = total_time_;
        est.warmup_time = warmup_time;
        est.events = total_events_;
        est.batches_used = static_cast<int>(K);

        auto track = [&](std::size_t t) {
            // Time-weighted grand mean; batch means are near-equally weighted
            // because batches hold equal event counts.
            double grand = 0.0;
            for (std::size_t k = 0; k < K; ++k) grand += batch_means_[k][t] * batch_times_[k];
            grand /= total_time_;
            double var = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double dev = batch_means_[k][t] - grand;
                var += dev * dev;
            }
            var /= static_cast<double>(K - 1);
            return scalar_estimate{grand, std::sqrt(var / static_cast<double>(K))};
        };

        std::size_t t = 0;
        for (int i = 0; i < cfg_.b; ++i) est.mean_s.push_back(track(t++));
        for (std::size_t i = 0; i < indicators_.size(); ++i) est.indicators.push_back(track(t++));
        if (bands_) {
            est.has_bands = true;
            for (int i = 0; i < bands_->m; ++i) est.band_level_frac.push_back(track(t++));
            est.s_mplus1_frac = track(t++);
            est.tail_frac = track(t++);
            est.joint_band_frac = track(t++);
        }
        return est;
    }

    const std::vector<indicator_def>& indicator_defs() const { return indicators_; }
    const std::optional<band_report>& bands() const { return bands_; }

  private:
    system_config cfg_;
    int n_batches_;
    std::vector<indicator_def> indicators_;
    std::optional<band_report> bands_;
    std::size_t n_tracks_ = 0;
    std::vector<double> cur_;
    double cur_time_ = 0.0;
    std::uint64_t cur_events_ = 0;
    std::vector<std::vector<double>> batch_means_;
    std::vector<double> batch_times_;
    double total_time_ = 0.0;
    std::uint64_t total_events_ = 0;
};

// Estimate from a materialized trajectory (piecewise constant between
// samples). Warmup is dropped by sample count, the rest is split into
// equal-count batches.
inline steady_state_estimate estimate(const std::vector<trajectory_sample>& traj,
                                      const system_config& cfg, double warmup_fraction = 0.2,
                                      int n_batches = 32,
                                      std::vector<indicator_def> indicators = {},
                                      const band_report* bands = nullptr) {
    if (traj.size() < 2) throw config_error("insufficient data: trajectory too short");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw config_error("warmup fraction must be in [0, 1)");
    const std::size_t intervals = traj.size() - 1;
    const auto warm = static_cast<std::size_t>(static_cast<double>(intervals) * warmup_fraction);
    const std::size_t used = intervals - warm;
    if (used < static_cast<std::size_t>(n_batches))
        throw config_error("insufficient data: fewer post-warmup samples than batches");

    streaming_estimator est(cfg, n_batches, std::move(indicators), bands);
    const std::size_t per_batch = used / static_cast<std::size_t>(n_batches);
    std::size_t in_batch = 0;
    int batches_done = 0;
    for (std::size_t k = warm; k < intervals; ++k) {
        est.add(traj[k].state, traj[k + 1].t - traj[k].t);
        if (++in_batch == per_batch && batches_done < n_batches - 1) {
            est.end_batch();
            in_batch = 0;
            ++batches_done;
        }
    }
    if (est.batch_open()) est.end_batch();
    return est.finalize(traj[warm].t - traj.front().t);
}

struct containment_verdict {
    std::vector<double> level_violation_frac;    // 1 - time fraction inside, per level
    double s_mplus1_violation = 0.0;
    double tail_violation = 0.0;
    double joint_violation = 0.0;
    double log_prob_lower = 0.0;     // analytic violation-probability bounds (natural log)
    double log_prob_upper = 0.0;
    double log_prob_mplus1 = 0.0;
    double log_prob_tail = 0.0;
    bool exceeds_mplus1_bound = false;
    bool exceeds_tail_bound = false;
    bool sub_threshold_caveat = false;    // finite-n run above the analytic probability bounds
};

// Compare measured violation fractions against the analytic high-probability
// bounds. At moderate n the analytic bounds are asymptotic, so exceeding them
// is reported as a caveat rather than an error.
inline containment_verdict containment(const steady_state_estimate& est, const band_report& bands) {
    if (!est.has_bands) throw config_error("estimate was produced without band tracking");
    containment_verdict v;
    for (const auto& f : est.band_level_frac) v.level_violation_frac.push_back(1.0 - f.mean);
    v.s_mplus1_violation = 1.0 - est.s_mplus1_frac.mean;
    v.tail_violation = 1.0 - est.tail_frac.mean;
    v.joint_violation = 1.0 - est.joint_band_frac.mean;
    v.log_prob_lower = bands.log_prob_lower;
    v.log_prob_upper = bands.log_prob_upper;
    v.log_prob_mplus1 = bands.log_prob_mplus1;
    v.log_prob_tail = bands.log_prob_tail;

    auto above = [](double frac, double log_bound) {
        return frac > 0.0 && std::log(frac) > log_bound;
    };
    v.exceeds_mplus1_bound = above(v.s_mplus1_violation, bands.log_prob_mplus1);
    v.exceeds_tail_bound = above(v.tail_violation, bands.log_prob_tail);
    bool any_level = false;
    for (const auto f : v.level_violation_frac)
        if (above(f, std::max(bands.log_prob_lower, bands.log_prob_upper))) any_level = true;
    v.sub_threshold_caveat = any_level || v.exceeds_mplus1_bound || v.exceeds_tail_bound;
    return v;
}

struct occupancy_row {
    int level = 0;
    double mean = 0.0;
    double frac_ge = 0.0;        // mean s_i / n
    double frac_below = 0.0;     // 1 - mean s_i / n
    double predicted_below = 0.0;    // n^{-gamma} d^{i-1}, the geometric prediction
};

// Per-level occupancy profile with the geometric prediction for the fraction
// of queues below each level in the heavy-load window.
inline std::vector<occupancy_row> occupancy_profile(const steady_state_estimate& est,
                                                    const system_config& cfg, int m) {
    const double n = cfg.dn();
    const double gamma = cfg.gamma_effective();
    const double d = cfg.effective_d_real();
    std::vector<occupancy_row> rows;
    for (int i = 1; i <= cfg.b; ++i) {
        occupancy_row r;
        r.level = i;
        r.mean = est.mean_s[static_cast<std::size_t>(i - 1)].mean;
        r.frac_ge = r.mean / n;
        r.frac_below = 1.0 - r.frac_ge;
        r.predicted_below =
            i <= m ? std::pow(n, -gamma) * std::pow(d, i - 1) : 1.0;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace podc
