#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "podc/bounds.hpp"
#include "podc/config.hpp"
#include "podc/drift_scan.hpp"
#include "podc/errors.hpp"
#include "podc/fluid.hpp"
#include "podc/regime.hpp"
#include "podc/ssc.hpp"
#include "podc/stationary.hpp"
#include "podc/stats.hpp"
#include "podc/taylor.hpp"
#include "podc/version.hpp"

namespace podc {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline ordered_json meta_json(const system_config& cfg) {
    ordered_json m;
    m["artifact"] = artifact_name;
    m["version"] = artifact_version;
    m["config_hash"] = config_hash_hex(cfg);
    m["seed"] = cfg.seed;
    return m;
}

inline std::string csv_meta_line(const system_config& cfg) {
    return std::string("# artifact=") + artifact_name + " version=" + artifact_version +
           " config_hash=" + config_hash_hex(cfg) + " seed=" + std::to_string(cfg.seed);
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw config_error("write failed: " + path);
}

inline ordered_json json_of(const state_vector& s) {
    ordered_json a = ordered_json::array();
    for (int i = 1; i <= s.b(); ++i) a.push_back(s.level(i));
    return a;
}

inline ordered_json json_of(const regime_solution& r) {
    ordered_json j;
    j["m"] = r.m;
    j["d_real"] = r.d_real;
    j["d_int"] = r.d_int;
    j["bracket_lo"] = r.bracket_lo;
    j["bracket_hi"] = r.bracket_hi;
    j["bracket_valid"] = r.bracket_valid;
    j["residual"] = r.residual;
    j["regime"] = to_string(r.klass);
    return j;
}

inline ordered_json json_of(const m_inference& r) {
    ordered_json j;
    j["m_real"] = r.m_real;
    j["m_int"] = r.m_int;
    j["m_leading"] = r.m_leading;
    return j;
}

inline ordered_json json_of(const band_report& r) {
    ordered_json j;
    j["n"] = r.n;
    j["gamma"] = r.gamma;
    j["d"] = r.d;
    j["m"] = r.m;
    j["b"] = r.b;
    j["leading"] = r.leading;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["s_mplus1_upper"] = r.s_mplus1_upper;
    j["tail_sum_upper"] = r.tail_sum_upper;
    j["log_prob_lower"] = r.log_prob_lower;
    j["log_prob_upper"] = r.log_prob_upper;
    j["log_prob_mplus1"] = r.log_prob_mplus1;
    j["log_prob_tail"] = r.log_prob_tail;
    j["correction_ratio"] = r.correction_ratio_value;
    return j;
}

inline ordered_json json_of(const scalar_estimate& e) {
    ordered_json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    return j;
}

inline ordered_json json_of(const steady_state_estimate& e) {
    ordered_json j;
    ordered_json means = ordered_json::array();
    for (const auto& m : e.mean_s) means.push_back(json_of(m));
    j["mean_s"] = means;
    ordered_json inds = ordered_json::array();
    for (const auto& m : e.indicators) inds.push_back(json_of(m));
    j["indicators"] = inds;
    if (e.has_bands) {
        ordered_json bl = ordered_json::array();
        for (const auto& m : e.band_level_frac) bl.push_back(json_of(m));
        j["band_level_fraction"] = bl;
        j["s_mplus1_fraction"] = json_of(e.s_mplus1_frac);
        j["tail_fraction"] = json_of(e.tail_frac);
        j["joint_band_fraction"] = json_of(e.joint_band_frac);
    }
    j["measured_time"] = e.measured_time;
    j["warmup_time"] = e.warmup_time;
    j["events"] = e.events;
    j["batches_used"] = e.batches_used;
    return j;
}

inline ordered_json json_of(const containment_verdict& v) {
    ordered_json j;
    j["level_violation_fraction"] = v.level_violation_frac;
    j["s_mplus1_violation"] = v.s_mplus1_violation;
    j["tail_violation"] = v.tail_violation;
    j["joint_violation"] = v.joint_violation;
    j["log_prob_lower"] = v.log_prob_lower;
    j["log_prob_upper"] = v.log_prob_upper;
    j["log_prob_mplus1"] = v.log_prob_mplus1;
    j["log_prob_tail"] = v.log_prob_tail;
    j["exceeds_mplus1_bound"] = v.exceeds_mplus1_bound;
    j["exceeds_tail_bound"] = v.exceeds_tail_bound;
    j["sub_threshold_caveat"] = v.sub_threshold_caveat;
    return j;
}

inline ordered_json json_of(const fixed_point& fp) {
    ordered_json j;
    j["kind"] = fp.kind;
    j["x"] = fp.x;
    j["clamped"] = fp.clamped;
    j["residual"] = fp.residual;
    return j;
}

inline ordered_json json_of(const scan_report& r) {
    ordered_json j;
    j["empty_region"] = r.empty_region;
    j["corners_evaluated"] = r.corners_evaluated;
    j["sampled_evaluated"] = r.sampled_evaluated;
    j["attempts"] = r.attempts;
    j["target_value"] = r.target_value;
    if (!r.empty_region) {
        j["max_drift"] = r.max_drift;
        j["argmax_state"] = json_of(r.argmax_state);
        j["argmax_v"] = r.argmax_v;
        j["fraction_satisfying"] = r.fraction_satisfying;
        ordered_json ces = ordered_json::array();
        for (const auto& ce : r.counterexamples) {
            ordered_json c;
            c["state"] = json_of(ce.state);
            c["drift"] = ce.drift_value;
            c["v"] = ce.v_value;
            ces.push_back(c);
        }
        j["counterexamples"] = ces;
    }
    return j;
}

inline ordered_json json_of(const tail_bound_input& in, const tail_bound& tb) {
    ordered_json j;
    j["B"] = in.B;
    j["gamma_drift"] = in.gamma_drift;
    j["delta"] = in.delta;
    j["nu_max"] = in.nu_max;
    j["q_max"] = in.q_max;
    j["prob_not_E"] = in.prob_not_E;
    j["j"] = in.j;
    j["alpha"] = tb.alpha;
    j["beta"] = tb.beta;
    j["log_bound"] = tb.log_bound;
    return j;
}

inline ordered_json json_of(const stationary_distribution& dist) {
    ordered_json j;
    ordered_json states = ordered_json::array();
    for (const auto& s : dist.states) states.push_back(json_of(s));
    j["states"] = states;
    j["probs"] = dist.probs;
    j["residual"] = dist.residual;
    if (!dist.states.empty()) {
        const int b = dist.states.front().b();
        std::vector<double> means;
        for (int i = 1; i <= b; ++i) means.push_back(dist.mean_si(i));
        j["mean_s"] = means;
    }
    return j;
}

inline ordered_json json_of(const std::vector<occupancy_row>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["level"] = r.level;
        j["mean"] = r.mean;
        j["frac_ge"] = r.frac_ge;
        j["frac_below"] = r.frac_below;
        j["predicted_below"] = r.predicted_below;
        arr.push_back(j);
    }
    return arr;
}

// CSV writer with the metadata comment line and a fixed header row.
class csv_writer {
  public:
    csv_writer(const std::string& path, const system_config& cfg,
               const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw config_error("cannot open for writing: " + path);
        out_ << csv_meta_line(cfg) << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
        out_ << "\n";
    }

    void field(double v) { sep(); out_ << fmt_double(v); }
    void field(std::int64_t v) { sep(); out_ << v; }
    void field(std::uint64_t v) { sep(); out_ << v; }
    void field(int v) { sep(); out_ << v; }
    void field(const std::string& v) { sep(); out_ << v; }
    void end_row() { out_ << "\n"; first_ = true; }

  private:
    void sep() {
        if (!first_) out_ << ",";
        first_ = false;
    }
    std::ofstream out_;
    bool first_ = true;
};

}  // namespace podc
