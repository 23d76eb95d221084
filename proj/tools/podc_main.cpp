// Command-line driver: wires config ingestion, the simulator/analyzers, and
// result emission together. Every subcommand reads one JSON config, writes
// its outputs into --out, and stamps each file with the config hash and seed.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "podc/podc.hpp"

namespace fs = std::filesystem;
using podc::ordered_json;

namespace {

struct cli_options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> reps;
    std::optional<std::uint64_t> events;
    std::optional<double> time_horizon;
    std::optional<double> warmup;
    std::optional<int> batches;
    std::optional<std::string> d_round;
    std::optional<std::uint64_t> scan_budget;
    std::optional<std::string> drift_target;
};

struct experiment_plan {
    std::string command;
    podc::system_config cfg;
    nlohmann::json raw;    // full config document for command-specific blocks
    fs::path out;
    std::uint64_t replications = 1;
    podc::sim_options sim;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("PODC_OUT_DIR")) return env;
    return "out";
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw podc::config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw podc::config_error(std::string("config is not valid JSON: ") + e.what());
    }
    return j;
}

experiment_plan make_plan(const std::string& command, const cli_options& opt) {
    experiment_plan plan;
    plan.command = command;
    plan.raw = load_json(opt.config_path);
    plan.cfg = podc::config_from_json(plan.raw);
    if (opt.seed) plan.cfg.seed = *opt.seed;
    if (opt.d_round) plan.cfg.rounding = podc::rounding_from_string(*opt.d_round);

    plan.out = fs::path(opt.out_dir);

    if (plan.raw.contains("replications"))
        plan.replications = plan.raw.at("replications").get<std::uint64_t>();
    if (opt.reps) plan.replications = *opt.reps;
    if (plan.replications < 1) throw podc::config_error("replications must be >= 1");

    // Simulation horizon: config block first, flags override.
    if (plan.raw.contains("horizon")) {
        const auto& h = plan.raw.at("horizon");
        if (h.contains("events")) {
            plan.sim.horizon.kind = podc::sim_horizon::by::events;
            plan.sim.horizon.n_events = h.at("events").get<std::uint64_t>();
        } else if (h.contains("time")) {
            plan.sim.horizon.kind = podc::sim_horizon::by::time;
            plan.sim.horizon.t_end = h.at("time").get<double>();
        } else {
            throw podc::config_error("horizon block needs events or time");
        }
    }
    if (opt.events && opt.time_horizon)
        throw podc::config_error("--events and --time are mutually exclusive");
    if (opt.events) {
        plan.sim.horizon.kind = podc::sim_horizon::by::events;
        plan.sim.horizon.n_events = *opt.events;
    }
    if (opt.time_horizon) {
        plan.sim.horizon.kind = podc::sim_horizon::by::time;
        plan.sim.horizon.t_end = *opt.time_horizon;
    }
    if (plan.raw.contains("warmup_fraction"))
        plan.sim.warmup_fraction = plan.raw.at("warmup_fraction").get<double>();
    if (opt.warmup) plan.sim.warmup_fraction = *opt.warmup;
    if (plan.raw.contains("batches")) plan.sim.n_batches = plan.raw.at("batches").get<int>();
    if (opt.batches) plan.sim.n_batches = *opt.batches;
    if (plan.raw.contains("snapshot")) {
        const auto& s = plan.raw.at("snapshot");
        if (s.contains("every_events"))
            plan.sim.snapshots.every_events = s.at("every_events").get<std::uint64_t>();
        if (s.contains("dt")) plan.sim.snapshots.dt = s.at("dt").get<double>();
    }
    if (plan.raw.contains("indicators")) {
        for (const auto& ij : plan.raw.at("indicators")) {
            podc::indicator_def def;
            def.level = ij.at("level").get<int>();
            const auto op = ij.value("op", std::string("ge"));
            if (op != "ge" && op != "le") throw podc::config_error("indicator op must be ge or le");
            def.ge = op == "ge";
            def.threshold = ij.at("threshold").get<std::int64_t>();
            def.name = "s" + std::to_string(def.level) + "_" + op + "_" +
                       std::to_string(def.threshold);
            plan.sim.indicators.push_back(def);
        }
    }
    return plan;
}

// Resolve the integer sampling factor for simulation: explicit d, else a
// rounded d_real, else the implicit-equation solution for (gamma, m).
int resolve_d_int(podc::system_config& cfg) {
    if (cfg.d) return *cfg.d;
    if (cfg.d_real) {
        cfg.d = podc::round_d(*cfg.d_real, cfg.rounding);
    } else if (cfg.m && cfg.gamma) {
        const auto sol = podc::solve_implicit_d(cfg.n, *cfg.gamma, *cfg.m, cfg.rounding);
        cfg.d_real = sol.d_real;
        cfg.d = sol.d_int;
    } else {
        throw podc::config_error("config needs d, d_real, or (gamma, m) to fix d");
    }
    if (*cfg.d < 1) throw podc::config_error("resolved d is < 1");
    if (*cfg.d > cfg.n && !cfg.allow_d_gt_n)
        throw podc::config_error("resolved d exceeds n (set allow_d_gt_n to permit)");
    return *cfg.d;
}

// Real-valued d for analytics, solving the implicit equation if necessary.
double resolve_d_real(podc::system_config& cfg) {
    if (cfg.d_real) return *cfg.d_real;
    if (cfg.d) return static_cast<double>(*cfg.d);
    if (cfg.m && cfg.gamma) {
        const auto sol = podc::solve_implicit_d(cfg.n, *cfg.gamma, *cfg.m, cfg.rounding);
        cfg.d_real = sol.d_real;
        return sol.d_real;
    }
    throw podc::config_error("config needs d, d_real, or (gamma, m) to fix d");
}

// Plateau level for band/profile analytics: explicit m wins, else inverted
// from d. Returns nullopt when neither is derivable.
std::optional<int> resolve_m(const podc::system_config& cfg, double d) {
    if (cfg.m) return *cfg.m;
    if (cfg.n < 2 || d <= 1.0) return std::nullopt;
    try {
        const double gamma = cfg.gamma_effective();
        if (gamma <= 0.0 || gamma >= 1.0) return std::nullopt;
        return podc::infer_m(cfg.n, gamma, d).m_int;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    podc::write_text(path.string(), j.dump(2) + "\n");
}

void write_run_info(const experiment_plan& plan, const std::vector<std::string>& outputs) {
    ordered_json j;
    j["command"] = plan.command;
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    j["timestamp_utc"] = buf;
    j["outputs"] = outputs;
    write_json_file(plan.out / "run_info.json", j);
}

// Weighted pooling of per-replication estimates into one estimate structure.
podc::steady_state_estimate pool_estimates(const std::vector<podc::steady_state_estimate>& reps) {
    podc::steady_state_estimate out = reps.front();
    std::vector<double> w;
    for (const auto& e : reps) w.push_back(e.measured_time);
    double wsum = 0.0;
    for (double x : w) wsum += x;
    auto pool = [&](auto getter) {
        podc::scalar_estimate s;
        double var = 0.0;
        s.mean = 0.0;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            const double wr = w[r] / wsum;
            const auto& v = getter(reps[r]);
            s.mean += wr * v.mean;
            var += wr * wr * v.std_error * v.std_error;
        }
        s.std_error = std::sqrt(var);
        return s;
    };
    for (std::size_t i = 0; i < out.mean_s.size(); ++i)
        out.mean_s[i] = pool([i](const auto& e) -> const podc::scalar_estimate& { return e.mean_s[i]; });
    for (std::size_t i = 0; i < out.indicators.size(); ++i)
        out.indicators[i] =
            pool([i](const auto& e) -> const podc::scalar_estimate& { return e.indicators[i]; });
    if (out.has_bands) {
        for (std::size_t i = 0; i < out.band_level_frac.size(); ++i)
            out.band_level_frac[i] = pool(
                [i](const auto& e) -> const podc::scalar_estimate& { return e.band_level_frac[i]; });
        out.s_mplus1_frac =
            pool([](const auto& e) -> const podc::scalar_estimate& { return e.s_mplus1_frac; });
        out.tail_frac = pool([](const auto& e) -> const podc::scalar_estimate& { return e.tail_frac; });
        out.joint_band_frac =
            pool([](const auto& e) -> const podc::scalar_estimate& { return e.joint_band_frac; });
    }
    out.measured_time = wsum;
    out.events = 0;
    for (const auto& e : reps) out.events += e.events;
    return out;
}

std::vector<std::string> run_simulate(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    const int d_int = resolve_d_int(cfg);

    // Band tracking when the operating point pins (gamma, m).
    std::optional<podc::band_report> bands;
    std::string bands_unavailable;
    const auto m_opt = resolve_m(cfg, static_cast<double>(d_int));
    if (m_opt && cfg.n >= 2 && d_int >= 2) {
        try {
            bands = podc::make_band_report(cfg.dn(), cfg.gamma_effective(), *m_opt,
                                           static_cast<double>(d_int), cfg.b);
        } catch (const std::exception& e) {
            bands_unavailable = e.what();
        }
    } else {
        bands_unavailable = "operating point does not determine (gamma, m)";
    }
    plan.sim.bands = bands ? &*bands : nullptr;

    // Default snapshot cadence keeps trajectory files plottable but small.
    if (plan.sim.snapshots.every_events == 0 && plan.sim.snapshots.dt == 0.0) {
        if (plan.sim.horizon.kind == podc::sim_horizon::by::events)
            plan.sim.snapshots.every_events = std::max<std::uint64_t>(1, plan.sim.horizon.n_events / 10000);
        else
            plan.sim.snapshots.dt = plan.sim.horizon.t_end / 10000.0;
    }

    std::vector<std::string> columns = {"t"};
    for (int i = 1; i <= cfg.b; ++i) columns.push_back("s_" + std::to_string(i));
    columns.push_back("event_kind");
    columns.push_back("event_level");
    podc::csv_writer traj((plan.out / "trajectory.csv").string(), cfg, columns);

    std::vector<podc::steady_state_estimate> rep_estimates;
    podc::sim_result last;
    for (std::uint64_t rep = 0; rep < plan.replications; ++rep) {
        podc::sim_options o = plan.sim;
        o.replication_id = rep;
        podc::snapshot_fn snap;
        if (rep == 0)
            snap = [&](const podc::trajectory_sample& row) {
                traj.field(row.t);
                for (int i = 1; i <= row.state.b(); ++i) traj.field(row.state.level(i));
                traj.field(std::string(podc::to_string(row.kind)));
                traj.field(row.level);
                traj.end_row();
            };
        last = podc::simulate(cfg, o, snap);
        rep_estimates.push_back(last.est);
    }
    const auto pooled = pool_estimates(rep_estimates);

    ordered_json est_json;
    est_json["meta"] = podc::meta_json(cfg);
    est_json["config"] = podc::config_to_json(cfg);
    ordered_json reps = ordered_json::array();
    for (const auto& e : rep_estimates) reps.push_back(podc::json_of(e));
    est_json["replications"] = reps;
    est_json["pooled"] = podc::json_of(pooled);
    if (m_opt) est_json["occupancy_profile"] = podc::json_of(podc::occupancy_profile(pooled, cfg, *m_opt));
    write_json_file(plan.out / "estimate.json", est_json);

    ordered_json verdict;
    verdict["meta"] = podc::meta_json(cfg);
    if (bands) {
        verdict["bands"] = podc::json_of(*bands);
        verdict["containment"] = podc::json_of(podc::containment(pooled, *bands));
    } else {
        verdict["bands"] = "unavailable";
        verdict["reason"] = bands_unavailable;
    }
    write_json_file(plan.out / "verdict.json", verdict);
    return {"trajectory.csv", "estimate.json", "verdict.json"};
}

std::vector<std::string> run_exact(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    resolve_d_int(cfg);
    std::size_t max_states = 200000;
    if (plan.raw.contains("exact") && plan.raw.at("exact").contains("max_states"))
        max_states = plan.raw.at("exact").at("max_states").get<std::size_t>();
    const auto dist = podc::solve_stationary_exact(cfg, max_states);
    ordered_json j;
    j["meta"] = podc::meta_json(cfg);
    j["config"] = podc::config_to_json(cfg);
    j.update(podc::json_of(dist));
    write_json_file(plan.out / "stationary.json", j);
    return {"stationary.json"};
}

std::vector<std::string> run_ode(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    resolve_d_real(cfg);
    podc::ode_options opt;
    std::vector<double> x0(static_cast<std::size_t>(cfg.b), 0.0);
    if (plan.raw.contains("ode")) {
        const auto& o = plan.raw.at("ode");
        if (o.contains("t_end")) opt.t_end = o.at("t_end").get<double>();
        if (o.contains("rtol")) opt.rtol = o.at("rtol").get<double>();
        if (o.contains("atol")) opt.atol = o.at("atol").get<double>();
        if (o.contains("x0")) {
            x0 = o.at("x0").get<std::vector<double>>();
            if (static_cast<int>(x0.size()) != cfg.b)
                throw podc::config_error("ode.x0 must have b entries");
        }
    }
    const auto traj = podc::integrate(cfg, x0, opt);
    std::vector<std::string> columns = {"t"};
    for (int i = 1; i <= cfg.b; ++i) columns.push_back("x_" + std::to_string(i));
    podc::csv_writer csv((plan.out / "ode_trajectory.csv").string(), cfg, columns);
    for (const auto& row : traj) {
        csv.field(row.t);
        for (double v : row.x) csv.field(v);
        csv.end_row();
    }
    return {"ode_trajectory.csv"};
}

std::vector<std::string> run_fixedpoint(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    const double d_real = resolve_d_real(cfg);
    ordered_json j;
    j["meta"] = podc::meta_json(cfg);
    j["config"] = podc::config_to_json(cfg);
    j["closed_form"] = podc::json_of(podc::fixed_point_closed_form(cfg));
    j["finite_b"] = podc::json_of(podc::fixed_point_finite_b(cfg));
    if (const auto m_opt = resolve_m(cfg, d_real)) {
        auto plat = podc::asymptotic_plateau(cfg, *m_opt);
        ordered_json pj = podc::json_of(plat);
        pj["m"] = *m_opt;
        std::vector<double> gaps;
        for (double x : plat.x) gaps.push_back(cfg.dn() - x);
        pj["gaps"] = gaps;
        j["plateau"] = pj;
    }
    write_json_file(plan.out / "fixed_point.json", j);
    return {"fixed_point.json"};
}

std::vector<std::string> run_regime(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    if (cfg.n < 2) throw podc::config_error("regime analysis needs n >= 2");
    const double gamma = cfg.gamma ? *cfg.gamma : cfg.gamma_effective();
    ordered_json j;
    j["meta"] = podc::meta_json(cfg);
    j["n"] = cfg.n;
    j["gamma"] = gamma;
    bool any = false;
    if (cfg.m) {
        auto sol = podc::solve_implicit_d(cfg.n, gamma, *cfg.m, cfg.rounding);
        sol.klass = podc::classify_regime(cfg.n, gamma, sol.d_real);
        j["solution"] = podc::json_of(sol);
        any = true;
    }
    if (cfg.d || cfg.d_real) {
        const double d = cfg.d_real ? *cfg.d_real : static_cast<double>(*cfg.d);
        ordered_json inf = podc::json_of(podc::infer_m(cfg.n, gamma, d));
        inf["d"] = d;
        inf["regime"] = podc::to_string(podc::classify_regime(cfg.n, gamma, d));
        j["inference"] = inf;
        any = true;
    }
    if (!any) throw podc::config_error("regime needs m (to solve for d) or d (to infer m)");
    write_json_file(plan.out / "regime.json", j);
    return {"regime.json"};
}

std::vector<std::string> run_bounds(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    if (cfg.n < 2) throw podc::config_error("band analysis needs n >= 2");
    const double d_real = resolve_d_real(cfg);
    const auto m_opt = resolve_m(cfg, d_real);
    if (!m_opt) throw podc::config_error("bounds needs m, or enough to infer it");
    const double gamma = cfg.gamma_effective();
    const auto report = podc::make_band_report(cfg.dn(), gamma, *m_opt, d_real, cfg.b);
    ordered_json j;
    j["meta"] = podc::meta_json(cfg);
    j["config"] = podc::config_to_json(cfg);
    j.update(podc::json_of(report));
    ordered_json bt = ordered_json::array();
    for (const auto& row : podc::b_terms(cfg.dn(), gamma, *m_opt, d_real)) {
        ordered_json r;
        r["i"] = row.i;
        r["value"] = row.value;
        r["ratio_to_prev"] = row.ratio_to_prev;
        bt.push_back(r);
    }
    j["b_terms"] = bt;
    write_json_file(plan.out / "bands.json", j);
    return {"bands.json"};
}

std::vector<std::string> run_driftscan(experiment_plan& plan, const cli_options& opt) {
    auto& cfg = plan.cfg;
    const int d_int = resolve_d_int(cfg);
    if (!plan.raw.contains("scan")) throw podc::config_error("driftscan needs a scan block");
    const auto& sj = plan.raw.at("scan");

    const auto m_opt = resolve_m(cfg, static_cast<double>(d_int));
    if (!m_opt) throw podc::config_error("driftscan needs m, or enough to infer it");

    podc::lyap_spec spec;
    spec.family = podc::family_from_string(sj.at("family").get<std::string>());
    spec.i = sj.value("i", 0);
    spec.k = sj.value("k", 0);
    spec.p = podc::lyap_params::from(cfg, *m_opt, static_cast<double>(d_int));
    if (sj.contains("B_mplus2")) spec.p.B_mplus2 = sj.at("B_mplus2").get<double>();

    podc::scan_options so;
    so.seed = cfg.seed;
    so.budget = sj.value("budget", std::uint64_t{10000});
    if (opt.scan_budget) so.budget = *opt.scan_budget;
    if (sj.contains("target")) so.target = podc::drift_target_from_string(sj.at("target").get<std::string>());
    if (opt.drift_target) so.target = podc::drift_target_from_string(*opt.drift_target);

    const auto region = podc::canonical_region(spec);
    const auto report = podc::drift_scan(spec, region, cfg, so);

    ordered_json j;
    j["meta"] = podc::meta_json(cfg);
    j["config"] = podc::config_to_json(cfg);
    j["family"] = podc::to_string(spec.family);
    j["i"] = spec.i;
    j["k"] = spec.k;
    j["m"] = *m_opt;
    j["d"] = d_int;
    j["target"] = podc::to_string(so.target);
    j["budget"] = so.budget;
    j.update(podc::json_of(report));
    write_json_file(plan.out / "driftscan.json", j);
    return {"driftscan.json"};
}

std::vector<std::string> run_taylor(experiment_plan& plan) {
    const auto& cfg = plan.cfg;
    // lhs/bound columns: a1 and a3 are compared in log space, a2 directly.
    podc::csv_writer csv((plan.out / "taylor_grid.csv").string(), cfg,
                         {"lemma", "r", "f", "d", "n", "m", "lhs", "bound_lo", "bound_hi", "holds"});
    const std::string na;
    ordered_json summary;
    summary["meta"] = podc::meta_json(cfg);

    ordered_json a1 = ordered_json::array();
    for (double r : podc::taylor_a1_r_values()) {
        const auto rows = podc::taylor_a1_scan(r);
        for (const auto& row : rows) {
            csv.field(std::string("a1"));
            csv.field(row.r);
            csv.field(row.f);
            csv.field(row.d);
            csv.field(na);
            csv.field(na);
            csv.field(row.lhs_log);
            csv.field(na);
            csv.field(row.rhs_log);
            csv.field(row.holds ? 1 : 0);
            csv.end_row();
        }
        const auto idx = podc::holds_from_index(rows, [](const auto& x) { return x.holds; });
        ordered_json e;
        e["r"] = r;
        if (idx) e["threshold_d"] = rows[*idx].d;
        a1.push_back(e);
    }
    summary["a1_thresholds"] = a1;

    std::uint64_t a2_lower_violations = 0, a2_upper_violations = 0;
    for (double d : podc::taylor_a2_d_grid()) {
        for (double f : podc::taylor_a2_f_grid()) {
            const auto row = podc::taylor_a2(d, f);
            csv.field(std::string("a2"));
            csv.field(na);
            csv.field(row.f);
            csv.field(row.d);
            csv.field(na);
            csv.field(na);
            csv.field(row.value);
            csv.field(row.lower_bound);
            csv.field(row.upper_bound);
            csv.field((row.lower_holds && row.upper_holds) ? 1 : 0);
            csv.end_row();
            if (!row.lower_holds) ++a2_lower_violations;
            if (!row.upper_holds) ++a2_upper_violations;
        }
    }
    summary["a2_lower_violations"] = a2_lower_violations;
    summary["a2_upper_violations"] = a2_upper_violations;

    ordered_json a3 = ordered_json::array();
    for (int m : podc::taylor_a3_m_values()) {
        const auto rows = podc::taylor_a3_scan(m);
        for (const auto& row : rows) {
            csv.field(std::string("a3"));
            csv.field(na);
            csv.field(na);
            csv.field(na);
            csv.field(row.n);
            csv.field(row.m);
            csv.field(row.lhs_log);
            csv.field(na);
            csv.field(row.rhs_log);
            csv.field(row.holds ? 1 : 0);
            csv.end_row();
        }
        const auto idx = podc::holds_from_index(rows, [](const auto& x) { return x.holds; });
        ordered_json e;
        e["m"] = m;
        if (idx) e["threshold_n"] = rows[*idx].n;
        a3.push_back(e);
    }
    summary["a3_thresholds"] = a3;
    write_json_file(plan.out / "taylor_summary.json", summary);
    return {"taylor_grid.csv", "taylor_summary.json"};
}

std::vector<std::string> run_sweep(experiment_plan& plan) {
    auto& cfg = plan.cfg;
    if (cfg.n < 2) throw podc::config_error("sweep needs n >= 2");
    const double gamma = cfg.gamma ? *cfg.gamma : cfg.gamma_effective();
    const double dn = cfg.dn();
    const double ln = std::log(dn);

    std::vector<std::pair<double, std::string>> grid;
    if (plan.raw.contains("sweep") && plan.raw.at("sweep").contains("d_values")) {
        for (double d : plan.raw.at("sweep").at("d_values").get<std::vector<double>>())
            grid.emplace_back(d, "config");
    } else {
        grid.emplace_back(ln * ln, "log_n^2");
        grid.emplace_back(ln * ln * ln, "log_n^3");
        grid.emplace_back(ln * ln * ln * ln, "log_n^4");
        for (int m : {5, 4, 3, 2}) {
            try {
                const auto sol = podc::solve_implicit_d(cfg.n, gamma, m, cfg.rounding);
                grid.emplace_back(sol.d_real, "implicit_m" + std::to_string(m));
            } catch (const podc::numeric_error&) {
                // no root at this operating point; skip the row
            }
        }
        grid.emplace_back(std::pow(dn, gamma) * ln, "n^gamma_log_n");
        grid.emplace_back(std::sqrt(dn), "sqrt_n");
        grid.emplace_back(dn, "n");
    }
    std::sort(grid.begin(), grid.end());

    podc::csv_writer csv((plan.out / "sweep.csv").string(), cfg,
                         {"d", "rule", "m_real", "m_int", "regime"});
    for (const auto& [d, rule] : grid) {
        if (d <= 1.0) continue;
        const auto mi = podc::infer_m(cfg.n, gamma, d);
        csv.field(d);
        csv.field(rule);
        csv.field(mi.m_real);
        csv.field(mi.m_int);
        csv.field(std::string(podc::to_string(podc::classify_regime(cfg.n, gamma, d))));
        csv.end_row();
    }
    return {"sweep.csv"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-of-d-choices occupancy-chain simulator and analyzer"};
    app.require_subcommand(1);

    cli_options opt;
    opt.out_dir = default_out_dir();

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "run the occupancy-chain event simulation and estimate steady-state marginals"},
        {"exact", "enumerate the state space and solve the stationary distribution exactly"},
        {"ode", "integrate the fluid (mean-field) trajectory"},
        {"fixedpoint", "compute fluid fixed points (closed form and truncated-buffer balance)"},
        {"regime", "solve the sampling-rate equation for d and/or infer the delay depth m"},
        {"bounds", "evaluate the high-probability occupancy bands and tail terms"},
        {"driftscan", "numerically check a drift statement over its canonical region"},
        {"taylor", "evaluate the scalar inequality grids and their thresholds"},
        {"sweep", "classify the regime across a ladder of d rules at fixed n and gamma"},
    };
    std::string chosen;
    for (const auto& [name, blurb] : commands) {
        auto* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", opt.config_path, "JSON config file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (default $PODC_OUT_DIR or ./out)");
        sub->add_option("--seed", opt.seed, "RNG seed override");
        sub->add_option("--reps", opt.reps, "number of replications");
        sub->add_option("--events", opt.events, "event horizon");
        sub->add_option("--time", opt.time_horizon, "time horizon");
        sub->add_option("--warmup", opt.warmup, "warmup fraction in [0, 1)");
        sub->add_option("--batches", opt.batches, "batch count for batch means");
        sub->add_option("--d-round", opt.d_round, "d rounding: floor, ceil, nearest")
            ->check(CLI::IsMember({"floor", "ceil", "nearest"}));
        sub->add_option("--scan-budget", opt.scan_budget, "drift scan state budget");
        sub->add_option("--drift-target", opt.drift_target, "drift target: template or zero")
            ->check(CLI::IsMember({"template", "zero"}));
        sub->callback([&chosen, name]() { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);    // --help
        nlohmann::ordered_json err;
        err["error"] = {{"type", "config"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        experiment_plan plan = make_plan(chosen, opt);
        fs::create_directories(plan.out);

        std::vector<std::string> outputs;
        if (chosen == "simulate") outputs = run_simulate(plan);
        else if (chosen == "exact") outputs = run_exact(plan);
        else if (chosen == "ode") outputs = run_ode(plan);
        else if (chosen == "fixedpoint") outputs = run_fixedpoint(plan);
        else if (chosen == "regime") outputs = run_regime(plan);
        else if (chosen == "bounds") outputs = run_bounds(plan);
        else if (chosen == "driftscan") outputs = run_driftscan(plan, opt);
        else if (chosen == "taylor") outputs = run_taylor(plan);
        else if (chosen == "sweep") outputs = run_sweep(plan);

        write_run_info(plan, outputs);
        return 0;
    } catch (const podc::config_error& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"type", "config"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const podc::numeric_error& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"type", "numeric"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"type", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
}
