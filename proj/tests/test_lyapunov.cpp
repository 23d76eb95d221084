#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "podc/drift_scan.hpp"
#include "podc/lyapunov.hpp"
#include "podc/regime.hpp"
#include "podc/ssc.hpp"
#include "podc/stationary.hpp"

#include "oracles.hpp"

using Catch::Approx;

namespace {

podc::system_config make_cfg(std::int64_t n, double lambda, int d, int b,
                             std::optional<double> gamma = {}) {
    podc::system_config cfg;
    cfg.n = n;
    cfg.lambda = lambda;
    cfg.gamma = gamma;
    cfg.d = d;
    cfg.b = b;
    cfg.validate();
    return cfg;
}

podc::lyap_params make_params(double n, double gamma, double lambda, double d, int m, int b) {
    podc::lyap_params p;
    p.n = n;
    p.gamma = gamma;
    p.lambda = lambda;
    p.d = d;
    p.m = m;
    p.b = b;
    return p;
}

}    // namespace

TEST_CASE("drift is linear in the test function", "[lyapunov]") {
    const auto cfg = make_cfg(3, 2.1, 2, 3);
    const auto V = [](const podc::state_vector& s) {
        return static_cast<double>(s.level(1) * s.level(1)) + 0.5 * s.level(2);
    };
    const auto W = [](const podc::state_vector& s) {
        return static_cast<double>(s.level(3)) - 2.0 * s.level(1);
    };
    const auto combo = [&](const podc::state_vector& s) { return 3.0 * V(s) - 1.5 * W(s); };

    for (const auto& s : podc::enumerate_states(3, 3)) {
        const double lhs = podc::drift(combo, s, cfg);
        const double rhs = 3.0 * podc::drift(V, s, cfg) - 1.5 * podc::drift(W, s, cfg);
        REQUIRE(lhs == Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("stationary expectation of any drift vanishes", "[lyapunov]") {
    const auto cfg = make_cfg(3, 2.4, 2, 2);
    const auto dist = podc::solve_stationary_exact(cfg);

    const auto V = [](const podc::state_vector& s) {
        return std::pow(static_cast<double>(s.level(1)), 1.7) + 3.0 * s.level(2);
    };
    double acc = 0.0;
    for (std::size_t j = 0; j < dist.states.size(); ++j)
        acc += dist.probs[j] * podc::drift(V, dist.states[j], cfg);
    CHECK(std::abs(acc) <= 1e-8);
}

TEST_CASE("single-expression families match their written-out formulas", "[lyapunov]") {
    const auto p = make_params(100.0, 0.3, 74.88, 5.0, 2, 3);
    const podc::state_vector s{90, 50, 10};
    const double ld = std::log(5.0);
    const double ln_n = std::log(100.0);
    const double smn = std::sqrt(200.0);

    podc::lyap_spec base{podc::lyap_family::base_v1, 0, 0, p};
    const double base_expect =
        100.0 - 2.0 * 2 * 100.0 * ld / 5.0 - 2.0 * 100.0 * ld / 25.0 - smn * ln_n - 90.0;
    CHECK(podc::evaluate(base, s) == Approx(base_expect).margin(1e-12));
    CHECK(podc::evaluate_branches(base, s).branch == -1);

    podc::lyap_spec w{podc::lyap_family::lower_W, 1, 2, p};
    // l = 1, k = 2: coefficient 3 (2m + k - l) m = 3 * 5 * 2 = 30, exponent k - l + 1 = 2.
    const double w_expect = 100.0 - 30.0 * 100.0 * ld / 25.0 - 90.0;
    CHECK(podc::evaluate(w, s) == Approx(w_expect).margin(1e-12));

    podc::lyap_spec tail{podc::lyap_family::tail_sum_U, 0, 0, p};
    // m = 2, b = 3: the tail sum 4..b is empty... m+2 = 4 > b, so zero.
    CHECK(podc::evaluate(tail, s) == 0.0);
    podc::lyap_params p1 = p;
    p1.m = 1;
    podc::lyap_spec tail1{podc::lyap_family::tail_sum_U, 0, 0, p1};
    CHECK(podc::evaluate(tail1, s) == Approx(10.0));    // s_3
}

TEST_CASE("chained families take the minimum of anchor and own branches", "[lyapunov]") {
    const auto p = make_params(100.0, 0.3, 74.88, 5.0, 2, 3);
    podc::lyap_spec spec{podc::lyap_family::lower_L, 1, 2, p};

    for (const auto& s : {podc::state_vector{95, 90, 0}, podc::state_vector{40, 10, 0},
                          podc::state_vector{99, 20, 5}}) {
        const double anchor = podc::detail::lowL_V(2, 2, p, s);
        const double own = podc::detail::lowL_V(1, 2, p, s);
        const auto got = podc::evaluate_branches(spec, s);
        CHECK(got.value == Approx(std::min(anchor, own)).margin(1e-12));
        CHECK(got.branch == (anchor <= own ? 0 : 1));
    }

    // i = 0 is the pure anchor-minus-sum combination.
    podc::lyap_spec head{podc::lyap_family::lower_L, 0, 2, p};
    const podc::state_vector s{95, 90, 0};
    const double expect = podc::detail::lowL_V(2, 2, p, s) - podc::detail::lowL_V(1, 2, p, s);
    const auto got = podc::evaluate_branches(head, s);
    CHECK(got.value == Approx(expect).margin(1e-12));
    CHECK(got.branch == -1);

    // Same contract for the upper chain anchored at the above-m mass.
    podc::lyap_spec up{podc::lyap_family::upper_LU, 2, 0, p};
    const double up_anchor = podc::detail::upLU_L(3, p, s);
    const double up_own = podc::detail::upLU_L(2, p, s);
    CHECK(podc::evaluate(up, s) == Approx(std::min(up_anchor, up_own)).margin(1e-12));
}

TEST_CASE("spec validation rejects out-of-range chain indices", "[lyapunov]") {
    const auto p = make_params(100.0, 0.3, 74.88, 5.0, 2, 3);
    CHECK_THROWS_AS(podc::validate_spec({podc::lyap_family::lower_L, 2, 2, p}),
                    podc::config_error);    // i must be < k
    CHECK_THROWS_AS(podc::validate_spec({podc::lyap_family::lower_L, 0, 3, p}),
                    podc::config_error);    // k must be <= m
    CHECK_THROWS_AS(podc::validate_spec({podc::lyap_family::lower_W, 0, 2, p}),
                    podc::config_error);    // i must be >= 1
    CHECK_THROWS_AS(podc::validate_spec({podc::lyap_family::upper_LU, 3, 0, p}),
                    podc::config_error);    // i must be <= m
    podc::lyap_params bad = p;
    bad.d = 1.0;
    CHECK_THROWS_AS(podc::validate_spec({podc::lyap_family::base_v1, 0, 0, bad}),
                    podc::config_error);
    CHECK_NOTHROW(podc::validate_spec({podc::lyap_family::lower_L, 1, 2, p}));
}

TEST_CASE("family names round-trip", "[lyapunov]") {
    using podc::lyap_family;
    for (auto f : {lyap_family::base_v1, lyap_family::lower_L, lyap_family::lower_W,
                   lyap_family::lower_Z, lyap_family::lower_W_tilde, lyap_family::upper_LU,
                   lyap_family::tail_sum_U, lyap_family::upper_W_tilde})
        CHECK(podc::family_from_string(podc::to_string(f)) == f);
    CHECK_THROWS_AS(podc::family_from_string("nonsense"), podc::config_error);
}

TEST_CASE("canonical regions carry the documented side conditions", "[lyapunov]") {
    const auto p = make_params(1000.0, 0.3, 900.0, 10.0, 2, 5);

    // Tail family: cap on s_{m+1} at n/2, floor of 1 on s_{m+2}.
    const auto tail_reg =
        podc::canonical_region({podc::lyap_family::tail_sum_U, 0, 0, p});
    REQUIRE(tail_reg.coords.size() == 2);
    CHECK(tail_reg.caps.empty());
    CHECK(tail_reg.coords[0].level == 3);
    CHECK_FALSE(tail_reg.coords[0].is_floor);
    CHECK(tail_reg.coords[0].bound == Approx(500.0));
    CHECK(tail_reg.coords[1].level == 4);
    CHECK(tail_reg.coords[1].is_floor);
    CHECK(tail_reg.coords[1].bound == Approx(1.0));

    // Upper-chain anchor: a floor from the lower band at level m-1 plus a cap
    // on the tail mass.
    const auto up_reg = podc::canonical_region({podc::lyap_family::upper_LU, 2, 0, p});
    REQUIRE(up_reg.coords.size() == 1);
    REQUIRE(up_reg.caps.size() == 1);
    CHECK(up_reg.coords[0].level == 1);
    CHECK(up_reg.coords[0].bound == Approx(podc::lower_band_level(1000.0, 2, 10.0, 1)));
    CHECK(up_reg.caps[0].spec.family == podc::lyap_family::tail_sum_U);
    CHECK(up_reg.caps[0].cap == Approx(p.B_mplus2));

    // Head of the lower chain: cap on the next element plus plateau floors.
    const auto low_reg = podc::canonical_region({podc::lyap_family::lower_L, 0, 2, p});
    REQUIRE(low_reg.caps.size() == 1);
    CHECK(low_reg.caps[0].spec.i == 1);
    CHECK(low_reg.caps[0].cap == Approx(p.smn() * p.ln_n()));
    REQUIRE(low_reg.coords.size() == 1);
    CHECK(low_reg.coords[0].level == 1);
    CHECK(low_reg.coords[0].bound ==
          Approx(1000.0 - 2.5 * 2 * 1000.0 * std::log(10.0) / 10.0));

    // Plain drift statements carry no side conditions.
    CHECK(podc::canonical_region({podc::lyap_family::base_v1, 0, 0, p}).caps.empty());
    CHECK(podc::canonical_region({podc::lyap_family::base_v1, 0, 0, p}).coords.empty());
}

TEST_CASE("region membership honors floors, caps, and value conditions", "[lyapunov]") {
    podc::region_spec reg;
    reg.n = 10;
    reg.coords.push_back({1, 5.0, true});      // s_1 >= 5
    reg.coords.push_back({2, 3.0, false});     // s_2 <= 3
    CHECK(reg.member(podc::state_vector{6, 2}));
    CHECK_FALSE(reg.member(podc::state_vector{4, 2}));
    CHECK_FALSE(reg.member(podc::state_vector{8, 4}));

    const auto p = make_params(10.0, 0.3, 5.0, 3.0, 1, 2);
    reg.caps.push_back({{podc::lyap_family::tail_sum_U, 0, 0, p}, 0.5});
    // tail here is s_3.. beyond b=2, so always 0 <= 0.5: unchanged.
    CHECK(reg.member(podc::state_vector{6, 2}));
}

TEST_CASE("drift scan certifies the base function at n=100 and reports emptiness below",
          "[lyapunov]") {
    const double gamma = 0.3;
    podc::scan_options opts;
    opts.budget = 256;
    opts.seed = 3;
    opts.target = podc::drift_target::template_target;

    {
        const std::int64_t n = 100;
        const auto sol = podc::solve_implicit_d(n, gamma, 1);
        const int d = static_cast<int>(std::llround(sol.d_real));
        const auto cfg = make_cfg(n, podc::lambda_for(100.0, gamma), d, 4, gamma);
        const auto p = podc::lyap_params::from(cfg, 1, static_cast<double>(d));
        podc::lyap_spec sp{podc::lyap_family::base_v1, 0, 0, p};
        const auto rep = podc::drift_scan(sp, podc::canonical_region(sp), cfg, opts);
        INFO("max drift " << rep.max_drift << " target " << rep.target_value);
        CHECK_FALSE(rep.empty_region);
        CHECK(rep.fraction_satisfying == 1.0);
        CHECK(rep.counterexamples.empty());
        CHECK(rep.max_drift <= rep.target_value);
    }
    {
        // One decade down the value function is negative everywhere, so the
        // level set {V >= 0} the drift statement speaks about is empty.
        const std::int64_t n = 10;
        const auto sol = podc::solve_implicit_d(n, gamma, 1);
        const int d = static_cast<int>(std::llround(sol.d_real));
        const auto cfg = make_cfg(n, podc::lambda_for(10.0, gamma), d, 4, gamma);
        const auto p = podc::lyap_params::from(cfg, 1, static_cast<double>(d));
        podc::lyap_spec sp{podc::lyap_family::base_v1, 0, 0, p};
        const auto rep = podc::drift_scan(sp, podc::canonical_region(sp), cfg, opts);
        CHECK(rep.empty_region);
        CHECK(rep.corners_evaluated + rep.sampled_evaluated == 0);
    }
}

TEST_CASE("tail-mass drift is negative already at n=10", "[lyapunov]") {
    const std::int64_t n = 10;
    const double gamma = 0.3;
    const auto sol = podc::solve_implicit_d(n, gamma, 1);
    const int d = static_cast<int>(std::llround(sol.d_real));
    const auto cfg = make_cfg(n, podc::lambda_for(10.0, gamma), d, 4, gamma);
    const auto p = podc::lyap_params::from(cfg, 1, static_cast<double>(d));
    podc::lyap_spec sp{podc::lyap_family::tail_sum_U, 0, 0, p};

    podc::scan_options opts;
    opts.budget = 256;
    opts.seed = 3;
    opts.target = podc::drift_target::zero;
    const auto rep = podc::drift_scan(sp, podc::canonical_region(sp), cfg, opts);
    CHECK_FALSE(rep.empty_region);
    CHECK(rep.fraction_satisfying == 1.0);
    CHECK(rep.target_value == 0.0);
    CHECK(rep.max_drift < 0.0);
}

TEST_CASE("tail-bound constants read off a tiny chain", "[lyapunov]") {
    const auto cfg = make_cfg(2, 1.5, 2, 2);
    const auto ro = podc::read_off_tail_params(
        [](const podc::state_vector& s) { return static_cast<double>(s.level(2)); }, cfg);
    CHECK(ro.B == Approx(2.0));
    CHECK(ro.gamma_drift == Approx(2.0));
    CHECK(ro.nu_max == Approx(1.0));
    CHECK(ro.q_max == Approx(1.5));    // arrival to level 2 from (2, 0)

    podc::tail_bound_input in;
    in.B = ro.B;
    in.gamma_drift = ro.gamma_drift;
    in.delta = 0.0;
    in.nu_max = ro.nu_max;
    in.q_max = ro.q_max;
    in.prob_not_E = 0.0;
    in.j = 3;
    const auto tb = podc::ssc_tail_bound(in);
    CHECK(tb.alpha == Approx(3.0 / 7.0));
    CHECK(tb.beta == Approx(1.0));
    CHECK(tb.log_bound == Approx(3.0 * std::log(3.0 / 7.0)));
}

TEST_CASE("template tail parameters", "[lyapunov]") {
    const auto in = podc::template_tail_input(100.0, 1);
    CHECK(in.gamma_drift == Approx(10.0 * std::log(100.0)));
    CHECK(in.nu_max == 1.0);
    CHECK(in.q_max == 100.0);
    CHECK(in.delta == 100.0);
    CHECK(in.j == 24);    // ceil(10 ln(100) / 2)

    // With those constants the pre-escape bound is n^{-m log n / 4}: check the
    // exponent ordering alpha^j <= that target.
    const auto tb = podc::ssc_tail_bound(in);
    const double target = -1.0 * std::log(100.0) * std::log(100.0) / 4.0;
    CHECK(static_cast<double>(in.j) * std::log(tb.alpha) <= target);
}

TEST_CASE("tail-bound input validation", "[lyapunov]") {
    podc::tail_bound_input in;
    in.gamma_drift = 0.0;
    in.nu_max = 1.0;
    CHECK_THROWS_AS(podc::ssc_tail_bound(in), podc::config_error);
    in.gamma_drift = 1.0;
    in.nu_max = 0.0;
    CHECK_THROWS_AS(podc::ssc_tail_bound(in), podc::config_error);
    in.nu_max = 1.0;
    in.prob_not_E = 1.5;
    CHECK_THROWS_AS(podc::ssc_tail_bound(in), podc::config_error);
    in.prob_not_E = 0.0;
    in.j = 0;
    CHECK_THROWS_AS(podc::ssc_tail_bound(in), podc::config_error);
}
