#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "podc/generator.hpp"
#include "podc/per_queue.hpp"
#include "podc/simulate.hpp"
#include "podc/stationary.hpp"

#include "oracles.hpp"

using Catch::Approx;

namespace {

podc::system_config make_cfg(std::int64_t n, double lambda, int d, int b,
                             std::uint64_t seed = 1) {
    podc::system_config cfg;
    cfg.n = n;
    cfg.lambda = lambda;
    cfg.d = d;
    cfg.b = b;
    cfg.seed = seed;
    if (d > n) cfg.allow_d_gt_n = true;
    cfg.validate();
    return cfg;
}

// Job-length multiset implied by an occupancy vector: #queues with length
// exactly j is s_j - s_{j+1}.
std::vector<int> lengths_of(const podc::state_vector& s, std::int64_t n) {
    std::vector<int> lengths;
    for (int j = 0; j <= s.b(); ++j) {
        const auto count = s.at(j, n) - s.at(j + 1, n);
        for (std::int64_t c = 0; c < count; ++c) lengths.push_back(j);
    }
    return lengths;
}

}    // namespace

TEST_CASE("transition classes on a worked two-server example", "[ctmc]") {
    const auto cfg = make_cfg(2, 1.5, 2, 2);
    const podc::state_vector s{1, 0};

    const auto classes = podc::transition_classes(s, cfg);
    REQUIRE(classes.size() == 4);    // arrivals to levels 1..2, departures from 1..2

    CHECK(classes[0].kind == podc::event_kind::arrival_to_level);
    CHECK(classes[0].level == 1);
    CHECK(classes[0].rate == Approx(1.5 * (1.0 - 0.25)));    // (s0/n)^2 - (s1/n)^2

    CHECK(classes[1].kind == podc::event_kind::arrival_to_level);
    CHECK(classes[1].level == 2);
    CHECK(classes[1].rate == Approx(1.5 * 0.25));

    CHECK(classes[2].kind == podc::event_kind::departure_from_level);
    CHECK(classes[2].level == 1);
    CHECK(classes[2].rate == Approx(1.0));    // s1 - s2

    CHECK(classes[3].kind == podc::event_kind::departure_from_level);
    CHECK(classes[3].level == 2);
    CHECK(classes[3].rate == Approx(0.0));
}

TEST_CASE("arrival rates match exhaustive sample-tuple enumeration", "[ctmc]") {
    // For every state: the chance the minimum of d uniform picks has length
    // j-1 times lambda must equal the level-j arrival rate.
    for (std::int64_t n = 1; n <= 4; ++n) {
        for (int b = 1; b <= 3; ++b) {
            for (int d = 1; d <= 3; ++d) {
                const auto cfg = make_cfg(n, 0.7 * static_cast<double>(n), d, b);
                const double nd = std::pow(static_cast<double>(n), d);
                for (const auto& s : podc::enumerate_states(n, b)) {
                    const auto counts =
                        oracles::min_length_tuple_counts(lengths_of(s, n), d, b);
                    std::uint64_t total = 0;
                    for (auto c : counts) total += c;
                    REQUIRE(total == static_cast<std::uint64_t>(nd));
                    for (int i = 1; i <= b; ++i) {
                        const double expect =
                            cfg.lambda * static_cast<double>(counts[static_cast<std::size_t>(i - 1)]) / nd;
                        const double got = podc::arrival_rate(s, i, cfg);
                        REQUIRE(std::abs(got - expect) <= 1e-12 * std::max(cfg.lambda, 1.0));
                    }
                }
            }
        }
    }
}

TEST_CASE("generator rows are consistent with the transition classes", "[ctmc]") {
    const auto cfg = make_cfg(3, 2.1, 2, 3);
    for (const auto& s : podc::enumerate_states(3, 3)) {
        const auto row = podc::generator_row(s, cfg);
        double total = 0.0;
        for (const auto& [target, rate] : row) {
            REQUIRE(rate > 0.0);
            REQUIRE(target.is_valid(3));
            REQUIRE_FALSE(target == s);
            total += rate;
        }
        CHECK(total == Approx(podc::total_exit_rate(s, cfg)).margin(1e-12));
    }
}

TEST_CASE("apply_event moves exactly one level", "[ctmc]") {
    podc::state_vector s{2, 1, 0};
    auto up = podc::apply_event(s, podc::event_kind::arrival_to_level, 3);
    CHECK(up == podc::state_vector{2, 1, 1});
    auto down = podc::apply_event(s, podc::event_kind::departure_from_level, 2);
    CHECK(down == podc::state_vector{2, 0, 0});
}

TEST_CASE("single server reduces to a birth-death chain for every d", "[ctmc]") {
    const int b = 5;
    const double lambda = 0.5;
    const std::vector<double> up(b, lambda);
    const std::vector<double> down(b, 1.0);
    const auto pi = oracles::birth_death_stationary(up, down);

    for (int d : {1, 2, 3}) {
        const auto cfg = make_cfg(1, lambda, d, b);
        const auto dist = podc::solve_stationary_exact(cfg);
        REQUIRE(dist.states.size() == static_cast<std::size_t>(b) + 1);
        for (std::size_t j = 0; j < dist.states.size(); ++j) {
            const auto len = dist.states[j].total_jobs();
            CHECK(dist.probs[j] == Approx(pi[static_cast<std::size_t>(len)]).margin(1e-12));
        }
        // Truncated-geometric busy probability: (rho - rho^{b+1})/(1 - rho^{b+1}).
        CHECK(dist.prob_si_ge(1, 1) == Approx(31.0 / 63.0).margin(1e-12));
    }
}

TEST_CASE("occupancy-chain stationary law matches the per-queue chain", "[ctmc]") {
    // The occupancy vector is a lumping of the full per-queue process; both
    // must produce the same stationary marginals.
    const auto cfg = make_cfg(3, 1.8, 2, 2);
    const auto dist = podc::solve_stationary_exact(cfg);
    CHECK(dist.residual <= 1e-10);

    const auto fine = oracles::per_queue_stationary(3, 2, 2, 1.8);
    for (int i = 1; i <= 2; ++i) {
        CHECK(dist.mean_si(i) == Approx(oracles::tiny_mean_si(fine, i)).margin(1e-8));
        for (std::int64_t k = 1; k <= 3; ++k)
            CHECK(dist.prob_si_ge(i, k) ==
                  Approx(oracles::tiny_prob_si_ge(fine, i, k)).margin(1e-8));
    }
}

TEST_CASE("stationary throughput identity", "[ctmc]") {
    // Accepted arrival rate equals departure rate in steady state:
    // lambda * E[1 - (s_b/n)^d] = E[s_1].
    const auto cfg = make_cfg(3, 2.4, 2, 3);
    const auto dist = podc::solve_stationary_exact(cfg);
    const double accepted = dist.expectation([&](const podc::state_vector& s) {
        return cfg.lambda * (1.0 - podc::ratio_pow(s.level(3), cfg.n, 2));
    });
    const double busy = dist.mean_si(1);
    CHECK(accepted == Approx(busy).epsilon(1e-10));
}

TEST_CASE("simulation estimates agree with the exact stationary law", "[ctmc]") {
    const auto cfg = make_cfg(3, 2.1, 2, 3, /*seed=*/11);
    const auto dist = podc::solve_stationary_exact(cfg);

    podc::sim_options opts;
    opts.horizon.kind = podc::sim_horizon::by::events;
    opts.horizon.n_events = 400000;
    opts.n_batches = 32;
    for (int i = 1; i <= cfg.b; ++i)
        opts.indicators.push_back({i, true, 2, "s" + std::to_string(i) + "_ge_2"});
    const auto res = podc::simulate(cfg, opts);

    for (int i = 1; i <= cfg.b; ++i) {
        const auto& est = res.est.mean_s[static_cast<std::size_t>(i - 1)];
        const double exact = dist.mean_si(i);
        INFO("level " << i << " est " << est.mean << " +- " << est.std_error
                      << " exact " << exact);
        CHECK(std::abs(est.mean - exact) <= std::max(4.0 * est.std_error, 1e-3));
    }
    for (int i = 1; i <= cfg.b; ++i) {
        const auto& ind = res.est.indicators[static_cast<std::size_t>(i - 1)];
        const double exact = dist.prob_si_ge(i, 2);
        CHECK(std::abs(ind.mean - exact) <= std::max(4.0 * ind.std_error, 1e-3));
    }
}

TEST_CASE("aggregate and per-queue simulators agree", "[ctmc]") {
    const auto cfg = make_cfg(4, 3.0, 2, 3, /*seed=*/5);

    podc::sim_options opts;
    opts.horizon.n_events = 300000;
    const auto agg = podc::simulate(cfg, opts);
    const auto fine = podc::simulate_per_queue(cfg, 300000);

    for (int i = 1; i <= cfg.b; ++i) {
        const double a = agg.est.mean_s[static_cast<std::size_t>(i - 1)].mean;
        const double f = fine.mean_s[static_cast<std::size_t>(i - 1)];
        INFO("level " << i << " aggregate " << a << " per-queue " << f);
        CHECK(std::abs(a - f) <= 0.02 * static_cast<double>(cfg.n));
    }
}

TEST_CASE("absorbed chain handling", "[ctmc]") {
    podc::system_config cfg;
    cfg.n = 2;
    cfg.lambda = 0.0;
    cfg.allow_lambda_zero = true;
    cfg.d = 2;
    cfg.b = 2;
    cfg.validate();

    // Event horizon can never finish once the all-empty state is reached.
    podc::sim_options ev;
    ev.horizon.kind = podc::sim_horizon::by::events;
    ev.horizon.n_events = 1000;
    ev.initial = podc::state_vector{2, 1};
    CHECK_THROWS_AS(podc::simulate(cfg, ev), podc::numeric_error);

    // A time horizon credits the remaining interval to the absorbed state.
    podc::sim_options tm;
    tm.horizon.kind = podc::sim_horizon::by::time;
    tm.horizon.t_end = 500.0;
    tm.warmup_fraction = 0.0;
    tm.n_batches = 8;
    tm.initial = podc::state_vector{2, 1};
    const auto res = podc::simulate(cfg, tm);
    CHECK(res.t_final == Approx(500.0));
    CHECK(res.final_state == podc::state_vector{0, 0});
    CHECK(res.est.mean_s[0].mean < 0.05);    // ~3 jobs of drain time over t=500
    CHECK(res.est.mean_s[1].mean < 0.05);
}
