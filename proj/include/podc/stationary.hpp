#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/generator.hpp"
#include "podc/state.hpp"

namespace podc {

// All occupancy states n >= s_1 >= ... >= s_b >= 0, enumerated in a fixed
// (lexicographic) order. The count is C(n+b, b), so this is only for small
// systems; callers guard with max_states.
inline void enumerate_states_rec(std::int64_t n, int b, state_vector& cur, int level,
                                 std::vector<state_vector>& out) {
    if (level > b) {
        out.push_back(cur);
        return;
    }
    const std::int64_t hi = level == 1 ? n : cur.level(level - 1);
    for (std::int64_t v = 0; v <= hi; ++v) {
        cur.level(level) = v;
        enumerate_states_rec(n, b, cur, level + 1, out);
    }
}

inline std::vector<state_vector> enumerate_states(std::int64_t n, int b,
                                                  std::size_t max_states = 200000) {
    double count = 1.0;
    for (int i = 1; i <= b; ++i) count *= static_cast<double>(n + i) / i;
    if (count > static_cast<double>(max_states))
        throw config_error("state-space-too-large: " + std::to_string(count) + " states exceeds cap " +
                           std::to_string(max_states));
    std::vector<state_vector> out;
    out.reserve(static_cast<std::size_t>(count) + 1);
    state_vector cur(b);
    enumerate_states_rec(n, b, cur, 1, out);
    return out;
}

struct stationary_distribution {
    std::vector<state_vector> states;
    std::vector<double> probs;
    std::map<state_vector, std::size_t> index;
    double residual = 0.0;    // max |pi Q| over columns

    std::size_t idx(const state_vector& s) const {
        auto it = index.find(s);
        if (it == index.end()) throw config_error("state not in enumerated space");
        return it->second;
    }

    double prob_si_ge(int i, std::int64_t k) const {
        double p = 0.0;
        for (std::size_t j = 0; j < states.size(); ++j)
            if (states[j].level(i) >= k) p += probs[j];
        return p;
    }

    double mean_si(int i) const {
        double m = 0.0;
        for (std::size_t j = 0; j < states.size(); ++j)
            m += probs[j] * static_cast<double>(states[j].level(i));
        return m;
    }

    template <typename F>
    double expectation(F&& f) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < states.size(); ++j) acc += probs[j] * f(states[j]);
        return acc;
    }
};

// Solve pi Q = 0, sum(pi) = 1 by sparse LU on Q^T with one row replaced by
// the normalization constraint. The residual of the *original* balance
// equations is verified to 1e-10.
inline stationary_distribution solve_stationary_exact(const system_config& cfg,
                                                      std::size_t max_states = 200000) {
    stationary_distribution dist;
    dist.states = enumerate_states(cfg.n, cfg.b, max_states);
    const auto N = dist.states.size();
    for (std::size_t j = 0; j < N; ++j) dist.index[dist.states[j]] = j;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(N * (2 * static_cast<std::size_t>(cfg.b) + 2));
    for (std::size_t j = 0; j < N; ++j) {
        double total = 0.0;
        for (const auto& [target, rate] : generator_row(dist.states[j], cfg)) {
            const std::size_t t = dist.index.at(target);
            if (t != 0)    // row 0 of Q^T is replaced by the normalization row
                trips.emplace_back(static_cast<int>(t), static_cast<int>(j), rate);
            total += rate;
        }
        if (j != 0) trips.emplace_back(static_cast<int>(j), static_cast<int>(j), -total);
    }
    for (std::size_t j = 0; j < N; ++j) trips.emplace_back(0, static_cast<int>(j), 1.0);

    Eigen::SparseMatrix<double> A(static_cast<int>(N), static_cast<int>(N));
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw numeric_error("stationary solve: LU factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(N));
    rhs(0) = 1.0;
    Eigen::VectorXd pi = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw numeric_error("stationary solve: back-substitution failed");

    dist.probs.assign(N, 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        double p = pi(static_cast<int>(j));
        if (p < 0.0) {
            if (p < -1e-9) throw numeric_error("stationary solve: negative probability " + std::to_string(p));
            p = 0.0;
        }
        dist.probs[j] = p;
        sum += p;
    }
    for (auto& p : dist.probs) p /= sum;

    // Balance residual against the untouched generator.
    std::vector<double> res(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        double total = 0.0;
        for (const auto& [target, rate] : generator_row(dist.states[j], cfg)) {
            res[dist.index.at(target)] += dist.probs[j] * rate;
            total += rate;
        }
        res[j] -= dist.probs[j] * total;
    }
    for (double r : res) dist.residual = std::max(dist.residual, std::abs(r));
    if (dist.residual > 1e-10)
        throw numeric_error("stationary solve: balance residual " + std::to_string(dist.residual) +
                            " exceeds 1e-10");
    return dist;
}

}  // namespace podc
