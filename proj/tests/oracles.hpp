// Independent reference implementations used to check the library.
// Everything here is deliberately dumb and self-contained: plain bisection,
// exhaustive enumeration, dense Gaussian elimination. No podc/ includes.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracles {

// Bisection for a sign change of f on [lo, hi]. Assumes f(lo) and f(hi) have
// opposite signs; returns the midpoint after enough halvings for ~1e-13 rel.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    assert(flo * fhi < 0.0);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

// Root of d^m = 2 m n^gamma log d on a caller-chosen interval.
inline double implicit_d_root(double n, double gamma, int m, double lo, double hi) {
    const double c = 2.0 * m * std::pow(n, gamma);
    return bisect([&](double d) { return std::pow(d, m) - c * std::log(d); }, lo, hi);
}

// Upper root of m = gamma*log n/log d + log(2 m log d)/log d in m, by
// bisection. f(m) = m - rhs(m) tends to +inf at both ends and has its
// minimum at m = 1/log d, so the meaningful (larger) root is bracketed by
// [1/log d, 64].
inline double m_root(double n, double gamma, double d) {
    const double ld = std::log(d);
    auto f = [&](double m) { return m - gamma * std::log(n) / ld - std::log(2.0 * m * ld) / ld; };
    return bisect(f, 1.0 / ld, 64.0);
}

// Stationary law of a birth-death chain on {0..K}: up[k] is the k->k+1 rate,
// down[k] the k->k-1 rate. Detailed balance, normalized.
inline std::vector<double> birth_death_stationary(const std::vector<double>& up,
                                                  const std::vector<double>& down) {
    const size_t K = down.size();  // states 0..K
    assert(up.size() == K);
    std::vector<double> pi(K + 1, 0.0);
    pi[0] = 1.0;
    for (size_t k = 0; k < K; ++k) pi[k + 1] = pi[k] * up[k] / down[k];
    double z = 0.0;
    for (double p : pi) z += p;
    for (double& p : pi) p /= z;
    return pi;
}

// Exhaustively enumerate all n^d ordered sample tuples over queue indices and
// count, for each level j, how many tuples have min sampled length == j.
// Returns counts[j] for j in [0, max_len]; sum of counts == n^d.
inline std::vector<std::uint64_t> min_length_tuple_counts(const std::vector<int>& lengths,
                                                          int d, int max_len) {
    const int n = static_cast<int>(lengths.size());
    std::vector<std::uint64_t> counts(static_cast<size_t>(max_len) + 1, 0);
    std::vector<int> idx(static_cast<size_t>(d), 0);
    while (true) {
        int mn = lengths[static_cast<size_t>(idx[0])];
        for (int t = 1; t < d; ++t) mn = std::min(mn, lengths[static_cast<size_t>(idx[t])]);
        ++counts[static_cast<size_t>(mn)];
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - 1) {
            idx[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<size_t>(pos)];
    }
    return counts;
}

// Scalar fixed point lambda*(1 - (x/n)^d) = x on [0, n].
inline double fixed_point_b1(double n, double lambda, double d) {
    return bisect([&](double x) { return lambda * (1.0 - std::pow(x / n, d)) - x; }, 0.0, n);
}

// ---- Exact stationary law of the tiny per-queue system, end to end. ----
// States are sorted (non-increasing) queue-length vectors of length n with
// entries in [0, b]. Rates come from exhaustive tuple enumeration (arrivals)
// and per-queue completions (departures). Solved by dense Gaussian
// elimination. This is an independent path around both the occupancy-vector
// generator and the sparse solver.

struct tiny_chain {
    std::vector<std::vector<int>> states;         // sorted length vectors
    std::map<std::vector<int>, size_t> index;     // state -> id
    std::vector<double> pi;                       // stationary probabilities
};

inline void enumerate_sorted_lengths(int n, int b, std::vector<int>& cur,
                                     std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    const int hi = cur.empty() ? b : cur.back();
    for (int v = hi; v >= 0; --v) {
        cur.push_back(v);
        enumerate_sorted_lengths(n, b, cur, out);
        cur.pop_back();
    }
}

inline std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                       std::vector<double> rhs) {
    const size_t N = rhs.size();
    for (size_t col = 0; col < N; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < N; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        std::swap(rhs[piv], rhs[col]);
        if (std::abs(A[col][col]) < 1e-300) throw std::runtime_error("singular");
        for (size_t r = 0; r < N; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (size_t c = col; c < N; ++c) A[r][c] -= f * A[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(N);
    for (size_t i = 0; i < N; ++i) x[i] = rhs[i] / A[i][i];
    return x;
}

inline tiny_chain per_queue_stationary(int n, int b, int d, double lambda) {
    tiny_chain ch;
    std::vector<int> cur;
    enumerate_sorted_lengths(n, b, cur, ch.states);
    for (size_t i = 0; i < ch.states.size(); ++i) ch.index[ch.states[i]] = i;
    const size_t N = ch.states.size();
    const double nd = std::pow(static_cast<double>(n), d);

    // A = Q^T with the first row replaced by the normalization constraint.
    std::vector<std::vector<double>> A(N, std::vector<double>(N, 0.0));
    auto add_rate = [&](size_t from, const std::vector<int>& to_lengths, double rate) {
        std::vector<int> key = to_lengths;
        std::sort(key.begin(), key.end(), std::greater<int>());
        const size_t to = ch.index.at(key);
        if (to == from) return;
        A[to][from] += rate;
        A[from][from] -= rate;
    };
    for (size_t sid = 0; sid < N; ++sid) {
        const auto& st = ch.states[sid];
        const auto counts = min_length_tuple_counts(st, d, b);
        for (int j = 0; j < b; ++j) {  // arrival joining a queue of length j
            if (counts[static_cast<size_t>(j)] == 0) continue;
            const double rate = lambda * static_cast<double>(counts[static_cast<size_t>(j)]) / nd;
            std::vector<int> nxt = st;
            for (auto& q : nxt)
                if (q == j) { ++q; break; }
            add_rate(sid, nxt, rate);
        }
        for (int j = 1; j <= b; ++j) {  // one completion at a queue of length j
            int cnt = 0;
            for (int q : st) cnt += (q == j) ? 1 : 0;
            if (cnt == 0) continue;
            std::vector<int> nxt = st;
            for (auto& q : nxt)
                if (q == j) { --q; break; }
            add_rate(sid, nxt, static_cast<double>(cnt));
        }
    }
    std::vector<double> rhs(N, 0.0);
    for (size_t c = 0; c < N; ++c) A[0][c] = 1.0;
    rhs[0] = 1.0;
    ch.pi = solve_dense(A, rhs);
    return ch;
}

// Marginal P(s_i >= k) under the tiny chain, where s_i counts queues with
// length >= i.
inline double tiny_prob_si_ge(const tiny_chain& ch, int i, int k) {
    double p = 0.0;
    for (size_t sid = 0; sid < ch.states.size(); ++sid) {
        int si = 0;
        for (int q : ch.states[sid]) si += (q >= i) ? 1 : 0;
        if (si >= k) p += ch.pi[sid];
    }
    return p;
}

inline double tiny_mean_si(const tiny_chain& ch, int i) {
    double mean = 0.0;
    for (size_t sid = 0; sid < ch.states.size(); ++sid) {
        int si = 0;
        for (int q : ch.states[sid]) si += (q >= i) ? 1 : 0;
        mean += si * ch.pi[sid];
    }
    return mean;
}

}  // namespace oracles
