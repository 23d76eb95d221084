#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "podc/errors.hpp"

namespace podc {

// Occupancy vector: s[i-1] = number of queues with length >= i, i = 1..b.
// Boundary conventions s_0 = n and s_{b+1} = 0 are implicit.
struct state_vector {
    std::vector<std::int64_t> s;

    state_vector() = default;
    explicit state_vector(int b) : s(static_cast<size_t>(b), 0) {}
    state_vector(std::initializer_list<std::int64_t> init) : s(init) {}

    int b() const { return static_cast<int>(s.size()); }

    // Level access with the boundary conventions; i in [0, b+1].
    std::int64_t at(int i, std::int64_t n) const {
        if (i <= 0) return n;
        if (i > b()) return 0;
        return s[static_cast<size_t>(i - 1)];
    }

    std::int64_t& level(int i) { return s[static_cast<size_t>(i - 1)]; }
    std::int64_t level(int i) const { return s[static_cast<size_t>(i - 1)]; }

    std::int64_t total_jobs() const {
        return std::accumulate(s.begin(), s.end(), std::int64_t{0});
    }

    bool is_valid(std::int64_t n) const {
        std::int64_t prev = n;
        for (std::int64_t v : s) {
            if (v < 0 || v > prev) return false;
            prev = v;
        }
        return true;
    }

    void require_valid(std::int64_t n) const {
        if (!is_valid(n)) throw config_error("state is outside the occupancy cone");
    }

    bool operator==(const state_vector& o) const { return s == o.s; }
    bool operator<(const state_vector& o) const { return s < o.s; }
};

}  // namespace podc
