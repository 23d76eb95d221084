#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "podc/bounds.hpp"
#include "podc/config.hpp"
#include "podc/errors.hpp"
#include "podc/generator.hpp"
#include "podc/state.hpp"

namespace podc {

// Catalog of the drift test functions used for the lower and upper
// concentration arguments, in the order the argument builds them up.
enum class lyap_family {
    base_v1,         // single-level anchor at the top level
    lower_L,         // chain anchored at level k, linear gaps
    lower_W,         // per-level anchors with widened constants
    lower_Z,         // chain with fluctuation-aware constants
    lower_W_tilde,   // final per-level lower envelope
    upper_LU,        // chain coupling levels 1..m to the mass above m
    tail_sum_U,      // total mass strictly above level m+1
    upper_W_tilde,   // final per-level upper envelope
};

inline const char* to_string(lyap_family f) {
    switch (f) {
        case lyap_family::base_v1: return "base_v1";
        case lyap_family::lower_L: return "lower_L";
        case lyap_family::lower_W: return "lower_W";
        case lyap_family::lower_Z: return "lower_Z";
        case lyap_family::lower_W_tilde: return "lower_W_tilde";
        case lyap_family::upper_LU: return "upper_LU";
        case lyap_family::tail_sum_U: return "tail_sum_U";
        case lyap_family::upper_W_tilde: return "upper_W_tilde";
    }
    return "?";
}

inline lyap_family family_from_string(const std::string& s) {
    for (auto f : {lyap_family::base_v1, lyap_family::lower_L, lyap_family::lower_W,
                   lyap_family::lower_Z, lyap_family::lower_W_tilde, lyap_family::upper_LU,
                   lyap_family::tail_sum_U, lyap_family::upper_W_tilde})
        if (s == to_string(f)) return f;
    throw config_error("unknown test-function family: " + s);
}

struct lyap_params {
    double n = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    double d = 0.0;
    int m = 1;
    int b = 1;
    double B_mplus2 = 1.0;    // mass level assumed above m+1 in the coupled chain

    static lyap_params from(const system_config& cfg, int m, double d) {
        lyap_params p;
        p.n = cfg.dn();
        p.gamma = cfg.gamma_effective();
        p.lambda = cfg.lambda;
        p.d = d;
        p.m = m;
        p.b = cfg.b;
        return p;
    }

    double ld() const { return std::log(d); }
    double ln_n() const { return std::log(n); }
    double smn() const { return std::sqrt(m * n); }
    double dpow(int e) const { return std::pow(d, e); }
};

// A concrete test function: family plus its chain index i and (for the lower
// families) the anchor level k.
struct lyap_spec {
    lyap_family family = lyap_family::base_v1;
    int i = 0;
    int k = 0;
    lyap_params p;
};

struct lyap_value {
    double value = 0.0;
    int branch = -1;    // -1 single expression, 0 anchor-minus-sum branch, 1 own-level branch
};

namespace detail {

inline double sv(const state_vector& s, int i, const lyap_params& p) {
    return static_cast<double>(s.at(i, static_cast<std::int64_t>(std::llround(p.n))));
}

// lower_L components: V_ik (i < k) and the anchor V_kk.
inline double lowL_V(int i, int k, const lyap_params& p, const state_vector& s) {
    if (i < k)
        return sv(s, i, p) - p.n + 3.0 * i * p.m * p.n * p.ld() / p.dpow(k - i + 1);
    return p.n - 3.0 * k * p.m * p.n * p.ld() / p.d - sv(s, k, p);
}

// lower_W per-level anchors, l in [1, k].
inline double lowW_W(int l, int k, const lyap_params& p, const state_vector& s) {
    return p.n - 3.0 * (2 * p.m + k - l) * p.m * p.n * p.ld() / p.dpow(k - l + 1) - sv(s, l, p);
}

// lower_Z components: W_ik (i < k) and the anchor W_kk.
inline double lowZ_W(int i, int k, const lyap_params& p, const state_vector& s) {
    if (i < k)
        return sv(s, i, p) - p.n + 2.0 * p.m * p.n * p.ld() / p.dpow(k - i + 1) +
               (2.0 * i + 1.0) * p.dpow(i - 1) * p.smn() * p.ln_n() +
               3.0 * (i + 1.0) * p.m * p.n * p.ld() / p.dpow(k - i + 2);
    return p.n - 2.0 * p.m * p.n * p.ld() / p.d - 2.0 * k * p.dpow(k - 1) * p.smn() * p.ln_n() -
           10.0 * p.m * p.m * p.n * p.ld() / (p.d * p.d) - sv(s, k, p);
}

// lower final envelope.
inline double lowWt(int j, int k, const lyap_params& p, const state_vector& s) {
    return p.n - 2.0 * p.m * p.n * p.ld() / p.dpow(k - j + 1) -
           (4.0 * p.m - j) * p.dpow(j - 1) * p.smn() * p.ln_n() -
           16.0 * (k - j + 1.0) * p.m * p.m * p.n * p.ld() * p.ld() / p.dpow(k - j + 2) - sv(s, j, p);
}

// upper_LU components: L_l for l in [1, m] and the above-m mass anchor L_{m+1}.
inline double upLU_L(int l, const lyap_params& p, const state_vector& s) {
    if (l <= p.m)
        return p.n - 2.0 * p.m * p.n * p.ld() / p.dpow(p.m - l + 1) +
               3.0 * l * p.dpow(l - 1) * p.smn() * p.ln_n() +
               l * p.m * p.n * p.ld() / p.dpow(p.m - l + 2) - sv(s, l, p);
    double mass = 0.0;
    for (int j = p.m + 1; j <= p.b; ++j) mass += sv(s, j, p);
    const double x_factor = 1.0 + (p.b - 1.0) * (p.B_mplus2 >= 2.0 ? 1.0 : 0.0);
    double block = 8.0 * p.m * p.dpow(p.m - 1) * p.smn() * p.ln_n() +
                   18.0 * p.m * p.m * p.m * p.n * p.ld() * p.ld() / (p.d * p.d);
    if (p.m > 1) block += std::pow(p.n, 1.0 - p.gamma);
    return mass - x_factor * block;
}

inline double tail_sum(const lyap_params& p, const state_vector& s) {
    double mass = 0.0;
    for (int j = p.m + 2; j <= p.b; ++j) mass += sv(s, j, p);
    return mass;
}

// upper final envelope; reuses the band building block B_j.
inline double upWt(int j, const lyap_params& p, const state_vector& s) {
    return sv(s, j, p) - p.n + 2.0 * p.m * p.n * p.ld() / p.dpow(p.m - j + 1) -
           b_term(p.n, p.gamma, p.m, p.d, j) -
           2.0 * (p.m - j) * p.m * p.n * p.ld() / p.dpow(p.m - j + 2);
}

}  // namespace detail

inline void validate_spec(const lyap_spec& sp) {
    const auto& p = sp.p;
    if (p.m < 1 || p.b < 1 || p.n < 1 || p.d <= 1.0)
        throw config_error("test function needs n >= 1, m >= 1, b >= 1, d > 1");
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw config_error(std::string("index out of range for ") + to_string(sp.family) +
                                    ": " + what);
    };
    switch (sp.family) {
        case lyap_family::base_v1:
        case lyap_family::tail_sum_U: break;
        case lyap_family::lower_L:
            need(sp.k >= 1 && sp.k <= p.m, "k in [1, m]");
            need(sp.i >= 0 && sp.i <= sp.k - 1, "i in [0, k-1]");
            break;
        case lyap_family::lower_W:
            need(sp.k >= 1 && sp.k <= p.m, "k in [1, m]");
            need(sp.i >= 1 && sp.i <= sp.k, "i in [1, k]");
            break;
        case lyap_family::lower_Z:
            need(sp.k >= 1 && sp.k <= p.m, "k in [1, m]");
            need(sp.i >= 0 && sp.i <= sp.k - 1, "i in [0, k-1]");
            break;
        case lyap_family::lower_W_tilde:
            need(sp.k >= 1 && sp.k <= p.m, "k in [1, m]");
            need(sp.i >= 1 && sp.i <= sp.k, "i in [1, k]");
            break;
        case lyap_family::upper_LU:
            need(sp.i >= 0 && sp.i <= p.m, "i in [0, m]");
            break;
        case lyap_family::upper_W_tilde:
            need(sp.i >= 1 && sp.i <= p.m, "i in [1, m]");
            break;
    }
}

inline lyap_value evaluate_branches(const lyap_spec& sp, const state_vector& s) {
    validate_spec(sp);
    const auto& p = sp.p;
    using namespace detail;
    switch (sp.family) {
        case lyap_family::base_v1: {
            const double v = p.n - 2.0 * p.m * p.n * p.ld() / p.d - 2.0 * p.n * p.ld() / (p.d * p.d) -
                             p.smn() * p.ln_n() - sv(s, 1, p);
            return {v, -1};
        }
        case lyap_family::lower_L: {
            double anchor = lowL_V(sp.k, sp.k, p, s);
            for (int j = sp.i + 1; j <= sp.k - 1; ++j) anchor -= lowL_V(j, sp.k, p, s);
            if (sp.i == 0) return {anchor, -1};
            const double own = lowL_V(sp.i, sp.k, p, s);
            return anchor <= own ? lyap_value{anchor, 0} : lyap_value{own, 1};
        }
        case lyap_family::lower_W:
            return {lowW_W(sp.i, sp.k, p, s), -1};
        case lyap_family::lower_Z: {
            double anchor = lowZ_W(sp.k, sp.k, p, s);
            for (int l = sp.i + 1; l <= sp.k - 1; ++l) anchor -= lowZ_W(l, sp.k, p, s);
            if (sp.i == 0) return {anchor, -1};
            const double own = lowZ_W(sp.i, sp.k, p, s);
            return anchor <= own ? lyap_value{anchor, 0} : lyap_value{own, 1};
        }
        case lyap_family::lower_W_tilde:
            return {lowWt(sp.i, sp.k, p, s), -1};
        case lyap_family::upper_LU: {
            double anchor = upLU_L(p.m + 1, p, s);
            for (int l = sp.i + 1; l <= p.m; ++l) anchor -= upLU_L(l, p, s);
            if (sp.i == 0) return {anchor, -1};
            const double own = upLU_L(sp.i, p, s);
            return anchor <= own ? lyap_value{anchor, 0} : lyap_value{own, 1};
        }
        case lyap_family::tail_sum_U:
            return {tail_sum(p, s), -1};
        case lyap_family::upper_W_tilde:
            return {upWt(sp.i, p, s), -1};
    }
    throw config_error("unreachable family");
}

inline double evaluate(const lyap_spec& sp, const state_vector& s) {
    return evaluate_branches(sp, s).value;
}

// Exact drift of an arbitrary scalar function under the chain's generator:
// sum over transitions of rate * (V(s') - V(s)).
inline double drift(const std::function<double(const state_vector&)>& V, const state_vector& s,
                    const system_config& cfg) {
    const double here = V(s);
    double acc = 0.0;
    for (const auto& [target, rate] : generator_row(s, cfg)) acc += rate * (V(target) - here);
    return acc;
}

inline double drift(const lyap_spec& sp, const state_vector& s, const system_config& cfg) {
    return drift([&sp](const state_vector& x) { return evaluate(sp, x); }, s, cfg);
}

// Regions: conjunctions of value caps on other test functions and coordinate
// floors/caps on individual levels.
struct value_cap {
    lyap_spec spec;
    double cap = 0.0;
};

struct coord_bound {
    int level = 0;
    double bound = 0.0;
    bool is_floor = true;    // s_level >= bound, else s_level <= bound
};

struct region_spec {
    std::int64_t n = 0;
    std::vector<value_cap> caps;
    std::vector<coord_bound> coords;

    bool member(const state_vector& s) const {
        for (const auto& c : coords) {
            const auto v = static_cast<double>(s.at(c.level, n));
            if (c.is_floor ? v < c.bound : v > c.bound) return false;
        }
        for (const auto& c : caps)
            if (evaluate(c.spec, s) > c.cap) return false;
        return true;
    }
};

// The side conditions each drift statement is proved under: a cap of
// sqrt(mn) log n on the next function in the chain, plus the coordinate
// floors already established by the earlier stages.
inline region_spec canonical_region(const lyap_spec& sp) {
    validate_spec(sp);
    const auto& p = sp.p;
    region_spec reg;
    reg.n = static_cast<std::int64_t>(std::llround(p.n));
    const double cap_val = p.smn() * p.ln_n();
    auto add_cap = [&](lyap_family fam, int i, int k) {
        lyap_spec next = sp;
        next.family = fam;
        next.i = i;
        next.k = k;
        reg.caps.push_back({next, cap_val});
    };
    auto floor_sl = [&](int level, double bound) {
        if (level >= 1) reg.coords.push_back({level, bound, true});
    };
    switch (sp.family) {
        case lyap_family::base_v1:
            break;
        case lyap_family::lower_L:
            if (sp.i == 0) {
                if (sp.k >= 2) add_cap(lyap_family::lower_L, 1, sp.k);
                for (int l = 1; l <= sp.k - 1; ++l)
                    floor_sl(l, p.n - 2.5 * p.m * p.n * p.ld() / p.dpow(sp.k - l));
            } else if (sp.i + 1 <= sp.k - 1) {
                add_cap(lyap_family::lower_L, sp.i + 1, sp.k);
            }
            break;
        case lyap_family::lower_W:
            if (sp.i < sp.k) {
                add_cap(lyap_family::lower_W, sp.i + 1, sp.k);
                if (sp.i >= 2)
                    floor_sl(sp.i - 1, p.n - 2.5 * p.m * p.n * p.ld() / p.dpow(sp.k - sp.i + 1));
            }
            break;
        case lyap_family::lower_Z:
            if (sp.i == 0) {
                if (sp.k >= 2) add_cap(lyap_family::lower_Z, 1, sp.k);
                for (int l = 1; l <= sp.k - 1; ++l)
                    floor_sl(l, p.n - 9.0 * p.m * p.m * p.n * p.ld() / p.dpow(sp.k - l + 1));
            } else {
                if (sp.i + 1 <= sp.k - 1) add_cap(lyap_family::lower_Z, sp.i + 1, sp.k);
                if (sp.i >= 2)
                    floor_sl(sp.i - 1, p.n - 9.0 * p.m * p.m * p.n * p.ld() / p.dpow(sp.k - sp.i + 2));
            }
            break;
        case lyap_family::lower_W_tilde:
            if (sp.i + 1 <= sp.k) add_cap(lyap_family::lower_W_tilde, sp.i + 1, sp.k);
            if (sp.i >= 2)
                floor_sl(sp.i - 1, p.n - 9.0 * p.m * p.m * p.n * p.ld() / p.dpow(sp.k - sp.i + 2));
            break;
        case lyap_family::upper_LU:
            if (sp.i + 1 <= p.m) {
                add_cap(lyap_family::upper_LU, sp.i + 1, 0);
            } else {
                // Anchor stage: levels below m sit above their lower band and
                // the mass above level m+1 is already small.
                if (p.m >= 2) floor_sl(p.m - 1, lower_band_level(p.n, p.m, p.d, p.m - 1));
                lyap_spec tail = sp;
                tail.family = lyap_family::tail_sum_U;
                tail.i = 0;
                tail.k = 0;
                reg.caps.push_back({tail, p.B_mplus2});
            }
            break;
        case lyap_family::tail_sum_U:
            reg.coords.push_back({p.m + 1, p.n / 2.0, false});
            reg.coords.push_back({p.m + 2, 1.0, true});
            break;
        case lyap_family::upper_W_tilde:
            if (sp.i + 1 <= p.m) add_cap(lyap_family::upper_W_tilde, sp.i + 1, 0);
            break;
    }
    return reg;
}

}  // namespace podc
