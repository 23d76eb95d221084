#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "json.hpp"
#include "podc/errors.hpp"

namespace podc {

enum class d_rounding { floor, ceil, nearest };

inline std::string to_string(d_rounding r) {
    switch (r) {
        case d_rounding::floor: return "floor";
        case d_rounding::ceil: return "ceil";
        default: return "nearest";
    }
}

inline d_rounding rounding_from_string(const std::string& s) {
    if (s == "floor") return d_rounding::floor;
    if (s == "ceil") return d_rounding::ceil;
    if (s == "nearest") return d_rounding::nearest;
    throw config_error("unknown rounding mode: " + s);
}

inline int round_d(double d_real, d_rounding mode) {
    double v = 0.0;
    switch (mode) {
        case d_rounding::floor: v = std::floor(d_real); break;
        case d_rounding::ceil: v = std::ceil(d_real); break;
        case d_rounding::nearest: v = std::round(d_real); break;
    }
    return static_cast<int>(v);
}

// Arrival rate in the heavy-traffic scaling lambda = n - n^{1-gamma}.
inline double lambda_for(double n, double gamma) {
    return n - std::pow(n, 1.0 - gamma);
}

// One load-balancing instance: n servers, arrival rate lambda, d samples per
// arrival, buffer b, unit service rate. gamma and lambda are redundant under
// the scaling above; either may be given (both are cross-checked).
struct system_config {
    std::int64_t n = 1;
    std::optional<double> gamma;    // heavy-traffic exponent, in (0, 0.5)
    double lambda = 0.0;            // resolved arrival rate
    std::optional<int> d;           // integer sample count (simulation)
    std::optional<double> d_real;   // real-valued d for analytics
    std::optional<int> m;           // target plateau level for regime math
    int b = 1;
    double mu = 1.0;
    std::uint64_t seed = 1;
    d_rounding rounding = d_rounding::nearest;
    bool allow_d_gt_n = false;
    bool allow_lambda_zero = false;  // test mode: degenerate lambda = 0

    double dn() const { return static_cast<double>(n); }

    // Real-valued d for analytics: explicit d_real wins, else the integer d.
    double effective_d_real() const {
        if (d_real) return *d_real;
        if (d) return static_cast<double>(*d);
        throw config_error("config has neither d nor d_real");
    }

    int require_d_int() const {
        if (!d) throw config_error("this operation requires an integer d");
        return *d;
    }

    // gamma, inverting lambda = n - n^{1-gamma} when it was not given.
    double gamma_effective() const {
        if (gamma) return *gamma;
        const double gap = dn() - lambda;
        return 1.0 - std::log(gap) / std::log(dn());
    }

    void validate() const {
        if (n < 1) throw config_error("n must be >= 1");
        if (gamma && (*gamma <= 0.0 || *gamma >= 0.5))
            throw config_error("gamma must lie in (0, 0.5)");
        if (lambda < 0.0 || (lambda == 0.0 && !allow_lambda_zero))
            throw config_error("lambda must be positive");
        if (lambda >= dn()) throw config_error("lambda must be < n for stability");
        if (gamma) {
            const double expect = lambda_for(dn(), *gamma);
            if (std::abs(lambda - expect) > 1e-9 * dn())
                throw config_error("lambda and gamma are inconsistent: lambda=" +
                                   std::to_string(lambda) + " but n - n^{1-gamma} = " +
                                   std::to_string(expect));
        }
        if (d) {
            if (*d < 1) throw config_error("d must be >= 1");
            if (*d > n && !allow_d_gt_n)
                throw config_error("d > n rejected (set allow_d_gt_n to sample with "
                                   "replacement beyond n)");
        }
        if (d_real && *d_real <= 0.0) throw config_error("d_real must be positive");
        if (m && *m < 1) throw config_error("m must be >= 1");
        if (b < 1) throw config_error("b must be >= 1");
        if (mu != 1.0) throw config_error("the service rate is fixed at mu = 1");
    }
};

inline system_config config_from_json(const nlohmann::json& j) {
    system_config c;
    if (!j.contains("n")) throw config_error("config is missing n");
    c.n = j.at("n").get<std::int64_t>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("lambda")) {
        c.lambda = j.at("lambda").get<double>();
    } else if (c.gamma) {
        c.lambda = lambda_for(static_cast<double>(c.n), *c.gamma);
    } else {
        throw config_error("config needs lambda or gamma");
    }
    if (j.contains("d")) c.d = j.at("d").get<int>();
    if (j.contains("d_real")) c.d_real = j.at("d_real").get<double>();
    if (j.contains("m")) c.m = j.at("m").get<int>();
    if (j.contains("b")) c.b = j.at("b").get<int>();
    if (j.contains("mu")) c.mu = j.at("mu").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rounding")) c.rounding = rounding_from_string(j.at("rounding").get<std::string>());
    if (j.contains("allow_d_gt_n")) c.allow_d_gt_n = j.at("allow_d_gt_n").get<bool>();
    if (j.contains("allow_lambda_zero")) c.allow_lambda_zero = j.at("allow_lambda_zero").get<bool>();
    c.validate();
    return c;
}

// Canonical serialization: fixed key order so the config hash is stable.
inline nlohmann::ordered_json config_to_json(const system_config& c) {
    nlohmann::ordered_json j;
    j["n"] = c.n;
    if (c.gamma) j["gamma"] = *c.gamma;
    j["lambda"] = c.lambda;
    if (c.d) j["d"] = *c.d;
    if (c.d_real) j["d_real"] = *c.d_real;
    if (c.m) j["m"] = *c.m;
    j["b"] = c.b;
    j["mu"] = c.mu;
    j["seed"] = c.seed;
    j["rounding"] = to_string(c.rounding);
    if (c.allow_d_gt_n) j["allow_d_gt_n"] = true;
    if (c.allow_lambda_zero) j["allow_lambda_zero"] = true;
    return j;
}

// FNV-1a over the canonical serialization; used to stamp every output file.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash_hex(const system_config& c) {
    const std::uint64_t h = fnv1a64(config_to_json(c).dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace podc
