#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace podc {

// Philox4x32-10 counter-based generator. Chosen so replications can use
// independent streams derived from (seed, replication_id) and runs are
// bit-reproducible regardless of how replications are scheduled.
class philox_rng {
  public:
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    philox_rng(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t k = mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        counter_ = {0, 0, 0, 0};
        idx_ = 4;
    }

    // One 10-round block; exposed so known-answer tests can drive it directly.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            buffer_ = block(counter_, key_);
            idx_ = 0;
            if (++counter_[0] == 0)
                if (++counter_[1] == 0)
                    if (++counter_[2] == 0) ++counter_[3];
        }
        return buffer_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0, 1]: never returns 0, so -log(u) is always finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    // Unbiased integer in [0, range) by rejection.
    std::uint64_t uniform_int(std::uint64_t range) {
        const std::uint64_t bound = (UINT64_MAX / range) * range;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= bound);
        return x % range;
    }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> buffer_{};
    int idx_ = 4;
};

}  // namespace podc
