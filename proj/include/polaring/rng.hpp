// Philox4x32-10 counter-based generator.
//
// Every random draw is a pure function of (seed, realization, stream,
// counter), so disorder realizations are reproducible bit-for-bit no
// matter how work is scheduled across threads.  Stream ids keep the
// site-energy and bond draws of one realization statistically
// independent.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "polaring/units.hpp"

namespace polaring {

class PhiloxRng {
public:
    PhiloxRng(std::uint64_t seed, std::uint64_t realization, std::uint32_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          realization_lo_(static_cast<std::uint32_t>(realization)),
          realization_hi_(static_cast<std::uint32_t>(realization >> 32) ^ (stream * 0x9E3779B9u)),
          stream_(stream) {}

    // next 32 uniform bits
    std::uint32_t next_u32() {
        if (block_pos_ == 4) {
            block_ = philox_block(counter_++);
            block_pos_ = 0;
        }
        return block_[block_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // uniform on the open interval (0,1); never returns an endpoint
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // standard normal via Box-Muller, deterministic pair order
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * units::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // one keyed block, exposed for known-answer tests
    static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    std::array<std::uint32_t, 4> philox_block(std::uint64_t n) const {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(n),
            static_cast<std::uint32_t>(n >> 32),
            realization_lo_ ^ stream_,
            realization_hi_};
        return philox4x32_10(ctr, key_);
    }

    static std::array<std::uint32_t, 4> single_round(const std::array<std::uint32_t, 4>& ctr,
                                                     const std::array<std::uint32_t, 2>& key) {
        const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
        const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t realization_lo_;
    std::uint32_t realization_hi_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// stream ids used by the model layer
namespace rng_stream {
inline constexpr std::uint32_t site_energy = 0;
inline constexpr std::uint32_t bond_coupling = 1;
} // namespace rng_stream

} // namespace polaring
