#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace levywave {

// SplitMix64 step; used only to derive keys/salts from user-facing seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Identifies one replicate stream: (master_seed, stream, sequence).
// Streams separate experiments, sequences separate replicates.
struct SeedLineage {
    std::uint64_t master_seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t sequence = 0;
};

// Counter-based generator (Philox4x32-10). The key is derived from the
// master seed, the per-stream/per-sequence salt sits in the upper counter
// words, and the lower 64 counter bits advance block by block. Replicate
// streams are therefore independent of scheduling and of each other.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t sequence)
        : lineage_{master_seed, stream, sequence} {
        std::uint64_t s = master_seed;
        const std::uint64_t key64 = splitmix64(s);
        key_[0] = static_cast<std::uint32_t>(key64);
        key_[1] = static_cast<std::uint32_t>(key64 >> 32);
        s ^= 0xD1B54A32D192ED03ull ^ stream;
        std::uint64_t salt = splitmix64(s);
        s ^= 0x8CB92BA72F3D8DD7ull ^ sequence;
        salt ^= splitmix64(s);
        salt_[0] = static_cast<std::uint32_t>(salt);
        salt_[1] = static_cast<std::uint32_t>(salt >> 32);
    }

    const SeedLineage& lineage() const { return lineage_; }

    std::uint64_t next_u64() {
        if (buffer_pos_ >= 2) {
            fill_block();
            buffer_pos_ = 0;
        }
        return buffer_[buffer_pos_++];
    }

    // uniform on [0,1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on the open interval (0,1); safe under log()
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential() { return -std::log(uniform_pos()); }

    // Box-Muller; consumes exactly two uniforms per pair.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform_pos();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        have_cached_normal_ = true;
        return r * std::cos(a);
    }

    // Exact Poisson sampling by multiplicative inversion, chunked so that
    // exp(-chunk) never underflows for large means.
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 0.0) {
            const double chunk = mean > 24.0 ? 24.0 : mean;
            const double limit = std::exp(-chunk);
            double prod = uniform_pos();
            std::uint64_t k = 0;
            while (prod > limit) {
                prod *= uniform_pos();
                ++k;
            }
            total += k;
            mean -= chunk;
        }
        return total;
    }

private:
    void fill_block() {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = salt_[0];
        std::uint32_t c3 = salt_[1];
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ull * c0;
            const std::uint64_t p2 = 0xCD9E8D57ull * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi2 = static_cast<std::uint32_t>(p2 >> 32);
            const std::uint32_t lo2 = static_cast<std::uint32_t>(p2);
            c0 = hi2 ^ c1 ^ k0;
            c1 = lo2;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buffer_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
        buffer_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
        ++block_;
    }

    SeedLineage lineage_;
    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 2> salt_{};
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffer_pos_ = 2;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

// Fixed stream ids per experiment so result files are reproducible
// independently of which experiments run in a session.
namespace stream {
inline constexpr std::uint64_t variance = 1;
inline constexpr std::uint64_t covariance = 2;
inline constexpr std::uint64_t lln = 3;
inline constexpr std::uint64_t clt = 4;
inline constexpr std::uint64_t asclt = 5;
inline constexpr std::uint64_t indep = 6;
inline constexpr std::uint64_t probe = 7;
inline constexpr std::uint64_t stationarity = 8;
inline constexpr std::uint64_t skeleton_law = 9;
inline constexpr std::uint64_t clt_noise_floor = 10;
inline constexpr std::uint64_t clt_bootstrap = 11;
inline constexpr std::uint64_t asclt_calibration = 12;
inline constexpr std::uint64_t picard = 13;
inline constexpr std::uint64_t asclt_aux = 14;
inline constexpr std::uint64_t scaling = 15;
inline constexpr std::uint64_t lightcone = 16;
inline constexpr std::uint64_t commutation = 17;
inline constexpr std::uint64_t unit_test = 100;
}  // namespace stream

}  // namespace levywave
