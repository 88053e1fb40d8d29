#ifndef MFTR_RNG_HPP
#define MFTR_RNG_HPP

#include <cmath>
#include <cstdint>

#include "mftr/common.hpp"

namespace mftr {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11), one stream
// per (seed, stream_index). Streams are independent and any shard layout
// reproduces the serial sequence, sample by sample.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream_index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{static_cast<std::uint32_t>(stream_index),
               static_cast<std::uint32_t>(stream_index >> 32), 0, 0},
          buf_pos_(4), have_normal_(false), cached_normal_(0.0) {}

    // uniform on [0,1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    // uniform on (0,1]
    double uniform_open() { return 1.0 - uniform(); }

    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_normal_ = r * std::sin(a);
        have_normal_ = true;
        return r * std::cos(a);
    }

    // Marsaglia-Tsang; boosted for shape < 1
    double gamma(double shape, double scale) {
        if (!(shape > 0.0)) throw validation_error("shape", "gamma draw requires shape > 0");
        if (shape < 1.0) {
            const double u = uniform_open();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw validation_error("mean", "poisson draw requires mean >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            std::uint64_t k = 0;
            double prod = uniform_open();
            while (prod > limit) {
                ++k;
                prod *= uniform_open();
            }
            return k;
        }
        // Hoermann's PTRS transformed rejection
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double lmu = std::log(mean);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform_open();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * lmu - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

private:
    static void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
        const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
        const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        std::uint32_t out[4];
        out[0] = hi1 ^ ctr[1] ^ key[0];
        out[1] = lo1;
        out[2] = hi0 ^ ctr[3] ^ key[1];
        out[3] = lo0;
        ctr[0] = out[0];
        ctr[1] = out[1];
        ctr[2] = out[2];
        ctr[3] = out[3];
    }

    void refill() {
        std::uint32_t c[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
        std::uint32_t k[2] = {key_[0], key_[1]};
        for (int r = 0; r < 10; ++r) {
            philox_round(c, k);
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        buf_[0] = c[0];
        buf_[1] = c[1];
        buf_[2] = c[2];
        buf_[3] = c[3];
        buf_pos_ = 0;
        if (++ctr_[2] == 0) ++ctr_[3]; // block counter within the stream
    }

    std::uint32_t next_u32() {
        if (buf_pos_ >= 4) refill();
        return buf_[buf_pos_++];
    }
    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t buf_[4];
    int buf_pos_;
    bool have_normal_;
    double cached_normal_;
};

} // namespace mftr

#endif
