#ifndef MFTR_LAPLACE_HPP
#define MFTR_LAPLACE_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mftr/common.hpp"

namespace mftr::sf {

struct LaplaceInversionConfig {
    enum class Method { euler_summation, fixed_talbot };
    Method method = Method::euler_summation;
    int terms = 32; // Euler uses 2*(terms/2)+1 transform evaluations; Talbot uses terms
    // Bromwich abscissa A; 0 derives the Abate-Whitt value 2*M*ln(10)/3 from
    // terms (discretization error ~ e^{-A}, roundoff ~ eps * e^{A/2}).
    double truncation_shift = 0.0;

    void check() const {
        if (terms < 8) throw validation_error("terms", "LaplaceInversionConfig.terms must be >= 8");
    }
};

namespace detail {

struct EulerPass {
    double value;
    double noise_floor; // roundoff scale e^{A/2}/t * eps * term magnitudes
    double wobble;      // sensitivity to the acceleration order
};

// One Euler-summed evaluation of the Bromwich series at abscissa A/(2t):
// Neumaier-compensated alternating partial sums, binomially averaged over the
// last M+1 (Abate-Whitt).
template <typename F>
EulerPass euler_pass(F& fn, double t, int M, double A) {
    const double pre = std::exp(A / 2.0) / t;
    double partial = 0.5 * fn(std::complex<double>(A / (2.0 * t), 0.0)).real();
    double comp = 0.0;
    double max_abs_term = std::abs(partial);
    std::vector<double> tail_partials;
    tail_partials.reserve(M + 1);
    for (int k = 1; k <= 2 * M; ++k) {
        const std::complex<double> s(A / (2.0 * t), k * M_PI / t);
        double term = fn(s).real();
        max_abs_term = std::max(max_abs_term, std::abs(term));
        if (k % 2 == 1) term = -term;
        const double snew = partial + term;
        comp += (std::abs(partial) >= std::abs(term)) ? (partial - snew) + term
                                                      : (term - snew) + partial;
        partial = snew;
        if (k >= M) tail_partials.push_back(partial + comp);
    }
    auto euler_avg = [&](int order) {
        double acc = 0.0, binom = 1.0;
        for (int j = 0; j <= order; ++j) {
            acc += binom * tail_partials[j];
            binom *= static_cast<double>(order - j) / (j + 1.0);
        }
        return acc * std::ldexp(1.0, -order);
    };
    const double full = euler_avg(M);
    const double drop = euler_avg(M - 1);
    return EulerPass{pre * full, pre * max_abs_term * (2.0 * M + 1.0) * 1.1e-16,
                     pre * std::abs(full - drop)};
}

template <typename F>
double invert_euler(F& fn, double t, const LaplaceInversionConfig& cfg) {
    const int M = std::max(4, cfg.terms / 2);
    const bool auto_shift = !(cfg.truncation_shift > 0.0);
    const double A = auto_shift ? 20.0 : cfg.truncation_shift;

    // The wobble (sensitivity to the acceleration order) flags genuine
    // oscillatory divergence; an absolute forgiveness floor keeps deep-tail
    // evaluations, where the value sits at the roundoff scale anyway, from
    // tripping it.
    auto stable = [](const EulerPass& pass) {
        return pass.wobble <=
               std::max({1e-4 * std::abs(pass.value), 100.0 * pass.noise_floor, 1e-8});
    };
    EulerPass main = euler_pass(fn, t, M, A);
    if (!stable(main))
        throw numeric_error("Euler summation failed to stabilize (oscillatory divergence)",
                            main.value);
    // Roundoff-dominated result (value far below e^{A/2} eps scale): retry at
    // a small abscissa, where decaying transforms alias negligibly, and keep
    // it if both passes agree.
    if (auto_shift && std::abs(main.value) < 1e8 * main.noise_floor) {
        EulerPass low = euler_pass(fn, t, M, 12.0);
        const double agree_tol = std::max(100.0 * main.noise_floor, 1e-6 * std::abs(main.value));
        if (std::abs(low.value - main.value) <= agree_tol && stable(low)) return low.value;
    }
    return main.value;
}

// Fixed-Talbot contour (Abate-Valko); requires F analytic off the negative
// real axis.
template <typename F>
double invert_talbot(F& fn, double t, const LaplaceInversionConfig& cfg) {
    const int M = cfg.terms;
    const double r = 2.0 * M / (5.0 * t);
    double sum = 0.5 * std::exp(r * t) * fn(std::complex<double>(r, 0.0)).real();
    for (int k = 1; k < M; ++k) {
        const double th = k * M_PI / M;
        const double cot = std::cos(th) / std::sin(th);
        const std::complex<double> s(r * th * cot, r * th);
        const double sigma = th + (th * cot - 1.0) * cot;
        const std::complex<double> val = std::exp(s * t) * fn(s) * std::complex<double>(1.0, sigma);
        sum += val.real();
    }
    return sum * r / M;
}

} // namespace detail

// Numerical inverse Laplace transform of F at t > 0.
inline double inverse_laplace(const std::function<std::complex<double>(std::complex<double>)>& F,
                              double t, const LaplaceInversionConfig& cfg = {}) {
    if (!(t > 0.0)) throw validation_error("t", "inverse_laplace requires t > 0");
    cfg.check();
    if (cfg.method == LaplaceInversionConfig::Method::fixed_talbot)
        return detail::invert_talbot(F, t, cfg);
    return detail::invert_euler(F, t, cfg);
}

} // namespace mftr::sf

#endif
