#ifndef MFTR_MODEL_HPP
#define MFTR_MODEL_HPP

#include <cassert>
#include <cmath>
#include <complex>
#include <string>

#include "mftr/common.hpp"
#include "mftr/quadrature.hpp"
#include "mftr/special_functions.hpp"

namespace mftr {

// The four shape parameters plus mean SNR. For envelope-domain work
// gamma_bar is read as Omega = E{R^2}.
struct MftrParams {
    double k;         // specular-to-diffuse power ratio, K >= 0
    double delta;     // specular similarity index, 0 <= Delta <= 1
    double m;         // shadowing severity of the common fluctuation, m > 0
    double mu;        // number of multipath clusters, mu > 0
    double gamma_bar; // mean SNR (or Omega), > 0
};

inline MftrParams validate(const MftrParams& p) {
    if (!(p.k >= 0.0) || !std::isfinite(p.k))
        throw validation_error("k", "k must be >= 0, got " + std::to_string(p.k));
    if (!(p.delta >= 0.0 && p.delta <= 1.0))
        throw validation_error("delta", "delta must be in [0,1], got " + std::to_string(p.delta));
    if (!(p.m > 0.0) || !std::isfinite(p.m))
        throw validation_error("m", "m must be > 0, got " + std::to_string(p.m));
    if (!(p.mu > 0.0) || !std::isfinite(p.mu))
        throw validation_error("mu", "mu must be > 0, got " + std::to_string(p.mu));
    if (!(p.gamma_bar > 0.0) || !std::isfinite(p.gamma_bar))
        throw validation_error("gamma_bar",
                               "gamma_bar must be > 0, got " + std::to_string(p.gamma_bar));
    return p;
}

enum class Method { automatic, mgf_inversion, theta_integral, gamma_series };

struct EvalMethod {
    Method method = Method::automatic;
    Tolerance tol{};
};

inline bool has_integer_m(const MftrParams& p) { return is_integer(p.m) && p.m >= 1.0; }

// ----- R polynomial (quadratic and factored forms) -----

template <typename T>
T r_polynomial_quadratic(const MftrParams& p, T s) {
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double c2 = (m + mu * K) * (m + mu * K) - (mu * K * D) * (mu * K * D);
    return c2 * gb * gb * s * s - 2.0 * m * mu * (1.0 + K) * (m + mu * K) * gb * s +
           (1.0 + K) * (1.0 + K) * m * m * mu * mu;
}

template <typename T>
T r_polynomial_factored(const MftrParams& p, T s) {
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double c = (1.0 + K) * m * mu;
    const T f1 = c - (m + mu * K * (1.0 + D)) * gb * s;
    const T f2 = c - (m + mu * K * (1.0 - D)) * gb * s;
    return f1 * f2;
}

template <typename T>
T r_polynomial(const MftrParams& p, T s) {
    T fac = r_polynomial_factored(p, s);
    assert([&] {
        T quad = r_polynomial_quadratic(p, s);
        return std::abs(quad - fac) <= 1e-10 * (std::abs(quad) + std::abs(fac)) + 1e-290;
    }());
    return fac;
}

// ----- kappa-mu shadowed bridge -----

// kappa_theta = K (1 + Delta cos theta)
inline double kappa_theta(const MftrParams& p, double theta) {
    return p.k * (1.0 + p.delta * std::cos(theta));
}

namespace detail {

inline void mgf_linear_coeffs(const MftrParams& p, double& a_lin, double& b_lin, double s) {
    // a(s), b(s) of the conditional MGF denominator (a + b cos theta)^m
    a_lin = p.m * p.mu * (1.0 + p.k) - (p.mu * p.k + p.m) * p.gamma_bar * s;
    b_lin = -p.mu * p.k * p.delta * p.gamma_bar * s;
}

// Upper bound on real s below the closed form's nearest singularity.
inline double mgf_s_sup(const MftrParams& p) {
    return (1.0 + p.k) * p.m * p.mu / ((p.m + p.mu * p.k * (1.0 + p.delta)) * p.gamma_bar);
}

} // namespace detail

// Conditional kappa-mu shadowed MGF given the cluster-1 phase difference.
inline double conditional_mgf(const MftrParams& p, double theta, double s) {
    if (!(s <= 0.0)) throw validation_error("s", "conditional_mgf requires s <= 0");
    if (s == 0.0) return 1.0;
    double a_lin, b_lin;
    detail::mgf_linear_coeffs(p, a_lin, b_lin, s);
    const double K = p.k, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double lg = m * std::log(m) + mu * std::log(mu) + mu * std::log1p(K) +
                      (m - mu) * std::log(mu * (1.0 + K) - gb * s) -
                      m * std::log(a_lin + b_lin * std::cos(theta));
    return std::exp(lg);
}

// MGF by averaging the conditional MGF over theta (adaptive Gauss-Legendre).
inline double mgf_theta_quadrature(const MftrParams& p, double s,
                                   const Tolerance& tol = Tolerance{}) {
    if (s == 0.0) return 1.0;
    return sf::gl_integrate_adaptive(
               [&](double th) { return conditional_mgf(p, th, s); }, 0.0, M_PI,
               std::min(tol.rel_tol, 1e-10), 1e-300, 64, 4096) /
           M_PI;
}

// Closed-form MGF at real s (valid for s below the nearest transform
// singularity; every consumer passes s <= 0).
inline double mgf(const MftrParams& p, double s, const EvalMethod& how = {}) {
    validate(p);
    if (how.method == Method::theta_integral) {
        if (s == 0.0) return 1.0;
        if (!(s <= 0.0)) throw validation_error("s", "theta-quadrature MGF requires s <= 0");
        return mgf_theta_quadrature(p, s, how.tol);
    }
    if (s == 0.0) return 1.0;
    if (!(s < detail::mgf_s_sup(p)))
        throw validation_error("s", "mgf closed form requires s below the transform singularity");
    const double K = p.k, m = p.m, mu = p.mu, gb = p.gamma_bar;
    double a_lin, b_lin;
    detail::mgf_linear_coeffs(p, a_lin, b_lin, s);
    const double R = r_polynomial(p, s);
    // near-degenerate sqrt(R) -> 0 only approachable as K->inf with Delta->1
    if (!((a_lin - std::abs(b_lin)) > 1e-12 * a_lin))
        throw numeric_error("mgf degenerate: a(s) ~ |b(s)|, sqrt(R) denominator vanishes");
    const double sqR = std::sqrt(R);
    const double z = a_lin / sqR;
    const double P = has_integer_m(p)
                         ? sf::legendre_poly(static_cast<unsigned>(std::lround(m)) - 1, z)
                         : sf::legendre_fn_real_degree(m - 1.0, std::max(z, 1.0), how.tol);
    const double lg = m * std::log(m) + mu * std::log(mu) + mu * std::log1p(K) +
                      (m - mu) * std::log(mu * (1.0 + K) - gb * s) - m * std::log(sqR);
    return std::exp(lg) * P;
}

// M(s) at complex s for integer m: the Laplace-inversion transform route.
// The factored R keeps each square-root factor in the right half-plane, so
// principal branches give the analytic continuation.
inline std::complex<double> mgf_complex(const MftrParams& p, std::complex<double> s) {
    if (!has_integer_m(p))
        throw validation_error(
            "m", "complex-argument MGF requires integer m; use the theta-quadrature route");
    if (!(s.real() < detail::mgf_s_sup(p)))
        throw validation_error("s", "complex MGF requires Re(s) below the transform singularity");
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const unsigned n = static_cast<unsigned>(std::lround(m)) - 1;
    const double c = (1.0 + K) * m * mu;
    const std::complex<double> f1 = c - (m + mu * K * (1.0 + D)) * gb * s;
    const std::complex<double> f2 = c - (m + mu * K * (1.0 - D)) * gb * s;
    const std::complex<double> sqR = std::sqrt(f1) * std::sqrt(f2);
    const std::complex<double> a_lin = m * mu * (1.0 + K) - (mu * K + m) * gb * s;
    const std::complex<double> P = sf::legendre_poly(n, a_lin / sqR);
    const double lpre = m * std::log(m) + mu * std::log(mu) + mu * std::log1p(K);
    const std::complex<double> lg = lpre +
                                    (m - mu) * std::log(mu * (1.0 + K) - gb * s) -
                                    m * std::log(sqR);
    return std::exp(lg) * P;
}

// Eq-level expansion of the integer-m MGF as the per-q sum over the
// factorized poles (the shape the Phi2 inversion pair acts on). Kept for
// tests; cancellation across q grows like 2^{m-1}.
inline std::complex<double> mgf_complex_factored_qsum(const MftrParams& p, std::complex<double> s) {
    if (!has_integer_m(p))
        throw validation_error("m", "factorized-MGF q-sum requires integer m");
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const unsigned mm = static_cast<unsigned>(std::lround(m));
    const double cp = std::sqrt((m + mu * K) * (m + mu * K) - (mu * K * D) * (mu * K * D));
    const double a1 = (1.0 + K) * m * mu / ((m + mu * K) * gb);
    const double a2 = (1.0 + K) * m * mu / ((m + mu * K * (1.0 + D)) * gb);
    const double a3 = (1.0 + K) * m * mu / ((m + mu * K * (1.0 - D)) * gb);
    const double a4 = (1.0 + K) * mu / gb;
    const double lpre = mu * std::log1p(K) + mu * std::log(mu) - (m - 1.0) * std::log(2.0) -
                        mu * std::log(gb) + m * std::log(m / cp);
    const double lrat = std::log((m + mu * K) / cp);
    // M(s) = pref * sum_q (-1)^q C_q (...)^{m-1-2q} s^{-mu} prod (1 - a_i/s)^{p_i}
    const std::complex<double> ls = std::log(-s); // consumers pass Re(s) < 0
    std::complex<double> sum = 0.0;
    for (unsigned q = 0; q <= (mm - 1) / 2; ++q) {
        const double pw = m - 1.0 - 2.0 * q;
        const std::complex<double> lterm =
            sf::legendre_coeff_log(mm - 1, q) + pw * lrat - mu * ls +
            pw * std::log(1.0 - a1 / s) + (q + 0.5 - m) * (std::log(1.0 - a2 / s) + std::log(1.0 - a3 / s)) +
            (m - mu) * std::log(1.0 - a4 / s);
        sum += (q % 2 == 0 ? 1.0 : -1.0) * std::exp(lterm);
    }
    return std::exp(lpre) * sum;
}

} // namespace mftr

#endif
