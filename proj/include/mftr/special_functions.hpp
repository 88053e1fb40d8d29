#ifndef MFTR_SPECIAL_FUNCTIONS_HPP
#define MFTR_SPECIAL_FUNCTIONS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "mftr/common.hpp"
#include "mftr/quadrature.hpp"

namespace mftr::sf {

// Value carried as (log-magnitude, sign) to survive exponential ranges.
struct LogScaled {
    double log_mag;
    int sign; // -1, 0, +1

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_mag); }
};

// log C_q^n = log[(2n-2q)! / (q! (n-q)! (n-2q)!)], the Legendre coefficient.
inline double legendre_coeff_log(unsigned n, unsigned q) {
    return std::lgamma(2.0 * n - 2.0 * q + 1.0) - std::lgamma(q + 1.0) -
           std::lgamma(n - q + 1.0) - std::lgamma(n - 2.0 * q + 1.0);
}

namespace detail {

template <typename T>
T legendre_recurrence(unsigned n, T z) {
    if (n == 0) return T(1);
    T pm = T(1), pk = z;
    for (unsigned k = 1; k < n; ++k) {
        T pn = ((2.0 * k + 1.0) * z * pk - static_cast<double>(k) * pm) / (k + 1.0);
        pm = pk;
        pk = pn;
    }
    return pk;
}

} // namespace detail

inline constexpr unsigned kLegendreDegreeMax = 1000;

// Legendre polynomial P_n at real or complex argument.
inline double legendre_poly(unsigned n, double z) {
    if (n > kLegendreDegreeMax)
        throw validation_error("n", "legendre_poly degree above supported bound " +
                                        std::to_string(kLegendreDegreeMax));
    return detail::legendre_recurrence<double>(n, z);
}
inline std::complex<double> legendre_poly(unsigned n, std::complex<double> z) {
    if (n > kLegendreDegreeMax)
        throw validation_error("n", "legendre_poly degree above supported bound " +
                                        std::to_string(kLegendreDegreeMax));
    return detail::legendre_recurrence<std::complex<double>>(n, z);
}

// Explicit coefficient form of P_n, 2^-n sum_q (-1)^q C_q^n z^{n-2q}.
// Exercises the same algebra the factorized-MGF expansion uses; cancellation
// grows like 2^n near z=1, so the recurrence above is the evaluation of record.
inline double legendre_poly_coeff_sum(unsigned n, double z) {
    double sum = 0.0;
    const double labs = (z == 0.0) ? 0.0 : std::log(std::abs(z));
    for (unsigned q = 0; q <= n / 2; ++q) {
        const unsigned p = n - 2 * q;
        double mag;
        if (z == 0.0)
            mag = (p == 0) ? std::exp(legendre_coeff_log(n, q) - n * std::log(2.0)) : 0.0;
        else
            mag = std::exp(legendre_coeff_log(n, q) + p * labs - n * std::log(2.0));
        int sgn = (q % 2 == 0) ? 1 : -1;
        if (z < 0.0 && p % 2 == 1) sgn = -sgn;
        sum += sgn * mag;
    }
    return sum;
}

namespace detail {

// sum_{k>=0} (a)_k (b)_k / ((c)_k k!) u^k with rescaled accumulation.
// All-positive for u>0, a,b,c>=0; general signs also handled.
inline LogScaled hyp2f1_series_log(double a, double b, double c, double u, const Tolerance& tol) {
    double sum = 1.0, term = 1.0, shift = 0.0;
    for (std::size_t k = 0; k < tol.max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * u;
        sum += term;
        // geometric tail bound once the term ratio settles below 1
        const double r = std::abs((a + k + 1.0) * (b + k + 1.0) / ((c + k + 1.0) * (k + 2.0)) * u);
        if (r < 1.0 && std::abs(term) * r / (1.0 - r) <= tol.rel_tol * std::abs(sum)) {
            double lm = std::log(std::abs(sum)) + shift;
            return {lm, sum > 0 ? 1 : (sum < 0 ? -1 : 0)};
        }
        if (std::abs(sum) > 1e280 || std::abs(term) > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            shift += std::log(1e280);
        }
        if (term == 0.0) {
            double lm = std::log(std::abs(sum)) + shift;
            return {lm, sum > 0 ? 1 : (sum < 0 ? -1 : 0)};
        }
    }
    throw numeric_error("2F1 series did not converge within max_terms", sum * std::exp(shift));
}

// Terminating Euler transform for x<0 when N = a-c is a nonnegative integer:
// 2F1(a,b;c;x) = (1-x)^{c-a-b} sum_{n=0}^{N} [N!/(N-n)!] (c-b)_n/((c)_n n!) (-x)^n.
inline double hyp2f1_euler_terminating_log(double a, double b, double c, double x, long N) {
    double sum = 1.0, term = 1.0, shift = 0.0;
    for (long n = 0; n < N; ++n) {
        term *= (N - n) * (c - b + n) / ((c + n) * (n + 1.0)) * (-x);
        sum += term;
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            shift += std::log(1e280);
        }
    }
    return (c - a - b) * std::log1p(-x) + std::log(sum) + shift;
}

} // namespace detail

// log 2F1(a,b;c;x) for x <= 0 with a,b,c > 0 (value is in (0,1], but can
// underflow double for large parameters).
inline double log_gauss_2f1_neg(double a, double b, double c, double x,
                                const Tolerance& tol = Tolerance{}) {
    if (x == 0.0) return 0.0;
    if (x > 0.0) throw validation_error("x", "log_gauss_2f1_neg requires x <= 0");
    // terminating Euler path when a-c (or b-c) is a nonnegative integer
    if (c - b > 0.0) {
        double N = a - c;
        if (N >= -0.5 && is_integer(N))
            return detail::hyp2f1_euler_terminating_log(a, b, c, x, std::lround(N));
    }
    if (c - a > 0.0) {
        double N = b - c;
        if (N >= -0.5 && is_integer(N))
            return detail::hyp2f1_euler_terminating_log(b, a, c, x, std::lround(N));
    }
    // Pfaff: pick the variant whose transformed numerator parameters stay >= 0
    const double u = x / (x - 1.0);
    if (c - b >= 0.0) {
        LogScaled s = detail::hyp2f1_series_log(a, c - b, c, u, tol);
        return -a * std::log1p(-x) + s.log_mag;
    }
    if (c - a >= 0.0) {
        LogScaled s = detail::hyp2f1_series_log(c - a, b, c, u, tol);
        return -b * std::log1p(-x) + s.log_mag;
    }
    throw validation_error("a,b,c", "unsupported 2F1 parameter combination for x<0");
}

// Gauss hypergeometric function for x < 1; negative x goes through the Pfaff
// transformation, keeping every in-scope call site on a convergent series.
inline double gauss_2f1(double a, double b, double c, double x, const Tolerance& tol = Tolerance{}) {
    if (c <= 0.0 && is_integer(c))
        throw validation_error("c", "2F1 undefined at nonpositive integer c");
    if (!(x < 1.0)) throw validation_error("x", "2F1 series domain requires x < 1");
    if (x == 0.0) return 1.0;
    if (x > 0.0) {
        LogScaled s = detail::hyp2f1_series_log(a, b, c, x, tol);
        return s.value();
    }
    if (a > 0.0 && b > 0.0 && c > 0.0) return std::exp(log_gauss_2f1_neg(a, b, c, x, tol));
    // general negative-x case: Pfaff on whichever slot keeps the series tame
    const double u = x / (x - 1.0);
    LogScaled s = detail::hyp2f1_series_log(a, c - b, c, u, tol);
    return s.sign * std::exp(-a * std::log1p(-x) + s.log_mag);
}

// Legendre function of the first kind of real degree at z >= 1:
// P_nu(z) = ((1+z)/2)^nu 2F1(-nu,-nu;1;(z-1)/(z+1))  (Pfaff-transformed form,
// all series terms are squares and hence nonnegative).
inline double legendre_fn_real_degree(double nu, double z, const Tolerance& tol = Tolerance{}) {
    if (z < 1.0) throw validation_error("z", "legendre_fn_real_degree requires z >= 1, got " +
                                                 std::to_string(z));
    const double y = (z - 1.0) / (z + 1.0);
    double sum = 1.0, term = 1.0;
    for (std::size_t k = 0; k < tol.max_terms; ++k) {
        const double f = (k - nu) / (k + 1.0);
        term *= f * f * y;
        sum += term;
        if (term == 0.0) return std::exp(nu * std::log(0.5 * (1.0 + z))) * sum;
        const double fn = (k + 1.0 - nu) / (k + 2.0);
        const double r = fn * fn * y;
        if (r < 1.0 && term * r / (1.0 - r) <= tol.rel_tol * sum && k + 1.0 > std::abs(nu)) {
            return std::exp(nu * std::log(0.5 * (1.0 + z))) * sum;
        }
    }
    throw numeric_error("Legendre function series did not converge within max_terms",
                        std::exp(nu * std::log(0.5 * (1.0 + z))) * sum);
}

namespace detail {

// Large-z asymptotic 1F1(a;b;z) ~ Gamma(b)/Gamma(a) e^z z^{a-b}
// sum_n (b-a)_n (1-a)_n / (n! z^n), truncated at the smallest term. Returns
// false when the optimal-truncation error cannot reach near-eps accuracy.
inline bool kummer_1f1_asymptotic(double a, double b, double z, double* out_log) {
    double sum = 1.0, term = 1.0;
    double best_abs = 1.0;
    for (int n = 0; n < 400; ++n) {
        const double next = term * (b - a + n) * (1.0 - a + n) / ((n + 1.0) * z);
        if (std::abs(next) >= best_abs && n > 2 + std::abs(a)) break; // past the optimal cut
        term = next;
        sum += term;
        best_abs = std::abs(term);
        if (best_abs < 1e-17 * std::abs(sum)) break;
    }
    if (!(best_abs <= 1e-12 * std::abs(sum)) || !(sum > 0.0)) return false;
    *out_log = z + (a - b) * std::log(z) + std::lgamma(b) - std::lgamma(a) + std::log(sum);
    return true;
}

} // namespace detail

// log 1F1(a;b;z) for a>0, b>0, z>=0. The Taylor series has positive terms
// only, so a rescaled accumulation is stable for any magnitude of z; for
// large z the divergent asymptotic expansion is used instead whenever its
// optimal truncation is provably below 1e-12 relative.
inline LogScaled kummer_1f1(double a, double b, double z, const Tolerance& tol = Tolerance{}) {
    if (b <= 0.0) throw validation_error("b", "1F1 requires b > 0, got " + std::to_string(b));
    if (z < 0.0) throw validation_error("z", "1F1 contract covers z >= 0 only");
    if (a <= 0.0) throw validation_error("a", "1F1 contract covers a > 0 only");
    if (z == 0.0) return {0.0, 1};
    if (z > 400.0 && z > 4.0 * a * std::max(1.0, b / a)) {
        double lg;
        if (detail::kummer_1f1_asymptotic(a, b, z, &lg)) return {lg, 1};
    }
    double sum = 1.0, term = 1.0, shift = 0.0;
    for (std::size_t k = 0; k < tol.max_terms; ++k) {
        term *= (a + k) * z / ((b + k) * (k + 1.0));
        sum += term;
        const double r = (a + k + 1.0) * z / ((b + k + 1.0) * (k + 2.0));
        if (r < 1.0 && term * r / (1.0 - r) <= tol.rel_tol * sum)
            return {std::log(sum) + shift, 1};
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            shift += std::log(1e280);
        }
    }
    throw numeric_error("1F1 series did not converge within max_terms", std::log(sum) + shift);
}

// log U(a,b,z) for a>0, z>0 through the Euler integral
// U = (1/Gamma(a)) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt,
// integrated on y = ln t with adaptive step refinement. The log substitution
// absorbs the t^{a-1} endpoint behavior for every a > 0 and keeps the node
// density tied to the integrand's peak width (the Laguerre-weight route
// stalls whenever the pole at t = -1 sits within a few node spacings of the
// origin, i.e. small z).
inline double log_kummer_u(double a, double b, double z) {
    if (a <= 0.0) throw validation_error("a", "U requires a > 0, got " + std::to_string(a));
    if (z <= 0.0) throw validation_error("z", "U requires z > 0, got " + std::to_string(z));
    // stationary point of -z t + a ln t + (b-a-1) ln(1+t) + ln t' in y = ln t
    const double bq = z - b + 1.0;
    const double t_peak = (-bq + std::sqrt(bq * bq + 4.0 * z * a)) / (2.0 * z);
    auto logf = [&](double t) {
        return -z * t + (a - 1.0) * std::log(t) + (b - a - 1.0) * std::log1p(t);
    };
    return log_integral_positive(logf, t_peak) - std::lgamma(a);
}

// Tricomi confluent hypergeometric function U(a,b,z).
inline double kummer_u(double a, double b, double z) { return std::exp(log_kummer_u(a, b, z)); }

// Regularized lower incomplete gamma P(a,x): series for x<a+1, Lentz
// continued fraction otherwise.
inline double reg_lower_gamma(double a, double x) {
    if (a <= 0.0) throw validation_error("a", "reg_lower_gamma requires a > 0");
    if (x < 0.0) throw validation_error("x", "reg_lower_gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    const double lpre = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, del = 1.0 / a, sum = del;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return std::min(1.0, sum * std::exp(lpre));
    }
    // upper-gamma continued fraction
    const double tiny = 1e-300;
    double b0 = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b0, h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -i * (i - a);
        b0 += 2.0;
        d = an * d + b0;
        if (std::abs(d) < tiny) d = tiny;
        c = b0 + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(lpre) * h;
    return std::max(0.0, 1.0 - q);
}

// Lauricella F_D^(4) through the one-dimensional Euler integral with
// Gauss-Jacobi quadrature absorbing both endpoint singularities.
inline double lauricella_fd4(double a, const std::array<double, 4>& b, double c,
                             const std::array<double, 4>& x, const Tolerance& tol = Tolerance{}) {
    if (!(c > a && a > 0.0))
        throw validation_error("a,c", "lauricella_fd4 requires c > a > 0");
    for (double xi : x)
        if (!(xi < 1.0)) throw validation_error("x", "lauricella_fd4 requires every x_i < 1");

    auto integrand = [&](double t) {
        double lp = 0.0;
        for (int i = 0; i < 4; ++i)
            if (x[i] != 0.0) lp -= b[i] * std::log1p(-x[i] * t);
        return std::exp(lp);
    };
    const double alpha = c - a - 1.0, beta = a - 1.0;
    const double lpref = std::lgamma(c) - std::lgamma(a) - std::lgamma(c - a) +
                         (1.0 - c) * std::log(2.0);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 64; n <= 1024; n *= 2) {
        const QuadRule& r = gauss_jacobi(n, alpha, beta);
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i)
            s += r.weights[i] * integrand(0.5 * (1.0 + r.nodes[i]));
        double cur = std::exp(lpref) * s;
        if (!std::isnan(prev) && std::abs(cur - prev) <= tol.rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

// Gaussian Q-function.
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

} // namespace mftr::sf

#endif
