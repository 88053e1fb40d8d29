#ifndef MFTR_QUADRATURE_HPP
#define MFTR_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "mftr/common.hpp"

namespace mftr::sf {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Eigenvalues of a symmetric tridiagonal matrix, implicit QL with shifts.
// diag/off are destroyed; off[0..n-2] are the subdiagonal entries.
inline void tridiag_eigenvalues(std::vector<double>& diag, std::vector<double>& off) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    off.resize(n, 0.0); // off[n-1] used as scratch zero
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        for (;;) {
            std::size_t m = l;
            for (; m + 1 < n; ++m) {
                double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(off[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m == l) break;
            if (++iter > 50) throw numeric_error("tridiagonal QL failed to converge");
            double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            double r = std::hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow_restart = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * off[i];
                double b = c * off[i];
                r = std::hypot(f, g);
                off[i + 1] = r;
                if (r == 0.0) {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow_restart = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if (underflow_restart) continue;
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    std::sort(diag.begin(), diag.end());
}

// Golub-Welsch from the monic three-term recurrence x p_k = p_{k+1} + a_k p_k + b_k p_{k-1}.
// m0 is the total mass of the weight function.
inline QuadRule golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double m0) {
    const std::size_t n = a.size();
    std::vector<double> diag = a;
    std::vector<double> off(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) off[k - 1] = std::sqrt(b[k]);
    tridiag_eigenvalues(diag, off);

    QuadRule rule;
    rule.nodes = diag;
    rule.weights.resize(n);
    // Christoffel numbers via the orthonormal-polynomial recurrence; the
    // polynomials overflow double at the outermost Laguerre nodes for large
    // n, so the loop rescales (those weights underflow to an honest zero).
    std::vector<double> sb(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) sb[k] = std::sqrt(b[k]);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = rule.nodes[j];
        double pm = 0.0, pk = 1.0 / std::sqrt(m0);
        double sum = pk * pk;
        double logscale = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double pn = ((x - a[k]) * pk - (k > 0 ? sb[k] : 0.0) * pm) / sb[k + 1];
            pm = pk;
            pk = pn;
            sum += pk * pk;
            if (std::abs(pk) > 1e140) {
                pk *= 1e-140;
                pm *= 1e-140;
                sum *= 1e-280;
                logscale += 280.0 * std::log(10.0);
            }
        }
        rule.weights[j] = std::exp(-logscale - std::log(sum));
    }
    return rule;
}

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

} // namespace detail

// Gauss-Jacobi on [-1,1] for weight (1-x)^alpha (1+x)^beta, alpha,beta > -1.
inline QuadRule make_gauss_jacobi(std::size_t n, double alpha, double beta) {
    std::vector<double> a(n), b(n, 0.0);
    const double ab = alpha + beta;
    for (std::size_t k = 0; k < n; ++k) {
        double kk = static_cast<double>(k);
        if (k == 0) {
            a[k] = (beta - alpha) / (ab + 2.0); // generic formula is 0/0 at ab = 0
        } else {
            double den = (2.0 * kk + ab) * (2.0 * kk + ab + 2.0);
            a[k] = (beta * beta - alpha * alpha) / den;
        }
        if (k > 0) {
            double num = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab);
            double d2 = (2.0 * kk + ab) * (2.0 * kk + ab) * (2.0 * kk + ab + 1.0) * (2.0 * kk + ab - 1.0);
            b[k] = num / d2;
        }
    }
    double m0 = std::exp((ab + 1.0) * std::log(2.0) + detail::log_beta(alpha + 1.0, beta + 1.0));
    return detail::golub_welsch(a, b, m0);
}

// Generalized Gauss-Laguerre on [0,inf) for weight x^alpha e^{-x}, alpha > -1.
inline QuadRule make_gauss_laguerre(std::size_t n, double alpha) {
    std::vector<double> a(n), b(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double kk = static_cast<double>(k);
        a[k] = 2.0 * kk + alpha + 1.0;
        if (k > 0) b[k] = kk * (kk + alpha);
    }
    return detail::golub_welsch(a, b, std::exp(std::lgamma(alpha + 1.0)));
}

inline QuadRule make_gauss_legendre(std::size_t n) { return make_gauss_jacobi(n, 0.0, 0.0); }

namespace detail {

enum class RuleKind { legendre, jacobi, laguerre };

inline const QuadRule& cached_rule(RuleKind kind, std::size_t n, double alpha, double beta) {
    using Key = std::tuple<int, std::size_t, double, double>;
    static std::map<Key, std::unique_ptr<QuadRule>> cache;
    static std::mutex mtx;
    Key key{static_cast<int>(kind), n, alpha, beta};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it == cache.end()) {
        QuadRule r;
        switch (kind) {
        case RuleKind::legendre: r = make_gauss_legendre(n); break;
        case RuleKind::jacobi: r = make_gauss_jacobi(n, alpha, beta); break;
        case RuleKind::laguerre: r = make_gauss_laguerre(n, alpha); break;
        }
        it = cache.emplace(key, std::make_unique<QuadRule>(std::move(r))).first;
    }
    return *it->second;
}

} // namespace detail

inline const QuadRule& gauss_legendre(std::size_t n) {
    return detail::cached_rule(detail::RuleKind::legendre, n, 0.0, 0.0);
}
inline const QuadRule& gauss_jacobi(std::size_t n, double alpha, double beta) {
    return detail::cached_rule(detail::RuleKind::jacobi, n, alpha, beta);
}
inline const QuadRule& gauss_laguerre(std::size_t n, double alpha) {
    return detail::cached_rule(detail::RuleKind::laguerre, n, alpha, 0.0);
}

// Fixed Gauss-Legendre integral over [a,b].
template <typename F>
double gl_integrate(F&& f, double a, double b, std::size_t n) {
    const QuadRule& r = gauss_legendre(n);
    const double c = 0.5 * (b - a), d = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(d + c * r.nodes[i]);
    return c * s;
}

// Node-doubling Gauss-Legendre until successive values agree.
template <typename F>
double gl_integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                             double abs_tol = 1e-300, std::size_t n0 = 64, std::size_t nmax = 4096) {
    double prev = gl_integrate(f, a, b, n0);
    for (std::size_t n = n0 * 2; n <= nmax; n *= 2) {
        double cur = gl_integrate(f, a, b, n);
        if (std::abs(cur - prev) <= std::max(abs_tol, rel_tol * std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

namespace detail {

// QUADPACK 15-point Kronrod / 7-point Gauss pair.
inline constexpr double gk15_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double gk15_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk15_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gk15_panel(F& f, double a, double b, double& integral, double& err) {
    const double c = 0.5 * (b - a), d = 0.5 * (a + b);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 8; ++i) {
        if (i == 7) {
            double v = f(d);
            fk += gk15_wk[7] * v;
            fg += gk15_wg[3] * v;
        } else {
            double v1 = f(d - c * gk15_x[i]);
            double v2 = f(d + c * gk15_x[i]);
            fk += gk15_wk[i] * (v1 + v2);
            if (i % 2 == 1) fg += gk15_wg[i / 2] * (v1 + v2);
        }
    }
    integral = c * fk;
    err = std::abs(c * (fk - fg));
}

template <typename F>
double gk_adaptive_impl(F& f, double a, double b, double abs_tol, double rel_tol, int depth) {
    double integral, err;
    gk15_panel(f, a, b, integral, err);
    if (err <= std::max(abs_tol, rel_tol * std::abs(integral)) || depth >= 48 ||
        b - a <= std::abs(a) * 1e-15)
        return integral;
    double mid = 0.5 * (a + b);
    return gk_adaptive_impl(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1) +
           gk_adaptive_impl(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1);
}

} // namespace detail

// Adaptive Gauss-Kronrod over a finite interval.
template <typename F>
double gk_integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10) {
    return detail::gk_adaptive_impl(f, a, b, abs_tol, rel_tol, 0);
}

// log of integral_0^inf exp(log_f(t)) dt for a single-peaked log-integrand.
// t_peak locates (approximately) the maximum; integration runs on y = ln t
// by the trapezoid rule, halving the step until two passes agree.
template <typename F>
double log_integral_positive(F&& log_f, double t_peak, double rel_tol = 1e-13) {
    const double y0 = std::log(std::max(t_peak, 1e-300));
    auto g = [&](double y) { return log_f(std::exp(y)) + y; };
    const double g0 = g(y0);
    // curvature estimate fixes the initial step
    const double dlt = 1e-3;
    double curv = (g(y0 + dlt) - 2.0 * g0 + g(y0 - dlt)) / (dlt * dlt);
    double sigma = (curv < -1e-12) ? 1.0 / std::sqrt(-curv) : 1.0;
    double h = std::clamp(sigma / 6.0, 1e-6, 0.25);

    const double drop = 52.0; // exp(-52) ~ 3e-23 relative: negligible tail
    auto pass = [&](double step) {
        double sum = 1.0; // exp(g0 - g0)
        for (int dir : {-1, 1}) {
            double y = y0;
            for (std::size_t i = 1; i < 2000000; ++i) {
                y += dir * step;
                double gv = g(y) - g0;
                if (gv < -drop) break;
                sum += std::exp(gv);
            }
        }
        return std::log(sum * step);
    };
    double prev = pass(h);
    for (int pass_idx = 0; pass_idx < 6; ++pass_idx) {
        h *= 0.5;
        const double cur = pass(h);
        if (std::abs(cur - prev) <= rel_tol) return g0 + cur;
        prev = cur;
    }
    return g0 + prev;
}

} // namespace mftr::sf

#endif
