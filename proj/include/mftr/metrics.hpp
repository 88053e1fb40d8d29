#ifndef MFTR_METRICS_HPP
#define MFTR_METRICS_HPP

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mftr/common.hpp"
#include "mftr/mixture.hpp"
#include "mftr/model.hpp"
#include "mftr/special_functions.hpp"
#include "mftr/stats.hpp"

namespace mftr {

// CEP constants P_E(x) = sum_r alpha_r Q(sqrt(beta_r x)).
struct Modulation {
    std::vector<std::pair<double, double>> terms; // (alpha_r, beta_r)

    static Modulation bpsk() { return Modulation{{{1.0, 2.0}}}; }

    void check() const {
        if (terms.empty()) throw validation_error("modulation", "needs at least one CEP term");
        for (auto [a, b] : terms)
            if (!(a > 0.0) || !(b > 0.0))
                throw validation_error("modulation", "CEP constants must be positive");
    }
};

struct MetricDiagnostics {
    std::size_t truncation_terms = 0;
    std::size_t quadrature_nodes = 0;
    double tail_bound = 0.0;
};

struct MetricResult {
    double value = 0.0;
    std::string method;
    MetricDiagnostics diag;
};

// ----- outage probability -----

inline double outage_threshold(double r_th) {
    if (!(r_th > 0.0)) throw validation_error("r_th", "threshold rate must be > 0");
    return std::exp2(r_th) - 1.0;
}

// P_out = F_gamma(2^{R_th} - 1). The automatic method resolves to the Gamma
// series, which keeps relative accuracy in the deep lower tail.
inline MetricResult outage_probability(const MftrParams& p, double r_th, EvalMethod how = {}) {
    validate(p);
    if (how.method == Method::automatic) how.method = Method::gamma_series;
    MetricResult res;
    res.value = cdf(p, outage_threshold(r_th), how);
    res.method = how.method == Method::gamma_series
                     ? "gamma_series"
                     : (how.method == Method::mgf_inversion ? "mgf_inversion" : "theta_integral");
    return res;
}

// High-SNR asymptote P_out ~ G_c (gamma_th/gamma_bar)^mu.
inline MetricResult outage_asymptotic(const MftrParams& p, double r_th) {
    validate(p);
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double gth = outage_threshold(r_th);
    const double den = K * mu * (1.0 - D) + m;
    const double hyp = sf::gauss_2f1(0.5, m, 1.0, -2.0 * D * K * mu / den);
    const double lg = (mu - 1.0) * std::log(mu) + mu * std::log1p(K) + m * std::log(m) +
                      mu * std::log(gth) - std::lgamma(mu) - mu * std::log(gb) -
                      m * std::log(den);
    MetricResult res;
    res.value = std::exp(lg) * hyp;
    res.method = "asymptotic";
    return res;
}

// ----- average BER -----

enum class BerMethod { automatic, closed_form, quadrature };

namespace detail {

// Alternating q-sum cancellation grows like 2^{m-1}; past this bound the
// quadrature route is the accurate one.
inline constexpr double kBerClosedFormMMax = 20.0;

inline MetricResult avg_ber_closed_form(const MftrParams& p, const Modulation& mod,
                                        const Tolerance& tol) {
    if (!has_integer_m(p) || p.m > kBerClosedFormMMax)
        throw validation_error("m", "closed-form BER requires integer m <= 20");
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const unsigned mm = static_cast<unsigned>(std::lround(m));
    const double cp = std::sqrt((m + mu * K) * (m + mu * K) - (mu * K * D) * (mu * K * D));
    const double a1 = (1.0 + K) * m * mu / ((m + mu * K) * gb);
    const double a2 = (1.0 + K) * m * mu / ((m + mu * K * (1.0 + D)) * gb);
    const double a3 = (1.0 + K) * m * mu / ((m + mu * K * (1.0 - D)) * gb);
    const double a4 = (1.0 + K) * mu / gb;
    const double lpref = mu * std::log1p(K) + mu * std::log(mu) - (m - 1.0) * std::log(2.0) -
                         std::lgamma(mu + 1.0) - mu * std::log(gb) + m * std::log(m / cp);
    const double lrat = std::log((m + mu * K) / cp);

    double qsum = 0.0;
    for (unsigned q = 0; q <= (mm - 1) / 2; ++q) {
        const std::array<double, 4> bq{1.0 + 2.0 * q - m, m - q - 0.5, m - q - 0.5, mu - m};
        double rsum = 0.0;
        for (auto [alpha, beta] : mod.terms) {
            const std::array<double, 4> xs{-2.0 * a1 / beta, -2.0 * a2 / beta, -2.0 * a3 / beta,
                                           -2.0 * a4 / beta};
            const double fd = sf::lauricella_fd4(mu + 0.5, bq, mu + 1.0, xs, tol);
            rsum += alpha * std::exp((mu - 1.0) * std::log(2.0) - mu * std::log(beta) -
                                     0.5 * std::log(M_PI) + std::lgamma(mu + 0.5)) *
                    fd;
        }
        const double mag = std::exp(sf::legendre_coeff_log(mm - 1, q) + (m - 1.0 - 2.0 * q) * lrat);
        qsum += (q % 2 == 0 ? 1.0 : -1.0) * mag * rsum;
    }
    MetricResult res;
    res.value = std::min(0.5, std::max(0.0, std::exp(lpref) * qsum));
    res.method = "closed_form";
    res.diag.truncation_terms = (mm - 1) / 2 + 1;
    return res;
}

inline MetricResult avg_ber_quadrature(const MftrParams& p, const Modulation& mod,
                                       const Tolerance& tol) {
    // -int P_E'(x) F(x) dx with the x^{-1/2} e^{-beta x/2} weight handled by
    // generalized Gauss-Laguerre (alpha = -1/2)
    MetricResult res;
    res.method = "quadrature";
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 64; n <= 1024; n *= 2) {
        const sf::QuadRule& rule = sf::gauss_laguerre(n, -0.5);
        double total = 0.0;
        for (auto [alpha, beta] : mod.terms) {
            double s = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j)
                s += rule.weights[j] *
                     detail::cdf_gamma_series(p, 2.0 * rule.nodes[j] / beta, tol);
            total += alpha / (2.0 * std::sqrt(M_PI)) * s;
        }
        res.diag.quadrature_nodes = n;
        if (!std::isnan(prev) && std::abs(total - prev) <= 1e-10 * std::abs(total)) {
            res.value = total;
            return res;
        }
        prev = total;
    }
    res.value = prev;
    return res;
}

} // namespace detail

inline MetricResult avg_ber(const MftrParams& p, const Modulation& mod,
                            BerMethod method = BerMethod::automatic,
                            const Tolerance& tol = Tolerance{}) {
    validate(p);
    mod.check();
    if (method == BerMethod::automatic)
        method = (has_integer_m(p) && p.m <= detail::kBerClosedFormMMax) ? BerMethod::closed_form
                                                                         : BerMethod::quadrature;
    return method == BerMethod::closed_form ? detail::avg_ber_closed_form(p, mod, tol)
                                            : detail::avg_ber_quadrature(p, mod, tol);
}

// High-SNR asymptote of the average BER, G_d = mu.
inline MetricResult avg_ber_asymptotic(const MftrParams& p, const Modulation& mod) {
    validate(p);
    mod.check();
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double c2 = (m + mu * K) * (m + mu * K) - (mu * K * D) * (mu * K * D);
    if (!(c2 > 0.0)) throw numeric_error("avg_ber_asymptotic degenerate: (m+muK)^2 = (muK Delta)^2");
    const double cp = std::sqrt(c2);
    const double z = (m + mu * K) / cp;
    const double leg = has_integer_m(p)
                           ? sf::legendre_poly(static_cast<unsigned>(std::lround(m)) - 1, z)
                           : sf::legendre_fn_real_degree(m - 1.0, z);
    const double lpref = m * std::log(m) + mu * std::log(mu) + mu * std::log1p(K) -
                         m * std::log(cp) - std::lgamma(mu + 1.0);
    double sum = 0.0;
    for (auto [alpha, beta] : mod.terms)
        sum += alpha * std::exp((mu - 1.0) * std::log(2.0) + std::lgamma(mu + 0.5) -
                                mu * std::log(beta) - 0.5 * std::log(M_PI) - mu * std::log(gb));
    MetricResult res;
    res.value = std::exp(lpref) * leg * sum;
    res.method = "asymptotic";
    return res;
}

// ----- ergodic capacity -----

enum class EcMethod { automatic, series, quadrature };

namespace detail {

// Number of inner-series terms needed for the exp(-2 sqrt(rho k)) decay to
// push the tail below the tolerance.
inline std::size_t ec_inner_terms(double rho, const Tolerance& tol) {
    const double target = std::max(25.0, -std::log(tol.abs_tol)) + 5.0;
    return static_cast<std::size_t>(target * target / (4.0 * rho)) + 60;
}

// One mixture component of Eq-40-style capacity:
//   sum_{k>=1} (1/k) Gamma(k+lam)/Gamma(lam) rho^lam U(k+lam, 1+lam, rho)
// in nats. The U values come from the downward three-term recurrence in the
// first parameter (stable direction; seeds from the integral representation),
// with mutual rescaling of the shrinking Gamma factor against the growing U.
// Returns the component value in nats; *tail_rel gets the relative weight of
// the k_max term's geometric tail within the sum.
inline double ec_component_nats(double lam, double rho, std::size_t k_max, double* tail_rel) {
    const double b = lam + 1.0;
    const double l_hi = sf::log_kummer_u(lam + static_cast<double>(k_max + 1), b, rho);
    const double l_lo = sf::log_kummer_u(lam + static_cast<double>(k_max), b, rho);
    const double km = static_cast<double>(k_max);
    double L = std::lgamma(km + lam) - std::lgamma(lam) + lam * std::log(rho) -
               std::log(km) + l_lo;
    const double L0 = L;
    double up1 = std::exp(l_hi - l_lo);
    double u = 1.0;
    double fv = 1.0;  // Gamma(k+lam) rho^lam / (Gamma(lam) k), relative to k_max
    double sum = 1.0; // term at k_max in the exp(L) scale
    double first_ratio = up1 * (km + lam) * km / (km + 1.0); // t_{k+1}/t_k at k_max
    for (std::size_t k = k_max; k >= 2; --k) {
        const double dk = static_cast<double>(k);
        const double a = lam + dk;
        const double um1 = (2.0 * a - b + rho) * u - a * (a - b + 1.0) * up1;
        up1 = u;
        u = um1;
        fv *= dk / ((dk - 1.0) * (lam + dk - 1.0));
        if (fv < 1e-220) { // rebalance the opposite drifts; scale untouched
            fv *= 1e220;
            u *= 1e-220;
            up1 *= 1e-220;
        }
        if (u > 1e250 || sum > 1e250) { // absorb net growth into the log scale
            u *= 1e-250;
            up1 *= 1e-250;
            sum *= 1e-250;
            L += 250.0 * std::log(10.0);
        }
        sum += fv * u;
    }
    // geometric bound on the truncated k > k_max tail, relative to the sum
    const double r = std::min(first_ratio, 0.999);
    *tail_rel = (r / (1.0 - r)) * std::exp(L0 - L) / sum;
    return std::exp(L + std::log(sum));
}

inline MetricResult ec_series(const MftrParams& p, const Tolerance& tol) {
    const GammaMixture& mix = cached_mixture(p, mixture_tol(tol));
    const double rho = mix.rate; // lambda/nu, shared across components
    std::size_t k_base = std::min<std::size_t>(ec_inner_terms(rho, tol), 32);
    MetricResult res;
    res.method = "series";
    double total = 0.0;
    double last_component = 0.0;
    std::size_t terms = 0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        double comp = 0.0;
        bool ok = false;
        for (std::size_t k_max = std::max(ec_inner_terms(rho, tol) / 8, k_base); !ok;
             k_max *= 4) {
            if (k_max > 2000000)
                throw numeric_error("ergodic-capacity inner series hit the term cap");
            double tail_rel = 0.0;
            comp = ec_component_nats(mix.shapes[i], rho, k_max, &tail_rel);
            terms += k_max;
            ok = tail_rel <= std::max(tol.abs_tol, 1e-12);
        }
        last_component = comp / std::log(2.0);
        total += mix.weights[i] * last_component;
    }
    res.value = total;
    res.diag.truncation_terms = terms;
    res.diag.tail_bound = mix.tail_mass_bound * (last_component + std::log2(1.0 + p.gamma_bar));
    return res;
}

inline MetricResult ec_quadrature(const MftrParams& p, const Tolerance& tol) {
    // (1/pi) int_0^pi [ int log2(1+x) f_{gamma|theta}(x) dx ] dtheta
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const double tail_rate = mu * (1.0 + K) * m / (gb * (mu * K * (1.0 + D) + m));
    const double x_hi = 60.0 / tail_rate + 20.0 * gb;
    MetricResult res;
    res.method = "quadrature";
    std::vector<double> out(1, 0.0);
    detail::theta_adaptive(
        p, tol,
        [&](const std::vector<detail::ThetaNodeCtx>& nodes, std::vector<double>& acc) {
            for (const auto& ctx : nodes) {
                auto g = [&](double x) {
                    if (x <= 0.0) return 0.0;
                    return std::log2(1.0 + x) *
                           std::exp(detail::conditional_pdf_log(p, ctx, x, tol));
                };
                acc[0] += ctx.weight * sf::gk_integrate(g, 0.0, x_hi, 1e-13, 1e-10);
            }
        },
        out);
    res.value = out[0];
    return res;
}

} // namespace detail

// E{log2(1+gamma)}; series route sums the Gamma-mixture expansion with the
// Kummer U kernel, quadrature route integrates against the theta-route PDF.
inline MetricResult ergodic_capacity(const MftrParams& p, const Tolerance& tol = Tolerance{},
                                     EcMethod method = EcMethod::automatic) {
    validate(p);
    if (method == EcMethod::quadrature) return detail::ec_quadrature(p, tol);
    if (method == EcMethod::series) return detail::ec_series(p, tol);
    try {
        return detail::ec_series(p, tol);
    } catch (const numeric_error&) {
        return detail::ec_quadrature(p, tol); // cap hit: quadrature is authoritative
    }
}

} // namespace mftr

#endif
