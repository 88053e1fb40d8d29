#ifndef MFTR_STATS_HPP
#define MFTR_STATS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "mftr/common.hpp"
#include "mftr/laplace.hpp"
#include "mftr/mixture.hpp"
#include "mftr/model.hpp"
#include "mftr/quadrature.hpp"
#include "mftr/special_functions.hpp"

namespace mftr {

struct DensityCurve {
    enum class Domain { snr, envelope };
    enum class Kind { pdf, cdf };
    std::vector<double> abscissae;
    std::vector<double> values;
    Domain domain = Domain::snr;
    Kind kind = Kind::pdf;
};

namespace detail {

// mgf_inversion is restricted to integer m within the Legendre degree range
// the complex recurrence handles comfortably.
inline constexpr double kInversionDegreeMax = 500.0;

inline bool inversion_applicable(const MftrParams& p) {
    return has_integer_m(p) && p.m <= kInversionDegreeMax;
}

inline Method resolve_method(const MftrParams& p, double x, Method want) {
    if (want == Method::automatic) {
        if (inversion_applicable(p)) return Method::mgf_inversion;
        return (x <= 5.0 * p.gamma_bar) ? Method::gamma_series : Method::theta_integral;
    }
    if (want == Method::mgf_inversion && !inversion_applicable(p))
        throw validation_error("method", "mgf_inversion requires integer m (m <= 500)");
    return want;
}

// ----- shared mixture cache -----

inline const GammaMixture& cached_mixture(const MftrParams& p, const Tolerance& tol) {
    using Key = std::tuple<double, double, double, double, double, double, std::size_t>;
    static std::map<Key, std::unique_ptr<GammaMixture>> cache;
    static std::mutex mtx;
    Key key{p.k, p.delta, p.m, p.mu, p.gamma_bar, tol.abs_tol, tol.max_terms};
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    auto mix = std::make_unique<GammaMixture>(gamma_mixture_weights(p, tol));
    std::lock_guard<std::mutex> lock(mtx);
    auto [it, inserted] = cache.emplace(key, std::move(mix));
    return *it->second;
}

inline Tolerance mixture_tol(const Tolerance& t) {
    return Tolerance{std::min(t.abs_tol, 1e-10), t.rel_tol, std::min<std::size_t>(t.max_terms, 20000)};
}

// ----- gamma-series route -----

inline double pdf_gamma_series(const MftrParams& p, double x, const Tolerance& tol) {
    const GammaMixture& mix = cached_mixture(p, mixture_tol(tol));
    const double y = mix.rate * x;
    if (x == 0.0) {
        if (p.mu > 1.0) return 0.0;
        if (p.mu == 1.0) return mix.weights[0] * mix.rate;
        return std::numeric_limits<double>::infinity();
    }
    const double ly = std::log(y);
    double sum = 0.0;
    double c = p.mu * ly - std::lgamma(p.mu); // log[(rate x)^{mu+i}/Gamma(mu+i)] at i=0
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        sum += mix.weights[i] * std::exp(c);
        c += ly - std::log(p.mu + static_cast<double>(i));
    }
    return sum * mix.rate / y * std::exp(-y);
}

inline double cdf_gamma_series(const MftrParams& p, double x, const Tolerance& tol) {
    if (x <= 0.0) return 0.0;
    const GammaMixture& mix = cached_mixture(p, mixture_tol(tol));
    const double y = mix.rate * x;
    double sum = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        const double pi = sf::reg_lower_gamma(mix.shapes[i], y);
        sum += mix.weights[i] * pi;
        if (pi < 1e-17 * sum) break; // remaining components only get smaller
    }
    return std::min(1.0, sum);
}

// ----- theta-integral route (conditional kappa-mu shadowed, averaged) -----

struct ThetaNodeCtx {
    double weight;   // GL weight / pi
    double lpref;    // log prefactor of the conditional pdf, x-independent part
    double zscale;   // 1F1 argument per unit x
};

inline std::vector<ThetaNodeCtx> theta_nodes(const MftrParams& p, std::size_t n) {
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    const sf::QuadRule& r = sf::gauss_legendre(n);
    std::vector<ThetaNodeCtx> out(r.nodes.size());
    const double lbase = mu * std::log(mu) + m * std::log(m) + mu * std::log1p(K) -
                         std::lgamma(mu) - mu * std::log(gb);
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        const double th = 0.5 * M_PI * (1.0 + r.nodes[j]);
        const double lk = mu * K * (1.0 + D * std::cos(th)) + m;
        out[j].weight = 0.5 * M_PI * r.weights[j] / M_PI;
        out[j].lpref = lbase - m * std::log(lk);
        out[j].zscale = mu * mu * K * (1.0 + D * std::cos(th)) * (1.0 + K) / (lk * gb);
    }
    return out;
}

inline double conditional_pdf_log(const MftrParams& p, const ThetaNodeCtx& ctx, double x,
                                  const Tolerance& tol) {
    const double mu = p.mu, gb = p.gamma_bar;
    double lf = ctx.lpref + (mu - 1.0) * std::log(x) - mu * (1.0 + p.k) * x / gb;
    const double z = ctx.zscale * x;
    if (z > 0.0 && p.k > 0.0) {
        // 1F1(a;b;z) <= exp(max(1,a/b) z); skip the series when the result
        // underflows to zero anyway
        if (lf + std::max(1.0, p.m / mu) * z < -745.0)
            return -std::numeric_limits<double>::infinity();
        lf += sf::kummer_1f1(p.m, mu, z, tol).log_mag;
    }
    return lf;
}

template <typename PerNode>
double theta_adaptive(const MftrParams& p, const Tolerance& tol, PerNode&& eval_many,
                      std::vector<double>& out) {
    // eval_many(nodes, out): fills out[] with the averaged values
    std::vector<double> prev;
    double delta = std::numeric_limits<double>::infinity();
    for (std::size_t n = 64; n <= 2048; n *= 2) {
        auto nodes = theta_nodes(p, n);
        out.assign(out.size(), 0.0);
        eval_many(nodes, out);
        if (!prev.empty()) {
            delta = 0.0;
            for (std::size_t j = 0; j < out.size(); ++j) {
                double scale = std::max({std::abs(out[j]), std::abs(prev[j]), tol.abs_tol});
                delta = std::max(delta, std::abs(out[j] - prev[j]) / scale);
            }
            if (delta <= std::max(tol.rel_tol, 1e-12)) return delta;
        }
        prev = out;
    }
    return delta;
}

inline std::vector<double> pdf_theta_many(const MftrParams& p, std::span<const double> xs,
                                          const Tolerance& tol) {
    std::vector<double> out(xs.size(), 0.0);
    theta_adaptive(p, tol,
                   [&](const std::vector<ThetaNodeCtx>& nodes, std::vector<double>& acc) {
                       for (const auto& ctx : nodes) {
                           for (std::size_t j = 0; j < xs.size(); ++j) {
                               if (xs[j] == 0.0) {
                                   if (p.mu == 1.0)
                                       acc[j] += ctx.weight * std::exp(ctx.lpref);
                                   else if (p.mu < 1.0)
                                       acc[j] = std::numeric_limits<double>::infinity();
                                   continue;
                               }
                               acc[j] += ctx.weight *
                                         std::exp(conditional_pdf_log(p, ctx, xs[j], tol));
                           }
                       }
                   },
                   out);
    return out;
}

// Conditional CDF by cumulative quadrature of the conditional PDF across the
// sorted abscissae; the first segment is transformed by t = y^{1/mu} when the
// density is singular at the origin.
inline std::vector<double> cdf_theta_many_sorted(const MftrParams& p, std::span<const double> xs,
                                                 const Tolerance& tol) {
    std::vector<double> out(xs.size(), 0.0);
    const double mu = p.mu;
    theta_adaptive(p, tol,
                   [&](const std::vector<ThetaNodeCtx>& nodes, std::vector<double>& acc) {
                       for (const auto& ctx : nodes) {
                           auto f = [&](double t) {
                               return std::exp(conditional_pdf_log(p, ctx, t, tol));
                           };
                           double cum = 0.0;
                           double lo = 0.0;
                           for (std::size_t j = 0; j < xs.size(); ++j) {
                               const double hi = xs[j];
                               if (hi > lo) {
                                   if (lo == 0.0 && mu < 1.0) {
                                       // remove the x^{mu-1} singularity exactly
                                       auto g = [&](double y) {
                                           const double t = std::pow(y, 1.0 / mu);
                                           return std::exp(conditional_pdf_log(p, ctx, t, tol) +
                                                           (1.0 / mu - 1.0) * std::log(y) -
                                                           std::log(mu));
                                       };
                                       cum += sf::gk_integrate(g, 0.0, std::pow(hi, mu), 1e-14,
                                                               1e-10);
                                   } else {
                                       cum += sf::gk_integrate(f, lo, hi, 1e-14, 1e-10);
                                   }
                                   lo = hi;
                               }
                               acc[j] += ctx.weight * cum;
                           }
                       }
                   },
                   out);
    for (double& v : out) v = std::min(1.0, std::max(0.0, v));
    return out;
}

// ----- MGF-inversion route -----

inline sf::LaplaceInversionConfig inversion_config(const Tolerance&) {
    return sf::LaplaceInversionConfig{};
}

inline double pdf_mgf_inversion(const MftrParams& p, double x, const Tolerance& tol) {
    auto F = [&](std::complex<double> s) { return mgf_complex(p, -s); };
    const double v = sf::inverse_laplace(F, x, inversion_config(tol));
    return std::max(0.0, v);
}

inline double cdf_mgf_inversion(const MftrParams& p, double x, const Tolerance& tol) {
    auto F = [&](std::complex<double> s) { return mgf_complex(p, -s) / s; };
    const double v = sf::inverse_laplace(F, x, inversion_config(tol));
    return std::min(1.0, std::max(0.0, v));
}

inline double pdf_at_zero(const MftrParams& p, const Tolerance& tol) {
    if (p.mu > 1.0) return 0.0;
    if (p.mu < 1.0) return std::numeric_limits<double>::infinity();
    return pdf_gamma_series(p, 0.0, tol);
}

} // namespace detail

// ----- public statistics API -----

inline double pdf(const MftrParams& p, double x, const EvalMethod& how = {}) {
    validate(p);
    if (x < 0.0) throw validation_error("x", "pdf requires x >= 0");
    if (x == 0.0) return detail::pdf_at_zero(p, how.tol);
    switch (detail::resolve_method(p, x, how.method)) {
    case Method::mgf_inversion: return detail::pdf_mgf_inversion(p, x, how.tol);
    case Method::gamma_series: return detail::pdf_gamma_series(p, x, how.tol);
    default: {
        std::array<double, 1> xs{x};
        return detail::pdf_theta_many(p, xs, how.tol)[0];
    }
    }
}

inline double cdf(const MftrParams& p, double x, const EvalMethod& how = {}) {
    validate(p);
    if (x < 0.0) throw validation_error("x", "cdf requires x >= 0");
    if (x == 0.0) return 0.0;
    switch (detail::resolve_method(p, x, how.method)) {
    case Method::mgf_inversion: return detail::cdf_mgf_inversion(p, x, how.tol);
    case Method::gamma_series: return detail::cdf_gamma_series(p, x, how.tol);
    default: {
        std::array<double, 1> xs{x};
        return detail::cdf_theta_many_sorted(p, xs, how.tol)[0];
    }
    }
}

namespace detail {

inline Method resolve_batch_method(const MftrParams& p, std::span<const double> xs, Method want) {
    if (want != Method::automatic) {
        if (want == Method::mgf_inversion && !inversion_applicable(p))
            throw validation_error("method", "mgf_inversion requires integer m (m <= 500)");
        return want;
    }
    if (inversion_applicable(p)) return Method::mgf_inversion;
    // real m: gamma series unless the batch reaches into the deep tail
    for (double x : xs)
        if (x > 5.0 * p.gamma_bar) return Method::theta_integral;
    return Method::gamma_series;
}

} // namespace detail

inline std::vector<double> pdf_many(const MftrParams& p, std::span<const double> xs,
                                    const EvalMethod& how = {}) {
    validate(p);
    const Method mth = detail::resolve_batch_method(p, xs, how.method);
    if (mth == Method::theta_integral) return detail::pdf_theta_many(p, xs, how.tol);
    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j)
        out[j] = pdf(p, xs[j], EvalMethod{mth, how.tol});
    return out;
}

inline std::vector<double> cdf_many(const MftrParams& p, std::span<const double> xs,
                                    const EvalMethod& how = {}) {
    validate(p);
    const Method mth = detail::resolve_batch_method(p, xs, how.method);
    if (mth == Method::theta_integral) {
        std::vector<std::size_t> order(xs.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
        std::vector<double> sorted(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) sorted[j] = xs[order[j]];
        auto vals = detail::cdf_theta_many_sorted(p, sorted, how.tol);
        std::vector<double> out(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) out[order[j]] = vals[j];
        return out;
    }
    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j)
        out[j] = cdf(p, xs[j], EvalMethod{mth, how.tol});
    return out;
}

// Envelope-domain density f_R(r) = 2 r f_gamma(r^2), gamma_bar read as Omega.
inline double envelope_pdf(const MftrParams& p, double r, const EvalMethod& how = {}) {
    if (r < 0.0) throw validation_error("r", "envelope_pdf requires r >= 0");
    if (r == 0.0) {
        if (p.mu > 0.5) return 0.0;
        if (p.mu < 0.5) return std::numeric_limits<double>::infinity();
        const GammaMixture& mix = detail::cached_mixture(p, detail::mixture_tol(how.tol));
        return 2.0 * mix.weights[0] * std::pow(mix.rate, p.mu) / std::tgamma(p.mu);
    }
    return 2.0 * r * pdf(p, r * r, how);
}

inline double envelope_cdf(const MftrParams& p, double r, const EvalMethod& how = {}) {
    if (r < 0.0) throw validation_error("r", "envelope_cdf requires r >= 0");
    return cdf(p, r * r, how);
}

inline std::vector<double> envelope_pdf_many(const MftrParams& p, std::span<const double> rs,
                                             const EvalMethod& how = {}) {
    std::vector<double> xs(rs.size());
    for (std::size_t j = 0; j < rs.size(); ++j) xs[j] = rs[j] * rs[j];
    auto vals = pdf_many(p, xs, how);
    for (std::size_t j = 0; j < rs.size(); ++j) {
        if (rs[j] == 0.0)
            vals[j] = envelope_pdf(p, 0.0, how);
        else
            vals[j] *= 2.0 * rs[j];
    }
    return vals;
}

// E{gamma^2} in closed form (second moment of the MFTR SNR).
inline double second_moment(const MftrParams& p) {
    validate(p);
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;
    return gb * gb *
           (m * (1.0 + mu) * (1.0 + 2.0 * K) + mu * K * K * (1.0 + D * D / 2.0) * (1.0 + m)) /
           (m * mu * (1.0 + K) * (1.0 + K));
}

// Amount of fading, V{gamma}/E{gamma}^2.
inline double aof(const MftrParams& p) {
    validate(p);
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu;
    const double kk = K * K / ((1.0 + K) * (1.0 + K));
    return (1.0 - kk) * (1.0 + 1.0 / mu) + kk * (1.0 + 1.0 / m) * (1.0 + D * D / 2.0) - 1.0;
}

// ----- Table-I special-case reductions -----

enum class SpecialCase {
    one_sided_gaussian,
    rayleigh,
    hoyt,
    nakagami_m,
    rician,
    rician_shadowed,
    kappa_mu_shadowed,
    kappa_mu,
    eta_mu,
    twdp,
    two_wave,
    ftr,
    fluctuating_two_wave,
};

// Numeric stand-in for the table's "-> infinity" entries.
inline constexpr double kLargeShape = 1e6;

struct ShapeInputs {
    double q = std::numeric_limits<double>::quiet_NaN();     // Hoyt
    double kappa = std::numeric_limits<double>::quiet_NaN(); // kappa-mu family / Rician K
    double m = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();   // eta-mu
    double delta = std::numeric_limits<double>::quiet_NaN(); // two-ray family
};

inline MftrParams special_case_params(SpecialCase c, const ShapeInputs& in, double gamma_bar = 1.0) {
    auto need = [](double v, const char* name) {
        if (std::isnan(v)) throw validation_error(name, std::string("missing shape input ") + name);
        return v;
    };
    switch (c) {
    case SpecialCase::one_sided_gaussian: return validate({0.0, 0.0, 1.0, 0.5, gamma_bar});
    case SpecialCase::rayleigh: return validate({0.0, 0.0, 1.0, 1.0, gamma_bar});
    case SpecialCase::hoyt: {
        const double q = need(in.q, "q");
        if (!(q > 0.0 && q <= 1.0)) throw validation_error("q", "Hoyt q must be in (0,1]");
        return validate({(1.0 - q * q) / (2.0 * q * q), 1.0, 1.0, 1.0, gamma_bar});
    }
    case SpecialCase::nakagami_m: return validate({0.0, 0.0, 1.0, need(in.m, "m"), gamma_bar});
    case SpecialCase::rician:
        return validate({need(in.kappa, "kappa"), 0.0, kLargeShape, 1.0, gamma_bar});
    case SpecialCase::rician_shadowed:
        return validate({need(in.kappa, "kappa"), 0.0, need(in.m, "m"), 1.0, gamma_bar});
    case SpecialCase::kappa_mu_shadowed:
        return validate({need(in.kappa, "kappa"), 0.0, need(in.m, "m"), need(in.mu, "mu"), gamma_bar});
    case SpecialCase::kappa_mu:
        return validate({need(in.kappa, "kappa"), 0.0, kLargeShape, need(in.mu, "mu"), gamma_bar});
    case SpecialCase::eta_mu: {
        const double eta = need(in.eta, "eta");
        if (!(eta > 0.0 && eta < 1.0)) throw validation_error("eta", "eta-mu requires eta in (0,1)");
        const double mu2 = need(in.mu, "mu");
        return validate({(1.0 - eta) / (2.0 * eta), 0.0, mu2, 2.0 * mu2, gamma_bar});
    }
    case SpecialCase::twdp:
        return validate({need(in.kappa, "kappa"), need(in.delta, "delta"), kLargeShape, 1.0, gamma_bar});
    case SpecialCase::two_wave:
        return validate({kLargeShape, need(in.delta, "delta"), kLargeShape, 1.0, gamma_bar});
    case SpecialCase::ftr:
        return validate({need(in.kappa, "kappa"), need(in.delta, "delta"), need(in.m, "m"), 1.0, gamma_bar});
    case SpecialCase::fluctuating_two_wave:
        return validate({kLargeShape, need(in.delta, "delta"), need(in.m, "m"), 1.0, gamma_bar});
    }
    throw validation_error("case", "unknown special case");
}

// Strict interior local maxima of a sampled curve (bimodality probe).
inline std::size_t count_local_maxima(std::span<const double> values) {
    std::size_t count = 0;
    // collapse plateaus: compare against the previous strictly different value
    std::vector<double> v;
    for (double y : values)
        if (v.empty() || y != v.back()) v.push_back(y);
    for (std::size_t j = 1; j + 1 < v.size(); ++j)
        if (v[j] > v[j - 1] && v[j] > v[j + 1]) ++count;
    return count;
}

inline DensityCurve density_curve(const MftrParams& p, DensityCurve::Domain domain,
                                  DensityCurve::Kind kind, std::span<const double> xs,
                                  const EvalMethod& how = {}) {
    DensityCurve curve;
    curve.domain = domain;
    curve.kind = kind;
    curve.abscissae.assign(xs.begin(), xs.end());
    if (domain == DensityCurve::Domain::envelope) {
        if (kind == DensityCurve::Kind::pdf) {
            curve.values = envelope_pdf_many(p, xs, how);
        } else {
            std::vector<double> sq(xs.size());
            for (std::size_t j = 0; j < xs.size(); ++j) sq[j] = xs[j] * xs[j];
            curve.values = cdf_many(p, sq, how);
        }
    } else {
        curve.values = (kind == DensityCurve::Kind::pdf) ? pdf_many(p, xs, how) : cdf_many(p, xs, how);
    }
    return curve;
}

} // namespace mftr

#endif
