#ifndef MFTR_FIT_HPP
#define MFTR_FIT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mftr/common.hpp"
#include "mftr/rng.hpp"
#include "mftr/sampling.hpp"
#include "mftr/stats.hpp"

namespace mftr {

enum class FitModel { mftr, ftr, kappa_mu_shadowed };

inline const char* fit_model_name(FitModel m) {
    switch (m) {
    case FitModel::mftr: return "mftr";
    case FitModel::ftr: return "ftr";
    default: return "kappa_mu_shadowed";
    }
}

struct FitConfig {
    std::size_t restarts = 16;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 2000;
    double spread_tol = 1e-10;
    double k_lo = 1e-3, k_hi = 1e3;
    double m_lo = 0.3, m_hi = 200.0;
    double mu_lo = 0.05, mu_hi = 100.0;
    bool include_competitors = true; // MFTR only: fit FTR and kappa-mu shadowed alongside
    bool normalize_input = false;    // rescale data to unit second moment before fitting
    bool parallel = true;
    EvalMethod method{Method::theta_integral, Tolerance{1e-9, 1e-8, 150000}};
};

struct FitResult {
    FitModel model = FitModel::mftr;
    MftrParams params{0.0, 0.0, 1.0, 1.0, 1.0}; // gamma_bar == Omega
    double mse = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restarts_used = 0;
    std::vector<FitResult> competitors;
};

inline void check_empirical(const EmpiricalPdf& data) {
    if (data.abscissae.size() != data.densities.size())
        throw validation_error("data", "abscissae/densities size mismatch");
    if (data.abscissae.size() < 5)
        throw validation_error("data", "need at least T = 5 empirical PDF values");
    for (std::size_t i = 0; i + 1 < data.abscissae.size(); ++i)
        if (!(data.abscissae[i + 1] > data.abscissae[i]))
            throw validation_error("data", "abscissae must be strictly increasing");
    for (double r : data.abscissae)
        if (!(r > 0.0)) throw validation_error("data", "abscissae must be positive");
    for (double d : data.densities)
        if (!(d >= 0.0)) throw validation_error("data", "densities must be nonnegative");
}

// integral of the binned density (sanity: ~1 for a proper PDF)
inline double normalization_mass(const EmpiricalPdf& data) {
    auto w = data.implied_widths();
    double s = 0.0;
    for (std::size_t i = 0; i < data.densities.size(); ++i) s += data.densities[i] * w[i];
    return s;
}

// second moment of the binned envelope data; the Omega initializer
inline double binned_second_moment(const EmpiricalPdf& data) {
    auto w = data.implied_widths();
    double m2 = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < data.densities.size(); ++i) {
        m2 += data.densities[i] * data.abscissae[i] * data.abscissae[i] * w[i];
        mass += data.densities[i] * w[i];
    }
    return mass > 0.0 ? m2 / mass : 1.0;
}

// Mean squared deviation between the empirical envelope PDF and the model's.
inline double mse(const MftrParams& p, const EmpiricalPdf& data,
                  const EvalMethod& how = EvalMethod{Method::theta_integral,
                                                     Tolerance{1e-9, 1e-8, 150000}}) {
    check_empirical(data);
    try {
        validate(p);
        // reject parameter corners whose 1F1 argument would blow the term cap
        const double rmax = data.abscissae.back();
        if (p.mu * (1.0 + p.k) * rmax * rmax / p.gamma_bar > 1e5)
            return std::numeric_limits<double>::infinity();
        auto model_vals = envelope_pdf_many(p, data.abscissae, how);
        double acc = 0.0;
        for (std::size_t i = 0; i < data.densities.size(); ++i) {
            const double d = data.densities[i] - model_vals[i];
            acc += d * d;
        }
        const double v = acc / static_cast<double>(data.densities.size());
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

// ----- derivative-free simplex minimizer -----

struct NelderMeadResult {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, double step,
                                    std::size_t max_iter, double spread_tol) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t j = 0; j < n; ++j) xs[j + 1][j] += step;
    std::vector<double> fs(n + 1);
    for (std::size_t j = 0; j <= n; ++j) fs[j] = f(xs[j]);

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> xs2(n + 1);
        std::vector<double> fs2(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            xs2[j] = xs[idx[j]];
            fs2[j] = fs[idx[j]];
        }
        xs.swap(xs2);
        fs.swap(fs2);
    };

    NelderMeadResult res;
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        order();
        if (std::isfinite(fs[n]) && fs[n] - fs[0] <= spread_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> cen(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t d = 0; d < n; ++d) cen[d] += xs[j][d] / static_cast<double>(n);
        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) p[d] = cen[d] + t * (cen[d] - xs[n][d]);
            return p;
        };
        auto xr = blend(1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            auto xe = blend(2.0);
            double fe = f(xe);
            if (fe < fr) {
                xs[n] = std::move(xe);
                fs[n] = fe;
            } else {
                xs[n] = std::move(xr);
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = std::move(xr);
            fs[n] = fr;
        } else {
            auto xc = blend(fr < fs[n] ? 0.5 : -0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = std::move(xc);
                fs[n] = fc;
            } else { // shrink toward the best vertex
                for (std::size_t j = 1; j <= n; ++j) {
                    for (std::size_t d = 0; d < n; ++d)
                        xs[j][d] = xs[0][d] + 0.5 * (xs[j][d] - xs[0][d]);
                    fs[j] = f(xs[j]);
                }
            }
        }
    }
    order();
    res.x = xs[0];
    res.fx = fs[0];
    res.iterations = it;
    return res;
}

namespace detail {

struct FitSpace {
    FitModel model;
    FitConfig cfg;
    double omega0;

    std::size_t dims() const {
        return model == FitModel::mftr ? 5 : 4; // ftr pins mu, kappa-mu shadowed pins delta
    }

    MftrParams decode(const std::vector<double>& u) const {
        auto pick = [&](std::size_t i) { return u[i]; };
        double k, delta, m, mu, omega;
        if (model == FitModel::mftr) {
            k = std::exp(pick(0));
            delta = 1.0 / (1.0 + std::exp(-pick(1)));
            m = std::exp(pick(2));
            mu = std::exp(pick(3));
            omega = std::exp(pick(4));
        } else if (model == FitModel::ftr) {
            k = std::exp(pick(0));
            delta = 1.0 / (1.0 + std::exp(-pick(1)));
            m = std::exp(pick(2));
            mu = 1.0;
            omega = std::exp(pick(3));
        } else {
            k = std::exp(pick(0));
            delta = 0.0;
            m = std::exp(pick(1));
            mu = std::exp(pick(2));
            omega = std::exp(pick(3));
        }
        return MftrParams{k, delta, m, mu, omega};
    }

    bool in_box(const MftrParams& p) const {
        return p.k >= cfg.k_lo && p.k <= cfg.k_hi && p.m >= cfg.m_lo && p.m <= cfg.m_hi &&
               p.mu >= cfg.mu_lo && p.mu <= cfg.mu_hi && p.gamma_bar >= omega0 * 1e-3 &&
               p.gamma_bar <= omega0 * 1e3;
    }

    std::vector<double> encode(const MftrParams& p) const {
        auto logit = [](double d) {
            const double c = std::clamp(d, 1e-6, 1.0 - 1e-6);
            return std::log(c / (1.0 - c));
        };
        if (model == FitModel::mftr)
            return {std::log(p.k), logit(p.delta), std::log(p.m), std::log(p.mu),
                    std::log(p.gamma_bar)};
        if (model == FitModel::ftr)
            return {std::log(p.k), logit(p.delta), std::log(p.m), std::log(p.gamma_bar)};
        return {std::log(p.k), std::log(p.m), std::log(p.mu), std::log(p.gamma_bar)};
    }

    // Latin hypercube start points in the transformed box.
    std::vector<std::vector<double>> lhs_starts(std::size_t count) const {
        const std::size_t d = dims();
        std::vector<std::vector<double>> pts(count, std::vector<double>(d));
        PhiloxStream rng(cfg.seed, 0xFEEDu);
        std::vector<std::pair<double, double>> box;
        box.emplace_back(std::log(cfg.k_lo), std::log(cfg.k_hi));
        if (model != FitModel::kappa_mu_shadowed) box.emplace_back(-4.0, 4.0); // logit Delta
        box.emplace_back(std::log(cfg.m_lo), std::log(cfg.m_hi));
        if (model != FitModel::ftr) box.emplace_back(std::log(cfg.mu_lo), std::log(cfg.mu_hi));
        box.emplace_back(std::log(omega0 / 4.0), std::log(omega0 * 4.0));
        for (std::size_t dim = 0; dim < d; ++dim) {
            std::vector<std::size_t> strata(count);
            std::iota(strata.begin(), strata.end(), 0);
            for (std::size_t i = count; i > 1; --i) { // Fisher-Yates with the stream
                const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
                std::swap(strata[i - 1], strata[j]);
            }
            for (std::size_t i = 0; i < count; ++i) {
                const double frac =
                    (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(count);
                pts[i][dim] = box[dim].first + frac * (box[dim].second - box[dim].first);
            }
        }
        return pts;
    }
};

} // namespace detail

// Best-of-restarts Nelder-Mead minimization of the MSE objective over the
// model's free shape parameters (log/logit-transformed search coordinates).
inline FitResult fit(const EmpiricalPdf& raw_data, FitModel model, const FitConfig& cfg = {}) {
    check_empirical(raw_data);

    EmpiricalPdf data = raw_data;
    double rescale = 1.0; // r -> r/rescale while fitting when normalizing
    if (cfg.normalize_input) {
        rescale = std::sqrt(binned_second_moment(raw_data));
        for (auto& r : data.abscissae) r /= rescale;
        for (auto& d : data.densities) d *= rescale;
        for (auto& e : data.edges) e /= rescale;
    }

    detail::FitSpace space{model, cfg, binned_second_moment(data)};
    auto objective = [&](const std::vector<double>& u) {
        const MftrParams p = space.decode(u);
        if (!space.in_box(p)) return std::numeric_limits<double>::infinity();
        return mse(p, data, cfg.method);
    };

    FitResult best;
    best.model = model;

    // competitor fits: their optima seed the MFTR search and enter the
    // candidate pool directly (Delta=0 / mu=1 are valid MFTR values that the
    // transform cannot represent exactly)
    std::vector<std::vector<double>> starts;
    if (model == FitModel::mftr && cfg.include_competitors) {
        FitConfig sub = cfg;
        sub.include_competitors = false;
        sub.seed = cfg.seed + 1;
        FitResult ftr_fit = fit(data, FitModel::ftr, sub);
        sub.seed = cfg.seed + 2;
        FitResult kms_fit = fit(data, FitModel::kappa_mu_shadowed, sub);
        for (const FitResult& c : {ftr_fit, kms_fit}) {
            if (std::isfinite(c.mse)) {
                starts.push_back(space.encode(c.params));
                if (c.mse < best.mse) {
                    best.params = c.params;
                    best.mse = c.mse;
                    best.iterations = c.iterations;
                    best.converged = c.converged;
                }
            }
        }
        best.competitors = {std::move(ftr_fit), std::move(kms_fit)};
    }
    auto lhs = space.lhs_starts(cfg.restarts);
    starts.insert(starts.end(), lhs.begin(), lhs.end());

    std::vector<NelderMeadResult> results(starts.size());
    auto run_one = [&](std::size_t i) {
        results[i] = nelder_mead(objective, starts[i], 0.35, cfg.max_iterations, cfg.spread_tol);
    };
    const unsigned workers =
        cfg.parallel ? std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                          static_cast<unsigned>(starts.size()))
                     : 1u;
    if (workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < starts.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) run_one(i);
    }

    for (const auto& r : results) {
        if (r.fx < best.mse) {
            best.params = space.decode(r.x);
            best.mse = r.fx;
            best.iterations = r.iterations;
            best.converged = r.converged;
        }
    }
    best.restarts_used = starts.size();
    if (!std::isfinite(best.mse)) best.converged = false;

    if (cfg.normalize_input) { // undo the unit-second-moment rescaling
        best.params.gamma_bar *= rescale * rescale;
        best.mse = mse(best.params, raw_data, cfg.method);
        for (auto& c : best.competitors) {
            c.params.gamma_bar *= rescale * rescale;
            c.mse = mse(c.params, raw_data, cfg.method);
        }
    } else {
        best.mse = mse(best.params, data, cfg.method); // exact self-consistency
    }
    return best;
}

// ----- empirical CSV input -----

// Two-column "r,density" (header required) or single-column "r" raw samples,
// auto-binned with the Freedman-Diaconis rule. A single-column "gamma" header
// is accepted as SNR samples and mapped to the envelope domain.
inline EmpiricalPdf load_empirical_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("path", "cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw validation_error("path", path + ": empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto parse_double = [&](const std::string& tok, const char* what) {
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw validation_error("csv", path + ":" + std::to_string(lineno) + ": bad " + what +
                                              " value '" + tok + "'");
        }
    };

    const bool two_col = (line == "r,density");
    const bool snr_domain = (line == "gamma");
    if (!two_col && !snr_domain && line != "r")
        throw validation_error("csv", path + ":1: expected header 'r,density', 'r' or 'gamma'");

    EmpiricalPdf out;
    std::vector<double> samples;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (two_col) {
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw validation_error("csv", path + ":" + std::to_string(lineno) +
                                                  ": expected 'r,density'");
            const double r = parse_double(line.substr(0, comma), "abscissa");
            const double d = parse_double(line.substr(comma + 1), "density");
            if (!out.abscissae.empty() && !(r > out.abscissae.back()))
                throw validation_error("csv", path + ":" + std::to_string(lineno) +
                                                  ": abscissae not strictly increasing");
            if (d < 0.0)
                throw validation_error("csv", path + ":" + std::to_string(lineno) +
                                                  ": negative density");
            out.abscissae.push_back(r);
            out.densities.push_back(d);
        } else {
            double v = parse_double(line, "sample");
            if (snr_domain) v = std::sqrt(std::max(0.0, v));
            samples.push_back(v);
        }
    }
    if (two_col) {
        out.count = out.abscissae.size();
        return out;
    }
    if (samples.size() < 2)
        throw validation_error("csv", path + ": need at least 2 samples to bin");
    return empirical_pdf(samples, freedman_diaconis_bins(samples));
}

} // namespace mftr

#endif
