#ifndef MFTR_MIXTURE_HPP
#define MFTR_MIXTURE_HPP

#include <cmath>
#include <vector>

#include "mftr/common.hpp"
#include "mftr/model.hpp"
#include "mftr/special_functions.hpp"

namespace mftr {

// Truncated discrete Gamma mixture realizing the SNR distribution:
// f(x) = sum_i w_i GammaPDF(shape mu+i, mean nu_i; x), all components share
// the rate mu(1+K)/gamma_bar.
struct GammaMixture {
    std::vector<double> weights;
    std::vector<double> shapes;      // mu + i
    std::vector<double> mean_scales; // nu_i = gamma_bar (mu+i) / (mu (K+1))
    double rate = 0.0;               // shapes[i] / mean_scales[i], i-independent
    std::size_t truncation_index = 0;
    double tail_mass_bound = 0.0;
};

inline Tolerance default_mixture_tolerance() { return Tolerance{1e-10, 1e-9, 20000}; }

// Mixture weights w_i; computed in log space, truncated once the cumulative
// mass reaches 1 - tol.abs_tol. The q-sum keeps the printed (1-Delta) form
// expanded term-wise as (1-Delta)^{i-q} (2*Delta)^q so Delta=1 stays finite.
inline GammaMixture gamma_mixture_weights(const MftrParams& p,
                                          const Tolerance& tol = default_mixture_tolerance()) {
    validate(p);
    tol.check();
    const double K = p.k, D = p.delta, m = p.m, mu = p.mu, gb = p.gamma_bar;

    GammaMixture mix;
    mix.rate = mu * (1.0 + K) / gb;

    auto push = [&](double w, std::size_t i) {
        mix.weights.push_back(w);
        mix.shapes.push_back(mu + static_cast<double>(i));
        mix.mean_scales.push_back(gb * (mu + static_cast<double>(i)) / (mu * (K + 1.0)));
    };

    if (K == 0.0) { // (mu K)^i kills every i >= 1
        push(1.0, 0);
        mix.truncation_index = 0;
        mix.tail_mass_bound = 0.0;
        return mix;
    }

    const double den = mu * K * (1.0 - D) + m;
    const double xi = 2.0 * mu * K * D / den; // 2F1 argument is -xi
    const double log_muK = std::log(mu * K);
    const double log_den = std::log(den);
    const double l1mD = (D < 1.0) ? std::log1p(-D) : 0.0; // unused at D=1
    const double l2D = (D > 0.0) ? std::log(2.0 * D) : 0.0;
    const Tolerance inner{1e-14, 1e-13, tol.max_terms > 500000 ? tol.max_terms : 500000};

    double mass = 0.0;
    double prev_w = 0.0;
    const std::size_t cap = tol.max_terms;
    std::vector<double> logterms;
    for (std::size_t i = 0; i < cap; ++i) {
        const double di = static_cast<double>(i);
        logterms.clear();
        const std::size_t q_lo = (D >= 1.0) ? i : 0;
        const std::size_t q_hi = (D <= 0.0) ? 0 : i;
        for (std::size_t q = q_lo; q <= q_hi; ++q) {
            const double dq = static_cast<double>(q);
            double lt = std::lgamma(di + 1.0) - std::lgamma(dq + 1.0) - std::lgamma(di - dq + 1.0) +
                        std::lgamma(dq + 0.5) - std::lgamma(dq + 1.0);
            if (q < i) lt += (di - dq) * l1mD;
            if (q > 0) lt += dq * l2D;
            if (xi > 0.0) lt += sf::log_gauss_2f1_neg(m + di, dq + 0.5, dq + 1.0, -xi, inner);
            logterms.push_back(lt);
        }
        double mx = logterms[0];
        for (double v : logterms) mx = std::max(mx, v);
        double qsum = 0.0;
        for (double v : logterms) qsum += std::exp(v - mx);

        const double lw = std::lgamma(m + di) - std::lgamma(m) - std::lgamma(di + 1.0) +
                          di * log_muK + m * std::log(m) - 0.5 * std::log(M_PI) -
                          (m + di) * log_den + mx + std::log(qsum);
        const double w = std::exp(lw);
        push(w, i);
        mass += w;
        if (mass >= 1.0 - tol.abs_tol) {
            mix.truncation_index = i;
            mix.tail_mass_bound = std::max(0.0, 1.0 - mass);
            return mix;
        }
        // past the mode the weight ratio is a valid geometric tail bound;
        // this also terminates when lgamma cancellation noise (~1e-9 relative
        // at m ~ 1e6) keeps the accumulated mass from crossing the target
        if (i > 0 && w < prev_w) {
            const double r = w / prev_w;
            if (w * r / (1.0 - r) < tol.abs_tol) {
                mix.truncation_index = i;
                mix.tail_mass_bound = std::max(std::max(0.0, 1.0 - mass), w * r / (1.0 - r));
                return mix;
            }
        }
        prev_w = w;
    }
    throw numeric_error("gamma_mixture_weights: mass " + std::to_string(mass) +
                            " did not reach 1 - abs_tol within max_terms",
                        mass);
}

} // namespace mftr

#endif
