#ifndef MFTR_SAMPLING_HPP
#define MFTR_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "mftr/common.hpp"
#include "mftr/model.hpp"
#include "mftr/rng.hpp"

namespace mftr {

// Physical ray-model amplitudes behind a (K, Delta, mu) triple. The split of
// specular power across clusters is not unique; only K and Delta enter the
// distribution.
struct PhysicalAmplitudes {
    double v1 = 0.0;
    double v2 = 0.0;
    std::vector<double> u; // per-cluster specular amplitudes, clusters 2..mu
    double sigma2 = 0.0;   // per-component diffuse variance

    double reconstructed_k(std::size_t mu) const {
        double s = v1 * v1 + v2 * v2;
        for (double ui : u) s += ui * ui;
        return s / (2.0 * sigma2 * static_cast<double>(mu));
    }
    double reconstructed_delta() const {
        double s = v1 * v1 + v2 * v2;
        for (double ui : u) s += ui * ui;
        return s > 0.0 ? 2.0 * v1 * v2 / s : 0.0;
    }
};

// Canonical allocation puts all specular power into cluster 1 (U_i = 0).
// offcluster_fraction > 0 moves that fraction of the specular power into
// equal U_i; feasible while (1 - fraction) >= Delta.
inline PhysicalAmplitudes solve_amplitudes(const MftrParams& p, double offcluster_fraction = 0.0) {
    validate(p);
    if (!is_integer(p.mu) || p.mu < 1.0)
        throw validation_error("mu", "physical amplitudes require integer mu >= 1");
    const std::size_t mu = static_cast<std::size_t>(std::lround(p.mu));
    const double f = offcluster_fraction;
    if (f < 0.0 || f > 1.0 || 1.0 - f < p.delta - 1e-15)
        throw validation_error("offcluster_fraction",
                               "infeasible allocation: need (1 - fraction) >= delta");
    if (f > 0.0 && mu < 2)
        throw validation_error("offcluster_fraction", "no clusters beyond the first at mu = 1");

    PhysicalAmplitudes amp;
    amp.sigma2 = p.gamma_bar / (2.0 * p.mu * (1.0 + p.k));
    const double total = 2.0 * amp.sigma2 * p.mu * p.k; // total specular power S
    const double in_cluster1 = (1.0 - f) * total;
    // V1,2 from V1^2+V2^2 = (1-f) S and 2 V1 V2 = Delta S
    const double disc = std::max(0.0, in_cluster1 * in_cluster1 - p.delta * p.delta * total * total);
    amp.v1 = std::sqrt(0.5 * (in_cluster1 + std::sqrt(disc)));
    amp.v2 = std::sqrt(std::max(0.0, 0.5 * (in_cluster1 - std::sqrt(disc))));
    if (mu >= 2) {
        const double per = f * total / static_cast<double>(mu - 1);
        amp.u.assign(mu - 1, std::sqrt(per));
    }
    return amp;
}

enum class SampleRoute { physical, mixture };

struct SampleBatch {
    std::vector<double> values; // instantaneous SNR draws
    std::uint64_t seed = 0;
    SampleRoute route = SampleRoute::physical;
    MftrParams params{};
};

namespace detail {

template <typename PerIndex>
void run_sharded(std::size_t n, unsigned shards, std::vector<double>& out, PerIndex&& fn) {
    out.resize(n);
    if (shards <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(shards);
    for (unsigned s = 0; s < shards; ++s) {
        const std::size_t lo = n * s / shards, hi = n * (s + 1) / shards;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

// Draws from the ray model: common Gamma fluctuation on all specular
// amplitudes, uniform phases, Gaussian diffuse components per cluster.
inline SampleBatch sample_physical(const MftrParams& p, std::size_t n, std::uint64_t seed,
                                   unsigned shards = 1,
                                   const PhysicalAmplitudes* amplitudes = nullptr) {
    validate(p);
    if (n < 1) throw validation_error("n", "need n >= 1 samples");
    const PhysicalAmplitudes amp = amplitudes ? *amplitudes : solve_amplitudes(p);
    const std::size_t mu = static_cast<std::size_t>(std::lround(p.mu));
    const double sigma = std::sqrt(amp.sigma2);

    SampleBatch batch;
    batch.seed = seed;
    batch.route = SampleRoute::physical;
    batch.params = p;
    detail::run_sharded(n, shards, batch.values, [&](std::size_t idx) {
        PhiloxStream rng(seed, idx);
        const double sqz = std::sqrt(rng.gamma(p.m, 1.0 / p.m));
        const double ph1 = 2.0 * M_PI * rng.uniform();
        const double ph2 = 2.0 * M_PI * rng.uniform();
        const double wx = sqz * (amp.v1 * std::cos(ph1) + amp.v2 * std::cos(ph2)) + sigma * rng.normal();
        const double wy = sqz * (amp.v1 * std::sin(ph1) + amp.v2 * std::sin(ph2)) + sigma * rng.normal();
        double w = wx * wx + wy * wy;
        for (std::size_t i = 1; i < mu; ++i) {
            double cx = sigma * rng.normal();
            double cy = sigma * rng.normal();
            const double ui = (i - 1 < amp.u.size()) ? amp.u[i - 1] : 0.0;
            if (ui > 0.0) {
                const double ph = 2.0 * M_PI * rng.uniform();
                cx += sqz * ui * std::cos(ph);
                cy += sqz * ui * std::sin(ph);
            }
            w += cx * cx + cy * cy;
        }
        return w; // gamma = (Es/N0) W with Es/N0 = 1
    });
    return batch;
}

// Draws through the conditional kappa-mu shadowed mixture: theta uniform on
// (0,pi), Gamma-Poisson compounding for the mixture index, then a Gamma
// variate with the shared scale gamma_bar/(mu(1+K)). Valid for real mu, m.
inline SampleBatch sample_mixture(const MftrParams& p, std::size_t n, std::uint64_t seed,
                                  unsigned shards = 1) {
    validate(p);
    if (n < 1) throw validation_error("n", "need n >= 1 samples");
    const double scale = p.gamma_bar / (p.mu * (1.0 + p.k));

    SampleBatch batch;
    batch.seed = seed;
    batch.route = SampleRoute::mixture;
    batch.params = p;
    detail::run_sharded(n, shards, batch.values, [&](std::size_t idx) {
        PhiloxStream rng(seed, idx);
        const double theta = M_PI * rng.uniform();
        const double kt = kappa_theta(p, theta);
        std::uint64_t mix_index = 0;
        if (kt > 0.0) {
            const double g = rng.gamma(p.m, p.mu * kt / p.m);
            mix_index = rng.poisson(g);
        }
        return rng.gamma(p.mu + static_cast<double>(mix_index), scale);
    });
    return batch;
}

// Density-normalized histogram over equal-width bins spanning the data.
struct EmpiricalPdf {
    std::vector<double> abscissae; // bin centers (or user-supplied r grid)
    std::vector<double> densities;
    std::vector<double> edges;     // empty when not built from a histogram
    std::size_t count = 0;         // T, number of PDF values

    std::vector<double> implied_widths() const {
        std::vector<double> w(abscissae.size(), 0.0);
        if (!edges.empty()) {
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) w[i] = edges[i + 1] - edges[i];
        } else if (abscissae.size() >= 2) {
            for (std::size_t i = 0; i < abscissae.size(); ++i) {
                const double lo = (i == 0) ? abscissae[0] - 0.5 * (abscissae[1] - abscissae[0])
                                           : 0.5 * (abscissae[i - 1] + abscissae[i]);
                const double hi = (i + 1 == abscissae.size())
                                      ? abscissae[i] + 0.5 * (abscissae[i] - abscissae[i - 1])
                                      : 0.5 * (abscissae[i] + abscissae[i + 1]);
                w[i] = hi - lo;
            }
        }
        return w;
    }
};

inline EmpiricalPdf empirical_pdf(std::span<const double> values, std::span<const double> edges) {
    if (values.size() < 2) throw validation_error("values", "need at least 2 samples");
    if (edges.size() < 3) throw validation_error("bins", "need at least 2 bins");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i + 1] > edges[i]))
            throw validation_error("bins", "bin edges must be strictly increasing (zero-width bin)");

    const std::size_t nb = edges.size() - 1;
    std::vector<double> counts(nb, 0.0);
    for (double v : values) {
        if (v < edges.front() || v > edges.back()) continue;
        std::size_t b = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
        b = (b == 0) ? 0 : b - 1;
        if (b >= nb) b = nb - 1; // right edge of the last bin is inclusive
        counts[b] += 1.0;
    }
    EmpiricalPdf out;
    out.edges.assign(edges.begin(), edges.end());
    out.abscissae.resize(nb);
    out.densities.resize(nb);
    out.count = nb;
    const double n = static_cast<double>(values.size());
    for (std::size_t b = 0; b < nb; ++b) {
        out.abscissae[b] = 0.5 * (edges[b] + edges[b + 1]);
        out.densities[b] = counts[b] / (n * (edges[b + 1] - edges[b]));
    }
    return out;
}

inline EmpiricalPdf empirical_pdf(std::span<const double> values, std::size_t bins) {
    if (values.size() < 2) throw validation_error("values", "need at least 2 samples");
    if (bins < 2) throw validation_error("bins", "need at least 2 bins");
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (!(*mx > *mn)) throw validation_error("values", "all samples identical: zero-width bins");
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = *mn + (*mx - *mn) * static_cast<double>(i) / static_cast<double>(bins);
    return empirical_pdf(values, edges);
}

// Freedman-Diaconis bin count for raw-sample input.
inline std::size_t freedman_diaconis_bins(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double q1 = sorted[n / 4], q3 = sorted[(3 * n) / 4];
    const double iqr = q3 - q1;
    const double span = sorted.back() - sorted.front();
    if (iqr <= 0.0 || span <= 0.0) return 10;
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span / width)), 2, 4096);
}

inline std::vector<double> to_envelope(std::span<const double> snr_values) {
    std::vector<double> r(snr_values.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(snr_values[i]);
    return r;
}

} // namespace mftr

#endif
