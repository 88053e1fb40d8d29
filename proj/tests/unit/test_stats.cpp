#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mftr/metrics.hpp"
#include "mftr/quadrature.hpp"
#include "mftr/stats.hpp"
#include "oracles.hpp"

using namespace mftr;
using Catch::Approx;

namespace {

const EvalMethod kInversion{Method::mgf_inversion, {}};
const EvalMethod kTheta{Method::theta_integral, {}};
const EvalMethod kSeries{Method::gamma_series, {}};

double integrate_pdf(const MftrParams& p, const EvalMethod& how, double x_hi) {
    return sf::gk_integrate([&](double x) { return pdf(p, x, how); }, 0.0, x_hi, 1e-9, 1e-8);
}

} // namespace

TEST_CASE("pdf normalization across routes", "[stats]") {
    const MftrParams p{8.0, 0.9, 8.0, 2.0, 2.0};
    const double hi = 40.0 * p.gamma_bar;
    CHECK(integrate_pdf(p, kSeries, hi) == Approx(1.0).margin(1e-6));
    CHECK(integrate_pdf(p, kTheta, hi) == Approx(1.0).margin(1e-6));
    CHECK(integrate_pdf(p, kInversion, hi) == Approx(1.0).margin(1e-6));

    // mean recovers gamma_bar
    const double mean = sf::gk_integrate([&](double x) { return x * pdf(p, x, kSeries); }, 0.0,
                                         60.0 * p.gamma_bar, 1e-10, 1e-8);
    CHECK(mean == Approx(p.gamma_bar).epsilon(1e-5));
}

TEST_CASE("three-way agreement at the Fig. 2 set", "[stats]") {
    const MftrParams p{15.0, 0.9, 6.0, 2.0, 1.5};
    for (double x : {0.05, 0.3, 1.0, 2.5, 6.0}) {
        const double a = pdf(p, x, kInversion);
        const double b = pdf(p, x, kTheta);
        const double c = pdf(p, x, kSeries);
        CHECK(std::abs(a - b) < 1e-6);
        CHECK(std::abs(b - c) < 1e-6);
        const double fa = cdf(p, x, kInversion);
        const double fb = cdf(p, x, kTheta);
        const double fc = cdf(p, x, kSeries);
        CHECK(std::abs(fa - fb) < 1e-6);
        CHECK(std::abs(fb - fc) < 1e-6);
    }
}

TEST_CASE("K -> 0 with mu = 1 is exponential", "[stats]") {
    const MftrParams p{1e-9, 0.0, 2.0, 1.0, 1.7};
    double worst = 0.0;
    for (double x : {0.0, 0.3, 1.0, 3.0, 8.0})
        worst = std::max(worst,
                         std::abs(pdf(p, x, kSeries) - oracles::rayleigh_snr_pdf(x, p.gamma_bar)));
    CHECK(worst < 1e-8);
}

TEST_CASE("cdf endpoints, monotonicity, and derivative", "[stats]") {
    const MftrParams p{8.0, 0.9, 8.0, 2.0, 2.0};
    CHECK(cdf(p, 0.0) == 0.0);
    CHECK(cdf(p, 80.0 * p.gamma_bar, kSeries) == Approx(1.0).margin(1e-9));

    double prev = -1.0;
    for (double x = 0.1; x < 8.0; x += 0.35) {
        const double f = cdf(p, x, kSeries);
        CHECK(f >= prev);
        prev = f;
        // numerical derivative matches the PDF on smooth regions
        const double h = 1e-5;
        const double der = (cdf(p, x + h, kSeries) - cdf(p, x - h, kSeries)) / (2.0 * h);
        CHECK(der == Approx(pdf(p, x, kSeries)).epsilon(1e-4));
    }
}

TEST_CASE("Rician reduction matches the Marcum-Q oracle", "[stats]") {
    const double K = 3.0, gb = 1.4;
    const MftrParams p = special_case_params(SpecialCase::rician, {.kappa = K}, gb);
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        CHECK(cdf(p, x, kSeries) == Approx(oracles::rician_snr_cdf(x, K, gb)).margin(1e-5));
        CHECK(pdf(p, x, kSeries) == Approx(oracles::rician_snr_pdf(x, K, gb)).margin(1e-5));
    }
}

TEST_CASE("small-x CDF matches the asymptotic coefficient", "[stats]") {
    // G_c from the asymptote: F(x) ~ G_c x^mu as x -> 0
    for (double m : {2.0, 10.0}) {
        for (double mu : {1.0, 2.0, 3.0}) {
            const MftrParams p{15.0, 0.1, m, mu, 1.0};
            const double x = 1e-4 * p.gamma_bar;
            const double den = p.k * mu * (1.0 - p.delta) + m;
            const double gc =
                std::exp((mu - 1.0) * std::log(mu) + mu * std::log1p(p.k) + m * std::log(m) -
                         std::lgamma(mu) - mu * std::log(p.gamma_bar) - m * std::log(den)) *
                sf::gauss_2f1(0.5, m, 1.0, -2.0 * p.delta * p.k * mu / den);
            const double ratio = cdf(p, x, kSeries) / (gc * std::pow(x, mu));
            CHECK(ratio == Approx(1.0).epsilon(0.01));
        }
    }
}

TEST_CASE("envelope density", "[stats]") {
    const MftrParams p{8.0, 0.9, 8.0, 2.0, 2.0}; // gamma_bar read as Omega
    CHECK(envelope_pdf(p, 0.0) == 0.0);
    const double total = sf::gk_integrate([&](double r) { return envelope_pdf(p, r, kSeries); },
                                          0.0, 8.0 * std::sqrt(p.gamma_bar), 1e-9, 1e-8);
    CHECK(total == Approx(1.0).margin(1e-6));
    // f_R(r) = 2 r f(r^2)
    CHECK(envelope_pdf(p, 0.8, kSeries) ==
          Approx(2.0 * 0.8 * pdf(p, 0.64, kSeries)).epsilon(1e-12));
}

TEST_CASE("bimodality of the envelope PDF", "[stats]") {
    auto count_peaks = [&](const MftrParams& p) {
        std::vector<double> rs;
        for (int i = 1; i <= 400; ++i)
            rs.push_back(3.0 * std::sqrt(p.gamma_bar) * i / 400.0);
        const auto vals = envelope_pdf_many(p, rs, kSeries);
        return count_local_maxima(vals);
    };
    // Fig. 1 Case A (Delta=0.9, m=8, K=8, gamma_bar=2): bimodality emerges
    // with mu (mu=1 is unimodal at these exact values; checked against a
    // 4e6-draw ray-model histogram)
    CHECK(count_peaks({8.0, 0.9, 8.0, 1.0, 2.0}) == 1);
    CHECK(count_peaks({8.0, 0.9, 8.0, 2.0, 2.0}) == 2);
    // Fig. 1 Case B (Delta=0.9, m=4, K=15, gamma_bar=1): same trend, earlier
    CHECK(count_peaks({15.0, 0.9, 4.0, 1.5, 1.0}) == 2);
    CHECK(count_peaks({15.0, 0.9, 4.0, 2.0, 1.0}) == 2);
    CHECK(count_peaks({15.0, 0.9, 4.0, 3.0, 1.0}) == 2);
    // Fig. 2: unimodal at small Delta, bimodal at Delta = 0.9
    CHECK(count_peaks({15.0, 0.1, 6.0, 2.0, 1.5}) == 1);
    CHECK(count_peaks({15.0, 0.9, 6.0, 2.0, 1.5}) == 2);
    // Fig. 3 trend ({Delta 0.9, mu 3, K 20}): larger m sharpens the modes,
    // m = 2 smooths the second mode away entirely
    CHECK(count_peaks({20.0, 0.9, 2.0, 3.0, 1.0}) == 1);
    CHECK(count_peaks({20.0, 0.9, 4.0, 3.0, 1.0}) == 2);
    CHECK(count_peaks({20.0, 0.9, 8.0, 3.0, 1.0}) == 2);
}

TEST_CASE("second moment", "[stats]") {
    // exponential special case
    CHECK(second_moment({0.0, 0.0, 3.0, 1.0, 2.0}) == Approx(8.0).epsilon(1e-13));
    // MGF second derivative at 0
    for (const MftrParams& p : {MftrParams{15.0, 0.9, 4.0, 3.0, 1.0},
                                MftrParams{8.0, 0.9, 8.0, 2.0, 2.0},
                                MftrParams{1.0, 0.5, 0.7, 0.5, 1.0}}) {
        const double h = 1e-4 / p.gamma_bar;
        const double d2 = (mgf(p, h) - 2.0 + mgf(p, -h)) / (h * h);
        CHECK(second_moment(p) == Approx(d2).epsilon(1e-4));
    }
}

TEST_CASE("amount of fading", "[stats]") {
    CHECK(aof({0.0, 0.0, 1.0, 1.0, 1.0}) == Approx(1.0).epsilon(1e-14));
    for (double m : {0.5, 2.0, 7.0})
        CHECK(aof({1e9, 0.0, m, 1.0, 1.0}) == Approx(1.0 / m).margin(1e-6));
    const MftrParams p{15.0, 0.9, 4.0, 3.0, 1.0};
    CHECK(aof(p) ==
          Approx(second_moment(p) / (p.gamma_bar * p.gamma_bar) - 1.0).epsilon(1e-12));
}

TEST_CASE("Table-I parameter mappings", "[stats]") {
    const MftrParams ray = special_case_params(SpecialCase::rayleigh, {});
    CHECK(ray.delta == 0.0);
    CHECK(ray.k == 0.0);
    CHECK(ray.mu == 1.0);

    const double q = 0.4;
    const MftrParams hoyt = special_case_params(SpecialCase::hoyt, {.q = q});
    CHECK(hoyt.m == 1.0);
    CHECK(hoyt.mu == 1.0);
    // the q mapping round-trips
    const double q_back = std::sqrt((1.0 + hoyt.k * (1.0 - hoyt.delta)) /
                                    (1.0 + hoyt.k * (1.0 + hoyt.delta)));
    CHECK(q_back == Approx(q).epsilon(1e-12));

    const MftrParams em = special_case_params(SpecialCase::eta_mu, {.mu = 1.4, .eta = 0.3});
    CHECK(em.k == Approx((1.0 - 0.3) / (2.0 * 0.3)));
    CHECK(em.m == Approx(1.4));
    CHECK(em.mu == Approx(2.8));
    CHECK(em.delta == 0.0);

    CHECK_THROWS_AS(special_case_params(SpecialCase::hoyt, {.q = 1.7}), validation_error);
    CHECK_THROWS_AS(special_case_params(SpecialCase::rician, {}), validation_error);
}

TEST_CASE("Hoyt reduction density", "[stats]") {
    const double q = 0.55, gb = 1.0;
    const MftrParams p = special_case_params(SpecialCase::hoyt, {.q = q}, gb);
    for (double x : {0.05, 0.3, 1.0, 3.0})
        CHECK(pdf(p, x, kSeries) == Approx(oracles::hoyt_snr_pdf(x, q, gb)).margin(1e-7));
}

TEST_CASE("local maxima counter", "[stats]") {
    CHECK(count_local_maxima(std::vector<double>{0.0, 1.0, 0.5, 2.0, 0.1}) == 2);
    CHECK(count_local_maxima(std::vector<double>{0.0, 1.0, 1.0, 0.5}) == 1);
    CHECK(count_local_maxima(std::vector<double>{3.0, 2.0, 1.0}) == 0);
}

TEST_CASE("method routing", "[stats]") {
    // mgf_inversion refuses non-integer m
    const MftrParams pr{8.0, 0.9, 6.5, 2.0, 2.0};
    CHECK_THROWS_AS(pdf(pr, 1.0, kInversion), validation_error);
    // automatic handles real m via series/theta split around 5 gamma_bar
    CHECK(pdf(pr, 1.0) == Approx(pdf(pr, 1.0, kSeries)).epsilon(1e-12));
    CHECK(pdf(pr, 11.0) == Approx(pdf(pr, 11.0, kTheta)).epsilon(1e-12));
    // negative abscissa rejected
    CHECK_THROWS_AS(pdf(pr, -1.0), validation_error);
}
