#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "mftr/model.hpp"

using namespace mftr;
using Catch::Approx;
using cx = std::complex<double>;

TEST_CASE("parameter validation", "[model]") {
    CHECK_NOTHROW(validate({15.0, 0.1, 10.0, 3.0, 1.0})); // Fig. 6 set
    try {
        validate({-1.0, 0.1, 10.0, 3.0, 1.0});
        FAIL("expected throw");
    } catch (const validation_error& e) {
        CHECK(e.field() == "k");
    }
    try {
        validate({1.0, 1.2, 10.0, 3.0, 1.0});
        FAIL("expected throw");
    } catch (const validation_error& e) {
        CHECK(e.field() == "delta");
    }
    CHECK_THROWS_AS(validate({1.0, 0.5, 0.0, 3.0, 1.0}), validation_error);
    CHECK_THROWS_AS(validate({1.0, 0.5, 1.0, -3.0, 1.0}), validation_error);
    CHECK_THROWS_AS(validate({1.0, 0.5, 1.0, 3.0, 0.0}), validation_error);
}

TEST_CASE("R polynomial forms", "[model]") {
    const MftrParams p{8.0, 0.9, 8.0, 2.0, 2.0};
    // constant term
    const double c = (1.0 + p.k) * p.m * p.mu;
    CHECK(r_polynomial(p, 0.0) == Approx(c * c).epsilon(1e-14));

    // Delta = 0: perfect square
    const MftrParams p0{8.0, 0.0, 8.0, 2.0, 2.0};
    const double s = -1.3;
    const double lin = p0.m * p0.mu * (1.0 + p0.k) - (p0.m + p0.mu * p0.k) * p0.gamma_bar * s;
    CHECK(r_polynomial(p0, s) == Approx(lin * lin).epsilon(1e-13));

    // quadratic and factored forms agree
    for (double sv : {-0.5, -3.0, 0.1}) {
        const double q = r_polynomial_quadratic(p, sv);
        const double f = r_polynomial_factored(p, sv);
        CHECK(f == Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("kappa_theta", "[model]") {
    const MftrParams p{5.0, 0.7, 2.0, 2.0, 1.0};
    CHECK(kappa_theta(p, M_PI / 2.0) == Approx(p.k).epsilon(1e-14));
    const MftrParams pd0{5.0, 0.0, 2.0, 2.0, 1.0};
    for (double th : {0.0, 0.3, 2.0, M_PI}) CHECK(kappa_theta(pd0, th) == Approx(5.0));
    const MftrParams pd1{5.0, 1.0, 2.0, 2.0, 1.0};
    CHECK(kappa_theta(pd1, M_PI) == Approx(0.0).margin(1e-14));
}

TEST_CASE("conditional MGF", "[model]") {
    const MftrParams p{15.0, 0.5, 6.0, 2.0, 1.5}; // Fig. 2 set
    CHECK(conditional_mgf(p, 1.0, 0.0) == 1.0);

    // Delta = 0: theta-independent
    const MftrParams pd0{15.0, 0.0, 6.0, 2.0, 1.5};
    const double ref = conditional_mgf(pd0, 0.0, -1.0);
    for (double th : {0.5, 1.5, 3.0}) CHECK(conditional_mgf(pd0, th, -1.0) == Approx(ref));

    // averaging over theta reproduces the closed form at the Fig. 2 sets
    for (double delta : {0.1, 0.5, 0.9}) {
        const MftrParams pf{15.0, delta, 6.0, 2.0, 1.5};
        for (double s : {-0.2, -1.0, -5.0}) {
            CHECK(mgf_theta_quadrature(pf, s) == Approx(mgf(pf, s)).epsilon(1e-9));
        }
    }
}

TEST_CASE("MGF normalization and mean", "[model]") {
    const std::vector<MftrParams> sets{
        {0.1, 0.0, 0.7, 0.5, 1.0}, {1.0, 0.5, 2.0, 1.0, 2.5}, {8.0, 0.9, 8.0, 2.0, 0.5},
        {25.0, 1.0, 40.0, 4.0, 3.0}, {15.0, 0.1, 10.0, 3.0, 1.0}};
    for (const auto& p : sets) {
        CHECK(mgf(p, 0.0) == 1.0);
        // M'(0) = gamma_bar by central difference, step scaled to the strip
        const double h = 1e-6 * p.mu * (1.0 + p.k) / (p.gamma_bar * (p.m + p.mu * p.k) / p.m);
        const double der = (mgf(p, h) - mgf(p, -h)) / (2.0 * h);
        CHECK(der == Approx(p.gamma_bar).epsilon(1e-5));
    }
}

TEST_CASE("MGF closed form vs theta quadrature, real and integer m", "[model]") {
    const MftrParams pi{8.0, 0.9, 8.0, 2.0, 2.0};
    for (double s : {-1e-3, -0.1, -1.0, -10.0})
        CHECK(mgf(pi, s) == Approx(mgf_theta_quadrature(pi, s)).epsilon(1e-9));

    const MftrParams pr{8.0, 0.9, 6.5, 1.7, 2.0};
    for (double s : {-1e-3, -0.1, -1.0, -10.0})
        CHECK(mgf(pr, s) == Approx(mgf_theta_quadrature(pr, s)).epsilon(1e-9));

    const MftrParams plow{0.1, 1.0, 0.7, 0.5, 1.0};
    for (double s : {-0.1, -1.0, -10.0})
        CHECK(mgf(plow, s) == Approx(mgf_theta_quadrature(plow, s)).epsilon(1e-9));
}

TEST_CASE("Delta = 0 collapses to the kappa-mu shadowed MGF", "[model]") {
    const MftrParams p{4.0, 0.0, 3.5, 2.0, 1.7};
    for (double s : {-0.3, -2.0}) {
        const double K = p.k, m = p.m, mu = p.mu, gb = p.gamma_bar;
        const double kms = std::pow(m, m) * std::pow(mu, mu) * std::pow(1.0 + K, mu) *
                           std::pow(mu * (1.0 + K) - gb * s, m - mu) /
                           std::pow(m * mu * (1.0 + K) - (mu * K + m) * gb * s, m);
        CHECK(mgf(p, s) == Approx(kms).epsilon(1e-12));
    }
}

TEST_CASE("FTR is the mu = 1 member", "[model]") {
    const MftrParams p{10.0, 0.7, 3.0, 1.0, 1.0};
    for (double s : {-0.5, -4.0})
        CHECK(mgf(p, s) == Approx(mgf_theta_quadrature(p, s)).epsilon(1e-9));
}

TEST_CASE("complex MGF continuation agrees with the real axis and the q-sum", "[model]") {
    const MftrParams p{8.0, 0.9, 8.0, 2.0, 2.0};
    for (double s : {-0.4, -2.0}) {
        const cx v = mgf_complex(p, cx(s, 0.0));
        CHECK(v.real() == Approx(mgf(p, s)).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
    // the per-q factorized expansion is the same function
    for (cx s : {cx(-0.5, 0.8), cx(-2.0, 3.0), cx(-0.1, -11.0)}) {
        const cx a = mgf_complex(p, s);
        const cx b = mgf_complex_factored_qsum(p, s);
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    }
    // non-integer m has no complex closed form; callers are told to use the
    // theta route
    const MftrParams pr{8.0, 0.9, 6.5, 2.0, 2.0};
    CHECK_THROWS_AS(mgf_complex(pr, cx(-1.0, 1.0)), validation_error);
}

TEST_CASE("MGF rejects arguments at or beyond the transform singularity", "[model]") {
    const MftrParams p{2.0, 0.5, 3.0, 2.0, 1.0};
    const double s_pole =
        (1.0 + p.k) * p.m * p.mu / ((p.m + p.mu * p.k * (1.0 + p.delta)) * p.gamma_bar);
    CHECK_THROWS_AS(mgf(p, s_pole * 1.01), validation_error);
    CHECK_NOTHROW(mgf(p, s_pole * 0.5));
}
