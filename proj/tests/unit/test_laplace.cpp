#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "mftr/laplace.hpp"

using namespace mftr;
using Catch::Approx;
using cx = std::complex<double>;

namespace {

double invert(const std::function<cx(cx)>& F, double t, sf::LaplaceInversionConfig cfg = {}) {
    return sf::inverse_laplace(F, t, cfg);
}

} // namespace

TEST_CASE("five known transform pairs to 1e-8 relative over t in [1e-2, 1e2]", "[laplace]") {
    struct Pair {
        std::function<cx(cx)> F;
        std::function<double(double)> f;
        const char* name;
    };
    const std::vector<Pair> pairs{
        {[](cx s) { return 1.0 / s; }, [](double) { return 1.0; }, "1/s"},
        {[](cx s) { return 1.0 / (s * s); }, [](double t) { return t; }, "1/s^2"},
        {[](cx s) { return std::pow(s, -0.3); },
         [](double t) { return std::pow(t, -0.7) / std::tgamma(0.3); }, "1/s^0.3"},
        {[](cx s) { return std::pow(s, -0.5); },
         [](double t) { return 1.0 / std::sqrt(M_PI * t); }, "1/sqrt(s)"},
        {[](cx s) { return 1.0 / (s * (s + 1.0)); },
         [](double t) { return -std::expm1(-t); }, "1/(s(s+1))"},
    };
    for (const auto& pr : pairs) {
        for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            INFO(pr.name << " at t=" << t);
            CHECK(invert(pr.F, t) == Approx(pr.f(t)).epsilon(1e-8));
            sf::LaplaceInversionConfig talbot;
            talbot.method = sf::LaplaceInversionConfig::Method::fixed_talbot;
            CHECK(invert(pr.F, t, talbot) == Approx(pr.f(t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("exponential pair at the spec points", "[laplace]") {
    auto F = [](cx s) { return 1.0 / (s + 1.0); };
    for (double t : {0.1, 1.0, 10.0}) CHECK(invert(F, t) == Approx(std::exp(-t)).epsilon(1e-8));
}

TEST_CASE("gamma-density pair", "[laplace]") {
    auto F = [](cx s) { return std::pow(1.0 + s, -2.5); };
    // t^{1.5} e^{-t} / Gamma(2.5) at t = 1.7, frozen
    CHECK(invert(F, 1.7) == Approx(0.30460467401363455).epsilon(1e-9));
    sf::LaplaceInversionConfig talbot;
    talbot.method = sf::LaplaceInversionConfig::Method::fixed_talbot;
    CHECK(invert(F, 1.7, talbot) == Approx(0.30460467401363455).epsilon(1e-9));
}

TEST_CASE("config validation and divergence diagnostic", "[laplace]") {
    sf::LaplaceInversionConfig bad;
    bad.terms = 7;
    CHECK_THROWS_AS(invert([](cx s) { return 1.0 / s; }, 1.0, bad), validation_error);
    CHECK_THROWS_AS(invert([](cx) { return cx(0.0, 0.0); }, 0.0), validation_error);
    // oscillatory f at large t: the contour passes next to the +-i poles and
    // Euler acceleration fails to stabilize
    CHECK_THROWS_AS(invert([](cx s) { return 1.0 / (s * s + 1.0); }, 100.0), numeric_error);
}
