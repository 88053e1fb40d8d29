#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mftr/fit.hpp"
#include "mftr/stats.hpp"

using namespace mftr;
using Catch::Approx;

namespace {

EmpiricalPdf exact_data(const MftrParams& p, std::size_t t = 40) {
    EmpiricalPdf data;
    const double hi = 2.8 * std::sqrt(p.gamma_bar);
    std::vector<double> rs(t);
    for (std::size_t i = 0; i < t; ++i) rs[i] = hi * (i + 1.0) / static_cast<double>(t);
    data.abscissae = rs;
    // evaluate with the objective's own method so the residual at truth is 0
    data.densities = envelope_pdf_many(p, rs, FitConfig{}.method);
    data.count = t;
    return data;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        path = std::string(std::tmpnam(nullptr)) + ".csv";
        std::ofstream out(path, std::ios::binary);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("mse objective", "[fit]") {
    const MftrParams truth{8.0, 0.9, 8.0, 2.0, 2.0};
    const EmpiricalPdf data = exact_data(truth);

    // zero residual at the generating parameters
    CHECK(mse(truth, data) < 1e-20);

    // doubling Omega strictly increases the objective
    MftrParams off = truth;
    off.gamma_bar *= 2.0;
    CHECK(mse(off, data) > mse(truth, data));

    // invalid parameters are optimizer-safe
    MftrParams bad = truth;
    bad.m = -1.0;
    CHECK(std::isinf(mse(bad, data)));
}

TEST_CASE("csv loading", "[fit]") {
    TempFile two("r,density\n0.1,0.2\n0.5,1.1\n");
    const EmpiricalPdf d2 = load_empirical_csv(two.path);
    REQUIRE(d2.abscissae.size() == 2);
    CHECK(d2.abscissae[1] == 0.5);
    CHECK(d2.densities[1] == 1.1);

    // single-column raw samples are auto-binned to unit mass
    std::string raw = "r\n";
    PhiloxStream rng(5, 0);
    for (int i = 0; i < 10000; ++i) raw += std::to_string(0.2 + rng.uniform()) + "\n";
    TempFile one(raw);
    const EmpiricalPdf d1 = load_empirical_csv(one.path);
    CHECK(d1.abscissae.size() >= 2);
    CHECK(normalization_mass(d1) == Approx(1.0).epsilon(1e-12));

    // malformed rows carry line numbers; non-monotone abscissae are rejected
    TempFile bad("r,density\n0.5,0.2\n0.1,1.1\n");
    try {
        load_empirical_csv(bad.path);
        FAIL("expected throw");
    } catch (const validation_error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    TempFile garbled("r,density\n0.5,xyz\n");
    CHECK_THROWS_AS(load_empirical_csv(garbled.path), validation_error);
    CHECK_THROWS_AS(load_empirical_csv("/nonexistent/file.csv"), validation_error);
}

TEST_CASE("fit determinism and self-consistency", "[fit]") {
    const MftrParams truth{6.0, 0.8, 5.0, 2.0, 1.5};
    const EmpiricalPdf data = exact_data(truth, 24);

    FitConfig cfg;
    cfg.restarts = 3;
    cfg.max_iterations = 200;
    cfg.seed = 11;
    cfg.include_competitors = false;

    const FitResult a = fit(data, FitModel::mftr, cfg);
    const FitResult b = fit(data, FitModel::mftr, cfg);
    CHECK(a.mse == b.mse);
    CHECK(a.params.k == b.params.k);
    CHECK(a.params.delta == b.params.delta);
    CHECK(a.params.gamma_bar == b.params.gamma_bar);
    CHECK(a.restarts_used == 3);

    // reported objective equals a fresh evaluation at the reported optimum
    CHECK(a.mse == Approx(mse(a.params, data)).epsilon(1e-12));
}

TEST_CASE("nesting: MFTR never loses to its special cases", "[fit]") {
    const MftrParams truth{6.0, 0.8, 5.0, 2.0, 1.5};
    const EmpiricalPdf data = exact_data(truth, 24);

    FitConfig cfg;
    cfg.restarts = 4;
    cfg.max_iterations = 300;
    cfg.seed = 3;

    const FitResult res = fit(data, FitModel::mftr, cfg);
    REQUIRE(res.competitors.size() == 2);
    for (const FitResult& c : res.competitors) {
        CHECK(res.mse <= c.mse + 1e-12);
        CHECK((c.model == FitModel::ftr || c.model == FitModel::kappa_mu_shadowed));
    }
    // the pinned parameters really are pinned
    for (const FitResult& c : res.competitors) {
        if (c.model == FitModel::ftr) CHECK(c.params.mu == 1.0);
        if (c.model == FitModel::kappa_mu_shadowed) CHECK(c.params.delta == 0.0);
    }
}

TEST_CASE("scale equivariance", "[fit]") {
    const MftrParams truth{6.0, 0.8, 5.0, 2.0, 1.5};
    const EmpiricalPdf data = exact_data(truth, 24);

    const double c = 2.0;
    EmpiricalPdf scaled = data;
    for (auto& r : scaled.abscissae) r *= c;
    for (auto& d : scaled.densities) d /= c;

    FitConfig cfg;
    cfg.restarts = 3;
    cfg.max_iterations = 300;
    cfg.seed = 17;
    cfg.include_competitors = false;

    const FitResult base = fit(data, FitModel::mftr, cfg);
    const FitResult resc = fit(scaled, FitModel::mftr, cfg);
    CHECK(resc.mse * c * c == Approx(base.mse).epsilon(1e-6));
    CHECK(resc.params.gamma_bar == Approx(base.params.gamma_bar * c * c).epsilon(1e-3));
}

TEST_CASE("input validation", "[fit]") {
    EmpiricalPdf tiny;
    tiny.abscissae = {0.1, 0.2};
    tiny.densities = {1.0, 1.0};
    CHECK_THROWS_AS(fit(tiny, FitModel::mftr), validation_error); // T >= 5
}
