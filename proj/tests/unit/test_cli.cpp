#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cli_helpers.hpp"
#include "mftr/metrics.hpp"

using Catch::Approx;

TEST_CASE("aof and mgf one-liners", "[cli]") {
    auto aof = cli::run("aof --k 0 --delta 0 --m 1 --mu 1 --gamma-bar 1");
    CHECK(aof.exit_code == 0);
    CHECK(cli::first_line(aof.out) == "1");

    auto mgf = cli::run("mgf --k 8 --delta 0.9 --m 8 --mu 2 --gamma-bar 2 --s 0");
    CHECK(mgf.exit_code == 0);
    CHECK(cli::first_line(mgf.out) == "1");
}

TEST_CASE("pdf curve at a single grid point", "[cli]") {
    auto r = cli::run("pdf --k 8 --delta 0.9 --m 8 --mu 2 --gamma-bar 2 "
                      "--domain envelope --points 1 --xmin 0");
    CHECK(r.exit_code == 0);
    CHECK(cli::line_at(r.out, 0) == "x,value");
    CHECK(cli::line_at(r.out, 1) == "0,0");
}

TEST_CASE("pdf --verify reports a small cross-method discrepancy", "[cli]") {
    auto r = cli::run("pdf --k 15 --delta 0.9 --m 6 --mu 2 --gamma-bar 1.5 "
                      "--points 40 --xmin 0.01 --xmax 6 --verify");
    CHECK(r.exit_code == 0);
    const std::string tag = "max_abs_discrepancy=";
    const auto pos = r.err.find(tag);
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.err.substr(pos + tag.size())) < 1e-6);
}

TEST_CASE("sampling is byte-stable across runs and shard counts", "[cli]") {
    const std::string base = "sample --k 8 --delta 0.9 --m 8 --mu 2 --gamma-bar 2 "
                             "--n 5000 --seed 7 --route physical";
    auto a = cli::run(base);
    auto b = cli::run(base);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    for (const char* shards : {"--shards 4", "--shards 8"}) {
        auto c = cli::run(base + " " + shards);
        CHECK(a.out == c.out);
    }
    CHECK(cli::first_line(a.out) == "gamma");
}

TEST_CASE("physical route rejects real mu with guidance to the mixture route", "[cli]") {
    auto r = cli::run("sample --k 8 --delta 0.9 --m 8 --mu 2.5 --gamma-bar 2 "
                      "--n 10 --seed 1 --route physical");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("\"code\":\"invalid_params\"") != std::string::npos);
    CHECK(r.err.find("mixture") != std::string::npos);
}

TEST_CASE("ber subcommand is plumbing over avg_ber", "[cli]") {
    auto r = cli::run("ber --k 10 --delta 0.1 --m 2 --mu 1 "
                      "--snr-db-min 0 --snr-db-max 0 --snr-db-step 1 --precision 17");
    REQUIRE(r.exit_code == 0);
    const std::string row = cli::line_at(r.out, 1);
    const double got = std::stod(row.substr(row.find(',') + 1));
    const mftr::MftrParams p{10.0, 0.1, 2.0, 1.0, 1.0};
    CHECK(got == mftr::avg_ber(p, mftr::Modulation::bpsk()).value);
}

TEST_CASE("capacity at -60 dB starts below 1e-5 bits", "[cli]") {
    auto r = cli::run("capacity --k 8 --delta 0.9 --m 8 --mu 2 "
                      "--snr-db-min -60 --snr-db-max -60 --snr-db-step 1");
    REQUIRE(r.exit_code == 0);
    const std::string row = cli::line_at(r.out, 1);
    CHECK(std::stod(row.substr(row.find(',') + 1)) < 1e-5);
}

TEST_CASE("outage sweep is byte-stable and carries the asymptote column", "[cli]") {
    const std::string cmd = "outage --k 15 --delta 0.1 --m 10 --mu 3 --rth 1 "
                            "--snr-db-min 0 --snr-db-max 20 --snr-db-step 5 --asymptotic";
    auto a = cli::run(cmd);
    auto b = cli::run(cmd);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(cli::line_at(a.out, 0) == "snr_db,value,asymptotic");
    // 6 data rows: 0,5,10,15,20 dB -> 5 rows plus header
    CHECK(cli::line_at(a.out, 5).substr(0, 3) == "20,");
}

TEST_CASE("errors are single-line JSON on stderr", "[cli]") {
    auto r = cli::run("pdf --k -3 --delta 0.9 --m 8 --mu 2 --gamma-bar 2");
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    CHECK(r.err.rfind("{\"code\":\"invalid_params\"", 0) == 0);
    CHECK(r.err.find("\"field\":\"k\"") != std::string::npos);

    auto usage = cli::run("pdf --bogus-flag 3");
    CHECK(usage.exit_code == 1);
    CHECK(usage.err.rfind("{\"code\":\"usage\"", 0) == 0);
}

TEST_CASE("help exits zero and documents subcommands", "[cli]") {
    auto r = cli::run("--help");
    CHECK(r.exit_code == 0);
    for (const char* sub : {"pdf", "cdf", "outage", "ber", "capacity", "sample", "fit", "aof"})
        CHECK(r.out.find(sub) != std::string::npos);
}
