// Shared plumbing for the acceptance suite: a per-criterion recorder that
// prints one PASS/FAIL line, plus the parameter grids the criteria sweep.

#ifndef MFTR_TESTS_ACCEPTANCE_UTIL_HPP
#define MFTR_TESTS_ACCEPTANCE_UTIL_HPP

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "mftr/model.hpp"

namespace acceptance {

class Criterion {
public:
    Criterion(int number, std::string title) : number_(number), title_(std::move(title)) {}
    ~Criterion() {
        const bool pass = failed_ == 0 && std::uncaught_exceptions() == 0;
        std::printf("ACCEPTANCE C%d (%s): %s\n", number_, title_.c_str(),
                    pass ? "PASS" : "FAIL");
        std::fflush(stdout);
    }

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ++failed_;
            UNSCOPED_INFO("C" << number_ << " violated: " << what);
        }
        CHECK(cond);
    }

private:
    int number_;
    std::string title_;
    int failed_ = 0;
};

// The 256-point shape grid of criterion 1 (criterion 2 uses its integer-m
// subset); gamma_bar fixed at 1.
inline std::vector<mftr::MftrParams> shape_grid(bool integer_m_only) {
    std::vector<mftr::MftrParams> grid;
    for (double k : {0.1, 1.0, 8.0, 25.0})
        for (double delta : {0.0, 0.5, 0.9, 1.0})
            for (double m : {0.7, 2.0, 8.0, 40.0}) {
                if (integer_m_only && m == 0.7) continue;
                for (double mu : {0.5, 1.0, 2.0, 4.0}) grid.push_back({k, delta, m, mu, 1.0});
            }
    return grid;
}

} // namespace acceptance

#endif
