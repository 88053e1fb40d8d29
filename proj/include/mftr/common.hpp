#ifndef MFTR_COMMON_HPP
#define MFTR_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace mftr {

// Truncation control for series and quadrature.
struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    std::size_t max_terms = 500000;

    void check() const {
        if (!(abs_tol > 0.0))
            throw std::invalid_argument("Tolerance.abs_tol must be > 0, got " + std::to_string(abs_tol));
        if (!(rel_tol > 0.0))
            throw std::invalid_argument("Tolerance.rel_tol must be > 0, got " + std::to_string(rel_tol));
        if (max_terms < 1)
            throw std::invalid_argument("Tolerance.max_terms must be >= 1");
    }
};

// Parameter/input violations carry the offending field name.
class validation_error : public std::invalid_argument {
public:
    validation_error(std::string field, const std::string& message)
        : std::invalid_argument(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Non-convergence and other numeric failures; carries the best value reached.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& message,
                  double partial = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(message), partial_(partial) {}
    double partial_value() const noexcept { return partial_; }

private:
    double partial_;
};

inline bool is_integer(double x, double tol = 1e-9) {
    return std::abs(x - std::round(x)) <= tol * (1.0 + std::abs(x));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

} // namespace mftr

#endif
