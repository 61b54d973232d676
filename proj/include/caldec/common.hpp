#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace caldec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad or inconsistent input data (files, configs, shape mismatches).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdown: non-convergence, residuals out of tolerance, singularity.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kTieTol = 1e-12;
inline constexpr double kBoxTol = 1e-9;

// Checks p is in [0,1]^d up to kBoxTol and returns it clamped exactly into the box.
Vec require_in_box(const Vec& p, const char* what);

inline Vec scalar_point(double x) {
    Vec p(1);
    p[0] = x;
    return p;
}

}  // namespace caldec
