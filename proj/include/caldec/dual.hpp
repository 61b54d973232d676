#pragma once

#include <vector>

#include "caldec/calibration.hpp"
#include "caldec/common.hpp"
#include "caldec/utility.hpp"

namespace caldec {

struct DualSolution {
    Mat lambda;  // k x d
    double eps = 0.0;
    double value = 0.0;
    long iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

struct InnerSolution {
    Vec p;
    double objective = 0.0;
    ActionId action = 0;
};

struct DualTraceRow {
    long iteration = 0;
    double value = 0.0;
    double grad_norm = 0.0;
};

struct DualOptions {
    long max_iters = 5000;
    double step0 = 1.0;
    double tol = 1e-6;
    std::vector<DualTraceRow>* trace = nullptr;
};

// s = sum_i h_i(v) lambda_i
Vec tilt(const TestClass& H, const Mat& lambda, const Vec& v);

// argmin over the box of val(p) + s.p.  Exact breakpoint scan for d = 1, an
// epigraph linear program above; ties resolved to the lexicographically
// smallest p.
InnerSolution inner_minimize(const LinearUtility& u, const Vec& s);

// G(lambda) = E[min_p {val(p) + p.s(f)}] - E[f.s(f)] - eps * sum_i ||lambda_i||
double dual_objective(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                      const Mat& lambda, double eps);

// g_i = sum_j w_j h_i(v_j) (p*_j - v_j) - eps * lambda_i / ||lambda_i||,
// with the zero vector used for the penalty term at lambda_i = 0.
Mat dual_subgradient(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                     const Mat& lambda, double eps);

// Maximizes the penalized dual.  Per-test bisection on the monotone scalar
// subgradient when d = 1 and test supports are disjoint across the sample
// (covers the single-test case and bin/decision classes); projected
// subgradient ascent with Polyak averaging otherwise.
DualSolution solve_dual(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                        double eps, const DualOptions& opts = {});

}  // namespace caldec
