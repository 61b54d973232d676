#pragma once

#include <functional>

#include "caldec/calibration.hpp"
#include "caldec/dual.hpp"
#include "caldec/lp.hpp"
#include "caldec/utility.hpp"

namespace caldec {

// Worst-case conditional means, one row per sample record, plus the moment
// residuals those means leave under the test class.
struct BeliefMap {
    Mat points;
    Mat residuals;
};

struct AdversaryResult {
    BeliefMap beliefs;
    double value = 0.0;
    LpStatus status = LpStatus::Optimal;
};

using PolicyFn = std::function<ActionId(const Vec&)>;

// Minimizes the expected utility of a fixed policy over all belief maps whose
// moments stay within eps of zero per test and coordinate (equalities at
// eps = 0).  Identity beliefs are always feasible, so the value never exceeds
// the face-value score of the policy.
AdversaryResult worst_case_for_policy(const LinearUtility& u, const TestClass& tests,
                                      const EmpiricalSample& sample, const PolicyFn& policy,
                                      double eps);

// Minimizes the expected best-attainable payoff (epigraph form) over the same
// belief set: the value of the game once the decision maker is allowed to
// react to each belief.
AdversaryResult robust_value_lp(const LinearUtility& u, const TestClass& tests,
                                const EmpiricalSample& sample, double eps);

// robust_value_lp value minus the dual value; nonnegative up to LP tolerance,
// and small once the dual has converged.
double saddle_gap(const LinearUtility& u, const TestClass& tests, const EmpiricalSample& sample,
                  double eps, const DualSolution& dual);

// Returns a copy of the sample whose outcomes are moved, by the smallest
// possible uniform amount, so that every test moment vanishes exactly.
// Forecasts and weights are untouched.
EmpiricalSample recalibrate_sample(const TestClass& tests, const EmpiricalSample& sample);

}  // namespace caldec
