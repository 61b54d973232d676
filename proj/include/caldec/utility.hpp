#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "caldec/common.hpp"

namespace caldec {

// Action index into a LinearUtility's action table.
using ActionId = std::size_t;

struct Action {
    std::string label;
    Vec payoff;     // r_a
    double offset;  // c_a
};

// Utility linear in the outcome: u(a, p) = r_a . p + c_a on the box [0,1]^d.
class LinearUtility {
public:
    LinearUtility(Eigen::Index dimension, std::vector<Action> actions);

    // u(a, y) = alpha * a * y - C(a) with one scalar multiplier per action (d = 1).
    static LinearUtility scaled(double alpha, const std::vector<double>& multipliers,
                                const std::vector<double>& costs);

    Eigen::Index dimension() const { return d_; }
    std::size_t num_actions() const { return actions_.size(); }
    const Action& action(ActionId a) const;
    const std::vector<Action>& actions() const { return actions_; }

    // L = max_a ||r_a||_2
    double lipschitz() const;

private:
    Eigen::Index d_;
    std::vector<Action> actions_;
};

double utility(const LinearUtility& u, ActionId a, const Vec& p);

// (max_a u(a,p), achieving action); ties go to the lowest index.
std::pair<double, ActionId> val(const LinearUtility& u, const Vec& p);

ActionId best_response(const LinearUtility& u, const Vec& v);

// argmax_a min_{y in box} u(a, y); the inner minimum is taken coordinatewise.
ActionId minimax_safety_action(const LinearUtility& u);

// Sorted deduplicated candidate points for d = 1: {0, 1} plus every pairwise
// crossing of two action lines inside (0, 1).  Superset of the kinks of val.
std::vector<double> breakpoints_1d(const LinearUtility& u);

}  // namespace caldec
