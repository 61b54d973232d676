#pragma once

#include "caldec/common.hpp"

namespace caldec {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// minimize c.x  subject to  a_ineq x <= b_ineq,  a_eq x = b_eq,  lo <= x <= hi.
// Bounds must be finite; constraint blocks may be empty.
struct DenseLP {
    Vec c;
    Mat a_ineq;
    Vec b_ineq;
    Mat a_eq;
    Vec b_eq;
    Vec lo;
    Vec hi;
    // Optional starting hint; each entry is snapped to the nearer variable
    // bound.  A good hint mostly decides how much phase-1 work is needed.
    Vec start;
};

struct LpResult {
    Vec x;
    double value = 0.0;
    LpStatus status = LpStatus::Optimal;
    long iterations = 0;
};

// Dense bounded-variable two-phase primal simplex.  Dantzig pricing with an
// automatic switch to Bland's rule on degenerate stalls, so termination is
// guaranteed; final basic values are recomputed from a fresh factorization and
// checked against the constraints to 1e-8.
LpResult lp_solve(const DenseLP& lp);

}  // namespace caldec
