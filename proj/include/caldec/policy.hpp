#pragma once

#include <optional>
#include <vector>

#include "caldec/adversary.hpp"
#include "caldec/calibration.hpp"
#include "caldec/dual.hpp"
#include "caldec/utility.hpp"

namespace caldec {

enum class PolicyMode { Dual, BinClosedForm, CollapsePlugin };

// A decision rule over the forecast box.  Dual mode best-responds to the
// tilted inner minimizer, bin mode to a stored per-bin belief, collapse mode
// to the forecast itself.
struct RobustPolicy {
    PolicyMode mode = PolicyMode::Dual;
    LinearUtility utility;
    TestClass tests;
    DualSolution dual;
    std::optional<Partition> bins;
    Mat bin_beliefs;                 // J x d, bin modes only
    std::vector<char> bin_fallback;  // bins that fell back to the global mean
    double eps = 0.0;
};

RobustPolicy dual_policy(const LinearUtility& u, const TestClass& tests, DualSolution dual);

// Per-bin weighted forecast means as beliefs; empty bins take the global mean
// and are flagged.
RobustPolicy bin_policy(const LinearUtility& u, const Partition& bins, const EmpiricalSample& S);

// Per-bin belief minimizing the best-attainable payoff over the radius
// eps / P_j ball around the bin mean, intersected with the box.
RobustPolicy eps_bin_policy(const LinearUtility& u, const Partition& bins,
                            const EmpiricalSample& S, double eps);

RobustPolicy collapse_policy(const LinearUtility& u, const TestClass& tests);

Vec worst_case_belief(const RobustPolicy& policy, const Vec& v);
ActionId robust_action(const RobustPolicy& policy, const Vec& v);

// Adapter for the adversary interface.  The policy must outlive the returned
// callable.
PolicyFn as_policy_fn(const RobustPolicy& policy);

struct CollapseCertificate {
    std::vector<long> matched;          // test index backing each action, -1 if absent
    std::vector<std::size_t> missing;   // actions with no matching indicator
    bool structural = false;
    CalibrationAudit audit{};
};

struct CollapseCheck {
    bool is_collapsed = false;
    CollapseCertificate certificate;
};

// True when the class carries an indicator test for every action of u (backed
// by an identical registered utility) and the sample passes the audit at eps.
CollapseCheck collapse_check(const LinearUtility& u, const TestClass& tests,
                             const EmpiricalSample& S, double eps);

}  // namespace caldec
