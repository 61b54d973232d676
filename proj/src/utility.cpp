#include "caldec/utility.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace caldec {

Vec require_in_box(const Vec& p, const char* what) {
    Vec q = p;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (!std::isfinite(q[j]) || q[j] < -kBoxTol || q[j] > 1.0 + kBoxTol) {
            std::ostringstream msg;
            msg << what << ": coordinate " << j << " = " << q[j] << " outside [0,1]";
            throw std::invalid_argument(msg.str());
        }
        q[j] = std::clamp(q[j], 0.0, 1.0);
    }
    return q;
}

LinearUtility::LinearUtility(Eigen::Index dimension, std::vector<Action> actions)
    : d_(dimension), actions_(std::move(actions)) {
    if (d_ < 1) throw std::invalid_argument("utility dimension must be >= 1");
    if (actions_.empty()) throw std::invalid_argument("utility needs at least one action");
    std::set<std::string> labels;
    for (const Action& a : actions_) {
        if (a.payoff.size() != d_)
            throw std::invalid_argument("action payoff size does not match dimension");
        if (!a.payoff.allFinite() || !std::isfinite(a.offset))
            throw std::invalid_argument("action coefficients must be finite");
        if (!labels.insert(a.label).second)
            throw std::invalid_argument("duplicate action label: " + a.label);
    }
}

LinearUtility LinearUtility::scaled(double alpha, const std::vector<double>& multipliers,
                                    const std::vector<double>& costs) {
    if (multipliers.size() != costs.size())
        throw std::invalid_argument("multipliers and costs must have equal length");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    std::vector<Action> acts;
    acts.reserve(multipliers.size());
    for (std::size_t a = 0; a < multipliers.size(); ++a) {
        std::ostringstream label;
        label << multipliers[a];
        acts.push_back({label.str(), scalar_point(alpha * multipliers[a]), -costs[a]});
    }
    return LinearUtility(1, std::move(acts));
}

const Action& LinearUtility::action(ActionId a) const {
    if (a >= actions_.size()) throw std::invalid_argument("action index out of range");
    return actions_[a];
}

double LinearUtility::lipschitz() const {
    double L = 0.0;
    for (const Action& a : actions_) L = std::max(L, a.payoff.norm());
    return L;
}

double utility(const LinearUtility& u, ActionId a, const Vec& p) {
    const Action& act = u.action(a);
    Vec q = require_in_box(p, "utility point");
    return act.payoff.dot(q) + act.offset;
}

std::pair<double, ActionId> val(const LinearUtility& u, const Vec& p) {
    Vec q = require_in_box(p, "val point");
    double best = u.actions()[0].payoff.dot(q) + u.actions()[0].offset;
    ActionId arg = 0;
    for (std::size_t a = 1; a < u.num_actions(); ++a) {
        double v = u.actions()[a].payoff.dot(q) + u.actions()[a].offset;
        if (v > best + kTieTol) {
            best = v;
            arg = a;
        }
    }
    return {best, arg};
}

ActionId best_response(const LinearUtility& u, const Vec& v) {
    return val(u, v).second;
}

ActionId minimax_safety_action(const LinearUtility& u) {
    double best = 0.0;
    ActionId arg = 0;
    for (std::size_t a = 0; a < u.num_actions(); ++a) {
        const Action& act = u.actions()[a];
        double worst = act.offset;
        for (Eigen::Index j = 0; j < act.payoff.size(); ++j)
            worst += std::min(act.payoff[j], 0.0);
        if (a == 0 || worst > best + kTieTol) {
            best = worst;
            arg = a;
        }
    }
    return arg;
}

std::vector<double> breakpoints_1d(const LinearUtility& u) {
    if (u.dimension() != 1) throw std::invalid_argument("breakpoints_1d requires dimension 1");
    std::vector<double> pts{0.0, 1.0};
    const auto& acts = u.actions();
    for (std::size_t a = 0; a < acts.size(); ++a) {
        for (std::size_t b = a + 1; b < acts.size(); ++b) {
            double dr = acts[a].payoff[0] - acts[b].payoff[0];
            if (std::abs(dr) < kTieTol) continue;  // parallel
            double p = (acts[b].offset - acts[a].offset) / dr;
            if (p > 0.0 && p < 1.0) pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts) {
        if (out.empty() || p - out.back() > kTieTol) out.push_back(p);
    }
    return out;
}

}  // namespace caldec
