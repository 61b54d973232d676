#include "caldec/policy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace caldec {
namespace {

Vec global_mean(const EmpiricalSample& S) {
    Vec m = S.forecasts().transpose() * S.weights();
    for (Eigen::Index c = 0; c < m.size(); ++c) m[c] = std::clamp(m[c], 0.0, 1.0);
    return m;
}

double scan_interval_1d(const LinearUtility& u, double lo, double hi) {
    std::vector<double> cand{lo, hi};
    for (double b : breakpoints_1d(u))
        if (b > lo + kTieTol && b < hi - kTieTol) cand.push_back(b);
    std::sort(cand.begin(), cand.end());
    double best_p = cand.front();
    double best_v = std::numeric_limits<double>::infinity();
    for (double p : cand) {
        double o = val(u, scalar_point(p)).first;
        if (o < best_v - kTieTol) {
            best_v = o;
            best_p = p;
        }
    }
    return best_p;
}

Vec descend_ball(const LinearUtility& u, const Vec& center, double radius) {
    const Eigen::Index d = center.size();
    auto project = [&](Vec p) {
        for (int round = 0; round < 32; ++round) {
            for (Eigen::Index c = 0; c < d; ++c) p[c] = std::clamp(p[c], 0.0, 1.0);
            double dist = (p - center).norm();
            if (dist <= radius + 1e-12) {
                bool boxed = true;
                for (Eigen::Index c = 0; c < d; ++c)
                    if (p[c] < -1e-12 || p[c] > 1.0 + 1e-12) boxed = false;
                if (boxed) break;
            } else {
                p = center + (radius / dist) * (p - center);
            }
        }
        return p;
    };
    Vec p = project(center);
    Vec best = p;
    double best_v = val(u, p).first;
    double scale = radius / std::max(u.lipschitz(), 1e-12);
    for (int t = 1; t <= 200; ++t) {
        Vec g = u.action(val(u, p).second).payoff;
        Vec next = project(p - (scale / std::sqrt(static_cast<double>(t))) * g);
        double o = val(u, next).first;
        if (o < best_v - kTieTol) {
            best_v = o;
            best = next;
        }
        if ((next - p).norm() <= 1e-8) break;
        p = next;
    }
    return best;
}

struct BinLayout {
    Mat beliefs;
    std::vector<char> fallback;
};

BinLayout bin_beliefs_for(const LinearUtility& u, const Partition& bins, const EmpiricalSample& S,
                          double eps, bool shrink) {
    const Mat& v = S.forecasts();
    const Vec& w = S.weights();
    const Eigen::Index d = v.cols();
    const std::size_t nbins = bins.num_bins();
    Vec prob = Vec::Zero(static_cast<Eigen::Index>(nbins));
    Mat sum = Mat::Zero(static_cast<Eigen::Index>(nbins), d);
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
        std::size_t b = bins.locate(v.row(j).transpose());
        prob[static_cast<Eigen::Index>(b)] += w[j];
        sum.row(static_cast<Eigen::Index>(b)) += w[j] * v.row(j);
    }
    Vec fallback_mean = global_mean(S);
    BinLayout out;
    out.beliefs = Mat(static_cast<Eigen::Index>(nbins), d);
    out.fallback.assign(nbins, 0);
    for (std::size_t b = 0; b < nbins; ++b) {
        Eigen::Index bi = static_cast<Eigen::Index>(b);
        if (prob[bi] <= 0.0) {
            out.beliefs.row(bi) = fallback_mean.transpose();
            out.fallback[b] = 1;
            continue;
        }
        Vec m = sum.row(bi).transpose() / prob[bi];
        for (Eigen::Index c = 0; c < d; ++c) m[c] = std::clamp(m[c], 0.0, 1.0);
        if (!shrink || eps == 0.0) {
            out.beliefs.row(bi) = m.transpose();
            continue;
        }
        double radius = eps / prob[bi];
        if (radius <= 1e-9) {
            out.beliefs.row(bi) = m.transpose();
        } else if (d == 1) {
            double lo = std::clamp(m[0] - radius, 0.0, 1.0);
            double hi = std::clamp(m[0] + radius, 0.0, 1.0);
            out.beliefs(bi, 0) = scan_interval_1d(u, lo, hi);
        } else {
            out.beliefs.row(bi) = descend_ball(u, m, radius).transpose();
        }
    }
    return out;
}

bool same_utility(const LinearUtility& a, const LinearUtility& b) {
    if (a.dimension() != b.dimension() || a.num_actions() != b.num_actions()) return false;
    for (std::size_t i = 0; i < a.num_actions(); ++i) {
        const Action& x = a.action(i);
        const Action& y = b.action(i);
        if (x.label != y.label || x.offset != y.offset) return false;
        if ((x.payoff.array() != y.payoff.array()).any()) return false;
    }
    return true;
}

std::vector<long> match_indicators(const LinearUtility& u, const TestClass& tests) {
    std::vector<long> matched(u.num_actions(), -1);
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const TestFunction& t = tests.test(i);
        if (t.kind != TestKind::DecisionIndicator) continue;
        if (t.action >= u.num_actions()) continue;
        if (!same_utility(tests.utility_ref(t.utility), u)) continue;
        if (matched[t.action] < 0) matched[t.action] = static_cast<long>(i);
    }
    return matched;
}

}  // namespace

RobustPolicy dual_policy(const LinearUtility& u, const TestClass& tests, DualSolution dual) {
    if (tests.dimension() != u.dimension()) throw std::invalid_argument("dimension mismatch");
    if (dual.lambda.rows() != static_cast<Eigen::Index>(tests.size()) ||
        (tests.size() > 0 && dual.lambda.cols() != u.dimension()))
        throw std::invalid_argument("multiplier shape does not match the test class");
    double eps = dual.eps;
    return RobustPolicy{.mode = PolicyMode::Dual,
                        .utility = u,
                        .tests = tests,
                        .dual = std::move(dual),
                        .eps = eps};
}

RobustPolicy bin_policy(const LinearUtility& u, const Partition& bins, const EmpiricalSample& S) {
    if (u.dimension() != S.dimension()) throw std::invalid_argument("dimension mismatch");
    BinLayout layout = bin_beliefs_for(u, bins, S, 0.0, false);
    RobustPolicy p{.mode = PolicyMode::BinClosedForm,
                   .utility = u,
                   .tests = build_bin_class(bins),
                   .bins = bins,
                   .bin_beliefs = std::move(layout.beliefs),
                   .bin_fallback = std::move(layout.fallback),
                   .eps = 0.0};
    return p;
}

RobustPolicy eps_bin_policy(const LinearUtility& u, const Partition& bins,
                            const EmpiricalSample& S, double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
    if (u.dimension() != S.dimension()) throw std::invalid_argument("dimension mismatch");
    BinLayout layout = bin_beliefs_for(u, bins, S, eps, true);
    RobustPolicy p{.mode = PolicyMode::BinClosedForm,
                   .utility = u,
                   .tests = build_bin_class(bins),
                   .bins = bins,
                   .bin_beliefs = std::move(layout.beliefs),
                   .bin_fallback = std::move(layout.fallback),
                   .eps = eps};
    return p;
}

RobustPolicy collapse_policy(const LinearUtility& u, const TestClass& tests) {
    if (tests.dimension() != u.dimension()) throw std::invalid_argument("dimension mismatch");
    std::vector<long> matched = match_indicators(u, tests);
    if (std::any_of(matched.begin(), matched.end(), [](long m) { return m < 0; }))
        throw std::invalid_argument("test class lacks an indicator for some action");
    return RobustPolicy{.mode = PolicyMode::CollapsePlugin, .utility = u, .tests = tests};
}

Vec worst_case_belief(const RobustPolicy& policy, const Vec& v) {
    Vec x = require_in_box(v, "forecast");
    switch (policy.mode) {
        case PolicyMode::CollapsePlugin:
            return x;
        case PolicyMode::BinClosedForm: {
            std::size_t b = policy.bins->locate(x);
            return policy.bin_beliefs.row(static_cast<Eigen::Index>(b)).transpose();
        }
        case PolicyMode::Dual:
        default: {
            Vec s = tilt(policy.tests, policy.dual.lambda, x);
            return inner_minimize(policy.utility, s).p;
        }
    }
}

ActionId robust_action(const RobustPolicy& policy, const Vec& v) {
    return best_response(policy.utility, worst_case_belief(policy, v));
}

PolicyFn as_policy_fn(const RobustPolicy& policy) {
    return [&policy](const Vec& v) { return robust_action(policy, v); };
}

CollapseCheck collapse_check(const LinearUtility& u, const TestClass& tests,
                             const EmpiricalSample& S, double eps) {
    CollapseCheck out;
    out.certificate.matched = match_indicators(u, tests);
    for (std::size_t a = 0; a < u.num_actions(); ++a)
        if (out.certificate.matched[a] < 0) out.certificate.missing.push_back(a);
    out.certificate.structural = out.certificate.missing.empty();
    out.certificate.audit = audit(tests, S, eps);
    out.is_collapsed = out.certificate.structural && out.certificate.audit.pass;
    return out;
}

}  // namespace caldec
