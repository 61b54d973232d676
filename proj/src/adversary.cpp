#include "caldec/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace caldec {
namespace {

struct MomentRows {
    Mat coef;    // active tests x records, entries w_j * h_t(v_j)
    Mat target;  // active tests x d, moments of identity beliefs
};

MomentRows collect_moments(const TestClass& tests, const EmpiricalSample& sample) {
    const Mat& v = sample.forecasts();
    const Vec& w = sample.weights();
    const Eigen::Index n = v.rows();
    std::vector<Vec> rows;
    for (std::size_t t = 0; t < tests.size(); ++t) {
        Vec row(n);
        bool any = false;
        for (Eigen::Index j = 0; j < n; ++j) {
            double h = evaluate_test(tests, t, v.row(j).transpose());
            row[j] = w[j] * h;
            if (h != 0.0) any = true;
        }
        if (!any) continue;
        rows.push_back(std::move(row));
    }
    MomentRows out;
    out.coef = Mat(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.coef.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    out.target = out.coef * v;
    return out;
}

// Constrains each per-test, per-coordinate moment of the belief variables
// (laid out record-major in the first n*d slots) to target +- eps.
void append_moment_rows(DenseLP& lp, const MomentRows& mr, Eigen::Index nvar, Eigen::Index d,
                        double eps) {
    const Eigen::Index ka = mr.coef.rows();
    const Eigen::Index n = mr.coef.cols();
    if (ka == 0) return;
    if (eps == 0.0) {
        lp.a_eq = Mat::Zero(ka * d, nvar);
        lp.b_eq = Vec(ka * d);
        for (Eigen::Index t = 0; t < ka; ++t)
            for (Eigen::Index c = 0; c < d; ++c) {
                Eigen::Index r = t * d + c;
                for (Eigen::Index j = 0; j < n; ++j) lp.a_eq(r, j * d + c) = mr.coef(t, j);
                lp.b_eq[r] = mr.target(t, c);
            }
    } else {
        lp.a_ineq.conservativeResize(lp.a_ineq.rows() + 2 * ka * d, nvar);
        lp.b_ineq.conservativeResize(lp.b_ineq.size() + 2 * ka * d);
        Eigen::Index base = lp.a_ineq.rows() - 2 * ka * d;
        lp.a_ineq.bottomRows(2 * ka * d).setZero();
        for (Eigen::Index t = 0; t < ka; ++t)
            for (Eigen::Index c = 0; c < d; ++c) {
                Eigen::Index up = base + 2 * (t * d + c);
                for (Eigen::Index j = 0; j < n; ++j) {
                    lp.a_ineq(up, j * d + c) = mr.coef(t, j);
                    lp.a_ineq(up + 1, j * d + c) = -mr.coef(t, j);
                }
                lp.b_ineq[up] = mr.target(t, c) + eps;
                lp.b_ineq[up + 1] = -(mr.target(t, c) - eps);
            }
    }
}

Mat beliefs_from(const Vec& x, Eigen::Index n, Eigen::Index d) {
    Mat q(n, d);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < d; ++c) q(j, c) = std::clamp(x[j * d + c], 0.0, 1.0);
    return q;
}

// Records sharing an identical forecast row get their beliefs replaced by the
// weighted average, so the reported map is a function of the forecast.  Both
// objectives and all moment rows are invariant under this change.
void average_duplicates(const Mat& v, const Vec& w, Mat& q) {
    const Eigen::Index n = v.rows();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            if (v(a, c) != v(b, c)) return v(a, c) < v(b, c);
        }
        return a < b;
    });
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i + 1;
        while (j < n && (v.row(order[j]).array() == v.row(order[i]).array()).all()) ++j;
        if (j - i > 1) {
            double wsum = 0.0;
            Vec acc = Vec::Zero(q.cols());
            for (Eigen::Index s = i; s < j; ++s) {
                wsum += w[order[s]];
                acc += w[order[s]] * q.row(order[s]).transpose();
            }
            Vec bar;
            if (wsum > 0.0) {
                bar = acc / wsum;
            } else {
                bar = Vec::Zero(q.cols());
                for (Eigen::Index s = i; s < j; ++s) bar += q.row(order[s]).transpose();
                bar /= static_cast<double>(j - i);
            }
            for (Eigen::Index s = i; s < j; ++s) q.row(order[s]) = bar.transpose();
        }
        i = j;
    }
}

AdversaryResult finish(const LinearUtility&, const TestClass& tests, const EmpiricalSample& sample,
                       const LpResult& r, Eigen::Index n, Eigen::Index d) {
    if (r.status != LpStatus::Optimal)
        throw NumericError("adversary linear program failed despite a feasible identity map");
    AdversaryResult out;
    out.status = r.status;
    out.beliefs.points = beliefs_from(r.x, n, d);
    average_duplicates(sample.forecasts(), sample.weights(), out.beliefs.points);
    out.beliefs.residuals = compute_moments(tests, sample, out.beliefs.points);
    return out;
}

}  // namespace

AdversaryResult worst_case_for_policy(const LinearUtility& u, const TestClass& tests,
                                      const EmpiricalSample& sample, const PolicyFn& policy,
                                      double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
    if (u.dimension() != sample.dimension() || tests.dimension() != sample.dimension())
        throw std::invalid_argument("dimension mismatch");
    const Mat& v = sample.forecasts();
    const Vec& w = sample.weights();
    const Eigen::Index n = v.rows();
    const Eigen::Index d = v.cols();

    std::vector<ActionId> act(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        act[j] = policy(v.row(j).transpose());
        if (act[j] >= u.num_actions()) throw std::invalid_argument("policy action out of range");
    }

    DenseLP lp;
    lp.c = Vec::Zero(n * d);
    for (Eigen::Index j = 0; j < n; ++j)
        lp.c.segment(j * d, d) = w[j] * u.action(act[j]).payoff;
    lp.lo = Vec::Zero(n * d);
    lp.hi = Vec::Ones(n * d);
    lp.start = Vec(n * d);
    for (Eigen::Index j = 0; j < n; ++j) lp.start.segment(j * d, d) = v.row(j).transpose();
    append_moment_rows(lp, collect_moments(tests, sample), n * d, d, eps);

    AdversaryResult out = finish(u, tests, sample, lp_solve(lp), n, d);
    double value = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        value += w[j] * utility(u, act[j], out.beliefs.points.row(j).transpose());
    out.value = value;
    return out;
}

AdversaryResult robust_value_lp(const LinearUtility& u, const TestClass& tests,
                                const EmpiricalSample& sample, double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
    if (u.dimension() != sample.dimension() || tests.dimension() != sample.dimension())
        throw std::invalid_argument("dimension mismatch");
    const Mat& v = sample.forecasts();
    const Vec& w = sample.weights();
    const Eigen::Index n = v.rows();
    const Eigen::Index d = v.cols();
    const Eigen::Index m = static_cast<Eigen::Index>(u.num_actions());
    const Eigen::Index nq = n * d;

    double tlo = std::numeric_limits<double>::infinity();
    double thi = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < u.num_actions(); ++a) {
        const Action& act = u.action(a);
        tlo = std::min(tlo, act.offset + act.payoff.cwiseMin(0.0).sum());
        thi = std::max(thi, act.offset + act.payoff.cwiseMax(0.0).sum());
    }

    DenseLP lp;
    lp.c = Vec::Zero(nq + n);
    lp.c.tail(n) = w;
    lp.lo = Vec::Zero(nq + n);
    lp.hi = Vec::Ones(nq + n);
    lp.lo.tail(n).setConstant(tlo - 1.0);
    lp.hi.tail(n).setConstant(thi + 1.0);
    lp.a_ineq = Mat::Zero(n * m, nq + n);
    lp.b_ineq = Vec(n * m);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index a = 0; a < m; ++a) {
            Eigen::Index r = j * m + a;
            lp.a_ineq.row(r).segment(j * d, d) =
                u.action(static_cast<std::size_t>(a)).payoff.transpose();
            lp.a_ineq(r, nq + j) = -1.0;
            lp.b_ineq[r] = -u.action(static_cast<std::size_t>(a)).offset;
        }
    lp.start = Vec(nq + n);
    for (Eigen::Index j = 0; j < n; ++j) lp.start.segment(j * d, d) = v.row(j).transpose();
    lp.start.tail(n).setConstant(thi + 1.0);
    append_moment_rows(lp, collect_moments(tests, sample), nq + n, d, eps);

    AdversaryResult out = finish(u, tests, sample, lp_solve(lp), n, d);
    double value = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        value += w[j] * val(u, out.beliefs.points.row(j).transpose()).first;
    out.value = value;
    return out;
}

double saddle_gap(const LinearUtility& u, const TestClass& tests, const EmpiricalSample& sample,
                  double eps, const DualSolution& dual) {
    return robust_value_lp(u, tests, sample, eps).value - dual.value;
}

EmpiricalSample recalibrate_sample(const TestClass& tests, const EmpiricalSample& sample) {
    if (tests.dimension() != sample.dimension())
        throw std::invalid_argument("dimension mismatch");
    const Mat& v = sample.forecasts();
    const Mat& y = sample.outcomes();
    const Eigen::Index n = v.rows();
    const Eigen::Index d = v.cols();
    MomentRows mr = collect_moments(tests, sample);
    if (mr.coef.rows() == 0) return sample;

    // Variables: adjusted outcomes (record-major) then the uniform deviation
    // bound being minimized.
    const Eigen::Index nvar = n * d + 1;
    DenseLP lp;
    lp.c = Vec::Zero(nvar);
    lp.c[nvar - 1] = 1.0;
    lp.lo = Vec::Zero(nvar);
    lp.hi = Vec::Ones(nvar);
    lp.hi[nvar - 1] = 2.0;
    lp.a_ineq = Mat::Zero(2 * n * d, nvar);
    lp.b_ineq = Vec(2 * n * d);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < d; ++c) {
            Eigen::Index r = 2 * (j * d + c);
            lp.a_ineq(r, j * d + c) = 1.0;
            lp.a_ineq(r, nvar - 1) = -1.0;
            lp.b_ineq[r] = y(j, c);
            lp.a_ineq(r + 1, j * d + c) = -1.0;
            lp.a_ineq(r + 1, nvar - 1) = -1.0;
            lp.b_ineq[r + 1] = -y(j, c);
        }
    const Eigen::Index ka = mr.coef.rows();
    lp.a_eq = Mat::Zero(ka * d, nvar);
    lp.b_eq = Vec(ka * d);
    for (Eigen::Index t = 0; t < ka; ++t)
        for (Eigen::Index c = 0; c < d; ++c) {
            Eigen::Index r = t * d + c;
            for (Eigen::Index j = 0; j < n; ++j) lp.a_eq(r, j * d + c) = mr.coef(t, j);
            lp.b_eq[r] = mr.target(t, c);
        }
    lp.start = Vec(nvar);
    for (Eigen::Index j = 0; j < n; ++j) lp.start.segment(j * d, d) = y.row(j).transpose();
    lp.start[nvar - 1] = 1.0;

    LpResult r = lp_solve(lp);
    if (r.status != LpStatus::Optimal)
        throw NumericError("recalibration program failed despite feasible forecasts");
    Mat adjusted(n, d);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < d; ++c)
            adjusted(j, c) = std::clamp(r.x[j * d + c], 0.0, 1.0);
    return EmpiricalSample(v, adjusted, sample.weights());
}

}  // namespace caldec
