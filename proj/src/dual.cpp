#include "caldec/dual.hpp"

#include <algorithm>
#include <cmath>

#include "caldec/lp.hpp"

namespace caldec {
namespace {

struct DualEval {
    double value = 0.0;
    Mat grad;
};

// One pass over the sample: penalized dual value and supergradient together,
// sharing the per-record inner minimizations.
DualEval eval_dual(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                   const Mat& lambda, double eps) {
    DualEval out;
    out.grad = Mat::Zero(lambda.rows(), lambda.cols());
    const std::size_t k = H.size();
    for (std::size_t j = 0; j < S.size(); ++j) {
        Vec v = S.forecast(j);
        Vec s = tilt(H, lambda, v);
        InnerSolution inner = inner_minimize(u, s);
        out.value += S.weight(j) * (inner.objective - v.dot(s));
        for (std::size_t i = 0; i < k; ++i) {
            double h = H.evaluate(i, v);
            if (h == 0.0) continue;
            out.grad.row(static_cast<Eigen::Index>(i)) +=
                S.weight(j) * h * (inner.p - v).transpose();
        }
    }
    if (eps > 0.0) {
        for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
            double nrm = lambda.row(i).norm();
            out.value -= eps * nrm;
            if (nrm > 0.0) out.grad.row(i) -= (eps / nrm) * lambda.row(i);
        }
    }
    return out;
}

void check_shapes(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                  const Mat& lambda, double eps) {
    if (H.dimension() != u.dimension() || S.dimension() != u.dimension())
        throw std::invalid_argument("utility, test class, and sample dimensions differ");
    if (lambda.rows() != static_cast<Eigen::Index>(H.size()) || lambda.cols() != u.dimension())
        throw std::invalid_argument("multiplier matrix shape does not match test class");
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("slack must be finite and nonnegative");
    if (!lambda.allFinite()) throw std::invalid_argument("multipliers must be finite");
}

// Per-test records for the separable d=1 path.
struct TestSupport {
    std::vector<double> w;
    std::vector<double> h;
    std::vector<double> v;
};

struct ScalarFit {
    double lambda = 0.0;
    double grad = 0.0;
    bool converged = false;
    long iters = 0;
};

// Unpenalized scalar subgradient of one test's separable dual term,
// using precomputed val at the candidate points.
double scalar_subgrad(const TestSupport& ts, const std::vector<double>& pts,
                      const std::vector<double>& valpts, double lambda) {
    double g = 0.0;
    for (std::size_t j = 0; j < ts.w.size(); ++j) {
        double slope = lambda * ts.h[j];
        double best = valpts[0] + slope * pts[0];
        double argp = pts[0];
        for (std::size_t l = 1; l < pts.size(); ++l) {
            double o = valpts[l] + slope * pts[l];
            if (o < best - kTieTol) {
                best = o;
                argp = pts[l];
            }
        }
        g += ts.w[j] * ts.h[j] * (argp - ts.v[j]);
    }
    return g;
}

ScalarFit fit_scalar(const TestSupport& ts, const std::vector<double>& pts,
                     const std::vector<double>& valpts, double eps, double cap, double tol) {
    ScalarFit fit;
    double g0 = scalar_subgrad(ts, pts, valpts, 0.0);
    fit.iters = 1;
    if (std::abs(g0) <= eps || std::abs(g0) <= tol) {
        // 0 lies in the penalized supergradient interval at the origin
        fit.converged = true;
        fit.grad = std::max(0.0, std::abs(g0) - eps);
        return fit;
    }
    const double dir = g0 > 0.0 ? 1.0 : -1.0;
    // q is nonincreasing in the normalized coordinate and positive at 0
    auto q = [&](double lam) {
        ++fit.iters;
        return dir * scalar_subgrad(ts, pts, valpts, dir * lam) - eps;
    };
    double hi = 10.0 * std::max(1.0, cap / 1e6);
    double qhi = q(hi);
    while (qhi > tol && hi < cap) {
        hi = std::min(2.0 * hi, cap);
        qhi = q(hi);
    }
    if (qhi > tol) {
        fit.lambda = dir * hi;
        fit.grad = qhi;
        fit.converged = false;
        return fit;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        if (hi - lo <= tol) break;
        double mid = 0.5 * (lo + hi);
        double qm = q(mid);
        if (std::abs(qm) <= tol) {
            fit.lambda = dir * mid;
            fit.grad = std::abs(qm);
            fit.converged = true;
            return fit;
        }
        if (qm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    // certified sign change inside a bracket of width <= tol: the bracketing
    // supergradient interval contains 0, so the distance reported is 0
    fit.lambda = dir * 0.5 * (lo + hi);
    fit.grad = 0.0;
    fit.converged = true;
    return fit;
}

}  // namespace

Vec tilt(const TestClass& H, const Mat& lambda, const Vec& v) {
    if (lambda.rows() != static_cast<Eigen::Index>(H.size()))
        throw std::invalid_argument("multiplier row count does not match test class");
    if (lambda.cols() != H.dimension())
        throw std::invalid_argument("multiplier column count does not match dimension");
    Vec s = Vec::Zero(H.dimension());
    for (std::size_t i = 0; i < H.size(); ++i) {
        double h = H.evaluate(i, v);
        if (h != 0.0) s += h * lambda.row(static_cast<Eigen::Index>(i)).transpose();
    }
    return s;
}

InnerSolution inner_minimize(const LinearUtility& u, const Vec& s) {
    if (s.size() != u.dimension()) throw std::invalid_argument("tilt dimension mismatch");
    if (!s.allFinite()) throw std::invalid_argument("tilt must be finite");
    InnerSolution out;
    if (u.dimension() == 1) {
        std::vector<double> pts = breakpoints_1d(u);
        double best = std::numeric_limits<double>::infinity();
        double argp = 0.0;
        for (double p : pts) {
            double o = val(u, scalar_point(p)).first + s[0] * p;
            if (o < best - kTieTol) {
                best = o;
                argp = p;
            }
        }
        out.p = scalar_point(argp);
        out.objective = best;
        out.action = val(u, out.p).second;
        return out;
    }
    const Eigen::Index d = u.dimension();
    const std::size_t m = u.num_actions();
    double tlo = std::numeric_limits<double>::infinity();
    double thi = -std::numeric_limits<double>::infinity();
    for (const Action& a : u.actions()) {
        double lo_corner = a.offset, hi_corner = a.offset;
        for (Eigen::Index j = 0; j < d; ++j) {
            lo_corner += std::min(a.payoff[j], 0.0);
            hi_corner += std::max(a.payoff[j], 0.0);
        }
        tlo = std::min(tlo, lo_corner);
        thi = std::max(thi, hi_corner);
    }
    DenseLP lp;
    lp.c = Vec(d + 1);
    lp.c.head(d) = s;
    lp.c[d] = 1.0;
    lp.lo = Vec::Zero(d + 1);
    lp.hi = Vec::Ones(d + 1);
    lp.lo[d] = tlo - 1.0;
    lp.hi[d] = thi + 1.0;
    lp.a_ineq = Mat(static_cast<Eigen::Index>(m), d + 1);
    lp.b_ineq = Vec(static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
        lp.a_ineq.row(static_cast<Eigen::Index>(a)).head(d) = u.actions()[a].payoff;
        lp.a_ineq(static_cast<Eigen::Index>(a), d) = -1.0;
        lp.b_ineq[static_cast<Eigen::Index>(a)] = -u.actions()[a].offset;
    }
    lp.start = Vec::Constant(d + 1, 0.5);
    lp.start[d] = thi + 1.0;
    LpResult base = lp_solve(lp);
    if (base.status != LpStatus::Optimal)
        throw NumericError("inner epigraph program did not solve");

    // lexicographic refinement: cap the objective, then minimize coordinates in order
    DenseLP refine = lp;
    refine.a_ineq.conservativeResize(refine.a_ineq.rows() + 1, d + 1);
    refine.a_ineq.row(refine.a_ineq.rows() - 1) = lp.c.transpose();
    refine.b_ineq.conservativeResize(refine.b_ineq.size() + 1);
    refine.b_ineq[refine.b_ineq.size() - 1] = base.value + 1e-10;
    Vec p = base.x.head(d);
    refine.start = base.x;
    for (Eigen::Index j = 0; j < d; ++j) {
        refine.c = Vec::Zero(d + 1);
        refine.c[j] = 1.0;
        LpResult rj = lp_solve(refine);
        if (rj.status != LpStatus::Optimal)
            throw NumericError("lexicographic refinement step did not solve");
        double pj = std::clamp(rj.x[j], 0.0, 1.0);
        p[j] = pj;
        refine.lo[j] = pj;
        refine.hi[j] = pj;
        refine.start = rj.x;
    }
    out.p = p;
    auto [vp, action] = val(u, p);
    out.objective = vp + s.dot(p);
    out.action = action;
    return out;
}

double dual_objective(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                      const Mat& lambda, double eps) {
    check_shapes(u, H, S, lambda, eps);
    return eval_dual(u, H, S, lambda, eps).value;
}

Mat dual_subgradient(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                     const Mat& lambda, double eps) {
    check_shapes(u, H, S, lambda, eps);
    return eval_dual(u, H, S, lambda, eps).grad;
}

DualSolution solve_dual(const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
                        double eps, const DualOptions& opts) {
    const std::size_t k = H.size();
    const Eigen::Index d = u.dimension();
    check_shapes(u, H, S, Mat::Zero(static_cast<Eigen::Index>(k), d), eps);
    DualSolution sol;
    sol.eps = eps;
    sol.lambda = Mat::Zero(static_cast<Eigen::Index>(k), d);
    if (k == 0) {
        sol.value = inner_minimize(u, Vec::Zero(d)).objective;
        sol.converged = true;
        if (opts.trace) opts.trace->push_back({0, sol.value, 0.0});
        return sol;
    }

    const double cap = 1e6 * std::max(1.0, u.lipschitz());

    bool separable = d == 1;
    if (separable) {
        for (std::size_t j = 0; j < S.size() && separable; ++j) {
            int firing = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (H.evaluate(i, S.forecast(j)) != 0.0) ++firing;
            }
            if (firing > 1) separable = false;
        }
    }

    if (separable) {
        std::vector<TestSupport> supports(k);
        for (std::size_t j = 0; j < S.size(); ++j) {
            Vec v = S.forecast(j);
            for (std::size_t i = 0; i < k; ++i) {
                double h = H.evaluate(i, v);
                if (h == 0.0) continue;
                supports[i].w.push_back(S.weight(j));
                supports[i].h.push_back(h);
                supports[i].v.push_back(v[0]);
            }
        }
        std::vector<double> pts = breakpoints_1d(u);
        std::vector<double> valpts(pts.size());
        for (std::size_t l = 0; l < pts.size(); ++l)
            valpts[l] = val(u, scalar_point(pts[l])).first;
        double grad_sq = 0.0;
        bool all_ok = true;
        for (std::size_t i = 0; i < k; ++i) {
            ScalarFit fit = fit_scalar(supports[i], pts, valpts, eps, cap, opts.tol);
            sol.lambda(static_cast<Eigen::Index>(i), 0) = fit.lambda;
            grad_sq += fit.grad * fit.grad;
            all_ok = all_ok && fit.converged;
            sol.iterations += fit.iters;
        }
        sol.value = dual_objective(u, H, S, sol.lambda, eps);
        sol.grad_norm = std::sqrt(grad_sq);
        sol.converged = all_ok;
        if (opts.trace) opts.trace->push_back({sol.iterations, sol.value, sol.grad_norm});
        return sol;
    }

    // general path: projected subgradient ascent with averaging
    Mat lam = sol.lambda;
    Mat avg = Mat::Zero(lam.rows(), lam.cols());
    Mat best_lam = lam;
    double best_val = -std::numeric_limits<double>::infinity();
    long t = 0;
    bool hit_tol = false;
    for (t = 1; t <= opts.max_iters; ++t) {
        DualEval ev = eval_dual(u, H, S, lam, eps);
        double gnorm = ev.grad.norm();
        if (opts.trace) opts.trace->push_back({t, ev.value, gnorm});
        if (ev.value > best_val) {
            best_val = ev.value;
            best_lam = lam;
        }
        avg += lam;
        if (gnorm <= opts.tol) {
            hit_tol = true;
            break;
        }
        lam += (opts.step0 / std::sqrt(static_cast<double>(t))) * ev.grad;
        for (Eigen::Index i = 0; i < lam.rows(); ++i) {
            double nrm = lam.row(i).norm();
            if (nrm > cap) lam.row(i) *= cap / nrm;
        }
    }
    sol.iterations = std::min(t, opts.max_iters);
    Mat final_lam = best_lam;
    double final_val = best_val;
    if (hit_tol) {
        final_lam = lam;
        final_val = eval_dual(u, H, S, lam, eps).value;
        if (final_val < best_val) {
            final_lam = best_lam;
            final_val = best_val;
        }
    } else if (sol.iterations > 0) {
        Mat mean = avg / static_cast<double>(sol.iterations);
        double mean_val = eval_dual(u, H, S, mean, eps).value;
        if (mean_val > final_val) {
            final_lam = mean;
            final_val = mean_val;
        }
    }
    sol.lambda = final_lam;
    sol.value = final_val;
    sol.grad_norm = eval_dual(u, H, S, final_lam, eps).grad.norm();
    sol.converged = sol.grad_norm <= opts.tol;
    return sol;
}

}  // namespace caldec
