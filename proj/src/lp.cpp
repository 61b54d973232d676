#include "caldec/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace caldec {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kDegenStep = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : char { Basic, AtLower, AtUpper };

struct Simplex {
    Eigen::Index m = 0;  // rows
    Eigen::Index n = 0;  // columns including slacks and artificials
    Eigen::Index nstr = 0;
    Mat a;    // original equality system rows
    Vec rhs;
    Mat t;    // working tableau B^-1 a
    Vec lo, hi;
    Vec cost;  // phase-2 objective
    std::vector<VarState> state;
    std::vector<char> artificial;
    std::vector<Eigen::Index> basis;    // column basic in each row
    std::vector<Eigen::Index> in_row;   // row of each basic column, -1 otherwise
    Vec beta;  // values of basic variables
    Vec z;     // reduced costs for the active phase
    double obj = 0.0;
    long iters = 0;
    long stall = 0;
    bool bland = false;

    double value_of(Eigen::Index j) const {
        if (state[j] == VarState::Basic) return beta[in_row[j]];
        return state[j] == VarState::AtLower ? lo[j] : hi[j];
    }

    void load_costs(const Vec& phase_cost) {
        Vec cb(m);
        for (Eigen::Index r = 0; r < m; ++r) cb[r] = phase_cost[basis[r]];
        z = phase_cost - t.transpose() * cb;
        obj = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) obj += phase_cost[j] * value_of(j);
        stall = 0;
        bland = false;
    }

    Eigen::Index pick_entering() const {
        Eigen::Index best = -1;
        double best_viol = kCostTol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (state[j] == VarState::Basic) continue;
            if (hi[j] - lo[j] <= 0.0) continue;  // fixed (locked artificials)
            double viol = state[j] == VarState::AtLower ? -z[j] : z[j];
            if (viol <= kCostTol) continue;
            if (bland) return j;
            if (viol > best_viol) {
                best_viol = viol;
                best = j;
            }
        }
        return best;
    }

    // One simplex step for entering column q.  Returns false when the LP is
    // unbounded in the improving direction.
    bool step(Eigen::Index q) {
        const double dir = state[q] == VarState::AtLower ? 1.0 : -1.0;
        double limit = hi[q] - lo[q];  // entering variable's own span
        Eigen::Index leave_row = -1;
        bool leave_at_upper = false;
        double best_piv = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) {
            double g = t(r, q);
            if (std::abs(g) <= kPivotTol) continue;
            double rate = -dir * g;  // d beta_r / d step
            double room;
            bool to_upper;
            if (rate > 0.0) {
                if (hi[basis[r]] == kInf) continue;
                room = std::max(0.0, hi[basis[r]] - beta[r]) / rate;
                to_upper = true;
            } else {
                room = std::max(0.0, beta[r] - lo[basis[r]]) / (-rate);
                to_upper = false;
            }
            bool better;
            if (room < limit - 1e-12) {
                better = true;
            } else if (room <= limit + 1e-12 && leave_row >= 0) {
                // tie: prefer the larger pivot, then the smaller column index
                better = std::abs(g) > best_piv + 1e-12 ||
                         (std::abs(g) >= best_piv - 1e-12 && basis[r] < basis[leave_row]);
                if (bland) better = basis[r] < basis[leave_row];
            } else {
                better = room <= limit + 1e-12 && leave_row < 0;
            }
            if (better) {
                limit = std::min(limit, room);
                leave_row = r;
                leave_at_upper = to_upper;
                best_piv = std::abs(g);
            }
        }
        if (limit == kInf) return false;

        const double delta = dir * limit;
        if (limit > kDegenStep) {
            stall = 0;
            bland = false;
        } else if (++stall > 300) {
            bland = true;
        }
        obj += z[q] * delta;
        if (leave_row < 0) {
            // bound flip, basis unchanged
            beta -= delta * t.col(q);
            state[q] = state[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
            return true;
        }
        const Eigen::Index leaving = basis[leave_row];
        const double enter_value = value_of(q) + delta;
        beta -= delta * t.col(q);
        double piv = t(leave_row, q);
        t.row(leave_row) /= piv;
        Vec colq = t.col(q);
        colq[leave_row] = 0.0;
        t.noalias() -= colq * t.row(leave_row);
        z -= z[q] * t.row(leave_row).transpose();
        t.col(q).setZero();
        t(leave_row, q) = 1.0;
        z[q] = 0.0;

        state[leaving] = leave_at_upper ? VarState::AtUpper : VarState::AtLower;
        if (artificial[static_cast<std::size_t>(leaving)]) {
            lo[leaving] = 0.0;
            hi[leaving] = 0.0;  // once out, an artificial never re-enters
            state[leaving] = VarState::AtLower;
        }
        in_row[leaving] = -1;
        state[q] = VarState::Basic;
        in_row[q] = leave_row;
        basis[leave_row] = q;
        beta[leave_row] = enter_value;
        return true;
    }

    LpStatus run_phase(const Vec& phase_cost, long max_iters) {
        load_costs(phase_cost);
        while (true) {
            Eigen::Index q = pick_entering();
            if (q < 0) return LpStatus::Optimal;
            if (++iters > max_iters)
                throw NumericError("simplex iteration budget exhausted");
#ifdef CALDEC_LP_TRACE
            std::fprintf(stderr, "iter %ld enter %ld z=%.6g obj=%.6g\n", iters, (long)q, z[q], obj);
#endif
            if (!step(q)) return LpStatus::Unbounded;
        }
    }

    // Re-derive basic values from a fresh factorization of the basis matrix,
    // shedding any drift the rank-1 tableau updates accumulated.
    void refresh_basics() {
        if (m == 0) return;
        Mat b(m, m);
        for (Eigen::Index r = 0; r < m; ++r) b.col(r) = a.col(basis[r]);
        Vec target = rhs;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (state[j] == VarState::Basic) continue;
            double v = value_of(j);
            if (v != 0.0) target -= v * a.col(j);
        }
        Eigen::PartialPivLU<Mat> lu(b);
        Vec fresh = lu.solve(target);
        double recon = (b * fresh - target).cwiseAbs().maxCoeff();
        if (!fresh.allFinite() || recon > 1e-6)
            throw NumericError("simplex basis matrix is numerically singular");
        beta = fresh;
    }
};

void validate(const DenseLP& lp) {
    const Eigen::Index n = lp.c.size();
    if (n < 1) throw std::invalid_argument("lp needs at least one variable");
    if (lp.lo.size() != n || lp.hi.size() != n)
        throw std::invalid_argument("lp bound sizes do not match variable count");
    if (!lp.c.allFinite() || !lp.lo.allFinite() || !lp.hi.allFinite())
        throw std::invalid_argument("lp entries must be finite");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (lp.lo[j] > lp.hi[j] + 1e-15)
            throw std::invalid_argument("lp has lo > hi for some variable");
    }
    if (lp.a_ineq.rows() != lp.b_ineq.size())
        throw std::invalid_argument("inequality rows and bounds differ");
    if (lp.a_eq.rows() != lp.b_eq.size())
        throw std::invalid_argument("equality rows and targets differ");
    if (lp.a_ineq.rows() > 0 && lp.a_ineq.cols() != n)
        throw std::invalid_argument("inequality matrix width mismatch");
    if (lp.a_eq.rows() > 0 && lp.a_eq.cols() != n)
        throw std::invalid_argument("equality matrix width mismatch");
    if ((lp.a_ineq.rows() > 0 && !lp.a_ineq.allFinite()) || !lp.b_ineq.allFinite() ||
        (lp.a_eq.rows() > 0 && !lp.a_eq.allFinite()) || !lp.b_eq.allFinite())
        throw std::invalid_argument("lp entries must be finite");
    if (lp.start.size() != 0 && lp.start.size() != n)
        throw std::invalid_argument("lp start hint size mismatch");
}

}  // namespace

LpResult lp_solve(const DenseLP& lp) {
    validate(lp);
    const Eigen::Index nstr = lp.c.size();
    const Eigen::Index mi = lp.a_ineq.rows();
    const Eigen::Index me = lp.a_eq.rows();
    const Eigen::Index m = mi + me;

    LpResult out;
    if (m == 0) {
        out.x = Vec(nstr);
        for (Eigen::Index j = 0; j < nstr; ++j)
            out.x[j] = lp.c[j] > 0.0 ? lp.lo[j] : (lp.c[j] < 0.0 ? lp.hi[j] : lp.lo[j]);
        out.value = lp.c.dot(out.x);
        return out;
    }

    // initial nonbasic point: each structural variable at the bound nearer its hint
    Vec x0(nstr);
    std::vector<VarState> str_state(static_cast<std::size_t>(nstr));
    for (Eigen::Index j = 0; j < nstr; ++j) {
        double s = lp.start.size() ? std::clamp(lp.start[j], lp.lo[j], lp.hi[j]) : lp.lo[j];
        bool upper = (s - lp.lo[j]) > (lp.hi[j] - s);
        str_state[static_cast<std::size_t>(j)] = upper ? VarState::AtUpper : VarState::AtLower;
        x0[j] = upper ? lp.hi[j] : lp.lo[j];
    }

    Vec resid(m);  // b - A x0 row by row
    if (mi > 0) resid.head(mi) = lp.b_ineq - lp.a_ineq * x0;
    if (me > 0) resid.tail(me) = lp.b_eq - lp.a_eq * x0;

    std::vector<Eigen::Index> art_rows;
    for (Eigen::Index r = 0; r < m; ++r) {
        bool ineq = r < mi;
        if (ineq && resid[r] >= -kFeasTol) continue;  // slack can start basic
        art_rows.push_back(r);
    }

    Simplex sx;
    sx.m = m;
    sx.nstr = nstr;
    sx.n = nstr + mi + static_cast<Eigen::Index>(art_rows.size());
    sx.a = Mat::Zero(m, sx.n);
    if (mi > 0) sx.a.topLeftCorner(mi, nstr) = lp.a_ineq;
    if (me > 0) sx.a.bottomLeftCorner(me, nstr) = lp.a_eq;
    for (Eigen::Index r = 0; r < mi; ++r) sx.a(r, nstr + r) = 1.0;
    sx.rhs = Vec(m);
    if (mi > 0) sx.rhs.head(mi) = lp.b_ineq;
    if (me > 0) sx.rhs.tail(me) = lp.b_eq;
    sx.lo = Vec::Zero(sx.n);
    sx.hi = Vec::Constant(sx.n, kInf);
    sx.lo.head(nstr) = lp.lo;
    sx.hi.head(nstr) = lp.hi;
    sx.cost = Vec::Zero(sx.n);
    sx.cost.head(nstr) = lp.c;
    sx.state.assign(static_cast<std::size_t>(sx.n), VarState::AtLower);
    for (Eigen::Index j = 0; j < nstr; ++j) sx.state[static_cast<std::size_t>(j)] = str_state[static_cast<std::size_t>(j)];
    sx.artificial.assign(static_cast<std::size_t>(sx.n), 0);
    sx.basis.assign(static_cast<std::size_t>(m), -1);
    sx.in_row.assign(static_cast<std::size_t>(sx.n), -1);
    sx.beta = Vec::Zero(m);

    Vec phase1_cost = Vec::Zero(sx.n);
    Eigen::Index next_art = nstr + mi;
    double art_mass = 0.0;
    {
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < m; ++r) {
            bool take_art = k < art_rows.size() && art_rows[k] == r;
            if (!take_art) {
                sx.basis[static_cast<std::size_t>(r)] = nstr + r;  // slack
                sx.beta[r] = std::max(resid[r], 0.0);
            } else {
                double sigma = resid[r] >= 0.0 ? 1.0 : -1.0;
                sx.a(r, next_art) = sigma;
                sx.artificial[static_cast<std::size_t>(next_art)] = 1;
                phase1_cost[next_art] = 1.0;
                sx.basis[static_cast<std::size_t>(r)] = next_art;
                sx.beta[r] = std::abs(resid[r]);
                art_mass += sx.beta[r];
                ++next_art;
                ++k;
            }
        }
    }
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index bc = sx.basis[static_cast<std::size_t>(r)];
        sx.in_row[static_cast<std::size_t>(bc)] = r;
        sx.state[static_cast<std::size_t>(bc)] = VarState::Basic;
    }
    sx.t = sx.a;
    for (Eigen::Index r = 0; r < m; ++r) {
        double piv = sx.a(r, sx.basis[static_cast<std::size_t>(r)]);
        if (piv != 1.0) sx.t.row(r) /= piv;  // artificial sigma = -1
    }

    const long max_iters = std::max<long>(20000, 80 * (m + sx.n));

    if (art_mass > 1e-10) {
        LpStatus s1 = sx.run_phase(phase1_cost, max_iters);
        if (s1 == LpStatus::Unbounded)
            throw NumericError("phase-1 subproblem reported unbounded");
        if (sx.obj > 1e-7) {
            out.status = LpStatus::Infeasible;
            out.iterations = sx.iters;
            return out;
        }
    }
    for (Eigen::Index j = nstr + mi; j < sx.n; ++j) {
        sx.lo[j] = 0.0;
        sx.hi[j] = 0.0;  // pin artificials
        if (sx.state[static_cast<std::size_t>(j)] == VarState::AtUpper)
            sx.state[static_cast<std::size_t>(j)] = VarState::AtLower;
    }

    LpStatus s2 = sx.run_phase(sx.cost, max_iters);
    if (s2 == LpStatus::Unbounded) {
        out.status = LpStatus::Unbounded;
        out.iterations = sx.iters;
        return out;
    }

    sx.refresh_basics();
    out.x = Vec(nstr);
    for (Eigen::Index j = 0; j < nstr; ++j) {
        double v = sx.value_of(j);
        if (v < lp.lo[j] - 1e-7 || v > lp.hi[j] + 1e-7)
            throw NumericError("simplex solution violates variable bounds after refresh");
        out.x[j] = std::clamp(v, lp.lo[j], lp.hi[j]);
    }
    double viol = 0.0;
    if (mi > 0) viol = std::max(viol, (lp.a_ineq * out.x - lp.b_ineq).maxCoeff());
    if (me > 0) viol = std::max(viol, (lp.a_eq * out.x - lp.b_eq).cwiseAbs().maxCoeff());
    if (viol > 1e-8) {
        std::ostringstream msg;
        msg << "simplex constraint residual " << viol << " exceeds 1e-8";
        throw NumericError(msg.str());
    }
    out.value = lp.c.dot(out.x);
    out.status = LpStatus::Optimal;
    out.iterations = sx.iters;
    return out;
}

}  // namespace caldec
