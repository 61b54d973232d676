#include "caldec/forecaster.hpp"

#include <cmath>
#include <random>
#include <utility>

namespace caldec {

namespace {

constexpr double kRidge = 1e-10;

}  // namespace

Forecaster::Forecaster(Mat w, Vec b, Vec head, Vec center, Vec scale, double target_lo,
                       double target_hi)
    : w_(std::move(w)),
      b_(std::move(b)),
      head_(std::move(head)),
      center_(std::move(center)),
      scale_(std::move(scale)),
      tlo_(target_lo),
      thi_(target_hi) {
    if (w_.rows() != b_.size() || head_.size() != w_.rows() + 1)
        throw std::invalid_argument("forecaster: inconsistent layer shapes");
    if (center_.size() != w_.cols() || scale_.size() != w_.cols())
        throw std::invalid_argument("forecaster: inconsistent standardization shapes");
}

Vec Forecaster::hidden(const Vec& x) const {
    if (x.size() != w_.cols()) throw std::invalid_argument("forecaster: feature size mismatch");
    Vec z = (x - center_).cwiseQuotient(scale_);
    return ((w_ * z + b_).array().tanh()).matrix();
}

double Forecaster::predict_raw(const Vec& x) const {
    return head_[0] + head_.tail(w_.rows()).dot(hidden(x));
}

double Forecaster::predict(const Vec& x) const {
    return std::clamp(predict_raw(x), 0.0, 1.0);
}

Vec Forecaster::predict_raw(const Mat& features) const {
    Vec out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        out[i] = predict_raw(Vec(features.row(i).transpose()));
    return out;
}

Vec Forecaster::predict(const Mat& features) const {
    Vec out = predict_raw(features);
    return out.cwiseMax(0.0).cwiseMin(1.0);
}

double Forecaster::rescale_target(double y) const {
    double span = thi_ - tlo_;
    if (span <= 0.0) return 0.5;
    return (y - tlo_) / span;
}

Forecaster train_forecaster(const Mat& features, const Vec& target, std::size_t width,
                            std::uint64_t seed, bool rescale_targets) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (n == 0 || d == 0) throw DataError("train_forecaster: empty training data");
    if (target.size() != n) throw DataError("train_forecaster: feature/target row mismatch");
    if (width == 0) throw std::invalid_argument("train_forecaster: width must be positive");
    if (!features.allFinite() || !target.allFinite())
        throw DataError("train_forecaster: non-finite training data");
    const auto k = static_cast<Eigen::Index>(width);

    Vec center = features.colwise().mean();
    Vec scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double var = (features.col(j).array() - center[j]).square().mean();
        scale[j] = std::max(std::sqrt(var), 1e-12);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.5 / std::sqrt(static_cast<double>(d)));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Mat w(k, d);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < d; ++j) w(i, j) = gauss(rng);
    Vec b(k);
    for (Eigen::Index i = 0; i < k; ++i) b[i] = unif(rng);

    double tlo = rescale_targets ? target.minCoeff() : 0.0;
    double thi = rescale_targets ? target.maxCoeff() : 1.0;
    double span = thi - tlo;
    Vec ys = span > 0.0 ? Vec(((target.array() - tlo) / span).matrix()) : Vec(Vec::Constant(n, 0.5));

    Mat phi(n, k + 1);
    phi.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec z = (features.row(i).transpose() - center).cwiseQuotient(scale);
        phi.row(i).tail(k) = ((w * z + b).array().tanh()).matrix().transpose();
    }

    Mat gram = phi.transpose() * phi;
    Mat ridged = gram;
    ridged.diagonal().array() += kRidge;
    Vec rhs = phi.transpose() * ys;
    Eigen::LDLT<Mat> ldlt(ridged);
    if (ldlt.info() != Eigen::Success)
        throw NumericError(
            "train_forecaster: normal equations are singular; increase the ridge or reduce the "
            "width");
    Vec head = ldlt.solve(rhs);
    // Refine against the unridged system; the normal equations are always
    // consistent, so this drives the residual moments themselves to zero.
    for (int it = 0; it < 60; ++it) {
        Vec resid = rhs - gram * head;
        if (resid.cwiseAbs().maxCoeff() <= 1e-11 * static_cast<double>(n)) break;
        head += ldlt.solve(resid);
    }
    // Refinement stalls when the feature matrix is rank deficient below the
    // ridge.  A truncated least-squares solve restores stationarity there:
    // dropping a near-null direction costs a moment proportional to its
    // singular value, while keeping it inflates the head weights until
    // rounding in the prediction sums swamps the moments.  The cheapest
    // truncation whose measured moments are clean wins.
    if ((rhs - gram * head).cwiseAbs().maxCoeff() > 1e-11 * static_cast<double>(n)) {
        auto worst_moment = [&](const Vec& h) {
            double intercept = 0.0, forecast = 0.0;
            Vec hidden = Vec::Zero(k);
            for (Eigen::Index i = 0; i < n; ++i) {
                double pred = h[0] + h.tail(k).dot(phi.row(i).tail(k));
                double r = ys[i] - pred;
                intercept += r;
                forecast += pred * r;
                hidden += phi.row(i).tail(k).transpose() * r;
            }
            return std::max({std::abs(intercept), std::abs(forecast),
                             hidden.cwiseAbs().maxCoeff()}) /
                   static_cast<double>(n);
        };
        double best = worst_moment(head);
        Eigen::BDCSVD<Mat> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
        for (double threshold : {1e-8, 1e-7, 1e-6, 1e-5}) {
            if (best <= 1e-9) break;
            svd.setThreshold(threshold);
            Vec candidate = svd.solve(ys);
            for (int it = 0; it < 4; ++it) candidate += svd.solve(ys - phi * candidate);
            double m = worst_moment(candidate);
            if (m < best) {
                best = m;
                head = std::move(candidate);
            }
        }
    }
    if (!head.allFinite()) throw NumericError("train_forecaster: head solve produced non-finite weights");

    return Forecaster(std::move(w), std::move(b), std::move(head), std::move(center),
                      std::move(scale), tlo, thi);
}

}  // namespace caldec
