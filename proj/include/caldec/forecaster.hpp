#pragma once

#include <cstdint>

#include "caldec/common.hpp"

namespace caldec {

// Random-feature regressor with an exactly solved least-squares head.  The
// hidden map is frozen at construction time; the head makes the training
// residual orthogonal to every feature, so the induced forecast moments
// vanish to solver precision.  Predictions are clipped to [0,1]; the raw
// value stays available for stationarity checks.
class Forecaster {
public:
    Forecaster(Mat w, Vec b, Vec head, Vec center, Vec scale, double target_lo, double target_hi);

    Eigen::Index num_features() const { return w_.cols(); }
    std::size_t width() const { return static_cast<std::size_t>(w_.rows()); }

    Vec hidden(const Vec& x) const;
    double predict_raw(const Vec& x) const;
    double predict(const Vec& x) const;
    Vec predict_raw(const Mat& features) const;
    Vec predict(const Mat& features) const;

    // Min-max map fitted on the training extremes; not clipped.
    double rescale_target(double y) const;
    double target_lo() const { return tlo_; }
    double target_hi() const { return thi_; }

private:
    Mat w_;
    Vec b_;
    Vec head_;
    Vec center_;
    Vec scale_;
    double tlo_;
    double thi_;
};

// rescale_targets fits the min-max target map on the training extremes;
// switching it off trains on the raw targets and leaves the map as identity.
Forecaster train_forecaster(const Mat& features, const Vec& target, std::size_t width,
                            std::uint64_t seed, bool rescale_targets = true);

}  // namespace caldec
