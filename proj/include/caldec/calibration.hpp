#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "caldec/common.hpp"
#include "caldec/utility.hpp"

namespace caldec {

// Axis-aligned cell [lo, hi), closed on coordinates where hi touches 1.
struct BinBox {
    Vec lo;
    Vec hi;
};

// Disjoint cover of [0,1]^d.  For d = 1 built from interval edges; the last
// bin is closed at 1 so every point belongs to exactly one bin.
class Partition {
public:
    static Partition from_edges(std::vector<double> edges);
    static Partition uniform(std::size_t bins);
    static Partition from_boxes(Eigen::Index dimension, std::vector<BinBox> boxes);

    Eigen::Index dimension() const { return d_; }
    std::size_t num_bins() const { return boxes_.size(); }
    bool contains(std::size_t bin, const Vec& v) const;
    std::size_t locate(const Vec& v) const;
    const std::vector<double>& edges() const;
    bool has_edges() const { return !edges_.empty(); }
    const std::vector<BinBox>& boxes() const { return boxes_; }

private:
    Partition() = default;
    Eigen::Index d_ = 1;
    std::vector<BinBox> boxes_;
    std::vector<double> edges_;  // kept when built from edges
};

enum class TestKind { CoordinateLinear, BinIndicator, DecisionIndicator, Constant };

// One calibration test h : [0,1]^d -> R.  Bin and decision indicators point
// into the owning TestClass's partition/utility registries.
struct TestFunction {
    TestKind kind = TestKind::Constant;
    Eigen::Index coord = 0;      // CoordinateLinear
    std::size_t partition = 0;   // BinIndicator
    std::size_t bin = 0;         // BinIndicator
    std::size_t utility = 0;     // DecisionIndicator
    ActionId action = 0;         // DecisionIndicator
};

// Ordered family {h_1, ..., h_k} plus the partitions and utilities its
// indicator tests reference.
class TestClass {
public:
    explicit TestClass(Eigen::Index dimension);

    std::size_t add_partition(Partition p);
    std::size_t add_utility(LinearUtility u);
    void add_test(TestFunction h);

    Eigen::Index dimension() const { return d_; }
    std::size_t size() const { return tests_.size(); }
    const TestFunction& test(std::size_t i) const;
    const Partition& partition(std::size_t id) const;
    const LinearUtility& utility_ref(std::size_t id) const;
    std::size_t num_partitions() const { return partitions_.size(); }
    std::size_t num_utilities() const { return utilities_.size(); }
    double evaluate(std::size_t i, const Vec& v) const;

private:
    Eigen::Index d_;
    std::vector<TestFunction> tests_;
    std::vector<Partition> partitions_;
    std::vector<LinearUtility> utilities_;
};

// Weighted forecast/outcome pairs standing in for the law of (f(X), Y).
class EmpiricalSample {
public:
    EmpiricalSample(Mat forecasts, Mat outcomes, Vec weights);
    static EmpiricalSample equal_weights(Mat forecasts, Mat outcomes);

    std::size_t size() const { return static_cast<std::size_t>(forecasts_.rows()); }
    Eigen::Index dimension() const { return forecasts_.cols(); }
    Vec forecast(std::size_t i) const { return forecasts_.row(static_cast<Eigen::Index>(i)); }
    Vec outcome(std::size_t i) const { return outcomes_.row(static_cast<Eigen::Index>(i)); }
    double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
    const Mat& forecasts() const { return forecasts_; }
    const Mat& outcomes() const { return outcomes_; }
    const Vec& weights() const { return weights_; }

private:
    Mat forecasts_;
    Mat outcomes_;
    Vec weights_;
};

struct CalibrationAudit {
    Mat moments;      // k x d, row i holds m_i
    Vec norms;        // per-test l2 norms
    double max_norm = 0.0;
    double eps = 0.0;
    bool pass = true;
};

double evaluate_test(const TestClass& H, std::size_t i, const Vec& v);

// m_i = sum_j w_j h_i(v_j) (b_j - v_j); beliefs default to the outcomes.
Mat compute_moments(const TestClass& H, const EmpiricalSample& S,
                    const std::optional<Mat>& beliefs = std::nullopt);

CalibrationAudit audit(const TestClass& H, const EmpiricalSample& S, double eps);

TestClass build_decision_class(const LinearUtility& u);
TestClass build_bin_class(const Partition& p);
TestClass build_coordinate_class(Eigen::Index dimension);
TestClass union_classes(const std::vector<TestClass>& classes);

struct RegionStats {
    Vec prob;                   // P_a
    Mat mean;                   // m x d; row a meaningful only when present[a]
    std::vector<char> present;  // P_a > 0
};

RegionStats region_stats(const LinearUtility& u, const EmpiricalSample& S);

}  // namespace caldec
