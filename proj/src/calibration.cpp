#include "caldec/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace caldec {

Partition Partition::from_edges(std::vector<double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("partition needs at least two edges");
    if (std::abs(edges.front()) > kTieTol || std::abs(edges.back() - 1.0) > kTieTol)
        throw std::invalid_argument("partition edges must start at 0 and end at 1");
    edges.front() = 0.0;
    edges.back() = 1.0;
    for (std::size_t j = 1; j < edges.size(); ++j) {
        if (!(edges[j] > edges[j - 1]))
            throw std::invalid_argument("partition edges must be strictly increasing");
    }
    Partition p;
    p.d_ = 1;
    for (std::size_t j = 1; j < edges.size(); ++j) {
        p.boxes_.push_back({scalar_point(edges[j - 1]), scalar_point(edges[j])});
    }
    p.edges_ = std::move(edges);
    return p;
}

Partition Partition::uniform(std::size_t bins) {
    if (bins < 1) throw std::invalid_argument("partition needs at least one bin");
    std::vector<double> edges(bins + 1);
    for (std::size_t j = 0; j <= bins; ++j)
        edges[j] = static_cast<double>(j) / static_cast<double>(bins);
    return from_edges(std::move(edges));
}

Partition Partition::from_boxes(Eigen::Index dimension, std::vector<BinBox> boxes) {
    if (dimension < 1) throw std::invalid_argument("partition dimension must be >= 1");
    if (boxes.empty()) throw std::invalid_argument("partition needs at least one box");
    double volume = 0.0;
    for (const BinBox& b : boxes) {
        if (b.lo.size() != dimension || b.hi.size() != dimension)
            throw std::invalid_argument("partition box dimension mismatch");
        double vol = 1.0;
        for (Eigen::Index j = 0; j < dimension; ++j) {
            if (b.lo[j] < -kBoxTol || b.hi[j] > 1.0 + kBoxTol || !(b.hi[j] > b.lo[j]))
                throw std::invalid_argument("partition box must be a nonempty subset of [0,1]^d");
            vol *= b.hi[j] - b.lo[j];
        }
        volume += vol;
    }
    for (std::size_t a = 0; a < boxes.size(); ++a) {
        for (std::size_t b = a + 1; b < boxes.size(); ++b) {
            bool overlap = true;
            for (Eigen::Index j = 0; j < dimension; ++j) {
                double lo = std::max(boxes[a].lo[j], boxes[b].lo[j]);
                double hi = std::min(boxes[a].hi[j], boxes[b].hi[j]);
                if (hi - lo <= kBoxTol) {
                    overlap = false;
                    break;
                }
            }
            if (overlap) throw std::invalid_argument("partition boxes overlap");
        }
    }
    if (std::abs(volume - 1.0) > 1e-6)
        throw std::invalid_argument("partition boxes do not cover [0,1]^d");
    Partition p;
    p.d_ = dimension;
    p.boxes_ = std::move(boxes);
    return p;
}

bool Partition::contains(std::size_t bin, const Vec& v) const {
    if (bin >= boxes_.size()) throw std::invalid_argument("bin index out of range");
    const BinBox& b = boxes_[bin];
    for (Eigen::Index j = 0; j < d_; ++j) {
        bool closed_top = b.hi[j] >= 1.0 - kTieTol;
        if (v[j] < b.lo[j]) return false;
        if (closed_top ? v[j] > b.hi[j] : v[j] >= b.hi[j]) return false;
    }
    return true;
}

std::size_t Partition::locate(const Vec& v) const {
    Vec q = require_in_box(v, "partition point");
    for (std::size_t j = 0; j < boxes_.size(); ++j) {
        if (contains(j, q)) return j;
    }
    throw std::invalid_argument("point not covered by any partition bin");
}

const std::vector<double>& Partition::edges() const {
    if (edges_.empty()) throw std::invalid_argument("partition was not built from interval edges");
    return edges_;
}

TestClass::TestClass(Eigen::Index dimension) : d_(dimension) {
    if (d_ < 1) throw std::invalid_argument("test class dimension must be >= 1");
}

std::size_t TestClass::add_partition(Partition p) {
    if (p.dimension() != d_) throw std::invalid_argument("partition dimension mismatch");
    partitions_.push_back(std::move(p));
    return partitions_.size() - 1;
}

std::size_t TestClass::add_utility(LinearUtility u) {
    if (u.dimension() != d_) throw std::invalid_argument("utility dimension mismatch");
    utilities_.push_back(std::move(u));
    return utilities_.size() - 1;
}

void TestClass::add_test(TestFunction h) {
    switch (h.kind) {
        case TestKind::CoordinateLinear:
            if (h.coord < 0 || h.coord >= d_)
                throw std::invalid_argument("coordinate test index out of range");
            break;
        case TestKind::BinIndicator:
            if (h.partition >= partitions_.size())
                throw std::invalid_argument("bin test references unknown partition");
            if (h.bin >= partitions_[h.partition].num_bins())
                throw std::invalid_argument("bin test references unknown bin");
            break;
        case TestKind::DecisionIndicator:
            if (h.utility >= utilities_.size())
                throw std::invalid_argument("decision test references unknown utility");
            if (h.action >= utilities_[h.utility].num_actions())
                throw std::invalid_argument("decision test references unknown action");
            break;
        case TestKind::Constant:
            break;
    }
    tests_.push_back(h);
}

const TestFunction& TestClass::test(std::size_t i) const {
    if (i >= tests_.size()) throw std::invalid_argument("test index out of range");
    return tests_[i];
}

const Partition& TestClass::partition(std::size_t id) const {
    if (id >= partitions_.size()) throw std::invalid_argument("partition id out of range");
    return partitions_[id];
}

const LinearUtility& TestClass::utility_ref(std::size_t id) const {
    if (id >= utilities_.size()) throw std::invalid_argument("utility id out of range");
    return utilities_[id];
}

double TestClass::evaluate(std::size_t i, const Vec& v) const {
    const TestFunction& h = test(i);
    switch (h.kind) {
        case TestKind::CoordinateLinear:
            return v[h.coord];
        case TestKind::BinIndicator:
            return partitions_[h.partition].contains(h.bin, v) ? 1.0 : 0.0;
        case TestKind::DecisionIndicator:
            return best_response(utilities_[h.utility], v) == h.action ? 1.0 : 0.0;
        case TestKind::Constant:
            return 1.0;
    }
    throw std::logic_error("unreachable test kind");
}

EmpiricalSample::EmpiricalSample(Mat forecasts, Mat outcomes, Vec weights)
    : forecasts_(std::move(forecasts)), outcomes_(std::move(outcomes)), weights_(std::move(weights)) {
    if (forecasts_.rows() < 1) throw std::invalid_argument("sample must contain at least one record");
    if (outcomes_.rows() != forecasts_.rows() || outcomes_.cols() != forecasts_.cols())
        throw std::invalid_argument("forecast and outcome shapes differ");
    if (weights_.size() != forecasts_.rows())
        throw std::invalid_argument("weight count does not match records");
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += weights_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
    for (Eigen::Index i = 0; i < forecasts_.rows(); ++i) {
        forecasts_.row(i) = require_in_box(forecasts_.row(i), "sample forecast").transpose();
        outcomes_.row(i) = require_in_box(outcomes_.row(i), "sample outcome").transpose();
    }
}

EmpiricalSample EmpiricalSample::equal_weights(Mat forecasts, Mat outcomes) {
    const Eigen::Index n = forecasts.rows();
    if (n < 1) throw std::invalid_argument("sample must contain at least one record");
    Vec w = Vec::Constant(n, 1.0 / static_cast<double>(n));
    w[n - 1] = 1.0 - w.head(n - 1).sum();
    return EmpiricalSample(std::move(forecasts), std::move(outcomes), std::move(w));
}

double evaluate_test(const TestClass& H, std::size_t i, const Vec& v) {
    Vec q = require_in_box(v, "test point");
    return H.evaluate(i, q);
}

Mat compute_moments(const TestClass& H, const EmpiricalSample& S, const std::optional<Mat>& beliefs) {
    if (H.dimension() != S.dimension())
        throw std::invalid_argument("test class and sample dimensions differ");
    const Mat& b = beliefs ? *beliefs : S.outcomes();
    if (b.rows() != S.outcomes().rows() || b.cols() != S.outcomes().cols())
        throw std::invalid_argument("belief shape does not match sample");
    Mat m = Mat::Zero(static_cast<Eigen::Index>(H.size()), S.dimension());
    for (std::size_t i = 0; i < H.size(); ++i) {
        for (std::size_t j = 0; j < S.size(); ++j) {
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            double h = H.evaluate(i, S.forecast(j));
            if (h == 0.0) continue;
            m.row(static_cast<Eigen::Index>(i)) +=
                S.weight(j) * h * (b.row(jj) - S.forecasts().row(jj));
        }
    }
    return m;
}

CalibrationAudit audit(const TestClass& H, const EmpiricalSample& S, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("audit slack must be finite and nonnegative");
    CalibrationAudit out;
    out.moments = compute_moments(H, S);
    out.norms = out.moments.rowwise().norm();
    out.max_norm = out.norms.size() > 0 ? out.norms.maxCoeff() : 0.0;
    out.eps = eps;
    out.pass = out.max_norm <= eps;
    return out;
}

TestClass build_decision_class(const LinearUtility& u) {
    TestClass H(u.dimension());
    std::size_t uid = H.add_utility(u);
    for (std::size_t a = 0; a < u.num_actions(); ++a) {
        TestFunction h;
        h.kind = TestKind::DecisionIndicator;
        h.utility = uid;
        h.action = a;
        H.add_test(h);
    }
    return H;
}

TestClass build_bin_class(const Partition& p) {
    TestClass H(p.dimension());
    std::size_t pid = H.add_partition(p);
    for (std::size_t j = 0; j < p.num_bins(); ++j) {
        TestFunction h;
        h.kind = TestKind::BinIndicator;
        h.partition = pid;
        h.bin = j;
        H.add_test(h);
    }
    return H;
}

TestClass build_coordinate_class(Eigen::Index dimension) {
    TestClass H(dimension);
    for (Eigen::Index j = 0; j < dimension; ++j) {
        TestFunction h;
        h.kind = TestKind::CoordinateLinear;
        h.coord = j;
        H.add_test(h);
    }
    return H;
}

TestClass union_classes(const std::vector<TestClass>& classes) {
    if (classes.empty()) throw std::invalid_argument("union needs at least one class");
    TestClass out(classes.front().dimension());
    for (const TestClass& c : classes) {
        if (c.dimension() != out.dimension())
            throw std::invalid_argument("union over mismatched dimensions");
        std::vector<std::size_t> pmap(c.num_partitions());
        for (std::size_t p = 0; p < c.num_partitions(); ++p)
            pmap[p] = out.add_partition(c.partition(p));
        std::vector<std::size_t> umap(c.num_utilities());
        for (std::size_t u = 0; u < c.num_utilities(); ++u)
            umap[u] = out.add_utility(c.utility_ref(u));
        for (std::size_t i = 0; i < c.size(); ++i) {
            TestFunction h = c.test(i);
            if (h.kind == TestKind::BinIndicator) h.partition = pmap[h.partition];
            if (h.kind == TestKind::DecisionIndicator) h.utility = umap[h.utility];
            out.add_test(h);
        }
    }
    return out;
}

RegionStats region_stats(const LinearUtility& u, const EmpiricalSample& S) {
    if (u.dimension() != S.dimension())
        throw std::invalid_argument("utility and sample dimensions differ");
    const std::size_t m = u.num_actions();
    RegionStats out;
    out.prob = Vec::Zero(static_cast<Eigen::Index>(m));
    out.mean = Mat::Zero(static_cast<Eigen::Index>(m), S.dimension());
    out.present.assign(m, 0);
    for (std::size_t i = 0; i < S.size(); ++i) {
        ActionId a = best_response(u, S.forecast(i));
        const Eigen::Index ai = static_cast<Eigen::Index>(a);
        out.prob[ai] += S.weight(i);
        out.mean.row(ai) += S.weight(i) * S.forecasts().row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t a = 0; a < m; ++a) {
        const Eigen::Index ai = static_cast<Eigen::Index>(a);
        if (out.prob[ai] > 0.0) {
            out.present[a] = 1;
            out.mean.row(ai) /= out.prob[ai];
            for (Eigen::Index j = 0; j < S.dimension(); ++j)
                out.mean(ai, j) = std::clamp(out.mean(ai, j), 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace caldec
