#include <doctest.h>

#include <random>

#include "caldec/calibration.hpp"

using namespace caldec;

namespace {

LinearUtility bike_utility() {
    return LinearUtility::scaled(0.9, {0.8, 1.0, 1.2}, {0.02, 0.05, 0.1});
}

EmpiricalSample two_point_sample() {
    Mat v(2, 1), y(2, 1);
    v << 0.2, 0.8;
    y << 0.4, 0.6;
    return EmpiricalSample::equal_weights(v, y);
}

EmpiricalSample random_sample(std::mt19937_64& rng, std::size_t n, Eigen::Index d) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mat v(n, d), y(n, d);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            v(i, j) = unit(rng);
            y(i, j) = unit(rng);
        }
    return EmpiricalSample::equal_weights(v, y);
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("partition membership is half open with a closed last bin") {
    Partition p = Partition::from_edges({0.0, 0.5, 1.0});
    CHECK(p.num_bins() == 2);
    CHECK(p.locate(scalar_point(0.0)) == 0);
    CHECK(p.locate(scalar_point(0.4999)) == 0);
    CHECK(p.locate(scalar_point(0.5)) == 1);
    CHECK(p.locate(scalar_point(1.0)) == 1);
    CHECK(p.contains(0, scalar_point(0.5)) == false);

    CHECK_THROWS_AS(Partition::from_edges({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Partition::from_edges({0.0, 0.5, 0.4, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Partition::from_edges({0.0}), std::invalid_argument);
}

TEST_CASE("partition from boxes validates cover and disjointness") {
    Vec lo0 = Vec::Zero(2), hi0(2), lo1(2), hi1 = Vec::Ones(2);
    hi0 << 1.0, 0.5;
    lo1 << 0.0, 0.5;
    Partition p = Partition::from_boxes(2, {{lo0, hi0}, {lo1, hi1}});
    Vec q(2);
    q << 0.3, 0.5;
    CHECK(p.locate(q) == 1);
    q << 0.3, 0.49;
    CHECK(p.locate(q) == 0);

    Vec overlap_hi(2);
    overlap_hi << 1.0, 0.6;
    CHECK_THROWS_AS(Partition::from_boxes(2, {{lo0, overlap_hi}, {lo1, hi1}}), std::invalid_argument);
    CHECK_THROWS_AS(Partition::from_boxes(2, {{lo0, hi0}}), std::invalid_argument);
}

TEST_CASE("test evaluation by kind") {
    LinearUtility u = bike_utility();
    TestClass H(1);
    std::size_t pid = H.add_partition(Partition::from_edges({0.0, 0.5, 1.0}));
    std::size_t uid = H.add_utility(u);
    H.add_test({TestKind::CoordinateLinear, 0, 0, 0, 0, 0});
    H.add_test({TestKind::BinIndicator, 0, pid, 0, 0, 0});
    H.add_test({TestKind::DecisionIndicator, 0, 0, 0, uid, 1});
    H.add_test({TestKind::Constant, 0, 0, 0, 0, 0});

    CHECK(evaluate_test(H, 0, scalar_point(0.7)) == doctest::Approx(0.7));
    CHECK(evaluate_test(H, 1, scalar_point(0.5)) == 0.0);
    CHECK(evaluate_test(H, 1, scalar_point(0.49)) == 1.0);
    CHECK(evaluate_test(H, 2, scalar_point(0.2)) == 1.0);
    CHECK(evaluate_test(H, 2, scalar_point(0.9)) == 0.0);
    CHECK(evaluate_test(H, 3, scalar_point(0.123)) == 1.0);
}

TEST_CASE("dangling test references are rejected") {
    TestClass H(1);
    CHECK_THROWS_AS(H.add_test({TestKind::BinIndicator, 0, 0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(H.add_test({TestKind::DecisionIndicator, 0, 0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(H.add_test({TestKind::CoordinateLinear, 2, 0, 0, 0, 0}), std::invalid_argument);
    std::size_t uid = H.add_utility(bike_utility());
    CHECK_THROWS_AS(H.add_test({TestKind::DecisionIndicator, 0, 0, 0, uid, 7}), std::invalid_argument);
}

TEST_CASE("moments of the identity test") {
    TestClass H = build_coordinate_class(1);
    EmpiricalSample S = two_point_sample();
    Mat m = compute_moments(H, S);
    REQUIRE(m.rows() == 1);
    CHECK(m(0, 0) == doctest::Approx(-0.06).epsilon(1e-12));

    Mat identity = S.forecasts();
    Mat zero = compute_moments(H, S, identity);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    TestClass empty(1);
    CHECK(compute_moments(empty, S).rows() == 0);
}

TEST_CASE("audit pass and fail thresholds") {
    TestClass H = build_coordinate_class(1);
    EmpiricalSample S = two_point_sample();
    CalibrationAudit a1 = audit(H, S, 0.1);
    CHECK(a1.pass);
    CHECK(a1.max_norm == doctest::Approx(0.06).epsilon(1e-12));
    CalibrationAudit a2 = audit(H, S, 0.01);
    CHECK_FALSE(a2.pass);
    CHECK_THROWS_AS(audit(H, S, std::numeric_limits<double>::infinity()), std::invalid_argument);
    CHECK_THROWS_AS(audit(H, S, -0.1), std::invalid_argument);
}

TEST_CASE("class builders") {
    LinearUtility u = bike_utility();
    TestClass dec = build_decision_class(u);
    CHECK(dec.size() == 3);

    LinearUtility single(1, {{"only", scalar_point(0.5), 0.0}});
    TestClass one = build_decision_class(single);
    CHECK(one.size() == 1);
    CHECK(evaluate_test(one, 0, scalar_point(0.9)) == 1.0);

    CHECK(build_bin_class(Partition::from_edges({0.0, 0.5, 1.0})).size() == 2);
    CHECK(build_bin_class(Partition::from_edges({0.0, 1.0})).size() == 1);
    CHECK(build_bin_class(Partition::uniform(10)).size() == 10);
}

TEST_CASE("union concatenates preserving order") {
    LinearUtility u = bike_utility();
    TestClass dec = build_decision_class(u);
    TestClass bins = build_bin_class(Partition::uniform(4));
    TestClass both = union_classes({bins, dec});
    CHECK(both.size() == 7);
    // first the bins, then the decision indicators
    CHECK(both.test(0).kind == TestKind::BinIndicator);
    CHECK(both.test(4).kind == TestKind::DecisionIndicator);
    Vec v = scalar_point(0.2);
    CHECK(evaluate_test(both, 0, v) == evaluate_test(bins, 0, v));
    CHECK(evaluate_test(both, 5, v) == evaluate_test(dec, 1, v));

    TestClass other(2);
    CHECK_THROWS_AS(union_classes({dec, other}), std::invalid_argument);

    TestClass empty1(1), empty2(1);
    CHECK(union_classes({empty1, empty2}).size() == 0);
}

TEST_CASE("region statistics") {
    LinearUtility u = bike_utility();
    Mat v(3, 1), y(3, 1);
    v << 0.1, 0.2, 0.9;
    y << 0.1, 0.2, 0.9;
    EmpiricalSample S = EmpiricalSample::equal_weights(v, y);
    RegionStats rs = region_stats(u, S);
    for (int a = 0; a < 3; ++a) {
        CHECK(rs.prob[a] == doctest::Approx(1.0 / 3.0));
        CHECK(rs.present[static_cast<std::size_t>(a)] == 1);
    }
    CHECK(rs.mean(0, 0) == doctest::Approx(0.1));
    CHECK(rs.mean(1, 0) == doctest::Approx(0.2));
    CHECK(rs.mean(2, 0) == doctest::Approx(0.9));

    Mat v1(1, 1), y1(1, 1);
    v1 << 0.9;
    y1 << 0.9;
    RegionStats one = region_stats(u, EmpiricalSample::equal_weights(v1, y1));
    CHECK(one.prob[2] == doctest::Approx(1.0));
    CHECK(one.present[0] == 0);
    CHECK(one.present[2] == 1);
}

TEST_CASE("sample validation") {
    Mat v(2, 1), y(2, 1);
    v << 0.2, 0.8;
    y << 0.4, 0.6;
    Vec bad_w(2);
    bad_w << 0.7, 0.7;
    CHECK_THROWS_AS(EmpiricalSample(v, y, bad_w), std::invalid_argument);
    bad_w << -0.5, 1.5;
    CHECK_THROWS_AS(EmpiricalSample(v, y, bad_w), std::invalid_argument);
    Mat off(2, 1);
    off << 0.2, 1.4;
    CHECK_THROWS_AS(EmpiricalSample::equal_weights(off, y), std::invalid_argument);
    Mat narrow(2, 2);
    narrow.setConstant(0.5);
    CHECK_THROWS_AS(EmpiricalSample::equal_weights(v, narrow), std::invalid_argument);
}

TEST_CASE("indicator families sum to one everywhere") {
    std::mt19937_64 rng(23);
    LinearUtility u = bike_utility();
    TestClass dec = build_decision_class(u);
    TestClass bins = build_bin_class(Partition::uniform(7));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
        Vec v = scalar_point(unit(rng));
        double sd = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < dec.size(); ++i) sd += evaluate_test(dec, i, v);
        for (std::size_t i = 0; i < bins.size(); ++i) sb += evaluate_test(bins, i, v);
        CHECK(sd == 1.0);
        CHECK(sb == 1.0);
    }
}

TEST_CASE("moments are linear in beliefs") {
    std::mt19937_64 rng(29);
    EmpiricalSample S = random_sample(rng, 40, 1);
    TestClass H = union_classes({build_coordinate_class(1), build_bin_class(Partition::uniform(3))});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mat b1(40, 1), b2(40, 1);
    for (int i = 0; i < 40; ++i) {
        b1(i, 0) = unit(rng);
        b2(i, 0) = unit(rng);
    }
    double t = 0.37;
    Mat mixed = compute_moments(H, S, Mat(t * b1 + (1.0 - t) * b2));
    Mat direct = t * compute_moments(H, S, b1) + (1.0 - t) * compute_moments(H, S, b2);
    CHECK((mixed - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("region means stay in their region") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        EmpiricalSample S = random_sample(rng, 60, 1);
        LinearUtility u = bike_utility();
        RegionStats rs = region_stats(u, S);
        for (std::size_t a = 0; a < u.num_actions(); ++a) {
            if (!rs.present[a]) continue;
            CHECK(best_response(u, rs.mean.row(static_cast<Eigen::Index>(a))) == a);
        }
    }
}

}  // TEST_SUITE
