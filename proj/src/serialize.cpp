#include "caldec/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace caldec {

namespace {

const char* kind_name(TestKind k) {
    switch (k) {
        case TestKind::CoordinateLinear: return "coordinate_linear";
        case TestKind::BinIndicator: return "bin_indicator";
        case TestKind::DecisionIndicator: return "decision_indicator";
        case TestKind::Constant: return "constant";
    }
    throw std::invalid_argument("unknown test kind");
}

TestKind kind_from_name(const std::string& s) {
    if (s == "coordinate_linear") return TestKind::CoordinateLinear;
    if (s == "bin_indicator") return TestKind::BinIndicator;
    if (s == "decision_indicator") return TestKind::DecisionIndicator;
    if (s == "constant") return TestKind::Constant;
    throw DataError("unknown test kind: " + s);
}

const char* mode_name(PolicyMode m) {
    switch (m) {
        case PolicyMode::Dual: return "dual";
        case PolicyMode::BinClosedForm: return "bin";
        case PolicyMode::CollapsePlugin: return "collapse";
    }
    throw std::invalid_argument("unknown policy mode");
}

PolicyMode mode_from_name(const std::string& s) {
    if (s == "dual") return PolicyMode::Dual;
    if (s == "bin") return PolicyMode::BinClosedForm;
    if (s == "collapse") return PolicyMode::CollapsePlugin;
    throw DataError("unknown policy mode: " + s);
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

Json vec_to_json(const Vec& v) {
    Json j = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Vec vec_from_json(const Json& j) {
    if (!j.is_array()) throw DataError("expected a numeric array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

Json mat_to_json(const Mat& m) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(vec_to_json(m.row(r).transpose()));
    return j;
}

Mat mat_from_json(const Json& j) {
    if (!j.is_array()) throw DataError("expected an array of rows");
    if (j.empty()) return Mat(0, 0);
    Vec first = vec_from_json(j.at(0));
    Mat m(static_cast<Eigen::Index>(j.size()), first.size());
    m.row(0) = first.transpose();
    for (Eigen::Index r = 1; r < m.rows(); ++r) {
        Vec row = vec_from_json(j.at(static_cast<std::size_t>(r)));
        if (row.size() != m.cols()) throw DataError("ragged matrix rows");
        m.row(r) = row.transpose();
    }
    return m;
}

Json utility_to_json(const LinearUtility& u) {
    Json acts = Json::array();
    for (const auto& a : u.actions())
        acts.push_back({{"label", a.label}, {"payoff", vec_to_json(a.payoff)}, {"offset", a.offset}});
    return {{"dimension", u.dimension()}, {"actions", acts}};
}

LinearUtility utility_from_json(const Json& j) {
    std::vector<Action> actions;
    for (const auto& a : j.at("actions"))
        actions.push_back(Action{a.at("label").get<std::string>(), vec_from_json(a.at("payoff")),
                                 a.at("offset").get<double>()});
    return LinearUtility(j.at("dimension").get<Eigen::Index>(), std::move(actions));
}

Json partition_to_json(const Partition& p) {
    if (p.has_edges()) return {{"edges", p.edges()}};
    Json boxes = Json::array();
    for (const auto& b : p.boxes())
        boxes.push_back({{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}});
    return {{"dimension", p.dimension()}, {"boxes", boxes}};
}

Partition partition_from_json(const Json& j) {
    if (j.contains("edges")) return Partition::from_edges(j.at("edges").get<std::vector<double>>());
    std::vector<BinBox> boxes;
    for (const auto& b : j.at("boxes"))
        boxes.push_back(BinBox{vec_from_json(b.at("lo")), vec_from_json(b.at("hi"))});
    return Partition::from_boxes(j.at("dimension").get<Eigen::Index>(), std::move(boxes));
}

Json test_class_to_json(const TestClass& tests) {
    Json parts = Json::array();
    for (std::size_t i = 0; i < tests.num_partitions(); ++i)
        parts.push_back(partition_to_json(tests.partition(i)));
    Json utils = Json::array();
    for (std::size_t i = 0; i < tests.num_utilities(); ++i)
        utils.push_back(utility_to_json(tests.utility_ref(i)));
    Json rows = Json::array();
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const TestFunction& h = tests.test(i);
        Json row{{"kind", kind_name(h.kind)}};
        switch (h.kind) {
            case TestKind::CoordinateLinear: row["coord"] = h.coord; break;
            case TestKind::BinIndicator:
                row["partition"] = h.partition;
                row["bin"] = h.bin;
                break;
            case TestKind::DecisionIndicator:
                row["utility"] = h.utility;
                row["action"] = h.action;
                break;
            case TestKind::Constant: break;
        }
        rows.push_back(std::move(row));
    }
    return {{"dimension", tests.dimension()},
            {"partitions", parts},
            {"utilities", utils},
            {"tests", rows}};
}

TestClass test_class_from_json(const Json& j) {
    TestClass tests(j.at("dimension").get<Eigen::Index>());
    for (const auto& p : j.at("partitions")) tests.add_partition(partition_from_json(p));
    for (const auto& u : j.at("utilities")) tests.add_utility(utility_from_json(u));
    for (const auto& row : j.at("tests")) {
        TestFunction h;
        h.kind = kind_from_name(row.at("kind").get<std::string>());
        switch (h.kind) {
            case TestKind::CoordinateLinear: h.coord = row.at("coord").get<Eigen::Index>(); break;
            case TestKind::BinIndicator:
                h.partition = row.at("partition").get<std::size_t>();
                h.bin = row.at("bin").get<std::size_t>();
                break;
            case TestKind::DecisionIndicator:
                h.utility = row.at("utility").get<std::size_t>();
                h.action = row.at("action").get<ActionId>();
                break;
            case TestKind::Constant: break;
        }
        tests.add_test(h);
    }
    return tests;
}

Json audit_to_json(const CalibrationAudit& a) {
    return {{"moments", mat_to_json(a.moments)},
            {"norms", vec_to_json(a.norms)},
            {"max_norm", a.max_norm},
            {"eps", a.eps},
            {"pass", a.pass}};
}

Json dual_to_json(const DualSolution& d) {
    return {{"lambda", mat_to_json(d.lambda)},
            {"eps", d.eps},
            {"value", d.value},
            {"iterations", d.iterations},
            {"grad_norm", d.grad_norm},
            {"converged", d.converged}};
}

DualSolution dual_from_json(const Json& j) {
    DualSolution d;
    d.lambda = mat_from_json(j.at("lambda"));
    d.eps = j.at("eps").get<double>();
    d.value = j.at("value").get<double>();
    d.iterations = j.at("iterations").get<long>();
    d.grad_norm = j.at("grad_norm").get<double>();
    d.converged = j.at("converged").get<bool>();
    return d;
}

Json policy_to_json(const RobustPolicy& policy) {
    Json j{{"mode", mode_name(policy.mode)},
           {"utility", utility_to_json(policy.utility)},
           {"tests", test_class_to_json(policy.tests)},
           {"eps", policy.eps}};
    if (policy.mode == PolicyMode::Dual) j["dual"] = dual_to_json(policy.dual);
    if (policy.bins) {
        j["bins"] = partition_to_json(*policy.bins);
        j["bin_beliefs"] = mat_to_json(policy.bin_beliefs);
        Json fb = Json::array();
        for (char f : policy.bin_fallback) fb.push_back(f != 0);
        j["bin_fallback"] = std::move(fb);
    }
    return j;
}

RobustPolicy policy_from_json(const Json& j) {
    RobustPolicy policy{.mode = mode_from_name(j.at("mode").get<std::string>()),
                        .utility = utility_from_json(j.at("utility")),
                        .tests = test_class_from_json(j.at("tests")),
                        .dual = {},
                        .bins = std::nullopt,
                        .bin_beliefs = Mat(),
                        .bin_fallback = {},
                        .eps = j.at("eps").get<double>()};
    if (j.contains("dual")) policy.dual = dual_from_json(j.at("dual"));
    if (j.contains("bins")) {
        policy.bins = partition_from_json(j.at("bins"));
        policy.bin_beliefs = mat_from_json(j.at("bin_beliefs"));
        for (const auto& f : j.at("bin_fallback"))
            policy.bin_fallback.push_back(f.get<bool>() ? 1 : 0);
    }
    if (policy.mode == PolicyMode::BinClosedForm && !policy.bins)
        throw DataError("bin policy is missing its partition");
    return policy;
}

std::string dual_trace_csv(const std::vector<DualTraceRow>& trace) {
    std::string out = "iteration,dual_value,subgradient_norm\n";
    for (const auto& row : trace) {
        out += std::to_string(row.iteration);
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.grad_norm);
        out += '\n';
    }
    return out;
}

std::string belief_csv(const Mat& forecasts, const Mat& beliefs,
                       const std::vector<ActionId>& actions) {
    if (forecasts.rows() != beliefs.rows() ||
        forecasts.rows() != static_cast<Eigen::Index>(actions.size()) ||
        forecasts.cols() != beliefs.cols())
        throw std::invalid_argument("belief_csv: shape mismatch");
    const Eigen::Index d = forecasts.cols();
    std::string out = "index";
    if (d == 1) {
        out += ",v,q";
    } else {
        for (Eigen::Index c = 0; c < d; ++c) out += ",v_" + std::to_string(c);
        for (Eigen::Index c = 0; c < d; ++c) out += ",q_" + std::to_string(c);
    }
    out += ",action\n";
    for (Eigen::Index r = 0; r < forecasts.rows(); ++r) {
        out += std::to_string(r);
        for (Eigen::Index c = 0; c < d; ++c) out += ',' + format_double(forecasts(r, c));
        for (Eigen::Index c = 0; c < d; ++c) out += ',' + format_double(beliefs(r, c));
        out += ',' + std::to_string(actions[static_cast<std::size_t>(r)]);
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("short write: " + path);
}

Json read_json_file(const std::string& path) {
    try {
        return Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw DataError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace caldec
