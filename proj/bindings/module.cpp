#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "caldec/adversary.hpp"
#include "caldec/calibration.hpp"
#include "caldec/common.hpp"
#include "caldec/dual.hpp"
#include "caldec/forecaster.hpp"
#include "caldec/harness.hpp"
#include "caldec/policy.hpp"
#include "caldec/serialize.hpp"
#include "caldec/utility.hpp"

namespace py = pybind11;
using namespace caldec;

namespace {

const char* status_name(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

const char* mode_label(PolicyMode m) {
    switch (m) {
        case PolicyMode::Dual: return "dual";
        case PolicyMode::BinClosedForm: return "bin";
        case PolicyMode::CollapsePlugin: return "collapse";
    }
    return "unknown";
}

EmpiricalSample make_sample(Mat forecasts, Mat outcomes, std::optional<Vec> weights) {
    if (weights) {
        return EmpiricalSample(std::move(forecasts), std::move(outcomes), std::move(*weights));
    }
    return EmpiricalSample::equal_weights(std::move(forecasts), std::move(outcomes));
}

Mat checked_features(const Forecaster& f, const Mat& features) {
    if (features.cols() != f.num_features()) {
        throw DataError("predict: feature matrix has " + std::to_string(features.cols()) +
                        " columns, forecaster expects " + std::to_string(f.num_features()));
    }
    return features;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Robust decision policies from partially calibrated forecasts: calibration "
        "audits, dual solvers, closed-form and LP policies, worst-case adversaries, "
        "and the experiment harness.";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DataError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const NumericError& e) {
            PyErr_SetString(PyExc_ArithmeticError, e.what());
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<LinearUtility>(m, "LinearUtility",
                              "Utility linear in the outcome: u(a, p) = r_a . p + c_a.")
        .def(py::init([](Eigen::Index dimension,
                         const std::vector<std::tuple<std::string, Vec, double>>& actions) {
                 std::vector<Action> acts;
                 acts.reserve(actions.size());
                 for (const auto& [label, payoff, offset] : actions) {
                     acts.push_back({label, payoff, offset});
                 }
                 return LinearUtility(dimension, std::move(acts));
             }),
             py::arg("dimension"), py::arg("actions"),
             "Actions as (label, payoff, offset) triples.")
        .def_static("scaled", &LinearUtility::scaled, py::arg("alpha"), py::arg("multipliers"),
                    py::arg("costs"),
                    "u(a, y) = alpha * a * y - C(a), one multiplier per action (d = 1).")
        .def_property_readonly("dimension", &LinearUtility::dimension)
        .def_property_readonly("num_actions", &LinearUtility::num_actions)
        .def_property_readonly("lipschitz", &LinearUtility::lipschitz)
        .def("label", [](const LinearUtility& u, ActionId a) { return u.action(a).label; },
             py::arg("action"))
        .def("payoff", [](const LinearUtility& u, ActionId a) -> Vec { return u.action(a).payoff; },
             py::arg("action"))
        .def("offset", [](const LinearUtility& u, ActionId a) { return u.action(a).offset; },
             py::arg("action"));

    py::class_<Partition>(m, "Partition", "Disjoint cover of the forecast box by axis bins.")
        .def_static("uniform", &Partition::uniform, py::arg("bins"))
        .def_static("from_edges", &Partition::from_edges, py::arg("edges"))
        .def_property_readonly("dimension", &Partition::dimension)
        .def_property_readonly("num_bins", &Partition::num_bins)
        .def_property_readonly("edges",
                               [](const Partition& p) -> std::vector<double> {
                                   return p.has_edges() ? p.edges() : std::vector<double>{};
                               })
        .def("locate", &Partition::locate, py::arg("v"));

    py::class_<TestClass>(m, "TestClass",
                          "Ordered family of calibration tests over the forecast box.")
        .def_property_readonly("dimension", &TestClass::dimension)
        .def_property_readonly("size", &TestClass::size)
        .def("evaluate", &TestClass::evaluate, py::arg("i"), py::arg("v"))
        .def("__len__", &TestClass::size);

    py::class_<EmpiricalSample>(m, "Sample",
                                "Weighted forecast/outcome pairs standing in for (f(X), Y).")
        .def(py::init(&make_sample), py::arg("forecasts"), py::arg("outcomes"),
             py::arg("weights") = py::none(),
             "Rows are records; omitted weights default to uniform.")
        .def_property_readonly("forecasts",
                               [](const EmpiricalSample& s) -> Mat { return s.forecasts(); })
        .def_property_readonly("outcomes",
                               [](const EmpiricalSample& s) -> Mat { return s.outcomes(); })
        .def_property_readonly("weights",
                               [](const EmpiricalSample& s) -> Vec { return s.weights(); })
        .def_property_readonly("dimension", &EmpiricalSample::dimension)
        .def("__len__", &EmpiricalSample::size);

    py::class_<CalibrationAudit>(m, "Audit", "Moment table of a sample under a test class.")
        .def_readonly("moments", &CalibrationAudit::moments)
        .def_readonly("norms", &CalibrationAudit::norms)
        .def_readonly("max_norm", &CalibrationAudit::max_norm)
        .def_readonly("eps", &CalibrationAudit::eps)
        .def_readonly("ok", &CalibrationAudit::pass);

    py::class_<DualSolution>(m, "DualSolution", "Multipliers and value of the penalized dual.")
        .def_readonly("lam", &DualSolution::lambda)
        .def_readonly("eps", &DualSolution::eps)
        .def_readonly("value", &DualSolution::value)
        .def_readonly("iterations", &DualSolution::iterations)
        .def_readonly("grad_norm", &DualSolution::grad_norm)
        .def_readonly("converged", &DualSolution::converged);

    py::class_<AdversaryResult>(m, "AdversaryResult",
                                "Worst-case belief map with its value and solver status.")
        .def_property_readonly("points",
                               [](const AdversaryResult& r) -> Mat { return r.beliefs.points; })
        .def_property_readonly("residuals",
                               [](const AdversaryResult& r) -> Mat { return r.beliefs.residuals; })
        .def_readonly("value", &AdversaryResult::value)
        .def_property_readonly("status",
                               [](const AdversaryResult& r) { return status_name(r.status); });

    py::class_<RobustPolicy>(m, "Policy", "Decision rule over the forecast box.")
        .def_property_readonly("mode",
                               [](const RobustPolicy& p) { return mode_label(p.mode); })
        .def_property_readonly("eps", [](const RobustPolicy& p) { return p.eps; })
        .def("action", [](const RobustPolicy& p, const Vec& v) { return robust_action(p, v); },
             py::arg("v"), "Action taken at forecast v.")
        .def("belief", [](const RobustPolicy& p, const Vec& v) { return worst_case_belief(p, v); },
             py::arg("v"), "Belief the action best-responds to at forecast v.")
        .def("to_json", [](const RobustPolicy& p) { return policy_to_json(p).dump(2); });

    py::class_<CollapseCheck>(m, "CollapseCheck",
                              "Whether a class pins the robust policy to the plug-in.")
        .def_readonly("is_collapsed", &CollapseCheck::is_collapsed)
        .def_property_readonly("structural",
                               [](const CollapseCheck& c) { return c.certificate.structural; })
        .def_property_readonly("missing",
                               [](const CollapseCheck& c) { return c.certificate.missing; })
        .def_property_readonly("audit",
                               [](const CollapseCheck& c) { return c.certificate.audit; });

    py::class_<Forecaster>(m, "Forecaster",
                           "Random-feature regressor with an exactly solved head.")
        .def_property_readonly("width", &Forecaster::width)
        .def_property_readonly("num_features", &Forecaster::num_features)
        .def_property_readonly("target_lo", &Forecaster::target_lo)
        .def_property_readonly("target_hi", &Forecaster::target_hi)
        .def("predict",
             [](const Forecaster& f, const Mat& features) -> Vec {
                 return f.predict(checked_features(f, features));
             },
             py::arg("features"), "Clipped forecasts, one per row.")
        .def("predict_raw",
             [](const Forecaster& f, const Mat& features) -> Vec {
                 return f.predict_raw(checked_features(f, features));
             },
             py::arg("features"), "Unclipped head output, one per row.")
        .def("rescale_target", &Forecaster::rescale_target, py::arg("y"));

    m.def("val",
          [](const LinearUtility& u, const Vec& p) { return val(u, p); },
          py::arg("u"), py::arg("p"), "(max_a u(a, p), achieving action); ties to lowest index.");
    m.def("utility",
          [](const LinearUtility& u, ActionId a, const Vec& p) { return utility(u, a, p); },
          py::arg("u"), py::arg("action"), py::arg("p"));
    m.def("best_response", &best_response, py::arg("u"), py::arg("v"));
    m.def("minimax_safety_action", &minimax_safety_action, py::arg("u"));
    m.def("breakpoints_1d", &breakpoints_1d, py::arg("u"),
          "Sorted candidate kink points of val on [0, 1].");

    m.def("build_decision_class", &build_decision_class, py::arg("u"),
          "Indicator tests of the best-response regions of u.");
    m.def("build_bin_class", &build_bin_class, py::arg("partition"),
          "Indicator tests of the partition bins.");
    m.def("build_coordinate_class", &build_coordinate_class, py::arg("dimension"),
          "Identity tests h(v) = v, one per coordinate.");
    m.def("union_classes", &union_classes, py::arg("classes"));

    m.def("compute_moments",
          [](const TestClass& H, const EmpiricalSample& S, std::optional<Mat> beliefs) {
              return compute_moments(H, S, beliefs);
          },
          py::arg("tests"), py::arg("sample"), py::arg("beliefs") = py::none(),
          "m_i = sum_j w_j h_i(v_j) (b_j - v_j); beliefs default to the outcomes.");
    m.def("audit", &audit, py::arg("tests"), py::arg("sample"), py::arg("eps"),
          "Moment table with per-test norms checked against eps.");
    m.def("region_stats",
          [](const LinearUtility& u, const EmpiricalSample& S) {
              RegionStats st = region_stats(u, S);
              std::vector<bool> present(st.present.begin(), st.present.end());
              return py::make_tuple(st.prob, st.mean, present);
          },
          py::arg("u"), py::arg("sample"),
          "(region probabilities, conditional outcome means, occupancy flags).");

    m.def("tilt",
          [](const TestClass& H, const Mat& lam, const Vec& v) { return tilt(H, lam, v); },
          py::arg("tests"), py::arg("lam"), py::arg("v"), "s(v) = sum_i h_i(v) lambda_i.");
    m.def("inner_minimize",
          [](const LinearUtility& u, const Vec& s) {
              InnerSolution sol = inner_minimize(u, s);
              return py::make_tuple(sol.p, sol.objective, sol.action);
          },
          py::arg("u"), py::arg("s"),
          "argmin over the box of val(p) + s . p as (p, objective, action).");
    m.def("dual_objective", &dual_objective, py::arg("u"), py::arg("tests"), py::arg("sample"),
          py::arg("lam"), py::arg("eps"));
    m.def("dual_subgradient", &dual_subgradient, py::arg("u"), py::arg("tests"),
          py::arg("sample"), py::arg("lam"), py::arg("eps"));
    m.def("solve_dual",
          [](const LinearUtility& u, const TestClass& H, const EmpiricalSample& S, double eps,
             long max_iters, double step0, double tol) {
              DualOptions opts;
              opts.max_iters = max_iters;
              opts.step0 = step0;
              opts.tol = tol;
              return solve_dual(u, H, S, eps, opts);
          },
          py::arg("u"), py::arg("tests"), py::arg("sample"), py::arg("eps"),
          py::arg("max_iters") = 5000, py::arg("step0") = 1.0, py::arg("tol") = 1e-6,
          "Maximize the eps-penalized dual over the multipliers.");

    m.def("dual_policy", &dual_policy, py::arg("u"), py::arg("tests"), py::arg("dual"),
          "Best response to the tilted inner minimizer.");
    m.def("bin_policy", &bin_policy, py::arg("u"), py::arg("bins"), py::arg("sample"),
          "Best response to the per-bin forecast means.");
    m.def("eps_bin_policy", &eps_bin_policy, py::arg("u"), py::arg("bins"), py::arg("sample"),
          py::arg("eps"), "Per-bin worst-case belief within the slack ball.");
    m.def("collapse_policy", &collapse_policy, py::arg("u"), py::arg("tests"),
          "Best response to the forecast itself.");
    m.def("collapse_check", &collapse_check, py::arg("u"), py::arg("tests"), py::arg("sample"),
          py::arg("eps"),
          "True when the class carries every decision indicator and the audit passes.");
    m.def("policy_from_json",
          [](const std::string& text) { return policy_from_json(Json::parse(text)); },
          py::arg("text"));

    m.def("worst_case_for_policy",
          [](const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
             const RobustPolicy& policy, double eps) {
              return worst_case_for_policy(u, H, S, as_policy_fn(policy), eps);
          },
          py::arg("u"), py::arg("tests"), py::arg("sample"), py::arg("policy"), py::arg("eps"),
          "Minimize the policy's expected utility over beliefs within the slack band.");
    m.def("worst_case_for_policy",
          [](const LinearUtility& u, const TestClass& H, const EmpiricalSample& S,
             const std::function<ActionId(const Vec&)>& policy, double eps) {
              return worst_case_for_policy(u, H, S, policy, eps);
          },
          py::arg("u"), py::arg("tests"), py::arg("sample"), py::arg("policy"), py::arg("eps"),
          "Same with a callable forecast -> action index.");
    m.def("robust_value_lp", &robust_value_lp, py::arg("u"), py::arg("tests"), py::arg("sample"),
          py::arg("eps"), "Minimize the best-attainable payoff over the same belief set.");
    m.def("saddle_gap", &saddle_gap, py::arg("u"), py::arg("tests"), py::arg("sample"),
          py::arg("eps"), py::arg("dual"), "robust_value_lp value minus the dual value.");
    m.def("recalibrate_sample", &recalibrate_sample, py::arg("tests"), py::arg("sample"),
          "Smallest uniform outcome shift that zeroes every test moment.");

    m.def("train_forecaster",
          [](const Mat& features, const Vec& target, std::size_t width, std::uint64_t seed,
             bool rescale_targets) {
              return train_forecaster(features, target, width, seed, rescale_targets);
          },
          py::arg("features"), py::arg("target"), py::arg("width"), py::arg("seed"),
          py::arg("rescale_targets") = true,
          "Fit the random-feature head so training moments vanish.");

    m.def("run_experiment",
          [](py::object config) {
              std::string text;
              if (py::isinstance<py::str>(config)) {
                  text = config.cast<std::string>();
              } else {
                  text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
              }
              ExperimentConfig cfg = config_from_json(Json::parse(text));
              Report r = run_experiment(cfg);
              return report_to_json(r).dump(2);
          },
          py::arg("config"),
          "Run the train/calibrate/score pipeline from a config dict or JSON string; "
          "returns the report as a JSON string.");
    m.def("synth_bike",
          [](std::uint64_t seed, std::size_t rows) { return table_to_csv(synth_bike(seed, rows)); },
          py::arg("seed"), py::arg("rows") = 731,
          "Synthetic demand dataset as CSV text.");
    m.def("synth_housing",
          [](std::uint64_t seed, std::size_t rows) {
              return table_to_csv(synth_housing(seed, rows));
          },
          py::arg("seed"), py::arg("rows") = 1200,
          "Synthetic price dataset as CSV text.");
}
