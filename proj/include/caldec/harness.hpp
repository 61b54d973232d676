#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caldec/adversary.hpp"
#include "caldec/calibration.hpp"
#include "caldec/dual.hpp"
#include "caldec/forecaster.hpp"
#include "caldec/policy.hpp"
#include "caldec/serialize.hpp"

namespace caldec {

struct DatasetSpec {
    std::string path;
    std::string target;
    std::vector<std::string> features;  // empty selects every non-target column
    bool rescale = true;
};

struct RawTable {
    std::string name;
    std::vector<std::string> feature_names;
    std::string target_name;
    Mat features;
    Vec target;
    std::vector<long> rejected_rows;  // file line numbers of dropped rows
};

RawTable load_csv(const DatasetSpec& spec);
RawTable parse_csv(const std::string& text, const DatasetSpec& spec, const std::string& name);

struct SplitTables {
    RawTable train;
    RawTable calibration;
    RawTable test;
};

// Seeded shuffle, then a contiguous cut; every part is non-empty and within
// one row of its exact proportion.
SplitTables split(const RawTable& table, const std::array<double, 3>& fractions,
                  std::uint64_t seed);

struct ClassSelector {
    enum class Kind { SelfOrthogonality, Bins, Decision, ZeroBias, Union };
    Kind kind = Kind::SelfOrthogonality;
    std::size_t bins = 8;                // Kind::Bins
    std::vector<ClassSelector> parts;    // Kind::Union

    static ClassSelector from_json(const Json& j);
    Json to_json() const;
};

TestClass build_selected_class(const ClassSelector& sel, const LinearUtility& u,
                               Eigen::Index dimension);

struct UtilitySpec {
    double alpha = 1.0;
    std::vector<double> multipliers;
    std::vector<double> costs;

    LinearUtility build() const { return LinearUtility::scaled(alpha, multipliers, costs); }
};

struct ExperimentConfig {
    DatasetSpec dataset;
    UtilitySpec utility;
    ClassSelector test_class;
    std::optional<double> eps;  // empty: the audited max moment norm
    std::array<double, 3> split{0.6, 0.2, 0.2};
    std::uint64_t seed = 0;
    std::size_t width = 32;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

// Clipped forecasts paired with rescaled, clipped outcomes, equally weighted.
EmpiricalSample forecast_sample(const Forecaster& f, const RawTable& table);

// Everything the experiment needs before scoring: the trained forecast
// samples, the audit at the resolved eps, and the selected robust policy.
struct ExperimentParts {
    LinearUtility utility;
    TestClass tests;
    EmpiricalSample calibration;
    EmpiricalSample test;
    CalibrationAudit audit;
    double eps = 0.0;
    RobustPolicy robust;
    std::string mode;  // collapse | bin | dual
    DualSolution dual;
    std::vector<DualTraceRow> trace;
    long rows_train = 0;
};

ExperimentParts prepare_experiment(const ExperimentConfig& cfg, const RawTable& table);

struct RegimeCells {
    double plugin = 0.0;
    double robust = 0.0;
};

struct Report {
    std::string dataset;
    RegimeCells iid;          // test outcomes as given
    RegimeCells adv_plugin;   // worst case targeted at the plug-in policy
    RegimeCells adv_robust;   // worst case targeted at the robust policy
    CalibrationAudit audit;   // calibration split at the eps actually used
    double eps = 0.0;
    std::string policy_mode;  // collapse | bin | dual
    DualSolution dual;        // zeroed unless the dual path ran
    std::vector<DualTraceRow> trace;
    long rows_train = 0;
    long rows_calibration = 0;
    long rows_test = 0;
    Json config;

    Vec test_forecasts;
    Mat beliefs_plugin;
    Mat beliefs_robust;
    std::vector<ActionId> actions_plugin;
    std::vector<ActionId> actions_robust;
};

Report run_experiment(const ExperimentConfig& cfg);
Report run_experiment_on(const ExperimentConfig& cfg, const RawTable& table);

Json report_to_json(const Report& r);
std::string report_table_csv(const Report& r);

// report.json and table.csv, plus dual_trace.csv and per-adversary belief
// CSVs when with_traces is set.  Identical inputs produce identical bytes.
void emit_report(const Report& r, const std::string& out_dir, bool with_traces = true);

RawTable synth_bike(std::uint64_t seed, std::size_t rows = 731);
RawTable synth_housing(std::uint64_t seed, std::size_t rows = 1200);
std::string table_to_csv(const RawTable& table);
void write_csv(const RawTable& table, const std::string& path);

}  // namespace caldec
