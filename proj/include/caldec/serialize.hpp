#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "caldec/calibration.hpp"
#include "caldec/dual.hpp"
#include "caldec/policy.hpp"

namespace caldec {

using Json = nlohmann::json;

// Shortest round-trip decimal form; identical input bits give identical text.
std::string format_double(double x);

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);
Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

Json utility_to_json(const LinearUtility& u);
LinearUtility utility_from_json(const Json& j);

Json partition_to_json(const Partition& p);
Partition partition_from_json(const Json& j);

Json test_class_to_json(const TestClass& tests);
TestClass test_class_from_json(const Json& j);

Json audit_to_json(const CalibrationAudit& a);
Json dual_to_json(const DualSolution& d);
DualSolution dual_from_json(const Json& j);

// Everything needed to re-instantiate the policy and evaluate it on new
// forecasts: mode, utility, test class, multipliers or bin beliefs, eps.
Json policy_to_json(const RobustPolicy& policy);
RobustPolicy policy_from_json(const Json& j);

std::string dual_trace_csv(const std::vector<DualTraceRow>& trace);
std::string belief_csv(const Mat& forecasts, const Mat& beliefs,
                       const std::vector<ActionId>& actions);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace caldec
