#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "caldec/harness.hpp"

namespace {

using namespace caldec;
namespace fs = std::filesystem;

struct CommonArgs {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> eps;
};

void attach_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* c = cmd->add_option("--config", args.config, "experiment config JSON");
    if (config_required) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--eps", args.eps, "override the config eps");
}

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = config_from_json(read_json_file(args.config));
    if (args.seed) cfg.seed = *args.seed;
    if (args.eps) cfg.eps = *args.eps;
    return cfg;
}

RawTable load_table(const ExperimentConfig& cfg) {
    RawTable table = load_csv(cfg.dataset);
    for (long row : table.rejected_rows)
        std::fprintf(stderr, "warning: %s line %ld rejected\n", cfg.dataset.path.c_str(), row);
    return table;
}

std::string join(const std::string& dir, const char* file) {
    return (fs::path(dir) / file).string();
}

int cmd_audit(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    ExperimentParts parts = prepare_experiment(cfg, load_table(cfg));
    fs::create_directories(args.out);
    write_json_file(join(args.out, "audit.json"), audit_to_json(parts.audit));
    std::printf("audit: tests=%zu max_norm=%s eps=%s pass=%s\n", parts.tests.size(),
                format_double(parts.audit.max_norm).c_str(), format_double(parts.eps).c_str(),
                parts.audit.pass ? "true" : "false");
    return 0;
}

int cmd_solve(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    ExperimentParts parts = prepare_experiment(cfg, load_table(cfg));
    fs::create_directories(args.out);
    write_json_file(join(args.out, "policy.json"), policy_to_json(parts.robust));
    write_json_file(join(args.out, "audit.json"), audit_to_json(parts.audit));
    if (!parts.trace.empty())
        write_text_file(join(args.out, "dual_trace.csv"), dual_trace_csv(parts.trace));
    std::printf("policy: mode=%s eps=%s", parts.mode.c_str(), format_double(parts.eps).c_str());
    if (parts.mode == "dual")
        std::printf(" dual_value=%s converged=%s", format_double(parts.dual.value).c_str(),
                    parts.dual.converged ? "true" : "false");
    std::printf("\n");
    return 0;
}

int cmd_adversary(const CommonArgs& args) {
    Json j = read_json_file(args.config);
    if (!j.contains("policy"))
        throw DataError("adversary config needs a 'policy' field pointing at a policy JSON");
    std::string policy_path = j.at("policy").get<std::string>();
    RobustPolicy policy = policy_from_json(read_json_file(policy_path));

    ExperimentConfig cfg = config_from_json(j);
    if (args.seed) cfg.seed = *args.seed;
    if (args.eps) cfg.eps = *args.eps;
    double eps = cfg.eps ? *cfg.eps : policy.eps;

    RawTable table = load_table(cfg);
    SplitTables st = split(table, cfg.split, cfg.seed);
    Forecaster f = train_forecaster(st.train.features, st.train.target, cfg.width, cfg.seed,
                                    cfg.dataset.rescale);
    EmpiricalSample test = forecast_sample(f, st.test);

    PolicyFn fn = as_policy_fn(policy);
    AdversaryResult adv = worst_case_for_policy(policy.utility, policy.tests, test, fn, eps);
    std::vector<ActionId> actions(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) actions[i] = robust_action(policy, test.forecast(i));

    fs::create_directories(args.out);
    write_text_file(join(args.out, "beliefs.csv"),
                    belief_csv(test.forecasts(), adv.beliefs.points, actions));
    std::printf("adversary: worst_case=%s eps=%s rows=%zu\n", format_double(adv.value).c_str(),
                format_double(eps).c_str(), test.size());
    return 0;
}

int cmd_experiment(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    Report report = run_experiment(cfg);
    emit_report(report, args.out);
    std::fputs(report_table_csv(report).c_str(), stdout);
    return 0;
}

int cmd_synth(const CommonArgs& args) {
    std::uint64_t seed = args.seed.value_or(0);
    fs::create_directories(args.out);
    RawTable bike = synth_bike(seed);
    RawTable housing = synth_housing(seed);
    std::string bike_path = join(args.out, "bike_synth.csv");
    std::string housing_path = join(args.out, "housing_synth.csv");
    write_csv(bike, bike_path);
    write_csv(housing, housing_path);
    std::printf("wrote %s (%ld rows)\n", bike_path.c_str(), static_cast<long>(bike.target.size()));
    std::printf("wrote %s (%ld rows)\n", housing_path.c_str(),
                static_cast<long>(housing.target.size()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust decision policies from partially calibrated forecasts"};
    app.require_subcommand(1);

    CommonArgs audit_args, solve_args, adversary_args, experiment_args, synth_args;
    auto* audit_cmd = app.add_subcommand("audit", "audit forecast calibration on a dataset");
    attach_common(audit_cmd, audit_args, true);
    auto* solve_cmd = app.add_subcommand("solve", "compute the robust policy for a dataset");
    attach_common(solve_cmd, solve_args, true);
    auto* adversary_cmd =
        app.add_subcommand("adversary", "worst-case belief map for a stored policy");
    attach_common(adversary_cmd, adversary_args, true);
    auto* experiment_cmd =
        app.add_subcommand("experiment", "run the full protocol and emit a report");
    attach_common(experiment_cmd, experiment_args, true);
    auto* synth_cmd = app.add_subcommand("synth", "write synthetic benchmark datasets");
    attach_common(synth_cmd, synth_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (audit_cmd->parsed()) return cmd_audit(audit_args);
        if (solve_cmd->parsed()) return cmd_solve(solve_args);
        if (adversary_cmd->parsed()) return cmd_adversary(adversary_args);
        if (experiment_cmd->parsed()) return cmd_experiment(experiment_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
        std::fputs("no subcommand selected\n", stderr);
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const Json::exception& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
