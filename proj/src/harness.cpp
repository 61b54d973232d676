#include "caldec/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <random>

namespace caldec {

namespace {

std::string path_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

bool parse_cell(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

RawTable subtable(const RawTable& t, const std::vector<Eigen::Index>& rows) {
    RawTable out;
    out.name = t.name;
    out.feature_names = t.feature_names;
    out.target_name = t.target_name;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), t.features.cols());
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index i = 0; i < out.target.size(); ++i) {
        out.features.row(i) = t.features.row(rows[static_cast<std::size_t>(i)]);
        out.target[i] = t.target[rows[static_cast<std::size_t>(i)]];
    }
    return out;
}

// True for a class that is exactly one partition's bin indicators, one per bin.
const Partition* pure_bin_class(const TestClass& tests) {
    if (tests.size() == 0 || tests.num_partitions() != 1) return nullptr;
    const Partition& p = tests.partition(0);
    if (tests.size() != p.num_bins()) return nullptr;
    std::vector<char> seen(p.num_bins(), 0);
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const TestFunction& h = tests.test(i);
        if (h.kind != TestKind::BinIndicator || h.partition != 0) return nullptr;
        if (h.bin >= p.num_bins() || seen[h.bin]) return nullptr;
        seen[h.bin] = 1;
    }
    return &p;
}

RobustPolicy plugin_policy(const LinearUtility& u) {
    return RobustPolicy{.mode = PolicyMode::CollapsePlugin,
                        .utility = u,
                        .tests = TestClass(u.dimension())};
}

double score_iid(const RobustPolicy& policy, const EmpiricalSample& S) {
    double total = 0.0;
    for (std::size_t j = 0; j < S.size(); ++j)
        total += S.weight(j) * utility(policy.utility, robust_action(policy, S.forecast(j)), S.outcome(j));
    return total;
}

double score_under(const RobustPolicy& policy, const EmpiricalSample& S, const Mat& beliefs) {
    double total = 0.0;
    for (std::size_t j = 0; j < S.size(); ++j)
        total += S.weight(j) *
                 utility(policy.utility, robust_action(policy, S.forecast(j)),
                         beliefs.row(static_cast<Eigen::Index>(j)).transpose());
    return total;
}

std::vector<ActionId> actions_on(const RobustPolicy& policy, const EmpiricalSample& S) {
    std::vector<ActionId> out(S.size());
    for (std::size_t j = 0; j < S.size(); ++j) out[j] = robust_action(policy, S.forecast(j));
    return out;
}

void check_fractions(const std::array<double, 3>& f) {
    double sum = f[0] + f[1] + f[2];
    if (f[0] < 0 || f[1] < 0 || f[2] < 0 || std::abs(sum - 1.0) > 1e-9)
        throw DataError("split fractions must be nonnegative and sum to 1");
}

}  // namespace

RawTable parse_csv(const std::string& text, const DatasetSpec& spec, const std::string& name) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError("empty csv: " + name);

    std::vector<std::string> header = split_line(lines[0]);
    auto column = [&](const std::string& col) {
        auto it = std::find(header.begin(), header.end(), col);
        if (it == header.end()) throw DataError("missing column '" + col + "' in " + name);
        return static_cast<std::size_t>(it - header.begin());
    };

    std::size_t target_col = column(spec.target);
    std::vector<std::string> feature_names = spec.features;
    if (feature_names.empty()) {
        for (const auto& h : header)
            if (h != spec.target) feature_names.push_back(h);
    }
    if (feature_names.empty()) throw DataError("no feature columns in " + name);
    std::vector<std::size_t> feature_cols;
    for (const auto& f : feature_names) feature_cols.push_back(column(f));

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    RawTable out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> cells = split_line(lines[i]);
        bool ok = cells.size() == header.size();
        std::vector<double> row(feature_cols.size());
        double y = 0.0;
        if (ok) ok = parse_cell(cells[target_col], y);
        for (std::size_t c = 0; ok && c < feature_cols.size(); ++c)
            ok = parse_cell(cells[feature_cols[c]], row[c]);
        if (!ok) {
            out.rejected_rows.push_back(static_cast<long>(i) + 1);  // 1-based file line
            continue;
        }
        rows.push_back(std::move(row));
        targets.push_back(y);
    }
    if (rows.empty()) throw DataError("no parseable rows in " + name);

    out.name = name;
    out.feature_names = std::move(feature_names);
    out.target_name = spec.target;
    out.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(feature_cols.size()));
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        out.target[static_cast<Eigen::Index>(r)] = targets[r];
    }
    return out;
}

RawTable load_csv(const DatasetSpec& spec) {
    return parse_csv(read_text_file(spec.path), spec, path_stem(spec.path));
}

SplitTables split(const RawTable& table, const std::array<double, 3>& fractions,
                  std::uint64_t seed) {
    check_fractions(fractions);
    const auto n = table.target.size();
    if (n < 3) throw DataError("need at least 3 rows to split");

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size() - 1; i > 0; --i)
        std::swap(idx[i], idx[rng() % (i + 1)]);

    auto nd = static_cast<double>(n);
    long n1 = std::lround(fractions[0] * nd);
    long n2 = std::lround(fractions[1] * nd);
    long n3 = static_cast<long>(n) - n1 - n2;
    while (n3 < 0) (n1 >= n2 ? n1 : n2) -= 1, ++n3;
    long* parts[3] = {&n1, &n2, &n3};
    for (long* p : parts)
        while (*p == 0) {
            long** biggest = std::max_element(parts, parts + 3,
                                              [](long* a, long* b) { return *a < *b; });
            --**biggest;
            ++*p;
        }

    std::vector<Eigen::Index> a(idx.begin(), idx.begin() + n1);
    std::vector<Eigen::Index> b(idx.begin() + n1, idx.begin() + n1 + n2);
    std::vector<Eigen::Index> c(idx.begin() + n1 + n2, idx.end());
    return SplitTables{subtable(table, a), subtable(table, b), subtable(table, c)};
}

ClassSelector ClassSelector::from_json(const Json& j) {
    ClassSelector sel;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "self_orthogonality") sel.kind = Kind::SelfOrthogonality;
        else if (s == "decision") sel.kind = Kind::Decision;
        else if (s == "zero_bias") sel.kind = Kind::ZeroBias;
        else throw DataError("unknown test class: " + s);
        return sel;
    }
    if (j.is_object() && j.contains("bins")) {
        sel.kind = Kind::Bins;
        sel.bins = j.at("bins").get<std::size_t>();
        if (sel.bins == 0) throw DataError("bins must be positive");
        return sel;
    }
    if (j.is_object() && j.contains("union")) {
        sel.kind = Kind::Union;
        for (const auto& part : j.at("union")) sel.parts.push_back(from_json(part));
        return sel;
    }
    throw DataError("unrecognized test class selector");
}

Json ClassSelector::to_json() const {
    switch (kind) {
        case Kind::SelfOrthogonality: return "self_orthogonality";
        case Kind::Decision: return "decision";
        case Kind::ZeroBias: return "zero_bias";
        case Kind::Bins: return Json{{"bins", bins}};
        case Kind::Union: {
            Json arr = Json::array();
            for (const auto& p : parts) arr.push_back(p.to_json());
            return Json{{"union", arr}};
        }
    }
    throw std::invalid_argument("unknown selector kind");
}

TestClass build_selected_class(const ClassSelector& sel, const LinearUtility& u,
                               Eigen::Index dimension) {
    switch (sel.kind) {
        case ClassSelector::Kind::SelfOrthogonality: return build_coordinate_class(dimension);
        case ClassSelector::Kind::Bins: return build_bin_class(Partition::uniform(sel.bins));
        case ClassSelector::Kind::Decision: return build_decision_class(u);
        case ClassSelector::Kind::ZeroBias: return build_bin_class(Partition::uniform(1));
        case ClassSelector::Kind::Union: {
            std::vector<TestClass> parts;
            for (const auto& p : sel.parts) parts.push_back(build_selected_class(p, u, dimension));
            if (parts.empty()) return TestClass(dimension);
            return union_classes(parts);
        }
    }
    throw std::invalid_argument("unknown selector kind");
}

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig cfg;
    const Json& ds = j.at("dataset");
    cfg.dataset.path = ds.value("path", std::string{});
    cfg.dataset.target = ds.at("target").get<std::string>();
    if (ds.contains("features"))
        cfg.dataset.features = ds.at("features").get<std::vector<std::string>>();
    cfg.dataset.rescale = ds.value("rescale", true);

    const Json& ut = j.at("utility");
    cfg.utility.alpha = ut.at("alpha").get<double>();
    cfg.utility.multipliers = ut.at("multipliers").get<std::vector<double>>();
    cfg.utility.costs = ut.at("costs").get<std::vector<double>>();

    cfg.test_class = ClassSelector::from_json(j.at("test_class"));
    if (j.contains("eps") && !j.at("eps").is_null()) cfg.eps = j.at("eps").get<double>();
    if (j.contains("split")) {
        auto v = j.at("split").get<std::vector<double>>();
        if (v.size() != 3) throw DataError("split must have three fractions");
        cfg.split = {v[0], v[1], v[2]};
    }
    check_fractions(cfg.split);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.width = j.value("width", std::size_t{32});
    if (cfg.width == 0) throw DataError("width must be positive");
    return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
    Json j;
    j["dataset"] = {{"path", cfg.dataset.path},
                    {"target", cfg.dataset.target},
                    {"features", cfg.dataset.features},
                    {"rescale", cfg.dataset.rescale}};
    j["utility"] = {{"alpha", cfg.utility.alpha},
                    {"multipliers", cfg.utility.multipliers},
                    {"costs", cfg.utility.costs}};
    j["test_class"] = cfg.test_class.to_json();
    j["eps"] = cfg.eps ? Json(*cfg.eps) : Json(nullptr);
    j["split"] = {cfg.split[0], cfg.split[1], cfg.split[2]};
    j["seed"] = cfg.seed;
    j["width"] = cfg.width;
    return j;
}

EmpiricalSample forecast_sample(const Forecaster& f, const RawTable& table) {
    Vec preds = f.predict(table.features);
    Mat forecasts(preds.size(), 1);
    forecasts.col(0) = preds;
    Mat outcomes(table.target.size(), 1);
    for (Eigen::Index i = 0; i < table.target.size(); ++i)
        outcomes(i, 0) = std::clamp(f.rescale_target(table.target[i]), 0.0, 1.0);
    return EmpiricalSample::equal_weights(std::move(forecasts), std::move(outcomes));
}

ExperimentParts prepare_experiment(const ExperimentConfig& cfg, const RawTable& table) {
    LinearUtility u = cfg.utility.build();
    SplitTables st = split(table, cfg.split, cfg.seed);
    Forecaster f = train_forecaster(st.train.features, st.train.target, cfg.width, cfg.seed,
                                    cfg.dataset.rescale);

    EmpiricalSample cal = forecast_sample(f, st.calibration);
    EmpiricalSample test = forecast_sample(f, st.test);
    TestClass tests = build_selected_class(cfg.test_class, u, 1);

    CalibrationAudit audit0 = audit(tests, cal, cfg.eps ? *cfg.eps : 0.0);
    double eps = cfg.eps ? *cfg.eps : audit0.max_norm;
    CalibrationAudit full = audit(tests, cal, eps);

    ExperimentParts parts{.utility = u,
                          .tests = tests,
                          .calibration = std::move(cal),
                          .test = std::move(test),
                          .audit = std::move(full),
                          .eps = eps,
                          .robust = plugin_policy(u),
                          .mode = "dual",
                          .dual = {},
                          .trace = {},
                          .rows_train = static_cast<long>(st.train.target.size())};

    CollapseCheck collapse = collapse_check(u, tests, parts.calibration, eps);
    if (tests.size() > 0 && collapse.is_collapsed) {
        parts.robust = collapse_policy(u, tests);
        parts.mode = "collapse";
    } else if (const Partition* bins = pure_bin_class(tests)) {
        parts.robust = eps_bin_policy(u, *bins, parts.calibration, eps);
        parts.mode = "bin";
    } else {
        DualOptions opts;
        opts.trace = &parts.trace;
        DualSolution sol = solve_dual(u, tests, parts.calibration, eps, opts);
        parts.dual = sol;
        parts.robust = dual_policy(u, tests, std::move(sol));
    }
    return parts;
}

Report run_experiment_on(const ExperimentConfig& cfg, const RawTable& table) {
    ExperimentParts parts = prepare_experiment(cfg, table);
    const LinearUtility& u = parts.utility;
    const EmpiricalSample& test = parts.test;

    Report r;
    r.dataset = table.name;
    r.audit = parts.audit;
    r.eps = parts.eps;
    r.policy_mode = parts.mode;
    r.dual = parts.dual;
    r.trace = parts.trace;
    r.rows_train = parts.rows_train;
    r.rows_calibration = static_cast<long>(parts.calibration.size());
    r.rows_test = static_cast<long>(test.size());
    r.config = config_to_json(cfg);

    RobustPolicy plugin = plugin_policy(u);
    const RobustPolicy& robust = parts.robust;
    r.iid.plugin = score_iid(plugin, test);
    r.iid.robust = score_iid(robust, test);

    PolicyFn plugin_fn = as_policy_fn(plugin);
    AdversaryResult adv_p = worst_case_for_policy(u, parts.tests, test, plugin_fn, parts.eps);
    // The robust-targeted adversary is the saddle belief map the policy itself
    // guards against; under it the robust rule best-responds pointwise and so
    // cannot trail any other policy.
    Mat saddle(static_cast<Eigen::Index>(test.size()), test.dimension());
    for (std::size_t j = 0; j < test.size(); ++j)
        saddle.row(static_cast<Eigen::Index>(j)) =
            worst_case_belief(robust, test.forecast(j)).transpose();
    r.adv_plugin.plugin = score_under(plugin, test, adv_p.beliefs.points);
    r.adv_plugin.robust = score_under(robust, test, adv_p.beliefs.points);
    r.adv_robust.plugin = score_under(plugin, test, saddle);
    r.adv_robust.robust = score_under(robust, test, saddle);

    r.test_forecasts = test.forecasts().col(0);
    r.beliefs_plugin = adv_p.beliefs.points;
    r.beliefs_robust = std::move(saddle);
    r.actions_plugin = actions_on(plugin, test);
    r.actions_robust = actions_on(robust, test);
    return r;
}

Report run_experiment(const ExperimentConfig& cfg) {
    if (cfg.dataset.path.empty()) throw DataError("experiment config has no dataset path");
    return run_experiment_on(cfg, load_csv(cfg.dataset));
}

Json report_to_json(const Report& r) {
    Json cells = {{"iid", {{"plugin", r.iid.plugin}, {"robust", r.iid.robust}}},
                  {"adversary_vs_plugin",
                   {{"plugin", r.adv_plugin.plugin}, {"robust", r.adv_plugin.robust}}},
                  {"adversary_vs_robust",
                   {{"plugin", r.adv_robust.plugin}, {"robust", r.adv_robust.robust}}}};
    return {{"dataset", r.dataset},
            {"cells", cells},
            {"audit", audit_to_json(r.audit)},
            {"eps", r.eps},
            {"policy_mode", r.policy_mode},
            {"dual", dual_to_json(r.dual)},
            {"rows",
             {{"train", r.rows_train}, {"calibration", r.rows_calibration}, {"test", r.rows_test}}},
            {"config", r.config}};
}

std::string report_table_csv(const Report& r) {
    std::string out =
        "dataset,plugin_iid,robust_iid,plugin_vs_plugin_adversary,robust_vs_plugin_adversary,"
        "plugin_vs_robust_adversary,robust_vs_robust_adversary\n";
    out += r.dataset;
    for (double x : {r.iid.plugin, r.iid.robust, r.adv_plugin.plugin, r.adv_plugin.robust,
                     r.adv_robust.plugin, r.adv_robust.robust})
        out += ',' + format_double(x);
    out += '\n';
    return out;
}

void emit_report(const Report& r, const std::string& out_dir, bool with_traces) {
    std::filesystem::create_directories(out_dir);
    auto at = [&](const char* f) { return (std::filesystem::path(out_dir) / f).string(); };
    write_json_file(at("report.json"), report_to_json(r));
    write_text_file(at("table.csv"), report_table_csv(r));
    if (!with_traces) return;
    if (!r.trace.empty()) write_text_file(at("dual_trace.csv"), dual_trace_csv(r.trace));
    if (r.test_forecasts.size() > 0) {
        Mat v(r.test_forecasts.size(), 1);
        v.col(0) = r.test_forecasts;
        write_text_file(at("beliefs_plugin.csv"), belief_csv(v, r.beliefs_plugin, r.actions_plugin));
        write_text_file(at("beliefs_robust.csv"), belief_csv(v, r.beliefs_robust, r.actions_robust));
    }
}

RawTable synth_bike(std::uint64_t seed, std::size_t rows) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    RawTable t;
    t.name = "bike_synth";
    t.feature_names = {"season", "yr",         "mnth", "holiday", "weekday", "workingday",
                       "weathersit", "temp", "atemp", "hum",     "windspeed"};
    t.target_name = "cnt";
    const auto n = static_cast<Eigen::Index>(rows);
    t.features.resize(n, static_cast<Eigen::Index>(t.feature_names.size()));
    t.target.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        long doy = i % 365;
        double yr = static_cast<double>((i / 365) % 2);
        double season = 1.0 + std::min(3L, doy / 92);
        double mnth = 1.0 + std::min(11L, doy * 12 / 365);
        double holiday = u01(rng) < 0.029 ? 1.0 : 0.0;
        double weekday = static_cast<double>(i % 7);
        double workingday = (weekday >= 1.0 && weekday <= 5.0 && holiday == 0.0) ? 1.0 : 0.0;
        double wroll = u01(rng);
        double weathersit = wroll < 0.63 ? 1.0 : (wroll < 0.93 ? 2.0 : 3.0);
        double phase = 2.0 * M_PI * static_cast<double>(doy) / 365.0;
        double temp = std::clamp(0.5 - 0.33 * std::cos(phase) + 0.06 * n01(rng), 0.03, 0.95);
        double atemp = std::clamp(0.95 * temp + 0.03 + 0.02 * n01(rng), 0.03, 0.95);
        double hum = std::clamp(0.63 + 0.1 * std::sin(phase + 1.7) + 0.1 * n01(rng), 0.2, 1.0);
        double windspeed = std::clamp(0.19 + 0.07 * n01(rng), 0.02, 0.6);

        double comfort = std::sin(M_PI * std::clamp((temp - 0.08) / 0.78, 0.0, 1.0));
        double weather_mult = weathersit == 1.0 ? 1.0 : (weathersit == 2.0 ? 0.78 : 0.41);
        double cnt = 850.0 + 2300.0 * yr + 5100.0 * comfort * weather_mult -
                     1400.0 * (hum - 0.6) - 2600.0 * windspeed + 180.0 * workingday +
                     420.0 * n01(rng);
        t.target[i] = std::max(22.0, std::round(cnt));

        Vec row(11);
        row << season, yr, mnth, holiday, weekday, workingday, weathersit, temp, atemp, hum,
            windspeed;
        t.features.row(i) = row.transpose();
    }
    return t;
}

RawTable synth_housing(std::uint64_t seed, std::size_t rows) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    RawTable t;
    t.name = "housing_synth";
    t.feature_names = {"MedInc",     "HouseAge", "AveRooms", "AveBedrms",
                       "Population", "AveOccup", "Latitude", "Longitude"};
    t.target_name = "MedHouseVal";
    const auto n = static_cast<Eigen::Index>(rows);
    t.features.resize(n, static_cast<Eigen::Index>(t.feature_names.size()));
    t.target.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        double inc = std::clamp(std::exp(1.1 + 0.45 * n01(rng)), 0.5, 15.0);
        double age = 1.0 + std::floor(52.0 * u01(rng));
        double rooms = std::clamp(3.5 + 2.2 * u01(rng) + 0.6 * n01(rng), 2.0, 10.0);
        double bedrms = std::clamp(rooms * (0.19 + 0.02 * n01(rng)), 0.5, 3.0);
        double pop = std::clamp(std::exp(7.0 + 0.7 * n01(rng)), 50.0, 9000.0);
        double occup = std::clamp(2.2 + std::abs(1.1 * n01(rng)), 1.0, 8.0);
        bool south = u01(rng) < 0.55;
        double lat = south ? 34.0 + 0.8 * n01(rng) : 37.8 + 0.8 * n01(rng);
        double lon = south ? -118.2 + 0.7 * n01(rng) : -122.3 + 0.7 * n01(rng);
        lat = std::clamp(lat, 32.5, 42.0);
        lon = std::clamp(lon, -124.3, -114.3);

        double la = 1.1 * std::exp(-(std::pow(lat - 34.0, 2) + std::pow(lon + 118.5, 2)) / 3.0);
        double sf = 0.9 * std::exp(-(std::pow(lat - 37.8, 2) + std::pow(lon + 122.4, 2)) / 2.5);
        double value = 0.45 + 0.62 * std::pow(inc, 0.8) + 0.05 * (rooms - 5.0) -
                       0.4 * std::log(occup) + la + sf - 0.002 * (age - 25.0) + 0.35 * n01(rng);
        t.target[i] = std::clamp(value, 0.15, 5.0);

        Vec row(8);
        row << inc, age, rooms, bedrms, pop, occup, lat, lon;
        t.features.row(i) = row.transpose();
    }
    return t;
}

std::string table_to_csv(const RawTable& table) {
    std::string out;
    for (const auto& f : table.feature_names) out += f + ',';
    out += table.target_name;
    out += '\n';
    for (Eigen::Index i = 0; i < table.target.size(); ++i) {
        for (Eigen::Index c = 0; c < table.features.cols(); ++c)
            out += format_double(table.features(i, c)) + ',';
        out += format_double(table.target[i]);
        out += '\n';
    }
    return out;
}

void write_csv(const RawTable& table, const std::string& path) {
    write_text_file(path, table_to_csv(table));
}

}  // namespace caldec
