#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvgls/csv.hpp"
#include "mvgls/errors.hpp"
#include "mvgls/fgls.hpp"
#include "mvgls/linalg.hpp"
#include "mvgls/sha1.hpp"
#include "mvgls/simulate.hpp"
#include "mvgls/var_errors.hpp"
#include "mvgls/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvgls;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;
constexpr int kExitGrsSkipped = 4;

// Flat key=value config support: the file's entries become options unless the
// same option already appears on the command line (flags win).
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw Error("--config needs a file argument");
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw Error("cannot read config file " + config_path);
    auto trim = [](std::string v) {
        std::size_t b = v.find_first_not_of(" \t\r");
        std::size_t e = v.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(config_path + ": line " + std::to_string(line_no) + " is not key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error(config_path + ": empty key on line " + std::to_string(line_no));
        std::string opt = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            if (a == opt || a.rfind(opt + "=", 0) == 0) given = true;
        if (given) continue;
        if (value == "true" || value == "false") {  // flag syntax
            if (value == "true") args.push_back(opt);
            continue;
        }
        args.push_back(opt);
        std::istringstream vs(value);
        std::string tok;
        while (vs >> tok) args.push_back(tok);
    }
    return args;
}

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("MVGLS_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // let the engine use hardware concurrency
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed, bool& was_random) {
    if (flag_seed) {
        was_random = false;
        return *flag_seed;
    }
    was_random = true;
    std::random_device rd;
    return (std::uint64_t(rd()) << 32) ^ rd();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json dist_df(const TestResult& r) {
    if (r.dist.kind == RefDist::Kind::Chi2) return r.dist.df1;
    return json::array({r.dist.df1, r.dist.df2});
}

std::string dist_label(const TestResult& r) {
    if (r.dist.kind == RefDist::Kind::Chi2) return "chi2(" + std::to_string(r.dist.df1) + ")";
    return "F(" + std::to_string(r.dist.df1) + ", " + std::to_string(r.dist.df2) + ")";
}

struct ManifestWriter {
    json inputs = json::object();
    json config = json::object();
    json outputs = json::array();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_input_file(const fs::path& path) {
        inputs[path.string()] = git_blob_hash(read_file(path));
    }
    void add_input_content(const std::string& name, const std::string& content) {
        inputs[name] = git_blob_hash(content);
    }
    void write(const fs::path& path, const std::string& command, std::uint64_t seed,
               bool seed_was_random) {
        json m;
        m["command"] = command;
        m["version"] = kVersion;
        m["seed"] = seed;
        m["seed_was_random"] = seed_was_random;
        m["config"] = config;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file(path, m.dump(2) + "\n");
    }
};

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::vector<std::string> cells;
    std::vector<int> t_values;
    std::vector<std::string> cases;
    std::string preset;
    int reps = 1000;
    std::optional<std::uint64_t> seed;
    double rho = 0.3;
    double x_ar = 0.5;
    int p_max = 5;
    int min_p = 1;
    std::string alpha = "null";
    int force_p = -1;
    bool fixed_omega = false;
    std::vector<double> levels = {0.10, 0.05, 0.01};
    int workers = 0;
    std::string out_dir = "out";
};

int cmd_simulate(const SimulateArgs& a) {
    static const std::map<std::string, std::pair<int, int>> kCells = {
        {"N6K3", {6, 3}}, {"N6K5", {6, 5}}, {"N25K3", {25, 3}}, {"N25K5", {25, 5}}};

    std::vector<std::string> cells = a.cells.empty()
                                         ? std::vector<std::string>{"N6K3", "N6K5", "N25K3", "N25K5"}
                                         : a.cells;
    for (const std::string& c : cells)
        if (!kCells.count(c)) throw Error("unknown cell '" + c + "' (use N6K3, N6K5, N25K3, N25K5)");

    std::vector<int> t_values = a.t_values.empty() ? std::vector<int>{200, 400, 800, 1600, 3200}
                                                   : a.t_values;

    std::vector<std::string> case_names;
    if (!a.preset.empty()) {
        if (a.preset == "table1")
            case_names = {"hetero"};
        else if (a.preset == "table2")
            case_names = {"hetero+auto"};
        else
            throw Error("unknown preset '" + a.preset + "' (use table1 or table2)");
    }
    for (const std::string& c : a.cases) {
        if (c != "hetero" && c != "hetero+auto") throw Error("unknown case '" + c + "'");
        case_names.push_back(c);
    }
    if (case_names.empty()) case_names = {"hetero", "hetero+auto"};

    bool seed_was_random = false;
    std::uint64_t seed = resolve_seed(a.seed, seed_was_random);
    int workers = resolve_workers(a.workers);

    ManifestWriter manifest;
    manifest.config = {{"cells", cells},
                       {"T", t_values},
                       {"cases", case_names},
                       {"reps", a.reps},
                       {"rho", a.rho},
                       {"x_ar", a.x_ar},
                       {"p_max", a.p_max},
                       {"p_min", a.min_p},
                       {"alpha", a.alpha},
                       {"force_p", a.force_p},
                       {"fixed_omega", a.fixed_omega},
                       {"levels", a.levels},
                       {"workers", workers}};
    manifest.add_input_content("config", manifest.config.dump());

    fs::create_directories(a.out_dir);
    std::vector<ResultRow> all_rows;
    for (const std::string& case_name : case_names) {
        for (const std::string& cell : cells) {
            auto [n, k] = kCells.at(cell);
            for (int t : t_values) {
                SimConfig cfg;
                cfg.N = n;
                cfg.k = k;
                cfg.T = t;
                cfg.reps = a.reps;
                cfg.rho = a.rho;
                cfg.phi_diag = (case_name == "hetero") ? 0.0 : 0.3;
                cfg.x_ar = a.x_ar;
                cfg.alpha_mode = (a.alpha == "alternative") ? AlphaMode::Alternative : AlphaMode::Null;
                cfg.seed = seed;
                cfg.p_max = a.p_max;
                cfg.min_p = a.min_p;
                if (a.force_p >= 0) cfg.force_p = a.force_p;
                cfg.redraw_omega = !a.fixed_omega;
                cfg.levels = a.levels;
                cfg.workers = workers;
                cfg.validate();

                std::fprintf(stderr, "running case=%s cell=%s T=%d reps=%d ...\n",
                             case_name.c_str(), cell.c_str(), t, a.reps);
                RejectionTable table = run_experiment(cfg);
                std::vector<ResultRow> rows = rejection_rows(case_name, cfg, table);
                all_rows.insert(all_rows.end(), rows.begin(), rows.end());
            }
        }
    }

    std::string csv = format_results_csv(all_rows);
    std::string table_text = render_rates_table(all_rows);
    fs::path csv_path = fs::path(a.out_dir) / "results.csv";
    fs::path table_path = fs::path(a.out_dir) / "tables.txt";
    fs::path manifest_path = fs::path(a.out_dir) / "manifest.json";
    write_file(csv_path, csv);
    write_file(table_path, table_text);
    manifest.outputs.push_back(csv_path.string());
    manifest.outputs.push_back(table_path.string());
    manifest.write(manifest_path, "simulate", seed, seed_was_random);

    std::cout << table_text;
    std::cout << "results: " << csv_path.string() << "\nmanifest: " << manifest_path.string()
              << "\nseed: " << seed << "\n";
    return 0;
}

// ---------------------------------------------------------------- test/fit

struct PanelArgs {
    std::string returns_file;
    std::string factors_file;
    std::string p_spec = "auto";
    int p_max = 5;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;  // echoed for reproducibility records
};

std::optional<int> parse_p_spec(const std::string& spec, int p_max) {
    if (spec == "auto") return std::nullopt;
    char* end = nullptr;
    long v = std::strtol(spec.c_str(), &end, 10);
    if (end == spec.c_str() || *end != '\0' || v < 0 || v > p_max)
        throw Error("--p must be 'auto' or an integer in [0, p_max]");
    return int(v);
}

JoinedPanel load_panel(const PanelArgs& a, ManifestWriter& manifest) {
    manifest.add_input_file(a.returns_file);
    manifest.add_input_file(a.factors_file);
    CsvTable returns = read_csv_file(a.returns_file);
    CsvTable factors = read_csv_file(a.factors_file);
    return join_on_date(returns, factors);
}

int cmd_test(const PanelArgs& a) {
    ManifestWriter manifest;
    manifest.config = {{"returns", a.returns_file},
                       {"factors", a.factors_file},
                       {"p", a.p_spec},
                       {"p_max", a.p_max}};

    bool seed_was_random = false;
    std::uint64_t seed = resolve_seed(a.seed, seed_was_random);
    JoinedPanel joined = load_panel(a, manifest);
    const PanelData& panel = joined.panel;
    const int T = panel.T(), N = panel.N(), k = panel.k();
    std::optional<int> force_p = parse_p_spec(a.p_spec, a.p_max);

    bool grs_feasible = T > N + k + 1;
    if (!grs_feasible)
        std::cerr << "warning: T = " << T << " <= N + k + 1 = " << (N + k + 1)
                  << ", GRS tests skipped\n";

    BatteryOutcome battery = run_battery(panel, force_p, a.p_max);
    if (!battery.note.empty()) std::cerr << "warning: " << battery.note << "\n";

    std::cout << "T=" << T << " N=" << N << " k=" << k << " selected lag=" << battery.selected_lag
              << "\n";
    std::printf("%-8s  %12s  %-12s  %s\n", "test", "statistic", "dist", "p_value");
    json tests = json::array();
    for (int i = 0; i < kNumTests; ++i) {
        if (!battery.results[i]) {
            std::printf("%-8s  %12s  %-12s  %s\n", kTestNames[i], "-", "-", "-");
            continue;
        }
        const TestResult& r = *battery.results[i];
        std::printf("%-8s  %12.6f  %-12s  %.6g\n", r.name.c_str(), r.statistic,
                    dist_label(r).c_str(), r.p_value);
        tests.push_back({{"name", r.name},
                         {"statistic", r.statistic},
                         {"df", dist_df(r)},
                         {"p_value", r.p_value}});
    }

    fs::create_directories(a.out_dir);
    json report;
    report["T"] = T;
    report["N"] = N;
    report["k"] = k;
    report["selected_lag"] = battery.selected_lag;
    report["tests"] = tests;
    fs::path report_path = fs::path(a.out_dir) / "report.json";
    write_file(report_path, report.dump(2) + "\n");
    manifest.outputs.push_back(report_path.string());
    manifest.write(fs::path(a.out_dir) / "manifest.json", "test", seed, seed_was_random);
    std::cout << "report: " << report_path.string() << "\n";
    return grs_feasible ? 0 : kExitGrsSkipped;
}

struct FitArgs : PanelArgs {
    std::string estimator = "pw";
};

int cmd_fit(const FitArgs& a) {
    ManifestWriter manifest;
    manifest.config = {{"returns", a.returns_file},
                       {"factors", a.factors_file},
                       {"estimator", a.estimator},
                       {"p", a.p_spec},
                       {"p_max", a.p_max}};

    bool seed_was_random = false;
    std::uint64_t seed = resolve_seed(a.seed, seed_was_random);
    JoinedPanel joined = load_panel(a, manifest);
    const PanelData& panel = joined.panel;
    const int T = panel.T(), N = panel.N(), k = panel.k();
    std::optional<int> force_p = parse_p_spec(a.p_spec, a.p_max);

    StackedModel model = build_stacked(panel);
    OlsFit ols = ols_fit(model);
    int p = force_p ? *force_p : select_lag_bic(ols.residuals, a.p_max);
    VarFit var = fit_var(ols.residuals, p);

    Vector kappa;
    Matrix m_hat;
    int effective_T = T;
    if (a.estimator == "ols") {
        kappa = ols.kappa_hat;
        m_hat = ols.m_hat;
    } else if (a.estimator == "pw") {
        GlsFit fit = pw_fgls(model, var);
        kappa = fit.kappa_hat;
        m_hat = fit.m_hat;
        effective_T = fit.effective_T;
    } else if (a.estimator == "co") {
        GlsFit fit = co_fgls(model, var);
        kappa = fit.kappa_hat;
        m_hat = fit.m_hat;
        effective_T = fit.effective_T;
    } else {
        throw Error("unknown estimator '" + a.estimator + "' (use ols, pw, co)");
    }

    Matrix m_inv = cholesky(m_hat).inverse();
    Vector se(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i)
        se[i] = std::sqrt(m_inv(int(i), int(i)) / double(effective_T));

    std::cout << "estimator=" << a.estimator << " T=" << T << " N=" << N << " k=" << k
              << " selected lag=" << p << "\n";
    json beta = json::array(), se_beta = json::array(), alpha = json::array(),
         se_alpha = json::array();
    for (int i = 0; i < N; ++i) {
        std::printf("equation %s:\n", joined.asset_names[i].c_str());
        std::printf("  alpha = %12.6g  (se %.6g)\n", kappa[i], se[i]);
        alpha.push_back(kappa[i]);
        se_alpha.push_back(se[i]);
        json bi = json::array(), si = json::array();
        for (int a2 = 0; a2 < k; ++a2) {
            double b = kappa[N + i * k + a2];
            double s = se[N + i * k + a2];
            std::printf("  beta[%s] = %12.6g  (se %.6g)\n", joined.factor_names[a2].c_str(), b, s);
            bi.push_back(b);
            si.push_back(s);
        }
        beta.push_back(bi);
        se_beta.push_back(si);
    }

    json phi = json::array();
    for (const Matrix& pj : var.phi) {
        json rows = json::array();
        for (int i = 0; i < N; ++i) {
            json row = json::array();
            for (int j = 0; j < N; ++j) row.push_back(pj(i, j));
            rows.push_back(row);
        }
        phi.push_back(rows);
    }
    json omega = json::array();
    for (int i = 0; i < N; ++i) {
        json row = json::array();
        for (int j = 0; j < N; ++j) row.push_back(var.omega(i, j));
        omega.push_back(row);
    }
    if (p > 0) {
        std::cout << "error VAR coefficients (lag matrices):\n" << phi.dump() << "\n";
    }
    std::cout << "innovation covariance:\n" << omega.dump() << "\n";

    fs::create_directories(a.out_dir);
    json report;
    report["fit"] = {{"estimator", a.estimator}, {"T", T},          {"N", N},
                     {"k", k},                   {"selected_lag", p}, {"alpha", alpha},
                     {"se_alpha", se_alpha},     {"beta", beta},      {"se_beta", se_beta},
                     {"phi", phi},               {"omega", omega},
                     {"equations", joined.asset_names}, {"factors", joined.factor_names}};
    fs::path report_path = fs::path(a.out_dir) / "fit.json";
    write_file(report_path, report.dump(2) + "\n");
    manifest.outputs.push_back(report_path.string());
    manifest.write(fs::path(a.out_dir) / "manifest.json", "fit", seed, seed_was_random);
    std::cout << "report: " << report_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate feasible-GLS estimation and intercept tests"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo rejection-rate tables");
    simulate->add_option("--preset", sim.preset, "table1 (heteroskedastic) or table2 (+autocorrelated)");
    simulate->add_option("--case", sim.cases, "hetero and/or hetero+auto (default both)");
    simulate->add_option("--cells", sim.cells, "grid cells: N6K3 N6K5 N25K3 N25K5 (default all)");
    simulate->add_option("--T", sim.t_values, "sample sizes (default 200 400 800 1600 3200)");
    simulate->add_option("--reps", sim.reps, "replications per cell (default 1000)");
    simulate->add_option("--seed", sim.seed, "base RNG seed (default random, echoed in manifest)");
    simulate->add_option("--rho", sim.rho, "cross-sectional error correlation (default 0.3)");
    simulate->add_option("--x-ar", sim.x_ar, "factor AR coefficient (default 0.5)");
    simulate->add_option("--p-max", sim.p_max, "lag-selection cap (default 5)");
    simulate->add_option("--p-min", sim.min_p, "smallest lag the selection considers (default 1)");
    simulate->add_option("--alpha", sim.alpha, "null or alternative (default null)");
    simulate->add_option("--force-p", sim.force_p, "bypass lag selection with this lag");
    simulate->add_flag("--fixed-omega", sim.fixed_omega, "draw the error covariance once per cell");
    simulate->add_option("--levels", sim.levels, "significance levels (default 0.10 0.05 0.01)");
    simulate->add_option("--workers", sim.workers, "worker threads (default MVGLS_WORKERS or all cores)");
    simulate->add_option("--out", sim.out_dir, "output directory (default out/)");
    simulate->add_option("--config", "flat key=value config file; explicit flags take precedence")
        ->type_name("FILE");  // consumed before parsing; listed for help

    PanelArgs test_args;
    CLI::App* test = app.add_subcommand("test", "intercept tests on a CSV panel");
    test->add_option("--returns", test_args.returns_file, "returns CSV (date + one column per asset)")
        ->required();
    test->add_option("--factors", test_args.factors_file, "factors CSV (date + one column per factor)")
        ->required();
    test->add_option("--p", test_args.p_spec, "error VAR lag: auto (BIC) or an integer");
    test->add_option("--p-max", test_args.p_max, "lag-selection cap (default 5)");
    test->add_option("--out", test_args.out_dir, "output directory (default out/)");
    test->add_option("--seed", test_args.seed, "seed echoed in the manifest");
    test->add_option("--config", "flat key=value config file; explicit flags take precedence")
        ->type_name("FILE");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "estimate the system on a CSV panel");
    fit->add_option("--returns", fit_args.returns_file, "returns CSV")->required();
    fit->add_option("--factors", fit_args.factors_file, "factors CSV")->required();
    fit->add_option("--estimator", fit_args.estimator, "ols, pw, or co (default pw)");
    fit->add_option("--p", fit_args.p_spec, "error VAR lag: auto (BIC) or an integer");
    fit->add_option("--p-max", fit_args.p_max, "lag-selection cap (default 5)");
    fit->add_option("--out", fit_args.out_dir, "output directory (default out/)");
    fit->add_option("--seed", fit_args.seed, "seed echoed in the manifest");
    fit->add_option("--config", "flat key=value config file; explicit flags take precedence")
        ->type_name("FILE");

    std::vector<std::string> args;
    try {
        args = expand_config_args(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    // CLI11 parses reversed argument vectors
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (test->parsed()) return cmd_test(test_args);
        if (fit->parsed()) return cmd_fit(fit_args);
    } catch (const AllReplicationsFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAllFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
