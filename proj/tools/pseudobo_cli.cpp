// Command-line driver: run experiments, calibration studies, list benchmarks.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pseudobo/pseudobo.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kObjective = 4 };

struct RunFlags {
    std::string config;
    std::string method;
    std::string benchmark;
    std::string objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::string direction;
    std::size_t budget = 0;
    std::size_t init = 0;
    std::size_t batch = 0;
    std::string seeds;
    std::string out;
    bool record_time = false;
};

pseudobo::ExperimentConfig resolve(const RunFlags& f) {
    using namespace pseudobo;
    json j = json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config file " + f.config);
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config file " + f.config + ": " + e.what());
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    // Flags override the file; both override the method preset.
    if (!f.method.empty()) j["method"] = f.method;
    if (!f.benchmark.empty()) j["benchmark"] = f.benchmark;
    if (!f.objective.empty()) j["objective_command"] = f.objective;
    if (!f.lower.empty()) j["box_lower"] = f.lower;
    if (!f.upper.empty()) j["box_upper"] = f.upper;
    if (!f.direction.empty()) j["direction"] = f.direction;
    if (f.budget) j["budget"] = f.budget;
    if (f.init) j["n_init"] = f.init;
    if (f.batch) j["batch"] = f.batch;
    if (!f.seeds.empty()) j["seeds"] = parse_seeds(f.seeds);
    if (!f.out.empty()) j["out"] = f.out;
    if (f.record_time) j["record_time"] = true;
    return config_from_json(j);
}

int cmd_run(const RunFlags& f) {
    const auto cfg = resolve(f);
    const auto summary = pseudobo::run_experiment(cfg);
    for (const auto& s : summary.seeds)
        std::printf("seed %llu  final best %s  (%zu evaluations, %.2fs)\n", static_cast<unsigned long long>(s.seed),
                    pseudobo::format_double(s.final_best).c_str(), s.evaluations, s.wall_time_s);
    std::printf("median %s  IQR [%s, %s]  total %.2fs\n", pseudobo::format_double(summary.median_final_best).c_str(),
                pseudobo::format_double(summary.q1_final_best).c_str(),
                pseudobo::format_double(summary.q3_final_best).c_str(), summary.total_wall_time_s);
    return kOk;
}

struct CalibrateFlags {
    std::string config;
    std::string method;
    std::string function;
    std::string seeds;
    std::string out;
};

int cmd_calibrate(const CalibrateFlags& f) {
    using namespace pseudobo;
    CalibrationConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config file " + f.config);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config file " + f.config + ": " + e.what());
        }
        cfg = calibration_config_from_json(j);
    }
    if (!f.method.empty()) cfg.method = canonical_calibration_method(f.method);
    if (!f.function.empty()) cfg.function = f.function;
    if (!f.seeds.empty()) cfg.seeds = parse_seeds(f.seeds);
    if (!f.out.empty()) cfg.out = f.out;
    const auto report = run_calibration(cfg);
    std::printf("%-8s %-4s %6s %8s %10s %10s\n", "method", "fn", "seed", "ccr", "width", "lambda");
    for (const auto& r : report.rows)
        std::printf("%-8s %-4s %6llu %8.3f %10.4f %10.4f\n", r.method.c_str(), r.function.c_str(),
                    static_cast<unsigned long long>(r.seed), r.result.ccr, r.result.mean_width, r.result.lambda_val);
    std::printf("CCR %s  width %s\n", plus_minus(report.ccr_mean, report.ccr_std).c_str(),
                plus_minus(report.width_mean, report.width_std).c_str());
    return kOk;
}

int cmd_bench_list() {
    for (const auto& name : pseudobo::benchmark_names()) {
        const auto b = pseudobo::make_benchmark(name);
        std::printf("%-16s d=%-3zu [%g, %g]^%zu  f*=%s\n", name.c_str(), b.dim(), b.box.lower()[0], b.box.upper()[0],
                    b.dim(), b.f_star ? pseudobo::format_double(*b.f_star).c_str() : "?");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-Bayesian optimization benchmark harness"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "optimize a benchmark or external objective");
    run->add_option("--config", rf.config, "JSON config file");
    run->add_option("--method", rf.method, "PseudoBO-RP | PseudoBO-KR-Hyb | PseudoBO-KR-Hyb-TR | RS");
    run->add_option("--benchmark", rf.benchmark, "benchmark name (see bench-list)");
    run->add_option("--objective", rf.objective, "shell command speaking the line protocol");
    run->add_option("--lower", rf.lower, "box lower bounds for --objective")->delimiter(',');
    run->add_option("--upper", rf.upper, "box upper bounds for --objective")->delimiter(',');
    run->add_option("--direction", rf.direction, "min | max");
    run->add_option("--budget", rf.budget, "total evaluations per seed");
    run->add_option("--init", rf.init, "initial design size");
    run->add_option("--batch", rf.batch, "queries per iteration");
    run->add_option("--seeds", rf.seeds, "e.g. 0-9 or 1,2,5");
    run->add_option("--out", rf.out, "output directory");
    run->add_flag("--record-time", rf.record_time, "write wall-clock times into traces");

    CalibrateFlags cf;
    auto* cal = app.add_subcommand("calibrate", "conformal-style calibration study on f1/f2/f3");
    cal->add_option("--config", cf.config, "JSON config file");
    cal->add_option("--method", cf.method, "GP | RP | KR-Hyb");
    cal->add_option("--benchmark", cf.function, "f1 | f2 | f3");
    cal->add_option("--seeds", cf.seeds, "e.g. 0-9");
    cal->add_option("--out", cf.out, "JSON report path");

    auto* list = app.add_subcommand("bench-list", "list built-in benchmarks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(rf);
        if (*cal) return cmd_calibrate(cf);
        if (*list) return cmd_bench_list();
    } catch (const pseudobo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const pseudobo::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const pseudobo::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const pseudobo::ObjectiveError& e) {
        std::cerr << "objective error: " << e.what() << '\n';
        return kObjective;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
