#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pseudobo/acquisition.hpp"
#include "pseudobo/benchmarks.hpp"
#include "pseudobo/calibration.hpp"
#include "pseudobo/candidates.hpp"
#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/external_objective.hpp"
#include "pseudobo/optimizer.hpp"
#include "pseudobo/randomized_prior.hpp"
#include "pseudobo/surrogates.hpp"
#include "pseudobo/uncertainty.hpp"

namespace pseudobo {

using json = nlohmann::json;

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = {"PseudoBO-RP", "PseudoBO-KR-Hyb", "PseudoBO-KR-Hyb-TR", "RS"};
    return names;
}

/// Per-coordinate perturbation probability by dimension, interpolated
/// linearly between the tabulated task dimensions and clamped outside them.
inline double perturbation_probability(std::size_t dim) {
    static constexpr std::array<std::pair<double, double>, 6> table = {
        {{2.0, 1.0}, {6.0, 0.75}, {10.0, 0.5}, {12.0, 0.4}, {14.0, 0.35}, {60.0, 0.15}}};
    const double d = static_cast<double>(dim);
    if (d <= table.front().first) return table.front().second;
    if (d >= table.back().first) return table.back().second;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (d <= table[i].first) {
            const auto [d0, p0] = table[i - 1];
            const auto [d1, p1] = table[i];
            return p0 + (d - d0) / (d1 - d0) * (p1 - p0);
        }
    }
    return table.back().second;
}

struct ExperimentConfig {
    std::string method = "PseudoBO-KR-Hyb";
    std::string benchmark = "hartmann6";
    std::string objective_command;  ///< external objective; overrides benchmark when set
    std::vector<double> box_lower;  ///< external objective box
    std::vector<double> box_upper;
    Direction direction = Direction::minimize;
    std::size_t budget = 100;
    std::size_t n_init = 10;
    std::size_t batch = 1;
    std::vector<std::uint64_t> seeds{0};

    // Bandwidth bases as fractions of each coordinate's range.
    double h0_low = 0.05;
    double h0_high = 0.2;
    double h0_rp = 0.005;
    std::size_t members = 20;
    std::size_t hidden_width = 32;
    double output_scale = 1.0;
    bool bootstrap = true;
    double p_perturb = 1.0;
    std::size_t n_candidates = 0;  ///< 0: min(100 d, 5000)
    std::string acquisition = "ei";
    double tau = 0.0;
    double beta0 = 2.0;
    bool trust_region = false;
    double tr_length_init = 0.8;
    double tr_length_min = 0.0078125;
    double tr_length_max = 1.6;
    std::size_t tr_success = 3;
    std::size_t tr_failure = 0;  ///< 0: max(4, ceil(d / batch))
    std::optional<double> winsorize_k;
    bool record_time = false;
    std::string out = "results";

    bool operator==(const ExperimentConfig&) const = default;

    bool external() const { return !objective_command.empty(); }

    std::size_t dim() const {
        if (external()) return box_lower.size();
        return make_benchmark(benchmark).dim();
    }

    Box box() const {
        if (external()) return Box(box_lower, box_upper);
        return make_benchmark(benchmark).box;
    }

    void validate() const {
        if (std::find(method_names().begin(), method_names().end(), method) == method_names().end())
            throw ConfigError("unknown method: " + method);
        if (external()) {
            (void)Box(box_lower, box_upper);
        } else {
            (void)make_benchmark(benchmark);
        }
        if (n_init < 1) throw ConfigError("n_init must be >= 1");
        if (budget < n_init) throw ConfigError("budget must be >= n_init");
        if (batch < 1) throw ConfigError("batch must be >= 1");
        if (seeds.empty()) throw ConfigError("at least one seed is required");
        if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
            throw ConfigError("duplicate seeds");
        if (!(h0_low > 0.0 && h0_low <= h0_high)) throw ConfigError("need 0 < h0_low <= h0_high");
        if (!(h0_rp > 0.0)) throw ConfigError("h0_rp must be positive");
        if (members < 2) throw ConfigError("members must be >= 2");
        if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
        if (!(output_scale >= 0.0)) throw ConfigError("output_scale must be >= 0");
        if (!(p_perturb > 0.0 && p_perturb <= 1.0)) throw ConfigError("p_perturb must be in (0, 1]");
        if (acquisition != "ei" && acquisition != "pi" && acquisition != "ucb")
            throw ConfigError("acquisition must be ei, pi or ucb");
        if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
        if (!(beta0 > 0.0)) throw ConfigError("beta0 must be positive");
        TrustRegionParams{tr_length_init, tr_length_min, tr_length_max, tr_success, std::max<std::size_t>(tr_failure, 1)}
            .validate();
        if (winsorize_k && !(*winsorize_k > 0.0)) throw ConfigError("winsorize_k must be positive");
        if (dim() > 64) throw ConfigError("dimension above 64 is not supported by the Sobol generator");
    }
};

/// Named method defaults for a problem of dimension `dim`.
inline ExperimentConfig preset(const std::string& name, std::size_t dim) {
    ExperimentConfig c;
    c.method = name;
    c.p_perturb = perturbation_probability(dim);
    if (name == "PseudoBO-RP") {
        c.h0_rp = 0.075;
        c.bootstrap = false;
    } else if (name == "PseudoBO-KR-Hyb" || name == "PseudoBO-KR-Hyb-TR") {
        c.h0_low = 0.05;
        c.h0_high = 0.2;
        c.h0_rp = 0.005;
        c.bootstrap = true;
        c.trust_region = name == "PseudoBO-KR-Hyb-TR";
    } else if (name != "RS") {
        throw ConfigError("unknown method preset: " + name);
    }
    return c;
}

// ---------------------------------------------------------------------------
// JSON round trip.

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["method"] = c.method;
    j["benchmark"] = c.benchmark;
    j["objective_command"] = c.objective_command;
    j["box_lower"] = c.box_lower;
    j["box_upper"] = c.box_upper;
    j["direction"] = to_string(c.direction);
    j["budget"] = c.budget;
    j["n_init"] = c.n_init;
    j["batch"] = c.batch;
    j["seeds"] = c.seeds;
    j["h0_low"] = c.h0_low;
    j["h0_high"] = c.h0_high;
    j["h0_rp"] = c.h0_rp;
    j["members"] = c.members;
    j["hidden_width"] = c.hidden_width;
    j["output_scale"] = c.output_scale;
    j["bootstrap"] = c.bootstrap;
    j["p_perturb"] = c.p_perturb;
    j["n_candidates"] = c.n_candidates;
    j["acquisition"] = c.acquisition;
    j["tau"] = c.tau;
    j["beta0"] = c.beta0;
    j["trust_region"] = c.trust_region;
    j["tr_length_init"] = c.tr_length_init;
    j["tr_length_min"] = c.tr_length_min;
    j["tr_length_max"] = c.tr_length_max;
    j["tr_success"] = c.tr_success;
    j["tr_failure"] = c.tr_failure;
    j["winsorize_k"] = c.winsorize_k ? json(*c.winsorize_k) : json(nullptr);
    j["record_time"] = c.record_time;
    j["out"] = c.out;
    return j;
}

inline Direction parse_direction(const std::string& s) {
    if (s == "min" || s == "minimize") return Direction::minimize;
    if (s == "max" || s == "maximize") return Direction::maximize;
    throw ConfigError("direction must be min or max, got " + s);
}

/// Reads a config: the method preset (for the problem's dimension) supplies
/// defaults, keys present in `j` override them. Unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const json known = to_json(ExperimentConfig{});
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown config key: " + key);
    try {
        ExperimentConfig probe;
        probe.method = j.value("method", probe.method);
        probe.benchmark = j.value("benchmark", probe.benchmark);
        probe.objective_command = j.value("objective_command", probe.objective_command);
        probe.box_lower = j.value("box_lower", probe.box_lower);
        probe.box_upper = j.value("box_upper", probe.box_upper);
        ExperimentConfig c = preset(probe.method, probe.dim());
        c.benchmark = probe.benchmark;
        c.objective_command = probe.objective_command;
        c.box_lower = probe.box_lower;
        c.box_upper = probe.box_upper;
        auto take = [&j](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        if (j.contains("direction")) c.direction = parse_direction(j.at("direction").get<std::string>());
        take("budget", c.budget);
        take("n_init", c.n_init);
        take("batch", c.batch);
        take("seeds", c.seeds);
        take("h0_low", c.h0_low);
        take("h0_high", c.h0_high);
        take("h0_rp", c.h0_rp);
        take("members", c.members);
        take("hidden_width", c.hidden_width);
        take("output_scale", c.output_scale);
        take("bootstrap", c.bootstrap);
        take("p_perturb", c.p_perturb);
        take("n_candidates", c.n_candidates);
        take("acquisition", c.acquisition);
        take("tau", c.tau);
        take("beta0", c.beta0);
        take("trust_region", c.trust_region);
        take("tr_length_init", c.tr_length_init);
        take("tr_length_min", c.tr_length_min);
        take("tr_length_max", c.tr_length_max);
        take("tr_success", c.tr_success);
        take("tr_failure", c.tr_failure);
        if (j.contains("winsorize_k")) {
            const auto& w = j.at("winsorize_k");
            c.winsorize_k = w.is_null() ? std::nullopt : std::optional<double>(w.get<double>());
        }
        take("record_time", c.record_time);
        take("out", c.out);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

/// "3", "0-9", "1,4,7" and combinations such as "0-2,5".
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string part;
    auto num = [&text](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("bad seed list: " + text);
        return static_cast<std::uint64_t>(std::stoull(s));
    };
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(num(part));
        } else {
            const auto a = num(part.substr(0, dash));
            const auto b = num(part.substr(dash + 1));
            if (b < a) throw ConfigError("bad seed range: " + part);
            for (auto s = a; s <= b; ++s) out.push_back(s);
        }
    }
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

// ---------------------------------------------------------------------------
// Method assembly.

struct MethodInstance {
    EWFunction ew;
    std::unique_ptr<CandidateGenerator> generator;
};

inline MethodInstance build_method(const ExperimentConfig& c, std::size_t dim, std::uint64_t seed) {
    MethodInstance m;
    RPConfig rp;
    rp.members = c.members;
    rp.hidden_width = c.hidden_width;
    rp.output_scale = c.output_scale;
    rp.h0.assign(dim, c.h0_rp);
    rp.bootstrap = c.bootstrap;
    rp.seed = Rng::substream(seed, Stream::prior_fields).next_u64();

    if (c.method == "PseudoBO-RP") {
        auto ens = std::make_shared<RPEnsemble>(rp);
        m.ew.sp = ens;
        m.ew.uq = ens;
    } else if (c.method == "PseudoBO-KR-Hyb" || c.method == "PseudoBO-KR-Hyb-TR") {
        m.ew.sp = std::make_shared<KernelRegression>(BandwidthSchedule::uniform(dim, c.h0_low, c.h0_high));
        m.ew.uq = std::make_shared<HybridUQ>(rp);
    } else {
        throw ConfigError("method has no EW model: " + c.method);
    }

    if (c.acquisition == "ei")
        m.ew.af = Acquisition::expected_improvement(c.tau);
    else if (c.acquisition == "pi")
        m.ew.af = Acquisition::probability_of_improvement(c.tau);
    else
        m.ew.af = Acquisition::upper_confidence_bound(c.tau, UCBSchedule{c.beta0, false});

    PerturbConfig perturb{c.p_perturb, c.n_candidates};
    if (c.trust_region || c.method == "PseudoBO-KR-Hyb-TR") {
        TrustRegionParams tr{c.tr_length_init, c.tr_length_min, c.tr_length_max, c.tr_success,
                             c.tr_failure ? c.tr_failure : TrustRegionParams::failure_tolerance_for(dim, c.batch)};
        m.generator = std::make_unique<TrustRegion>(dim, seed, perturb, tr);
    } else {
        m.generator = std::make_unique<SobolPerturbation>(dim, seed, perturb);
    }
    return m;
}

/// One seed of an experiment, in memory.
inline RunTrace run_seed(const ExperimentConfig& c, std::uint64_t seed, const Objective& objective) {
    c.validate();
    const Box box = c.box();
    std::optional<double> f_star;
    if (!c.external()) f_star = make_benchmark(c.benchmark).f_star;
    if (c.method == "RS") return random_search(objective, box, c.budget, seed, c.direction, f_star);
    auto m = build_method(c, box.dim(), seed);
    RunOptions opt;
    opt.budget = c.budget;
    opt.n_init = c.n_init;
    opt.batch = c.batch;
    opt.seed = seed;
    opt.direction = c.direction;
    opt.f_star = f_star;
    opt.winsorize_k = c.winsorize_k;
    return run(objective, box, m.ew, *m.generator, opt);
}

inline RunTrace run_seed(const ExperimentConfig& c, std::uint64_t seed) {
    return run_seed(c, seed, make_benchmark(c.benchmark).evaluator);
}

// ---------------------------------------------------------------------------
// Trace files.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("trace: bad number '" + s + "'");
    return v;
}

/// CSV: iter,x_0..x_{d-1},f,best,simple_regret,cum_regret,elapsed_s.
/// Empty cells mark absent regrets; elapsed_s is written only when
/// `record_time` is set so that repeated runs produce identical files.
inline void write_trace_csv(std::ostream& os, const RunTrace& trace, bool record_time) {
    os << "iter";
    for (std::size_t i = 0; i < trace.dim; ++i) os << ",x_" << i;
    os << ",f,best,simple_regret,cum_regret,elapsed_s\n";
    for (const auto& r : trace.iterations) {
        os << r.iter;
        for (double v : r.x) os << ',' << format_double(v);
        os << ',' << format_double(r.value) << ',' << format_double(r.best) << ',';
        if (r.simple_regret) os << format_double(*r.simple_regret);
        os << ',';
        if (r.cumulative_regret) os << format_double(*r.cumulative_regret);
        os << ',';
        if (record_time) os << format_double(r.elapsed_s);
        os << '\n';
    }
}

inline RunTrace read_trace_csv(std::istream& is, Direction direction = Direction::minimize) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trace: missing header");
    const auto header = split(line);
    if (header.size() < 7 || header.front() != "iter" || header.back() != "elapsed_s")
        throw ConfigError("trace: unexpected header");
    RunTrace trace;
    trace.dim = header.size() - 6;
    trace.direction = direction;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw ConfigError("trace: row width mismatch");
        TraceRecord r;
        r.iter = static_cast<std::size_t>(std::stoull(cells[0]));
        for (std::size_t i = 0; i < trace.dim; ++i) r.x.push_back(parse_double(cells[1 + i]));
        std::size_t k = 1 + trace.dim;
        r.value = parse_double(cells[k++]);
        r.best = parse_double(cells[k++]);
        if (!cells[k].empty()) r.simple_regret = parse_double(cells[k]);
        ++k;
        if (!cells[k].empty()) r.cumulative_regret = parse_double(cells[k]);
        ++k;
        r.elapsed_s = cells[k].empty() ? 0.0 : parse_double(cells[k]);
        trace.iterations.push_back(std::move(r));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Experiment driver.

struct SeedResult {
    std::uint64_t seed = 0;
    double final_best = 0.0;
    std::optional<double> final_simple_regret;
    std::size_t evaluations = 0;
    double wall_time_s = 0.0;
    std::string trace_file;
    std::string error;
};

struct ExperimentSummary {
    std::string method;
    std::string problem;
    std::vector<SeedResult> seeds;
    double median_final_best = 0.0;
    double q1_final_best = 0.0;
    double q3_final_best = 0.0;
    double total_wall_time_s = 0.0;
};

/// Median and quartiles (linear interpolation) of the finite values.
inline std::array<double, 3> quartiles(std::vector<double> v) {
    std::erase_if(v, [](double x) { return !std::isfinite(x); });
    if (v.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan};
    }
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75)};
}

inline json to_json(const ExperimentSummary& s) {
    json j;
    j["method"] = s.method;
    j["problem"] = s.problem;
    j["seeds"] = json::array();
    for (const auto& r : s.seeds) {
        json row;
        row["seed"] = r.seed;
        row["final_best"] = std::isfinite(r.final_best) ? json(r.final_best) : json(nullptr);
        row["final_simple_regret"] = r.final_simple_regret ? json(*r.final_simple_regret) : json(nullptr);
        row["evaluations"] = r.evaluations;
        row["wall_time_s"] = r.wall_time_s;
        row["trace_file"] = r.trace_file;
        if (!r.error.empty()) row["error"] = r.error;
        j["seeds"].push_back(row);
    }
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j["median_final_best"] = num(s.median_final_best);
    j["iqr_final_best"] = {num(s.q1_final_best), num(s.q3_final_best)};
    j["total_wall_time_s"] = s.total_wall_time_s;
    return j;
}

/// Concurrent seed jobs: PSEUDOBO_THREADS if set, else hardware concurrency.
inline std::size_t seed_concurrency() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PSEUDOBO_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v < 1) throw ConfigError("PSEUDOBO_THREADS must be a positive integer");
        n = static_cast<std::size_t>(v);
    }
    return n;
}

inline std::string trace_filename(const ExperimentConfig& c, std::uint64_t seed) {
    const std::string problem = c.external() ? "external" : c.benchmark;
    return c.method + "_" + problem + "_seed" + std::to_string(seed) + ".csv";
}

/// Runs every seed, writes one trace per seed and a JSON summary into c.out.
/// Failed seeds keep the trace of the evaluations completed before the failure;
/// the first failure is rethrown after the summary is written.
inline ExperimentSummary run_experiment(const ExperimentConfig& c) {
    c.validate();
    namespace fs = std::filesystem;
    fs::create_directories(c.out);
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentSummary summary;
    summary.method = c.method;
    summary.problem = c.external() ? c.objective_command : c.benchmark;
    summary.seeds.resize(c.seeds.size());
    std::vector<std::exception_ptr> errors(c.seeds.size());

    auto job = [&](std::size_t k) {
        const std::uint64_t seed = c.seeds[k];
        SeedResult& res = summary.seeds[k];
        res.seed = seed;
        res.trace_file = (fs::path(c.out) / trace_filename(c, seed)).string();
        const auto s0 = std::chrono::steady_clock::now();

        // Every evaluation is logged so a failing run still leaves its partial trace.
        RunTrace partial;
        partial.dim = c.dim();
        partial.direction = c.direction;
        std::unique_ptr<ExternalObjective> external;
        Objective base;
        if (c.external()) {
            external = std::make_unique<ExternalObjective>(c.objective_command);
            base = [&external](std::span<const double> x) { return (*external)(x); };
        } else {
            base = make_benchmark(c.benchmark).evaluator;
        }
        Objective logged = [&](std::span<const double> x) {
            const double y = base(x);
            partial.append(Point(x.begin(), x.end()), y,
                           std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count());
            return y;
        };

        RunTrace trace;
        try {
            trace = run_seed(c, seed, logged);
        } catch (...) {
            errors[k] = std::current_exception();
            trace = std::move(partial);
            if (!c.external()) {
                if (auto fs_ = make_benchmark(c.benchmark).f_star) trace = regret_metrics(std::move(trace), *fs_);
            }
            try {
                std::rethrow_exception(errors[k]);
            } catch (const std::exception& e) {
                res.error = e.what();
            } catch (...) {
                res.error = "unknown error";
            }
        }
        std::ofstream os(res.trace_file);
        write_trace_csv(os, trace, c.record_time);
        res.evaluations = trace.size();
        res.final_best = trace.final_best();
        if (!trace.iterations.empty()) res.final_simple_regret = trace.iterations.back().simple_regret;
        res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    };

    const std::size_t workers = std::min(seed_concurrency(), c.seeds.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < c.seeds.size(); ++k) job(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < c.seeds.size(); k = next++) job(k);
            });
    }

    std::vector<double> finals;
    for (const auto& r : summary.seeds) finals.push_back(r.final_best);
    const auto q = quartiles(finals);
    summary.q1_final_best = q[0];
    summary.median_final_best = q[1];
    summary.q3_final_best = q[2];
    summary.total_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream os(fs::path(c.out) / ("summary_" + c.method + "_" +
                                        (c.external() ? std::string("external") : c.benchmark) + ".json"));
    os << to_json(summary).dump(2) << '\n';

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return summary;
}

// ---------------------------------------------------------------------------
// Calibration study: train/validation/test split on a 1-D benchmark.

struct CalibrationConfig {
    std::string method = "KR-Hyb";  ///< GP | RP | KR-Hyb
    std::string function = "f3";
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t n_train = 20;
    std::size_t n_val = 10;
    std::size_t n_test = 150;
    double eps = 1e-6;
    double h0_low = 0.05;
    double h0_high = 0.2;
    double h0_rp_hybrid = 0.005;
    double h0_rp = 0.075;
    std::size_t members = 20;
    std::string out;  ///< report path; empty for none

    bool operator==(const CalibrationConfig&) const = default;

    void validate() const {
        if (method != "GP" && method != "RP" && method != "KR-Hyb")
            throw ConfigError("calibration method must be GP, RP or KR-Hyb, got " + method);
        if (function != "f1" && function != "f2" && function != "f3")
            throw ConfigError("calibration function must be f1, f2 or f3, got " + function);
        if (seeds.empty()) throw ConfigError("at least one seed is required");
        if (n_train < 2 || n_val < 1 || n_test < 1) throw ConfigError("calibration split sizes too small");
        if (!(eps > 0.0)) throw ConfigError("eps must be positive");
        if (members < 2) throw ConfigError("members must be >= 2");
    }
};

inline std::string canonical_calibration_method(const std::string& m) {
    if (m == "KR+Hybrid" || m == "KR+Hyb" || m == "KR-Hybrid") return "KR-Hyb";
    return m;
}

inline json to_json(const CalibrationConfig& c) {
    return json{{"method", c.method},   {"function", c.function}, {"seeds", c.seeds},
                {"n_train", c.n_train}, {"n_val", c.n_val},       {"n_test", c.n_test},
                {"eps", c.eps},         {"h0_low", c.h0_low},     {"h0_high", c.h0_high},
                {"h0_rp_hybrid", c.h0_rp_hybrid}, {"h0_rp", c.h0_rp}, {"members", c.members},
                {"out", c.out}};
}

inline CalibrationConfig calibration_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("calibration config must be a JSON object");
    const json known = to_json(CalibrationConfig{});
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown calibration config key: " + key);
    CalibrationConfig c;
    try {
        auto take = [&j](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        take("method", c.method);
        c.method = canonical_calibration_method(c.method);
        take("function", c.function);
        take("seeds", c.seeds);
        take("n_train", c.n_train);
        take("n_val", c.n_val);
        take("n_test", c.n_test);
        take("eps", c.eps);
        take("h0_low", c.h0_low);
        take("h0_high", c.h0_high);
        take("h0_rp_hybrid", c.h0_rp_hybrid);
        take("h0_rp", c.h0_rp);
        take("members", c.members);
        take("out", c.out);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("calibration config: ") + e.what());
    }
    return c;
}

/// Uniform train/validation/test samples from the benchmark's domain.
inline CalibrationSplit make_calibration_split(const Benchmark& b, std::uint64_t seed, std::size_t n_train,
                                               std::size_t n_val, std::size_t n_test) {
    Rng rng = Rng::substream(seed, Stream::calibration_data);
    auto draw = [&](std::size_t count) {
        std::vector<Sample> out;
        for (std::size_t i = 0; i < count; ++i) {
            Point x(b.dim());
            for (std::size_t k = 0; k < b.dim(); ++k) x[k] = rng.uniform(b.box.lower()[k], b.box.upper()[k]);
            const double y = b(x);
            out.push_back({std::move(x), y});
        }
        return out;
    };
    CalibrationSplit s;
    s.train = draw(n_train);
    s.validation = draw(n_val);
    s.test = draw(n_test);
    return s;
}

struct CalibrationRow {
    std::string method;
    std::string function;
    std::uint64_t seed = 0;
    CalibrationResult result;
};

struct CalibrationReport {
    std::vector<CalibrationRow> rows;
    double ccr_mean = 0.0, ccr_std = 0.0;
    double width_mean = 0.0, width_std = 0.0;
};

/// Fits the configured SP/UQ pair on the training split and calibrates it.
inline CalibrationResult calibrate_once(const CalibrationConfig& c, const Benchmark& b, std::uint64_t seed) {
    const auto split = make_calibration_split(b, seed, c.n_train, c.n_val, c.n_test);
    Dataset train(b.dim(), Direction::maximize);
    for (const auto& s : split.train) train.add(normalize(s.x, b.box), s.y);

    const std::size_t d = b.dim();
    std::shared_ptr<Surrogate> sp;
    std::shared_ptr<UncertaintyQuantifier> uq;
    RPConfig rp;
    rp.members = c.members;
    rp.seed = Rng::substream(seed, Stream::prior_fields).next_u64();
    if (c.method == "GP") {
        auto gp = std::make_shared<GaussianProcess>();
        sp = gp;
        uq = gp;
    } else if (c.method == "RP") {
        rp.h0.assign(d, c.h0_rp);
        rp.bootstrap = false;
        auto ens = std::make_shared<RPEnsemble>(rp);
        sp = ens;
        uq = ens;
    } else {
        rp.h0.assign(d, c.h0_rp_hybrid);
        rp.bootstrap = true;
        sp = std::make_shared<KernelRegression>(BandwidthSchedule::uniform(d, c.h0_low, c.h0_high));
        uq = std::make_shared<HybridUQ>(rp);
    }
    sp->fit(train);
    uq->fit(train);
    auto sp_raw = [&](const Point& x) { return train.to_value(sp->predict(normalize(x, b.box))); };
    auto uq_raw = [&](const Point& x) { return train.value_scale() * uq->stddev(normalize(x, b.box)); };
    return ccr_report(sp_raw, uq_raw, split, c.eps);
}

inline std::string plus_minus(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f (±%.2f)", mean, sd);
    return buf;
}

inline json to_json(const CalibrationReport& r) {
    json j;
    j["rows"] = json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"method", row.method},
                             {"function", row.function},
                             {"seed", row.seed},
                             {"ccr", row.result.ccr},
                             {"width", row.result.mean_width},
                             {"lambda_val", row.result.lambda_val}});
    j["aggregate"] = {{"ccr_mean", r.ccr_mean},
                      {"ccr_std", r.ccr_std},
                      {"width_mean", r.width_mean},
                      {"width_std", r.width_std},
                      {"ccr", plus_minus(r.ccr_mean, r.ccr_std)},
                      {"width", plus_minus(r.width_mean, r.width_std)}};
    return j;
}

/// Per-seed rows plus mean and population std across seeds.
inline CalibrationReport run_calibration(CalibrationConfig c) {
    c.method = canonical_calibration_method(c.method);
    c.validate();
    const Benchmark b = make_benchmark(c.function);
    CalibrationReport r;
    for (auto seed : c.seeds) r.rows.push_back({c.method, c.function, seed, calibrate_once(c, b, seed)});
    auto mean_std = [&](auto field) {
        double m = 0.0;
        for (const auto& row : r.rows) m += field(row.result);
        m /= static_cast<double>(r.rows.size());
        double ss = 0.0;
        for (const auto& row : r.rows) ss += (field(row.result) - m) * (field(row.result) - m);
        return std::pair{m, std::sqrt(ss / static_cast<double>(r.rows.size()))};
    };
    std::tie(r.ccr_mean, r.ccr_std) = mean_std([](const CalibrationResult& x) { return x.ccr; });
    std::tie(r.width_mean, r.width_std) = mean_std([](const CalibrationResult& x) { return x.mean_width; });
    if (!c.out.empty()) {
        const std::filesystem::path p(c.out);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream os(p);
        os << to_json(r).dump(2) << '\n';
    }
    return r;
}

}  // namespace pseudobo
