#include "tribell/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "tribell/closedform.hpp"
#include "tribell/config.hpp"
#include "tribell/rng.hpp"

namespace tribell::cli {

namespace {

/// Nominal angles (degrees) and measured purities of the reference data set.
constexpr std::array<std::pair<double, double>, 10> kReferenceRows = {{{45, 0.967},
                                                                       {40, 0.966},
                                                                       {36, 0.955},
                                                                       {30, 0.965},
                                                                       {25, 0.971},
                                                                       {21, 0.961},
                                                                       {17, 0.971},
                                                                       {10, 0.981},
                                                                       {5, 0.984},
                                                                       {0, 0.994}}};

/// Runs f(0..n-1) on a bounded worker pool; results and the first (lowest
/// index) exception are reported in index order.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
    std::vector<std::optional<T>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        results[i].emplace(f(i));
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*results[i]));
    }
    return out;
}

/// Re-throws with a stage label, keeping the error category.
template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw DomainError(name + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(name + ": " + e.what());
    } catch (const EstimationError& e) {
        throw EstimationError(name + ": " + e.what());
    } catch (const IdentifiabilityError& e) {
        throw IdentifiabilityError(name + ": " + e.what());
    }
}

class CsvWriter {
public:
    CsvWriter(const std::string& command, const Json& params) {
        text_ = "# tribell " + command + " manifest " + manifest_hash(command, params) + "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }
    std::string str() const { return text_; }

private:
    std::string text_;
};

std::string fmt(double v) { return format_number(v); }

double theta_rad(double deg) {
    if (!(deg >= 0.0 && deg <= 45.0)) {
        throw DomainError("theta " + format_number(deg) + " deg outside [0, 45]");
    }
    return deg2rad(deg);
}

std::vector<double> grid_from(const Json& params) {
    return params.at("thetas_deg").get<std::vector<double>>();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

OptimizerConfig optimizer_from(const Json& params) {
    OptimizerConfig cfg = optimizer_config_from_json(params.value("optimizer", Json::object()));
    cfg.seed = params.value("seed", cfg.seed);
    return cfg;
}

std::string cmd_curves(const Json& params) {
    const auto thetas = grid_from(params);
    const auto rows = parallel_map<std::vector<std::string>>(thetas.size(), [&](std::size_t i) {
        const double th = theta_rad(thetas[i]);
        std::vector<std::string> row{fmt(thetas[i])};
        for (auto id : kAllBuiltins) row.push_back(fmt(i_max_gghz(id, th)));
        return row;
    });
    CsvWriter csv("curves", params);
    csv.row({"theta_deg", "I10_max", "I96_max", "I99_max", "I185_max"});
    for (const auto& r : rows) csv.row(r);
    return csv.str();
}

std::string cmd_pmin(const Json& params) {
    const auto thetas = grid_from(params);
    std::optional<double> vis;
    if (params.contains("purity") && !params.at("purity").is_null()) {
        vis = visibility_from_purity(params.at("purity").get<double>());
    }
    CsvWriter csv("pmin", params);
    std::vector<std::string> header{"theta_deg", "p_min", "active_inequality"};
    if (vis) header.push_back("p_min_corrected");
    csv.row(header);
    for (double deg : thetas) {
        const PMin pm = p_min_gghz(theta_rad(deg));
        std::vector<std::string> row{fmt(deg), fmt(pm.p), to_string(pm.active)};
        if (vis) row.push_back(*vis > 0.0 ? fmt(pm.p / *vis) : "inf");
        csv.row(row);
    }
    return csv.str();
}

std::string cmd_table2(const Json& params) {
    const auto rows = params.at("rows").get<std::vector<std::pair<double, double>>>();
    const double exposure = params.at("exposure").get<double>();
    const auto seed = params.at("seed").get<std::uint64_t>();
    const bool exact = params.at("exact").get<bool>();
    const int resamples = params.at("resamples").get<int>();

    const auto cells = parallel_map<std::vector<std::string>>(rows.size(), [&](std::size_t r) {
        const auto [deg, purity] = rows[r];
        const double th = theta_rad(deg);
        const double vis = visibility_from_purity(purity);
        const auto rho = depolarize(make_gghz(th), vis);
        const std::uint64_t row_seed = substream_seed(seed, r);
        std::vector<std::string> out{fmt(deg), fmt(purity), fmt(vis)};
        std::vector<std::string> measured;
        for (std::size_t k = 0; k < kAllBuiltins.size(); ++k) {
            const BuiltinId id = kAllBuiltins[k];
            out.push_back(fmt(vis * i_max_gghz(id, th)));
            const auto ineq = builtin(id);
            const auto m = measure_inequality(rho, ineq, optimal_settings_gghz(id, th), exposure,
                                              substream_seed(row_seed, k), exact);
            const auto mc = monte_carlo_errors(m.run, ineq, resamples,
                                               substream_seed(row_seed, kAllBuiltins.size() + k));
            measured.push_back(fmt(m.value));
            measured.push_back(fmt(mc.stddev));
        }
        out.insert(out.end(), measured.begin(), measured.end());
        return out;
    });
    CsvWriter csv("table2", params);
    std::vector<std::string> header{"theta_deg", "purity", "p_tilde"};
    for (auto id : kAllBuiltins) header.push_back("theory_" + to_string(id));
    for (auto id : kAllBuiltins) {
        header.push_back("measured_" + to_string(id));
        header.push_back("mc_error_" + to_string(id));
    }
    csv.row(header);
    for (const auto& c : cells) csv.row(c);
    return csv.str();
}

std::vector<CountsRecord> resample(const std::vector<CountsRecord>& data, std::uint64_t seed) {
    auto gen = std::mt19937_64(seed);
    std::vector<CountsRecord> out = data;
    for (auto& rec : out) {
        for (double& c : rec.counts) {
            if (c > 0.0) c = static_cast<double>(std::poisson_distribution<long long>(c)(gen));
        }
    }
    return out;
}

double stddev(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::string cmd_experiment(const Json& params) {
    const double deg = params.at("theta_deg").get<double>();
    const double p = params.at("p").get<double>();
    const double exposure = params.at("exposure").get<double>();
    const auto seed = params.at("seed").get<std::uint64_t>();
    const bool exact = params.at("exact").get<bool>();
    const int resamples = params.at("resamples").get<int>();
    const int mc_samples = params.at("mc_samples").get<int>();
    const bool reoptimize = params.at("reoptimize_per_sample").get<bool>();
    const OptimizerConfig cfg = optimizer_from(params);
    const double th = theta_rad(deg);

    const auto rho = stage("prepare", [&] { return depolarize(make_gghz(th), p); });
    const auto set = TomographySet::pauli();
    const auto data = stage("tomography", [&] {
        return exact ? expected_tomography(rho, set, exposure)
                     : simulate_tomography(rho, set, exposure, substream_seed(seed, 0));
    });
    const auto rec = stage("reconstruction", [&] { return reconstruct_ml(data); });
    const auto report = stage("state report", [&] { return state_report(rec); });
    const auto optimized =
        stage("optimization", [&] { return maximize_on_reconstruction(rec.rho, cfg); });

    // Spread of the optimized values over Poisson resamples of the tomography data.
    std::vector<std::vector<double>> spread(kAllBuiltins.size());
    if (!exact && mc_samples > 0) {
        const auto samples = stage("reconstruction monte carlo", [&] {
            return parallel_map<std::vector<double>>(mc_samples, [&](std::size_t k) {
                const auto sample = reconstruct_ml(resample(data, substream_seed(seed, 100 + k)));
                std::vector<double> values;
                for (std::size_t i = 0; i < kAllBuiltins.size(); ++i) {
                    const auto ineq = builtin(kAllBuiltins[i]);
                    values.push_back(reoptimize ? maximize(sample.rho, ineq, cfg).value
                                                : evaluate(sample.rho, ineq, optimized[i].settings));
                }
                return values;
            });
        });
        for (const auto& s : samples) {
            for (std::size_t i = 0; i < s.size(); ++i) spread[i].push_back(s[i]);
        }
    }

    Json optimized_json = Json::array();
    for (std::size_t i = 0; i < optimized.size(); ++i) {
        Json o = to_json(optimized[i]);
        o["mc_stddev"] = stddev(spread[i]);
        optimized_json.push_back(o);
    }

    Json direct = Json::array();
    stage("direct measurement", [&] {
        for (std::size_t i = 0; i < kAllBuiltins.size(); ++i) {
            const auto ineq = builtin(kAllBuiltins[i]);
            const auto m = measure_inequality(rho, ineq, optimal_settings_gghz(kAllBuiltins[i], th),
                                              exposure, substream_seed(substream_seed(seed, 1), i),
                                              exact);
            Json d = {{"inequality", ineq.name()},
                      {"value", m.value},
                      {"stderr", m.stderr_value},
                      {"settings", to_json(m.run.settings)}};
            if (!exact) {
                const auto mc = monte_carlo_errors(m.run, ineq, resamples,
                                                   substream_seed(substream_seed(seed, 2), i));
                d["mc_mean"] = mc.mean;
                d["mc_stddev"] = mc.stddev;
            }
            direct.push_back(d);
        }
        return 0;
    });

    // Populations of |000> and |111> in the zzz record give the angle estimate.
    const CountsRecord& zzz = data.back();
    const auto est = stage("angle estimate", [&] { return estimate_theta(zzz.counts[0], zzz.counts[7]); });

    Json bundle = {{"command", "experiment"},
                   {"manifest", manifest_hash("experiment", params)},
                   {"params", params},
                   {"theta_estimate_deg", rad2deg(est.theta)},
                   {"theta_estimate_boundary", est.boundary},
                   {"state_report", to_json(report)},
                   {"reconstruction", to_json(rec)},
                   {"optimized", optimized_json},
                   {"direct", direct}};
    return dump(bundle);
}

std::string cmd_tomo(const Json& params) {
    const double exposure = params.at("exposure").get<double>();
    const auto seed = params.at("seed").get<std::uint64_t>();
    const bool exact = params.at("exact").get<bool>();
    const bool as_json = params.at("format").get<std::string>() == "json";

    struct Row {
        std::string theta;
        std::string p;
        DensityMatrix3Q rho;
    };
    std::vector<Row> inputs;
    if (params.contains("state")) {
        inputs.push_back({"", "", state_from_json(params.at("state"))});
    } else {
        const double p = params.at("p").get<double>();
        for (double deg : params.at("thetas_deg").get<std::vector<double>>()) {
            inputs.push_back({fmt(deg), fmt(p), depolarize(make_gghz(theta_rad(deg)), p)});
        }
    }
    const auto set = TomographySet::pauli();
    const auto results = parallel_map<ReconstructionResult>(inputs.size(), [&](std::size_t i) {
        const auto data = exact ? expected_tomography(inputs[i].rho, set, exposure)
                                : simulate_tomography(inputs[i].rho, set, exposure,
                                                      substream_seed(seed, i));
        return reconstruct_ml(data);
    });
    if (as_json) {
        Json out = {{"command", "tomo"}, {"manifest", manifest_hash("tomo", params)}};
        Json list = Json::array();
        for (const auto& r : results) {
            Json j = to_json(r);
            j["state_report"] = to_json(state_report(r));
            list.push_back(j);
        }
        out["reconstructions"] = list;
        return dump(out);
    }
    CsvWriter csv("tomo", params);
    csv.row({"theta_deg", "p", "theta_opt_deg", "fidelity", "purity", "f_max", "n_tri",
             "iterations", "converged"});
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto rep = state_report(results[i]);
        csv.row({inputs[i].theta, inputs[i].p, fmt(rad2deg(rep.theta_opt)), fmt(rep.fidelity),
                 fmt(rep.purity), fmt(rep.f_max), fmt(rep.n_tri),
                 std::to_string(results[i].iterations), results[i].converged ? "true" : "false"});
    }
    return csv.str();
}

std::string cmd_optimize(const Json& params) {
    const auto rho = state_from_json(params.at("state"));
    const OptimizerConfig cfg = optimizer_from(params);
    Json reports = Json::array();
    for (const Json& j : params.at("inequalities")) {
        reports.push_back(to_json(maximize(rho, inequality_from_json(j), cfg)));
    }
    return dump({{"command", "optimize"},
                 {"manifest", manifest_hash("optimize", params)},
                 {"optimizer", to_json(cfg)},
                 {"reports", reports}});
}

std::string cmd_lhv_check(const Json& params) {
    CsvWriter csv("lhv-check", params);
    csv.row({"inequality", "lhv_bound", "lhv_bound_exact", "normalized"});
    for (const Json& j : params.at("inequalities")) {
        const auto ineq = inequality_from_json(j, false);
        const Rational exact = lhv_bound_exact(ineq);
        csv.row({ineq.name(), fmt(exact.value()),
                 std::to_string(exact.num()) + "/" + std::to_string(exact.den()),
                 exact == Rational(1) ? "true" : "false"});
    }
    return csv.str();
}

// ---- argument resolution ----

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    double exposure = 1e6;
    bool exact = false;
    std::string config;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* exposure_opt = nullptr;
    CLI::Option* exact_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
    c.seed_opt = sub->add_option("--seed", c.seed, "Master random seed");
    sub->add_option("--out", c.out, "Output file (default: standard output)");
    c.exposure_opt = sub->add_option("--exposure", c.exposure, "Expected counts per setting triple");
    c.exact_opt = sub->add_flag("--exact", c.exact, "Use exact expected counts instead of sampling");
    sub->add_option("--config", c.config, "TOML or JSON configuration file");
}

/// Flag value if given on the command line, else config value, else default.
template <typename T>
T pick(const CLI::Option* opt, const T& flag, const Json& config, const char* key) {
    if (opt != nullptr && opt->count() > 0) return flag;
    if (config.contains(key)) return config.at(key).get<T>();
    return flag;
}

std::vector<double> resolve_grid(const std::vector<double>& list, double lo, double hi,
                                 double step) {
    if (!list.empty()) return list;
    if (!(step > 0.0) || hi < lo) throw DomainError("theta grid: need step > 0 and max >= min");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

Json resolve_inequality(const std::string& spec, bool check_bound) {
    if (std::filesystem::exists(spec)) {
        return to_json(inequality_from_json(read_json_file(spec), check_bound));
    }
    return to_json(builtin(spec));
}

Json optimizer_block(const Json& config, int multistart, const CLI::Option* multistart_opt) {
    Json block = config.value("optimizer", Json::object());
    if (multistart_opt != nullptr && multistart_opt->count() > 0) block["multistart_count"] = multistart;
    // Validate early so a bad config fails before any work.
    optimizer_config_from_json(block);
    return block;
}

struct Invocation {
    std::string command;
    Json params;
    std::string out;
};

void write_outputs(const Invocation& inv, const std::string& text, double seconds,
                   std::ostream& out) {
    if (inv.out.empty()) {
        out << text;
        return;
    }
    write_text_file(inv.out, text);
    Json manifest = {{"tool", "tribell"},
                     {"version", std::string(kVersion)},
                     {"command", inv.command},
                     {"params", inv.params},
                     {"seed", inv.params.value("seed", std::uint64_t{0})},
                     {"hash", manifest_hash(inv.command, inv.params)},
                     {"outputs", Json::array({inv.out})},
                     {"duration_seconds", seconds}};
    write_text_file(manifest_path_for(inv.out), dump(manifest));
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
    if (dynamic_cast<const ConvergenceError*>(&e) != nullptr) return kExitConvergence;
    if (dynamic_cast<const DomainError*>(&e) != nullptr ||
        dynamic_cast<const LookupError*>(&e) != nullptr ||
        dynamic_cast<const EstimationError*>(&e) != nullptr ||
        dynamic_cast<const IdentifiabilityError*>(&e) != nullptr) {
        return kExitDomain;
    }
    return kExitFailure;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 6);
    return std::string(buf, r.ptr);
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string manifest_hash(const std::string& command, const Json& params) {
    const Json canonical = {{"command", command}, {"params", params}, {"version", std::string(kVersion)}};
    const std::uint64_t h = fnv1a64(canonical.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string manifest_path_for(const std::string& output_path) {
    return output_path + ".manifest.json";
}

std::string execute(const std::string& command, const Json& params) {
    if (command == "curves") return cmd_curves(params);
    if (command == "pmin") return cmd_pmin(params);
    if (command == "table2") return cmd_table2(params);
    if (command == "experiment") return cmd_experiment(params);
    if (command == "tomo") return cmd_tomo(params);
    if (command == "optimize") return cmd_optimize(params);
    if (command == "lhv-check") return cmd_lhv_check(params);
    throw DomainError("unknown command '" + command + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tripartite Bell-inequality analysis and synthetic experiments", "tribell"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::vector<double> thetas;
    double theta_min = 0.0, theta_max = 45.0, theta_step = 1.0;
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--thetas", thetas, "Explicit angle list in degrees")->delimiter(',');
        sub->add_option("--theta-min", theta_min, "Grid start in degrees");
        sub->add_option("--theta-max", theta_max, "Grid end in degrees");
        sub->add_option("--theta-step", theta_step, "Grid step in degrees");
    };

    std::map<std::string, Common> commons;
    auto* curves = app.add_subcommand("curves", "Maximal values of the four inequalities on gGHZ states");
    add_common(curves, commons["curves"]);
    add_grid(curves);

    std::optional<double> purity;
    auto* pmin = app.add_subcommand("pmin", "Threshold visibility of gGHZ states");
    add_common(pmin, commons["pmin"]);
    add_grid(pmin);
    pmin->add_option("--purity", purity, "Purity for the corrected threshold column");

    std::vector<double> purities;
    auto* table2 = app.add_subcommand("table2", "Depolarized maxima with synthetic measurements");
    add_common(table2, commons["table2"]);
    table2->add_option("--thetas", thetas, "Angles in degrees")->delimiter(',');
    table2->add_option("--purities", purities, "Purities, one per angle")->delimiter(',');
    int resamples = 200;
    CLI::Option* resamples_opt = nullptr;

    double theta = 45.0;
    double p = 1.0;
    int mc_samples = 10;
    bool fixed_settings = false;
    int multistart = 64;
    CLI::Option* theta_opt_flag = nullptr;
    CLI::Option* p_opt = nullptr;
    CLI::Option* mc_opt = nullptr;
    CLI::Option* fixed_opt = nullptr;
    CLI::Option* multistart_opt = nullptr;
    resamples_opt = table2->add_option("--resamples", resamples, "Monte Carlo resamples per value");

    auto* experiment = app.add_subcommand("experiment", "End-to-end synthetic experiment");
    add_common(experiment, commons["experiment"]);
    theta_opt_flag = experiment->add_option("--theta", theta, "State angle in degrees");
    p_opt = experiment->add_option("--p", p, "White-noise visibility");
    auto* exp_resamples = experiment->add_option("--resamples", resamples, "Monte Carlo resamples for direct measurements");
    mc_opt = experiment->add_option("--mc-samples", mc_samples, "Tomography resamples for optimized-value errors");
    fixed_opt = experiment->add_flag("--fixed-settings", fixed_settings,
                                     "Evaluate resamples at the settings found on the reconstruction instead of re-optimizing");
    auto* exp_multistart = experiment->add_option("--multistart", multistart, "Optimizer starts");

    std::string state_file;
    std::string format = "csv";
    auto* tomo = app.add_subcommand("tomo", "Tomography and maximum-likelihood reconstruction");
    add_common(tomo, commons["tomo"]);
    tomo->add_option("--thetas", thetas, "gGHZ angles in degrees")->delimiter(',');
    auto* tomo_p = tomo->add_option("--p", p, "White-noise visibility");
    tomo->add_option("--state", state_file, "State JSON file instead of gGHZ angles");
    tomo->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string family = "gghz";
    double angle = 45.0;
    std::vector<std::string> inequality_specs;
    auto* optimize = app.add_subcommand("optimize", "Maximize inequalities over measurement settings");
    add_common(optimize, commons["optimize"]);
    optimize->add_option("--state", state_file, "State JSON file");
    optimize->add_option("--family", family, "gghz or ms")->check(CLI::IsMember({"gghz", "ms"}));
    optimize->add_option("--angle", angle, "Family angle in degrees");
    auto* opt_p = optimize->add_option("--p", p, "White-noise visibility");
    optimize->add_option("--inequality", inequality_specs, "Builtin name or JSON file (repeatable)");
    multistart_opt = optimize->add_option("--multistart", multistart, "Optimizer starts");

    auto* lhv = app.add_subcommand("lhv-check", "Local bounds by deterministic-strategy enumeration");
    add_common(lhv, commons["lhv-check"]);
    lhv->add_option("--inequality", inequality_specs, "Builtin name or JSON file (repeatable)");

    std::string manifest_file;
    std::string replay_out;
    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
    replay->add_option("manifest", manifest_file, "Manifest JSON written by a previous run")->required();
    replay->add_option("--out", replay_out, "Output file (default: the manifest's output)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitDomain;
    }

    try {
        Invocation inv;
        Common common;
        if (!replay->parsed()) common = commons.at(app.get_subcommands().front()->get_name());
        Json config = Json::object();
        if (!common.config.empty()) config = load_config_file(common.config);
        const auto seed = pick(common.seed_opt, common.seed, config, "seed");
        const auto exposure = pick(common.exposure_opt, common.exposure, config, "exposure");
        const auto exact = pick(common.exact_opt, common.exact, config, "exact");
        if (!(exposure > 0.0)) throw DomainError("--exposure must be positive");
        inv.out = common.out;

        if (replay->parsed()) {
            const Json manifest = read_json_file(manifest_file);
            inv.command = manifest.at("command").get<std::string>();
            inv.params = manifest.at("params");
            inv.out = replay_out.empty() ? manifest.at("outputs").at(0).get<std::string>() : replay_out;
        } else if (curves->parsed() || pmin->parsed()) {
            inv.command = curves->parsed() ? "curves" : "pmin";
            inv.params["thetas_deg"] = resolve_grid(thetas, theta_min, theta_max, theta_step);
            if (pmin->parsed()) {
                inv.params["purity"] = purity ? Json(*purity) : config.value("purity", Json(nullptr));
            }
        } else if (table2->parsed()) {
            inv.command = "table2";
            std::vector<std::pair<double, double>> rows;
            if (thetas.empty() && purities.empty()) {
                rows.assign(kReferenceRows.begin(), kReferenceRows.end());
            } else {
                if (thetas.size() != purities.size()) {
                    throw DomainError("--thetas and --purities must have the same length");
                }
                for (std::size_t i = 0; i < thetas.size(); ++i) rows.emplace_back(thetas[i], purities[i]);
            }
            inv.params = {{"rows", rows},
                          {"exposure", exposure},
                          {"seed", seed},
                          {"exact", exact},
                          {"resamples", pick(resamples_opt, resamples, config, "resamples")}};
            if (inv.params["resamples"].get<int>() < 2) throw DomainError("--resamples must be at least 2");
        } else if (experiment->parsed()) {
            inv.command = "experiment";
            inv.params = {{"theta_deg", pick(theta_opt_flag, theta, config, "theta")},
                          {"p", pick(p_opt, p, config, "p")},
                          {"exposure", exposure},
                          {"seed", seed},
                          {"exact", exact},
                          {"resamples", pick(exp_resamples, resamples, config, "resamples")},
                          {"mc_samples", pick(mc_opt, mc_samples, config, "mc_samples")},
                          {"reoptimize_per_sample",
                           fixed_opt->count() > 0 ? false : config.value("reoptimize_per_sample", true)},
                          {"optimizer", optimizer_block(config, multistart, exp_multistart)}};
            if (inv.params["resamples"].get<int>() < 2) throw DomainError("--resamples must be at least 2");
            if (inv.params["mc_samples"].get<int>() < 0) throw DomainError("--mc-samples must be non-negative");
        } else if (tomo->parsed()) {
            inv.command = "tomo";
            inv.params = {{"exposure", exposure}, {"seed", seed}, {"exact", exact}, {"format", format}};
            if (!state_file.empty()) {
                inv.params["state"] = to_json(state_from_json(read_json_file(state_file)));
            } else {
                inv.params["thetas_deg"] = thetas.empty() ? std::vector<double>{45.0} : thetas;
                inv.params["p"] = pick(tomo_p, p, config, "p");
            }
        } else if (optimize->parsed()) {
            inv.command = "optimize";
            Json state;
            if (!state_file.empty()) {
                state = to_json(state_from_json(read_json_file(state_file)));
            } else {
                const double a = deg2rad(angle);
                const PureState3Q psi = family == "ms" ? make_ms(a) : make_gghz(a);
                state = to_json(depolarize(psi, pick(opt_p, p, config, "p")));
            }
            Json ineqs = Json::array();
            if (inequality_specs.empty()) {
                for (auto id : kAllBuiltins) ineqs.push_back(to_json(builtin(id)));
            } else {
                for (const auto& s : inequality_specs) ineqs.push_back(resolve_inequality(s, true));
            }
            inv.params = {{"state", state},
                          {"inequalities", ineqs},
                          {"seed", seed},
                          {"optimizer", optimizer_block(config, multistart, multistart_opt)}};
        } else if (lhv->parsed()) {
            inv.command = "lhv-check";
            Json ineqs = Json::array();
            if (inequality_specs.empty()) {
                for (auto id : kAllBuiltins) ineqs.push_back(to_json(builtin(id)));
            } else {
                for (const auto& s : inequality_specs) ineqs.push_back(resolve_inequality(s, false));
            }
            inv.params = {{"inequalities", ineqs}};
        }

        const auto t0 = std::chrono::steady_clock::now();
        const std::string text = execute(inv.command, inv.params);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(inv, text, seconds, out);
        return kExitOk;
    } catch (const std::exception& e) {
        err << "tribell: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace tribell::cli
