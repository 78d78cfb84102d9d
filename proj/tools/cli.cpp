#include "cli.hpp"

#include "lionmdp/analysis.hpp"
#include "lionmdp/config.hpp"
#include "lionmdp/format.hpp"
#include "lionmdp/lion_model.hpp"
#include "lionmdp/mdp.hpp"
#include "lionmdp/simulator.hpp"
#include "lionmdp/validation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace lionmdp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* const kParamKeys[] = {"alpha", "beta", "lambda", "m", "M", "C_s", "C_h", "C_L", "C_H", "G", "K", "gamma"};

/// Model parameters from defaults, then the config file, then individual flags.
struct ParamOptions {
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "flat key = value parameter file");
        for (const char* key : kParamKeys)
            options[key] = app.add_option("--" + std::string(key), flags[key], std::string("model parameter ") + key);
    }

    LionParams resolve() const {
        LionParams p;
        if (!config_path.empty()) apply_key_values(p, read_key_values_file(config_path));
        KeyValues overrides;
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) overrides[key] = flags.at(key);
        apply_key_values(p, overrides);
        return p;
    }
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    return env && *env ? fs::path(env) : fs::current_path();
}

fs::path resolve_output(const std::string& given, const std::string& fallback) {
    if (!given.empty()) return fs::path(given);
    return output_dir() / fallback;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

fs::path manifest_path(const fs::path& primary) {
    auto p = primary;
    p.replace_extension();
    return fs::path(p.string() + ".manifest.json");
}

void write_manifest(const std::string& subcommand, const LionParams& params, const json& settings,
                    std::optional<std::uint64_t> seed, const std::vector<fs::path>& outputs) {
    json m;
    m["subcommand"] = subcommand;
    m["tool_version"] = kVersion;
    m["params"] = to_json(params);
    m["settings"] = settings;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    auto list = json::array();
    for (const auto& o : outputs) list.push_back(o.string());
    m["outputs"] = list;
    write_file(manifest_path(outputs.front()), m.dump(2) + "\n");
}

LionParams checked(const ParamOptions& po) {
    auto p = po.resolve();
    require_valid(p);
    return p;
}

// ---- solve ---------------------------------------------------------------

struct SolveOptions {
    ParamOptions params;
    double epsilon = kDefaultEpsilon;
    std::size_t max_iter = kDefaultMaxIter;
    std::string out;
    bool dump_model = false;
};

int cmd_solve(const SolveOptions& o, std::ostream& out) {
    const auto p = checked(o.params);
    const auto model = build_mdp(p);
    const auto solved = value_iteration(model, o.epsilon, o.max_iter);

    json report;
    report["params"] = to_json(p);
    report["solver"] = {{"epsilon", o.epsilon},
                        {"max_iter", o.max_iter},
                        {"iterations", solved.report.iterations},
                        {"final_sup_norm_delta", solved.report.final_sup_norm_delta},
                        {"converged", solved.report.converged}};
    auto states = json::array();
    out << "state  action  physical  transport  value\n";
    for (std::size_t s = 0; s < model.state_count(); ++s) {
        const auto a = static_cast<LionAction>(solved.policy[s]);
        states.push_back({{"state", model.state_names[s]},
                          {"action", to_string(a)},
                          {"physical", physical_label(a)},
                          {"transport", transport_label(a)},
                          {"value", solved.value[s]}});
        std::ostringstream line;
        line.precision(10);
        line << model.state_names[s] << "  " << to_string(a) << "  " << physical_label(a) << "  "
             << transport_label(a) << "  " << solved.value[s] << '\n';
        out << line.str();
    }
    report["states"] = states;
    const auto k_star = optimal_switch_slot(solved.policy, p.K);
    report["k_star"] = k_star ? json(*k_star) : json(nullptr);
    if (o.dump_model) report["model"] = model_to_json(model);

    const auto path = resolve_output(o.out, "solve.json");
    write_file(path, report.dump(2) + "\n");
    write_manifest("solve", p, {{"epsilon", o.epsilon}, {"max_iter", o.max_iter}}, std::nullopt, {path});
    out << "iterations " << solved.report.iterations << ", converged " << (solved.report.converged ? "yes" : "no")
        << "\nreport written to " << path.string() << '\n';
    return solved.report.converged ? kOk : kNotConverged;
}

// ---- sweep ---------------------------------------------------------------

struct SweepOptions {
    ParamOptions params;
    std::string kind;
    std::string grid;
    double epsilon = kDefaultEpsilon;
    std::size_t max_iter = kDefaultMaxIter;
    std::string out;
    std::string json_out;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
    SweepKind kind{};
    try {
        kind = sweep_kind_from_string(o.kind);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    SweepSpec spec;
    spec.base = checked(o.params);
    spec.kind = kind;
    const std::string grid_text = !o.grid.empty() ? o.grid : (kind == SweepKind::Malicious ? "5:50:5" : "0.1:0.9:0.1");
    try {
        spec.grid = parse_grid(grid_text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    spec.epsilon = o.epsilon;
    spec.max_iter = o.max_iter;
    const auto rows = sweep(spec);

    const auto csv = sweep_csv(kind, rows);
    const auto csv_path = resolve_output(o.out, "sweep_" + std::string(to_string(kind)) + ".csv");
    write_file(csv_path, csv);
    std::vector<fs::path> outputs{csv_path};
    if (!o.json_out.empty()) {
        write_file(o.json_out, sweep_json(kind, rows).dump(2) + "\n");
        outputs.emplace_back(o.json_out);
    }
    write_manifest("sweep", spec.base,
                   {{"kind", to_string(kind)}, {"grid", grid_text}, {"epsilon", o.epsilon}, {"max_iter", o.max_iter}},
                   std::nullopt, outputs);
    out << csv;
    for (const auto& t : switch_thresholds(kind, rows))
        out << "# switch " << t.state << ": " << (t.from == Physical::Hop ? "Hopping" : "Staying") << " -> "
            << (t.to == Physical::Hop ? "Hopping" : "Staying") << " at " << t.variable << " = " << format_number(t.value)
            << '\n';
    const bool all_converged = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
    return all_converged ? kOk : kNotConverged;
}

// ---- simulate ------------------------------------------------------------

struct SimulateOptions {
    ParamOptions params;
    std::string policy = "optimal";
    std::string policy_file;
    std::size_t horizon = 0;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    std::size_t burn_in = 0;
    std::string summary_out;
    std::string trace_out;
    bool compare = false;
};

Policy read_policy_file(const std::string& path, int K) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read policy file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw UsageError("policy file '" + path + "' is not valid JSON: " + e.what());
    }
    Policy pi(static_cast<std::size_t>(K) + 3, -1);
    try {
        for (const auto& entry : j.at("states")) {
            const auto s = LionState::parse(entry.at("state").get<std::string>());
            const auto a = action_from_string(entry.at("action").get<std::string>());
            if (!admissible(s, a)) throw std::invalid_argument("inadmissible action for " + s.name());
            pi.at(s.index(K)) = static_cast<ActionId>(a);
        }
    } catch (const std::exception& e) {
        throw UsageError("policy file '" + path + "': " + e.what());
    }
    for (std::size_t i = 0; i < pi.size(); ++i)
        if (pi[i] < 0) throw UsageError("policy file lacks state " + LionState::from_index(i, K).name());
    return pi;
}

Controller named_controller(const std::string& name, const LionParams& p) {
    if (name == "optimal") return Controller::fixed(value_iteration(build_mdp(p)).policy);
    if (name == "always-stay") return Controller::fixed(always_stay_policy(p.K));
    if (name == "always-hop") return Controller::fixed(always_hop_policy(p.K));
    if (name == "uniform-random") return Controller::uniform_random();
    throw UsageError("unknown policy '" + name + "' (optimal, always-stay, always-hop, uniform-random)");
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    const auto p = checked(o.params);
    SimConfig cfg;
    cfg.seed = o.seed;
    cfg.horizon = o.horizon ? o.horizon : horizon_for(p.gamma, 1e-6);
    cfg.replications = o.replications;
    cfg.burn_in = o.burn_in;
    if (cfg.replications < 1) throw UsageError("--replications must be >= 1");

    std::vector<NamedController> controllers;
    if (!o.policy_file.empty()) {
        controllers.push_back({"file", Controller::fixed(read_policy_file(o.policy_file, p.K))});
    } else {
        controllers.push_back({o.policy, named_controller(o.policy, p)});
    }
    if (o.compare) {
        for (const char* name : {"optimal", "always-stay", "always-hop", "uniform-random"})
            if (controllers.front().name != name) controllers.push_back({name, named_controller(name, p)});
    }
    const auto ranked = compare_policies(p, controllers, cfg);

    const auto summary_path = resolve_output(o.summary_out, "simulate.json");
    auto summary = summary_json(p, ranked);
    summary["config"] = {{"seed", cfg.seed}, {"horizon", cfg.horizon}, {"replications", cfg.replications},
                         {"burn_in", cfg.burn_in}};
    write_file(summary_path, summary.dump(2) + "\n");
    std::vector<fs::path> outputs{summary_path};
    if (!o.trace_out.empty()) {
        const auto episode = run_episode(p, controllers.front().controller, cfg, 0, true);
        write_file(o.trace_out, trace_csv(episode.trace));
        outputs.emplace_back(o.trace_out);
    }
    write_manifest("simulate", p,
                   {{"policy", o.policy_file.empty() ? o.policy : "file:" + o.policy_file},
                    {"horizon", cfg.horizon},
                    {"replications", cfg.replications},
                    {"burn_in", cfg.burn_in},
                    {"compare", o.compare}},
                   cfg.seed, outputs);

    for (const auto& r : ranked) {
        std::ostringstream line;
        line.precision(10);
        line << r.name << ": mean discounted return " << r.result.mean_return << " +/- " << r.result.half_width()
             << " (95%), mean window " << r.result.mean_window << '\n';
        out << line.str();
    }
    out << "summary written to " << summary_path.string() << '\n';
    return kOk;
}

// ---- validate ------------------------------------------------------------

struct ValidateOptions {
    ParamOptions params;
    std::uint64_t seed = ValidationOptions{}.seed;
    double inject_kernel_fault = 0.0;
    bool quick = false;
    bool strict_tables = false;
};

int cmd_validate(const ValidateOptions& o, std::ostream& out) {
    ValidationOptions opt;
    opt.base = checked(o.params);
    opt.seed = o.seed;
    opt.kernel_perturbation = o.inject_kernel_fault;
    if (o.quick) {
        opt.kernel_samples = 20000;
        opt.value_replications = 10000;
        opt.baseline_replications = 2000;
    }

    std::vector<CheckResult> results;
    results.push_back(check_stochasticity(opt));
    for (auto& c : check_oracle_and_contraction(opt)) results.push_back(std::move(c));
    results.push_back(check_kernel_fidelity(opt));
    const auto table = check_table_structure(opt);
    results.push_back(table.result);
    results.push_back(check_malicious_invariance(opt, table.gamma));
    results.push_back(check_forced_transitions(opt));

    bool ok = true;
    for (const auto& r : results) {
        if (r.passed() || r.table_reproduction) {
            std::string line = format_check_line(r);
            if (!r.passed()) line.replace(0, 6, "[DIVERGED]");
            out << line << '\n';
        } else {
            out << format_check_line(r) << '\n';
        }
        if (!r.passed() && (!r.table_reproduction || o.strict_tables)) ok = false;
    }
    out << (ok ? "validation passed" : "validation FAILED") << '\n';
    return ok ? kOk : kUsage;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lion-attack defense MDP: solve, sweep, simulate, validate"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance by value iteration");
    solve.params.attach(*solve_cmd);
    solve_cmd->add_option("--epsilon", solve.epsilon, "sup-norm convergence threshold");
    solve_cmd->add_option("--max-iter", solve.max_iter, "iteration cap");
    solve_cmd->add_option("--out", solve.out, "JSON report path");
    solve_cmd->add_flag("--dump-model", solve.dump_model, "include the full transition/reward model in the report");

    SweepOptions sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep of the optimal strategy");
    sw.params.attach(*sweep_cmd);
    sweep_cmd->add_option("--kind", sw.kind, "alpha | beta | diag | antidiag | m")->required();
    sweep_cmd->add_option("--grid", sw.grid, "start:stop:step (inclusive)");
    sweep_cmd->add_option("--epsilon", sw.epsilon, "sup-norm convergence threshold");
    sweep_cmd->add_option("--max-iter", sw.max_iter, "iteration cap");
    sweep_cmd->add_option("--out", sw.out, "CSV output path");
    sweep_cmd->add_option("--json", sw.json_out, "JSON mirror of the CSV");

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo simulation of the band environment");
    sim.params.attach(*sim_cmd);
    sim_cmd->add_option("--policy", sim.policy, "optimal | always-stay | always-hop | uniform-random");
    sim_cmd->add_option("--policy-file", sim.policy_file, "policy JSON (the report written by solve)");
    sim_cmd->add_option("--horizon", sim.horizon, "slots per episode (default: gamma^h < 1e-6)");
    sim_cmd->add_option("--replications", sim.replications, "episodes");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--burn-in", sim.burn_in, "slots excluded from transition frequencies");
    sim_cmd->add_option("--summary", sim.summary_out, "summary JSON path");
    sim_cmd->add_option("--trace", sim.trace_out, "trace CSV of replication 0");
    sim_cmd->add_flag("--compare", sim.compare, "also run every named baseline on the same seeds");

    ValidateOptions val;
    auto* val_cmd = app.add_subcommand("validate", "run the validation checks");
    val.params.attach(*val_cmd);
    val_cmd->add_option("--seed", val.seed, "RNG seed");
    val_cmd->add_option("--inject-kernel-fault", val.inject_kernel_fault,
                        "test hook: shift reference kernel mass from success to P");
    val_cmd->add_flag("--quick", val.quick, "smaller Monte-Carlo samples");
    val_cmd->add_flag("--strict-tables", val.strict_tables, "treat strategy-table divergence as failure");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help(e.get_name().empty() ? "" : e.get_name());
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream help;
        app.exit(e, help, err);
        return e.get_exit_code() == 0 ? kOk : kUsage;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(solve, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sw, out);
        if (sim_cmd->parsed()) return cmd_simulate(sim, out);
        if (val_cmd->parsed()) return cmd_validate(val, out);
    } catch (const InvalidParams& e) {
        err << "invalid parameters:\n";
        for (const auto& v : e.violations()) err << "  " << v << '\n';
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace lionmdp::cli
