#include "lionmdp/validation.hpp"

#include "lionmdp/analysis.hpp"
#include "lionmdp/mdp.hpp"
#include "lionmdp/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lionmdp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

CheckResult finish(CheckResult r, Clock::time_point start, bool ok, const std::string& detail) {
    r.seconds = seconds_since(start);
    if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
        ok = false;
        r.detail = detail + "; runtime limit exceeded";
    } else {
        r.detail = detail;
    }
    r.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    return r;
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

// chi-square critical values at significance 0.001 for 1..3 degrees of freedom
constexpr double kChiSquare001[] = {0.0, 10.828, 13.816, 16.266};

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol + 1e-9; }

} // namespace

LionParams random_valid_params(std::mt19937_64& gen, int max_K, double max_gamma) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> cost(0.0, 50.0);
    LionParams p;
    do {
        p.alpha = unit(gen);
        p.beta = unit(gen);
    } while (p.alpha + p.beta <= 0.0);
    p.lambda = unit(gen);
    p.M = std::uniform_int_distribution<int>(1, 200)(gen);
    p.m = std::uniform_int_distribution<int>(1, p.M)(gen);
    p.K = std::uniform_int_distribution<int>(1, max_K)(gen);
    p.gamma = std::uniform_real_distribution<double>(0.0, max_gamma)(gen);
    p.C_s = cost(gen);
    p.C_h = cost(gen);
    p.C_L = cost(gen);
    p.C_H = cost(gen);
    p.G = cost(gen);
    return p;
}

CheckResult check_stochasticity(const ValidationOptions& opt) {
    CheckResult r{1, "stochasticity property", CheckStatus::Pass, false, {}, 0.0, 5.0};
    const auto start = Clock::now();
    std::mt19937_64 gen(opt.seed);
    std::size_t rows = 0;
    double worst = 0.0;
    std::string first_problem;
    for (std::size_t i = 0; i < opt.random_draws; ++i) {
        const auto p = random_valid_params(gen);
        const auto model = build_mdp(p);
        const auto report = validate_model(model);
        if (!report.passed && first_problem.empty()) first_problem = report.problems.front();
        for (const auto& row : report.rows) {
            ++rows;
            worst = std::max(worst, std::abs(row.sum - 1.0));
        }
    }
    const bool ok = first_problem.empty() && opt.random_draws >= 1000;
    std::string detail = std::to_string(opt.random_draws) + " draws, " + std::to_string(rows) +
                         " rows, worst |sum-1| = " + fmt(worst, 3);
    if (!first_problem.empty()) detail += "; " + first_problem;
    return finish(r, start, ok, detail);
}

std::vector<CheckResult> check_oracle_and_contraction(const ValidationOptions& opt) {
    CheckResult oracle{2, "oracle equivalence (value iteration vs enumeration)", CheckStatus::Pass, false, {}, 0.0,
                       10.0};
    CheckResult contraction{3, "contraction of successive deltas", CheckStatus::Pass, false, {}, 0.0, 0.0};
    const auto start = Clock::now();

    std::vector<LionParams> instances;
    for (int K : {2, 3}) {
        LionParams p = opt.base;
        p.K = K;
        instances.push_back(p);
    }
    std::mt19937_64 gen(opt.seed + 1);
    // gamma <= 0.9 keeps the value-iteration error gamma*eps/(1-gamma) below 1e-8
    for (std::size_t i = 0; i < opt.oracle_draws; ++i) {
        auto p = random_valid_params(gen, 3, 0.9);
        p.K = 2 + static_cast<int>(i % 2);
        instances.push_back(p);
    }

    std::size_t policy_mismatches = 0, contraction_violations = 0, iterations = 0;
    double worst_value_gap = 0.0, worst_ratio = 0.0;
    for (const auto& p : instances) {
        const auto model = build_mdp(p);
        const auto vi = value_iteration(model, 1e-9, kDefaultMaxIter);
        const auto brute = enumerate_policies_brute_force(model);
        if (vi.policy != brute.policy || !vi.report.converged) ++policy_mismatches;
        worst_value_gap = std::max(worst_value_gap, sup_norm_distance(vi.value, brute.value));
        const auto& d = vi.report.deltas;
        iterations += d.size();
        for (std::size_t t = 1; t < d.size(); ++t) {
            if (d[t] > p.gamma * d[t - 1] + 1e-12) ++contraction_violations;
            if (d[t - 1] > 0.0) worst_ratio = std::max(worst_ratio, d[t] / d[t - 1] / std::max(p.gamma, 1e-300));
        }
    }
    const bool oracle_ok = policy_mismatches == 0 && worst_value_gap <= 1e-8;
    auto o = finish(oracle, start, oracle_ok,
                    std::to_string(instances.size()) + " instances, policy mismatches " +
                        std::to_string(policy_mismatches) + ", worst value gap " + fmt(worst_value_gap, 3));
    auto c = finish(contraction, start, contraction_violations == 0,
                    std::to_string(iterations) + " iterations checked, violations " +
                        std::to_string(contraction_violations) + ", max delta ratio / gamma " + fmt(worst_ratio, 4));
    return {o, c};
}

CheckResult check_kernel_fidelity(const ValidationOptions& opt) {
    CheckResult r{4, "kernel fidelity (simulator vs analytic rows)", CheckStatus::Pass, false, {}, 0.0, 60.0};
    const auto start = Clock::now();
    const auto& p = opt.base;
    const std::vector<LionState> states{LionState::success(1), LionState::primary(), LionState::lion(),
                                        LionState::heavy()};
    bool ok = true;
    double worst_dev = 0.0;
    std::ostringstream detail;
    std::uint64_t salt = 0;
    for (const auto s : states) {
        for (const auto a : admissible_actions(s)) {
            auto ref = transition_distribution(s, a, p);
            ref.primary += opt.kernel_perturbation;
            ref.success -= opt.kernel_perturbation;
            const auto freq = estimate_transition_frequencies(p, s, a, opt.kernel_samples, opt.seed + 100 + salt++);
            const double n = static_cast<double>(freq.samples);
            const std::pair<double, std::uint64_t> cells[] = {
                {ref.primary, freq.primary}, {ref.heavy, freq.heavy}, {ref.lion, freq.lion}, {ref.success, freq.success}};
            double dev = 0.0, chi2 = 0.0;
            int categories = 0;
            bool impossible_hit = false;
            for (const auto& [prob, count] : cells) {
                dev = std::max(dev, std::abs(static_cast<double>(count) / n - prob));
                if (prob > 0.0) {
                    const double expected = prob * n;
                    chi2 += (static_cast<double>(count) - expected) * (static_cast<double>(count) - expected) / expected;
                    ++categories;
                } else if (count > 0) {
                    impossible_hit = true;
                }
            }
            const int df = std::max(categories - 1, 0);
            const bool chi_ok = df == 0 || chi2 <= kChiSquare001[std::min(df, 3)];
            const bool pair_ok = dev < 0.01 && chi_ok && !impossible_hit;
            ok = ok && pair_ok;
            worst_dev = std::max(worst_dev, dev);
            if (!pair_ok)
                detail << " (" << s.name() << "," << to_string(a) << ") dev " << fmt(dev, 3) << " chi2 " << fmt(chi2, 4)
                       << ";";
        }
    }
    return finish(r, start, ok,
                  "8 pairs x " + std::to_string(opt.kernel_samples) + " samples, worst deviation " + fmt(worst_dev, 3) +
                      (ok ? "" : "; failing:" + detail.str()));
}

CheckResult check_value_fidelity(const ValidationOptions& opt) {
    CheckResult r{5, "value fidelity (Monte-Carlo vs exact evaluation)", CheckStatus::Pass, false, {}, 0.0, 0.0};
    const auto start = Clock::now();
    const auto& p = opt.base;
    const auto model = build_mdp(p);
    const auto solved = value_iteration(model);
    const double exact = evaluate_policy_exact(model, solved.policy)[LionState::success(1).index(p.K)];
    SimConfig cfg;
    cfg.seed = opt.seed + 7;
    cfg.horizon = horizon_for(p.gamma, 1e-6);
    cfg.replications = opt.value_replications;
    const auto sim = run_replications(p, Controller::fixed(solved.policy), cfg);
    const double rel = std::abs(sim.mean_return - exact) / std::max(std::abs(exact), 1e-12);
    const bool ok = rel < 0.01 && opt.value_replications >= 100000;
    return finish(r, start, ok,
                  "exact " + fmt(exact, 8) + ", simulated " + fmt(sim.mean_return, 8) + " +/- " +
                      fmt(sim.half_width(2.576), 3) + " (99%), horizon " + std::to_string(cfg.horizon) +
                      ", relative error " + fmt(rel, 3));
}

namespace {

struct ExpectedFlip {
    std::size_t state;  // 0 = P, 1 = L, 2 = H
    Physical from;
    Physical to;
    double at;
};

struct FlipSpec {
    SweepKind kind;
    std::vector<ExpectedFlip> flips;
};

std::vector<FlipSpec> expected_flips() {
    return {
        {SweepKind::Alpha,
         {{0, Physical::Hop, Physical::Stay, 0.6}, {1, Physical::Stay, Physical::Hop, 0.7}, {2, Physical::Stay, Physical::Hop, 0.7}}},
        {SweepKind::Beta,
         {{0, Physical::Hop, Physical::Stay, 0.6}, {1, Physical::Stay, Physical::Hop, 0.8}, {2, Physical::Stay, Physical::Hop, 0.8}}},
        {SweepKind::Diagonal,
         {{0, Physical::Hop, Physical::Stay, 0.6}, {1, Physical::Stay, Physical::Hop, 0.6}, {2, Physical::Stay, Physical::Hop, 0.6}}},
    };
}

std::string action_string(const std::vector<SweepRow>& rows, std::size_t state) {
    std::string s;
    for (const auto& r : rows) s += physical(r.plh()[state]) == Physical::Hop ? 'H' : 'S';
    return s;
}

} // namespace

TableCheck check_table_structure(const ValidationOptions& opt) {
    CheckResult r{6, "strategy-table flip structure (alpha, beta, diagonal sweeps)", CheckStatus::Pass, true, {}, 0.0,
                  0.0};
    const auto start = Clock::now();
    static constexpr const char* kNames[] = {"P", "L", "H"};

    LionParams base = opt.base;
    base.alpha = 0.5;
    base.beta = 0.5;
    base.lambda = 0.1;
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    std::ostringstream report;
    std::optional<double> reproducing;
    bool transport_ok = true;
    bool single_flip_ok = true;
    for (double gamma : opt.gamma_grid) {
        bool all_ok = true;
        report << " gamma=" << gamma << ":";
        for (const auto& fs : expected_flips()) {
            SweepSpec spec{base, fs.kind, grid, kDefaultEpsilon, kDefaultMaxIter};
            spec.base.gamma = gamma;
            const auto rows = sweep(spec);
            for (const auto& row : rows) {
                transport_ok = transport_ok && is_freeze(row.primary_action) && is_freeze(row.lion_action) &&
                               !is_freeze(row.heavy_action);
            }
            const auto thresholds = switch_thresholds(fs.kind, rows);
            report << ' ' << to_string(fs.kind) << "[";
            for (const auto& ef : fs.flips) {
                std::vector<SwitchThreshold> mine;
                for (const auto& t : thresholds)
                    if (t.state == kNames[ef.state]) mine.push_back(t);
                if (mine.size() > 1) single_flip_ok = false;
                const bool ok = mine.size() == 1 && mine[0].from == ef.from && mine[0].to == ef.to &&
                                within(mine[0].value, ef.at, 0.1);
                all_ok = all_ok && ok;
                report << kNames[ef.state] << '=' << action_string(rows, ef.state) << (ok ? "" : "*") << ' ';
            }
            report.seekp(-1, std::ios_base::cur);
            report << "]";
        }
        report << ';';
        if (all_ok && !reproducing) reproducing = gamma;
    }

    TableCheck out;
    std::string detail;
    if (reproducing) {
        out.gamma = *reproducing;
        detail = "reproduced at gamma=" + fmt(*reproducing);
    } else {
        const auto cal = calibrate_discount(base, {alpha_target_table(), beta_target_table(), diagonal_target_table()},
                                            opt.gamma_grid);
        out.gamma = cal.best_gamma;
        std::ostringstream d;
        d << "DIVERGENCE: no gamma in grid reproduces every flip; best gamma=" << cal.best_gamma << " with "
          << cal.best_mismatches << " mismatched cells (profile:";
        for (const auto& [g, mm] : cal.profile) d << ' ' << g << "->" << mm;
        d << "). Per-state actions over 0.1..0.9 (H=hop, S=stay, *=flip off target):" << report.str();
        detail = d.str();
    }
    if (!transport_ok) detail += " transport columns violate admissibility;";
    if (!single_flip_ok) detail += " a state flips more than once on the grid;";
    out.result = finish(r, start, reproducing.has_value() && transport_ok, detail);
    return out;
}

CheckResult check_malicious_invariance(const ValidationOptions& opt, double gamma) {
    CheckResult r{7, "m-sweep invariance and switch slot monotonicity", CheckStatus::Pass, true, {}, 0.0, 0.0};
    const auto start = Clock::now();
    SweepSpec spec;
    spec.base = opt.base;
    spec.base.gamma = gamma;
    spec.kind = SweepKind::Malicious;
    spec.grid = parse_grid("5:50:5");
    const auto rows = sweep(spec);

    bool constant = true;
    for (const auto& row : rows)
        for (std::size_t s = 0; s < 3; ++s) constant = constant && physical(row.plh()[s]) == physical(rows[0].plh()[s]);
    const auto first = rows[0].plh();
    const bool expected = physical(first[0]) == Physical::Hop && physical(first[1]) == Physical::Stay &&
                          physical(first[2]) == Physical::Stay;
    // "none" ranks above every k
    bool monotone = true;
    auto rank = [](const std::optional<int>& k) { return k ? *k : std::numeric_limits<int>::max(); };
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rank(rows[i].k_star) <= rank(rows[i - 1].k_star);

    std::ostringstream d;
    d << "gamma=" << gamma << "; P/L/H = " << physical_label(first[0]) << '/' << physical_label(first[1]) << '/'
      << physical_label(first[2]) << " (expected Hopping/Staying/Staying: " << (expected ? "yes" : "no")
      << "), constant over m: " << (constant ? "yes" : "no") << ", k* by m:";
    for (const auto& row : rows) d << ' ' << (row.k_star ? std::to_string(*row.k_star) : std::string("none"));
    d << " (nonincreasing: " << (monotone ? "yes" : "no") << ')';
    const auto sf = transition_distribution(LionState::primary(), LionAction::SF, opt.base);
    const auto hf = transition_distribution(LionState::primary(), LionAction::HF, opt.base);
    if (!expected && constant && sf.primary == hf.primary)
        d << ". DIVERGENCE: at alpha=" << opt.base.alpha << ", beta=" << opt.base.beta
          << " the SF and HF rows from P coincide and hopping adds C_h, so staying is strictly better whenever "
             "C_h > 0";
    return finish(r, start, constant && expected && monotone, d.str());
}

CheckResult check_forced_transitions(const ValidationOptions& opt) {
    CheckResult r{8, "forced transition beta=1 under stay", CheckStatus::Pass, false, {}, 0.0, 0.0};
    const auto start = Clock::now();
    LionParams p = opt.base;
    p.beta = 1.0;
    std::vector<std::pair<LionState, LionAction>> pairs;
    for (int k = 1; k <= p.K; ++k) pairs.emplace_back(LionState::success(k), LionAction::ST);
    pairs.emplace_back(LionState::heavy(), LionAction::ST);
    pairs.emplace_back(LionState::lion(), LionAction::SF);

    bool ok = true;
    std::uint64_t salt = 0;
    for (const auto& [s, a] : pairs) {
        const auto t = transition_distribution(s, a, p);
        ok = ok && t.primary == 1.0 && t.heavy == 0.0 && t.lion == 0.0 && t.success == 0.0;
        const auto f = estimate_transition_frequencies(p, s, a, 10000, opt.seed + 500 + salt++);
        ok = ok && f.primary == f.samples;
    }
    return finish(r, start, ok,
                  std::to_string(pairs.size()) + " stay pairs from free-band states, analytic and 1e4 simulated slots each");
}

CheckResult check_baseline_dominance(const ValidationOptions& opt) {
    CheckResult r{9, "baseline dominance of the optimal policy", CheckStatus::Pass, false, {}, 0.0, 0.0};
    const auto start = Clock::now();
    const auto& p = opt.base;
    const auto solved = value_iteration(build_mdp(p));
    SimConfig cfg;
    cfg.seed = opt.seed + 9;
    cfg.horizon = horizon_for(p.gamma, 1e-6);
    cfg.replications = opt.baseline_replications;
    const std::vector<NamedController> controllers{{"optimal", Controller::fixed(solved.policy)},
                                                   {"always-stay", Controller::fixed(always_stay_policy(p.K))},
                                                   {"always-hop", Controller::fixed(always_hop_policy(p.K))},
                                                   {"uniform-random", Controller::uniform_random()}};
    const auto ranked = compare_policies(p, controllers, cfg);
    const auto& best = *std::find_if(ranked.begin(), ranked.end(), [](const auto& x) { return x.name == "optimal"; });
    bool ok = opt.baseline_replications >= 10000;
    std::ostringstream d;
    d << "optimal " << fmt(best.result.mean_return) << " +/- " << fmt(best.result.half_width(), 3);
    for (const auto& x : ranked) {
        if (x.name == "optimal") continue;
        const double gap = best.result.mean_return - x.result.mean_return;
        const bool separated = gap > best.result.half_width() + x.result.half_width();
        const bool tie = std::abs(gap) <= best.result.half_width() + x.result.half_width();
        d << "; " << x.name << ' ' << fmt(x.result.mean_return) << " +/- " << fmt(x.result.half_width(), 3);
        if (separated) d << " (dominated)";
        else if (tie) d << " (statistical tie: 95% intervals overlap)";
        else {
            d << " (BEATS optimal)";
            ok = false;
        }
    }
    return finish(r, start, ok, d.str());
}

std::vector<CheckResult> run_all_checks(const ValidationOptions& opt) {
    require_valid(opt.base);
    std::vector<CheckResult> out;
    out.push_back(check_stochasticity(opt));
    for (auto& c : check_oracle_and_contraction(opt)) out.push_back(std::move(c));
    out.push_back(check_kernel_fidelity(opt));
    out.push_back(check_value_fidelity(opt));
    auto table = check_table_structure(opt);
    out.push_back(table.result);
    out.push_back(check_malicious_invariance(opt, table.gamma));
    out.push_back(check_forced_transitions(opt));
    out.push_back(check_baseline_dominance(opt));
    return out;
}

std::string format_check_line(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed() ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << " (" << fmt(r.seconds, 3) << " s";
    if (r.time_limit > 0.0) os << ", limit " << r.time_limit << " s";
    os << "): " << r.detail;
    return os.str();
}

} // namespace lionmdp
