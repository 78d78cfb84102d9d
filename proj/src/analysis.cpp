#include "lionmdp/analysis.hpp"

#include "lionmdp/format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lionmdp {

std::string_view to_string(SweepKind kind) {
    switch (kind) {
    case SweepKind::Alpha: return "alpha";
    case SweepKind::Beta: return "beta";
    case SweepKind::Diagonal: return "diag";
    case SweepKind::AntiDiagonal: return "antidiag";
    case SweepKind::Malicious: return "m";
    }
    return "?";
}

SweepKind sweep_kind_from_string(std::string_view name) {
    for (auto k : {SweepKind::Alpha, SweepKind::Beta, SweepKind::Diagonal, SweepKind::AntiDiagonal,
                   SweepKind::Malicious})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown sweep kind '" + std::string(name) + "' (alpha, beta, diag, antidiag, m)");
}

std::vector<std::string> swept_names(SweepKind kind) {
    switch (kind) {
    case SweepKind::Alpha: return {"alpha"};
    case SweepKind::Beta: return {"beta"};
    case SweepKind::Diagonal:
    case SweepKind::AntiDiagonal: return {"alpha", "beta"};
    case SweepKind::Malicious: return {"m"};
    }
    return {};
}

namespace {

double snap(double x) { return std::round(x * 1e12) / 1e12; }

double parse_number(std::string_view s) {
    std::string text(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("bad grid number '" + text + "'");
    return v;
}

} // namespace

std::vector<double> parse_grid(std::string_view text) {
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return {parse_number(text)};
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw std::invalid_argument("grid must be start:stop:step");
    const double start = parse_number(text.substr(0, c1));
    const double stop = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_number(text.substr(c2 + 1));
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (stop < start) throw std::invalid_argument("grid stop must not precede start");
    const double span = (stop - start) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) grid.push_back(snap(start + static_cast<double>(i) * step));
    return grid;
}

LionParams params_at(const SweepSpec& spec, double value) {
    LionParams p = spec.base;
    switch (spec.kind) {
    case SweepKind::Alpha: p.alpha = value; break;
    case SweepKind::Beta: p.beta = value; break;
    case SweepKind::Diagonal: p.alpha = p.beta = value; break;
    case SweepKind::AntiDiagonal:
        p.alpha = value;
        p.beta = snap(1.0 - value);
        break;
    case SweepKind::Malicious:
        if (value != std::floor(value)) throw std::invalid_argument("m grid values must be integers");
        p.m = static_cast<int>(value);
        break;
    }
    return p;
}

std::string_view physical_label(LionAction a) { return is_hop(a) ? "Hopping" : "Staying"; }
std::string_view transport_label(LionAction a) { return is_freeze(a) ? "Freezing" : "TCP"; }

std::optional<int> optimal_switch_slot(const Policy& policy, int K) {
    if (policy.size() < static_cast<std::size_t>(K))
        throw std::invalid_argument("policy does not cover Success(1..K)");
    for (int k = 1; k <= K; ++k)
        if (static_cast<LionAction>(policy[static_cast<std::size_t>(k - 1)]) == LionAction::HT) return k;
    return std::nullopt;
}

SweepRow solve_point(const SweepSpec& spec, double value) {
    const auto p = params_at(spec, value);
    const auto model = build_mdp(p);
    auto solved = value_iteration(model, spec.epsilon, spec.max_iter);

    SweepRow row;
    switch (spec.kind) {
    case SweepKind::Alpha: row.swept = {p.alpha}; break;
    case SweepKind::Beta: row.swept = {p.beta}; break;
    case SweepKind::Diagonal:
    case SweepKind::AntiDiagonal: row.swept = {p.alpha, p.beta}; break;
    case SweepKind::Malicious: row.swept = {static_cast<double>(p.m)}; break;
    }
    const auto& pi = solved.policy;
    row.primary_action = static_cast<LionAction>(pi[LionState::primary().index(p.K)]);
    row.lion_action = static_cast<LionAction>(pi[LionState::lion().index(p.K)]);
    row.heavy_action = static_cast<LionAction>(pi[LionState::heavy().index(p.K)]);
    row.k_star = optimal_switch_slot(pi, p.K);
    row.value_success1 = solved.value[LionState::success(1).index(p.K)];
    row.converged = solved.report.converged;
    row.policy = pi;
    return row;
}

namespace {

void check_spec(const SweepSpec& spec) {
    if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");
    std::vector<std::string> violations;
    for (double v : spec.grid) {
        for (auto& msg : param_violations(params_at(spec, v))) violations.push_back(std::move(msg));
    }
    if (!violations.empty()) throw InvalidParams(std::move(violations));
}

} // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec) {
    check_spec(spec);
    const auto n = static_cast<long>(spec.grid.size());
    std::vector<SweepRow> rows(spec.grid.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = solve_point(spec, spec.grid[static_cast<std::size_t>(i)]);
    return rows;
}

std::vector<SweepRow> sweep_serial(const SweepSpec& spec) {
    check_spec(spec);
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (double v : spec.grid) rows.push_back(solve_point(spec, v));
    return rows;
}

std::string sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    for (const auto& name : swept_names(kind)) os << csv_field(name) << ',';
    os << "P_action,L_action,H_action,P_transport,L_transport,H_transport,k_star,V_success1,converged\n";
    for (const auto& r : rows) {
        for (double v : r.swept) os << format_number(v) << ',';
        for (auto a : r.plh()) os << physical_label(a) << ',';
        for (auto a : r.plh()) os << transport_label(a) << ',';
        os << (r.k_star ? std::to_string(*r.k_star) : std::string()) << ',' << format_number(r.value_success1) << ','
           << (r.converged ? "true" : "false") << '\n';
    }
    return os.str();
}

nlohmann::ordered_json sweep_json(SweepKind kind, const std::vector<SweepRow>& rows) {
    const auto names = swept_names(kind);
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (kind == SweepKind::Malicious) j[names[i]] = static_cast<int>(r.swept[i]);
            else j[names[i]] = r.swept[i];
        }
        j["P_action"] = physical_label(r.primary_action);
        j["L_action"] = physical_label(r.lion_action);
        j["H_action"] = physical_label(r.heavy_action);
        j["P_transport"] = transport_label(r.primary_action);
        j["L_transport"] = transport_label(r.lion_action);
        j["H_transport"] = transport_label(r.heavy_action);
        j["k_star"] = r.k_star ? nlohmann::ordered_json(*r.k_star) : nlohmann::ordered_json(nullptr);
        j["V_success1"] = r.value_success1;
        j["converged"] = r.converged;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<SwitchThreshold> switch_thresholds(SweepKind kind, const std::vector<SweepRow>& rows) {
    static constexpr std::array<const char*, 3> kStates{"P", "L", "H"};
    std::vector<SwitchThreshold> out;
    const auto variable = std::string(to_string(kind));
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto before = physical(rows[i - 1].plh()[s]);
            const auto after = physical(rows[i].plh()[s]);
            if (before != after) out.push_back({variable, kStates[s], rows[i].swept.front(), before, after});
        }
    }
    return out;
}

namespace {

TargetTable make_table(SweepKind kind, std::vector<double> values, std::string_view primary, std::string_view lion,
                       std::string_view heavy) {
    auto decode = [](char c) { return c == 'H' ? Physical::Hop : Physical::Stay; };
    TargetTable t{kind, {}};
    for (std::size_t i = 0; i < values.size(); ++i)
        t.rows.push_back({values[i], {decode(primary[i]), decode(lion[i]), decode(heavy[i])}});
    return t;
}

std::vector<double> tenths() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

} // namespace

// H = Hopping, S = Staying, one letter per grid row
TargetTable alpha_target_table() {
    return make_table(SweepKind::Alpha, tenths(), "HHHHHSSSS", "SSSSSSHHH", "SSSSSSHHH");
}
TargetTable beta_target_table() {
    return make_table(SweepKind::Beta, tenths(), "HHHHHSSSS", "SSSSSSSHH", "SSSSSSSHH");
}
TargetTable diagonal_target_table() {
    return make_table(SweepKind::Diagonal, tenths(), "HHHHHSSSS", "SSSSSHHHH", "SSSSSHHHH");
}
TargetTable antidiagonal_target_table() {
    return make_table(SweepKind::AntiDiagonal, tenths(), "HHHHHSSSS", "HHHHHSSSS", "SSSHHHHHH");
}
TargetTable malicious_target_table() {
    return make_table(SweepKind::Malicious, {5, 10, 15, 20, 25, 30, 35, 40, 45, 50}, "HHHHHHHHHH", "SSSSSSSSSS",
                      "SSSSSSSSSS");
}

std::size_t count_mismatches(const TargetTable& target, const std::vector<SweepRow>& rows) {
    if (rows.size() != target.rows.size()) throw std::invalid_argument("sweep and target table differ in length");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto got = rows[i].plh();
        for (std::size_t s = 0; s < 3; ++s)
            if (physical(got[s]) != target.rows[i].plh[s]) ++mismatches;
    }
    return mismatches;
}

CalibrationResult calibrate_discount(const LionParams& base, const std::vector<TargetTable>& targets,
                                     const std::vector<double>& gamma_grid, double epsilon) {
    if (gamma_grid.empty()) throw std::invalid_argument("gamma grid is empty");
    for (double g : gamma_grid)
        if (!(g >= 0.0 && g < 1.0)) throw std::invalid_argument("gamma grid values must lie in [0, 1)");

    CalibrationResult result;
    bool have_best = false;
    for (double gamma : gamma_grid) {
        std::size_t mismatches = 0;
        for (const auto& target : targets) {
            if (target.rows.empty()) continue;
            SweepSpec spec;
            spec.base = base;
            spec.base.gamma = gamma;
            spec.kind = target.kind;
            spec.epsilon = epsilon;
            for (const auto& r : target.rows) spec.grid.push_back(r.value);
            mismatches += count_mismatches(target, sweep(spec));
        }
        result.profile.emplace_back(gamma, mismatches);
        if (!have_best || mismatches < result.best_mismatches ||
            (mismatches == result.best_mismatches && gamma < result.best_gamma)) {
            result.best_gamma = gamma;
            result.best_mismatches = mismatches;
            have_best = true;
        }
    }
    return result;
}

} // namespace lionmdp
