#include "lionmdp/lion_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lionmdp {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

template <typename T>
std::string fmt_value(T v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

InvalidParams::InvalidParams(std::vector<std::string> violations)
    : std::invalid_argument("invalid parameters: " + join(violations)), violations_(std::move(violations)) {}

std::vector<std::string> param_violations(const LionParams& p) {
    std::vector<std::string> out;
    auto probability = [&out](const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0)) out.push_back(std::string(name) + " = " + fmt_value(v) + " must lie in [0, 1]");
    };
    auto nonnegative = [&out](const char* name, double v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            out.push_back(std::string(name) + " = " + fmt_value(v) + " must be a finite value >= 0");
    };
    probability("alpha", p.alpha);
    probability("beta", p.beta);
    probability("lambda", p.lambda);
    if (p.alpha + p.beta <= 0.0) out.push_back("alpha + beta must be > 0");
    if (p.m < 1) out.push_back("m = " + fmt_value(p.m) + " must be >= 1");
    if (p.M < 1) out.push_back("M = " + fmt_value(p.M) + " must be >= 1");
    if (p.m > p.M) out.push_back("m = " + fmt_value(p.m) + " must not exceed M = " + fmt_value(p.M));
    if (p.K < 1) out.push_back("K = " + fmt_value(p.K) + " must be >= 1");
    if (!(p.gamma >= 0.0 && p.gamma < 1.0)) out.push_back("gamma = " + fmt_value(p.gamma) + " must lie in [0, 1)");
    nonnegative("C_s", p.C_s);
    nonnegative("C_h", p.C_h);
    nonnegative("C_L", p.C_L);
    nonnegative("C_H", p.C_H);
    nonnegative("G", p.G);
    return out;
}

void require_valid(const LionParams& p) {
    auto v = param_violations(p);
    if (!v.empty()) throw InvalidParams(std::move(v));
}

std::string_view to_string(LionAction a) {
    switch (a) {
    case LionAction::ST: return "ST";
    case LionAction::HT: return "HT";
    case LionAction::SF: return "SF";
    case LionAction::HF: return "HF";
    }
    return "?";
}

LionAction action_from_string(std::string_view name) {
    for (auto a : kAllActions)
        if (to_string(a) == name) return a;
    throw std::invalid_argument("unknown action '" + std::string(name) + "'");
}

LionState LionState::success(int k) {
    if (k < 1) throw std::invalid_argument("success counter must be >= 1");
    return LionState(Kind::Success, k);
}

std::size_t LionState::index(int K) const {
    switch (kind_) {
    case Kind::Success:
        if (k_ > K) throw std::out_of_range("Success(" + std::to_string(k_) + ") beyond K");
        return static_cast<std::size_t>(k_ - 1);
    case Kind::Primary: return static_cast<std::size_t>(K);
    case Kind::Lion: return static_cast<std::size_t>(K) + 1;
    case Kind::Heavy: return static_cast<std::size_t>(K) + 2;
    }
    return 0;
}

LionState LionState::from_index(std::size_t index, int K) {
    const auto k = static_cast<std::size_t>(K);
    if (index < k) return success(static_cast<int>(index) + 1);
    if (index == k) return primary();
    if (index == k + 1) return lion();
    if (index == k + 2) return heavy();
    throw std::out_of_range("state index " + std::to_string(index) + " beyond K + 3 states");
}

std::string LionState::name() const {
    switch (kind_) {
    case Kind::Success: return "k" + std::to_string(k_);
    case Kind::Primary: return "P";
    case Kind::Lion: return "L";
    case Kind::Heavy: return "H";
    }
    return "?";
}

LionState LionState::parse(std::string_view name) {
    if (name == "P") return primary();
    if (name == "L") return lion();
    if (name == "H") return heavy();
    if (name.size() > 1 && name[0] == 'k') {
        int k = 0;
        for (char c : name.substr(1)) {
            if (c < '0' || c > '9') throw std::invalid_argument("bad state name '" + std::string(name) + "'");
            k = k * 10 + (c - '0');
        }
        return success(k);
    }
    throw std::invalid_argument("bad state name '" + std::string(name) + "'");
}

bool admissible(LionState s, LionAction a) {
    const bool tcp_state = s.is_success() || s.kind() == LionState::Kind::Heavy;
    return tcp_state != is_freeze(a);
}

std::array<LionAction, 2> admissible_actions(LionState s) {
    if (s.is_success() || s.kind() == LionState::Kind::Heavy) return {LionAction::ST, LionAction::HT};
    return {LionAction::SF, LionAction::HF};
}

Occupancy primary_occupancy(const LionParams& p) {
    if (!(p.alpha + p.beta > 0.0)) throw InvalidParams({"alpha + beta must be > 0"});
    const double sum = p.alpha + p.beta;
    return {p.beta / sum, p.alpha / sum};
}

double lion_attack_probability(int k, const LionParams& p) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (p.m < 1 || p.M < p.m) throw InvalidParams({"need 1 <= m <= M"});
    // k < M/m - 1, multiplied through by m > 0 to stay in integers
    const long long km = static_cast<long long>(k + 1) * p.m;
    if (km < p.M) return static_cast<double>(p.m) / static_cast<double>(p.M - static_cast<long long>(k) * p.m);
    return 1.0;
}

double LionTransition::probability_of(LionState next) const {
    switch (next.kind()) {
    case LionState::Kind::Primary: return primary;
    case LionState::Kind::Heavy: return heavy;
    case LionState::Kind::Lion: return lion;
    case LionState::Kind::Success: return next == success_to ? success : 0.0;
    }
    return 0.0;
}

LionTransition transition_distribution(LionState s, LionAction a, const LionParams& p) {
    if (!admissible(s, a))
        throw std::invalid_argument("action " + std::string(to_string(a)) + " is not admissible in state " + s.name());

    // Probability that the band used in the next slot is ON, and the
    // probability that a free band is probed by the attackers.
    double busy = 0.0;
    double hit = static_cast<double>(p.m) / static_cast<double>(p.M);
    if (is_hop(a)) {
        busy = primary_occupancy(p).busy;
    } else if (s.kind() == LionState::Kind::Primary) {
        busy = 1.0 - p.alpha;
    } else {
        busy = p.beta;
    }
    if (s.is_success() && a == LionAction::ST) hit = lion_attack_probability(s.k(), p);

    LionTransition t;
    t.primary = busy;
    t.heavy = (1.0 - busy) * p.lambda;
    t.lion = (1.0 - busy) * (1.0 - p.lambda) * hit;
    t.success = (1.0 - busy) * (1.0 - p.lambda) * (1.0 - hit);
    t.success_to = s.is_success() ? LionState::success(std::min(s.k() + 1, p.K)) : LionState::success(1);
    return t;
}

double reward(LionState s, LionAction a, LionState next, const LionParams& p) {
    if (!admissible(s, a))
        throw std::invalid_argument("action " + std::string(to_string(a)) + " is not admissible in state " + s.name());
    double r = -p.C_s;
    if (is_hop(a)) r -= p.C_h;
    switch (next.kind()) {
    case LionState::Kind::Success: r += p.G; break;
    case LionState::Kind::Lion: r -= p.C_L; break;
    case LionState::Kind::Heavy: r -= p.C_H; break;
    case LionState::Kind::Primary: break;
    }
    return r;
}

MdpModel build_mdp(const LionParams& p) {
    require_valid(p);
    const auto n = static_cast<std::size_t>(p.K) + 3;
    MdpModel model;
    model.discount = p.gamma;
    for (auto a : kAllActions) model.action_names.emplace_back(to_string(a));
    model.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = LionState::from_index(i, p.K);
        model.state_names.push_back(s.name());
        for (auto a : admissible_actions(s)) {
            const auto t = transition_distribution(s, a, p);
            ActionRow row{static_cast<ActionId>(a), numvec(n, 0.0), numvec(n, 0.0)};
            row.probability[LionState::primary().index(p.K)] = t.primary;
            row.probability[LionState::heavy().index(p.K)] = t.heavy;
            row.probability[LionState::lion().index(p.K)] = t.lion;
            row.probability[t.success_to.index(p.K)] = t.success;
            for (std::size_t j = 0; j < n; ++j) row.reward[j] = reward(s, a, LionState::from_index(j, p.K), p);
            model.rows[i].push_back(std::move(row));
        }
    }
    return model;
}

std::vector<LionAction> lion_policy(const Policy& policy) {
    std::vector<LionAction> out;
    out.reserve(policy.size());
    for (auto a : policy) out.push_back(static_cast<LionAction>(a));
    return out;
}

Policy to_policy(const std::vector<LionAction>& actions) {
    Policy out;
    out.reserve(actions.size());
    for (auto a : actions) out.push_back(static_cast<ActionId>(a));
    return out;
}

Policy always_stay_policy(int K) {
    Policy out;
    for (std::size_t i = 0; i < static_cast<std::size_t>(K) + 3; ++i)
        out.push_back(static_cast<ActionId>(admissible_actions(LionState::from_index(i, K))[0]));
    return out;
}

Policy always_hop_policy(int K) {
    Policy out;
    for (std::size_t i = 0; i < static_cast<std::size_t>(K) + 3; ++i)
        out.push_back(static_cast<ActionId>(admissible_actions(LionState::from_index(i, K))[1]));
    return out;
}

nlohmann::ordered_json to_json(const LionParams& p) {
    nlohmann::ordered_json j;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["lambda"] = p.lambda;
    j["m"] = p.m;
    j["M"] = p.M;
    j["C_s"] = p.C_s;
    j["C_h"] = p.C_h;
    j["C_L"] = p.C_L;
    j["C_H"] = p.C_H;
    j["G"] = p.G;
    j["K"] = p.K;
    j["gamma"] = p.gamma;
    return j;
}

nlohmann::ordered_json model_to_json(const MdpModel& model) {
    nlohmann::ordered_json j;
    j["discount"] = model.discount;
    j["states"] = model.state_names;
    j["actions"] = model.action_names;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < model.state_count(); ++s) {
        for (const auto& r : model.rows[s]) {
            nlohmann::ordered_json row;
            row["state"] = model.state_names[s];
            row["action"] = model.action_names.at(r.action);
            nlohmann::ordered_json next = nlohmann::ordered_json::array();
            for (std::size_t t = 0; t < model.state_count(); ++t) {
                if (r.probability[t] == 0.0) continue;
                next.push_back({{"state", model.state_names[t]}, {"p", r.probability[t]}, {"reward", r.reward[t]}});
            }
            row["next"] = std::move(next);
            rows.push_back(std::move(row));
        }
    }
    j["rows"] = std::move(rows);
    return j;
}

} // namespace lionmdp
