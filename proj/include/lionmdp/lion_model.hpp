#pragma once

#include "lionmdp/mdp.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lionmdp {

/// Constants of the Lion-attack model. Defaults are the reference scenario.
struct LionParams {
    double alpha = 0.5;   ///< primary ON -> OFF per slot
    double beta = 0.5;    ///< primary OFF -> ON per slot
    double lambda = 0.1;  ///< heavy receiver traffic per slot
    int m = 20;           ///< malicious users
    int M = 100;          ///< spectrum bands
    double C_s = 2.0;     ///< sensing cost, every slot
    double C_h = 2.0;     ///< hopping cost
    double C_L = 10.0;    ///< loss under a Lion attack
    double C_H = 20.0;    ///< loss under heavy traffic
    double G = 50.0;      ///< gain of a successful slot
    int K = 10;           ///< truncation of the consecutive-success counter
    double gamma = 0.9;   ///< discount

    bool operator==(const LionParams&) const = default;
};

/// Every violated constraint, one message each; empty when valid.
std::vector<std::string> param_violations(const LionParams& p);

class InvalidParams : public std::invalid_argument {
public:
    explicit InvalidParams(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Throws InvalidParams listing every violation.
void require_valid(const LionParams& p);

enum class LionAction : int { ST = 0, HT = 1, SF = 2, HF = 3 };

inline constexpr std::array<LionAction, 4> kAllActions{LionAction::ST, LionAction::HT, LionAction::SF,
                                                       LionAction::HF};

std::string_view to_string(LionAction a);
LionAction action_from_string(std::string_view name);
inline bool is_hop(LionAction a) { return a == LionAction::HT || a == LionAction::HF; }
inline bool is_freeze(LionAction a) { return a == LionAction::SF || a == LionAction::HF; }

/// P (primary present), L (Lion attack), H (heavy traffic) or Success(k), k in [1, K].
class LionState {
public:
    enum class Kind { Success, Primary, Lion, Heavy };

    static LionState success(int k);
    static constexpr LionState primary() { return LionState(Kind::Primary, 0); }
    static constexpr LionState lion() { return LionState(Kind::Lion, 0); }
    static constexpr LionState heavy() { return LionState(Kind::Heavy, 0); }

    Kind kind() const { return kind_; }
    int k() const { return k_; }
    bool is_success() const { return kind_ == Kind::Success; }

    /// Index in the truncated model: Success(1..K) -> 0..K-1, then P, L, H.
    std::size_t index(int K) const;
    static LionState from_index(std::size_t index, int K);
    std::string name() const;
    static LionState parse(std::string_view name);

    bool operator==(const LionState&) const = default;

private:
    constexpr LionState(Kind kind, int k) : kind_(kind), k_(k) {}
    Kind kind_;
    int k_;
};

/// {ST, HT} in Success(k) and H; {SF, HF} in P and L.
bool admissible(LionState s, LionAction a);
std::array<LionAction, 2> admissible_actions(LionState s);

struct Occupancy {
    double busy;  ///< stationary P(primary ON)
    double idle;  ///< stationary P(primary OFF)
};

Occupancy primary_occupancy(const LionParams& p);

/// Probability that the attackers find the secondary after k consecutive staying successes.
double lion_attack_probability(int k, const LionParams& p);

/// Next-state law of one (state, action) pair. The four outcomes are
/// exhaustive; `success_to` is the Success state reached on a good slot.
struct LionTransition {
    double primary = 0.0;
    double heavy = 0.0;
    double lion = 0.0;
    double success = 0.0;
    LionState success_to = LionState::success(1);

    double probability_of(LionState next) const;
};

LionTransition transition_distribution(LionState s, LionAction a, const LionParams& p);

double reward(LionState s, LionAction a, LionState next, const LionParams& p);

/// Truncated model with K + 3 states; action ids are the LionAction values.
MdpModel build_mdp(const LionParams& p);

/// Translates a generic policy of build_mdp(p) into Lion actions, by state index.
std::vector<LionAction> lion_policy(const Policy& policy);
Policy to_policy(const std::vector<LionAction>& actions);

/// Stay (ST/SF) or hop (HT/HF) everywhere, picking the admissible one per state.
Policy always_stay_policy(int K);
Policy always_hop_policy(int K);

nlohmann::ordered_json to_json(const LionParams& p);
nlohmann::ordered_json model_to_json(const MdpModel& model);

} // namespace lionmdp
