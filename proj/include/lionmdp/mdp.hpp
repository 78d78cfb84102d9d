#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lionmdp {

using numvec = std::vector<double>;
using ActionId = int;

/// Value function: one entry per model state.
using ValueFunction = numvec;

/// Deterministic stationary policy: one admissible action id per state.
using Policy = std::vector<ActionId>;

/// One admissible action of a state: its next-state distribution and the
/// reward of every transition (s, a, s'). Both vectors span all states.
struct ActionRow {
    ActionId action = 0;
    numvec probability;
    numvec reward;
};

/**
Finite discounted MDP with dense rows.

Action ids are global labels shared by all states. Within a state the rows
are kept sorted by id; the lower id wins exact ties in every argmax.
*/
struct MdpModel {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    /// rows[s] holds the admissible actions of state s
    std::vector<std::vector<ActionRow>> rows;
    double discount = 0.9;

    std::size_t state_count() const { return state_names.size(); }
    const ActionRow& row(std::size_t state, ActionId action) const;
    bool admissible(std::size_t state, ActionId action) const;
};

struct RowCheck {
    std::size_t state = 0;
    ActionId action = 0;
    double sum = 0.0;
    bool ok = true;
};

struct ValidationReport {
    bool passed = true;
    std::vector<RowCheck> rows;
    /// human-readable description of every violated invariant
    std::vector<std::string> problems;
};

struct SolveReport {
    std::size_t iterations = 0;
    double final_sup_norm_delta = 0.0;
    double epsilon = 0.0;
    bool converged = false;
    /// sup-norm change of every iteration, in order
    numvec deltas;
};

struct BackupResult {
    ValueFunction value;
    Policy policy;
};

struct SolveResult {
    ValueFunction value;
    Policy policy;
    SolveReport report;
};

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kDefaultEpsilon = 1e-9;
inline constexpr std::size_t kDefaultMaxIter = 100000;
inline constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 20;

/// Checks stochastic rows, nonempty action sets and the discount. Never throws.
ValidationReport validate_model(const MdpModel& model);

/// Expected one-step return of taking `action` in `state` and then following `v`.
double q_value(const MdpModel& model, std::size_t state, const ActionRow& row, const ValueFunction& v);

/// One greedy Bellman backup. Throws std::invalid_argument on a mis-sized or non-finite `v`.
BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v);

/// Value iteration from the zero function until the sup-norm change drops below epsilon.
SolveResult value_iteration(const MdpModel& model, double epsilon = kDefaultEpsilon,
                            std::size_t max_iter = kDefaultMaxIter);

/// Exact value of a fixed policy from the linear system (I - gamma P_pi) V = r_pi.
ValueFunction evaluate_policy_exact(const MdpModel& model, const Policy& policy);

/// Applies the backup of a fixed policy once (no maximisation).
ValueFunction policy_backup(const MdpModel& model, const Policy& policy, const ValueFunction& v);

struct EnumerationResult {
    Policy policy;
    ValueFunction value;
    std::uint64_t policies_evaluated = 0;
};

/// Exhaustive search over deterministic stationary policies. Refuses (throws
/// std::length_error) when the policy count exceeds kEnumerationLimit.
EnumerationResult enumerate_policies_brute_force(const MdpModel& model);

/// Throws std::invalid_argument unless policy[s] is admissible for every s.
void check_policy(const MdpModel& model, const Policy& policy);

double sup_norm_distance(const numvec& a, const numvec& b);

} // namespace lionmdp
