#include "lionmdp/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lionmdp {

const ActionRow& MdpModel::row(std::size_t state, ActionId action) const {
    for (const auto& r : rows.at(state)) {
        if (r.action == action) return r;
    }
    throw std::invalid_argument("action " + std::to_string(action) + " is not admissible in state " +
                                state_names.at(state));
}

bool MdpModel::admissible(std::size_t state, ActionId action) const {
    if (state >= rows.size()) return false;
    return std::any_of(rows[state].begin(), rows[state].end(),
                       [action](const ActionRow& r) { return r.action == action; });
}

double sup_norm_distance(const numvec& a, const numvec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

ValidationReport validate_model(const MdpModel& model) {
    ValidationReport report;
    const auto n = model.state_count();
    auto fail = [&report](std::string msg) {
        report.passed = false;
        report.problems.push_back(std::move(msg));
    };

    if (!(model.discount >= 0.0 && model.discount < 1.0)) {
        std::ostringstream os;
        os << "discount " << model.discount << " outside [0, 1)";
        fail(os.str());
    }
    if (model.rows.size() != n) {
        fail("row table covers " + std::to_string(model.rows.size()) + " states, expected " + std::to_string(n));
        return report;
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (model.rows[s].empty()) fail("state " + model.state_names[s] + " has no admissible action");
        for (const auto& r : model.rows[s]) {
            RowCheck check{s, r.action, 0.0, true};
            if (r.probability.size() != n || r.reward.size() != n) {
                check.ok = false;
            } else {
                for (std::size_t t = 0; t < n; ++t) {
                    const double p = r.probability[t];
                    if (!(p >= 0.0 && p <= 1.0)) check.ok = false;
                    if (!std::isfinite(r.reward[t])) check.ok = false;
                    check.sum += p;
                }
                if (!(std::abs(check.sum - 1.0) <= kStochasticTolerance)) check.ok = false;
            }
            if (!check.ok) {
                std::ostringstream os;
                os.precision(17);
                os << "row (" << model.state_names[s] << ", "
                   << (r.action >= 0 && static_cast<std::size_t>(r.action) < model.action_names.size()
                           ? model.action_names[r.action]
                           : std::to_string(r.action))
                   << ") is not a distribution: sum " << check.sum;
                fail(os.str());
            }
            report.rows.push_back(check);
        }
    }
    return report;
}

double q_value(const MdpModel& model, std::size_t state, const ActionRow& row, const ValueFunction& v) {
    (void)state;
    double q = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) {
        const double p = row.probability[t];
        if (p == 0.0) continue;
        q += p * (row.reward[t] + model.discount * v[t]);
    }
    return q;
}

namespace {

void check_value_function(const MdpModel& model, const ValueFunction& v) {
    if (v.size() != model.state_count())
        throw std::invalid_argument("value function has " + std::to_string(v.size()) + " entries, model has " +
                                    std::to_string(model.state_count()) + " states");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("value function has a non-finite entry");
}

void backup_into(const MdpModel& model, const ValueFunction& v, ValueFunction& out, Policy& policy) {
    const auto n = model.state_count();
    for (std::size_t s = 0; s < n; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        ActionId best_action = -1;
        // rows are ordered by action id, strict > keeps the lowest id on ties
        for (const auto& r : model.rows[s]) {
            const double q = q_value(model, s, r, v);
            if (q > best) {
                best = q;
                best_action = r.action;
            }
        }
        out[s] = best;
        policy[s] = best_action;
    }
}

} // namespace

BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v) {
    check_value_function(model, v);
    BackupResult result{ValueFunction(v.size()), Policy(v.size())};
    backup_into(model, v, result.value, result.policy);
    return result;
}

SolveResult value_iteration(const MdpModel& model, double epsilon, std::size_t max_iter) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");

    const auto n = model.state_count();
    SolveResult result;
    result.report.epsilon = epsilon;
    ValueFunction current(n, 0.0);
    ValueFunction next(n, 0.0);
    Policy policy(n, -1);

    for (std::size_t it = 0; it < max_iter; ++it) {
        backup_into(model, current, next, policy);
        const double delta = sup_norm_distance(next, current);
        result.report.deltas.push_back(delta);
        result.report.iterations = it + 1;
        result.report.final_sup_norm_delta = delta;
        std::swap(current, next);
        if (delta < epsilon) {
            result.report.converged = true;
            break;
        }
    }
    // policy is greedy w.r.t. the previous iterate, which is what the
    // termination bound is stated for
    result.value = std::move(current);
    result.policy = std::move(policy);
    return result;
}

void check_policy(const MdpModel& model, const Policy& policy) {
    if (policy.size() != model.state_count())
        throw std::invalid_argument("policy covers " + std::to_string(policy.size()) + " states, model has " +
                                    std::to_string(model.state_count()));
    for (std::size_t s = 0; s < policy.size(); ++s)
        if (!model.admissible(s, policy[s]))
            throw std::invalid_argument("policy action " + std::to_string(policy[s]) +
                                        " is not admissible in state " + model.state_names[s]);
}

ValueFunction policy_backup(const MdpModel& model, const Policy& policy, const ValueFunction& v) {
    check_policy(model, policy);
    check_value_function(model, v);
    ValueFunction out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) out[s] = q_value(model, s, model.row(s, policy[s]), v);
    return out;
}

ValueFunction evaluate_policy_exact(const MdpModel& model, const Policy& policy) {
    check_policy(model, policy);
    const auto n = static_cast<Eigen::Index>(model.state_count());
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto& r = model.row(static_cast<std::size_t>(s), policy[s]);
        for (Eigen::Index t = 0; t < n; ++t) {
            system(s, t) -= model.discount * r.probability[t];
            rhs(s) += r.probability[t] * r.reward[t];
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible()) throw std::logic_error("policy evaluation system is singular");
    const Eigen::VectorXd solution = lu.solve(rhs);
    return ValueFunction(solution.data(), solution.data() + n);
}

EnumerationResult enumerate_policies_brute_force(const MdpModel& model) {
    const auto n = model.state_count();
    std::uint64_t total = 1;
    for (const auto& r : model.rows) {
        if (r.empty()) throw std::invalid_argument("state without admissible action");
        total *= r.size();
        if (total > kEnumerationLimit)
            throw std::length_error("policy space exceeds the enumeration limit of 2^20 policies");
    }

    std::vector<ValueFunction> values;
    std::vector<Policy> policies;
    values.reserve(total);
    policies.reserve(total);
    ValueFunction pointwise_max(n, -std::numeric_limits<double>::infinity());

    // odometer over action indices; the last state varies fastest
    std::vector<std::size_t> digit(n, 0);
    for (std::uint64_t count = 0; count < total; ++count) {
        Policy policy(n);
        for (std::size_t s = 0; s < n; ++s) policy[s] = model.rows[s][digit[s]].action;
        auto v = evaluate_policy_exact(model, policy);
        for (std::size_t s = 0; s < n; ++s) pointwise_max[s] = std::max(pointwise_max[s], v[s]);
        values.push_back(std::move(v));
        policies.push_back(std::move(policy));
        for (std::size_t s = n; s-- > 0;) {
            if (++digit[s] < model.rows[s].size()) break;
            digit[s] = 0;
        }
    }

    // Policies are visited in lexicographic order of action ids, so the first
    // one that attains the pointwise maximum everywhere prefers lower ids.
    double scale = 1.0;
    for (double x : pointwise_max) scale = std::max(scale, std::abs(x));
    const double tol = 1e-11 * scale;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        bool optimal = true;
        for (std::size_t s = 0; s < n && optimal; ++s) optimal = values[i][s] >= pointwise_max[s] - tol;
        if (optimal) return {policies[i], values[i], total};
    }
    throw std::logic_error("no policy attains the optimal value at every state");
}

} // namespace lionmdp
