#pragma once

#include "lionmdp/lion_model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lionmdp {

enum class CheckStatus { Pass, Fail };

struct CheckResult {
    int id = 0;
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    /// true for checks that compare against the reference strategy tables
    bool table_reproduction = false;
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0;  ///< 0 when the check has no runtime bound

    bool passed() const { return status == CheckStatus::Pass; }
};

struct ValidationOptions {
    /// model scenario; the kernel and value checks run here
    LionParams base;
    std::uint64_t seed = 20160501;
    std::size_t random_draws = 1000;       ///< stochasticity property
    std::size_t oracle_draws = 20;         ///< random instances for oracle equivalence
    std::uint64_t kernel_samples = 100000; ///< per (state, action) pair
    std::size_t value_replications = 100000;
    std::size_t baseline_replications = 10000;
    /// added to P and removed from the success outcome of every reference row
    double kernel_perturbation = 0.0;
    std::vector<double> gamma_grid{0.5, 0.8, 0.9, 0.95};
};

/// Uniform draw over the valid parameter space (K in [1, max_K], gamma <= max_gamma).
LionParams random_valid_params(std::mt19937_64& gen, int max_K = 12, double max_gamma = 0.99);

CheckResult check_stochasticity(const ValidationOptions& opt);
/// Oracle equivalence and the contraction inequality share their solves.
std::vector<CheckResult> check_oracle_and_contraction(const ValidationOptions& opt);
CheckResult check_kernel_fidelity(const ValidationOptions& opt);
CheckResult check_value_fidelity(const ValidationOptions& opt);

struct TableCheck {
    CheckResult result;
    /// gamma used downstream: the first reproducing gamma, else the calibrated best
    double gamma = 0.0;
};

TableCheck check_table_structure(const ValidationOptions& opt);
CheckResult check_malicious_invariance(const ValidationOptions& opt, double gamma);
CheckResult check_forced_transitions(const ValidationOptions& opt);
CheckResult check_baseline_dominance(const ValidationOptions& opt);

/// Criteria 1..9 in order.
std::vector<CheckResult> run_all_checks(const ValidationOptions& opt);

std::string format_check_line(const CheckResult& r);

} // namespace lionmdp
