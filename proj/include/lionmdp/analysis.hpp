#pragma once

#include "lionmdp/lion_model.hpp"
#include "lionmdp/mdp.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace lionmdp {

enum class SweepKind { Alpha, Beta, Diagonal, AntiDiagonal, Malicious };

std::string_view to_string(SweepKind kind);
SweepKind sweep_kind_from_string(std::string_view name);

/// Column names of the swept variables: {"alpha"}, {"alpha","beta"}, {"m"}, ...
std::vector<std::string> swept_names(SweepKind kind);

/// `start:stop:step`, both ends inclusive when the step divides the range.
/// A bare number is a one-point grid.
std::vector<double> parse_grid(std::string_view text);

struct SweepSpec {
    LionParams base;
    SweepKind kind = SweepKind::Alpha;
    std::vector<double> grid;
    double epsilon = kDefaultEpsilon;
    std::size_t max_iter = kDefaultMaxIter;
};

/// Base parameters with the swept variable(s) set to `value`.
LionParams params_at(const SweepSpec& spec, double value);

enum class Physical { Stay, Hop };

inline Physical physical(LionAction a) { return is_hop(a) ? Physical::Hop : Physical::Stay; }
std::string_view physical_label(LionAction a);   ///< "Staying" / "Hopping"
std::string_view transport_label(LionAction a);  ///< "TCP" / "Freezing"

struct SweepRow {
    std::vector<double> swept;  ///< aligned with swept_names(kind)
    LionAction primary_action = LionAction::SF;
    LionAction lion_action = LionAction::SF;
    LionAction heavy_action = LionAction::ST;
    std::optional<int> k_star;
    double value_success1 = 0.0;
    bool converged = false;
    Policy policy;

    std::array<LionAction, 3> plh() const { return {primary_action, lion_action, heavy_action}; }
};

/// Smallest k whose optimal action in Success(k) is HT; none if there is none.
std::optional<int> optimal_switch_slot(const Policy& policy, int K);

SweepRow solve_point(const SweepSpec& spec, double value);

/// One row per grid point, in grid order. Grid points are solved in parallel.
std::vector<SweepRow> sweep(const SweepSpec& spec);
/// Reference implementation of sweep() on one thread.
std::vector<SweepRow> sweep_serial(const SweepSpec& spec);

std::string sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(SweepKind kind, const std::vector<SweepRow>& rows);

/// Grid position where a state's physical action changes.
struct SwitchThreshold {
    std::string variable;
    std::string state;       ///< "P", "L" or "H"
    double value = 0.0;      ///< first grid value showing the new action
    Physical from = Physical::Stay;
    Physical to = Physical::Hop;
};

/// All physical-action changes of P, L and H along the sweep.
std::vector<SwitchThreshold> switch_thresholds(SweepKind kind, const std::vector<SweepRow>& rows);

/// Expected physical actions of P, L, H at one swept value.
struct TargetRow {
    double value = 0.0;
    std::array<Physical, 3> plh{};
};

struct TargetTable {
    SweepKind kind = SweepKind::Alpha;
    std::vector<TargetRow> rows;
};

/// Reference strategy tables of the Lion-attack study (physical columns).
TargetTable alpha_target_table();
TargetTable beta_target_table();
TargetTable diagonal_target_table();
TargetTable antidiagonal_target_table();
TargetTable malicious_target_table();

/// Cells (row, state) where a sweep disagrees with the table.
std::size_t count_mismatches(const TargetTable& target, const std::vector<SweepRow>& rows);

struct CalibrationResult {
    double best_gamma = 0.0;
    std::size_t best_mismatches = 0;
    std::vector<std::pair<double, std::size_t>> profile;  ///< (gamma, mismatches) in grid order
};

/// Sweeps `target` at every gamma and keeps the one with fewest mismatches
/// (ties go to the smaller gamma). `base` supplies every non-swept parameter.
CalibrationResult calibrate_discount(const LionParams& base, const std::vector<TargetTable>& targets,
                                     const std::vector<double>& gamma_grid, double epsilon = kDefaultEpsilon);

} // namespace lionmdp
