#pragma once

#include "lionmdp/lion_model.hpp"
#include "lionmdp/mdp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

namespace lionmdp {

/// mt19937_64 with fixed, platform-independent conversions to uniforms.
class SimRng {
public:
    SimRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

    std::uint64_t next() { return engine_(); }
    /// uniform in [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    /// uniform integer in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

/**
Band environment seen by one secondary user.

The attackers' knowledge is the stack of probe batches that missed the
secondary. It is emptied by a hop or a non-success slot, and its depth
equals k in Success(k), so the hit probability there is m / (M - k m).
*/
struct EnvState {
    std::vector<std::uint8_t> band_occupied;
    int secondary_band = 0;
    std::vector<std::uint8_t> searched;
    std::deque<std::vector<int>> search_history;
    int k_counter = 1;
    LionState logical_state = LionState::success(1);
    int window_exponent = 0;

    double window_size() const;
    std::size_t unsearched_count() const;
};

struct StepResult {
    LionState next;
    double reward = 0.0;
};

/// Environment consistent with logical state `s`; other bands are drawn from
/// the stationary ON-OFF law.
EnvState make_environment(const LionParams& p, LionState s, SimRng& rng);

/// Advances one slot. Throws std::invalid_argument on an inadmissible action.
/// Every call consumes the same number of draws from `rng` for the slot
/// itself, which keeps common random numbers aligned across policies.
StepResult step(EnvState& env, LionAction a, const LionParams& p, SimRng& rng);

/// Deterministic policy, or uniform choice among the two admissible actions.
class Controller {
public:
    static Controller fixed(Policy policy) { return Controller(std::move(policy)); }
    static Controller uniform_random() { return Controller(Policy{}); }

    bool is_random() const { return policy_.empty(); }
    const Policy& policy() const { return policy_; }
    LionAction choose(LionState s, int K, SimRng& action_rng) const;

private:
    explicit Controller(Policy policy) : policy_(std::move(policy)) {}
    Policy policy_;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::size_t horizon = 200;
    std::size_t replications = 1000;
    /// slots excluded from the transition tallies of each episode
    std::size_t burn_in = 0;
};

/// Smallest horizon h with gamma^h < tolerance (1 when gamma == 0).
std::size_t horizon_for(double gamma, double tolerance = 1e-6);

struct TraceRow {
    std::size_t slot = 0;
    LionState state = LionState::success(1);
    LionAction action = LionAction::ST;
    LionState next = LionState::success(1);
    double reward = 0.0;
    double window_size = 1.0;
    int band = 0;
};

struct EpisodeResult {
    double discounted_return = 0.0;
    double mean_window = 0.0;
    std::vector<TraceRow> trace;
};

/// One episode from Success(1) in a random free band. Replication r of a run
/// with seed s is fully determined by (s, r, params, controller, horizon).
EpisodeResult run_episode(const LionParams& p, const Controller& controller, const SimConfig& cfg,
                          std::uint64_t replication = 0, bool record_trace = false);

/// Counts of next logical states for each (state index, action) of the truncated model.
struct TransitionTally {
    std::size_t states = 0;
    /// counts[(state * 4 + action) * states + next]
    std::vector<std::uint64_t> counts;

    explicit TransitionTally(std::size_t state_count = 0)
        : states(state_count), counts(state_count * 4 * state_count, 0) {}
    std::uint64_t& at(std::size_t s, LionAction a, std::size_t next) {
        return counts[(s * 4 + static_cast<std::size_t>(a)) * states + next];
    }
    std::uint64_t at(std::size_t s, LionAction a, std::size_t next) const {
        return counts[(s * 4 + static_cast<std::size_t>(a)) * states + next];
    }
    std::uint64_t row_total(std::size_t s, LionAction a) const;
    void merge(const TransitionTally& other);
};

struct SimResult {
    std::size_t replications = 0;
    double mean_return = 0.0;
    double std_error = 0.0;
    double mean_window = 0.0;
    TransitionTally tally;

    /// normal-approximation half-width, z = 1.96 for 95 %
    double half_width(double z = 1.96) const { return z * std_error; }
};

/// Replications run in parallel; results are merged in replication order.
SimResult run_replications(const LionParams& p, const Controller& controller, const SimConfig& cfg);
/// Single-threaded reference for run_replications.
SimResult run_replications_serial(const LionParams& p, const Controller& controller, const SimConfig& cfg);

struct TransitionFrequencies {
    std::uint64_t samples = 0;
    std::uint64_t primary = 0;
    std::uint64_t heavy = 0;
    std::uint64_t lion = 0;
    std::uint64_t success = 0;
    LionState success_to = LionState::success(1);

    double frequency_of(LionState next) const;
};

/// One-step Monte-Carlo estimate of the kernel row (s, a) from n fresh environments.
TransitionFrequencies estimate_transition_frequencies(const LionParams& p, LionState s, LionAction a,
                                                      std::uint64_t n, std::uint64_t seed);

struct NamedController {
    std::string name;
    Controller controller;
};

struct RankedResult {
    std::string name;
    SimResult result;
};

/// Runs every controller on the same replication seeds; best mean first.
std::vector<RankedResult> compare_policies(const LionParams& p, const std::vector<NamedController>& controllers,
                                           const SimConfig& cfg);

std::string trace_csv(const std::vector<TraceRow>& trace);
nlohmann::ordered_json summary_json(const LionParams& p, const std::vector<RankedResult>& results);

} // namespace lionmdp
