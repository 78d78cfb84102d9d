#include "lionmdp/simulator.hpp"

#include "lionmdp/format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lionmdp {

SimRng::SimRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(substream), hi(substream)};
    engine_.seed(seq);
}

std::uint64_t SimRng::below(std::uint64_t n) {
    // multiply-high reduction: one draw per call, bias below n / 2^64
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
}

double EnvState::window_size() const { return std::ldexp(1.0, window_exponent); }

std::size_t EnvState::unsearched_count() const {
    return static_cast<std::size_t>(std::count(searched.begin(), searched.end(), std::uint8_t{0}));
}

namespace {

void clear_history(EnvState& env) {
    std::fill(env.searched.begin(), env.searched.end(), std::uint8_t{0});
    env.search_history.clear();
}

void pop_oldest_batch(EnvState& env) {
    for (int b : env.search_history.front()) env.searched[static_cast<std::size_t>(b)] = 0;
    env.search_history.pop_front();
}

// Marks up to m unsearched bands other than the secondary's as searched.
void synthesize_batch(EnvState& env, int m, SimRng& rng) {
    std::vector<int> candidates;
    for (std::size_t b = 0; b < env.searched.size(); ++b)
        if (!env.searched[b] && static_cast<int>(b) != env.secondary_band) candidates.push_back(static_cast<int>(b));
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(m), candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + rng.below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        env.searched[static_cast<std::size_t>(candidates[i])] = 1;
    }
    candidates.resize(take);
    env.search_history.push_back(std::move(candidates));
}

} // namespace

EnvState make_environment(const LionParams& p, LionState s, SimRng& rng) {
    require_valid(p);
    const auto bands = static_cast<std::size_t>(p.M);
    const double busy = primary_occupancy(p).busy;
    EnvState env;
    env.band_occupied.resize(bands);
    for (auto& b : env.band_occupied) b = rng.uniform() < busy ? 1 : 0;
    env.searched.assign(bands, 0);

    if (s.kind() == LionState::Kind::Primary) {
        env.secondary_band = static_cast<int>(rng.below(bands));
        env.band_occupied[static_cast<std::size_t>(env.secondary_band)] = 1;
    } else {
        const auto free = static_cast<std::size_t>(std::count(env.band_occupied.begin(), env.band_occupied.end(), 0));
        if (free == 0) {
            env.secondary_band = static_cast<int>(rng.below(bands));
        } else {
            auto pick = rng.below(free);
            for (std::size_t b = 0; b < bands; ++b) {
                if (env.band_occupied[b]) continue;
                if (pick-- == 0) {
                    env.secondary_band = static_cast<int>(b);
                    break;
                }
            }
        }
        env.band_occupied[static_cast<std::size_t>(env.secondary_band)] = 0;
    }

    env.logical_state = s;
    env.k_counter = s.is_success() ? s.k() : 1;
    env.window_exponent = s.is_success() ? std::min(s.k(), p.K) : 0;
    if (s.is_success())
        for (int i = 0; i < s.k(); ++i) synthesize_batch(env, p.m, rng);
    return env;
}

StepResult step(EnvState& env, LionAction a, const LionParams& p, SimRng& rng) {
    const LionState current = env.logical_state;
    if (!admissible(current, a))
        throw std::invalid_argument("action " + std::string(to_string(a)) + " is not admissible in state " +
                                    current.name());
    const auto bands = static_cast<std::size_t>(p.M);

    // physical layer: optional hop to a uniformly chosen other band
    const auto hop_draw = static_cast<int>(rng.below(bands > 1 ? bands - 1 : 1));
    if (is_hop(a)) {
        if (bands > 1) env.secondary_band = hop_draw < env.secondary_band ? hop_draw : hop_draw + 1;
        clear_history(env);
    }

    for (auto& occupied : env.band_occupied) {
        const double u = rng.uniform();
        occupied = occupied ? (u < p.alpha ? 0 : 1) : (u < p.beta ? 1 : 0);
    }
    const bool heavy = rng.uniform() < p.lambda;

    // attackers probe m distinct bands among those not yet searched
    thread_local std::vector<int> unsearched;
    unsearched.clear();
    for (std::size_t b = 0; b < bands; ++b)
        if (!env.searched[b]) unsearched.push_back(static_cast<int>(b));
    const auto pool = unsearched.size();
    const auto probes = std::min<std::size_t>(static_cast<std::size_t>(p.m), pool);
    bool hit = false;
    for (std::size_t i = 0; i < static_cast<std::size_t>(p.m); ++i) {
        const auto draw = rng.below(pool > i ? pool - i : 1);
        if (i >= probes) continue;
        std::swap(unsearched[i], unsearched[i + draw]);
        if (unsearched[i] == env.secondary_band) hit = true;
    }

    LionState next = LionState::primary();
    if (env.band_occupied[static_cast<std::size_t>(env.secondary_band)]) next = LionState::primary();
    else if (heavy) next = LionState::heavy();
    else if (hit) next = LionState::lion();
    else next = LionState::success(current.is_success() ? std::min(current.k() + 1, p.K) : 1);

    const double r = reward(current, a, next, p);

    if (!is_freeze(a)) env.window_exponent = next.is_success() ? std::min(env.window_exponent + 1, p.K) : 0;

    if (next.is_success()) {
        std::vector<int> batch(unsearched.begin(), unsearched.begin() + static_cast<std::ptrdiff_t>(probes));
        for (int b : batch) env.searched[static_cast<std::size_t>(b)] = 1;
        env.search_history.push_back(std::move(batch));
        // a success reached by hopping still counts k + 1 slots of search
        while (env.search_history.size() < static_cast<std::size_t>(next.k())) synthesize_batch(env, p.m, rng);
        while (env.search_history.size() > static_cast<std::size_t>(next.k())) pop_oldest_batch(env);
        env.k_counter = next.k();
    } else {
        clear_history(env);
        env.k_counter = 1;
    }
    env.logical_state = next;
    return {next, r};
}

LionAction Controller::choose(LionState s, int K, SimRng& action_rng) const {
    if (is_random()) return admissible_actions(s)[action_rng.below(2)];
    return static_cast<LionAction>(policy_.at(s.index(K)));
}

std::size_t horizon_for(double gamma, double tolerance) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
    if (gamma == 0.0) return 1;
    std::size_t h = 1;
    double g = gamma;
    while (g >= tolerance) {
        g *= gamma;
        ++h;
    }
    return h;
}

std::uint64_t TransitionTally::row_total(std::size_t s, LionAction a) const {
    std::uint64_t total = 0;
    for (std::size_t t = 0; t < states; ++t) total += at(s, a, t);
    return total;
}

void TransitionTally::merge(const TransitionTally& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

namespace {

void check_controller(const LionParams& p, const Controller& controller) {
    if (controller.is_random()) return;
    const auto& pi = controller.policy();
    if (pi.size() != static_cast<std::size_t>(p.K) + 3)
        throw std::invalid_argument("policy does not match the truncated model size K + 3");
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const auto s = LionState::from_index(i, p.K);
        if (pi[i] < 0 || pi[i] > 3 || !admissible(s, static_cast<LionAction>(pi[i])))
            throw std::invalid_argument("policy action is not admissible in state " + s.name());
    }
}

EpisodeResult episode(const LionParams& p, const Controller& controller, const SimConfig& cfg,
                      std::uint64_t replication, bool record_trace, TransitionTally* tally) {
    SimRng rng(cfg.seed, replication, 0);
    SimRng action_rng(cfg.seed, replication, 1);
    auto env = make_environment(p, LionState::success(1), rng);

    EpisodeResult out;
    double discount = 1.0;
    double window_sum = 0.0;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        const auto state = env.logical_state;
        const auto action = controller.choose(state, p.K, action_rng);
        const auto res = step(env, action, p, rng);
        out.discounted_return += discount * res.reward;
        discount *= p.gamma;
        window_sum += env.window_size();
        if (tally && t >= cfg.burn_in) ++tally->at(state.index(p.K), action, res.next.index(p.K));
        if (record_trace)
            out.trace.push_back({t, state, action, res.next, res.reward, env.window_size(), env.secondary_band});
    }
    out.mean_window = cfg.horizon ? window_sum / static_cast<double>(cfg.horizon) : 0.0;
    return out;
}

void check_config(const SimConfig& cfg) {
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (cfg.replications < 1) throw std::invalid_argument("replications must be >= 1");
}

SimResult summarize(const std::vector<double>& returns, const std::vector<double>& windows, TransitionTally tally) {
    SimResult r;
    r.replications = returns.size();
    const double n = static_cast<double>(returns.size());
    double sum = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        sum += returns[i];
        wsum += windows[i];
    }
    r.mean_return = sum / n;
    r.mean_window = wsum / n;
    if (returns.size() > 1) {
        double ss = 0.0;
        for (double x : returns) ss += (x - r.mean_return) * (x - r.mean_return);
        r.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    r.tally = std::move(tally);
    return r;
}

} // namespace

EpisodeResult run_episode(const LionParams& p, const Controller& controller, const SimConfig& cfg,
                          std::uint64_t replication, bool record_trace) {
    require_valid(p);
    check_config(cfg);
    check_controller(p, controller);
    return episode(p, controller, cfg, replication, record_trace, nullptr);
}

SimResult run_replications(const LionParams& p, const Controller& controller, const SimConfig& cfg) {
    require_valid(p);
    check_config(cfg);
    check_controller(p, controller);
    const auto states = static_cast<std::size_t>(p.K) + 3;
    const auto n = static_cast<long>(cfg.replications);
    std::vector<double> returns(cfg.replications), windows(cfg.replications);
    TransitionTally total(states);
#pragma omp parallel
    {
        TransitionTally local(states);
#pragma omp for schedule(static)
        for (long r = 0; r < n; ++r) {
            const auto e = episode(p, controller, cfg, static_cast<std::uint64_t>(r), false, &local);
            returns[static_cast<std::size_t>(r)] = e.discounted_return;
            windows[static_cast<std::size_t>(r)] = e.mean_window;
        }
#pragma omp critical
        total.merge(local);
    }
    return summarize(returns, windows, std::move(total));
}

SimResult run_replications_serial(const LionParams& p, const Controller& controller, const SimConfig& cfg) {
    require_valid(p);
    check_config(cfg);
    check_controller(p, controller);
    TransitionTally total(static_cast<std::size_t>(p.K) + 3);
    std::vector<double> returns, windows;
    for (std::size_t r = 0; r < cfg.replications; ++r) {
        const auto e = episode(p, controller, cfg, r, false, &total);
        returns.push_back(e.discounted_return);
        windows.push_back(e.mean_window);
    }
    return summarize(returns, windows, std::move(total));
}

double TransitionFrequencies::frequency_of(LionState next) const {
    if (samples == 0) return 0.0;
    const double n = static_cast<double>(samples);
    switch (next.kind()) {
    case LionState::Kind::Primary: return static_cast<double>(primary) / n;
    case LionState::Kind::Heavy: return static_cast<double>(heavy) / n;
    case LionState::Kind::Lion: return static_cast<double>(lion) / n;
    case LionState::Kind::Success: return next == success_to ? static_cast<double>(success) / n : 0.0;
    }
    return 0.0;
}

TransitionFrequencies estimate_transition_frequencies(const LionParams& p, LionState s, LionAction a,
                                                      std::uint64_t n, std::uint64_t seed) {
    require_valid(p);
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    if (!admissible(s, a))
        throw std::invalid_argument("action " + std::string(to_string(a)) + " is not admissible in state " + s.name());
    if (s.is_success() && s.k() > p.K) throw std::invalid_argument("success counter beyond K");

    TransitionFrequencies f;
    f.samples = n;
    f.success_to = LionState::success(s.is_success() ? std::min(s.k() + 1, p.K) : 1);
    std::uint64_t primary = 0, heavy = 0, lion = 0, success = 0;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) reduction(+ : primary, heavy, lion, success)
    for (long long i = 0; i < count; ++i) {
        SimRng rng(seed, static_cast<std::uint64_t>(i), 2);
        auto env = make_environment(p, s, rng);
        const auto next = step(env, a, p, rng).next;
        switch (next.kind()) {
        case LionState::Kind::Primary: ++primary; break;
        case LionState::Kind::Heavy: ++heavy; break;
        case LionState::Kind::Lion: ++lion; break;
        case LionState::Kind::Success: ++success; break;
        }
    }
    f.primary = primary;
    f.heavy = heavy;
    f.lion = lion;
    f.success = success;
    return f;
}

std::vector<RankedResult> compare_policies(const LionParams& p, const std::vector<NamedController>& controllers,
                                           const SimConfig& cfg) {
    std::vector<RankedResult> out;
    out.reserve(controllers.size());
    for (const auto& c : controllers) out.push_back({c.name, run_replications(p, c.controller, cfg)});
    std::stable_sort(out.begin(), out.end(), [](const RankedResult& a, const RankedResult& b) {
        return a.result.mean_return > b.result.mean_return;
    });
    return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    os << "slot,state,action,next_state,reward,window_size,band\n";
    for (const auto& r : trace)
        os << r.slot << ',' << r.state.name() << ',' << to_string(r.action) << ',' << r.next.name() << ','
           << format_number(r.reward) << ',' << format_number(r.window_size) << ',' << r.band << '\n';
    return os.str();
}

nlohmann::ordered_json summary_json(const LionParams& p, const std::vector<RankedResult>& results) {
    nlohmann::ordered_json j;
    j["params"] = to_json(p);
    auto list = nlohmann::ordered_json::array();
    for (const auto& [name, r] : results) {
        nlohmann::ordered_json e;
        e["name"] = name;
        e["replications"] = r.replications;
        e["mean_return"] = r.mean_return;
        e["std_error"] = r.std_error;
        e["half_width_95"] = r.half_width(1.96);
        e["mean_window"] = r.mean_window;
        auto freq = nlohmann::ordered_json::array();
        for (std::size_t s = 0; s < r.tally.states; ++s) {
            const auto state = LionState::from_index(s, p.K);
            for (auto a : admissible_actions(state)) {
                const auto total = r.tally.row_total(s, a);
                if (total == 0) continue;
                nlohmann::ordered_json row;
                row["state"] = state.name();
                row["action"] = to_string(a);
                row["count"] = total;
                nlohmann::ordered_json next;
                for (std::size_t t = 0; t < r.tally.states; ++t) {
                    const auto c = r.tally.at(s, a, t);
                    if (c) next[LionState::from_index(t, p.K).name()] = static_cast<double>(c) / static_cast<double>(total);
                }
                row["next"] = std::move(next);
                freq.push_back(std::move(row));
            }
        }
        e["frequencies"] = std::move(freq);
        list.push_back(std::move(e));
    }
    j["policies"] = std::move(list);
    return j;
}

} // namespace lionmdp
