#include <doctest.h>

#include "lionmdp/lion_model.hpp"
#include "lionmdp/validation.hpp"

#include <random>
#include <string>

using namespace lionmdp;

namespace {

bool mentions(const std::vector<std::string>& msgs, const std::string& key) {
    for (const auto& m : msgs)
        if (m.find(key) != std::string::npos) return true;
    return false;
}

const LionState k1 = LionState::success(1);
const LionState P = LionState::primary();
const LionState L = LionState::lion();
const LionState H = LionState::heavy();

} // namespace

TEST_SUITE("lion_model") {

TEST_CASE("stationary occupancy") {
    LionParams p;
    auto o = primary_occupancy(p);
    CHECK(o.busy == doctest::Approx(0.5));
    CHECK(o.idle == doctest::Approx(0.5));
    p.alpha = 0.1;
    p.beta = 0.9;
    CHECK(primary_occupancy(p).busy == doctest::Approx(0.9));
    p.alpha = 0.9;
    p.beta = 0.1;
    CHECK(primary_occupancy(p).busy == doctest::Approx(0.1));
    CHECK(primary_occupancy(p).idle == doctest::Approx(0.9));
}

TEST_CASE("attack probability values") {
    LionParams p;
    CHECK(lion_attack_probability(1, p) == doctest::Approx(0.25));
    CHECK(lion_attack_probability(4, p) == 1.0);
    CHECK(lion_attack_probability(5, p) == 1.0);
}

TEST_CASE("attack probability is nondecreasing and capped at 1") {
    for (int M : {7, 50, 100, 173})
        for (int m = 1; m <= M; m += 3) {
            LionParams p;
            p.M = M;
            p.m = m;
            double prev = 0.0;
            for (int k = 1; k <= 30; ++k) {
                double f = lion_attack_probability(k, p);
                CHECK(f >= prev);
                CHECK(f <= 1.0);
                if ((k + 1) * m >= M) CHECK(f == 1.0);
                prev = f;
            }
        }
}

TEST_CASE("transition rows of the reference scenario") {
    LionParams p;
    auto st = transition_distribution(k1, LionAction::ST, p);
    CHECK(st.primary == doctest::Approx(0.5));
    CHECK(st.heavy == doctest::Approx(0.05));
    CHECK(st.lion == doctest::Approx(0.1125));
    CHECK(st.success == doctest::Approx(0.3375));
    CHECK(st.success_to == LionState::success(2));

    auto ht = transition_distribution(k1, LionAction::HT, p);
    CHECK(ht.primary == doctest::Approx(0.5));
    CHECK(ht.heavy == doctest::Approx(0.05));
    CHECK(ht.lion == doctest::Approx(0.09));
    CHECK(ht.success == doctest::Approx(0.36));

    auto q = p;
    q.beta = 1.0;
    auto forced = transition_distribution(k1, LionAction::ST, q);
    CHECK(forced.primary == 1.0);
    CHECK(forced.probability_of(P) == 1.0);

    q = p;
    q.lambda = 0.0;
    auto sf = transition_distribution(P, LionAction::SF, q);
    CHECK(sf.primary == doctest::Approx(0.5));
    CHECK(sf.heavy == 0.0);
    CHECK(sf.lion == doctest::Approx(0.1));
    CHECK(sf.success == doctest::Approx(0.4));
    CHECK(sf.success_to == k1);
}

TEST_CASE("inadmissible pairs are rejected") {
    LionParams p;
    CHECK_FALSE(admissible(P, LionAction::ST));
    CHECK_FALSE(admissible(k1, LionAction::HF));
    CHECK(admissible(H, LionAction::ST));
    CHECK(admissible(L, LionAction::HF));
    CHECK_THROWS_AS(transition_distribution(P, LionAction::ST, p), std::invalid_argument);
    CHECK_THROWS_AS(transition_distribution(H, LionAction::SF, p), std::invalid_argument);
}

TEST_CASE("reward examples") {
    LionParams p;
    CHECK(reward(k1, LionAction::ST, LionState::success(2), p) == 48.0);
    CHECK(reward(k1, LionAction::ST, L, p) == -12.0);
    CHECK(reward(k1, LionAction::HT, H, p) == -24.0);
    CHECK(reward(k1, LionAction::HT, LionState::success(2), p) == 46.0);
}

TEST_CASE("reward table with distinct constants") {
    LionParams p;
    p.C_s = 1.5;
    p.C_h = 2.25;
    p.C_L = 10.5;
    p.C_H = 20.75;
    p.G = 50.125;
    p.K = 4;
    const double Cs = p.C_s, Ch = p.C_h, CL = p.C_L, CH = p.C_H, G = p.G;
    struct Row {
        LionState s;
        LionAction a;
        LionState next;
        double expected;
    };
    const LionState k2 = LionState::success(2), k4 = LionState::success(4);
    const Row table[] = {
        {k2, LionAction::ST, LionState::success(3), G - Cs},
        {k2, LionAction::ST, P, -Cs},
        {k2, LionAction::ST, L, -Cs - CL},
        {k2, LionAction::ST, H, -Cs - CH},
        {k4, LionAction::ST, k4, G - Cs},
        {k2, LionAction::HT, LionState::success(3), G - Cs - Ch},
        {k2, LionAction::HT, P, -Cs - Ch},
        {k2, LionAction::HT, L, -Cs - Ch - CL},
        {k2, LionAction::HT, H, -Cs - Ch - CH},
        {H, LionAction::ST, k1, G - Cs},
        {H, LionAction::HT, H, -Cs - Ch - CH},
        {P, LionAction::SF, k1, G - Cs},
        {P, LionAction::SF, P, -Cs},
        {P, LionAction::HF, L, -Cs - Ch - CL},
        {L, LionAction::SF, H, -Cs - CH},
        {L, LionAction::HF, k1, G - Cs - Ch},
    };
    for (const auto& r : table) {
        CAPTURE(r.s.name());
        CAPTURE(r.next.name());
        CHECK(reward(r.s, r.a, r.next, p) == doctest::Approx(r.expected));
    }
}

TEST_CASE("success counter is truncated at K") {
    LionParams p;
    p.K = 3;
    auto t = transition_distribution(LionState::success(3), LionAction::ST, p);
    CHECK(t.success_to == LionState::success(3));
    CHECK(transition_distribution(P, LionAction::HF, p).success_to == k1);
    CHECK(transition_distribution(H, LionAction::ST, p).success_to == k1);
}

TEST_CASE("hop rows put stationary busy mass on P") {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 200; ++i) {
        auto p = random_valid_params(gen);
        double busy = p.beta / (p.alpha + p.beta);
        for (LionState s : {k1, P, L, H}) {
            LionAction hop = admissible_actions(s)[1];
            CHECK(is_hop(hop));
            CHECK(transition_distribution(s, hop, p).primary == doctest::Approx(busy).epsilon(1e-15));
        }
    }
    LionParams eq;
    eq.alpha = eq.beta = 0.37;
    CHECK(transition_distribution(k1, LionAction::HT, eq).primary == 0.5);
}

TEST_CASE("small model shape") {
    LionParams p;
    p.K = 3;
    auto m = build_mdp(p);
    CHECK(m.state_count() == 6);
    std::size_t rows = 0;
    for (const auto& r : m.rows) rows += r.size();
    CHECK(rows == 12);
    CHECK(validate_model(m).passed);
    CHECK(m.state_names == std::vector<std::string>{"k1", "k2", "k3", "P", "L", "H"});
}

TEST_CASE("all attackers present") {
    LionParams p;
    p.m = p.M;
    CHECK(lion_attack_probability(1, p) == 1.0);
    auto m = build_mdp(p);
    CHECK(validate_model(m).passed);
    auto t = transition_distribution(k1, LionAction::HT, p);
    CHECK(t.success == 0.0);
}

TEST_CASE("every random valid model is stochastic") {
    std::mt19937_64 gen(20160501);
    for (int i = 0; i < 1000; ++i) {
        auto p = random_valid_params(gen);
        REQUIRE(param_violations(p).empty());
        auto rep = validate_model(build_mdp(p));
        CHECK(rep.passed);
        for (const auto& r : rep.rows) CHECK(std::abs(r.sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("invalid parameters list every violation") {
    LionParams p;
    p.alpha = -0.5;
    p.gamma = 1.0;
    p.C_s = -1.0;
    p.m = 200;
    p.K = 0;
    auto v = param_violations(p);
    CHECK(v.size() >= 5);
    CHECK(mentions(v, "alpha"));
    CHECK(mentions(v, "gamma"));
    CHECK(mentions(v, "C_s"));
    CHECK(mentions(v, "m"));
    CHECK(mentions(v, "K"));
    try {
        require_valid(p);
        FAIL("expected InvalidParams");
    } catch (const InvalidParams& e) {
        CHECK(e.violations() == v);
    }
    CHECK_THROWS_AS(build_mdp(p), InvalidParams);
    CHECK(param_violations(LionParams{}).empty());
}

TEST_CASE("state names round-trip") {
    const int K = 10;
    for (std::size_t i = 0; i < std::size_t(K + 3); ++i) {
        auto s = LionState::from_index(i, K);
        CHECK(s.index(K) == i);
        CHECK(LionState::parse(s.name()) == s);
    }
    CHECK_THROWS(LionState::parse("k0"));
    CHECK_THROWS(LionState::parse("Q"));
    for (auto a : kAllActions) CHECK(action_from_string(to_string(a)) == a);
    CHECK_THROWS(action_from_string("XX"));
}

TEST_CASE("model json lists states and rows") {
    LionParams p;
    p.K = 2;
    auto j = model_to_json(build_mdp(p));
    CHECK(j.dump().find("\"P\"") != std::string::npos);
    CHECK(j.dump().find("HF") != std::string::npos);
    CHECK(to_json(p)["gamma"].get<double>() == 0.9);
}

}
