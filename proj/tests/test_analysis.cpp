#include <doctest.h>

#include "lionmdp/analysis.hpp"

#include <sstream>

using namespace lionmdp;

namespace {

SweepSpec spec_for(SweepKind kind, const std::string& grid) {
    SweepSpec s;
    s.kind = kind;
    s.grid = parse_grid(grid);
    return s;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("switch slot is the first hop in the success chain") {
    const int K = 10;
    Policy all_stay = always_stay_policy(K);
    CHECK_FALSE(optimal_switch_slot(all_stay, K).has_value());

    Policy pi = all_stay;
    pi[2] = int(LionAction::HT);
    pi[5] = int(LionAction::HT);
    CHECK(optimal_switch_slot(pi, K) == 3);

    pi = always_hop_policy(K);
    CHECK(optimal_switch_slot(pi, K) == 1);
    CHECK_THROWS(optimal_switch_slot(Policy{0, 0}, K));
}

TEST_CASE("grid parsing") {
    auto g = parse_grid("0.1:0.9:0.1");
    REQUIRE(g.size() == 9);
    CHECK(g.front() == 0.1);
    CHECK(g[2] == 0.3);
    CHECK(g.back() == 0.9);
    CHECK(parse_grid("5:50:5").size() == 10);
    CHECK(parse_grid("0.25") == std::vector<double>{0.25});
    CHECK_THROWS(parse_grid("0.1:0.9"));
    CHECK_THROWS(parse_grid("0.1:0.9:0"));
    CHECK_THROWS(parse_grid("0.9:0.1:0.1"));
    CHECK_THROWS(parse_grid("x"));
}

TEST_CASE("one-point sweep equals a direct solve") {
    auto spec = spec_for(SweepKind::Alpha, "0.3");
    auto rows = sweep(spec);
    REQUIRE(rows.size() == 1);
    auto p = spec.base;
    p.alpha = 0.3;
    auto direct = value_iteration(build_mdp(p));
    CHECK(rows[0].policy == direct.policy);
    CHECK(rows[0].value_success1 == direct.value[0]);
    CHECK(rows[0].converged);
}

TEST_CASE("antidiagonal and malicious sweeps set the right parameters") {
    auto anti = spec_for(SweepKind::AntiDiagonal, "0.1:0.9:0.1");
    for (double a : anti.grid) {
        auto p = params_at(anti, a);
        CHECK(p.alpha == a);
        CHECK(p.alpha + p.beta == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto mal = spec_for(SweepKind::Malicious, "5:50:5");
    CHECK(params_at(mal, 35).m == 35);
    CHECK_THROWS(params_at(mal, 2.5));
    CHECK(swept_names(SweepKind::AntiDiagonal) == std::vector<std::string>{"alpha", "beta"});
    CHECK(sweep_kind_from_string("m") == SweepKind::Malicious);
    CHECK_THROWS(sweep_kind_from_string("gamma"));
}

TEST_CASE("parallel and serial sweeps give identical output") {
    for (auto kind : {SweepKind::Alpha, SweepKind::Beta, SweepKind::Diagonal, SweepKind::AntiDiagonal}) {
        auto spec = spec_for(kind, "0.1:0.9:0.1");
        CHECK(sweep_csv(kind, sweep(spec)) == sweep_csv(kind, sweep_serial(spec)));
    }
    auto mal = spec_for(SweepKind::Malicious, "5:50:5");
    CHECK(sweep_csv(SweepKind::Malicious, sweep(mal)) == sweep_csv(SweepKind::Malicious, sweep_serial(mal)));
}

TEST_CASE("transport column follows the state class") {
    for (auto kind : {SweepKind::Alpha, SweepKind::Beta, SweepKind::Diagonal, SweepKind::AntiDiagonal}) {
        for (const auto& r : sweep(spec_for(kind, "0.1:0.9:0.1"))) {
            CHECK(transport_label(r.primary_action) == "Freezing");
            CHECK(transport_label(r.lion_action) == "Freezing");
            CHECK(transport_label(r.heavy_action) == "TCP");
        }
    }
}

TEST_CASE("labels are a bijection over each admissible pair") {
    for (LionState s : {LionState::success(1), LionState::primary(), LionState::lion(), LionState::heavy()}) {
        auto acts = admissible_actions(s);
        CHECK(physical_label(acts[0]) == "Staying");
        CHECK(physical_label(acts[1]) == "Hopping");
        CHECK(transport_label(acts[0]) == transport_label(acts[1]));
    }
}

TEST_CASE("csv and json layout") {
    auto spec = spec_for(SweepKind::Alpha, "0.1:0.9:0.1");
    auto rows = sweep(spec);
    auto csv = sweep_csv(SweepKind::Alpha, rows);
    CHECK(csv.rfind("alpha,P_action,L_action,H_action,P_transport,L_transport,H_transport,k_star,V_success1,"
                    "converged\n",
                    0) == 0);
    CHECK(line_count(csv) == 10);
    auto j = sweep_json(SweepKind::Alpha, rows);
    REQUIRE(j.size() == 9);
    CHECK(j[0]["alpha"].get<double>() == 0.1);
    CHECK(j[8]["H_transport"] == "TCP");
    CHECK(line_count(sweep_csv(SweepKind::Malicious, sweep(spec_for(SweepKind::Malicious, "5:50:5")))) == 11);
}

TEST_CASE("endpoints of the alpha sweep") {
    auto rows = sweep(spec_for(SweepKind::Alpha, "0.1:0.9:0.1"));
    CHECK(physical(rows.front().primary_action) == Physical::Hop);
    CHECK(physical(rows.back().primary_action) == Physical::Stay);
    CHECK(physical(rows.front().heavy_action) == Physical::Stay);
}

TEST_CASE("freezing in place beats hopping in P at the reference occupancy") {
    // with alpha = beta = 0.5 both freeze rows share one next-state law, so hopping only adds C_h
    for (int m : {5, 20, 50})
        for (double g : {0.0, 0.5, 0.9, 0.95}) {
            LionParams p;
            p.m = m;
            p.gamma = g;
            auto sf = transition_distribution(LionState::primary(), LionAction::SF, p);
            auto hf = transition_distribution(LionState::primary(), LionAction::HF, p);
            CHECK(sf.primary == hf.primary);
            CHECK(sf.success == hf.success);
            auto pi = lion_policy(value_iteration(build_mdp(p)).policy);
            CHECK(pi[LionState::primary().index(p.K)] == LionAction::SF);
        }
}

TEST_CASE("attack strength sweep keeps heavy-traffic staying") {
    auto rows = sweep(spec_for(SweepKind::Malicious, "5:50:5"));
    REQUIRE(rows.size() == 10);
    std::optional<int> prev;
    for (const auto& r : rows) {
        CHECK(physical(r.heavy_action) == Physical::Stay);
        CHECK(r.plh() == rows.front().plh());
        if (prev && r.k_star) CHECK(*r.k_star <= *prev);
        if (r.k_star) prev = r.k_star;
    }
}

TEST_CASE("switch thresholds report the first grid value with the new action") {
    auto rows = sweep(spec_for(SweepKind::Alpha, "0.1:0.9:0.1"));
    auto th = switch_thresholds(SweepKind::Alpha, rows);
    bool seen_p = false;
    for (const auto& t : th) {
        CHECK(t.variable == "alpha");
        if (t.state == "P") {
            seen_p = true;
            CHECK(t.from == Physical::Hop);
            CHECK(t.to == Physical::Stay);
            CHECK(t.value == 0.4);
        }
    }
    CHECK(seen_p);
}

TEST_CASE("calibration against a self-generated table") {
    LionParams base;
    base.gamma = 0.8;
    SweepSpec s;
    s.base = base;
    s.kind = SweepKind::Alpha;
    s.grid = parse_grid("0.1:0.9:0.1");
    auto rows = sweep(s);
    TargetTable own;
    own.kind = SweepKind::Alpha;
    for (const auto& r : rows)
        own.rows.push_back({r.swept[0], {physical(r.primary_action), physical(r.lion_action), physical(r.heavy_action)}});
    CHECK(count_mismatches(own, rows) == 0);
    auto cal = calibrate_discount(base, {own}, {0.5, 0.8, 0.9});
    CHECK(cal.best_mismatches == 0);
    CHECK(cal.profile.size() == 3);
}

TEST_CASE("calibration with empty targets keeps the smallest gamma") {
    auto cal = calibrate_discount(LionParams{}, {}, {0.8, 0.5, 0.9});
    CHECK(cal.best_mismatches == 0);
    CHECK(cal.best_gamma == 0.5);
    CHECK_THROWS(calibrate_discount(LionParams{}, {}, {}));
}

TEST_CASE("calibration profile is consistent with direct mismatch counts") {
    auto targets = {alpha_target_table(), beta_target_table(), diagonal_target_table()};
    std::vector<double> grid{0.5, 0.9};
    auto cal = calibrate_discount(LionParams{}, targets, grid);
    for (auto [g, count] : cal.profile) {
        std::size_t direct = 0;
        for (const auto& t : targets) {
            SweepSpec s;
            s.base.gamma = g;
            s.kind = t.kind;
            for (const auto& r : t.rows) s.grid.push_back(r.value);
            direct += count_mismatches(t, sweep(s));
        }
        CHECK(count == direct);
        CHECK(cal.best_mismatches <= count);
    }
}

}
