#include <doctest.h>

#include "lionmdp/config.hpp"
#include "lionmdp/validation.hpp"

#include <random>

using namespace lionmdp;

TEST_SUITE("config") {

TEST_CASE("comments and blank lines are ignored") {
    auto kv = parse_key_values("# scenario\n\nalpha = 0.3   # comment\n  K=4\n");
    CHECK(kv.size() == 2);
    CHECK(kv.at("alpha") == "0.3");
    CHECK(kv.at("K") == "4");
}

TEST_CASE("applying keys overrides only what is given") {
    LionParams p;
    apply_key_values(p, parse_key_values("beta = 0.25\nm = 5\nC_L = 3.5"));
    CHECK(p.beta == 0.25);
    CHECK(p.m == 5);
    CHECK(p.C_L == 3.5);
    CHECK(p.alpha == 0.5);
}

TEST_CASE("unknown keys and malformed numbers throw") {
    LionParams p;
    CHECK_THROWS_AS(apply_key_values(p, {{"delta", "1"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_values(p, {{"alpha", "abc"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_values(p, {{"K", "2.5"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_key_values("alpha 0.3"), std::invalid_argument);
    CHECK_THROWS(read_key_values_file("/nonexistent/lionmdp.cfg"));
}

TEST_CASE("key-value dump round-trips random parameters") {
    std::mt19937_64 gen(99);
    for (int i = 0; i < 200; ++i) {
        auto p = random_valid_params(gen);
        LionParams q;
        apply_key_values(q, parse_key_values(to_key_values(p)));
        CHECK(q == p);
    }
}

}
