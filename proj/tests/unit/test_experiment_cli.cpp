#include <doctest.h>

#include <atomic>
#include <cmath>

#include "sdc/config.hpp"
#include "sdc/experiments.hpp"
#include "sdc/format.hpp"
#include "sdc/random.hpp"

using namespace sdc;

namespace {

bool mentions(const ConfigError& e, const std::string& text) {
    for (const auto& i : e.issues())
        if (i.find(text) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("defaults survive a JSON round trip") {
    const ExperimentConfig cfg;
    const std::string text = config_to_json(cfg);
    const ExperimentConfig back = parse_config(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.seed == 20251016);
    CHECK(back.scheme == Scheme::Trapezoidal);
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("partial configs keep defaults and overrides win") {
    const ExperimentConfig cfg = parse_config(R"({"dim": 2, "weight": {"tau": 3.0}})",
                                              {"weight.tau=4", "stability.grids=[8,16]", "scheme=backward-euler"});
    CHECK(cfg.dim == 2);
    CHECK(cfg.weight.tau == 4.0);
    CHECK(cfg.weight.delta == 0.25);
    CHECK(cfg.stability.grids == std::vector<int>{8, 16});
    CHECK(cfg.scheme == Scheme::BackwardEuler);
}

TEST_CASE("schema violations are reported per field") {
    try {
        parse_config(R"({"dim": "two", "weight": {"tau": "x", "colour": 1}, "M": 1.5, "nope": {}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "dim: expected integer"));
        CHECK(mentions(e, "weight.tau: expected number"));
        CHECK(mentions(e, "weight.colour: unknown key"));
        CHECK(mentions(e, "M: expected integer"));
        CHECK(mentions(e, "nope: unknown key"));
    }
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
    CHECK_THROWS_AS(parse_config("{}", {"novalue"}), ConfigError);
    CHECK_THROWS_AS(parse_config("{}", {"seed.x=1"}), ConfigError);
}

TEST_CASE("range checks") {
    try {
        parse_config(R"({"omega0": {"lo": 0.2, "hi": 0.6}, "weight": {"delta": 0.7}, "dim": 4})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "omega0:"));
        CHECK(mentions(e, "weight.delta:"));
        CHECK(mentions(e, "dim:"));
    }
    CHECK_THROWS_AS(parse_config(R"({"scheme": "rk4"})"), ConfigError);
}

TEST_CASE("per-run seeds") {
    CHECK(run_seed(1, 0) == run_seed(1, 0));
    CHECK(run_seed(1, 0) != run_seed(1, 1));
    CHECK(run_seed(1, 0) != run_seed(2, 0));
    Rng rng(run_seed(20251016, 3));
    for (int k = 0; k < 1000; ++k) {
        const double u = uniform(rng, -2.0, 3.0);
        CHECK((u >= -2.0 && u < 3.0));
    }
}

TEST_CASE("worker pool visits every index once and rethrows the first failure") {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_WITH(parallel_for(10, 3, [](int i) { if (i == 3 || i == 7) throw Error("bad " + std::to_string(i)); }),
                      "bad 3");
}

TEST_CASE("fitted slope of an exact line") {
    CHECK(fitted_slope({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(fitted_slope({1}, {1}), Error);
}

TEST_CASE("random problems are reproducible and respect the bounds") {
    const RandomProblem a = random_problem(5, 2, ProblemOptions{});
    const RandomProblem b = random_problem(5, 2, ProblemOptions{});
    const GridSpec g(2, 9);
    const double times[] = {0.0, 0.3, 1.0};
    const CoefficientBounds ba = compute_bounds(a.coeffs, g, times);
    const CoefficientBounds bb = compute_bounds(b.coeffs, g, times);
    CHECK(ba.gamma_min == bb.gamma_min);
    CHECK(ba.gamma_min >= 0.53);
    CHECK(ba.gamma_max <= 1.97);
    CHECK(ba.b_sup <= 1.0);
    CHECK(ba.c_sup <= 1.0);
    ProblemOptions zero;
    zero.zero_initial = true;
    const double x[2] = {0.3, 0.6};
    CHECK(random_problem(5, 2, zero).y_ini(x) == 0.0);
}

TEST_CASE("suite dispatch") {
    CHECK(suite_names().size() == 7);
    CHECK_THROWS_AS(run_suite("plot", ExperimentConfig{}), Error);
    ExperimentConfig cfg;
    cfg.verify_ops.fields = 12;
    const SuiteResult a = run_suite("verify-ops", cfg);
    cfg.workers = 3;
    const SuiteResult b = run_suite("verify-ops", cfg);
    CHECK(a.passed());
    REQUIRE(a.tables.size() == b.tables.size());
    CHECK(a.tables[0].content == b.tables[0].content);
}

TEST_CASE("shortest double formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0})
        CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.0625) == "0.0625");
    CHECK_THROWS_AS(parse_double("1.0x"), Error);
}
