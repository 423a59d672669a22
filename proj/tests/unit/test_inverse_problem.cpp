#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sdc/discrete_calculus.hpp"
#include "sdc/experiments.hpp"
#include "sdc/inverse_problem.hpp"
#include "sdc/random.hpp"

using namespace sdc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Twin {
    GridSpec grid;
    TimeGrid time{1.0, 32};
    RandomProblem prob;
    AdmissibleSource src;
    Trajectory y;
    WeightParams params;

    explicit Twin(int dim = 1, int n = 15, SourceMode mode = SourceMode::Separable)
        : grid(dim, n), prob(random_problem(17, dim, ProblemOptions{})),
          src(generate_admissible(17, grid, time, mode)) {
        const MeshFunction zero(grid, MeshId::primal(dim));
        y = solve_forward(zero, src.g, prob.coeffs, time, Scheme::Trapezoidal);
        params.delta = 0.3125;
    }

    CarlemanWeight weight() const { return CarlemanWeight(build_psi(grid, omega0(), omega(), params).psi, params); }
    Box omega() const { return Box::cube(grid.dim(), 0.3, 0.7); }
    Box omega0() const { return Box::cube(grid.dim(), 0.4, 0.6); }
    Observation observation() const {
        const ZSolution z = solve_z_system(y, prob.coeffs, src.g, src.dg_dt);
        return observe(y, z.z, weight(), omega(), omega0());
    }
};

}  // namespace

TEST_CASE("admissible sources satisfy the certified bound") {
    for (SourceMode mode : {SourceMode::Separable, SourceMode::SeparableConstant, SourceMode::General}) {
        const GridSpec g(2, 7);
        const TimeGrid tg{1.0, 20};
        const AdmissibleSource s = generate_admissible(5, g, tg, mode);
        CHECK(s.vartheta == 0.5);
        for (int m = 0; m <= tg.M; ++m)
            for (const auto& p : enumerate_mesh(g, MeshId::primal(2))) {
                const auto x = physical(g, p);
                const std::span<const double> xs(x.data(), 2);
                CHECK(std::abs(s.dg_dt(tg.t(m), xs)) <= s.C_g * std::abs(s.g(s.vartheta, xs)) * (1 + 1e-12) + 1e-300);
            }
        if (mode != SourceMode::General) CHECK(s.alpha > 0.0);
        CHECK(source_mode_from_string(to_string(mode)) == mode);
    }
}

TEST_CASE("source generation is deterministic per seed") {
    const GridSpec g(1, 15);
    const TimeGrid tg{1.0, 10};
    const AdmissibleSource a = generate_admissible(9, g, tg, SourceMode::Separable);
    const AdmissibleSource b = generate_admissible(9, g, tg, SourceMode::Separable);
    const AdmissibleSource c = generate_admissible(10, g, tg, SourceMode::Separable);
    CHECK(linf_norm(a.f - b.f) == 0.0);
    CHECK(linf_norm(a.f - c.f) > 0.0);
}

TEST_CASE("certification rejects sources vanishing at the observation time") {
    const GridSpec g(1, 7);
    const TimeGrid tg{1.0, 10};
    const SpaceTimeFn g_bad = [](double t, std::span<const double> x) { return (t - 0.5) * std::sin(kPi * x[0]); };
    const SpaceTimeFn dg_bad = [](double, std::span<const double> x) { return std::sin(kPi * x[0]); };
    CHECK_THROWS_AS(certify_source(g_bad, dg_bad, g, tg), Error);
    const SpaceTimeFn g_ok = [](double t, std::span<const double> x) { return (1 + t) * std::sin(kPi * x[0]); };
    const AdmissibleSource ok = certify_source(g_ok, dg_bad, g, tg);
    CHECK(ok.C_g == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("forward map and adjoint satisfy the dot-product test") {
    for (Scheme scheme : {Scheme::Trapezoidal, Scheme::BackwardEuler}) {
        const Twin tw(2, 5);
        SeparableForwardMap F(tw.grid, tw.time, scheme, tw.prob.coeffs, tw.src.R, 16, box_mask(tw.grid, tw.omega()));
        Rng rng(1);
        Vector f(F.domain_size()), r(F.range_size());
        for (auto& v : f) v = uniform(rng, -1, 1);
        for (auto& v : r) v = uniform(rng, -1, 1);
        const double lhs = F.apply(f).dot(r);
        const double rhs = f.dot(F.adjoint(r));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("forward map reproduces the observation of the true source") {
    const Twin tw;
    const Observation obs = tw.observation();
    SeparableForwardMap F(tw.grid, tw.time, Scheme::Trapezoidal, tw.prob.coeffs, tw.src.R, obs.frame, obs.mask);
    const Vector f = Eigen::Map<const Vector>(tw.src.f.values().data(), static_cast<Eigen::Index>(tw.src.f.size()));
    const Vector d = F.pack(obs);
    CHECK((F.apply(f) - d).norm() <= 1e-9 * d.norm());
}

TEST_CASE("noiseless reconstruction recovers the source") {
    const Twin tw;
    const Observation obs = tw.observation();
    ReconstructionOptions opts;
    opts.beta = 1e-12;
    const ReconstructionResult r = reconstruct_source(obs, tw.src.R, tw.prob.coeffs, opts, nullptr, &tw.src.f);
    REQUIRE(r.relative_error.has_value());
    CHECK(*r.relative_error <= 5e-3);
    CHECK(r.residual_history.front() == 1.0);
    CHECK(r.residual_history.back() <= opts.tolerance);
}

TEST_CASE("noise is reproducible per seed") {
    const Twin tw;
    Observation a = tw.observation(), b = a, c = a;
    add_multiplicative_noise(a, 0.01, 4);
    add_multiplicative_noise(b, 0.01, 4);
    add_multiplicative_noise(c, 0.01, 5);
    CHECK(linf_norm(a.snapshot - b.snapshot) == 0.0);
    CHECK(linf_norm(a.snapshot - c.snapshot) > 0.0);
}

TEST_CASE("stability quotient and its error term") {
    const Twin tw;
    const Observation obs = tw.observation();
    const CarlemanWeight w = tw.weight();
    const StabilityQuotient q = stability_quotient(obs, tw.y, tw.prob.coeffs, tw.src.g, w);
    const MeshFunction g_mid = sample_at(tw.grid, MeshId::primal(1), tw.src.g, 0.5);
    CHECK(q.lhs == doctest::Approx(l2_norm(g_mid)));
    CHECK(q.rhs_observed == doctest::Approx(obs.snapshot_h2 + obs.weighted_dt_norm() + obs.weighted_y_norm()));
    CHECK(q.quotient == doctest::Approx(q.lhs / (q.rhs_observed + q.rhs_error_term)));
    const double s0 = w.s(0.0);
    const double expected_log = -std::log(tw.grid.h()) + 0.5 * std::log(s0) - s0 * w.mu0();
    CHECK(q.log_error_factor == doctest::Approx(expected_log));
    CHECK(q.c_double_prime == doctest::Approx(-tw.grid.h() * expected_log));
    const StabilityQuotient red = stability_quotient(obs, tw.y, tw.prob.coeffs, tw.src.g, w, true);
    CHECK(red.reduced);
    CHECK(red.rhs_observed == doctest::Approx(obs.snapshot_h2 + obs.weighted_dt_norm()));
}

TEST_CASE("error term vanishes when y(0) and d_t y(0) do") {
    const GridSpec g(1, 15);
    const TimeGrid tg{1.0, 32};
    const RandomProblem prob = random_problem(3, 1, ProblemOptions{});
    const SpaceTimeFn gs = [](double t, std::span<const double> x) { return t * std::sin(kPi * x[0]); };
    const SpaceTimeFn dgs = [](double, std::span<const double> x) { return std::sin(kPi * x[0]); };
    const AdmissibleSource src = certify_source(gs, dgs, g, tg);
    const Trajectory y = solve_forward(MeshFunction(g, MeshId::primal(1)), src.g, prob.coeffs, tg, Scheme::Trapezoidal);
    const ZSolution z = solve_z_system(y, prob.coeffs, src.g, src.dg_dt);
    WeightParams p;
    p.delta = 0.3125;
    const CarlemanWeight w(build_psi(g, Box::cube(1, 0.4, 0.6), Box::cube(1, 0.3, 0.7), p).psi, p);
    const Observation obs = observe(y, z.z, w, Box::cube(1, 0.3, 0.7), Box::cube(1, 0.4, 0.6));
    const StabilityQuotient q = stability_quotient(obs, y, prob.coeffs, src.g, w);
    CHECK(q.rhs_error_term == 0.0);
    CHECK(std::isfinite(q.quotient));
}

TEST_CASE("observation time away from T/2 is flagged") {
    Twin tw;
    tw.params.vartheta = 0.25;
    const Observation obs = tw.observation();
    CHECK(obs.outside_proof_regime);
    CHECK(obs.frame == 8);
    CHECK_FALSE(Twin().observation().outside_proof_regime);
}

TEST_CASE("inadmissible weights are refused by the quotient") {
    Twin tw;
    const Observation obs = tw.observation();
    tw.params.delta = 0.05;
    CHECK_THROWS_AS(stability_quotient(obs, tw.y, tw.prob.coeffs, tw.src.g, tw.weight()), Error);
}

TEST_CASE("coefficient recovery from an exact trajectory") {
    const GridSpec g(1, 31);
    const TimeGrid tg{1.0, 400};
    ProblemOptions opts;
    opts.time_dependent = false;
    const RandomProblem prob = random_problem(21, 1, opts);
    const SpaceFn p_fn = [](std::span<const double> x) { return 1.0 + x[0]; };
    CoefficientFields full = prob.coeffs;
    full.c = [c = prob.coeffs.c, p_fn](double t, std::span<const double> x) { return c(t, x) - p_fn(x); };
    const MeshFunction y0 = MeshFunction::sample(g, MeshId::primal(1), [](std::span<const double> x) { return std::sin(kPi * x[0]); });
    const Trajectory y = solve_forward(y0, constant_fn(0.0), full, tg, Scheme::Trapezoidal);
    const MeshFunction truth = MeshFunction::sample(g, MeshId::primal(1), p_fn);
    const CoefficientEstimate est = recover_coefficient(y, prob.coeffs, 0.5, 0.1 * linf_norm(y.at_time(0.5)), &truth);
    REQUIRE(est.relative_error.has_value());
    CHECK(*est.relative_error <= 1e-2);
    CHECK(est.mask_count > 0);
    CHECK(est.mask_count <= truth.size());

    // p = 0: the estimate is pure time-discretisation error, second order in dt.
    auto worst_for = [&](int M) {
        const TimeGrid t{1.0, M};
        const Trajectory yp = solve_forward(y0, constant_fn(0.0), prob.coeffs, t, Scheme::Trapezoidal);
        const CoefficientEstimate e = recover_coefficient(yp, prob.coeffs, 0.5, 0.1 * linf_norm(yp.at_time(0.5)));
        double worst = 0.0;
        for (std::size_t k = 0; k < e.p.size(); ++k)
            if (e.mask[k]) worst = std::max(worst, std::abs(e.p[k]));
        return worst;
    };
    const double coarse = worst_for(200), fine = worst_for(400);
    CHECK(fine < 1e-2);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("stability CSV schema") {
    std::ostringstream os;
    write_stability_csv(os, {StabilityRow{3, 0.0625, 15, 1, 2, 0.3125, 2, 1.5, 2.5, 0.0, 0.6, 42}});
    CHECK(os.str() == "run_id,h,N,d,tau,delta,lambda,lhs,rhs_observed,rhs_error_term,quotient,seed\n"
                      "3,0.0625,15,1,2,0.3125,2,1.5,2.5,0,0.6,42\n");
}
