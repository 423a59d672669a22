#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sdc/discrete_calculus.hpp"
#include "sdc/experiments.hpp"
#include "sdc/forward_solver.hpp"
#include "sdc/random.hpp"

using namespace sdc;

namespace {

constexpr double kPi = std::numbers::pi;

MeshFunction sine_mode(const GridSpec& g) {
    return MeshFunction::sample(g, MeshId::primal(g.dim()), [&](std::span<const double> x) {
        double v = 1.0;
        for (int j = 0; j < g.dim(); ++j) v *= std::sin(kPi * x[static_cast<std::size_t>(j)]);
        return v;
    });
}

Vector as_vector(const MeshFunction& u) {
    return Eigen::Map<const Vector>(u.values().data(), static_cast<Eigen::Index>(u.size()));
}

}  // namespace

TEST_CASE("time grid") {
    const TimeGrid tg{2.0, 8};
    CHECK(tg.dt() == 0.25);
    CHECK(tg.t(8) == 2.0);
    CHECK(tg.index_of(1.0) == 4);
    CHECK_THROWS_AS(tg.index_of(0.3), Error);
    CHECK(tg.times().size() == 9);
    CHECK(scheme_from_string("cn") == Scheme::Trapezoidal);
    CHECK(scheme_from_string("backward-euler") == Scheme::BackwardEuler);
    CHECK_THROWS_AS(scheme_from_string("rk4"), Error);
}

TEST_CASE("assembled matrix equals the operator oracle") {
    for (int d = 1; d <= 3; ++d) {
        const RandomProblem prob = random_problem(41 + static_cast<std::uint64_t>(d), d, ProblemOptions{});
        const GridSpec g(d, d == 3 ? 4 : 7);
        Rng rng(9);
        MeshFunction y(g, MeshId::primal(d));
        for (auto& v : y.values()) v = uniform(rng, -1, 1);
        for (double t : {0.0, 0.37}) {
            const SparseMatrix A = assemble_Ah(prob.coeffs, g, t);
            const Vector oracle = as_vector(apply_Ah(prob.coeffs, y, t));
            CHECK((A * as_vector(y) - oracle).norm() <= 1e-11 * oracle.norm());
        }
    }
}

TEST_CASE("the operator is symmetric without drift") {
    ProblemOptions opts;
    opts.b_max = 0.0;
    const RandomProblem prob = random_problem(5, 2, opts);
    const SparseMatrix A = assemble_Ah(prob.coeffs, GridSpec(2, 6), 0.2);
    const SparseMatrix At = A.transpose();
    CHECK((A - At).norm() <= 1e-12 * A.norm());
    StepSolver s;
    SparseMatrix I(A.rows(), A.cols());
    I.setIdentity();
    s.set(SparseMatrix(I - 0.01 * A));
    CHECK(s.symmetric());
}

TEST_CASE("non-positive diffusion is rejected") {
    CoefficientFields c = CoefficientFields::constant(1, 1.0, 0.0, 0.0);
    c.gamma[0] = [](double t, std::span<const double>) { return 0.5 - t; };
    CHECK_NOTHROW(assemble_Ah(c, GridSpec(1, 5), 0.1));
    CHECK_THROWS_AS(assemble_Ah(c, GridSpec(1, 5), 0.6), Error);
}

TEST_CASE("one step on the first eigenmode matches the exact amplification") {
    const GridSpec g(1, 15);
    const double h = g.h();
    const double lambda = -4.0 / (h * h) * std::pow(std::sin(kPi * h / 2), 2);
    const CoefficientFields c = CoefficientFields::constant(1, 1.0, 0.0, 0.0);
    const MeshFunction y0 = sine_mode(g);
    const TimeGrid tg{0.1, 1};
    const double dt = tg.dt();
    const Trajectory be = solve_forward(y0, constant_fn(0.0), c, tg, Scheme::BackwardEuler);
    CHECK(linf_norm(be.frame(1) - (1.0 / (1.0 - dt * lambda)) * y0) <= 1e-10);
    const Trajectory cn = solve_forward(y0, constant_fn(0.0), c, tg, Scheme::Trapezoidal);
    const double amp = (1.0 + 0.5 * dt * lambda) / (1.0 - 0.5 * dt * lambda);
    CHECK(linf_norm(cn.frame(1) - amp * y0) <= 1e-10);
}

TEST_CASE("scheme residual separates consistent and inconsistent data") {
    const RandomProblem prob = random_problem(77, 2, ProblemOptions{});
    const GridSpec g(2, 7);
    const TimeGrid tg{1.0, 40};
    const Trajectory y = solve_problem(prob, g, tg, Scheme::Trapezoidal);
    const FrameSource src = sampled_source(g, tg, prob.g);
    CHECK(scheme_residual(y, src, prob.coeffs) <= 1e-9);
    const FrameSource wrong = [&](int m) { Vector v = src(m); return Vector(1.1 * v); };
    CHECK(scheme_residual(y, wrong, prob.coeffs) >= 1e-3);
    CHECK(y.diagnostics.max_relative_residual <= 1e-10);
    CHECK(y.diagnostics.steps == 40);
}

TEST_CASE("time derivative is exact for quadratics in time") {
    const GridSpec g(1, 4);
    Trajectory tr;
    tr.grid = g;
    tr.time = TimeGrid{1.0, 10};
    const MeshFunction s = sine_mode(g);
    for (int m = 0; m <= 10; ++m) {
        const double t = tr.time.t(m);
        tr.frames.push_back((1 + 2 * t + 3 * t * t) * s);
    }
    const auto dy = time_derivative(tr);
    for (int m = 0; m <= 10; ++m)
        CHECK(linf_norm(dy[static_cast<std::size_t>(m)] - (2 + 6 * tr.time.t(m)) * s) <= 1e-11);
}

TEST_CASE("differentiated system reproduces d_t y") {
    const RandomProblem prob = random_problem(123, 1, ProblemOptions{});
    const GridSpec g(1, 15);
    const Trajectory y = solve_problem(prob, g, TimeGrid{1.0, 400}, Scheme::Trapezoidal);
    const ZSolution z = solve_z_system(y, prob.coeffs, prob.g, prob.dg_dt);
    const auto dy = time_derivative(y);
    double worst = 0.0;
    for (int m = 200; m <= 400; ++m)
        worst = std::max(worst, l2_norm(z.z.frame(m) - dy[static_cast<std::size_t>(m)]) / l2_norm(dy[static_cast<std::size_t>(m)]));
    CHECK(worst <= 1e-3);
    CHECK_FALSE(z.reversed_time_used);
    // Before T/2 the frames are the differenced y.
    CHECK(linf_norm(z.z.frame(10) - dy[10]) == 0.0);
}

TEST_CASE("B_h vanishes for stationary coefficients") {
    ProblemOptions opts;
    opts.time_dependent = false;
    const RandomProblem prob = random_problem(8, 2, opts);
    const GridSpec g(2, 5);
    CHECK(linf_norm(apply_Bh(prob.coeffs, sine_mode(g), 0.3)) == 0.0);
}

TEST_CASE("energy estimate on a random run") {
    const RandomProblem prob = random_problem(99, 2, ProblemOptions{});
    const GridSpec g(2, 7);
    const TimeGrid tg{1.0, 100};
    const Trajectory y = solve_problem(prob, g, tg, Scheme::Trapezoidal);
    const auto times = tg.times();
    const CoefficientBounds b = compute_bounds(prob.coeffs, g, times);
    CHECK(energy_constant(2, b) == doctest::Approx(b.reg_gamma * b.b_sup * b.b_sup + b.c_sup + 0.5));
    const EnergyCheck e = energy_check(y, prob.g, b, 0.2, 0.9);
    CHECK(e.holds);
    CHECK(e.lhs <= e.rhs);
    CHECK_THROWS_AS(energy_check(y, prob.g, b, 0.5, 0.5), Error);
}

TEST_CASE("trajectory text round trip is bit-exact") {
    const RandomProblem prob = random_problem(3, 2, ProblemOptions{});
    const Trajectory y = solve_problem(prob, GridSpec(2, 3), TimeGrid{0.5, 6}, Scheme::BackwardEuler);
    std::stringstream ss;
    write_trajectory(ss, y);
    const Trajectory back = read_trajectory(ss);
    CHECK(back.grid == y.grid);
    CHECK(back.time.M == 6);
    CHECK(back.time.T == 0.5);
    CHECK(back.scheme == Scheme::BackwardEuler);
    CHECK(back.source == y.source);
    for (int m = 0; m <= 6; ++m)
        for (std::size_t k = 0; k < y.frame(m).size(); ++k) CHECK(back.frame(m)[k] == y.frame(m)[k]);
    std::stringstream bad("sdc-trajectory 1\ndim 2\n");
    CHECK_THROWS_AS(read_trajectory(bad), Error);
}
