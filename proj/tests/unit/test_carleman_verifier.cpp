#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdc/carleman_verifier.hpp"
#include "sdc/discrete_calculus.hpp"
#include "sdc/experiments.hpp"

using namespace sdc;

namespace {

struct Setup {
    GridSpec grid{1, 15};
    TimeGrid time{1.0, 64};
    RandomProblem prob = random_problem(2024, 1, ProblemOptions{});
    Trajectory y;
    FrameSource g;
    WeightParams params;

    explicit Setup(int dim = 1, int n = 15) : grid(dim, n), prob(random_problem(2024, dim, ProblemOptions{})) {
        y = solve_problem(prob, grid, time, Scheme::Trapezoidal);
        g = sampled_source(grid, time, prob.g);
    }

    CarlemanWeight weight() const {
        return CarlemanWeight(build_psi(grid, omega0(), omega(), params).psi, params);
    }
    Box omega() const { return Box::cube(grid.dim(), 0.3, 0.7); }
    Box omega0() const { return Box::cube(grid.dim(), 0.4, 0.6); }
};

double trapezoid(const TimeGrid& tg, int m) { return (m == 0 || m == tg.M) ? 0.5 * tg.dt() : tg.dt(); }

}  // namespace

TEST_CASE("log-space accumulation") {
    LogTermBuilder b;
    b.add(std::log(2.0), 3.0);  // 18
    b.add(0.0, 0.0);            // ignored
    b.add(std::log(0.5), -2.0); // 2
    CHECK(b.finish().value() == doctest::Approx(20.0));
    LogTermBuilder tiny;
    tiny.add(-2000.0, 1.0);
    tiny.add(-2000.0 + std::log(3.0), 1.0);
    const LogTerm t = tiny.finish();
    CHECK(t.value() == 0.0);  // underflows as a double
    CHECK(t.log_value == doctest::Approx(-2000.0 + std::log(4.0)));
    CHECK(LogTerm{}.is_zero());
    CHECK(log_add(LogTerm{}, t).log_value == t.log_value);
}

TEST_CASE("terms agree with a direct evaluation at moderate weights") {
    Setup s;
    s.params.tau = 1.0;
    s.params.lambda = 1.0;
    s.params.delta = 0.5;
    const CarlemanWeight w = s.weight();
    const int p = 1;
    const LhsTerms lhs = compute_lhs(s.y, s.prob.coeffs, w, p);
    const RhsTerms rhs = compute_rhs(s.y, s.g, w, p, s.omega());

    const auto pts = enumerate_mesh(s.grid, MeshId::primal(1));
    const auto dual = enumerate_mesh(s.grid, MeshId::dual_star(1, 0));
    const std::vector<char> mask = box_mask(s.grid, s.omega());
    const double h = s.grid.h();
    double zeroth = 0, grad = 0, source = 0, local = 0;
    for (int m = 0; m <= s.time.M; ++m) {
        const double t = s.time.t(m), st = w.s(t), wm = trapezoid(s.time, m) * h;
        const MeshFunction& y = s.y.frame(m);
        const MeshFunction dy = diff(close(y, 0), 0);
        const Vector gm = s.g(m);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const auto x = physical(s.grid, pts[k]);
            const double e = std::exp(2 * st * w.phi(std::span<const double>(x.data(), 1)));
            zeroth += wm * std::pow(st, p + 3) * e * y[k] * y[k];
            source += wm * std::pow(st, p) * e * gm[static_cast<Eigen::Index>(k)] * gm[static_cast<Eigen::Index>(k)];
            if (mask[k]) local += wm * std::pow(st, p + 3) * e * y[k] * y[k];
        }
        for (std::size_t k = 0; k < dual.size(); ++k) {
            const auto x = physical(s.grid, dual[k]);
            const double e = std::exp(2 * st * w.phi(std::span<const double>(x.data(), 1)));
            grad += wm * std::pow(st, p + 1) * e * dy[k] * dy[k];
        }
    }
    double ends = 0;
    const double s0 = w.s(0.0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto x = physical(s.grid, pts[k]);
        const double e = std::exp(2 * s0 * w.phi(std::span<const double>(x.data(), 1)));
        const double a = s.y.frame(0)[k], b = s.y.frame(s.time.M)[k];
        ends += h / (h * h) * std::pow(s0, p) * e * (a * a + b * b);
    }
    CHECK(lhs.J_zeroth.value() == doctest::Approx(zeroth).epsilon(1e-12));
    CHECK(lhs.J_gradient.value() == doctest::Approx(grad).epsilon(1e-12));
    CHECK(rhs.source.value() == doctest::Approx(source).epsilon(1e-12));
    CHECK(rhs.local_omega.value() == doctest::Approx(local).epsilon(1e-12));
    CHECK(rhs.time_endpoints.value() == doctest::Approx(ends).epsilon(1e-12));
}

TEST_CASE("ratio is reported only inside the admissible region") {
    Setup s;
    CarlemanReport r = verify_inequality(s.y, s.g, s.prob.coeffs, s.weight(), 0, s.omega(), s.omega0());
    CHECK(r.admissible());
    REQUIRE(r.ratio.has_value());
    CHECK(std::isfinite(*r.ratio));
    CHECK(*r.ratio == doctest::Approx(std::exp(r.log_ratio)));

    s.params.delta = 0.05;  // tau h / (delta T^2) = 2.5 > epsilon
    r = verify_inequality(s.y, s.g, s.prob.coeffs, s.weight(), 0, s.omega(), s.omega0());
    CHECK_FALSE(r.admissible());
    CHECK_FALSE(r.ratio.has_value());
    CHECK(std::isfinite(r.log_ratio));
}

TEST_CASE("a trajectory from another source is rejected") {
    Setup s;
    const FrameSource other = [&](int m) { return Vector(2.0 * s.g(m)); };
    CHECK_THROWS_AS(verify_inequality(s.y, other, s.prob.coeffs, s.weight(), 0, s.omega(), s.omega0()), Error);
}

TEST_CASE("zero trajectory gives zero terms") {
    Setup s;
    const MeshFunction zero(s.grid, MeshId::primal(1));
    const FrameSource g0 = [&](int) { return Vector(Vector::Zero(static_cast<Eigen::Index>(zero.size()))); };
    const Trajectory y0 = solve_forward(zero, g0, s.prob.coeffs, s.time, Scheme::Trapezoidal);
    const LhsTerms l = compute_lhs(y0, s.prob.coeffs, s.weight(), 1);
    CHECK(l.I().is_zero());
    CHECK(l.J().is_zero());
    CHECK(compute_rhs(y0, g0, s.weight(), 1, s.omega()).total().is_zero());
}

TEST_CASE("large weights stay finite in log space") {
    Setup s(2, 7);
    s.params.tau = 40.0;
    s.params.delta = 0.5;
    s.params.epsilon = 100.0;
    const CarlemanReport r = verify_inequality(s.y, s.g, s.prob.coeffs, s.weight(), 1, s.omega(), s.omega0());
    CHECK(r.rhs.time_endpoints.value() == 0.0);
    CHECK(std::isfinite(r.rhs.time_endpoints.log_value));
    CHECK(std::isfinite(r.log_ratio));
}

TEST_CASE("pointwise time bound") {
    Setup s;
    const CarlemanWeight w = s.weight();
    const PointwiseTimeBound b = pointwise_time_bound(s.y, s.prob.coeffs, w, 0, 0.5, 0.0);
    const PointwiseTimeBound ok = pointwise_time_bound(s.y, s.prob.coeffs, w, 0, 0.5, b.required_C * 1.01 + 1e-12);
    CHECK(ok.holds);
    if (b.required_C > 0) {
        const PointwiseTimeBound no = pointwise_time_bound(s.y, s.prob.coeffs, w, 0, 0.5, b.required_C * 0.99);
        CHECK_FALSE(no.holds);
    }
}

TEST_CASE("feasibility map rows and CSV schema") {
    Setup s;
    const std::vector<FeasibilityRun> runs{{s.y, s.g, s.prob.coeffs}};
    const auto rows = feasibility_map(runs, {1.0, 2.0, 4.0}, {0.25, 0.5}, s.params, 0, s.omega(), s.omega0());
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(r.h == doctest::Approx(1.0 / 16));
        CHECK(r.ratio.has_value() == r.admissible);
        CHECK((r.tau >= 2.0 || !r.admissible));
    }
    std::ostringstream os;
    write_feasibility_csv(os, rows);
    const std::string csv = os.str();
    CHECK(csv.rfind("h,tau,delta,lambda,p,I_p,J_p,rhs_source,rhs_local,rhs_endpoint,ratio,admissible\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("empty observation region is rejected") {
    Setup s(1, 3);
    CHECK_THROWS_AS(compute_rhs(s.y, s.g, s.weight(), 0, Box::cube(1, 0.3, 0.45)), Error);
    CHECK_THROWS_AS(compute_lhs(s.y, s.prob.coeffs, s.weight(), 2), Error);
}
