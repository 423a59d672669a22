#include <doctest.h>

#include <cmath>

#include "sdc/weights.hpp"

using namespace sdc;

namespace {

CarlemanWeight weight(double T, double delta, double tau = 2.0, double lambda = 2.0) {
    WeightParams p;
    p.T = T;
    p.delta = delta;
    p.tau = tau;
    p.lambda = lambda;
    return CarlemanWeight(Psi(1, p.x0, p.c0), p);
}

}  // namespace

TEST_CASE("theta at T = 1, delta = 1/2") {
    const CarlemanWeight w = weight(1.0, 0.5);
    CHECK(w.theta(0.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(w.theta(1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(w.theta(0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("closed forms hold for several horizons") {
    for (double T : {0.5, 1.0, 2.0})
        for (double delta : {0.05, 0.25, 0.5}) {
            const CarlemanWeight w = weight(T, delta);
            CHECK(w.theta(0.0) == doctest::Approx(theta_endpoint_closed_form(T, delta)).epsilon(1e-14));
            CHECK(w.theta(T) == doctest::Approx(theta_endpoint_closed_form(T, delta)).epsilon(1e-14));
            CHECK(w.theta(T / 2) == doctest::Approx(theta_midpoint_closed_form(T, delta)).epsilon(1e-14));
            CHECK(w.theta_min() == doctest::Approx(w.theta(T / 2)));
        }
}

TEST_CASE("derivatives of theta match finite differences") {
    const CarlemanWeight w = weight(1.0, 0.25);
    const double e = 1e-5;
    for (double t : {0.1, 0.3, 0.5, 0.77}) {
        CHECK(w.dtheta(t) == doctest::Approx((w.theta(t + e) - w.theta(t - e)) / (2 * e)).epsilon(1e-7));
        CHECK(w.d2theta(t) == doctest::Approx((w.dtheta(t + e) - w.dtheta(t - e)) / (2 * e)).epsilon(1e-7));
    }
}

TEST_CASE("theta is convex with theta'' >= 2/T^2 at T = 1") {
    for (double delta : {0.1, 0.25, 0.5}) {
        const CarlemanWeight w = weight(1.0, delta);
        for (int k = 0; k <= 1000; ++k) CHECK(w.d2theta(k / 1000.0) >= 2.0 * (1 - 1e-14));
    }
}

TEST_CASE("theta'' >= 2 theta(T/2)^2 for every horizon") {
    for (double T : {0.5, 1.0, 2.0, 4.0})
        for (double delta : {0.1, 0.5}) {
            const CarlemanWeight w = weight(T, delta);
            const double floor = 2.0 * w.theta_min() * w.theta_min();
            for (int k = 0; k <= 200; ++k) CHECK(w.d2theta(T * k / 200.0) >= floor * (1 - 1e-14));
        }
}

TEST_CASE("phi is negative and mu0, mu1 bracket |phi|") {
    const CarlemanWeight w = weight(1.0, 0.25);
    const GridSpec g(1, 31);
    for (int k = 0; k <= g.k_max(); ++k) {
        const double x[1] = {g.position(k)};
        const double phi = w.phi(x);
        CHECK(phi < 0.0);
        CHECK(-phi >= w.mu0() * (1 - 1e-14));
        CHECK(-phi <= w.mu1() * (1 + 1e-14));
    }
    CHECK(w.K() == doctest::Approx(1.1 * 2.0));
}

TEST_CASE("admissibility region") {
    const CarlemanWeight w = weight(1.0, 0.25, 2.0);
    Admissibility a = w.admissibility(1.0 / 16);
    CHECK(a.tau_floor == 2.0);
    CHECK(a.mesh_ratio == doctest::Approx(0.5));
    CHECK(a.admissible());
    a = w.admissibility(1.0 / 8);
    CHECK_FALSE(a.ratio_ok);
    const CarlemanWeight low = weight(1.0, 0.25, 1.5);
    CHECK_FALSE(low.admissibility(1.0 / 64).tau_ok);
}

TEST_CASE("coupled delta solves tau1 / (T^2 delta) = eps0 / h") {
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const double delta = coupled_delta(2.0, 0.4, h, 1.0);
        CHECK(2.0 / delta == doctest::Approx(0.4 / h));
    }
    CHECK_THROWS_AS(coupled_delta(2.0, 0.4, 0.5, 1.0), Error);
}

TEST_CASE("time integral scales like tau^(p - 1/2)") {
    for (double p : {0.0, 1.0}) {
        std::vector<double> lt, li;
        for (double tau : {50.0, 100.0, 200.0, 400.0, 800.0}) {
            const CarlemanWeight w = weight(1.0, 0.25, tau);
            const GaussTimeBound b = gauss_time_bound_check(w, p, -w.mu0());
            lt.push_back(std::log(tau));
            li.push_back(std::log(b.integral_scaled));
        }
        const double slope = (li.back() - li.front()) / (lt.back() - lt.front());
        CHECK(std::abs(slope - (p - 0.5)) <= 0.05);
    }
}

TEST_CASE("Laplace asymptotics of the time integral") {
    // int (tau theta)^p e^{2 tau (theta - theta_m) phi} ~ (tau theta_m)^p sqrt(pi / (2 tau |phi| theta_m^2)).
    const double tau = 5000.0;
    const CarlemanWeight w = weight(1.0, 0.5, tau);
    const double phi = -w.mu0();
    const GaussTimeBound b = gauss_time_bound_check(w, 0.0, phi);
    const double tm = w.theta_min();
    const double expected = std::sqrt(std::acos(-1.0) / (2.0 * tau * std::abs(phi) * tm * tm));
    CHECK(b.integral_scaled == doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("psi assumptions on the default boxes") {
    const GridSpec g(2, 15);
    WeightParams p;
    const PsiBuild pb = build_psi(g, Box::cube(2, 0.4, 0.6), Box::cube(2, 0.3, 0.7), p);
    CHECK(pb.report.holds);
    CHECK(pb.report.min_psi_hat > 0.0);
    CHECK(pb.report.c > 0.0);
    // omega0 must sit inside omega.
    CHECK_THROWS_AS(build_psi(g, Box::cube(2, 0.2, 0.8), Box::cube(2, 0.3, 0.7), p), Error);
}

TEST_CASE("sampled weight bounds at delta = 1/4") {
    const CarlemanWeight w = weight(1.0, 0.25);
    const WeightBoundSamples s = sample_weight_bounds(w, GridSpec(1, 15), 2000);
    CHECK(s.min_d2theta >= 2.0);
    CHECK(s.max_parabola_violation <= 1e-12);
    CHECK(s.max_endpoint_exponent <= 1e-9);
    CHECK(s.max_sqrt_theta_violation <= 1e-12);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(weight(1.0, 0.6), Error);
    CHECK_THROWS_AS(weight(1.0, 0.25, 0.5), Error);
    CHECK_THROWS_AS(weight(-1.0, 0.25), Error);
    const CarlemanWeight w = weight(1.0, 0.25);
    CHECK_THROWS_AS(w.theta(1.5), Error);
}
