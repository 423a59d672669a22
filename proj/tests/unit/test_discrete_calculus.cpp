#include <doctest.h>

#include <cmath>

#include "sdc/discrete_calculus.hpp"
#include "sdc/random.hpp"

using namespace sdc;

namespace {

MeshFunction random_on(const GridSpec& g, const MeshId& m, Rng& rng) {
    MeshFunction u(g, m);
    for (auto& v : u.values()) v = uniform(rng, -1.0, 1.0);
    return u;
}

// Neighbour lookup oracle: D_i by direct evaluation at shifted points.
MeshFunction diff_oracle(const MeshFunction& u, int i, const MeshId& target) {
    MeshFunction out(u.grid(), target);
    const auto pts = enumerate_mesh(u.grid(), target);
    for (std::size_t k = 0; k < pts.size(); ++k)
        out[k] = (u.at(shifted(pts[k], i, +1)) - u.at(shifted(pts[k], i, -1))) / u.grid().h();
    return out;
}

}  // namespace

TEST_CASE("frozen 1-D values") {
    const GridSpec g(1, 3);
    const MeshFunction u(g, MeshId::primal(1), {1, 2, 3});
    const MeshFunction du = diff(close(u, 0), 0);
    const std::vector<double> d_expected{4, 4, 4, -12};
    const std::vector<double> a_expected{0.5, 1.5, 2.5, 1.5};
    const MeshFunction au = avg(close(u, 0), 0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(du[k] == doctest::Approx(d_expected[k]));
        CHECK(au[k] == doctest::Approx(a_expected[k]));
    }
    const MeshFunction d2 = second_diff(u, 0, 0);
    CHECK(d2[0] == doctest::Approx(0.0));
    CHECK(d2[1] == doctest::Approx(0.0));
    CHECK(d2[2] == doctest::Approx(-64.0));
    CHECK(integral(u) == doctest::Approx(1.5));
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(3.5)));
    CHECK(linf_norm(u) == 3.0);
}

TEST_CASE("diff matches the neighbour-lookup oracle in 2-D and 3-D") {
    Rng rng(7);
    for (int d = 2; d <= 3; ++d) {
        const GridSpec g(d, 4);
        for (int i = 0; i < d; ++i) {
            const MeshFunction u = random_on(g, MeshId::closure(d, i), rng);
            const MeshFunction du = diff(u, i);
            const MeshFunction oracle = diff_oracle(u, i, du.mesh());
            CHECK(du.mesh() == MeshId::dual_star(d, i));
            CHECK(linf_norm(du - oracle) <= 1e-13);
        }
    }
}

TEST_CASE("second_diff agrees with composed first differences") {
    Rng rng(11);
    const GridSpec g(2, 5);
    const MeshFunction u = random_on(g, MeshId::primal(2), rng);
    const MeshFunction d01 = second_diff(u, 0, 1);
    const MeshFunction composed = diff(diff(close_all(u), 1), 0);
    CHECK(d01.mesh() == MeshId::double_dual(2, 0, 1));
    CHECK(linf_norm(d01 - restrict_to(composed, d01.mesh())) <= 1e-10);
    CHECK(linf_norm(second_diff(u, 0, 1) - second_diff(u, 1, 0)) <= 1e-10);
}

TEST_CASE("product rules and integration by parts on random fields") {
    Rng rng(2025);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 3;
        const GridSpec g(d, 3 + trial % 6);
        for (int i = 0; i < d; ++i) {
            const MeshFunction u = random_on(g, MeshId::closure(d, i), rng);
            const MeshFunction v = random_on(g, MeshId::closure(d, i), rng);
            const auto lr = leibniz_residuals(u, v, i);
            CHECK(lr.diff_rule.relative() <= 1e-12);
            CHECK(lr.avg_rule.relative() <= 1e-12);
            CHECK(avg_square_residual(u, i).relative() <= 1e-12);
            CHECK(diff_square_residual(u, i).relative() <= 1e-12);
            const MeshFunction w = random_on(g, MeshId::dual_star(d, i), rng);
            CHECK(ibp_diff_residual(u, w, i).relative() <= 1e-12);
            CHECK(ibp_avg_residual(u, w, i).relative() <= 1e-12);
        }
    }
}

TEST_CASE("averaging does not increase squares") {
    Rng rng(3);
    const GridSpec g(2, 6);
    const MeshFunction u = random_on(g, MeshId::closure(2, 1), rng);
    const MeshFunction gap = avg(u * u, 1) - avg(u, 1) * avg(u, 1);
    for (double v : gap.values()) CHECK(v >= -1e-15);
}

TEST_CASE("summation by parts for the Dirichlet Laplacian") {
    // -int_W u D(D u) = int_{W*} |D u|^2 when u vanishes on the boundary.
    Rng rng(5);
    const GridSpec g(1, 9);
    const MeshFunction u = random_on(g, MeshId::primal(1), rng);
    const double lhs = -inner(u, second_diff(u, 0, 0));
    const MeshFunction du = diff(close(u, 0), 0);
    CHECK(lhs == doctest::Approx(inner(du, du)).epsilon(1e-12));
}

TEST_CASE("H2 norm collects the documented pieces") {
    const GridSpec g(1, 4);
    const MeshFunction u = MeshFunction::sample(g, MeshId::primal(1), [](std::span<const double> x) { return x[0] * (1 - x[0]); });
    const MeshFunction d2 = second_diff(u, 0, 0);
    const MeshFunction ad = avg_diff(u, 0);
    const double expected = std::sqrt(inner(u, u) + inner(d2, d2) + inner(ad, ad));
    CHECK(h2_norm(u) == doctest::Approx(expected).epsilon(1e-14));
    const Norms n = norms(u);
    REQUIRE(n.h2_h.has_value());
    CHECK(*n.h2_h == doctest::Approx(expected));
    CHECK_FALSE(norms(diff(close(u, 0), 0)).h2_h.has_value());
}

TEST_CASE("operators reject meshes where they are undefined") {
    const GridSpec g(2, 3);
    const MeshFunction f(g, MeshId::boundary_face(2, 0));
    CHECK_THROWS_AS(integral(f), Error);
    const MeshFunction u(g, MeshId::primal(2));
    CHECK_THROWS_AS(diff(u, 2), Error);
    CHECK_THROWS_AS(h2_norm(diff(close(u, 0), 0)), Error);
}
