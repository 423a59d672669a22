#include <doctest.h>

#include <algorithm>
#include <random>

#include "sdc/grid.hpp"

using namespace sdc;

namespace {

std::vector<double> xs(const GridSpec& g, const MeshId& m) {
    std::vector<double> out;
    for (const auto& p : enumerate_mesh(g, m)) out.push_back(physical(g, p)[0]);
    return out;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-15));
}

}  // namespace

TEST_CASE("axis ranges in half-step coordinates") {
    const GridSpec g(1, 3);
    CHECK(g.h() == 0.25);
    CHECK(g.k_max() == 8);
    auto r = axis_range(g, AxisSet::Interior);
    CHECK((r.first == 2 && r.step == 2 && r.count == 3));
    r = axis_range(g, AxisSet::Closed);
    CHECK((r.first == 0 && r.step == 2 && r.count == 5));
    r = axis_range(g, AxisSet::Dual);
    CHECK((r.first == 1 && r.step == 2 && r.count == 4));
    r = axis_range(g, AxisSet::DualInner);
    CHECK((r.first == 3 && r.step == 2 && r.count == 2));
    r = axis_range(g, AxisSet::Boundary);
    CHECK((r.first == 0 && r.step == 8 && r.count == 2));
}

TEST_CASE("dual meshes of the 1-D grid with N = 3") {
    const GridSpec g(1, 3);
    check_close(xs(g, MeshId::primal(1)), {0.25, 0.5, 0.75});
    check_close(xs(g, MeshId::dual_star(1, 0)), {0.125, 0.375, 0.625, 0.875});
    check_close(xs(g, MeshId::dual_prime(1, 0)), {0.375, 0.625});
    check_close(xs(g, MeshId::boundary_face(1, 0)), {0.0, 1.0});
    CHECK(MeshId::double_dual(1, 0, 0) == MeshId::closure(1, 0));
}

TEST_CASE("mesh sizes follow the product structure") {
    const GridSpec g(3, 4);
    CHECK(mesh_size(g, MeshId::primal(3)) == 64);
    CHECK(mesh_size(g, MeshId::dual_star(3, 1)) == 4 * 5 * 4);
    CHECK(mesh_size(g, MeshId::dual_prime(3, 2)) == 4 * 4 * 3);
    CHECK(mesh_size(g, MeshId::double_dual(3, 0, 2)) == 5 * 4 * 5);
    CHECK(mesh_size(g, MeshId::boundary_face(3, 0)) == 2 * 4 * 4);
}

TEST_CASE("enumeration is lexicographic and index/point round-trip") {
    for (int d = 1; d <= 3; ++d) {
        const GridSpec g(d, 3);
        for (const MeshId& m : {MeshId::primal(d), MeshId::dual_star(d, d - 1), MeshId::double_dual(d, 0, d - 1),
                                MeshId::boundary_face(d, 0)}) {
            const auto pts = enumerate_mesh(g, m);
            CHECK(std::is_sorted(pts.begin(), pts.end()));
            for (std::size_t k = 0; k < pts.size(); ++k) {
                CHECK(mesh_index(g, m, pts[k]) == static_cast<std::ptrdiff_t>(k));
                CHECK(mesh_point(g, m, k) == pts[k]);
            }
            // A point of another parity is not on the mesh.
            MeshPoint off = pts.front();
            off.k[0] += 1;
            CHECK(mesh_index(g, m, off) == -1);
        }
    }
}

TEST_CASE("trace and normals on the boundary") {
    const GridSpec g(1, 3);
    const MeshFunction v(g, MeshId::dual_star(1, 0), {10, 20, 30, 40});
    const MeshFunction tr = trace(v, 0);
    REQUIRE(tr.size() == 2);
    CHECK(tr[0] == 10);
    CHECK(tr[1] == 40);
    const MeshFunction nu = normal_field(g, 0);
    CHECK(nu[0] == -1);
    CHECK(nu[1] == 1);
}

TEST_CASE("Dirichlet closure extends by zero") {
    const GridSpec g(2, 2);
    MeshFunction u = MeshFunction::constant(g, MeshId::primal(2), 1.0);
    const MeshFunction c = close(u, 1);
    CHECK(c.size() == 2 * 4);
    double sum = 0;
    for (double v : c.values()) sum += v;
    CHECK(sum == 4.0);
    for (const auto& p : enumerate_mesh(g, c.mesh())) {
        const bool boundary = p.k[1] == 0 || p.k[1] == g.k_max();
        CHECK(c.at(p) == (boundary ? 0.0 : 1.0));
    }
    CHECK(close_all(u).size() == 16);
}

TEST_CASE("contract violations throw") {
    const GridSpec g(2, 3);
    const MeshFunction a(g, MeshId::primal(2));
    const MeshFunction b(g, MeshId::dual_star(2, 0));
    CHECK_THROWS_AS(a + b, Error);
    CHECK_THROWS_AS(check_axis(2, 2), Error);
    CHECK_THROWS_AS(GridSpec(4, 3), Error);
    CHECK_THROWS_AS(GridSpec(1, 0), Error);
    CHECK_THROWS_AS(MeshFunction(g, MeshId::primal(2), std::vector<double>(3)), Error);
    CHECK_THROWS_AS(close(b, 0), Error);
}
