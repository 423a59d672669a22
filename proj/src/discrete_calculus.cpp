#include "sdc/discrete_calculus.hpp"

#include <algorithm>
#include <cmath>

#include "sdc/summation.hpp"

namespace sdc {

namespace {

AxisSet shifted_axis(AxisSet s, const MeshId& mesh, int i) {
    switch (s) {
        case AxisSet::Closed: return AxisSet::Dual;
        case AxisSet::Interior: return AxisSet::DualInner;
        case AxisSet::Dual: return AxisSet::Interior;
        case AxisSet::DualInner:
        case AxisSet::Boundary: break;
    }
    throw Error("mesh " + mesh.name() + " cannot be shifted by h/2 in axis " + std::to_string(i));
}

struct Split {
    std::size_t outer = 1;
    std::size_t inner = 1;
    std::size_t src_mid = 0;
    std::size_t dst_mid = 0;
};

// Applies out(p) = op(u(p - h/2 e_i), u(p + h/2 e_i)). In axis-i positions the
// two neighbours of target position q are source positions q and q + 1 for
// every admissible transition.
template <class Op>
MeshFunction half_shift(const MeshFunction& u, int i, Op op) {
    const GridSpec& grid = u.grid();
    check_axis(grid.dim(), i);
    const MeshId target = u.mesh().with_axis(i, shifted_axis(u.mesh().axis(i), u.mesh(), i));
    MeshFunction out(grid, target);
    if (out.size() == 0) return out;
    Split s;
    for (int a = 0; a < grid.dim(); ++a) {
        const auto c = static_cast<std::size_t>(axis_range(grid, u.mesh().axis(a)).count);
        if (a < i) s.outer *= c;
        else if (a > i) s.inner *= c;
    }
    s.src_mid = static_cast<std::size_t>(axis_range(grid, u.mesh().axis(i)).count);
    s.dst_mid = s.src_mid - 1;
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t q = 0; q < s.dst_mid; ++q) {
            const std::size_t lo = (o * s.src_mid + q) * s.inner;
            const std::size_t hi = lo + s.inner;
            const std::size_t dst = (o * s.dst_mid + q) * s.inner;
            for (std::size_t r = 0; r < s.inner; ++r) out[dst + r] = op(u[lo + r], u[hi + r]);
        }
    }
    return out;
}

void require_primal(const MeshFunction& u, const char* what) {
    if (!u.mesh().is_primal()) throw Error(std::string(what) + ": expected a primal function, got " + u.mesh().name());
}

double max_abs(const MeshFunction& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

// Max-norm of lhs - rhs, scaled by the largest |lhs| + |rhs|.
IdentityResidual pointwise_residual(const MeshFunction& lhs, const MeshFunction& rhs) {
    IdentityResidual r;
    for (std::size_t k = 0; k < lhs.size(); ++k) {
        r.residual = std::max(r.residual, std::abs(lhs[k] - rhs[k]));
        r.scale = std::max(r.scale, std::abs(lhs[k]) + std::abs(rhs[k]));
    }
    return r;
}

}  // namespace

MeshFunction diff(const MeshFunction& u, int i) {
    const double inv_h = 1.0 / u.grid().h();
    return half_shift(u, i, [inv_h](double minus, double plus) { return (plus - minus) * inv_h; });
}

MeshFunction avg(const MeshFunction& u, int i) {
    return half_shift(u, i, [](double minus, double plus) { return 0.5 * (plus + minus); });
}

MeshFunction second_diff(const MeshFunction& u, int i, int j) {
    require_primal(u, "second_diff");
    check_axis(u.grid().dim(), i);
    check_axis(u.grid().dim(), j);
    const MeshFunction dj = diff(close(u, j), j);
    if (i == j) return diff(dj, i);
    return diff(close(dj, i), i);
}

MeshFunction avg_diff(const MeshFunction& u, int i) {
    require_primal(u, "avg_diff");
    return avg(diff(close(u, i), i), i);
}

double integral(const MeshFunction& u) {
    if (u.mesh().has_boundary_axis()) throw Error("integral: use boundary_integral for " + u.mesh().name());
    const double w = std::pow(u.grid().h(), u.grid().dim());
    return w * compensated_sum(u.values());
}

double boundary_integral(const MeshFunction& u) {
    bool is_face = false;
    for (int a = 0; a < u.mesh().dim(); ++a)
        if (u.mesh() == MeshId::boundary_face(u.mesh().dim(), a)) is_face = true;
    if (!is_face) throw Error("boundary_integral: expected a boundary face mesh, got " + u.mesh().name());
    const double w = std::pow(u.grid().h(), u.grid().dim() - 1);
    return w * compensated_sum(u.values());
}

double inner(const MeshFunction& u, const MeshFunction& v) {
    return integral(u * v);
}

double l2_norm(const MeshFunction& u) {
    return std::sqrt(std::max(0.0, inner(u, u)));
}

double linf_norm(const MeshFunction& u) {
    return max_abs(u);
}

double h2_norm(const MeshFunction& u) {
    require_primal(u, "h2_norm");
    CompensatedSum s;
    s.add(inner(u, u));
    for (int i = 0; i < u.grid().dim(); ++i) {
        const MeshFunction d2 = second_diff(u, i, i);
        const MeshFunction ad = avg_diff(u, i);
        s.add(inner(d2, d2));
        s.add(inner(ad, ad));
    }
    return std::sqrt(std::max(0.0, s.value()));
}

Norms norms(const MeshFunction& u) {
    Norms n{l2_norm(u), linf_norm(u), std::nullopt};
    if (u.mesh().is_primal()) n.h2_h = h2_norm(u);
    return n;
}

IdentityResidual ibp_diff_residual(const MeshFunction& u, const MeshFunction& v, int i) {
    const GridSpec& grid = u.grid();
    check_axis(grid.dim(), i);
    if (!(grid == v.grid())) throw Error("ibp_diff_residual: grid mismatch");
    u.require_mesh(MeshId::closure(grid.dim(), i), "ibp_diff_residual(u)");
    v.require_mesh(MeshId::dual_star(grid.dim(), i), "ibp_diff_residual(v)");
    const MeshId primal = MeshId::primal(grid.dim());
    const MeshId face = MeshId::boundary_face(grid.dim(), i);

    const double a = inner(restrict_to(u, primal), diff(v, i));
    const double b = inner(v, diff(u, i));
    const double c = boundary_integral(restrict_to(u, face) * trace(v, i) * normal_field(grid, i));
    return {a + b - c, std::abs(a) + std::abs(b) + std::abs(c)};
}

IdentityResidual ibp_avg_residual(const MeshFunction& u, const MeshFunction& v, int i) {
    const GridSpec& grid = u.grid();
    check_axis(grid.dim(), i);
    if (!(grid == v.grid())) throw Error("ibp_avg_residual: grid mismatch");
    u.require_mesh(MeshId::closure(grid.dim(), i), "ibp_avg_residual(u)");
    v.require_mesh(MeshId::dual_star(grid.dim(), i), "ibp_avg_residual(v)");
    const MeshId primal = MeshId::primal(grid.dim());
    const MeshId face = MeshId::boundary_face(grid.dim(), i);

    const double a = inner(restrict_to(u, primal), avg(v, i));
    const double b = inner(v, avg(u, i));
    const double c = 0.5 * grid.h() * boundary_integral(restrict_to(u, face) * trace(v, i));
    return {a - b + c, std::abs(a) + std::abs(b) + std::abs(c)};
}

LeibnizResiduals leibniz_residuals(const MeshFunction& u, const MeshFunction& v, int i) {
    const MeshFunction du = diff(u, i), dv = diff(v, i);
    const MeshFunction au = avg(u, i), av = avg(v, i);
    const MeshFunction uv = u * v;
    const double q = 0.25 * u.grid().h() * u.grid().h();
    LeibnizResiduals out;
    out.diff_rule = pointwise_residual(diff(uv, i), du * av + au * dv);
    out.avg_rule = pointwise_residual(avg(uv, i), au * av + q * (du * dv));
    return out;
}

IdentityResidual avg_square_residual(const MeshFunction& u, int i) {
    const MeshFunction au = avg(u, i), du = diff(u, i);
    const double q = 0.25 * u.grid().h() * u.grid().h();
    return pointwise_residual(avg(u * u, i), au * au + q * (du * du));
}

IdentityResidual diff_square_residual(const MeshFunction& u, int i) {
    const MeshFunction au = avg(u, i), du = diff(u, i);
    return pointwise_residual(diff(u * u, i), 2.0 * (du * au));
}

}  // namespace sdc
