#pragma once

#include <cmath>
#include <optional>

#include "sdc/grid.hpp"

namespace sdc {

/// D_i u(x) = (u(x + h/2 e_i) - u(x - h/2 e_i)) / h.
///
/// Defined on the points whose two half-step neighbours lie on u's mesh:
/// Closed -> Dual, Interior -> DualInner, Dual -> Interior in axis i. No
/// extension is applied; use close() first for Dirichlet data.
MeshFunction diff(const MeshFunction& u, int i);

/// A_i u(x) = (u(x + h/2 e_i) + u(x - h/2 e_i)) / 2, same mesh rules as diff.
MeshFunction avg(const MeshFunction& u, int i);

/// D_i D_j u for a primal u extended by zero across the boundary.
/// For i == j the result lives on W; otherwise on the double dual mesh W**_ij.
MeshFunction second_diff(const MeshFunction& u, int i, int j);

/// A_i D_i u on W for a primal u with Dirichlet closure.
MeshFunction avg_diff(const MeshFunction& u, int i);

/// h^d * sum over the mesh. Rejects boundary-face meshes.
double integral(const MeshFunction& u);
/// h^(d-1) * sum over d_i W.
double boundary_integral(const MeshFunction& u);
double inner(const MeshFunction& u, const MeshFunction& v);

double l2_norm(const MeshFunction& u);
double linf_norm(const MeshFunction& u);
/// ||u||_{H^2_h}^2 = ||u||^2 + sum_i int_W |D_i^2 u|^2 + |A_i D_i u|^2. Primal only.
double h2_norm(const MeshFunction& u);

struct Norms {
    double l2_h;
    double linf_h;
    std::optional<double> h2_h;  // present for primal functions only
};

Norms norms(const MeshFunction& u);

/// A residual of an identity that is exact in real arithmetic, together with
/// the magnitude of the terms that produced it.
struct IdentityResidual {
    double residual = 0.0;
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// int_W u D_i v + int_{W*_i} v D_i u - int_{d_i W} u t_r(v) nu_i
/// for u on Closure(i) and v on DualStar(i).
IdentityResidual ibp_diff_residual(const MeshFunction& u, const MeshFunction& v, int i);

/// int_W u A_i v - int_{W*_i} v A_i u + h/2 int_{d_i W} u t_r(v).
IdentityResidual ibp_avg_residual(const MeshFunction& u, const MeshFunction& v, int i);

struct LeibnizResiduals {
    IdentityResidual diff_rule;  // D_i(uv) - (D_i u A_i v + A_i u D_i v)
    IdentityResidual avg_rule;   // A_i(uv) - (A_i u A_i v + h^2/4 D_i u D_i v)
};

/// Max-norm residuals of the product rules; u and v share a mesh on which
/// D_i is defined.
LeibnizResiduals leibniz_residuals(const MeshFunction& u, const MeshFunction& v, int i);

/// Max-norm residual of A_i(|u|^2) - |A_i u|^2 - h^2/4 |D_i u|^2.
IdentityResidual avg_square_residual(const MeshFunction& u, int i);
/// Max-norm residual of D_i(|u|^2) - 2 D_i u A_i u.
IdentityResidual diff_square_residual(const MeshFunction& u, int i);

}  // namespace sdc
