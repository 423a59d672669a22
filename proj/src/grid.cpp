#include "sdc/grid.hpp"

#include <algorithm>
#include <sstream>

namespace sdc {

GridSpec::GridSpec(int dim, int n) : dim_(dim), n_(n) {
    if (dim < 1 || dim > kMaxDim) {
        throw Error("GridSpec: dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                    std::to_string(dim));
    }
    if (n < 1) {
        throw Error("GridSpec: need at least one interior point per axis, got N = " + std::to_string(n));
    }
}

AxisRange axis_range(const GridSpec& grid, AxisSet set) {
    const int n = grid.n();
    switch (set) {
        case AxisSet::Interior: return {2, 2, n};
        case AxisSet::Closed: return {0, 2, n + 2};
        case AxisSet::Dual: return {1, 2, n + 1};
        case AxisSet::DualInner: return {3, 2, n - 1};
        case AxisSet::Boundary: return {0, grid.k_max(), 2};
    }
    throw Error("axis_range: unknown axis set");
}

bool axis_contains(const GridSpec& grid, AxisSet set, int k) {
    const AxisRange r = axis_range(grid, set);
    if (r.count <= 0 || k < r.first) return false;
    const int off = k - r.first;
    return off % r.step == 0 && off / r.step < r.count;
}

char axis_code(AxisSet set) {
    switch (set) {
        case AxisSet::Interior: return 'I';
        case AxisSet::Closed: return 'C';
        case AxisSet::Dual: return 'D';
        case AxisSet::DualInner: return 'd';
        case AxisSet::Boundary: return 'B';
    }
    return '?';
}

void check_axis(int dim, int i) {
    if (i < 0 || i >= dim) {
        throw Error("axis index " + std::to_string(i) + " out of range for dimension " + std::to_string(dim));
    }
}

namespace {

std::array<AxisSet, kMaxDim> interior_axes() {
    return {AxisSet::Interior, AxisSet::Interior, AxisSet::Interior};
}

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) throw Error("MeshId: dimension out of range");
}

}  // namespace

MeshId MeshId::primal(int dim) {
    check_dim(dim);
    return MeshId(dim, interior_axes());
}

MeshId MeshId::dual_star(int dim, int i) {
    check_dim(dim);
    check_axis(dim, i);
    auto axes = interior_axes();
    axes[static_cast<std::size_t>(i)] = AxisSet::Dual;
    return MeshId(dim, axes);
}

MeshId MeshId::dual_prime(int dim, int i) {
    check_dim(dim);
    check_axis(dim, i);
    auto axes = interior_axes();
    axes[static_cast<std::size_t>(i)] = AxisSet::DualInner;
    return MeshId(dim, axes);
}

MeshId MeshId::double_dual(int dim, int i, int j) {
    check_dim(dim);
    check_axis(dim, i);
    check_axis(dim, j);
    if (i == j) return closure(dim, i);
    auto axes = interior_axes();
    axes[static_cast<std::size_t>(i)] = AxisSet::Dual;
    axes[static_cast<std::size_t>(j)] = AxisSet::Dual;
    return MeshId(dim, axes);
}

MeshId MeshId::boundary_face(int dim, int i) {
    check_dim(dim);
    check_axis(dim, i);
    auto axes = interior_axes();
    axes[static_cast<std::size_t>(i)] = AxisSet::Boundary;
    return MeshId(dim, axes);
}

MeshId MeshId::closure(int dim, int i) {
    check_dim(dim);
    check_axis(dim, i);
    auto axes = interior_axes();
    axes[static_cast<std::size_t>(i)] = AxisSet::Closed;
    return MeshId(dim, axes);
}

MeshId MeshId::from_axes(int dim, std::span<const AxisSet> axes) {
    check_dim(dim);
    if (static_cast<int>(axes.size()) != dim) throw Error("MeshId::from_axes: axis count mismatch");
    auto a = interior_axes();
    std::copy(axes.begin(), axes.end(), a.begin());
    return MeshId(dim, a);
}

MeshId MeshId::with_axis(int a, AxisSet set) const {
    check_axis(dim_, a);
    auto axes = axes_;
    axes[static_cast<std::size_t>(a)] = set;
    return MeshId(dim_, axes);
}

bool MeshId::is_primal() const {
    for (int a = 0; a < dim_; ++a)
        if (axis(a) != AxisSet::Interior) return false;
    return true;
}

bool MeshId::has_boundary_axis() const {
    for (int a = 0; a < dim_; ++a)
        if (axis(a) == AxisSet::Boundary) return true;
    return false;
}

std::string MeshId::name() const {
    std::vector<int> dual, inner, closed, boundary, other;
    for (int a = 0; a < dim_; ++a) {
        switch (axis(a)) {
            case AxisSet::Interior: break;
            case AxisSet::Dual: dual.push_back(a); break;
            case AxisSet::DualInner: inner.push_back(a); break;
            case AxisSet::Closed: closed.push_back(a); break;
            case AxisSet::Boundary: boundary.push_back(a); break;
        }
    }
    const std::size_t non_interior = dual.size() + inner.size() + closed.size() + boundary.size();
    std::ostringstream os;
    if (non_interior == 0) {
        os << "Primal";
    } else if (non_interior == 1 && dual.size() == 1) {
        os << "DualStar(" << dual[0] << ")";
    } else if (non_interior == 1 && inner.size() == 1) {
        os << "DualPrime(" << inner[0] << ")";
    } else if (non_interior == 1 && closed.size() == 1) {
        os << "Closure(" << closed[0] << ")";
    } else if (non_interior == 1 && boundary.size() == 1) {
        os << "BoundaryFace(" << boundary[0] << ")";
    } else if (non_interior == 2 && dual.size() == 2) {
        os << "DoubleDual(" << dual[0] << "," << dual[1] << ")";
    } else {
        os << "Mesh[";
        for (int a = 0; a < dim_; ++a) os << axis_code(axis(a));
        os << "]";
    }
    return os.str();
}

void check_mesh_dim(const GridSpec& grid, const MeshId& mesh) {
    if (grid.dim() != mesh.dim()) {
        throw Error("mesh " + mesh.name() + " has dimension " + std::to_string(mesh.dim()) +
                    " but grid has dimension " + std::to_string(grid.dim()));
    }
}

std::size_t mesh_size(const GridSpec& grid, const MeshId& mesh) {
    check_mesh_dim(grid, mesh);
    std::size_t n = 1;
    for (int a = 0; a < mesh.dim(); ++a) {
        const int c = axis_range(grid, mesh.axis(a)).count;
        if (c <= 0) return 0;
        n *= static_cast<std::size_t>(c);
    }
    return n;
}

bool mesh_contains(const GridSpec& grid, const MeshId& mesh, const MeshPoint& p) {
    if (p.dim != mesh.dim() || grid.dim() != mesh.dim()) return false;
    for (int a = 0; a < mesh.dim(); ++a)
        if (!axis_contains(grid, mesh.axis(a), p.k[static_cast<std::size_t>(a)])) return false;
    return true;
}

std::ptrdiff_t mesh_index(const GridSpec& grid, const MeshId& mesh, const MeshPoint& p) {
    if (!mesh_contains(grid, mesh, p)) return -1;
    std::ptrdiff_t idx = 0;
    for (int a = 0; a < mesh.dim(); ++a) {
        const AxisRange r = axis_range(grid, mesh.axis(a));
        idx = idx * r.count + (p.k[static_cast<std::size_t>(a)] - r.first) / r.step;
    }
    return idx;
}

MeshPoint mesh_point(const GridSpec& grid, const MeshId& mesh, std::size_t index) {
    MeshPoint p;
    p.dim = mesh.dim();
    for (int a = mesh.dim() - 1; a >= 0; --a) {
        const AxisRange r = axis_range(grid, mesh.axis(a));
        const auto c = static_cast<std::size_t>(r.count);
        p.k[static_cast<std::size_t>(a)] = r.first + r.step * static_cast<int>(index % c);
        index /= c;
    }
    return p;
}

std::vector<MeshPoint> enumerate_mesh(const GridSpec& grid, const MeshId& mesh) {
    const std::size_t n = mesh_size(grid, mesh);
    std::vector<MeshPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(mesh_point(grid, mesh, i));
    return out;
}

std::array<double, kMaxDim> physical(const GridSpec& grid, const MeshPoint& p) {
    std::array<double, kMaxDim> x{};
    for (int a = 0; a < p.dim; ++a) x[static_cast<std::size_t>(a)] = grid.position(p.k[static_cast<std::size_t>(a)]);
    return x;
}

MeshPoint shifted(const MeshPoint& p, int i, int sign) {
    MeshPoint q = p;
    q.k[static_cast<std::size_t>(i)] += sign;
    return q;
}

int normal(const GridSpec& grid, int i, const MeshPoint& x) {
    check_axis(grid.dim(), i);
    const MeshId face = MeshId::boundary_face(grid.dim(), i);
    if (!mesh_contains(grid, face, x)) throw Error("normal: point is not on the boundary face d_i W");
    const MeshId star = MeshId::dual_star(grid.dim(), i);
    const bool minus_in = mesh_contains(grid, star, shifted(x, i, -1));
    const bool plus_in = mesh_contains(grid, star, shifted(x, i, +1));
    if (minus_in && !plus_in) return 1;
    if (!minus_in && plus_in) return -1;
    return 0;
}

MeshFunction::MeshFunction(GridSpec grid, MeshId mesh)
    : grid_(grid), mesh_(mesh), values_(mesh_size(grid, mesh), 0.0) {}

MeshFunction::MeshFunction(GridSpec grid, MeshId mesh, std::vector<double> values)
    : grid_(grid), mesh_(mesh), values_(std::move(values)) {
    if (values_.size() != mesh_size(grid_, mesh_)) {
        throw Error("MeshFunction: " + std::to_string(values_.size()) + " values for mesh " + mesh_.name() +
                    " of size " + std::to_string(mesh_size(grid_, mesh_)));
    }
}

MeshFunction MeshFunction::constant(GridSpec grid, MeshId mesh, double value) {
    MeshFunction f(grid, mesh);
    std::fill(f.values_.begin(), f.values_.end(), value);
    return f;
}

MeshFunction MeshFunction::sample(GridSpec grid, MeshId mesh, const SpaceFn& fn) {
    MeshFunction f(grid, mesh);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = physical(grid, mesh_point(grid, mesh, i));
        f.values_[i] = fn(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
    }
    return f;
}

double MeshFunction::at(const MeshPoint& p) const {
    const auto idx = mesh_index(grid_, mesh_, p);
    if (idx < 0) throw Error("MeshFunction::at: point not on mesh " + mesh_.name());
    return values_[static_cast<std::size_t>(idx)];
}

void MeshFunction::require_mesh(const MeshId& expected, const char* what) const {
    if (!(mesh_ == expected)) {
        throw Error(std::string(what) + ": expected a function on " + expected.name() + ", got " + mesh_.name());
    }
}

namespace {

void require_same(const MeshFunction& a, const MeshFunction& b, const char* what) {
    if (!(a.grid() == b.grid())) throw Error(std::string(what) + ": grid mismatch");
    b.require_mesh(a.mesh(), what);
}

template <class Op>
MeshFunction zip(const MeshFunction& a, const MeshFunction& b, const char* what, Op op) {
    require_same(a, b, what);
    MeshFunction out(a.grid(), a.mesh());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
    return out;
}

}  // namespace

MeshFunction operator+(const MeshFunction& a, const MeshFunction& b) {
    return zip(a, b, "operator+", [](double x, double y) { return x + y; });
}

MeshFunction operator-(const MeshFunction& a, const MeshFunction& b) {
    return zip(a, b, "operator-", [](double x, double y) { return x - y; });
}

MeshFunction operator*(const MeshFunction& a, const MeshFunction& b) {
    return zip(a, b, "operator*", [](double x, double y) { return x * y; });
}

MeshFunction operator*(double s, const MeshFunction& a) {
    MeshFunction out = a;
    for (auto& v : out.values()) v *= s;
    return out;
}

MeshFunction close(const MeshFunction& u, int i) {
    check_axis(u.mesh().dim(), i);
    if (u.mesh().axis(i) != AxisSet::Interior) {
        throw Error("close: axis " + std::to_string(i) + " of " + u.mesh().name() + " is not an interior axis");
    }
    const MeshId target = u.mesh().with_axis(i, AxisSet::Closed);
    MeshFunction out(u.grid(), target);
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        const MeshPoint p = mesh_point(u.grid(), u.mesh(), idx);
        out[static_cast<std::size_t>(mesh_index(u.grid(), target, p))] = u[idx];
    }
    return out;
}

MeshFunction close_all(const MeshFunction& u) {
    MeshFunction out = u;
    for (int a = 0; a < u.mesh().dim(); ++a)
        if (out.mesh().axis(a) == AxisSet::Interior) out = close(out, a);
    return out;
}

MeshFunction restrict_to(const MeshFunction& u, const MeshId& target) {
    check_mesh_dim(u.grid(), target);
    MeshFunction out(u.grid(), target);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        const MeshPoint p = mesh_point(u.grid(), target, idx);
        const auto src = mesh_index(u.grid(), u.mesh(), p);
        if (src < 0) throw Error("restrict_to: " + target.name() + " is not a subset of " + u.mesh().name());
        out[idx] = u[static_cast<std::size_t>(src)];
    }
    return out;
}

MeshFunction trace(const MeshFunction& u, int i) {
    const GridSpec& grid = u.grid();
    check_axis(grid.dim(), i);
    u.require_mesh(MeshId::dual_star(grid.dim(), i), "trace");
    const MeshId face = MeshId::boundary_face(grid.dim(), i);
    MeshFunction out(grid, face);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        const MeshPoint x = mesh_point(grid, face, idx);
        const int nu = normal(grid, i, x);
        if (nu == 1) out[idx] = u.at(shifted(x, i, -1));
        else if (nu == -1) out[idx] = u.at(shifted(x, i, +1));
        else out[idx] = 0.0;
    }
    return out;
}

MeshFunction normal_field(const GridSpec& grid, int i) {
    const MeshId face = MeshId::boundary_face(grid.dim(), i);
    MeshFunction out(grid, face);
    for (std::size_t idx = 0; idx < out.size(); ++idx)
        out[idx] = static_cast<double>(normal(grid, i, mesh_point(grid, face, idx)));
    return out;
}

}  // namespace sdc
