#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdc {

/// Raised for every contract violation in the library (mesh mismatch, bad
/// axis, inadmissible parameters, solver failure).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 3;

/// Uniform Cartesian lattice of the unit box with N interior points per axis.
///
/// Points are addressed in half-step integer coordinates: x = k * h / 2 with
/// h = 1 / (N + 1). Interior lattice points have every k even in [2, 2N].
class GridSpec {
public:
    GridSpec(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double h() const { return 1.0 / static_cast<double>(n_ + 1); }
    /// Largest half-step coordinate on the closed box (x = 1).
    int k_max() const { return 2 * (n_ + 1); }
    double position(int k) const { return static_cast<double>(k) / static_cast<double>(k_max()); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int dim_;
    int n_;
};

/// One-dimensional factor of a mesh. Every mesh used here is a Cartesian
/// product of these arithmetic progressions in half-step coordinates.
enum class AxisSet {
    Interior,   // even k in [2, 2N]
    Closed,     // even k in [0, 2N+2]
    Dual,       // odd  k in [1, 2N+1]
    DualInner,  // odd  k in [3, 2N-1]
    Boundary,   // k in {0, 2N+2}
};

struct AxisRange {
    int first;
    int step;
    int count;
};

AxisRange axis_range(const GridSpec& grid, AxisSet set);
bool axis_contains(const GridSpec& grid, AxisSet set, int k);
char axis_code(AxisSet set);

struct MeshPoint {
    std::array<int, kMaxDim> k{};
    int dim = 0;

    auto operator<=>(const MeshPoint&) const = default;
    bool operator==(const MeshPoint&) const = default;
};

/// Identifies one mesh of the primal/dual family. Axis indices are 0-based.
class MeshId {
public:
    static MeshId primal(int dim);
    /// W*_i = tau_i(W) u tau_{-i}(W)
    static MeshId dual_star(int dim, int i);
    /// W'_i = tau_i(W) n tau_{-i}(W)
    static MeshId dual_prime(int dim, int i);
    /// (W*_i)*_j. For i == j this is the closure of W in direction i.
    static MeshId double_dual(int dim, int i, int j);
    /// d_i W = closure_i(W) \ W
    static MeshId boundary_face(int dim, int i);
    static MeshId closure(int dim, int i);
    static MeshId from_axes(int dim, std::span<const AxisSet> axes);

    int dim() const { return dim_; }
    AxisSet axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    MeshId with_axis(int a, AxisSet set) const;
    bool is_primal() const;
    bool has_boundary_axis() const;
    std::string name() const;

    friend bool operator==(const MeshId&, const MeshId&) = default;

private:
    MeshId(int dim, std::array<AxisSet, kMaxDim> axes) : dim_(dim), axes_(axes) {}

    int dim_;
    std::array<AxisSet, kMaxDim> axes_;
};

void check_axis(int dim, int i);
void check_mesh_dim(const GridSpec& grid, const MeshId& mesh);

/// Number of points of `mesh` on `grid`.
std::size_t mesh_size(const GridSpec& grid, const MeshId& mesh);
bool mesh_contains(const GridSpec& grid, const MeshId& mesh, const MeshPoint& p);
/// Position of `p` in the lexicographic enumeration, or -1 when absent.
std::ptrdiff_t mesh_index(const GridSpec& grid, const MeshId& mesh, const MeshPoint& p);
MeshPoint mesh_point(const GridSpec& grid, const MeshId& mesh, std::size_t index);

/// Lexicographically sorted (axis 0 most significant) points of the mesh.
std::vector<MeshPoint> enumerate_mesh(const GridSpec& grid, const MeshId& mesh);

/// Physical coordinates of a mesh point.
std::array<double, kMaxDim> physical(const GridSpec& grid, const MeshPoint& p);

/// Shift by +-h/2 along axis i (sign = +1 or -1).
MeshPoint shifted(const MeshPoint& p, int i, int sign);

/// Discrete exterior normal nu_i on d_i W, decided by membership of the
/// half-shifted neighbours in W*_i.
int normal(const GridSpec& grid, int i, const MeshPoint& x);

using SpaceFn = std::function<double(std::span<const double>)>;

/// Values of a scalar field on one mesh, in enumeration order.
class MeshFunction {
public:
    MeshFunction(GridSpec grid, MeshId mesh);
    MeshFunction(GridSpec grid, MeshId mesh, std::vector<double> values);

    static MeshFunction constant(GridSpec grid, MeshId mesh, double value);
    static MeshFunction sample(GridSpec grid, MeshId mesh, const SpaceFn& fn);

    const GridSpec& grid() const { return grid_; }
    const MeshId& mesh() const { return mesh_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    /// Value at a point of the mesh; throws when the point is off-mesh.
    double at(const MeshPoint& p) const;

    void require_mesh(const MeshId& expected, const char* what) const;

private:
    GridSpec grid_;
    MeshId mesh_;
    std::vector<double> values_;
};

/// Pointwise arithmetic on functions sharing a mesh.
MeshFunction operator+(const MeshFunction& a, const MeshFunction& b);
MeshFunction operator-(const MeshFunction& a, const MeshFunction& b);
MeshFunction operator*(const MeshFunction& a, const MeshFunction& b);
MeshFunction operator*(double s, const MeshFunction& a);

/// Zero extension of u across the boundary in direction i (Dirichlet closure).
/// Axis i of u must be Interior; it becomes Closed.
MeshFunction close(const MeshFunction& u, int i);

/// Zero extension in every Interior axis.
MeshFunction close_all(const MeshFunction& u);

/// Restriction to a sub-mesh (every target point must lie on u's mesh).
MeshFunction restrict_to(const MeshFunction& u, const MeshId& target);

/// t_r^i: boundary values on d_i W of a function living on W*_i.
MeshFunction trace(const MeshFunction& u, int i);

/// nu_i as a function on d_i W.
MeshFunction normal_field(const GridSpec& grid, int i);

}  // namespace sdc
