#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "sdc/coefficients.hpp"
#include "sdc/grid.hpp"

namespace sdc {

struct TimeGrid {
    double T = 1.0;
    int M = 100;

    double dt() const { return T / M; }
    double t(int m) const { return m == M ? T : T * m / M; }
    /// Frame index of time t; throws unless t coincides with a frame.
    int index_of(double t) const;
    std::vector<double> times() const;
};

enum class Scheme { BackwardEuler, Trapezoidal };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SolverDiagnostics {
    int steps = 0;
    int max_iterations = 0;
    double max_relative_residual = 0.0;
};

/// Primal frames y(t_m), m = 0..M, of a semi-discrete solution.
struct Trajectory {
    GridSpec grid{1, 1};
    TimeGrid time;
    Scheme scheme = Scheme::Trapezoidal;
    std::string system = "y";
    std::string source;
    std::vector<MeshFunction> frames;
    SolverDiagnostics diagnostics;

    const MeshFunction& frame(int m) const { return frames.at(static_cast<std::size_t>(m)); }
    const MeshFunction& at_time(double t) const { return frame(time.index_of(t)); }
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Matrix of A_h(t) on the primal unknowns (enumeration order), Dirichlet
/// closure built in. Throws when some gamma_i(t, .) is not positive.
SparseMatrix assemble_Ah(const CoefficientFields& coeffs, const GridSpec& grid, double t);

/// Krylov solve of L x = rhs to relative residual <= 1e-10: preconditioned CG
/// when L is symmetric, BiCGSTAB otherwise. Throws when the contract fails.
class StepSolver {
public:
    void set(SparseMatrix m);
    const SparseMatrix& matrix() const { return L_; }
    bool symmetric() const { return symmetric_; }
    /// x holds the initial guess on entry. Returns (iterations, relative residual).
    std::pair<int, double> solve(const Vector& rhs, Vector& x);

private:
    SparseMatrix L_;
    bool symmetric_ = false;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg_;
    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> bicg_;
};

/// zeta of the one-step scheme: 1 for backward Euler, 1/2 for the trapezoidal rule.
double scheme_zeta(Scheme s);

/// A_h(t) y computed with the discrete calculus operators.
MeshFunction apply_Ah(const CoefficientFields& coeffs, const MeshFunction& y, double t);

/// B_h(t) y: A_h with every coefficient replaced by its time derivative.
MeshFunction apply_Bh(const CoefficientFields& coeffs, const MeshFunction& y, double t);

/// Source values at frame m as a primal vector.
using FrameSource = std::function<Vector(int)>;

FrameSource sampled_source(const GridSpec& grid, const TimeGrid& time, const SpaceTimeFn& g);

/// Implicit one-step integration of d_t y = A_h(t) y + g on W with y = 0 on
/// the boundary. Each step solves (I - dt zeta A_h(t_{m+1})) y_{m+1} = rhs to
/// relative residual <= 1e-10; NaNs abort with the offending step.
Trajectory solve_forward(const MeshFunction& y_ini, const SpaceTimeFn& g, const CoefficientFields& coeffs,
                         const TimeGrid& time, Scheme scheme);

Trajectory solve_forward(const MeshFunction& y_ini, const FrameSource& g, const CoefficientFields& coeffs,
                         const TimeGrid& time, Scheme scheme);

/// d_t of the frames: second-order central differences, one-sided
/// second-order formulas at the two ends.
std::vector<MeshFunction> time_derivative(const Trajectory& traj);

/// Relative residual of the time-stepping scheme with source g; near zero
/// iff traj was produced by solve_forward with the same data.
double scheme_residual(const Trajectory& traj, const FrameSource& g, const CoefficientFields& coeffs);

enum class ZBackwardMode { Differencing, ReversedTime };

struct ZSolution {
    Trajectory z;
    /// ||z(t_m) - (central difference of y)(t_m)||_{L2_h}
    std::vector<double> gap;
    std::vector<double> relative_gap;
    /// True when frames before T/2 come from the reversed-time integration.
    bool reversed_time_used = false;
};

/// z = d_t y from d_t z - A_h z = B_h y + d_t g with z(T/2) = C_h y(T/2) + g(T/2),
/// integrated forward on [T/2, T]. Frames on [0, T/2) come from central
/// differencing of y, or (experimental) from the scheme run in reversed time.
ZSolution solve_z_system(const Trajectory& y, const CoefficientFields& coeffs, const SpaceTimeFn& g,
                         const SpaceTimeFn& dg_dt, ZBackwardMode mode = ZBackwardMode::Differencing);

struct EnergyCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_tilde = 0.0;
    bool holds = false;
};

/// C~ = (d/2) reg(Gamma) ||b||_inf^2 + ||c||_inf + 1/2.
double energy_constant(int dim, const CoefficientBounds& bounds);

/// int_W |y(t)|^2 against exp(C~ (t - T0)) (int_W |y(T0)|^2 + int_T0^t int_W |g|^2).
/// T0 and t must be frames with T0 < t.
EnergyCheck energy_check(const Trajectory& traj, const SpaceTimeFn& g, const CoefficientBounds& bounds, double T0,
                         double t);

/// Plain-text export: header lines, then one row of frame values per time
/// level. Doubles use the shortest round-trip representation.
void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory(std::istream& is);

}  // namespace sdc
