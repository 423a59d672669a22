#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdc/forward_solver.hpp"
#include "sdc/weights.hpp"

namespace sdc {

/// A nonnegative weighted square-sum kept in log space. Weights such as
/// e^{2 tau theta phi} routinely fall below the smallest double, so `value()`
/// may underflow to 0 while `log_value` stays exact.
struct LogTerm {
    double log_value = -std::numeric_limits<double>::infinity();
    std::size_t skipped = 0;
    double log_skipped_bound = -std::numeric_limits<double>::infinity();

    double value() const;
    bool is_zero() const { return log_value == -std::numeric_limits<double>::infinity(); }
};

LogTerm log_add(const LogTerm& a, const LogTerm& b);

/// Accumulates log(weight) + log(|v|^2) contributions of one term.
class LogTermBuilder {
public:
    void add(double log_weight, double v);
    void add_log(double log_value) { logs_.push_back(log_value); }
    LogTerm finish() const;

private:
    std::vector<double> logs_;
};

struct LhsTerms {
    LogTerm I_dt;            // int_Q (tau theta)^{p-1} |d_t y|^2 e^{2 tau theta phi}
    LogTerm I_second;        // sum_ij int_{Q*_ij} (tau theta)^{p-1} gamma_i gamma_j e^{2 tau theta phi} |D_ij y|^2
    LogTerm J_gradient;      // tau^{p+1} sum_i ||theta^{(1+p)/2} e^{tau theta phi} D_i y||^2 on Q*_i
    LogTerm J_avg_gradient;  // same with A_i D_i y on Q
    LogTerm J_zeroth;        // tau^{3+p} ||theta^{(3+p)/2} e^{tau theta phi} y||^2 on Q

    LogTerm I() const { return log_add(I_dt, I_second); }
    LogTerm J() const { return log_add(log_add(J_gradient, J_avg_gradient), J_zeroth); }
};

struct RhsTerms {
    LogTerm source;         // int_Q e^{2 tau theta phi} (tau theta)^p |g|^2
    LogTerm local_omega;    // int_{(0,T) x omega} (tau theta)^{p+3} e^{2 tau theta phi} |y|^2
    LogTerm time_endpoints; // h^-2 int_W (tau theta(0))^p (|y(0)|^2 + |y(T)|^2) e^{2 tau theta(0) phi}

    LogTerm total() const { return log_add(log_add(source, local_omega), time_endpoints); }
};

/// Primal points inside the closed box omega, as a 0/1 mask in enumeration order.
std::vector<char> box_mask(const GridSpec& grid, const Box& omega);

/// Left-hand side terms. Time integrals use the composite trapezoid on the
/// trajectory frames; d_t y comes from time_derivative().
LhsTerms compute_lhs(const Trajectory& traj, const CoefficientFields& coeffs, const CarlemanWeight& w, int p);

/// Right-hand side terms. g is sampled on the trajectory frames.
RhsTerms compute_rhs(const Trajectory& traj, const FrameSource& g, const CarlemanWeight& w, int p, const Box& omega);

struct CarlemanReport {
    int p = 0;
    WeightParams params;
    GridSpec grid{1, 1};
    Box omega;
    Box omega0;
    LhsTerms lhs;
    RhsTerms rhs;
    Admissibility admissibility;
    double scheme_residual = 0.0;
    double log_ratio = 0.0;
    /// (I_p + J_p) / RHS, present only for admissible parameters.
    std::optional<double> ratio;

    bool admissible() const { return admissibility.admissible(); }
};

/// Checks that traj solves the system with source g (scheme residual <= 1e-6)
/// and evaluates both sides.
CarlemanReport verify_inequality(const Trajectory& traj, const FrameSource& g, const CoefficientFields& coeffs,
                                 const CarlemanWeight& w, int p, const Box& omega, const Box& omega0);

struct PointwiseTimeBound {
    LogTerm lhs_t;    // int_W (tau theta(t))^{p+1} |y(t)|^2 e^{2 tau theta(t) phi}
    LogTerm initial;  // same at t = 0
    LogTerm IJ;       // I_p + J_p
    double C = 0.0;
    LogTerm bound;    // C (I_p + J_p) + initial
    bool holds = false;
    /// Smallest C for which the bound holds (0 when lhs_t <= initial).
    double required_C = 0.0;
};

PointwiseTimeBound pointwise_time_bound(const Trajectory& traj, const CoefficientFields& coeffs,
                                        const CarlemanWeight& w, int p, double t, double C);

/// One problem instance per grid for the feasibility sweep.
struct FeasibilityRun {
    Trajectory traj;
    FrameSource g;
    CoefficientFields coeffs;
};

struct FeasibilityRow {
    double h = 0.0;
    double tau = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    int p = 0;
    double I_p = 0.0;
    double J_p = 0.0;
    double rhs_source = 0.0;
    double rhs_local = 0.0;
    double rhs_endpoint = 0.0;
    std::optional<double> ratio;
    bool admissible = false;
};

/// Evaluates verify_inequality on every (run, tau, delta) cell. Terms are
/// reported as values (they may underflow to 0); the ratio is exact.
std::vector<FeasibilityRow> feasibility_map(const std::vector<FeasibilityRun>& runs, const std::vector<double>& taus,
                                            const std::vector<double>& deltas, const WeightParams& base, int p,
                                            const Box& omega, const Box& omega0);

void write_feasibility_csv(std::ostream& os, const std::vector<FeasibilityRow>& rows);

}  // namespace sdc
