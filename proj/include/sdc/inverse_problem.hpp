#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdc/carleman_verifier.hpp"
#include "sdc/forward_solver.hpp"
#include "sdc/weights.hpp"

namespace sdc {

/// Lambda_theta(g) = (y(theta, .), y on (0,T) x omega) plus d_t y on the same
/// set, with the weighted norms that enter the stability estimate.
struct Observation {
    GridSpec grid{1, 1};
    TimeGrid time;
    Scheme scheme = Scheme::Trapezoidal;
    double vartheta = 0.0;
    int frame = 0;
    /// vartheta != T/2: the estimate is only proved for the midpoint.
    bool outside_proof_regime = false;
    Box omega;
    Box omega0;
    std::vector<char> mask;  // primal points inside omega

    MeshFunction snapshot{GridSpec(1, 1), MeshId::primal(1)};
    double snapshot_h2 = 0.0;
    /// Values of y and d_t y at the masked points, one row per frame.
    std::vector<std::vector<double>> local_traj;
    std::vector<std::vector<double>> local_dt;

    LogTerm weighted_dt;  // ||e^{s phi} d_t y||^2 on Q_omega
    LogTerm weighted_y;   // ||e^{s phi} y||^2 on Q_omega

    double weighted_dt_norm() const { return std::sqrt(weighted_dt.value()); }
    double weighted_y_norm() const { return std::sqrt(weighted_y.value()); }
};

/// z supplies d_t y (any ZSolution trajectory or a differenced y works).
Observation observe(const Trajectory& y, const Trajectory& z, const CarlemanWeight& w, const Box& omega,
                    const Box& omega0);

/// Multiplies every observed entry by (1 + level * N(0,1)).
void add_multiplicative_noise(Observation& obs, double level, std::uint64_t seed);

struct StabilityQuotient {
    double lhs = 0.0;             // ||g(theta, .)||_{L2_h}
    double rhs_observed = 0.0;
    double rhs_error_term = 0.0;  // e^{-C''/h} (||y(0)|| + ||d_t y(0)||)
    double quotient = 0.0;
    /// log of the factor e^{-C''/h} and the implied C'' = -h log(factor).
    double log_error_factor = 0.0;
    double c_double_prime = 0.0;
    bool reduced = false;
};

/// Empirical quotient of the Lipschitz stability estimate. With `reduced`
/// the right-hand side drops the weighted y term and ||y(0)||, as allowed
/// for time-independent coefficients.
///
/// The error factor is h^-1 sqrt(tau theta(0)) e^{tau theta(0) sup phi}: the
/// square root of the endpoint weight that produces it in the proof.
/// d_t y(0) is taken from the equation, A_h(0) y(0) + g(0).
StabilityQuotient stability_quotient(const Observation& obs, const Trajectory& y, const CoefficientFields& coeffs,
                                     const SpaceTimeFn& g, const CarlemanWeight& w, bool reduced = false);

enum class SourceMode { Separable, SeparableConstant, General };

std::string to_string(SourceMode m);
SourceMode source_mode_from_string(const std::string& s);

/// g with |d_t g(t,x)| <= C_g |g(theta,x)| certified on the space-time grid.
struct AdmissibleSource {
    SpaceTimeFn g;
    SpaceTimeFn dg_dt;
    /// Separable form g = f(x) R(t) (empty for general sources).
    SpaceFn f_fn;
    std::function<double(double)> R;
    std::function<double(double)> dR;
    MeshFunction f{GridSpec(1, 1), MeshId::primal(1)};
    double vartheta = 0.0;
    double C_g = 0.0;
    double alpha = 0.0;  // inf |R| (0 for general sources)
    std::string descriptor;

    FrameSource frames(const TimeGrid& time) const;
};

/// Separable modes draw f as a random combination of Gaussian bumps. With
/// SeparableConstant R = 1; otherwise R(t) = 1 + sin(2 pi t / T) / 2.
/// The General mode draws a non-separable g and certifies it.
AdmissibleSource generate_admissible(std::uint64_t seed, const GridSpec& grid, const TimeGrid& time, SourceMode mode,
                                     double vartheta = -1.0);

/// Certifies a general sampler or throws with the violating (t, x).
AdmissibleSource certify_source(SpaceTimeFn g, SpaceTimeFn dg_dt, const GridSpec& grid, const TimeGrid& time,
                                double vartheta = -1.0);

/// f -> (sqrt(h^d) y_f(theta), sqrt(w_m h^d) y_f(t_m) on omega) for the source
/// f(x) R(t) with zero initial data, w_m the trapezoid weights. Both the map
/// and its adjoint follow the time-stepping scheme exactly.
class SeparableForwardMap {
public:
    SeparableForwardMap(GridSpec grid, TimeGrid time, Scheme scheme, CoefficientFields coeffs,
                        std::function<double(double)> R, int frame, std::vector<char> mask);

    Eigen::Index domain_size() const { return n_; }
    Eigen::Index range_size() const;
    Vector apply(const Vector& f);
    Vector adjoint(const Vector& r);
    /// Packs an observation into the data layout of apply().
    Vector pack(const Observation& obs) const;
    /// Data of the free evolution from y_ini (source 0).
    Vector free_response(const MeshFunction& y_ini);

private:
    StepSolver& lhs_solver(int m);
    StepSolver& lhs_transpose_solver(int m);
    const SparseMatrix& Ah(int m);
    Vector pack_frames(const std::vector<Vector>& ys) const;

    GridSpec grid_;
    TimeGrid time_;
    double zeta_;
    CoefficientFields coeffs_;
    std::function<double(double)> R_;
    int frame_;
    std::vector<char> mask_;
    std::vector<Eigen::Index> masked_;
    Eigen::Index n_;
    std::vector<std::optional<SparseMatrix>> A_;
    std::vector<std::unique_ptr<StepSolver>> L_, LT_;
};

struct ReconstructionOptions {
    double beta = 0.0;
    int max_iterations = 500;
    /// Stop when ||F^T r - beta f|| <= tolerance * its initial value.
    double tolerance = 1e-10;
};

struct ReconstructionResult {
    MeshFunction f{GridSpec(1, 1), MeshId::primal(1)};
    std::vector<double> residual_history;  // normal-equation residual, relative
    int iterations = 0;
    double data_misfit = 0.0;              // ||F f - d|| / ||d||
    std::optional<double> relative_error;  // vs truth, L2_h
};

/// Tikhonov least squares for f by CGLS on the scheme-exact forward map.
/// Throws when the relative residual drops by less than 1e-2 over 20 iterations.
ReconstructionResult reconstruct_source(const Observation& obs, const std::function<double(double)>& R,
                                        const CoefficientFields& coeffs, const ReconstructionOptions& opts,
                                        const MeshFunction* y_ini = nullptr, const MeshFunction* truth = nullptr);

struct CoefficientEstimate {
    MeshFunction p{GridSpec(1, 1), MeshId::primal(1)};
    std::vector<char> mask;
    std::size_t mask_count = 0;
    std::optional<double> relative_error;  // on the mask, L2_h
};

/// p = (d_t y - A~_h y) / y at frame theta on |y| >= alpha, where A~_h is the
/// operator built from `coeffs` (without p). d_t y comes from time_derivative.
CoefficientEstimate recover_coefficient(const Trajectory& y, const CoefficientFields& coeffs, double vartheta,
                                        double alpha, const MeshFunction* truth = nullptr);

/// One row of the StabilityReport CSV.
struct StabilityRow {
    int run_id = 0;
    double h = 0.0;
    int N = 0;
    int d = 0;
    double tau = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    double lhs = 0.0;
    double rhs_observed = 0.0;
    double rhs_error_term = 0.0;
    double quotient = 0.0;
    std::uint64_t seed = 0;
};

void write_stability_csv(std::ostream& os, const std::vector<StabilityRow>& rows);

}  // namespace sdc
