#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sdc/grid.hpp"

namespace sdc {

using SpaceTimeFn = std::function<double(double, std::span<const double>)>;

SpaceTimeFn constant_fn(double value);

/// Coefficients of A_h y = sum_i D_i(gamma_i D_i y) - sum_i b_i D_i A_i y - c y,
/// with their time derivatives (needed by the differentiated system).
struct CoefficientFields {
    std::vector<SpaceTimeFn> gamma;
    std::vector<SpaceTimeFn> b;
    SpaceTimeFn c;
    std::vector<SpaceTimeFn> dgamma_dt;
    std::vector<SpaceTimeFn> db_dt;
    SpaceTimeFn dc_dt;
    /// True iff every time derivative above is identically zero.
    bool time_independent = false;

    int dim() const { return static_cast<int>(gamma.size()); }
    bool has_time_derivatives() const;
    /// Throws unless the sampler lists are consistent with `dim`.
    void validate(int dim) const;

    static CoefficientFields constant(int dim, double gamma, double b, double c);
    /// Coefficients depending on x only; time derivatives are zero.
    static CoefficientFields stationary(std::vector<SpaceTimeFn> gamma, std::vector<SpaceTimeFn> b, SpaceTimeFn c);
};

/// Sampled bounds over the grid and a set of times.
struct CoefficientBounds {
    double reg_gamma = 0.0;   // sup of gamma + 1/gamma + |grad gamma| + |d_t gamma|
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double b_sup = 0.0;       // max_i sup |b_i|
    double c_sup = 0.0;       // sup |c|
};

/// Bounds sampled at the given times on the primal and dual meshes; the
/// spatial gradient uses the grid's own centred half-step differences and the
/// time derivative uses the analytic samplers when present.
CoefficientBounds compute_bounds(const CoefficientFields& coeffs, const GridSpec& grid, std::span<const double> times);

/// Samples f(t, .) on a mesh.
MeshFunction sample_at(const GridSpec& grid, const MeshId& mesh, const SpaceTimeFn& f, double t);

}  // namespace sdc
