#pragma once

#include <array>
#include <span>

#include "sdc/grid.hpp"

namespace sdc {

/// Axis-aligned box [lo, hi] in physical coordinates.
struct Box {
    int dim = 1;
    std::array<double, kMaxDim> lo{};
    std::array<double, kMaxDim> hi{};

    static Box cube(int dim, double lo, double hi);
    bool contains(std::span<const double> x) const;
    /// Closure of this box lies in the open interior of `outer`.
    bool compactly_inside(const Box& outer) const;
    std::array<double, kMaxDim> center() const;
};

/// Parameters of the Carleman weight family.
struct WeightParams {
    double lambda = 2.0;
    /// Level above sup psi; values <= 0 select 1.1 * sup psi.
    double K = 0.0;
    double tau = 2.0;
    double delta = 0.25;
    double T = 1.0;
    std::array<double, kMaxDim> x0{0.5, 0.5, 0.5};
    double c0 = 2.0;
    /// Admissibility bound for tau * h / (delta * T^2).
    double epsilon = 0.5;
    double tau0 = 1.0;
    /// Observation time; values <= 0 select T / 2.
    double vartheta = 0.0;
    /// Inflation of the unit box used for the neighbourhood of the closed domain.
    double margin = 0.1;

    double observation_time() const { return vartheta > 0.0 ? vartheta : 0.5 * T; }
};

/// psi(x) = c0 - |x - x0|^2.
class Psi {
public:
    Psi(int dim, std::array<double, kMaxDim> x0, double c0) : dim_(dim), x0_(x0), c0_(c0) {}

    int dim() const { return dim_; }
    double c0() const { return c0_; }
    const std::array<double, kMaxDim>& center() const { return x0_; }

    double operator()(std::span<const double> x) const;
    double partial(std::span<const double> x, int i) const { return -2.0 * (x[static_cast<std::size_t>(i)] - x0_[static_cast<std::size_t>(i)]); }
    double grad_norm(std::span<const double> x) const;
    double sup() const { return c0_; }
    /// min over the box [lo, hi]^d.
    double min_over_cube(double lo, double hi) const;

private:
    int dim_;
    std::array<double, kMaxDim> x0_;
    double c0_;
};

struct PsiAssumptionReport {
    double min_psi_hat = 0.0;                 // min psi over the inflated box
    double min_grad_outside_omega0 = 0.0;     // min |grad psi| over sampled points outside omega0
    double max_normal_derivative = 0.0;       // max d_n psi over the boundary layers
    double c = 0.0;                           // min(min_grad, -max_normal_derivative)
    bool holds = false;
};

struct PsiBuild {
    Psi psi;
    PsiAssumptionReport report;
};

/// Quadratic bump centred at params.x0 together with a sampled check of
/// positivity, non-degenerate gradient outside omega0 and negative outward
/// derivative near every face.
PsiBuild build_psi(const GridSpec& grid, const Box& omega0, const Box& omega, const WeightParams& params);

struct Admissibility {
    double tau_floor = 0.0;   // tau0 * (T + T^2)
    double mesh_ratio = 0.0;  // tau * h / (delta * T^2)
    bool tau_ok = false;
    bool ratio_ok = false;
    bool delta_ok = false;

    bool admissible() const { return tau_ok && ratio_ok && delta_ok; }
};

/// phi(x) = exp(lambda psi) - exp(lambda K), theta(t), s(t) = tau theta(t).
class CarlemanWeight {
public:
    CarlemanWeight(Psi psi, WeightParams params);

    const WeightParams& params() const { return params_; }
    const Psi& psi() const { return psi_; }
    double K() const { return K_; }

    double phi(std::span<const double> x) const;
    double theta(double t) const;
    double dtheta(double t) const;
    double d2theta(double t) const;
    double s(double t) const { return params_.tau * theta(t); }
    double theta_max() const { return theta(0.0); }
    double theta_min() const { return theta(0.5 * params_.T); }

    /// inf |phi| and sup |phi| over the closed unit box.
    double mu0() const { return mu0_; }
    double mu1() const { return mu1_; }

    Admissibility admissibility(double h) const;

private:
    Psi psi_;
    WeightParams params_;
    double K_;
    double mu0_;
    double mu1_;
};

/// delta solving tau1 / (T^2 delta) = eps0 / h.
double coupled_delta(double tau1, double eps0, double h, double T);

/// Exact closed forms of theta at the endpoints and at T/2.
double theta_endpoint_closed_form(double T, double delta);
double theta_midpoint_closed_form(double T, double delta);

struct GaussTimeBound {
    double integral_scaled = 0.0;  // int_0^T (tau theta)^p exp(2 tau (theta - theta(T/2)) phi) dt
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    double ratio = 0.0;            // lhs / rhs
    int intervals = 0;
};

/// Time integral of (tau theta)^p e^{2 tau theta phi} against
/// tau^{p - 1/2} e^{2 tau theta(T/2) phi}, by composite Simpson with step
/// halving to 1e-8 relative. phi_x must be negative.
GaussTimeBound gauss_time_bound_check(const CarlemanWeight& w, double p, double phi_x);

struct WeightBoundSamples {
    double min_d2theta = 0.0;             // compare with 2 / T^2
    double max_parabola_violation = 0.0;  // max of (t-T/2)^2/T^2 + theta(T/2) - theta(t)
    double max_endpoint_exponent = 0.0;   // max over x of 2 tau theta(0) phi(x) + C tau / (delta T^2)
    double max_sqrt_theta_violation = 0.0;// max |theta^{-1/2} d sqrt(theta)/dt| - (T/2) theta
};

/// Sampled checks of the elementary weight inequalities.
WeightBoundSamples sample_weight_bounds(const CarlemanWeight& w, const GridSpec& grid, int time_samples);

}  // namespace sdc
