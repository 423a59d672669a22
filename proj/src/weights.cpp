#include "sdc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdc {

Box Box::cube(int dim, double lo, double hi) {
    Box b;
    b.dim = dim;
    b.lo.fill(lo);
    b.hi.fill(hi);
    return b;
}

bool Box::contains(std::span<const double> x) const {
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

bool Box::compactly_inside(const Box& outer) const {
    if (dim != outer.dim) return false;
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (!(lo[i] > outer.lo[i] && hi[i] < outer.hi[i])) return false;
    }
    return true;
}

std::array<double, kMaxDim> Box::center() const {
    std::array<double, kMaxDim> c{};
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        c[i] = 0.5 * (lo[i] + hi[i]);
    }
    return c;
}

double Psi::operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double dx = x[static_cast<std::size_t>(a)] - x0_[static_cast<std::size_t>(a)];
        r2 += dx * dx;
    }
    return c0_ - r2;
}

double Psi::grad_norm(std::span<const double> x) const {
    double g2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double g = partial(x, a);
        g2 += g * g;
    }
    return std::sqrt(g2);
}

double Psi::min_over_cube(double lo, double hi) const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double c = x0_[static_cast<std::size_t>(a)];
        const double far = std::max(c - lo, hi - c);
        r2 += far * far;
    }
    return c0_ - r2;
}

PsiBuild build_psi(const GridSpec& grid, const Box& omega0, const Box& omega, const WeightParams& params) {
    const int d = grid.dim();
    if (omega0.dim != d || omega.dim != d) throw Error("build_psi: observation boxes have the wrong dimension");
    const Box unit = Box::cube(d, 0.0, 1.0);
    if (!omega0.compactly_inside(omega)) throw Error("build_psi: omega0 is not compactly contained in omega");
    if (!omega.compactly_inside(unit)) throw Error("build_psi: omega is not compactly contained in the unit box");
    const std::span<const double> x0(params.x0.data(), static_cast<std::size_t>(d));
    if (!omega0.contains(x0)) throw Error("build_psi: psi centre x0 must lie in omega0");
    const double m = params.margin;
    if (m <= 0.0) throw Error("build_psi: margin must be positive");
    for (int a = 0; a < d; ++a) {
        const double c = params.x0[static_cast<std::size_t>(a)];
        if (c <= m || c >= 1.0 - m) {
            throw Error("build_psi: x0 is within the boundary layer of width " + std::to_string(m) +
                        " in axis " + std::to_string(a) + "; the outward derivative of psi would change sign");
        }
    }

    Psi psi(d, params.x0, params.c0);
    PsiAssumptionReport rep;
    rep.min_psi_hat = psi.min_over_cube(-m, 1.0 + m);
    rep.min_grad_outside_omega0 = std::numeric_limits<double>::infinity();
    rep.max_normal_derivative = -std::numeric_limits<double>::infinity();

    // Sample the half-step lattice of the inflated box.
    const double step = 0.5 * grid.h();
    const int per_axis = static_cast<int>(std::ceil((1.0 + 2.0 * m) / step)) + 1;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
    std::array<double, kMaxDim> x{};
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int a = d - 1; a >= 0; --a) {
            const auto q = static_cast<int>(rem % static_cast<std::size_t>(per_axis));
            rem /= static_cast<std::size_t>(per_axis);
            x[static_cast<std::size_t>(a)] = std::min(1.0 + m, -m + q * step);
        }
        const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
        if (!omega0.contains(xs)) rep.min_grad_outside_omega0 = std::min(rep.min_grad_outside_omega0, psi.grad_norm(xs));
        for (int a = 0; a < d; ++a) {
            const double xi = x[static_cast<std::size_t>(a)];
            if (xi >= 1.0 - m) rep.max_normal_derivative = std::max(rep.max_normal_derivative, psi.partial(xs, a));
            if (xi <= m) rep.max_normal_derivative = std::max(rep.max_normal_derivative, -psi.partial(xs, a));
        }
    }
    rep.c = std::min(rep.min_grad_outside_omega0, -rep.max_normal_derivative);
    rep.holds = rep.min_psi_hat > 0.0 && rep.c > 0.0;
    return {psi, rep};
}

CarlemanWeight::CarlemanWeight(Psi psi, WeightParams params) : psi_(psi), params_(params) {
    if (params_.lambda < 1.0) throw Error("CarlemanWeight: lambda must be >= 1");
    if (params_.tau < 1.0) throw Error("CarlemanWeight: tau must be >= 1");
    if (!(params_.T > 0.0)) throw Error("CarlemanWeight: T must be positive");
    if (!(params_.delta > 0.0 && params_.delta <= 0.5)) throw Error("CarlemanWeight: delta must lie in (0, 1/2]");
    const double vt = params_.observation_time();
    if (!(vt > 0.0 && vt < params_.T)) throw Error("CarlemanWeight: observation time must lie in (0, T)");
    K_ = params_.K > 0.0 ? params_.K : 1.1 * psi_.sup();
    if (!(K_ > psi_.sup())) throw Error("CarlemanWeight: K must exceed sup psi so that phi < 0");
    const double top = std::exp(params_.lambda * K_);
    mu0_ = top - std::exp(params_.lambda * psi_.sup());
    mu1_ = top - std::exp(params_.lambda * psi_.min_over_cube(0.0, 1.0));
}

double CarlemanWeight::phi(std::span<const double> x) const {
    return std::exp(params_.lambda * psi_(x)) - std::exp(params_.lambda * K_);
}

double CarlemanWeight::theta(double t) const {
    const double T = params_.T;
    if (t < 0.0 || t > T) throw Error("theta: time " + std::to_string(t) + " outside [0, T]");
    const double dT = params_.delta * T;
    return 1.0 / ((t + dT) * (T + dT - t));
}

double CarlemanWeight::dtheta(double t) const {
    const double th = theta(t);
    return 2.0 * (t - 0.5 * params_.T) * th * th;
}

double CarlemanWeight::d2theta(double t) const {
    const double th = theta(t);
    const double c = t - 0.5 * params_.T;
    return 2.0 * th * th + 8.0 * c * c * th * th * th;
}

Admissibility CarlemanWeight::admissibility(double h) const {
    const WeightParams& p = params_;
    Admissibility a;
    a.tau_floor = p.tau0 * (p.T + p.T * p.T);
    a.mesh_ratio = p.tau * h / (p.delta * p.T * p.T);
    a.tau_ok = p.tau >= a.tau_floor;
    a.ratio_ok = a.mesh_ratio <= p.epsilon;
    a.delta_ok = p.delta > 0.0 && p.delta <= 0.5;
    return a;
}

double coupled_delta(double tau1, double eps0, double h, double T) {
    const double delta = tau1 * h / (eps0 * T * T);
    if (!(delta > 0.0 && delta <= 0.5)) {
        throw Error("coupled_delta: tau1 h / (eps0 T^2) = " + std::to_string(delta) + " is outside (0, 1/2]");
    }
    return delta;
}

double theta_endpoint_closed_form(double T, double delta) {
    return 1.0 / (T * T * delta * (1.0 + delta));
}

double theta_midpoint_closed_form(double T, double delta) {
    return 4.0 / (T * T * (1.0 + 2.0 * delta) * (1.0 + 2.0 * delta));
}

GaussTimeBound gauss_time_bound_check(const CarlemanWeight& w, double p, double phi_x) {
    if (!(phi_x < 0.0)) throw Error("gauss_time_bound_check: phi(x) must be negative");
    const WeightParams& prm = w.params();
    const double T = prm.T;
    const double tau = prm.tau;
    const double th_mid = w.theta_min();
    auto f = [&](double t) {
        const double th = w.theta(t);
        return std::exp(p * std::log(tau * th) + 2.0 * tau * (th - th_mid) * phi_x);
    };
    auto simpson = [&](int n) {
        const double dt = T / n;
        double s = f(0.0) + f(T);
        for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * dt);
        return s * dt / 3.0;
    };
    int n = 64;
    double prev = simpson(n);
    constexpr int kMaxIntervals = 1 << 22;
    while (true) {
        n *= 2;
        const double cur = simpson(n);
        if (std::abs(cur - prev) <= 1e-8 * std::abs(cur)) {
            prev = cur;
            break;
        }
        if (n >= kMaxIntervals) throw Error("gauss_time_bound_check: quadrature did not converge");
        prev = cur;
    }
    GaussTimeBound out;
    out.integral_scaled = prev;
    out.intervals = n;
    const double base = 2.0 * tau * th_mid * phi_x;
    out.log_lhs = base + std::log(prev);
    out.log_rhs = base + (p - 0.5) * std::log(tau);
    out.ratio = std::exp(out.log_lhs - out.log_rhs);
    return out;
}

WeightBoundSamples sample_weight_bounds(const CarlemanWeight& w, const GridSpec& grid, int time_samples) {
    const WeightParams& p = w.params();
    const double T = p.T;
    WeightBoundSamples out;
    out.min_d2theta = std::numeric_limits<double>::infinity();
    out.max_parabola_violation = -std::numeric_limits<double>::infinity();
    out.max_sqrt_theta_violation = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= time_samples; ++k) {
        const double t = T * k / time_samples;
        const double th = w.theta(t);
        out.min_d2theta = std::min(out.min_d2theta, w.d2theta(t));
        const double c = t - 0.5 * T;
        out.max_parabola_violation = std::max(out.max_parabola_violation, c * c / (T * T) + w.theta_min() - th);
        // theta^{-1/2} d/dt sqrt(theta) = theta' / (2 theta)
        const double lhs = std::abs(w.dtheta(t) / (2.0 * th));
        out.max_sqrt_theta_violation = std::max(out.max_sqrt_theta_violation, lhs - 0.5 * T * th);
    }
    // C = 2 mu0 / (1 + delta): theta(0) = 1 / (T^2 delta (1 + delta)).
    const double C = 2.0 * w.mu0() / (1.0 + p.delta);
    const double rhs = -C * p.tau / (p.delta * T * T);
    out.max_endpoint_exponent = -std::numeric_limits<double>::infinity();
    const MeshId closed = MeshId::from_axes(grid.dim(), std::vector<AxisSet>(static_cast<std::size_t>(grid.dim()), AxisSet::Closed));
    for (std::size_t i = 0; i < mesh_size(grid, closed); ++i) {
        const auto x = physical(grid, mesh_point(grid, closed, i));
        const double e = 2.0 * p.tau * w.theta_max() * w.phi(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
        out.max_endpoint_exponent = std::max(out.max_endpoint_exponent, e - rhs);
    }
    return out;
}

}  // namespace sdc
