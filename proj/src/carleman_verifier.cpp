#include "sdc/carleman_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sdc/discrete_calculus.hpp"
#include "sdc/format.hpp"
#include "sdc/summation.hpp"

namespace sdc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> phi_on(const GridSpec& grid, const MeshId& mesh, const CarlemanWeight& w) {
    std::vector<double> out;
    const auto pts = enumerate_mesh(grid, mesh);
    out.reserve(pts.size());
    for (const MeshPoint& p : pts) {
        const auto x = physical(grid, p);
        out.push_back(w.phi(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim()))));
    }
    return out;
}

double trapezoid_weight(const TimeGrid& tg, int m) {
    return (m == 0 || m == tg.M) ? 0.5 * tg.dt() : tg.dt();
}

/// Adds sum_x exp(log_w + 2 s phi(x)) |u(x)|^2 restricted to mask (if given).
void add_weighted(LogTermBuilder& b, const MeshFunction& u, const std::vector<double>& phi, double log_w, double s,
                  const std::vector<char>* mask = nullptr) {
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        b.add(log_w + 2.0 * s * phi[k], u[k]);
    }
}

void check_p(int p) {
    if (p != 0 && p != 1) throw Error("Carleman terms are defined for p = 0 and p = 1 only");
}

double log_ratio_of(const LogTerm& num, const LogTerm& den) {
    if (num.is_zero()) return kNegInf;
    if (den.is_zero()) return std::numeric_limits<double>::infinity();
    return num.log_value - den.log_value;
}

CarlemanReport evaluate(const Trajectory& traj, const FrameSource& g, const CoefficientFields& coeffs,
                        const CarlemanWeight& w, int p, const Box& omega, const Box& omega0, double residual) {
    CarlemanReport r;
    r.p = p;
    r.params = w.params();
    r.grid = traj.grid;
    r.omega = omega;
    r.omega0 = omega0;
    r.scheme_residual = residual;
    r.lhs = compute_lhs(traj, coeffs, w, p);
    r.rhs = compute_rhs(traj, g, w, p, omega);
    r.admissibility = w.admissibility(traj.grid.h());
    r.log_ratio = log_ratio_of(log_add(r.lhs.I(), r.lhs.J()), r.rhs.total());
    if (r.admissible()) r.ratio = std::exp(r.log_ratio);
    return r;
}

}  // namespace

double LogTerm::value() const { return std::exp(log_value); }

LogTerm log_add(const LogTerm& a, const LogTerm& b) {
    LogTerm out;
    const double parts[2] = {a.log_value, b.log_value};
    out.log_value = log_sum_exp(parts).log_value;
    out.skipped = a.skipped + b.skipped;
    const double bounds[2] = {a.log_skipped_bound, b.log_skipped_bound};
    out.log_skipped_bound = log_sum_exp(bounds).log_value;
    return out;
}

void LogTermBuilder::add(double log_weight, double v) {
    if (v == 0.0) return;
    logs_.push_back(log_weight + 2.0 * std::log(std::abs(v)));
}

LogTerm LogTermBuilder::finish() const {
    const LogSum s = log_sum_exp(logs_);
    LogTerm t;
    t.log_value = s.log_value;
    t.skipped = s.skipped;
    t.log_skipped_bound = s.log_skipped_bound;
    return t;
}

std::vector<char> box_mask(const GridSpec& grid, const Box& omega) {
    if (omega.dim != grid.dim()) throw Error("box_mask: box dimension does not match the grid");
    const auto pts = enumerate_mesh(grid, MeshId::primal(grid.dim()));
    std::vector<char> mask(pts.size(), 0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto x = physical(grid, pts[k]);
        mask[k] = omega.contains(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim()))) ? 1 : 0;
    }
    return mask;
}

LhsTerms compute_lhs(const Trajectory& traj, const CoefficientFields& coeffs, const CarlemanWeight& w, int p) {
    check_p(p);
    const GridSpec& grid = traj.grid;
    const int d = grid.dim();
    coeffs.validate(d);
    if (std::abs(traj.time.T - w.params().T) > 1e-12 * w.params().T)
        throw Error("compute_lhs: trajectory horizon differs from the weight's T");
    const double log_hd = d * std::log(grid.h());
    const double tau = w.params().tau;
    const std::vector<MeshFunction> dy = time_derivative(traj);

    const MeshId primal = MeshId::primal(d);
    const std::vector<double> phi_w = phi_on(grid, primal, w);
    std::vector<std::vector<double>> phi_star, phi_ij;
    for (int i = 0; i < d; ++i) {
        phi_star.push_back(phi_on(grid, MeshId::dual_star(d, i), w));
        for (int j = 0; j < d; ++j) phi_ij.push_back(phi_on(grid, second_diff(traj.frame(0), i, j).mesh(), w));
    }

    LogTermBuilder I_dt, I_second, J_grad, J_avg, J_zero;
    for (int m = 0; m <= traj.time.M; ++m) {
        const double t = traj.time.t(m);
        const double s = tau * w.theta(t);
        const double log_s = std::log(s);
        const double log_w = std::log(trapezoid_weight(traj.time, m)) + log_hd;
        const MeshFunction& y = traj.frame(m);

        add_weighted(I_dt, dy[static_cast<std::size_t>(m)], phi_w, log_w + (p - 1) * log_s, s);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const MeshFunction dij = second_diff(y, i, j);
                const MeshFunction gi = sample_at(grid, dij.mesh(), coeffs.gamma[static_cast<std::size_t>(i)], t);
                const MeshFunction gj = sample_at(grid, dij.mesh(), coeffs.gamma[static_cast<std::size_t>(j)], t);
                const auto& phi = phi_ij[static_cast<std::size_t>(i * d + j)];
                for (std::size_t k = 0; k < dij.size(); ++k) {
                    const double gg = gi[k] * gj[k];
                    if (!(gg > 0.0)) throw Error("compute_lhs: non-positive diffusion coefficient");
                    I_second.add(log_w + (p - 1) * log_s + std::log(gg) + 2.0 * s * phi[k], dij[k]);
                }
            }
            add_weighted(J_grad, diff(close(y, i), i), phi_star[static_cast<std::size_t>(i)], log_w + (p + 1) * log_s, s);
            add_weighted(J_avg, avg_diff(y, i), phi_w, log_w + (p + 1) * log_s, s);
        }
        add_weighted(J_zero, y, phi_w, log_w + (p + 3) * log_s, s);
    }
    LhsTerms out;
    out.I_dt = I_dt.finish();
    out.I_second = I_second.finish();
    out.J_gradient = J_grad.finish();
    out.J_avg_gradient = J_avg.finish();
    out.J_zeroth = J_zero.finish();
    return out;
}

RhsTerms compute_rhs(const Trajectory& traj, const FrameSource& g, const CarlemanWeight& w, int p, const Box& omega) {
    check_p(p);
    const GridSpec& grid = traj.grid;
    const int d = grid.dim();
    const std::vector<char> mask = box_mask(grid, omega);
    if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
        throw Error("compute_rhs: omega contains no grid point");
    const double log_hd = d * std::log(grid.h());
    const double tau = w.params().tau;
    const MeshId primal = MeshId::primal(d);
    const std::vector<double> phi_w = phi_on(grid, primal, w);

    LogTermBuilder src, local, ends;
    for (int m = 0; m <= traj.time.M; ++m) {
        const double s = tau * w.theta(traj.time.t(m));
        const double log_s = std::log(s);
        const double log_w = std::log(trapezoid_weight(traj.time, m)) + log_hd;
        const Vector gm = g(m);
        if (static_cast<std::size_t>(gm.size()) != phi_w.size()) throw Error("compute_rhs: source has the wrong size");
        for (std::size_t k = 0; k < phi_w.size(); ++k)
            src.add(log_w + p * log_s + 2.0 * s * phi_w[k], gm[static_cast<Eigen::Index>(k)]);
        add_weighted(local, traj.frame(m), phi_w, log_w + (p + 3) * log_s, s, &mask);
    }
    const double s0 = tau * w.theta_max();
    const double log_e = -2.0 * std::log(grid.h()) + log_hd + p * std::log(s0);
    add_weighted(ends, traj.frame(0), phi_w, log_e, s0);
    add_weighted(ends, traj.frame(traj.time.M), phi_w, log_e, s0);

    RhsTerms out;
    out.source = src.finish();
    out.local_omega = local.finish();
    out.time_endpoints = ends.finish();
    return out;
}

CarlemanReport verify_inequality(const Trajectory& traj, const FrameSource& g, const CoefficientFields& coeffs,
                                 const CarlemanWeight& w, int p, const Box& omega, const Box& omega0) {
    const double residual = scheme_residual(traj, g, coeffs);
    if (!(residual <= 1e-6)) {
        throw Error("verify_inequality: trajectory does not solve the system with this source (relative residual " +
                    format_double(residual) + ")");
    }
    return evaluate(traj, g, coeffs, w, p, omega, omega0, residual);
}

PointwiseTimeBound pointwise_time_bound(const Trajectory& traj, const CoefficientFields& coeffs,
                                        const CarlemanWeight& w, int p, double t, double C) {
    check_p(p);
    if (!(t > 0.0 && t <= traj.time.T)) throw Error("pointwise_time_bound: t must lie in (0, T]");
    const int m = traj.time.index_of(t);
    const GridSpec& grid = traj.grid;
    const double log_hd = grid.dim() * std::log(grid.h());
    const std::vector<double> phi_w = phi_on(grid, MeshId::primal(grid.dim()), w);
    const double tau = w.params().tau;

    auto slice = [&](int frame, double time) {
        const double s = tau * w.theta(time);
        LogTermBuilder b;
        add_weighted(b, traj.frame(frame), phi_w, log_hd + (p + 1) * std::log(s), s);
        return b.finish();
    };
    PointwiseTimeBound out;
    out.lhs_t = slice(m, traj.time.t(m));
    out.initial = slice(0, 0.0);
    const LhsTerms lhs = compute_lhs(traj, coeffs, w, p);
    out.IJ = log_add(lhs.I(), lhs.J());
    out.C = C;
    LogTerm scaled = out.IJ;
    if (C > 0.0) scaled.log_value += std::log(C);
    else scaled = LogTerm{};
    out.bound = log_add(scaled, out.initial);
    out.holds = out.lhs_t.log_value <= out.bound.log_value + 1e-12 * std::max(1.0, std::abs(out.bound.log_value));
    if (out.lhs_t.log_value > out.initial.log_value && !out.IJ.is_zero()) {
        // C_req (I + J) = lhs_t - initial, evaluated without leaving log space
        const double diff = out.lhs_t.log_value + std::log1p(-std::exp(out.initial.log_value - out.lhs_t.log_value));
        out.required_C = std::exp(diff - out.IJ.log_value);
    }
    return out;
}

std::vector<FeasibilityRow> feasibility_map(const std::vector<FeasibilityRun>& runs, const std::vector<double>& taus,
                                            const std::vector<double>& deltas, const WeightParams& base, int p,
                                            const Box& omega, const Box& omega0) {
    check_p(p);
    if (runs.empty() || taus.empty() || deltas.empty()) throw Error("feasibility_map: empty parameter range");
    std::vector<FeasibilityRow> rows;
    for (const FeasibilityRun& run : runs) {
        const double residual = scheme_residual(run.traj, run.g, run.coeffs);
        if (!(residual <= 1e-6)) throw Error("feasibility_map: trajectory does not solve the system with its source");
        const int d = run.traj.grid.dim();
        for (double tau : taus) {
            for (double delta : deltas) {
                WeightParams prm = base;
                prm.tau = tau;
                prm.delta = delta;
                prm.T = run.traj.time.T;
                FeasibilityRow row;
                row.h = run.traj.grid.h();
                row.tau = tau;
                row.delta = delta;
                row.lambda = prm.lambda;
                row.p = p;
                const CarlemanWeight w(Psi(d, prm.x0, prm.c0), prm);
                const CarlemanReport rep = evaluate(run.traj, run.g, run.coeffs, w, p, omega, omega0, residual);
                row.I_p = rep.lhs.I().value();
                row.J_p = rep.lhs.J().value();
                row.rhs_source = rep.rhs.source.value();
                row.rhs_local = rep.rhs.local_omega.value();
                row.rhs_endpoint = rep.rhs.time_endpoints.value();
                row.ratio = rep.ratio;
                row.admissible = rep.admissible();
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_feasibility_csv(std::ostream& os, const std::vector<FeasibilityRow>& rows) {
    os << "h,tau,delta,lambda,p,I_p,J_p,rhs_source,rhs_local,rhs_endpoint,ratio,admissible\n";
    for (const FeasibilityRow& r : rows) {
        os << format_double(r.h) << ',' << format_double(r.tau) << ',' << format_double(r.delta) << ','
           << format_double(r.lambda) << ',' << r.p << ',' << format_double(r.I_p) << ',' << format_double(r.J_p)
           << ',' << format_double(r.rhs_source) << ',' << format_double(r.rhs_local) << ','
           << format_double(r.rhs_endpoint) << ',' << (r.ratio ? format_double(*r.ratio) : std::string()) << ','
           << (r.admissible ? 1 : 0) << '\n';
    }
}

}  // namespace sdc
