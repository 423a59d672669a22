#include "sdc/inverse_problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sdc/discrete_calculus.hpp"
#include "sdc/format.hpp"
#include "sdc/random.hpp"

namespace sdc {

namespace {

double trapezoid_weight(const TimeGrid& tg, int m) {
    return (m == 0 || m == tg.M) ? 0.5 * tg.dt() : tg.dt();
}

double resolve_vartheta(double vartheta, const TimeGrid& time) {
    return vartheta > 0.0 ? vartheta : 0.5 * time.T;
}

Vector to_vector(const MeshFunction& u) {
    const auto v = u.values();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string where(const GridSpec& grid, double t, const MeshPoint& p) {
    const auto x = physical(grid, p);
    std::string s = "t = " + format_double(t) + ", x = (";
    for (int a = 0; a < grid.dim(); ++a) s += (a ? ", " : "") + format_double(x[static_cast<std::size_t>(a)]);
    return s + ")";
}

/// Dense time samples: every frame plus `refine - 1` points in between.
std::vector<double> dense_times(const TimeGrid& time, int refine) {
    std::vector<double> ts;
    const int n = time.M * refine;
    for (int k = 0; k <= n; ++k) ts.push_back(k == n ? time.T : time.T * k / n);
    return ts;
}

}  // namespace

Observation observe(const Trajectory& y, const Trajectory& z, const CarlemanWeight& w, const Box& omega,
                    const Box& omega0) {
    if (!(y.grid == z.grid) || y.time.M != z.time.M || y.time.T != z.time.T)
        throw Error("observe: y and z trajectories come from different runs");
    const GridSpec& grid = y.grid;
    Observation obs;
    obs.grid = grid;
    obs.time = y.time;
    obs.scheme = y.scheme;
    obs.vartheta = w.params().observation_time();
    obs.frame = y.time.index_of(obs.vartheta);
    obs.outside_proof_regime = std::abs(obs.vartheta - 0.5 * y.time.T) > 1e-12 * y.time.T;
    obs.omega = omega;
    obs.omega0 = omega0;
    obs.mask = box_mask(grid, omega);
    obs.snapshot = y.frame(obs.frame);
    obs.snapshot_h2 = h2_norm(obs.snapshot);

    const auto pts = enumerate_mesh(grid, MeshId::primal(grid.dim()));
    std::vector<double> phi(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto x = physical(grid, pts[k]);
        phi[k] = w.phi(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
    }
    const double log_hd = grid.dim() * std::log(grid.h());
    LogTermBuilder wdt, wy;
    for (int m = 0; m <= y.time.M; ++m) {
        const double s = w.s(y.time.t(m));
        const double log_w = std::log(trapezoid_weight(y.time, m)) + log_hd;
        std::vector<double> row_y, row_dt;
        const MeshFunction& ym = y.frame(m);
        const MeshFunction& zm = z.frame(m);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (!obs.mask[k]) continue;
            row_y.push_back(ym[k]);
            row_dt.push_back(zm[k]);
            wy.add(log_w + 2.0 * s * phi[k], ym[k]);
            wdt.add(log_w + 2.0 * s * phi[k], zm[k]);
        }
        obs.local_traj.push_back(std::move(row_y));
        obs.local_dt.push_back(std::move(row_dt));
    }
    obs.weighted_dt = wdt.finish();
    obs.weighted_y = wy.finish();
    return obs;
}

void add_multiplicative_noise(Observation& obs, double level, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : obs.snapshot.values()) v *= 1.0 + level * normal(rng);
    for (auto& row : obs.local_traj)
        for (double& v : row) v *= 1.0 + level * normal(rng);
    for (auto& row : obs.local_dt)
        for (double& v : row) v *= 1.0 + level * normal(rng);
}

StabilityQuotient stability_quotient(const Observation& obs, const Trajectory& y, const CoefficientFields& coeffs,
                                     const SpaceTimeFn& g, const CarlemanWeight& w, bool reduced) {
    const GridSpec& grid = obs.grid;
    const double h = grid.h();
    if (!w.admissibility(h).admissible()) throw Error("stability_quotient: weight parameters are not admissible");
    StabilityQuotient q;
    q.reduced = reduced;
    q.lhs = l2_norm(sample_at(grid, MeshId::primal(grid.dim()), g, obs.vartheta));
    q.rhs_observed = obs.snapshot_h2 + obs.weighted_dt_norm() + (reduced ? 0.0 : obs.weighted_y_norm());
    const double s0 = w.s(0.0);
    // sup phi = -mu0
    q.log_error_factor = -std::log(h) + 0.5 * std::log(s0) - s0 * w.mu0();
    q.c_double_prime = -h * q.log_error_factor;
    const MeshFunction dy0 = apply_Ah(coeffs, y.frame(0), 0.0) + sample_at(grid, MeshId::primal(grid.dim()), g, 0.0);
    const double data = (reduced ? 0.0 : l2_norm(y.frame(0))) + l2_norm(dy0);
    q.rhs_error_term = data > 0.0 ? std::exp(q.log_error_factor + std::log(data)) : 0.0;
    const double rhs = q.rhs_observed + q.rhs_error_term;
    q.quotient = rhs > 0.0 ? q.lhs / rhs : (q.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return q;
}

std::string to_string(SourceMode m) {
    switch (m) {
        case SourceMode::Separable: return "separable";
        case SourceMode::SeparableConstant: return "separable-constant";
        case SourceMode::General: return "general";
    }
    return "?";
}

SourceMode source_mode_from_string(const std::string& s) {
    if (s == "separable") return SourceMode::Separable;
    if (s == "separable-constant") return SourceMode::SeparableConstant;
    if (s == "general") return SourceMode::General;
    throw Error("unknown source mode '" + s + "'");
}

FrameSource AdmissibleSource::frames(const TimeGrid& time) const {
    if (R) {
        const Vector fv = to_vector(f);
        const auto Rc = R;
        return [fv, Rc, time](int m) -> Vector { return Rc(time.t(m)) * fv; };
    }
    return sampled_source(f.grid(), time, g);
}

namespace {

AdmissibleSource make_separable(SpaceFn f_fn, std::function<double(double)> R, std::function<double(double)> dR,
                                const GridSpec& grid, const TimeGrid& time, double vartheta) {
    AdmissibleSource src;
    src.vartheta = resolve_vartheta(vartheta, time);
    src.f_fn = f_fn;
    src.R = R;
    src.dR = dR;
    src.f = MeshFunction::sample(grid, MeshId::primal(grid.dim()), f_fn);
    src.g = [f_fn, R](double t, std::span<const double> x) { return f_fn(x) * R(t); };
    src.dg_dt = [f_fn, dR](double t, std::span<const double> x) { return f_fn(x) * dR(t); };

    const double r_theta = std::abs(R(src.vartheta));
    if (!(r_theta > 0.0)) throw Error("generate_admissible: R(vartheta) = 0");
    double min_r = std::numeric_limits<double>::infinity();
    double max_dr = 0.0;
    const double sign = R(src.vartheta) > 0.0 ? 1.0 : -1.0;
    for (double t : dense_times(time, 8)) {
        const double r = R(t);
        if (sign * r < 0.0) throw Error("generate_admissible: R crosses zero near t = " + format_double(t));
        min_r = std::min(min_r, std::abs(r));
        max_dr = std::max(max_dr, std::abs(dR(t)));
    }
    src.alpha = min_r;
    src.C_g = max_dr / r_theta;
    return src;
}

}  // namespace

AdmissibleSource generate_admissible(std::uint64_t seed, const GridSpec& grid, const TimeGrid& time, SourceMode mode,
                                     double vartheta) {
    const int d = grid.dim();
    Rng rng(seed);
    struct Bump {
        std::array<double, kMaxDim> c;
        double width;
        double amp;
    };
    std::vector<Bump> bumps(3);
    for (Bump& b : bumps) {
        for (int a = 0; a < d; ++a) b.c[static_cast<std::size_t>(a)] = uniform(rng, 0.2, 0.8);
        b.width = uniform(rng, 0.1, 0.25);
        b.amp = uniform(rng, 0.5, 1.5) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    }
    SpaceFn f_fn = [bumps, d](std::span<const double> x) {
        double v = 0.0;
        for (const Bump& b : bumps) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dx = x[static_cast<std::size_t>(a)] - b.c[static_cast<std::size_t>(a)];
                r2 += dx * dx;
            }
            v += b.amp * std::exp(-r2 / (2.0 * b.width * b.width));
        }
        return v;
    };

    const double T = time.T;
    AdmissibleSource src;
    switch (mode) {
        case SourceMode::SeparableConstant:
            src = make_separable(f_fn, [](double) { return 1.0; }, [](double) { return 0.0; }, grid, time, vartheta);
            break;
        case SourceMode::Separable: {
            const double w = 2.0 * std::numbers::pi / T;
            src = make_separable(
                f_fn, [w](double t) { return 1.0 + 0.5 * std::sin(w * t); },
                [w](double t) { return 0.5 * w * std::cos(w * t); }, grid, time, vartheta);
            break;
        }
        case SourceMode::General: {
            // A non-separable drifting profile: f(x) (1 + t x_0 / 2).
            SpaceTimeFn g = [f_fn](double t, std::span<const double> x) { return f_fn(x) * (1.0 + 0.5 * t * x[0]); };
            SpaceTimeFn dg = [f_fn](double, std::span<const double> x) { return f_fn(x) * 0.5 * x[0]; };
            src = certify_source(g, dg, grid, time, vartheta);
            break;
        }
    }
    src.descriptor = to_string(mode) + ":seed=" + std::to_string(seed);
    return src;
}

AdmissibleSource certify_source(SpaceTimeFn g, SpaceTimeFn dg_dt, const GridSpec& grid, const TimeGrid& time,
                                double vartheta) {
    AdmissibleSource src;
    src.vartheta = resolve_vartheta(vartheta, time);
    src.g = g;
    src.dg_dt = dg_dt;
    const MeshId primal = MeshId::primal(grid.dim());
    src.f = sample_at(grid, primal, g, src.vartheta);
    const auto pts = enumerate_mesh(grid, primal);
    for (double t : dense_times(time, 4)) {
        const MeshFunction dg = sample_at(grid, primal, dg_dt, t);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double num = std::abs(dg[k]);
            const double den = std::abs(src.f[k]);
            if (num == 0.0) continue;
            if (den == 0.0)
                throw Error("certify_source: d_t g != 0 where g(vartheta) = 0 at " + where(grid, t, pts[k]));
            src.C_g = std::max(src.C_g, num / den);
        }
    }
    src.descriptor = "general";
    return src;
}

SeparableForwardMap::SeparableForwardMap(GridSpec grid, TimeGrid time, Scheme scheme, CoefficientFields coeffs,
                                         std::function<double(double)> R, int frame, std::vector<char> mask)
    : grid_(grid),
      time_(time),
      zeta_(scheme_zeta(scheme)),
      coeffs_(std::move(coeffs)),
      R_(std::move(R)),
      frame_(frame),
      mask_(std::move(mask)) {
    coeffs_.validate(grid_.dim());
    n_ = static_cast<Eigen::Index>(mesh_size(grid_, MeshId::primal(grid_.dim())));
    if (static_cast<Eigen::Index>(mask_.size()) != n_) throw Error("SeparableForwardMap: mask has the wrong size");
    if (frame_ < 0 || frame_ > time_.M) throw Error("SeparableForwardMap: observation frame out of range");
    for (Eigen::Index k = 0; k < n_; ++k)
        if (mask_[static_cast<std::size_t>(k)]) masked_.push_back(k);
    const std::size_t slots = coeffs_.time_independent ? 1 : static_cast<std::size_t>(time_.M + 1);
    A_.resize(slots);
    L_.resize(slots);
    LT_.resize(slots);
}

Eigen::Index SeparableForwardMap::range_size() const {
    return n_ + static_cast<Eigen::Index>(time_.M + 1) * static_cast<Eigen::Index>(masked_.size());
}

const SparseMatrix& SeparableForwardMap::Ah(int m) {
    const std::size_t slot = coeffs_.time_independent ? 0 : static_cast<std::size_t>(m);
    if (!A_[slot]) A_[slot] = assemble_Ah(coeffs_, grid_, time_.t(m));
    return *A_[slot];
}

StepSolver& SeparableForwardMap::lhs_solver(int m) {
    const std::size_t slot = coeffs_.time_independent ? 0 : static_cast<std::size_t>(m);
    if (!L_[slot]) {
        SparseMatrix I(n_, n_);
        I.setIdentity();
        L_[slot] = std::make_unique<StepSolver>();
        L_[slot]->set(SparseMatrix(I - (zeta_ * time_.dt()) * Ah(m)));
    }
    return *L_[slot];
}

StepSolver& SeparableForwardMap::lhs_transpose_solver(int m) {
    const std::size_t slot = coeffs_.time_independent ? 0 : static_cast<std::size_t>(m);
    if (!LT_[slot]) {
        LT_[slot] = std::make_unique<StepSolver>();
        LT_[slot]->set(SparseMatrix(lhs_solver(m).matrix().transpose()));
    }
    return *LT_[slot];
}

Vector SeparableForwardMap::pack_frames(const std::vector<Vector>& ys) const {
    Vector out(range_size());
    const double sh = std::sqrt(std::pow(grid_.h(), grid_.dim()));
    out.head(n_) = sh * ys[static_cast<std::size_t>(frame_)];
    Eigen::Index pos = n_;
    for (int m = 0; m <= time_.M; ++m) {
        const double c = sh * std::sqrt(trapezoid_weight(time_, m));
        for (Eigen::Index k : masked_) out[pos++] = c * ys[static_cast<std::size_t>(m)][k];
    }
    return out;
}

Vector SeparableForwardMap::apply(const Vector& f) {
    if (f.size() != n_) throw Error("SeparableForwardMap::apply: wrong size");
    const double dt = time_.dt();
    std::vector<Vector> ys(static_cast<std::size_t>(time_.M + 1), Vector::Zero(n_));
    for (int m = 0; m < time_.M; ++m) {
        const Vector& y = ys[static_cast<std::size_t>(m)];
        const double a = zeta_ * R_(time_.t(m + 1)) + (1.0 - zeta_) * R_(time_.t(m));
        Vector rhs = y + (dt * a) * f;
        if (zeta_ < 1.0) rhs += (1.0 - zeta_) * dt * (Ah(m) * y);
        Vector x = y;
        lhs_solver(m + 1).solve(rhs, x);
        ys[static_cast<std::size_t>(m + 1)] = std::move(x);
    }
    return pack_frames(ys);
}

Vector SeparableForwardMap::free_response(const MeshFunction& y_ini) {
    const double dt = time_.dt();
    std::vector<Vector> ys(static_cast<std::size_t>(time_.M + 1));
    ys[0] = to_vector(y_ini);
    for (int m = 0; m < time_.M; ++m) {
        const Vector& y = ys[static_cast<std::size_t>(m)];
        Vector rhs = y;
        if (zeta_ < 1.0) rhs += (1.0 - zeta_) * dt * (Ah(m) * y);
        Vector x = y;
        lhs_solver(m + 1).solve(rhs, x);
        ys[static_cast<std::size_t>(m + 1)] = std::move(x);
    }
    return pack_frames(ys);
}

Vector SeparableForwardMap::adjoint(const Vector& r) {
    if (r.size() != range_size()) throw Error("SeparableForwardMap::adjoint: wrong size");
    const double dt = time_.dt();
    const double sh = std::sqrt(std::pow(grid_.h(), grid_.dim()));
    auto e = [&](int m) {
        Vector v = Vector::Zero(n_);
        const double c = sh * std::sqrt(trapezoid_weight(time_, m));
        Eigen::Index pos = n_ + static_cast<Eigen::Index>(m) * static_cast<Eigen::Index>(masked_.size());
        for (Eigen::Index k : masked_) v[k] = c * r[pos++];
        if (m == frame_) v += sh * r.head(n_);
        return v;
    };
    Vector out = Vector::Zero(n_);
    Vector lambda = e(time_.M);
    Vector mu = Vector::Zero(n_);
    for (int m = time_.M; m >= 1; --m) {
        lhs_transpose_solver(m).solve(lambda, mu);
        const double a = zeta_ * R_(time_.t(m)) + (1.0 - zeta_) * R_(time_.t(m - 1));
        out += (dt * a) * mu;
        Vector next = e(m - 1) + mu;
        if (zeta_ < 1.0) next += (1.0 - zeta_) * dt * (Ah(m - 1).transpose() * mu);
        lambda = std::move(next);
    }
    return out;
}

Vector SeparableForwardMap::pack(const Observation& obs) const {
    if (!(obs.grid == grid_) || obs.frame != frame_ || static_cast<int>(obs.local_traj.size()) != time_.M + 1)
        throw Error("SeparableForwardMap::pack: observation does not match the map");
    Vector out(range_size());
    const double sh = std::sqrt(std::pow(grid_.h(), grid_.dim()));
    out.head(n_) = sh * to_vector(obs.snapshot);
    Eigen::Index pos = n_;
    for (int m = 0; m <= time_.M; ++m) {
        const auto& row = obs.local_traj[static_cast<std::size_t>(m)];
        if (row.size() != masked_.size()) throw Error("SeparableForwardMap::pack: omega differs from the map's mask");
        const double c = sh * std::sqrt(trapezoid_weight(time_, m));
        for (double v : row) out[pos++] = c * v;
    }
    return out;
}

ReconstructionResult reconstruct_source(const Observation& obs, const std::function<double(double)>& R,
                                        const CoefficientFields& coeffs, const ReconstructionOptions& opts,
                                        const MeshFunction* y_ini, const MeshFunction* truth) {
    if (opts.beta < 0.0) throw Error("reconstruct_source: beta must be >= 0");
    SeparableForwardMap F(obs.grid, obs.time, obs.scheme, coeffs, R, obs.frame, obs.mask);
    Vector data = F.pack(obs);
    if (y_ini) data -= F.free_response(*y_ini);
    const double beta = opts.beta * std::pow(obs.grid.h(), obs.grid.dim());

    ReconstructionResult res;
    Vector x = Vector::Zero(F.domain_size());
    Vector r = data;
    Vector s = F.adjoint(r);
    Vector p = s;
    double gamma = s.squaredNorm();
    const double s0 = std::sqrt(gamma);
    res.residual_history.push_back(1.0);
    if (s0 > 0.0) {
        for (int it = 1; it <= opts.max_iterations; ++it) {
            const Vector q = F.apply(p);
            const double denom = q.squaredNorm() + beta * p.squaredNorm();
            if (!(denom > 0.0)) break;
            const double alpha = gamma / denom;
            x += alpha * p;
            r -= alpha * q;
            s = F.adjoint(r) - beta * x;
            const double gamma_new = s.squaredNorm();
            const double rel = std::sqrt(gamma_new) / s0;
            res.residual_history.push_back(rel);
            res.iterations = it;
            if (rel <= opts.tolerance) break;
            if (it >= 20) {
                const double before = res.residual_history[static_cast<std::size_t>(it - 20)];
                if (before - rel < 1e-2 * before) {
                    throw Error("reconstruct_source: stagnation (relative residual " + format_double(rel) +
                                " after " + std::to_string(it) + " iterations)");
                }
            }
            p = s + (gamma_new / gamma) * p;
            gamma = gamma_new;
        }
    }
    res.f = MeshFunction(obs.grid, MeshId::primal(obs.grid.dim()), std::vector<double>(x.data(), x.data() + x.size()));
    const double dn = data.norm();
    res.data_misfit = dn > 0.0 ? (F.apply(x) - data).norm() / dn : 0.0;
    if (truth) {
        const double tn = l2_norm(*truth);
        const double err = l2_norm(res.f - *truth);
        res.relative_error = tn > 0.0 ? err / tn : err;
    }
    return res;
}

CoefficientEstimate recover_coefficient(const Trajectory& y, const CoefficientFields& coeffs, double vartheta,
                                        double alpha, const MeshFunction* truth) {
    const double t = resolve_vartheta(vartheta, y.time);
    const int m = y.time.index_of(t);
    const MeshFunction& ym = y.frame(m);
    const MeshFunction dy = time_derivative(y)[static_cast<std::size_t>(m)];
    const MeshFunction Ay = apply_Ah(coeffs, ym, y.time.t(m));
    CoefficientEstimate est;
    est.p = MeshFunction(y.grid, ym.mesh());
    est.mask.assign(ym.size(), 0);
    for (std::size_t k = 0; k < ym.size(); ++k) {
        if (std::abs(ym[k]) < alpha) continue;
        est.mask[k] = 1;
        ++est.mask_count;
        est.p[k] = (dy[k] - Ay[k]) / ym[k];
    }
    if (est.mask_count == 0)
        throw Error("recover_coefficient: no point with |y(vartheta)| >= alpha = " + format_double(alpha));
    if (truth) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < ym.size(); ++k) {
            if (!est.mask[k]) continue;
            num += (est.p[k] - (*truth)[k]) * (est.p[k] - (*truth)[k]);
            den += (*truth)[k] * (*truth)[k];
        }
        est.relative_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return est;
}

void write_stability_csv(std::ostream& os, const std::vector<StabilityRow>& rows) {
    os << "run_id,h,N,d,tau,delta,lambda,lhs,rhs_observed,rhs_error_term,quotient,seed\n";
    for (const StabilityRow& r : rows) {
        os << r.run_id << ',' << format_double(r.h) << ',' << r.N << ',' << r.d << ',' << format_double(r.tau) << ','
           << format_double(r.delta) << ',' << format_double(r.lambda) << ',' << format_double(r.lhs) << ','
           << format_double(r.rhs_observed) << ',' << format_double(r.rhs_error_term) << ','
           << format_double(r.quotient) << ',' << r.seed << '\n';
    }
}

}  // namespace sdc
