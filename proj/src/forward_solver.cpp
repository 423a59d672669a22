#include "sdc/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>

#include "sdc/discrete_calculus.hpp"
#include "sdc/format.hpp"
#include "sdc/summation.hpp"

namespace sdc {

namespace {

constexpr double kSolveTol = 1e-10;

std::string point_string(const GridSpec& grid, const MeshPoint& p) {
    const auto x = physical(grid, p);
    std::string s = "(";
    for (int a = 0; a < grid.dim(); ++a) {
        if (a) s += ", ";
        s += format_double(x[static_cast<std::size_t>(a)]);
    }
    return s + ")";
}

Vector to_vector(const MeshFunction& u) {
    const auto v = u.values();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MeshFunction to_primal(const GridSpec& grid, const Vector& v) {
    return MeshFunction(grid, MeshId::primal(grid.dim()), std::vector<double>(v.data(), v.data() + v.size()));
}

/// Assembly shared by A_h and B_h: diffusion, drift and reaction samplers.
SparseMatrix assemble_operator(const GridSpec& grid, double t, const std::vector<SpaceTimeFn>& gamma,
                               const std::vector<SpaceTimeFn>& b, const SpaceTimeFn& c, bool check_positive) {
    const int d = grid.dim();
    const int n = grid.n();
    const double h = grid.h();
    const MeshId primal = MeshId::primal(d);
    const auto points = enumerate_mesh(grid, primal);
    const auto size = static_cast<Eigen::Index>(points.size());

    std::array<Eigen::Index, kMaxDim> stride{};
    Eigen::Index s = 1;
    for (int a = d - 1; a >= 0; --a) {
        stride[static_cast<std::size_t>(a)] = s;
        s *= n;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size) * static_cast<std::size_t>(2 * d + 1));
    const double inv_h2 = 1.0 / (h * h);
    for (Eigen::Index r = 0; r < size; ++r) {
        const MeshPoint& p = points[static_cast<std::size_t>(r)];
        const auto x = physical(grid, p);
        const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
        double diag = -c(t, xs);
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const int k = p.k[ui];
            double g_lo = 0.0, g_hi = 0.0;
            for (int sign : {-1, 1}) {
                const MeshPoint q = shifted(p, i, sign);
                const auto xq = physical(grid, q);
                const double gv = gamma[ui](t, std::span<const double>(xq.data(), xs.size()));
                if (check_positive && !(gv > 0.0)) {
                    throw Error("assemble_Ah: gamma_" + std::to_string(i) + "(" + format_double(t) + ", " +
                                point_string(grid, q) + ") = " + format_double(gv) + " is not positive");
                }
                (sign < 0 ? g_lo : g_hi) = gv;
            }
            const double bi = b[ui](t, xs);
            diag -= (g_lo + g_hi) * inv_h2;
            const double lo = g_lo * inv_h2 + bi / (2.0 * h);
            const double hi = g_hi * inv_h2 - bi / (2.0 * h);
            if (k > 2) trip.emplace_back(r, r - stride[ui], lo);
            if (k < 2 * n) trip.emplace_back(r, r + stride[ui], hi);
        }
        trip.emplace_back(r, r, diag);
    }
    SparseMatrix m(size, size);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

MeshFunction apply_operator(const std::vector<SpaceTimeFn>& gamma, const std::vector<SpaceTimeFn>& b,
                            const SpaceTimeFn& c, const MeshFunction& y, double t) {
    const GridSpec& grid = y.grid();
    const int d = grid.dim();
    y.require_mesh(MeshId::primal(d), "apply_Ah");
    MeshFunction out = -1.0 * (sample_at(grid, MeshId::primal(d), c, t) * y);
    for (int i = 0; i < d; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const MeshFunction gi = sample_at(grid, MeshId::dual_star(d, i), gamma[ui], t);
        out = out + diff(gi * diff(close(y, i), i), i);
        out = out - sample_at(grid, MeshId::primal(d), b[ui], t) * avg_diff(y, i);
    }
    return out;
}

bool is_symmetric(const SparseMatrix& m) {
    const SparseMatrix diff = m - SparseMatrix(m.transpose());
    double scale = 0.0, asym = 0.0;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) scale = std::max(scale, std::abs(it.value()));
    for (Eigen::Index r = 0; r < diff.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(diff, r); it; ++it) asym = std::max(asym, std::abs(it.value()));
    return asym <= 1e-14 * std::max(1.0, scale);
}

SparseMatrix identity(Eigen::Index n) {
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

/// One-step integration shared by the y- and z-systems. `source(m)` is the
/// forcing at frame m, `first` the frame holding the initial value.
void integrate(Trajectory& traj, const CoefficientFields& coeffs, const FrameSource& source, int first, int last) {
    const GridSpec& grid = traj.grid;
    const double dt = traj.time.dt();
    const double zeta = scheme_zeta(traj.scheme);
    const auto n = static_cast<Eigen::Index>(mesh_size(grid, MeshId::primal(grid.dim())));
    const SparseMatrix I = identity(n);

    Vector y = to_vector(traj.frames[static_cast<std::size_t>(first)]);
    SparseMatrix A_now = assemble_Ah(coeffs, grid, traj.time.t(first));
    Vector g_now = source(first);
    StepSolver solver;
    bool factored = false;
    for (int m = first; m < last; ++m) {
        const double t1 = traj.time.t(m + 1);
        SparseMatrix A_next = coeffs.time_independent ? A_now : assemble_Ah(coeffs, grid, t1);
        const Vector g_next = source(m + 1);
        if (!factored || !coeffs.time_independent) {
            solver.set(SparseMatrix(I - (dt * zeta) * A_next));
            factored = true;
        }
        Vector rhs = y + dt * zeta * g_next;
        if (zeta < 1.0) rhs += dt * (1.0 - zeta) * (A_now * y + g_now);
        Vector x = y;
        const auto [iters, rel] = solver.solve(rhs, x);
        if (!x.allFinite()) throw Error("solve_forward: non-finite values at step " + std::to_string(m + 1));
        traj.diagnostics.steps += 1;
        traj.diagnostics.max_iterations = std::max(traj.diagnostics.max_iterations, iters);
        traj.diagnostics.max_relative_residual = std::max(traj.diagnostics.max_relative_residual, rel);
        y = std::move(x);
        traj.frames[static_cast<std::size_t>(m + 1)] = to_primal(grid, y);
        A_now = std::move(A_next);
        g_now = g_next;
    }
}

}  // namespace

void StepSolver::set(SparseMatrix m) {
    L_ = std::move(m);
    symmetric_ = is_symmetric(L_);
    const Eigen::Index iters = std::max<Eigen::Index>(1000, 10 * L_.rows());
    if (symmetric_) {
        cg_.setTolerance(0.01 * kSolveTol);
        cg_.setMaxIterations(iters);
        cg_.compute(L_);
    } else {
        bicg_.setTolerance(0.01 * kSolveTol);
        bicg_.setMaxIterations(iters);
        bicg_.compute(L_);
    }
}

std::pair<int, double> StepSolver::solve(const Vector& rhs, Vector& x) {
    const double bn = rhs.norm();
    if (bn == 0.0) {
        x.setZero();
        return {0, 0.0};
    }
    int iters = 0;
    if (symmetric_) {
        x = cg_.solveWithGuess(rhs, x);
        iters = static_cast<int>(cg_.iterations());
    } else {
        x = bicg_.solveWithGuess(rhs, x);
        iters = static_cast<int>(bicg_.iterations());
    }
    const double rel = (rhs - L_ * x).norm() / bn;
    if (!(rel <= kSolveTol)) {
        throw Error(std::string(symmetric_ ? "CG" : "BiCGSTAB") + " did not reach relative residual 1e-10 (got " +
                    format_double(rel) + ")");
    }
    return {iters, rel};
}

double scheme_zeta(Scheme s) { return s == Scheme::BackwardEuler ? 1.0 : 0.5; }

int TimeGrid::index_of(double t) const {
    const double r = t / T * M;
    const long m = std::lround(r);
    if (m < 0 || m > M || std::abs(this->t(static_cast<int>(m)) - t) > 1e-12 * std::max(1.0, T))
        throw Error("time " + format_double(t) + " is not on the time grid (T = " + format_double(T) + ", M = " +
                    std::to_string(M) + ")");
    return static_cast<int>(m);
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(static_cast<std::size_t>(M + 1));
    for (int m = 0; m <= M; ++m) out[static_cast<std::size_t>(m)] = t(m);
    return out;
}

std::string to_string(Scheme s) { return s == Scheme::BackwardEuler ? "backward-euler" : "trapezoidal"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "backward-euler" || s == "be") return Scheme::BackwardEuler;
    if (s == "trapezoidal" || s == "cn") return Scheme::Trapezoidal;
    throw Error("unknown time scheme '" + s + "'");
}

SparseMatrix assemble_Ah(const CoefficientFields& coeffs, const GridSpec& grid, double t) {
    coeffs.validate(grid.dim());
    return assemble_operator(grid, t, coeffs.gamma, coeffs.b, coeffs.c, true);
}

MeshFunction apply_Ah(const CoefficientFields& coeffs, const MeshFunction& y, double t) {
    coeffs.validate(y.grid().dim());
    return apply_operator(coeffs.gamma, coeffs.b, coeffs.c, y, t);
}

MeshFunction apply_Bh(const CoefficientFields& coeffs, const MeshFunction& y, double t) {
    coeffs.validate(y.grid().dim());
    if (coeffs.time_independent) return MeshFunction(y.grid(), y.mesh());
    if (!coeffs.has_time_derivatives())
        throw Error("apply_Bh: coefficients depend on time but provide no analytic time derivatives");
    return apply_operator(coeffs.dgamma_dt, coeffs.db_dt, coeffs.dc_dt, y, t);
}

FrameSource sampled_source(const GridSpec& grid, const TimeGrid& time, const SpaceTimeFn& g) {
    return [grid, time, g](int m) { return to_vector(sample_at(grid, MeshId::primal(grid.dim()), g, time.t(m))); };
}

Trajectory solve_forward(const MeshFunction& y_ini, const SpaceTimeFn& g, const CoefficientFields& coeffs,
                         const TimeGrid& time, Scheme scheme) {
    return solve_forward(y_ini, sampled_source(y_ini.grid(), time, g), coeffs, time, scheme);
}

Trajectory solve_forward(const MeshFunction& y_ini, const FrameSource& g, const CoefficientFields& coeffs,
                         const TimeGrid& time, Scheme scheme) {
    const GridSpec& grid = y_ini.grid();
    y_ini.require_mesh(MeshId::primal(grid.dim()), "solve_forward");
    if (!(time.T > 0.0) || time.M < 1) throw Error("solve_forward: need T > 0 and M >= 1");
    Trajectory traj;
    traj.grid = grid;
    traj.time = time;
    traj.scheme = scheme;
    traj.frames.assign(static_cast<std::size_t>(time.M + 1), MeshFunction(grid, MeshId::primal(grid.dim())));
    traj.frames[0] = y_ini;
    integrate(traj, coeffs, g, 0, time.M);
    return traj;
}

std::vector<MeshFunction> time_derivative(const Trajectory& traj) {
    const int M = traj.time.M;
    if (M < 2) throw Error("time_derivative: need at least three frames");
    const double dt = traj.time.dt();
    std::vector<MeshFunction> out;
    out.reserve(static_cast<std::size_t>(M + 1));
    const auto& f = traj.frames;
    auto F = [&](int m) -> const MeshFunction& { return f[static_cast<std::size_t>(m)]; };
    out.push_back((1.0 / (2.0 * dt)) * ((-3.0) * F(0) + 4.0 * F(1) - F(2)));
    for (int m = 1; m < M; ++m) out.push_back((1.0 / (2.0 * dt)) * (F(m + 1) - F(m - 1)));
    out.push_back((1.0 / (2.0 * dt)) * (3.0 * F(M) - 4.0 * F(M - 1) + F(M - 2)));
    return out;
}

double scheme_residual(const Trajectory& traj, const FrameSource& g, const CoefficientFields& coeffs) {
    const double dt = traj.time.dt();
    const double zeta = scheme_zeta(traj.scheme);
    double worst = 0.0;
    Vector y0 = to_vector(traj.frame(0));
    Vector f0 = assemble_Ah(coeffs, traj.grid, 0.0) * y0;
    Vector g0 = g(0);
    for (int m = 0; m < traj.time.M; ++m) {
        const Vector y1 = to_vector(traj.frame(m + 1));
        const Vector f1 = assemble_Ah(coeffs, traj.grid, traj.time.t(m + 1)) * y1;
        const Vector g1 = g(m + 1);
        const Vector inc = dt * (zeta * (f1 + g1) + (1.0 - zeta) * (f0 + g0));
        const double r = (y1 - y0 - inc).norm();
        const double scale = (y1 - y0).norm() + dt * (zeta * (f1.norm() + g1.norm()) + (1.0 - zeta) * (f0.norm() + g0.norm()));
        if (scale > 0.0) worst = std::max(worst, r / scale);
        else worst = std::max(worst, r);
        y0 = y1;
        f0 = f1;
        g0 = g1;
    }
    return worst;
}

ZSolution solve_z_system(const Trajectory& y, const CoefficientFields& coeffs, const SpaceTimeFn& g,
                         const SpaceTimeFn& dg_dt, ZBackwardMode mode) {
    const GridSpec& grid = y.grid;
    const int d = grid.dim();
    coeffs.validate(d);
    if (!coeffs.time_independent && !coeffs.has_time_derivatives())
        throw Error("solve_z_system: coefficients depend on time but provide no analytic time derivatives");
    const TimeGrid& tg = y.time;
    const int mid = tg.index_of(0.5 * tg.T);
    const MeshId primal = MeshId::primal(d);

    auto source = [&](int m) {
        const double t = tg.t(m);
        return to_vector(apply_Bh(coeffs, y.frame(m), t) + sample_at(grid, primal, dg_dt, t));
    };

    ZSolution out;
    Trajectory& z = out.z;
    z.grid = grid;
    z.time = tg;
    z.scheme = y.scheme;
    z.system = "z";
    z.source = y.source;
    z.frames.assign(static_cast<std::size_t>(tg.M + 1), MeshFunction(grid, primal));
    const double t_mid = tg.t(mid);
    z.frames[static_cast<std::size_t>(mid)] = apply_Ah(coeffs, y.frame(mid), t_mid) + sample_at(grid, primal, g, t_mid);
    integrate(z, coeffs, source, mid, tg.M);

    const std::vector<MeshFunction> dy = time_derivative(y);
    if (mode == ZBackwardMode::Differencing) {
        for (int m = 0; m < mid; ++m) z.frames[static_cast<std::size_t>(m)] = dy[static_cast<std::size_t>(m)];
    } else {
        // s = T/2 - t: dw/ds = -A_h w - (B_h y + d_t g). Implicit steps in s with
        // a direct solver, since I + dt zeta A_h is indefinite for large dt.
        out.reversed_time_used = true;
        const double dt = tg.dt();
        const double zeta = scheme_zeta(y.scheme);
        const auto n = static_cast<Eigen::Index>(mesh_size(grid, primal));
        const SparseMatrix I = identity(n);
        Vector w = to_vector(z.frame(mid));
        SparseMatrix A_now = assemble_Ah(coeffs, grid, t_mid);
        Vector s_now = source(mid);
        for (int m = mid; m > 0; --m) {
            const double t1 = tg.t(m - 1);
            SparseMatrix A_next = coeffs.time_independent ? A_now : assemble_Ah(coeffs, grid, t1);
            const Vector s_next = source(m - 1);
            SparseMatrix L = I + (dt * zeta) * A_next;
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(Eigen::SparseMatrix<double>(L));
            if (lu.info() != Eigen::Success) throw Error("solve_z_system: reversed-time factorization failed");
            Vector rhs = w - dt * zeta * s_next;
            if (zeta < 1.0) rhs -= dt * (1.0 - zeta) * (A_now * w + s_now);
            w = lu.solve(rhs);
            if (!w.allFinite()) throw Error("solve_z_system: non-finite values at reversed step " + std::to_string(m));
            z.frames[static_cast<std::size_t>(m - 1)] = to_primal(grid, w);
            A_now = std::move(A_next);
            s_now = s_next;
        }
    }

    out.gap.resize(static_cast<std::size_t>(tg.M + 1));
    out.relative_gap.resize(static_cast<std::size_t>(tg.M + 1));
    for (int m = 0; m <= tg.M; ++m) {
        const auto um = static_cast<std::size_t>(m);
        const double gap = l2_norm(z.frames[um] - dy[um]);
        const double ref = l2_norm(dy[um]);
        out.gap[um] = gap;
        out.relative_gap[um] = ref > 0.0 ? gap / ref : gap;
    }
    return out;
}

double energy_constant(int dim, const CoefficientBounds& bounds) {
    return 0.5 * dim * bounds.reg_gamma * bounds.b_sup * bounds.b_sup + bounds.c_sup + 0.5;
}

EnergyCheck energy_check(const Trajectory& traj, const SpaceTimeFn& g, const CoefficientBounds& bounds, double T0,
                         double t) {
    if (!(T0 < t) || T0 < 0.0 || t > traj.time.T) throw Error("energy_check: need 0 <= T0 < t <= T");
    const int m0 = traj.time.index_of(T0);
    const int m1 = traj.time.index_of(t);
    const GridSpec& grid = traj.grid;
    const MeshId primal = MeshId::primal(grid.dim());
    EnergyCheck out;
    out.c_tilde = energy_constant(grid.dim(), bounds);
    out.lhs = integral(traj.frame(m1) * traj.frame(m1));
    const double dt = traj.time.dt();
    CompensatedSum src;
    for (int m = m0; m <= m1; ++m) {
        const MeshFunction gm = sample_at(grid, primal, g, traj.time.t(m));
        const double w = (m == m0 || m == m1) ? 0.5 * dt : dt;
        src.add(w * integral(gm * gm));
    }
    out.rhs = std::exp(out.c_tilde * (t - T0)) * (integral(traj.frame(m0) * traj.frame(m0)) + src.value());
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-8);
    return out;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
    os << "sdc-trajectory 1\n";
    os << "dim " << traj.grid.dim() << "\n";
    os << "n " << traj.grid.n() << "\n";
    os << "T " << format_double(traj.time.T) << "\n";
    os << "M " << traj.time.M << "\n";
    os << "scheme " << to_string(traj.scheme) << "\n";
    os << "system " << traj.system << "\n";
    os << "source " << traj.source << "\n";
    os << "frames " << traj.frames.size() << "\n";
    for (const MeshFunction& f : traj.frames) {
        bool first = true;
        for (double v : f.values()) {
            if (!first) os << ' ';
            os << format_double(v);
            first = false;
        }
        os << '\n';
    }
}

Trajectory read_trajectory(std::istream& is) {
    std::string line;
    auto field = [&](const std::string& key) {
        if (!std::getline(is, line)) throw Error("read_trajectory: missing '" + key + "' line");
        if (line.rfind(key, 0) != 0) throw Error("read_trajectory: expected '" + key + "', got '" + line + "'");
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
    };
    if (field("sdc-trajectory") != "1") throw Error("read_trajectory: unsupported version");
    const int dim = std::stoi(field("dim"));
    const int n = std::stoi(field("n"));
    Trajectory traj;
    traj.grid = GridSpec(dim, n);
    traj.time.T = parse_double(field("T"));
    traj.time.M = std::stoi(field("M"));
    traj.scheme = scheme_from_string(field("scheme"));
    traj.system = field("system");
    traj.source = field("source");
    const std::size_t count = std::stoul(field("frames"));
    const MeshId primal = MeshId::primal(dim);
    const std::size_t size = mesh_size(traj.grid, primal);
    for (std::size_t f = 0; f < count; ++f) {
        if (!std::getline(is, line)) throw Error("read_trajectory: truncated frame data");
        std::vector<double> vals;
        vals.reserve(size);
        std::istringstream row(line);
        std::string tok;
        while (row >> tok) vals.push_back(parse_double(tok));
        if (vals.size() != size) throw Error("read_trajectory: frame " + std::to_string(f) + " has wrong length");
        traj.frames.emplace_back(traj.grid, primal, std::move(vals));
    }
    return traj;
}

}  // namespace sdc
