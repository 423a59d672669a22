#include "sdc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "sdc/carleman_verifier.hpp"
#include "sdc/discrete_calculus.hpp"
#include "sdc/format.hpp"
#include "sdc/inverse_problem.hpp"
#include "sdc/random.hpp"

namespace sdc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// u(x) = sum_m a_m prod_j cos(k_mj pi x_j + phase_mj), sum |a_m| = 1.
struct SmoothField {
    struct Mode {
        double a = 0.0;
        std::array<double, kMaxDim> k{};
        std::array<double, kMaxDim> phase{};
    };
    int dim = 1;
    std::vector<Mode> modes;

    static SmoothField draw(Rng& rng, int dim, int count) {
        SmoothField f;
        f.dim = dim;
        double total = 0.0;
        for (int m = 0; m < count; ++m) {
            Mode mode;
            mode.a = uniform(rng, -1.0, 1.0);
            for (int j = 0; j < dim; ++j) {
                mode.k[static_cast<std::size_t>(j)] = uniform(rng, 0.5, 3.0);
                mode.phase[static_cast<std::size_t>(j)] = uniform(rng, 0.0, 2.0 * kPi);
            }
            total += std::abs(mode.a);
            f.modes.push_back(mode);
        }
        for (auto& mode : f.modes) mode.a /= total;
        return f;
    }

    double operator()(std::span<const double> x) const {
        double sum = 0.0;
        for (const auto& mode : modes) {
            double prod = mode.a;
            for (int j = 0; j < dim; ++j) {
                const auto s = static_cast<std::size_t>(j);
                prod *= std::cos(mode.k[s] * kPi * x[s] + mode.phase[s]);
            }
            sum += prod;
        }
        return sum;
    }
};

// 1 + kappa sin(omega t + psi) and its derivative.
struct TimeFactor {
    double kappa = 0.0;
    double omega = 2.0 * kPi;
    double psi = 0.0;
    double value(double t) const { return 1.0 + kappa * std::sin(omega * t + psi); }
    double deriv(double t) const { return kappa * omega * std::cos(omega * t + psi); }
};

// base + amp u(x) tf(t), with its time derivative.
std::pair<SpaceTimeFn, SpaceTimeFn> modulated(double base, double amp, SmoothField u, TimeFactor tf) {
    auto field = std::make_shared<const SmoothField>(std::move(u));
    SpaceTimeFn value = [=](double t, std::span<const double> x) { return base + amp * (*field)(x) * tf.value(t); };
    SpaceTimeFn deriv = [=](double t, std::span<const double> x) { return amp * (*field)(x) * tf.deriv(t); };
    return {value, deriv};
}

GridSpec grid_from_inverse_h(int dim, int inverse_h) {
    if (inverse_h < 2) throw Error("grid 1/h = " + std::to_string(inverse_h) + " has no interior points");
    return GridSpec(dim, inverse_h - 1);
}

CarlemanWeight make_weight(const ExperimentConfig& cfg, const GridSpec& grid, const WeightParams& params) {
    PsiBuild pb = build_psi(grid, cfg.omega0(), cfg.omega(), params);
    return CarlemanWeight(pb.psi, params);
}

double max_or(const std::vector<double>& v, double fallback) {
    return v.empty() ? fallback : *std::max_element(v.begin(), v.end());
}

std::string fmt(double v) { return format_double(v); }

// Manufactured-solution coefficients for the convergence study.
CoefficientFields manufactured_coefficients(int dim) {
    CoefficientFields c;
    for (int i = 0; i < dim; ++i) {
        const auto s = static_cast<std::size_t>(i);
        c.gamma.push_back([s](double t, std::span<const double> x) { return 1.0 + 0.25 * std::sin(2 * kPi * x[s]) + 0.1 * t; });
        c.dgamma_dt.push_back(constant_fn(0.1));
        c.b.push_back([s](double, std::span<const double> x) { return 0.5 * std::cos(kPi * x[s]); });
        c.db_dt.push_back(constant_fn(0.0));
    }
    c.c = [](double, std::span<const double> x) { return 1.0 + x[0]; };
    c.dc_dt = constant_fn(0.0);
    c.time_independent = false;
    return c;
}

// y* = e^{-t} prod sin(pi x_j)
double ms_solution(int dim, double t, std::span<const double> x) {
    double v = std::exp(-t);
    for (int j = 0; j < dim; ++j) v *= std::sin(kPi * x[static_cast<std::size_t>(j)]);
    return v;
}

// d_t y* - A y* for the continuous operator.
double ms_source(int dim, double t, std::span<const double> x) {
    double S = 1.0;
    for (int j = 0; j < dim; ++j) S *= std::sin(kPi * x[static_cast<std::size_t>(j)]);
    double Ay = -(1.0 + x[0]) * S;
    for (int i = 0; i < dim; ++i) {
        const auto s = static_cast<std::size_t>(i);
        double dS = kPi * std::cos(kPi * x[s]);
        for (int j = 0; j < dim; ++j)
            if (j != i) dS *= std::sin(kPi * x[static_cast<std::size_t>(j)]);
        const double gamma = 1.0 + 0.25 * std::sin(2 * kPi * x[s]) + 0.1 * t;
        const double dgamma = 0.5 * kPi * std::cos(2 * kPi * x[s]);
        Ay += dgamma * dS - gamma * kPi * kPi * S;
        Ay -= 0.5 * std::cos(kPi * x[s]) * dS;
    }
    return std::exp(-t) * (-S - Ay);
}

double max_frame_error(const Trajectory& traj, const std::function<MeshFunction(int)>& exact) {
    double err = 0.0;
    for (int m = 0; m <= traj.time.M; ++m) err = std::max(err, l2_norm(traj.frame(m) - exact(m)));
    return err;
}

// Source making the one-step scheme reproduce ys exactly.
std::vector<Vector> scheme_exact_source(const std::vector<MeshFunction>& ys, const CoefficientFields& coeffs,
                                        const TimeGrid& time, Scheme scheme) {
    const double zeta = scheme_zeta(scheme);
    const double dt = time.dt();
    auto vec = [](const MeshFunction& u) { return Eigen::Map<const Vector>(u.values().data(), static_cast<Eigen::Index>(u.size())); };
    std::vector<Vector> g(ys.size());
    // g_0 from the equation itself.
    g[0] = Vector::Zero(static_cast<Eigen::Index>(ys[0].size()));
    Vector prev_Ay = vec(apply_Ah(coeffs, ys[0], time.t(0)));
    for (int m = 0; m < time.M; ++m) {
        const auto s = static_cast<std::size_t>(m);
        const Vector Ay_next = vec(apply_Ah(coeffs, ys[s + 1], time.t(m + 1)));
        // ys[m+1] - ys[m] = dt ((1-zeta)(A_m y_m + g_m) + zeta (A_{m+1} y_{m+1} + g_{m+1}))
        const Vector lhs = (vec(ys[s + 1]) - vec(ys[s])) / dt - (1.0 - zeta) * (prev_Ay + g[s]) - zeta * Ay_next;
        g[s + 1] = lhs / zeta;
        prev_Ay = Ay_next;
    }
    return g;
}

struct Slopes {
    std::vector<double> segment;
    double fitted = 0.0;
};

Slopes log_slopes(const std::vector<double>& inv_h, const std::vector<double>& logs) {
    Slopes s;
    for (std::size_t k = 1; k < logs.size(); ++k) s.segment.push_back((logs[k] - logs[k - 1]) / (inv_h[k] - inv_h[k - 1]));
    s.fitted = fitted_slope(inv_h, logs);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

RandomProblem random_problem(std::uint64_t seed, int dim, const ProblemOptions& opts) {
    Rng rng(seed);
    RandomProblem p;
    p.seed = seed;
    p.dim = dim;

    // Draws are sequenced explicitly: argument evaluation order is unspecified.
    auto field = [&](double base, double amp) {
        SmoothField u = SmoothField::draw(rng, dim, 3);
        TimeFactor f;
        f.kappa = opts.time_dependent ? 0.2 : 0.0;
        f.psi = uniform(rng, 0.0, 2.0 * kPi);
        return modulated(base, amp, std::move(u), f);
    };
    for (int i = 0; i < dim; ++i) {
        auto [g, dg] = field(1.25, 0.6);
        p.coeffs.gamma.push_back(g);
        p.coeffs.dgamma_dt.push_back(dg);
    }
    for (int i = 0; i < dim; ++i) {
        auto [b, db] = field(0.0, opts.b_max / 1.2);
        p.coeffs.b.push_back(b);
        p.coeffs.db_dt.push_back(db);
    }
    {
        auto [c, dc] = field(0.0, opts.c_max / 1.2);
        p.coeffs.c = c;
        p.coeffs.dc_dt = dc;
    }
    p.coeffs.time_independent = !opts.time_dependent;

    struct SineMode {
        double a;
        std::array<int, kMaxDim> n;
    };
    std::vector<SineMode> modes;
    for (int m = 0; m < 3; ++m) {
        SineMode mode{uniform(rng, -1.0, 1.0), {1, 1, 1}};
        for (int j = 0; j < dim; ++j) mode.n[static_cast<std::size_t>(j)] = 1 + static_cast<int>(rng() % 3);
        modes.push_back(mode);
    }
    if (opts.zero_initial) {
        p.y_ini = [](std::span<const double>) { return 0.0; };
    } else {
        p.y_ini = [modes, dim](std::span<const double> x) {
            double sum = 0.0;
            for (const auto& mode : modes) {
                double prod = mode.a;
                for (int j = 0; j < dim; ++j)
                    prod *= std::sin(mode.n[static_cast<std::size_t>(j)] * kPi * x[static_cast<std::size_t>(j)]);
                sum += prod;
            }
            return sum;
        };
    }

    SmoothField gu = SmoothField::draw(rng, dim, 3);
    TimeFactor gt;
    gt.kappa = 0.5;
    gt.psi = uniform(rng, 0.0, 2.0 * kPi);
    auto [g, dg] = modulated(0.0, 1.0, std::move(gu), gt);
    p.g = g;
    p.dg_dt = dg;
    return p;
}

Trajectory solve_problem(const RandomProblem& prob, const GridSpec& grid, const TimeGrid& time, Scheme scheme) {
    const MeshFunction y0 = MeshFunction::sample(grid, MeshId::primal(grid.dim()), prob.y_ini);
    Trajectory traj = solve_forward(y0, prob.g, prob.coeffs, time, scheme);
    traj.source = "random:" + std::to_string(prob.seed);
    return traj;
}

WeightParams ExperimentConfig::weight_params() const {
    WeightParams p = weight;
    p.T = T;
    return p;
}

bool SuiteResult::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

void SuiteResult::check(std::string name, double value, double bound, bool pass) {
    assertions.push_back({std::move(name), value, bound, pass});
}

void parallel_for(int count, int workers, const std::function<void(int)>& f) {
    if (count <= 0) return;
    const int n = std::clamp(workers, 1, count);
    if (n == 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    // Lowest failing index wins, independent of scheduling.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double fitted_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error("fitted_slope: need two or more points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------

SuiteResult run_verify_ops(const ExperimentConfig& cfg) {
    const auto& vc = cfg.verify_ops;
    SuiteResult res;
    res.suite = "verify-ops";

    const std::vector<std::string> names{"leibniz_diff", "leibniz_avg", "avg_square",   "avg_square_inequality",
                                         "diff_square",  "ibp_diff",    "ibp_avg"};
    struct Row {
        int d = 0, N = 0, axis = 0;
        std::vector<double> rel;
    };
    std::vector<std::vector<Row>> rows(static_cast<std::size_t>(vc.fields));

    parallel_for(vc.fields, cfg.workers, [&](int trial) {
        Rng rng(run_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
        const int d = vc.dims[static_cast<std::size_t>(trial) % vc.dims.size()];
        const int N = vc.n_min + static_cast<int>(rng() % static_cast<std::uint64_t>(vc.n_max - vc.n_min + 1));
        const GridSpec grid(d, N);
        auto random_on = [&](const MeshId& mesh) {
            MeshFunction u(grid, mesh);
            for (auto& v : u.values()) v = uniform(rng, -1.0, 1.0);
            return u;
        };
        for (int i = 0; i < d; ++i) {
            const MeshId closed = MeshId::closure(d, i);
            const MeshFunction u = random_on(closed);
            const MeshFunction v = random_on(closed);
            const LeibnizResiduals lr = leibniz_residuals(u, v, i);

            // A_i(|u|^2) >= |A_i u|^2 pointwise.
            const MeshFunction gap = avg(u * u, i) - avg(u, i) * avg(u, i);
            double worst = 0.0;
            for (double g : gap.values()) worst = std::max(worst, -g);
            const double ineq_scale = linf_norm(avg(u * u, i));

            const MeshFunction vd = random_on(MeshId::dual_star(d, i));
            Row row{d, N, i, {}};
            row.rel = {lr.diff_rule.relative(),
                       lr.avg_rule.relative(),
                       avg_square_residual(u, i).relative(),
                       ineq_scale > 0 ? worst / ineq_scale : worst,
                       diff_square_residual(u, i).relative(),
                       ibp_diff_residual(u, vd, i).relative(),
                       ibp_avg_residual(u, vd, i).relative()};
            rows[static_cast<std::size_t>(trial)].push_back(row);
        }
    });

    std::vector<double> worst(names.size(), 0.0);
    std::ostringstream csv;
    csv << "trial,d,N,axis,identity,relative_residual\n";
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (const Row& r : rows[t])
            for (std::size_t k = 0; k < names.size(); ++k) {
                worst[k] = std::max(worst[k], r.rel[k]);
                csv << t << ',' << r.d << ',' << r.N << ',' << r.axis << ',' << names[k] << ',' << fmt(r.rel[k]) << '\n';
            }
    for (std::size_t k = 0; k < names.size(); ++k) res.check_le(names[k], worst[k], vc.tolerance);
    res.tables.push_back({"identities.csv", csv.str()});
    return res;
}

SuiteResult run_converge(const ExperimentConfig& cfg) {
    const auto& cc = cfg.converge;
    SuiteResult res;
    res.suite = "converge";
    const int d = cfg.dim;
    const CoefficientFields coeffs = manufactured_coefficients(d);
    const SpaceTimeFn exact = [d](double t, std::span<const double> x) { return ms_solution(d, t, x); };
    const SpaceTimeFn source = [d](double t, std::span<const double> x) { return ms_source(d, t, x); };
    const MeshId primal = MeshId::primal(d);

    // Discrete manufactured solution: the source is defined by the scheme.
    {
        const GridSpec grid = grid_from_inverse_h(d, cc.time_grid);
        const TimeGrid time{cfg.T, cc.discrete_M};
        std::vector<MeshFunction> ys;
        for (int m = 0; m <= time.M; ++m) ys.push_back(sample_at(grid, primal, exact, time.t(m)));
        const auto g = scheme_exact_source(ys, coeffs, time, cfg.scheme);
        const Trajectory traj = solve_forward(ys[0], [&](int m) { return g[static_cast<std::size_t>(m)]; }, coeffs, time, cfg.scheme);
        double rel = 0.0;
        for (int m = 0; m <= time.M; ++m)
            rel = std::max(rel, l2_norm(traj.frame(m) - ys[static_cast<std::size_t>(m)]) / l2_norm(ys[static_cast<std::size_t>(m)]));
        res.check_le("discrete_ms_relative_error", rel, cc.discrete_tolerance);
        std::ostringstream csv;
        csv << "N,M,scheme,relative_error\n" << grid.n() << ',' << time.M << ',' << to_string(cfg.scheme) << ',' << fmt(rel) << '\n';
        res.tables.push_back({"converge_discrete.csv", csv.str()});
    }

    auto continuous_error = [&](const GridSpec& grid, int M) {
        const TimeGrid time{cfg.T, M};
        const Trajectory traj = solve_forward(sample_at(grid, primal, exact, 0.0), source, coeffs, time, cfg.scheme);
        return max_frame_error(traj, [&](int m) { return sample_at(grid, primal, exact, time.t(m)); });
    };

    // Spatial order.
    {
        std::vector<double> errs;
        std::ostringstream csv;
        csv << "N,h,M,error,order\n";
        for (std::size_t k = 0; k < cc.grids.size(); ++k) {
            const GridSpec grid = grid_from_inverse_h(d, cc.grids[k]);
            errs.push_back(continuous_error(grid, cc.space_M));
            double order = std::numeric_limits<double>::quiet_NaN();
            if (k > 0) {
                order = std::log(errs[k - 1] / errs[k]) / std::log(static_cast<double>(cc.grids[k]) / cc.grids[k - 1]);
                res.check_ge("space_order_N" + std::to_string(grid.n()), order, cc.min_order);
            }
            csv << grid.n() << ',' << fmt(grid.h()) << ',' << cc.space_M << ',' << fmt(errs[k]) << ','
                << (k > 0 ? fmt(order) : "") << '\n';
        }
        // Step halving on the finest grid: the time error must be a small
        // fraction of the spatial error.
        const GridSpec finest = grid_from_inverse_h(d, cc.grids.back());
        const double halved = continuous_error(finest, 2 * cc.space_M);
        res.check_le("time_share_of_space_error", std::abs(errs.back() - halved) / halved, 0.01);
        res.tables.push_back({"converge_space.csv", csv.str()});
    }

    // Temporal order: semi-discrete exact solution, source sampled pointwise.
    {
        const GridSpec grid = grid_from_inverse_h(d, cc.time_grid);
        std::ostringstream csv;
        csv << "M,dt,error,order\n";
        std::vector<double> errs;
        for (std::size_t k = 0; k < cc.time_steps.size(); ++k) {
            const TimeGrid time{cfg.T, cc.time_steps[k]};
            std::vector<MeshFunction> ys;
            for (int m = 0; m <= time.M; ++m) ys.push_back(sample_at(grid, primal, exact, time.t(m)));
            const FrameSource g = [&](int m) {
                const double t = time.t(m);
                MeshFunction dy = -1.0 * ys[static_cast<std::size_t>(m)];
                const MeshFunction gm = dy - apply_Ah(coeffs, ys[static_cast<std::size_t>(m)], t);
                return Vector(Eigen::Map<const Vector>(gm.values().data(), static_cast<Eigen::Index>(gm.size())));
            };
            const Trajectory traj = solve_forward(ys[0], g, coeffs, time, cfg.scheme);
            errs.push_back(max_frame_error(traj, [&](int m) { return ys[static_cast<std::size_t>(m)]; }));
            double order = std::numeric_limits<double>::quiet_NaN();
            if (k > 0) {
                order = std::log(errs[k - 1] / errs[k]) / std::log(static_cast<double>(cc.time_steps[k]) / cc.time_steps[k - 1]);
                res.check_ge("time_order_M" + std::to_string(time.M), order, cc.min_order);
            }
            csv << time.M << ',' << fmt(time.dt()) << ',' << fmt(errs[k]) << ',' << (k > 0 ? fmt(order) : "") << '\n';
        }
        res.tables.push_back({"converge_time.csv", csv.str()});
    }
    return res;
}

SuiteResult run_energy(const ExperimentConfig& cfg) {
    const auto& ec = cfg.energy;
    SuiteResult res;
    res.suite = "energy";
    struct Row {
        std::uint64_t seed = 0;
        int d = 0, N = 0;
        double T0 = 0, t = 0;
        EnergyCheck check;
    };
    std::vector<Row> rows(static_cast<std::size_t>(ec.runs));
    parallel_for(ec.runs, cfg.workers, [&](int r) {
        const auto ur = static_cast<std::size_t>(r);
        Row row;
        row.seed = run_seed(cfg.seed, ur);
        row.d = ec.dims[ur % ec.dims.size()];
        const GridSpec grid = grid_from_inverse_h(row.d, ec.grids[(ur / ec.dims.size()) % ec.grids.size()]);
        row.N = grid.n();
        const TimeGrid time{cfg.T, ec.M};
        const RandomProblem prob = random_problem(row.seed, row.d, cfg.problem);
        const Trajectory traj = solve_problem(prob, grid, time, cfg.scheme);
        Rng rng(row.seed ^ 0x9e3779b97f4a7c15ULL);
        const int m0 = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(ec.M - 1));
        const int m1 = m0 + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(ec.M - m0));
        row.T0 = time.t(m0);
        row.t = time.t(m1);
        const auto times = time.times();
        const CoefficientBounds bounds = compute_bounds(prob.coeffs, grid, times);
        row.check = energy_check(traj, prob.g, bounds, row.T0, row.t);
        rows[ur] = row;
    });
    int violations = 0;
    double worst = 0.0;
    std::ostringstream csv;
    csv << "run_id,seed,d,N,T0,t,lhs,rhs,c_tilde,holds\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& w = rows[r];
        if (!w.check.holds) ++violations;
        worst = std::max(worst, w.check.lhs / w.check.rhs);
        csv << r << ',' << w.seed << ',' << w.d << ',' << w.N << ',' << fmt(w.T0) << ',' << fmt(w.t) << ','
            << fmt(w.check.lhs) << ',' << fmt(w.check.rhs) << ',' << fmt(w.check.c_tilde) << ',' << (w.check.holds ? 1 : 0)
            << '\n';
    }
    res.check_le("violations", violations, 0);
    res.check_le("max_lhs_over_rhs", worst, 1.0 + 1e-8);
    res.tables.push_back({"energy.csv", csv.str()});
    return res;
}

SuiteResult run_weights(const ExperimentConfig& cfg) {
    const auto& wc = cfg.weights;
    SuiteResult res;
    res.suite = "weights";
    const GridSpec grid(cfg.dim, 15);
    const double T = cfg.T;

    double endpoint_dev = 0.0, midpoint_dev = 0.0, d2_ratio = kInf, endpoint_excess = -kInf, sqrt_excess = -kInf;
    std::ostringstream bounds_csv;
    bounds_csv << "T,delta,theta_0,theta_T,theta_mid,min_d2theta,two_over_T2,max_endpoint_exponent,max_sqrt_theta_violation\n";
    for (double delta : wc.deltas) {
        WeightParams params = cfg.weight_params();
        params.delta = delta;
        const CarlemanWeight w = make_weight(cfg, grid, params);
        const double e = theta_endpoint_closed_form(T, delta);
        const double mid = theta_midpoint_closed_form(T, delta);
        endpoint_dev = std::max({endpoint_dev, std::abs(w.theta(0.0) - e) / e, std::abs(w.theta(T) - e) / e});
        midpoint_dev = std::max(midpoint_dev, std::abs(w.theta(0.5 * T) - mid) / mid);
        const WeightBoundSamples s = sample_weight_bounds(w, grid, wc.time_samples);
        d2_ratio = std::min(d2_ratio, s.min_d2theta * T * T / 2.0);
        const double scale = 2.0 * params.tau * w.theta_max() * w.mu1();
        endpoint_excess = std::max(endpoint_excess, s.max_endpoint_exponent / scale);
        sqrt_excess = std::max(sqrt_excess, s.max_sqrt_theta_violation / (0.5 * T * w.theta_max()));
        bounds_csv << fmt(T) << ',' << fmt(delta) << ',' << fmt(w.theta(0.0)) << ',' << fmt(w.theta(T)) << ','
                   << fmt(w.theta(0.5 * T)) << ',' << fmt(s.min_d2theta) << ',' << fmt(2.0 / (T * T)) << ','
                   << fmt(s.max_endpoint_exponent) << ',' << fmt(s.max_sqrt_theta_violation) << '\n';
    }
    res.check_le("theta_endpoint_closed_form_rel_dev", endpoint_dev, 1e-14);
    res.check_le("theta_midpoint_closed_form_rel_dev", midpoint_dev, 1e-14);
    res.check_ge("min_d2theta_over_2_by_T2", d2_ratio, 1.0);
    res.check_le("endpoint_exponent_excess", endpoint_excess, 1e-12);
    res.check_le("sqrt_theta_derivative_excess", sqrt_excess, 1e-12);
    res.tables.push_back({"weight_bounds.csv", bounds_csv.str()});

    // Time-integral scaling against tau at the least and most negative phi.
    std::ostringstream csv;
    csv << "p,delta,phi,tau,integral_scaled,log_lhs,log_rhs,ratio\n";
    std::ostringstream slopes;
    slopes << "p,delta,phi,slope,expected\n";
    for (int p : {0, 1}) {
        double worst = 0.0;
        for (double delta : wc.deltas) {
            WeightParams params = cfg.weight_params();
            params.delta = delta;
            const CarlemanWeight w0 = make_weight(cfg, grid, params);
            const std::array<double, kMaxDim> center = params.x0;
            std::array<double, kMaxDim> corner{};
            for (double phi : {w0.phi(std::span<const double>(center.data(), kMaxDim)),
                               w0.phi(std::span<const double>(corner.data(), kMaxDim))}) {
                std::vector<double> lt, li;
                for (double tau : wc.taus) {
                    params.tau = tau;
                    const CarlemanWeight w(w0.psi(), params);
                    const GaussTimeBound b = gauss_time_bound_check(w, p, phi);
                    lt.push_back(std::log(tau));
                    li.push_back(std::log(b.integral_scaled));
                    csv << p << ',' << fmt(delta) << ',' << fmt(phi) << ',' << fmt(tau) << ',' << fmt(b.integral_scaled) << ','
                        << fmt(b.log_lhs) << ',' << fmt(b.log_rhs) << ',' << fmt(b.ratio) << '\n';
                }
                const double slope = fitted_slope(lt, li);
                worst = std::max(worst, std::abs(slope - (p - 0.5)));
                slopes << p << ',' << fmt(delta) << ',' << fmt(phi) << ',' << fmt(slope) << ',' << fmt(p - 0.5) << '\n';
            }
        }
        res.check_le("time_integral_slope_dev_p" + std::to_string(p), worst, wc.slope_tolerance);
    }
    res.tables.push_back({"weight_time_integral.csv", csv.str()});
    res.tables.push_back({"weight_slopes.csv", slopes.str()});
    return res;
}

SuiteResult run_carleman(const ExperimentConfig& cfg) {
    const auto& cc = cfg.carleman;
    SuiteResult res;
    res.suite = "carleman";
    const TimeGrid time{cfg.T, cfg.M};
    const WeightParams params = cfg.weight_params();

    struct Cell {
        CarlemanReport report[2];
        double required_C[2] = {0, 0};
    };
    const auto runs = static_cast<std::size_t>(cc.runs);
    std::vector<Cell> cells(runs * cc.grids.size());
    parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int idx) {
        const auto u = static_cast<std::size_t>(idx);
        const GridSpec grid = grid_from_inverse_h(cfg.dim, cc.grids[u / runs]);
        const std::size_t r = u % runs;
        const RandomProblem prob = random_problem(run_seed(cfg.seed, r), cfg.dim, cfg.problem);
        const Trajectory traj = solve_problem(prob, grid, time, cfg.scheme);
        const FrameSource g = sampled_source(grid, time, prob.g);
        const CarlemanWeight w = make_weight(cfg, grid, params);
        for (int p : {0, 1}) {
            cells[u].report[p] = verify_inequality(traj, g, prob.coeffs, w, p, cfg.omega(), cfg.omega0());
            cells[u].required_C[p] = pointwise_time_bound(traj, prob.coeffs, w, p, 0.5 * cfg.T, 0.0).required_C;
        }
    });

    std::ostringstream csv;
    csv << "run_id,seed,N,h,p,log_I_p,log_J_p,log_rhs_source,log_rhs_local,log_rhs_endpoint,log_ratio,ratio,admissible,"
           "pointwise_required_C\n";
    for (int p : {0, 1}) {
        std::vector<double> max_ratio;
        for (std::size_t gi = 0; gi < cc.grids.size(); ++gi) {
            const GridSpec grid = grid_from_inverse_h(cfg.dim, cc.grids[gi]);
            std::vector<double> ratios, cs;
            int inadmissible = 0;
            for (std::size_t r = 0; r < runs; ++r) {
                const Cell& c = cells[gi * runs + r];
                const CarlemanReport& rep = c.report[p];
                if (rep.ratio) ratios.push_back(*rep.ratio);
                else ++inadmissible;
                cs.push_back(c.required_C[p]);
                csv << r << ',' << run_seed(cfg.seed, r) << ',' << grid.n() << ',' << fmt(grid.h()) << ',' << p << ','
                    << fmt(rep.lhs.I().log_value) << ',' << fmt(rep.lhs.J().log_value) << ','
                    << fmt(rep.rhs.source.log_value) << ',' << fmt(rep.rhs.local_omega.log_value) << ','
                    << fmt(rep.rhs.time_endpoints.log_value) << ',' << fmt(rep.log_ratio) << ','
                    << (rep.ratio ? fmt(*rep.ratio) : "") << ',' << (rep.admissible() ? 1 : 0) << ','
                    << fmt(c.required_C[p]) << '\n';
            }
            const std::string tag = "_p" + std::to_string(p) + "_N" + std::to_string(grid.n());
            res.check_le("inadmissible_runs" + tag, inadmissible, 0);
            const double mr = max_or(ratios, kInf);
            max_ratio.push_back(mr);
            res.check("max_ratio" + tag, mr, kInf, std::isfinite(mr));
            const double mc = max_or(cs, kInf);
            res.check("pointwise_required_C" + tag, mc, kInf, std::isfinite(mc));
        }
        const double hi = *std::max_element(max_ratio.begin(), max_ratio.end());
        const double lo = *std::min_element(max_ratio.begin(), max_ratio.end());
        res.check_le("max_ratio_spread_p" + std::to_string(p), hi / lo, cc.max_spread);
    }
    res.tables.push_back({"carleman_corpus.csv", csv.str()});

    // Quadrature step halving on the first run of the coarsest grid.
    {
        const GridSpec grid = grid_from_inverse_h(cfg.dim, cc.grids.front());
        const RandomProblem prob = random_problem(run_seed(cfg.seed, 0), cfg.dim, cfg.problem);
        const CarlemanWeight w = make_weight(cfg, grid, params);
        std::vector<std::vector<double>> logs;
        for (int M : {cfg.M, 2 * cfg.M}) {
            const TimeGrid tg{cfg.T, M};
            const Trajectory traj = solve_problem(prob, grid, tg, cfg.scheme);
            const LhsTerms l = compute_lhs(traj, prob.coeffs, w, 0);
            const RhsTerms r = compute_rhs(traj, sampled_source(grid, tg, prob.g), w, 0, cfg.omega());
            logs.push_back({l.I().log_value, l.J().log_value, r.source.log_value, r.local_omega.log_value,
                            r.time_endpoints.log_value});
        }
        double change = 0.0;
        for (std::size_t k = 0; k < logs[0].size(); ++k) change = std::max(change, std::abs(std::expm1(logs[1][k] - logs[0][k])));
        res.check_le("quadrature_halving_rel_change", change, 0.01);
    }

    // Feasibility map over (tau, delta) with the coupled delta added per grid.
    {
        std::vector<FeasibilityRow> rows;
        const RandomProblem prob = random_problem(run_seed(cfg.seed, 0), cfg.dim, cfg.problem);
        std::vector<std::vector<FeasibilityRow>> per_grid(cc.map_grids.size());
        parallel_for(static_cast<int>(cc.map_grids.size()), cfg.workers, [&](int k) {
            const GridSpec grid = grid_from_inverse_h(cfg.dim, cc.map_grids[static_cast<std::size_t>(k)]);
            FeasibilityRun run{solve_problem(prob, grid, time, cfg.scheme), sampled_source(grid, time, prob.g), prob.coeffs};
            std::vector<double> deltas = cc.deltas;
            deltas.push_back(coupled_delta(cc.tau1, cc.eps0, grid.h(), cfg.T));
            for (int p : {0, 1}) {
                auto part = feasibility_map({run}, cc.taus, deltas, params, p, cfg.omega(), cfg.omega0());
                per_grid[static_cast<std::size_t>(k)].insert(per_grid[static_cast<std::size_t>(k)].end(), part.begin(), part.end());
            }
        });
        for (std::size_t k = 0; k < per_grid.size(); ++k) {
            int feasible = 0;
            bool finite = true;
            for (const auto& row : per_grid[k]) {
                if (row.admissible && row.ratio) {
                    ++feasible;
                    finite = finite && std::isfinite(*row.ratio);
                }
            }
            const std::string tag = "_N" + std::to_string(cc.map_grids[k] - 1);
            res.check_ge("admissible_cells" + tag, feasible, 1);
            res.check("admissible_ratios_finite" + tag, finite ? 1.0 : 0.0, 1.0, finite);
            rows.insert(rows.end(), per_grid[k].begin(), per_grid[k].end());
        }
        std::ostringstream fcsv;
        write_feasibility_csv(fcsv, rows);
        res.tables.push_back({"feasibility.csv", fcsv.str()});
    }
    return res;
}

namespace {

WeightParams coupled_params(const ExperimentConfig& cfg, const GridSpec& grid) {
    WeightParams p = cfg.weight_params();
    p.tau = cfg.stability.tau1;
    p.delta = coupled_delta(cfg.stability.tau1, cfg.stability.eps0, grid.h(), cfg.T);
    return p;
}

struct QuotientRun {
    StabilityRow row;
    double log_error_factor = 0.0;
};

QuotientRun quotient_run(const ExperimentConfig& cfg, const GridSpec& grid, const TimeGrid& time, std::size_t r,
                         bool time_dependent, bool reduced) {
    const std::uint64_t seed = run_seed(cfg.seed, r);
    ProblemOptions opts = cfg.problem;
    opts.time_dependent = time_dependent;
    const RandomProblem prob = random_problem(seed, cfg.dim, opts);
    const AdmissibleSource src = generate_admissible(seed, grid, time, SourceMode::Separable);
    const MeshFunction zero(grid, MeshId::primal(grid.dim()));
    const Trajectory y = solve_forward(zero, src.g, prob.coeffs, time, cfg.scheme);
    const ZSolution z = solve_z_system(y, prob.coeffs, src.g, src.dg_dt);
    const WeightParams params = coupled_params(cfg, grid);
    const CarlemanWeight w = make_weight(cfg, grid, params);
    const Observation obs = observe(y, z.z, w, cfg.omega(), cfg.omega0());
    const StabilityQuotient q = stability_quotient(obs, y, prob.coeffs, src.g, w, reduced);
    QuotientRun out;
    out.row = {static_cast<int>(r), grid.h(), grid.n(), grid.dim(), params.tau, params.delta, params.lambda,
               q.lhs, q.rhs_observed, q.rhs_error_term, q.quotient, seed};
    out.log_error_factor = q.log_error_factor;
    return out;
}

void quotient_corpus(const ExperimentConfig& cfg, SuiteResult& res, bool time_dependent, bool reduced,
                     const std::string& name) {
    const auto& sc = cfg.stability;
    const TimeGrid time{cfg.T, cfg.M};
    const auto runs = static_cast<std::size_t>(sc.runs);
    std::vector<StabilityRow> rows(runs * sc.grids.size());
    parallel_for(static_cast<int>(rows.size()), cfg.workers, [&](int idx) {
        const auto u = static_cast<std::size_t>(idx);
        const GridSpec grid = grid_from_inverse_h(cfg.dim, sc.grids[u / runs]);
        rows[u] = quotient_run(cfg, grid, time, u % runs, time_dependent, reduced).row;
    });
    std::vector<double> maxima;
    for (std::size_t gi = 0; gi < sc.grids.size(); ++gi) {
        std::vector<double> q;
        for (std::size_t r = 0; r < runs; ++r) q.push_back(rows[gi * runs + r].quotient);
        const double mq = max_or(q, kInf);
        maxima.push_back(mq);
        res.check(name + "_max_quotient_N" + std::to_string(sc.grids[gi] - 1), mq, kInf, std::isfinite(mq));
    }
    const double hi = *std::max_element(maxima.begin(), maxima.end());
    const double lo = *std::min_element(maxima.begin(), maxima.end());
    res.check_le(name + "_max_quotient_spread", hi / lo, sc.max_spread);
    std::ostringstream csv;
    write_stability_csv(csv, rows);
    res.tables.push_back({name + ".csv", csv.str()});
}

}  // namespace

SuiteResult run_stability_corpus(const ExperimentConfig& cfg) {
    SuiteResult res;
    res.suite = "stability";
    quotient_corpus(cfg, res, cfg.problem.time_dependent, false, "stability");
    quotient_corpus(cfg, res, false, true, "stability_reduced");

    // y(0) = d_t y(0) = 0: the source vanishes at t = 0, so the error term does too.
    const TimeGrid time{cfg.T, cfg.M};
    double worst = 0.0;
    for (int inv_h : cfg.stability.grids) {
        const GridSpec grid = grid_from_inverse_h(cfg.dim, inv_h);
        const RandomProblem prob = random_problem(run_seed(cfg.seed, 0), cfg.dim, cfg.problem);
        const AdmissibleSource base = generate_admissible(run_seed(cfg.seed, 0), grid, time, SourceMode::SeparableConstant);
        const double T = cfg.T;
        const SpaceFn f = base.f_fn;
        const SpaceTimeFn g = [f, T](double t, std::span<const double> x) {
            const double s = std::sin(kPi * t / T);
            return f(x) * s * s;
        };
        const SpaceTimeFn dg = [f, T](double t, std::span<const double> x) {
            return f(x) * (kPi / T) * std::sin(2 * kPi * t / T);
        };
        const AdmissibleSource src = certify_source(g, dg, grid, time);
        const MeshFunction zero(grid, MeshId::primal(grid.dim()));
        const Trajectory y = solve_forward(zero, src.g, prob.coeffs, time, cfg.scheme);
        const ZSolution z = solve_z_system(y, prob.coeffs, src.g, src.dg_dt);
        const CarlemanWeight w = make_weight(cfg, grid, coupled_params(cfg, grid));
        const Observation obs = observe(y, z.z, w, cfg.omega(), cfg.omega0());
        const StabilityQuotient q = stability_quotient(obs, y, prob.coeffs, src.g, w, false);
        worst = std::max(worst, q.rhs_error_term);
    }
    res.check_le("vanishing_start_error_term", worst, 0.0);
    return res;
}

SuiteResult run_decay(const ExperimentConfig& cfg) {
    const auto& sc = cfg.stability;
    SuiteResult res;
    res.suite = "stability";
    const TimeGrid time{cfg.T, cfg.M};
    ProblemOptions opts = cfg.problem;
    opts.zero_initial = false;
    const RandomProblem prob = random_problem(run_seed(cfg.seed, 0), cfg.dim, opts);

    struct Row {
        int N = 0;
        double h = 0, delta = 0, log_endpoint0 = 0, log_endpoint1 = 0, log_error = 0, log_factor = 0, c2 = 0, error = 0;
    };
    std::vector<Row> rows(sc.decay_grids.size());
    parallel_for(static_cast<int>(rows.size()), cfg.workers, [&](int k) {
        const GridSpec grid = grid_from_inverse_h(cfg.dim, sc.decay_grids[static_cast<std::size_t>(k)]);
        const Trajectory y = solve_problem(prob, grid, time, cfg.scheme);
        const ZSolution z = solve_z_system(y, prob.coeffs, prob.g, prob.dg_dt);
        const WeightParams params = coupled_params(cfg, grid);
        const CarlemanWeight w = make_weight(cfg, grid, params);
        const FrameSource g = sampled_source(grid, time, prob.g);
        Row row;
        row.N = grid.n();
        row.h = grid.h();
        row.delta = params.delta;
        row.log_endpoint0 = compute_rhs(y, g, w, 0, cfg.omega()).time_endpoints.log_value;
        row.log_endpoint1 = compute_rhs(y, g, w, 1, cfg.omega()).time_endpoints.log_value;
        const Observation obs = observe(y, z.z, w, cfg.omega(), cfg.omega0());
        const StabilityQuotient q = stability_quotient(obs, y, prob.coeffs, prob.g, w, false);
        const MeshFunction dy0 = apply_Ah(prob.coeffs, y.frame(0), 0.0) + sample_at(grid, MeshId::primal(grid.dim()), prob.g, 0.0);
        row.log_factor = q.log_error_factor;
        row.c2 = q.c_double_prime;
        row.log_error = q.log_error_factor + std::log(l2_norm(y.frame(0)) + l2_norm(dy0));
        row.error = q.rhs_error_term;
        rows[static_cast<std::size_t>(k)] = row;
    });

    std::ostringstream csv;
    csv << "N,h,inv_h,delta,log_endpoint_p0,log_endpoint_p1,log_error_factor,c_double_prime,rhs_error_term,log_rhs_error_term\n";
    std::vector<double> inv_h;
    std::vector<std::vector<double>> series(3);
    for (const Row& r : rows) {
        inv_h.push_back(1.0 / r.h);
        series[0].push_back(r.log_endpoint0);
        series[1].push_back(r.log_endpoint1);
        series[2].push_back(r.log_error);
        csv << r.N << ',' << fmt(r.h) << ',' << fmt(1.0 / r.h) << ',' << fmt(r.delta) << ',' << fmt(r.log_endpoint0) << ','
            << fmt(r.log_endpoint1) << ',' << fmt(r.log_factor) << ',' << fmt(r.c2) << ',' << fmt(r.error) << ','
            << fmt(r.log_error) << '\n';
    }
    res.tables.push_back({"decay.csv", csv.str()});

    if (rows.size() < 2) {
        res.check_ge("decay_grids", static_cast<double>(rows.size()), 2.0);
        return res;
    }
    const std::vector<std::string> names{"endpoint_p0", "endpoint_p1", "error_term"};
    std::ostringstream slopes;
    slopes << "term,segment,slope\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
        int increases = 0;
        for (std::size_t j = 1; j < series[k].size(); ++j)
            if (!(series[k][j] < series[k][j - 1])) ++increases;
        res.check_le(names[k] + "_non_decreasing_steps", increases, 0);
        const Slopes s = log_slopes(inv_h, series[k]);
        res.check_le(names[k] + "_fitted_log_slope", s.fitted, 0.0);
        double spread = 0.0;
        for (double seg : s.segment) spread = std::max(spread, std::abs(seg / s.fitted - 1.0));
        if (s.segment.size() > 1) res.check_le(names[k] + "_slope_variation", spread, sc.slope_tolerance);
        for (std::size_t j = 0; j < s.segment.size(); ++j) slopes << names[k] << ',' << j << ',' << fmt(s.segment[j]) << '\n';
        slopes << names[k] << ",fit," << fmt(s.fitted) << '\n';
    }
    res.tables.push_back({"decay_slopes.csv", slopes.str()});
    return res;
}

SuiteResult run_stability(const ExperimentConfig& cfg) {
    SuiteResult res = run_stability_corpus(cfg);
    SuiteResult decay = run_decay(cfg);
    res.assertions.insert(res.assertions.end(), decay.assertions.begin(), decay.assertions.end());
    res.tables.insert(res.tables.end(), decay.tables.begin(), decay.tables.end());
    return res;
}

SuiteResult run_reconstruct(const ExperimentConfig& cfg) {
    const auto& rc = cfg.reconstruct;
    SuiteResult res;
    res.suite = "reconstruct";

    // Source twin.
    {
        const GridSpec grid = grid_from_inverse_h(cfg.dim, rc.grid);
        const TimeGrid time{cfg.T, rc.M};
        const std::uint64_t seed = run_seed(cfg.seed, 0);
        const RandomProblem prob = random_problem(seed, cfg.dim, cfg.problem);
        const AdmissibleSource src = generate_admissible(seed, grid, time, SourceMode::Separable);
        const MeshFunction zero(grid, MeshId::primal(grid.dim()));
        const Trajectory y = solve_forward(zero, src.frames(time), prob.coeffs, time, cfg.scheme);
        const ZSolution z = solve_z_system(y, prob.coeffs, src.g, src.dg_dt);
        WeightParams params = cfg.weight_params();
        params.delta = coupled_delta(cfg.stability.tau1, cfg.stability.eps0, grid.h(), cfg.T);
        const CarlemanWeight w = make_weight(cfg, grid, params);
        const Observation obs = observe(y, z.z, w, cfg.omega(), cfg.omega0());

        ReconstructionOptions opts;
        opts.beta = rc.beta;
        const ReconstructionResult rec = reconstruct_source(obs, src.R, prob.coeffs, opts, nullptr, &src.f);
        res.check_le("source_relative_error", rec.relative_error.value_or(kInf), rc.tolerance);

        // Zero truth: the data vanish and so must the estimate.
        const Trajectory y0 = solve_forward(zero, [&](int) { return Vector(Vector::Zero(static_cast<Eigen::Index>(zero.size()))); },
                                            prob.coeffs, time, cfg.scheme);
        const Observation obs0 = observe(y0, y0, w, cfg.omega(), cfg.omega0());
        const ReconstructionResult rec0 = reconstruct_source(obs0, src.R, prob.coeffs, opts);
        res.check_le("zero_source_estimate_norm", l2_norm(rec0.f), 1e-12);

        std::ostringstream csv;
        csv << "noise,beta,relative_error,data_misfit,iterations,status\n";
        csv << "0," << fmt(rc.beta) << ',' << fmt(rec.relative_error.value_or(kInf)) << ',' << fmt(rec.data_misfit) << ','
            << rec.iterations << ",ok\n";
        for (double beta : rc.betas) {
            Observation noisy = obs;
            add_multiplicative_noise(noisy, rc.noise, run_seed(cfg.seed, 1));
            opts.beta = beta;
            try {
                const ReconstructionResult r = reconstruct_source(noisy, src.R, prob.coeffs, opts, nullptr, &src.f);
                csv << fmt(rc.noise) << ',' << fmt(beta) << ',' << fmt(r.relative_error.value_or(kInf)) << ','
                    << fmt(r.data_misfit) << ',' << r.iterations << ",ok\n";
            } catch (const Error&) {
                csv << fmt(rc.noise) << ',' << fmt(beta) << ",,,,stagnated\n";
            }
        }
        res.tables.push_back({"reconstruct_source.csv", csv.str()});
    }

    // Coefficient twin: d_t y - A_h y = p y with p = 1 + x_1.
    {
        const GridSpec grid = grid_from_inverse_h(cfg.dim, rc.coefficient_grid);
        const TimeGrid time{cfg.T, rc.coefficient_M};
        ProblemOptions opts = cfg.problem;
        opts.time_dependent = false;
        const RandomProblem prob = random_problem(run_seed(cfg.seed, 2), cfg.dim, opts);
        const SpaceFn p_fn = [](std::span<const double> x) { return 1.0 + x[0]; };
        CoefficientFields full = prob.coeffs;
        const SpaceTimeFn c = prob.coeffs.c;
        full.c = [c, p_fn](double t, std::span<const double> x) { return c(t, x) - p_fn(x); };
        const int d = cfg.dim;
        const MeshFunction y_ini = MeshFunction::sample(grid, MeshId::primal(d), [d](std::span<const double> x) {
            double v = 1.0;
            for (int j = 0; j < d; ++j) v *= std::sin(kPi * x[static_cast<std::size_t>(j)]);
            return v;
        });
        const Trajectory y = solve_forward(y_ini, constant_fn(0.0), full, time, cfg.scheme);
        const double vartheta = 0.5 * cfg.T;
        const double alpha = 0.1 * linf_norm(y.at_time(vartheta));
        const MeshFunction truth = MeshFunction::sample(grid, MeshId::primal(d), p_fn);
        const CoefficientEstimate est = recover_coefficient(y, prob.coeffs, vartheta, alpha, &truth);
        res.check_le("coefficient_relative_error", est.relative_error.value_or(kInf), rc.coefficient_tolerance);
        res.check_ge("coefficient_mask_points", static_cast<double>(est.mask_count), 1.0);
        std::ostringstream csv;
        csv << "N,M,alpha,mask_count,relative_error\n"
            << grid.n() << ',' << time.M << ',' << fmt(alpha) << ',' << est.mask_count << ','
            << fmt(est.relative_error.value_or(kInf)) << '\n';
        res.tables.push_back({"reconstruct_coefficient.csv", csv.str()});
    }
    return res;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"verify-ops", "converge", "energy",     "weights",
                                                "carleman",   "stability", "reconstruct"};
    return names;
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "verify-ops") return run_verify_ops(cfg);
    if (name == "converge") return run_converge(cfg);
    if (name == "energy") return run_energy(cfg);
    if (name == "weights") return run_weights(cfg);
    if (name == "carleman") return run_carleman(cfg);
    if (name == "stability") return run_stability(cfg);
    if (name == "reconstruct") return run_reconstruct(cfg);
    throw Error("unknown suite '" + name + "'");
}

}  // namespace sdc
