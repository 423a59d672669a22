#include "sdc/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdc {

namespace {

double linf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SpaceTimeFn constant_fn(double value) {
    return [value](double, std::span<const double>) { return value; };
}

bool CoefficientFields::has_time_derivatives() const {
    if (time_independent) return true;
    if (static_cast<int>(dgamma_dt.size()) != dim() || static_cast<int>(db_dt.size()) != dim() || !dc_dt) return false;
    for (const auto& f : dgamma_dt)
        if (!f) return false;
    for (const auto& f : db_dt)
        if (!f) return false;
    return true;
}

void CoefficientFields::validate(int d) const {
    if (dim() != d) throw Error("CoefficientFields: expected " + std::to_string(d) + " diffusion samplers");
    if (static_cast<int>(b.size()) != d) throw Error("CoefficientFields: expected " + std::to_string(d) + " drift samplers");
    if (!c) throw Error("CoefficientFields: missing zero-order coefficient");
    for (const auto& f : gamma)
        if (!f) throw Error("CoefficientFields: empty diffusion sampler");
    for (const auto& f : b)
        if (!f) throw Error("CoefficientFields: empty drift sampler");
}

CoefficientFields CoefficientFields::constant(int dim, double gamma, double b, double c) {
    std::vector<SpaceTimeFn> g(static_cast<std::size_t>(dim), constant_fn(gamma));
    std::vector<SpaceTimeFn> bb(static_cast<std::size_t>(dim), constant_fn(b));
    return stationary(std::move(g), std::move(bb), constant_fn(c));
}

CoefficientFields CoefficientFields::stationary(std::vector<SpaceTimeFn> gamma, std::vector<SpaceTimeFn> b,
                                                SpaceTimeFn c) {
    CoefficientFields f;
    const std::size_t d = gamma.size();
    f.gamma = std::move(gamma);
    f.b = std::move(b);
    f.c = std::move(c);
    f.dgamma_dt.assign(d, constant_fn(0.0));
    f.db_dt.assign(d, constant_fn(0.0));
    f.dc_dt = constant_fn(0.0);
    f.time_independent = true;
    return f;
}

MeshFunction sample_at(const GridSpec& grid, const MeshId& mesh, const SpaceTimeFn& f, double t) {
    return MeshFunction::sample(grid, mesh, [&](std::span<const double> x) { return f(t, x); });
}

CoefficientBounds compute_bounds(const CoefficientFields& coeffs, const GridSpec& grid, std::span<const double> times) {
    const int d = grid.dim();
    coeffs.validate(d);
    CoefficientBounds out;
    out.gamma_min = std::numeric_limits<double>::infinity();
    const double h = grid.h();
    const MeshId primal = MeshId::primal(d);
    const auto points = enumerate_mesh(grid, primal);
    for (const double t : times) {
        for (int i = 0; i < d; ++i) {
            const auto& g = coeffs.gamma[static_cast<std::size_t>(i)];
            for (const MeshPoint& p : points) {
                auto x = physical(grid, p);
                const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
                const double gv = g(t, xs);
                if (!(gv > 0.0)) throw Error("compute_bounds: non-positive diffusion coefficient");
                double grad2 = 0.0;
                for (int j = 0; j < d; ++j) {
                    auto xp = x, xm = x;
                    xp[static_cast<std::size_t>(j)] += 0.5 * h;
                    xm[static_cast<std::size_t>(j)] -= 0.5 * h;
                    const double gj = (g(t, std::span<const double>(xp.data(), xs.size())) -
                                       g(t, std::span<const double>(xm.data(), xs.size()))) / h;
                    grad2 += gj * gj;
                }
                double dt = 0.0;
                if (!coeffs.time_independent) {
                    if (static_cast<int>(coeffs.dgamma_dt.size()) == d && coeffs.dgamma_dt[static_cast<std::size_t>(i)]) {
                        dt = std::abs(coeffs.dgamma_dt[static_cast<std::size_t>(i)](t, xs));
                    } else {
                        constexpr double eps = 1e-6;
                        dt = std::abs(g(t + eps, xs) - g(t - eps, xs)) / (2.0 * eps);
                    }
                }
                out.reg_gamma = std::max(out.reg_gamma, gv + 1.0 / gv + std::sqrt(grad2) + dt);
                out.gamma_min = std::min(out.gamma_min, gv);
                out.gamma_max = std::max(out.gamma_max, gv);
            }
            const MeshFunction gd = sample_at(grid, MeshId::dual_star(d, i), g, t);
            for (double v : gd.values()) {
                if (!(v > 0.0)) throw Error("compute_bounds: non-positive diffusion coefficient");
                out.reg_gamma = std::max(out.reg_gamma, v + 1.0 / v);
                out.gamma_min = std::min(out.gamma_min, v);
                out.gamma_max = std::max(out.gamma_max, v);
            }
            const MeshFunction bi = sample_at(grid, primal, coeffs.b[static_cast<std::size_t>(i)], t);
            out.b_sup = std::max(out.b_sup, linf(bi.values()));
        }
        const MeshFunction cv = sample_at(grid, primal, coeffs.c, t);
        out.c_sup = std::max(out.c_sup, linf(cv.values()));
    }
    return out;
}

}  // namespace sdc
