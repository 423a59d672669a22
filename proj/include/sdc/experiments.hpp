#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdc/coefficients.hpp"
#include "sdc/forward_solver.hpp"
#include "sdc/weights.hpp"

namespace sdc {

/// Knobs of the randomized problem generator.
struct ProblemOptions {
    bool time_dependent = true;
    bool zero_initial = false;
    double b_max = 1.0;
    double c_max = 1.0;
};

/// A problem drawn from smooth random fields. Everything is a function of
/// (t, x), so the same seed gives the same continuous data on every grid.
struct RandomProblem {
    std::uint64_t seed = 0;
    int dim = 1;
    CoefficientFields coeffs;
    SpaceFn y_ini;
    SpaceTimeFn g;
    SpaceTimeFn dg_dt;
};

/// gamma_i in [0.53, 1.97], |b_i| <= b_max, |c| <= c_max; y_ini is a sum of
/// sine modes vanishing on the boundary, g a smooth space-time field.
RandomProblem random_problem(std::uint64_t seed, int dim, const ProblemOptions& opts);

/// Solves the problem on a grid.
Trajectory solve_problem(const RandomProblem& prob, const GridSpec& grid, const TimeGrid& time, Scheme scheme);

struct ExperimentConfig {
    std::uint64_t seed = 20251016;
    int workers = 1;

    int dim = 1;
    double T = 1.0;
    int M = 256;
    Scheme scheme = Scheme::Trapezoidal;
    WeightParams weight;
    double omega_lo = 0.3, omega_hi = 0.7;
    double omega0_lo = 0.4, omega0_hi = 0.6;
    ProblemOptions problem;

    // Grids are written as 1/h = N + 1.
    struct VerifyOps {
        int fields = 200;
        std::vector<int> dims{1, 2, 3};
        int n_min = 3;
        int n_max = 20;
        double tolerance = 1e-12;
    } verify_ops;

    struct Converge {
        std::vector<int> grids{8, 16, 32};
        int space_M = 1024;
        int time_grid = 16;
        std::vector<int> time_steps{16, 32, 64};
        int discrete_M = 256;
        double discrete_tolerance = 1e-9;
        double min_order = 1.9;
    } converge;

    struct Energy {
        int runs = 100;
        std::vector<int> grids{8, 16};
        std::vector<int> dims{1, 2};
        int M = 200;
    } energy;

    struct Weights {
        std::vector<double> deltas{0.1, 0.25, 0.5};
        std::vector<double> taus{50, 100, 200, 400, 800};
        int time_samples = 4000;
        double slope_tolerance = 0.15;
    } weights;

    struct Carleman {
        int runs = 50;
        std::vector<int> grids{16, 32};
        double max_spread = 2.0;
        std::vector<int> map_grids{16, 32, 64};
        std::vector<double> taus{1, 2, 4, 8};
        std::vector<double> deltas{0.125, 0.25, 0.5};
        double tau1 = 2.0;
        double eps0 = 0.4;
    } carleman;

    struct Stability {
        int runs = 50;
        std::vector<int> grids{16, 32};
        std::vector<int> decay_grids{16, 32, 64};
        double tau1 = 2.0;
        double eps0 = 0.4;
        double max_spread = 2.0;
        double slope_tolerance = 0.2;
    } stability;

    struct Reconstruct {
        int grid = 16;
        int M = 64;
        double beta = 1e-12;
        double tolerance = 5e-3;
        double noise = 0.01;
        std::vector<double> betas{1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
        int coefficient_grid = 32;
        int coefficient_M = 400;
        double coefficient_tolerance = 1e-2;
    } reconstruct;

    Box omega() const { return Box::cube(dim, omega_lo, omega_hi); }
    Box omega0() const { return Box::cube(dim, omega0_lo, omega0_hi); }
    WeightParams weight_params() const;
};

struct Assertion {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct CsvTable {
    std::string file;
    std::string content;
};

struct SuiteResult {
    std::string suite;
    std::vector<Assertion> assertions;
    std::vector<CsvTable> tables;

    bool passed() const;
    void check(std::string name, double value, double bound, bool pass);
    /// value <= bound
    void check_le(std::string name, double value, double bound) { check(std::move(name), value, bound, value <= bound); }
    /// value >= bound
    void check_ge(std::string name, double value, double bound) { check(std::move(name), value, bound, value >= bound); }
};

/// Runs f(0..count-1) on up to `workers` threads. Results land in slot order.
void parallel_for(int count, int workers, const std::function<void(int)>& f);

SuiteResult run_verify_ops(const ExperimentConfig& cfg);
SuiteResult run_converge(const ExperimentConfig& cfg);
SuiteResult run_energy(const ExperimentConfig& cfg);
SuiteResult run_weights(const ExperimentConfig& cfg);
SuiteResult run_carleman(const ExperimentConfig& cfg);
SuiteResult run_stability_corpus(const ExperimentConfig& cfg);
SuiteResult run_decay(const ExperimentConfig& cfg);
/// Corpus and decay study together.
SuiteResult run_stability(const ExperimentConfig& cfg);
SuiteResult run_reconstruct(const ExperimentConfig& cfg);

/// Dispatch by CLI subcommand name.
SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg);
const std::vector<std::string>& suite_names();

/// Least-squares slope of ys against xs.
double fitted_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace sdc
