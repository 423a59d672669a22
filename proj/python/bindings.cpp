#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdc/carleman_verifier.hpp"
#include "sdc/config.hpp"
#include "sdc/discrete_calculus.hpp"
#include "sdc/experiments.hpp"
#include "sdc/forward_solver.hpp"
#include "sdc/inverse_problem.hpp"
#include "sdc/weights.hpp"

namespace py = pybind11;
using namespace sdc;

namespace {

py::array_t<double> to_numpy(const MeshFunction& u) {
    py::array_t<double> out(static_cast<py::ssize_t>(u.size()));
    std::copy(u.values().begin(), u.values().end(), out.mutable_data());
    return out;
}

MeshFunction from_numpy(const GridSpec& g, const MeshId& mesh, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return MeshFunction(g, mesh, std::vector<double>(a.data(), a.data() + a.size()));
}

MeshId mesh_by_name(int dim, const std::string& name, int i, int j) {
    if (name == "primal") return MeshId::primal(dim);
    if (name == "dual_star") return MeshId::dual_star(dim, i);
    if (name == "dual_prime") return MeshId::dual_prime(dim, i);
    if (name == "double_dual") return MeshId::double_dual(dim, i, j);
    if (name == "closure") return MeshId::closure(dim, i);
    if (name == "boundary_face") return MeshId::boundary_face(dim, i);
    throw Error("unknown mesh '" + name + "'");
}

py::dict suite_to_dict(const SuiteResult& r) {
    py::list assertions;
    for (const auto& a : r.assertions)
        assertions.append(py::dict(py::arg("name") = a.name, py::arg("value") = a.value, py::arg("bound") = a.bound,
                                   py::arg("pass") = a.pass));
    py::dict tables;
    for (const auto& t : r.tables) tables[py::str(t.file)] = t.content;
    return py::dict(py::arg("suite") = r.suite, py::arg("passed") = r.passed(), py::arg("assertions") = assertions,
                    py::arg("tables") = tables);
}

}  // namespace

PYBIND11_MODULE(_sdcarleman, m) {
    m.doc() = "Semi-discrete Carleman estimates: operators, solvers and experiments";
    py::register_exception<Error>(m, "SdcError", PyExc_ValueError);

    py::class_<GridSpec>(m, "Grid")
        .def(py::init<int, int>(), py::arg("dim"), py::arg("n"))
        .def_property_readonly("dim", &GridSpec::dim)
        .def_property_readonly("n", &GridSpec::n)
        .def_property_readonly("h", &GridSpec::h)
        .def("points", [](const GridSpec& g, const std::string& mesh, int i, int j) {
            const auto pts = enumerate_mesh(g, mesh_by_name(g.dim(), mesh, i, j));
            py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(g.dim())});
            auto v = out.mutable_unchecked<2>();
            for (std::size_t k = 0; k < pts.size(); ++k) {
                const auto x = physical(g, pts[k]);
                for (int a = 0; a < g.dim(); ++a) v(static_cast<py::ssize_t>(k), a) = x[static_cast<std::size_t>(a)];
            }
            return out;
        }, py::arg("mesh") = "primal", py::arg("i") = 0, py::arg("j") = 0);

    // Discrete calculus on primal data with Dirichlet closure.
    m.def("diff", [](const GridSpec& g, py::array_t<double> u, int i) {
        return to_numpy(diff(close(from_numpy(g, MeshId::primal(g.dim()), u), i), i));
    }, py::arg("grid"), py::arg("u"), py::arg("axis"), "D_i u on the dual mesh W*_i");
    m.def("avg", [](const GridSpec& g, py::array_t<double> u, int i) {
        return to_numpy(avg(close(from_numpy(g, MeshId::primal(g.dim()), u), i), i));
    }, py::arg("grid"), py::arg("u"), py::arg("axis"));
    m.def("second_diff", [](const GridSpec& g, py::array_t<double> u, int i, int j) {
        return to_numpy(second_diff(from_numpy(g, MeshId::primal(g.dim()), u), i, j));
    }, py::arg("grid"), py::arg("u"), py::arg("i"), py::arg("j"));
    m.def("integral", [](const GridSpec& g, py::array_t<double> u) {
        return integral(from_numpy(g, MeshId::primal(g.dim()), u));
    }, py::arg("grid"), py::arg("u"));
    m.def("l2_norm", [](const GridSpec& g, py::array_t<double> u) {
        return l2_norm(from_numpy(g, MeshId::primal(g.dim()), u));
    }, py::arg("grid"), py::arg("u"));
    m.def("h2_norm", [](const GridSpec& g, py::array_t<double> u) {
        return h2_norm(from_numpy(g, MeshId::primal(g.dim()), u));
    }, py::arg("grid"), py::arg("u"));

    py::class_<WeightParams>(m, "WeightParams")
        .def(py::init<>())
        .def_readwrite("lam", &WeightParams::lambda)
        .def_readwrite("K", &WeightParams::K)
        .def_readwrite("tau", &WeightParams::tau)
        .def_readwrite("delta", &WeightParams::delta)
        .def_readwrite("T", &WeightParams::T)
        .def_readwrite("c0", &WeightParams::c0)
        .def_readwrite("epsilon", &WeightParams::epsilon)
        .def_readwrite("tau0", &WeightParams::tau0)
        .def_readwrite("vartheta", &WeightParams::vartheta);

    py::class_<CarlemanWeight>(m, "CarlemanWeight")
        .def(py::init([](int dim, const WeightParams& p) {
            return CarlemanWeight(Psi(dim, p.x0, p.c0), p);
        }), py::arg("dim"), py::arg("params"))
        .def("theta", &CarlemanWeight::theta)
        .def("dtheta", &CarlemanWeight::dtheta)
        .def("d2theta", &CarlemanWeight::d2theta)
        .def("phi", [](const CarlemanWeight& w, std::vector<double> x) { return w.phi(x); })
        .def_property_readonly("mu0", &CarlemanWeight::mu0)
        .def_property_readonly("mu1", &CarlemanWeight::mu1)
        .def("admissible", [](const CarlemanWeight& w, double h) { return w.admissibility(h).admissible(); });

    m.def("theta_endpoint_closed_form", &theta_endpoint_closed_form, py::arg("T"), py::arg("delta"));
    m.def("theta_midpoint_closed_form", &theta_midpoint_closed_form, py::arg("T"), py::arg("delta"));
    m.def("coupled_delta", &coupled_delta, py::arg("tau1"), py::arg("eps0"), py::arg("h"), py::arg("T"));

    m.def("solve_random", [](std::uint64_t seed, int dim, int n, double T, int M, const std::string& scheme) {
        const RandomProblem prob = random_problem(seed, dim, ProblemOptions{});
        const Trajectory y = solve_problem(prob, GridSpec(dim, n), TimeGrid{T, M}, scheme_from_string(scheme));
        py::array_t<double> out({static_cast<py::ssize_t>(M + 1), static_cast<py::ssize_t>(y.frame(0).size())});
        auto v = out.mutable_unchecked<2>();
        for (int k = 0; k <= M; ++k)
            for (std::size_t j = 0; j < y.frame(k).size(); ++j) v(k, static_cast<py::ssize_t>(j)) = y.frame(k)[j];
        return out;
    }, py::arg("seed"), py::arg("dim"), py::arg("n"), py::arg("T") = 1.0, py::arg("M") = 100,
       py::arg("scheme") = "trapezoidal", "Frames (M+1, N^d) of a random problem solved on the grid");

    m.def("default_config", [] { return config_to_json(ExperimentConfig{}); });
    m.def("run_suite", [](const std::string& name, const std::string& config, const std::vector<std::string>& overrides) {
        const ExperimentConfig cfg = parse_config(config, overrides);
        SuiteResult r;
        {
            py::gil_scoped_release release;
            r = run_suite(name, cfg);
        }
        return suite_to_dict(r);
    }, py::arg("name"), py::arg("config") = "{}", py::arg("overrides") = std::vector<std::string>{});
    m.def("suite_names", &suite_names);
}
