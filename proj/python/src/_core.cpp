// Python bindings: closed forms, the main pipelines and the CLI runner.

#include "ebs/cli.hpp"
#include "ebs/kdv.hpp"
#include "ebs/wvn_oracle.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ebs;

namespace {

py::array_t<double> arr(const RealVec& v) { return py::array_t<double>(py::ssize_t(v.size()), v.data()); }

py::array_t<double> real_of(const WaveField& f) {
    RealVec v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.u[i].real();
    return arr(v);
}

std::vector<EmbeddedStateSpec> states_of(const PotentialSpec& spec, const std::vector<std::pair<double, double>>& st) {
    std::vector<EmbeddedStateSpec> out;
    for (auto [omega, alpha] : st) out.push_back({omega, alpha, reflection_limit(spec, omega)});
    return out;
}

py::dict transform_dict(const TransformResult& r) {
    const Grid& g = r.grid;
    RealVec x(g.n);
    for (std::size_t i = 0; i < g.n; ++i) x[i] = g.x(i);
    py::list ys, norms;
    for (std::size_t n = 0; n < r.y.size(); ++n) {
        ys.append(real_of(r.requested(r.y[n])));
        norms.append(std::sqrt(eigenfunction_norm_sq(r, n)));
    }
    py::dict d;
    d["x"] = arr(x);
    d["q_seed"] = arr(r.requested(r.q_seed));
    d["q_new"] = arr(r.requested(r.q_new));
    d["log_det"] = arr(r.requested(r.log_det));
    d["y"] = ys;
    d["y_norms"] = norms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Embedded eigenvalues by binary Darboux transformation";

    static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InputError& e) {
            input_error(e.what());
        } catch (const NumericalError& e) {
            numerical_error(e.what());
        }
    });

    // closed forms at coupling rho
    m.def("q_seed", [](double rho, double x) { return wvn::q_seed({rho, 1}, x); }, py::arg("rho"), py::arg("x"));
    m.def("q_plus1", [](double rho, double alpha, double x) { return wvn::q_plus1({rho, alpha}, x); },
          py::arg("rho"), py::arg("alpha"), py::arg("x"));
    m.def("q_sym", [](double rho, double x) { return wvn::q_sym({rho, std::sqrt(rho / 2)}, x); },
          py::arg("rho"), py::arg("x"));
    m.def("reflection_closed", [](double rho, cplx k) { return wvn::scattering_closed({rho, 1}, k).R; },
          py::arg("rho"), py::arg("k"));
    m.def("transmission_closed", [](double rho, cplx k) { return wvn::scattering_closed({rho, 1}, k).T; },
          py::arg("rho"), py::arg("k"));
    m.def("bound_state", [](double rho) {
        const auto b = wvn::bound_state({rho, 1});
        return py::make_tuple(b.kappa, b.c2);
    }, py::arg("rho"), "(kappa, c^2) of the seed's bound state");
    m.def("soliton", &wvn::soliton_closed, py::arg("x"), py::arg("t"));
    m.def("positon", [](double x, double t) { return wvn::positon_closed(x, t).value; }, py::arg("x"), py::arg("t"));

    m.def("scatter", [](double rho, const RealVec& k) {
        const ScatteringData d = compute_scattering(PotentialSpec::wvn_example(rho), k);
        py::dict out;
        out["k"] = arr(d.k);
        out["R"] = d.R;
        out["T"] = *d.T;
        return out;
    }, py::arg("rho"), py::arg("k"), "numerical R(k), T(k) for the example seed");

    m.def("insert", [](double rho, const std::vector<std::pair<double, double>>& states, double x_min,
                       double x_max, std::size_t n) {
        const auto spec = PotentialSpec::wvn_example(rho);
        const TransformResult r = insert_embedded(spec, states_of(spec, states), Grid(x_min, x_max, n));
        return transform_dict(r);
    }, py::arg("rho"), py::arg("states"), py::arg("x_min") = -20.0, py::arg("x_max") = 20.0,
          py::arg("n") = 4001, "states: list of (omega, alpha)");

    m.def("round_trip", [](double rho, const std::vector<std::pair<double, double>>& states, double x_min,
                           double x_max, std::size_t n) {
        const auto spec = PotentialSpec::wvn_example(rho);
        const TransformResult r = insert_embedded(spec, states_of(spec, states), Grid(x_min, x_max, n));
        return arr(r.requested(remove_embedded(r).q_new));
    }, py::arg("rho"), py::arg("states"), py::arg("x_min") = -20.0, py::arg("x_max") = 20.0,
          py::arg("n") = 4001, "insert then remove; returns the recovered potential");

    m.def("dyson_q", [](double rho, double t, const RealVec& xs) {
        return arr(kdv::dyson_q(kdv::make_state({rho, 1}, t), xs));
    }, py::arg("rho"), py::arg("t"), py::arg("x"));

    m.def("q_plus_evolved", [](double rho, double alpha, double t, const RealVec& xs) {
        const auto s = kdv::make_state({rho, alpha}, t);
        RealVec q;
        for (const auto& v : kdv::q_plus_evolved(s, {1.0, alpha, {-1, 0}}, xs)) q.push_back(v.q_plus);
        return arr(q);
    }, py::arg("rho"), py::arg("alpha"), py::arg("t"), py::arg("x"));

    m.def("verify_example", [](double rho, double alpha) {
        py::list rows;
        for (const auto& r : cli::verify_example(rho, alpha))
            rows.append(py::make_tuple(r.label, r.value, r.tolerance, r.passed));
        return rows;
    }, py::arg("rho") = 2.0, py::arg("alpha") = 1.0, "(label, value, tolerance, passed) rows");

    m.def("run", [](const std::string& config_json) {
        const cli::RunConfig c = cli::config_from_json(io::json::parse(config_json));
        std::ostringstream out, err;
        const int code = cli::run(c, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("config_json"), "run a CLI configuration; returns (exit_code, stdout, stderr)");

    m.attr("__version__") = "0.1.0";
}
