#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sysrisk/app.hpp"

namespace py = pybind11;
using namespace sysrisk;

namespace {

// reports travel as JSON text; the package turns them into dicts
std::string dump(const app::json& j) { return j.dump(); }

py::dict result_dict(const EquilibriumResult& r) {
    py::dict d;
    d["converged"] = r.converged;
    d["iterations"] = r.iterations;
    d["seed"] = r.seed;
    if (r.overlap)
        d["weights"] = r.weights.w();
    else
        d["partition"] = r.partition.str();
    d["moves"] = static_cast<int>(r.trajectory.size());
    return d;
}

WeightMatrix weights(const Mat& w) { return WeightMatrix(w); }

} // namespace

PYBIND11_MODULE(_core, mod) {
    static py::exception<Error> exc(mod, "SysriskError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(exc.ptr())(e.what());
            err.attr("code") = errc_name(e.code());
            PyErr_SetObject(exc.ptr(), err.ptr());
        }
    });

    py::class_<Market>(mod, "Market")
        .def(py::init([](Vec mu, Mat sigma, Vec alpha, double budget, bool allow_indefinite) {
                 return validate_market(std::move(mu), std::move(sigma), std::move(alpha), budget, {allow_indefinite});
             }),
             py::arg("mu"), py::arg("sigma"), py::arg("alpha"), py::arg("B"), py::arg("allow_indefinite") = false)
        .def_readonly("mu", &Market::mu)
        .def_readonly("sigma", &Market::sigma)
        .def_readonly("alpha", &Market::alpha)
        .def_readonly("B", &Market::budget)
        .def_property_readonly("n", &Market::n);

    mod.def("market_from_config", [](const std::string& text) {
        return app::build_market(app::parse_config(app::json::parse(text)));
    });
    mod.def("example_market", [](const std::string& id) { return app::build_market(app::example_config(id)); });
    mod.def("cov_from_sd_corr", &cov_from_sd_corr);

    mod.def("tilted_moments", [](const Market& m, const Vec& a, double beta) {
        const auto t = tilted_moments(m, a, beta);
        py::dict d;
        d["z0"] = t.z0;
        d["xi"] = t.xi;
        d["s1"] = t.s1;
        return d;
    });

    mod.def("allocate_disjoint", [](const Market& m, const std::string& p) {
        const auto r = allocation_disjoint(m, parse_partition(p, m.n()));
        py::dict d;
        d["rho"] = r.rho;
        d["d"] = r.d;
        d["total"] = r.total;
        d["beta_m"] = r.beta_m;
        d["beta"] = r.beta;
        return d;
    });
    mod.def("allocate_overlap", [](const Market& m, const Mat& w) {
        const auto r = allocation_overlap(m, weights(w));
        py::dict d;
        d["rho_ij"] = r.rho_ij;
        d["rho"] = r.rho;
        d["d"] = r.d;
        d["total"] = r.total;
        d["beta_j"] = r.beta_j;
        d["beta"] = r.beta;
        return d;
    });

    mod.def("is_nash_disjoint", [](const Market& m, const std::string& p) {
        return is_nash_disjoint(m, parse_partition(p, m.n()));
    });
    mod.def("brute_force_nash", [](const Market& m) {
        std::vector<std::string> out;
        for (const auto& p : brute_force_nash_disjoint(m)) out.push_back(p.str());
        return out;
    });
    mod.def("is_nash_overlap", [](const Market& m, const Mat& w, int grid) {
        return is_nash_overlap(m, weights(w), NashScan{grid});
    }, py::arg("market"), py::arg("weights"), py::arg("grid") = 200);

    mod.def("best_response", [](const Market& m, const Mat& w, int i) {
        const auto br = best_response_two_groups(m, w, i);
        py::dict d;
        d["row"] = br.row;
        d["risk"] = br.risk;
        d["interior"] = br.interior;
        return d;
    });
    mod.def("w_star", [](const Market& m, const Mat& w, int i) { return interior_w_star(coefficients(m, w, i)); });

    mod.def("play_disjoint", [](const Market& m, std::uint64_t seed, int max_iter) {
        return result_dict(fictitious_play_disjoint(m, seed, PlayOptions{max_iter, 200}));
    }, py::arg("market"), py::arg("seed") = 0, py::arg("max_iter") = 10000);
    mod.def("play_overlap", [](const Market& m, const Mat& w0, std::uint64_t seed, int max_iter, int grid) {
        return result_dict(fictitious_play_overlap(m, weights(w0), seed, PlayOptions{max_iter, grid}));
    }, py::arg("market"), py::arg("w0"), py::arg("seed") = 0, py::arg("max_iter") = 10000, py::arg("grid") = 200);
    mod.def("distance_up_to_permutation", &distance_up_to_permutation);

    mod.def("sample_X", &sample_X, py::arg("market"), py::arg("count"), py::arg("seed") = 0);
    mod.def("budget_check", [](const Market& m, const Mat& w, int samples, std::uint64_t seed, double shift) {
        const auto e = budget_check(m, weights(w), sample_X(m, samples, seed), shift);
        return py::make_tuple(e.value, e.se);
    }, py::arg("market"), py::arg("weights"), py::arg("samples") = 1000000, py::arg("seed") = 0, py::arg("d_shift") = 0.0);

    mod.def("_validate", [](const Market& m, const Mat& w, int samples, std::uint64_t seed, double shift) {
        return dump(app::validate(m, weights(w), samples, seed, shift));
    });
    mod.def("_sensitivity", [](const Market& m, const Mat& w, const std::string& shock, bool fd) {
        return dump(app::sensitivity(m, weights(w), app::parse_shock(shock, m), fd));
    });
    mod.def("_estimate", [](const std::string& csv) {
        std::istringstream in(csv);
        return dump(app::estimate_json(app::estimate_prices(in)));
    });
    mod.def("_reproduce", [](const std::string& id) { return dump(app::reproduce(id)); });
    mod.def("example_ids", &app::example_ids);
    mod.def("printed_matrix", &app::printed_matrix);
}
