#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srcrb/errors.hpp"
#include "srcrb/minorant.hpp"
#include "srcrb/moments.hpp"
#include "srcrb/specfun.hpp"
#include "srcrb/sweeps.hpp"
#include "srcrb/torus.hpp"

namespace py = pybind11;
using namespace srcrb;

namespace {

py::object to_python(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

nlohmann::json from_python(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

moments::WeightVector weights_or_ones(const std::optional<std::vector<moments::Complex>>& w, std::size_t count) {
  return w ? moments::WeightVector(*w) : moments::WeightVector::ones(count);
}

Eigen::MatrixXi index_matrix(const moments::FrequencyIndexSet& set) {
  Eigen::MatrixXi out(static_cast<Eigen::Index>(set.size()), set.dim());
  for (std::size_t r = 0; r < set.size(); ++r)
    for (int s = 0; s < set.dim(); ++s) out(static_cast<Eigen::Index>(r), s) = set[r][s];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conditioning of multivariate super-resolution: core routines";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // special functions
  m.def("bessel_j", [](double nu, double x) { return specfun::bessel_j(specfun::BesselOrder::from_double(nu), x); },
        py::arg("nu"), py::arg("x"));
  m.def("first_bessel_zero", [](double nu) { return specfun::first_bessel_zero(specfun::BesselOrder::from_double(nu)); },
        py::arg("nu"));
  m.def("gauss_legendre", [](int order) {
    const auto rule = specfun::gauss_legendre(order);
    return py::make_tuple(rule.nodes, rule.weights);
  }, py::arg("m"));

  // torus
  py::class_<torus::NodeSet>(m, "NodeSet")
      .def(py::init<int, std::vector<torus::Point>>(), py::arg("dim"), py::arg("points"))
      .def_static("allow_duplicates", &torus::NodeSet::allow_duplicates, py::arg("dim"), py::arg("points"))
      .def_property_readonly("dim", &torus::NodeSet::dim)
      .def_property_readonly("points", &torus::NodeSet::points)
      .def("separation", &torus::NodeSet::separation)
      .def("translated", &torus::NodeSet::translated, py::arg("shift"))
      .def("to_json", [](const torus::NodeSet& s) { return to_python(torus::to_json(s)); })
      .def("__len__", &torus::NodeSet::size)
      .def("__repr__", [](const torus::NodeSet& s) {
        return "NodeSet(dim=" + std::to_string(s.dim()) + ", size=" + std::to_string(s.size()) + ")";
      });
  m.def("separation", &torus::separation, py::arg("nodes"));
  m.def("gen_random_separated", &torus::gen_random_separated, py::arg("dim"), py::arg("q"), py::arg("count"),
        py::arg("seed"), py::arg("pin_pair") = false);
  m.def("gen_hex_lattice", &torus::gen_hex_lattice, py::arg("spacing"), py::arg("max_points"));
  m.def("gen_grid", &torus::gen_grid, py::arg("dim"), py::arg("per_axis"));

  // moments
  m.def("index_set", [](int d, double n) { return index_matrix(moments::index_set(d, n)); }, py::arg("dim"),
        py::arg("n"));
  m.def("vandermonde", [](const torus::NodeSet& y, double n) { return moments::vandermonde(y, moments::index_set(y.dim(), n)); },
        py::arg("nodes"), py::arg("n"));
  m.def("block_jacobian",
        [](const torus::NodeSet& y, double n, std::optional<std::vector<moments::Complex>> w) {
          return moments::block_jacobian(y, weights_or_ones(w, y.size()), moments::index_set(y.dim(), n)).matrix;
        },
        py::arg("nodes"), py::arg("n"), py::arg("weights") = py::none());
  m.def("sigma_min", &moments::sigma_min, py::arg("matrix"));
  m.def("fisher_information",
        [](const torus::NodeSet& y, double n, double delta, std::optional<std::vector<moments::Complex>> w) {
          return moments::fisher_information(y, weights_or_ones(w, y.size()), delta, moments::index_set(y.dim(), n))
              .matrix;
        },
        py::arg("nodes"), py::arg("n"), py::arg("delta") = 1.0, py::arg("weights") = py::none());
  m.def("fim_record",
        [](const torus::NodeSet& y, double n, double delta, std::optional<std::vector<moments::Complex>> w) {
          const auto fim =
              moments::fisher_information(y, weights_or_ones(w, y.size()), delta, moments::index_set(y.dim(), n));
          return to_python(moments::fim_record(fim));
        },
        py::arg("nodes"), py::arg("n"), py::arg("delta") = 1.0, py::arg("weights") = py::none());
  m.def("condition_proxy", &moments::condition_proxy, py::arg("nodes"), py::arg("n"));
  m.def("synth_moments",
        [](const torus::NodeSet& y, double n, double delta, std::uint64_t seed,
           std::optional<std::vector<moments::Complex>> w) {
          return moments::synth_moments(y, weights_or_ones(w, y.size()), delta, moments::index_set(y.dim(), n), seed);
        },
        py::arg("nodes"), py::arg("n"), py::arg("delta"), py::arg("seed"), py::arg("weights") = py::none());

  // minorant
  py::class_<minorant::MinorantModel>(m, "MinorantModel")
      .def(py::init([](int dim, double tau) { return minorant::MinorantModel(dim, tau); }), py::arg("dim"),
           py::arg("tau"))
      .def("with_tau", &minorant::MinorantModel::with_tau, py::arg("tau"))
      .def_property_readonly("dim", &minorant::MinorantModel::dim)
      .def_property_readonly("tau", &minorant::MinorantModel::tau)
      .def_property_readonly("support_radius", &minorant::MinorantModel::support_radius)
      .def_property_readonly("phi_radius", &minorant::MinorantModel::phi_radius)
      .def_property_readonly("bessel_zero", &minorant::MinorantModel::bessel_zero)
      .def_property_readonly("psi0", &minorant::MinorantModel::psi0)
      .def_property_readonly("psi_hat0", &minorant::MinorantModel::psi_hat0)
      .def_property_readonly("neg_second_deriv0", &minorant::MinorantModel::neg_second_deriv0)
      .def("phi", py::vectorize(&minorant::MinorantModel::phi), py::arg("r"))
      .def("phi_hat", py::vectorize(&minorant::MinorantModel::phi_hat), py::arg("v"))
      .def("autocorrelation", py::vectorize(&minorant::MinorantModel::autocorrelation), py::arg("r"))
      .def("psi", py::vectorize(&minorant::MinorantModel::psi_tau), py::arg("r"))
      .def("psi_hat", py::vectorize(&minorant::MinorantModel::psi_hat_tau), py::arg("v"));
  m.def("certify_admissibility",
        [](const minorant::MinorantModel& model, int grid) {
          return to_python(minorant::to_json(minorant::certify_admissibility(model, grid)));
        },
        py::arg("model"), py::arg("grid_resolution") = 1000);
  m.def("radial_derivative_check",
        [](const minorant::MinorantModel& model) {
          return to_python(minorant::to_json(minorant::radial_derivative_check(model)));
        },
        py::arg("model"));
  m.def("prop_bound",
        [](const minorant::MinorantModel& model, double n) {
          return to_python(minorant::to_json(minorant::prop_bound(model, n)));
        },
        py::arg("model"), py::arg("n"));
  m.def("poisson_decomposition",
        [](const minorant::MinorantModel& model, const torus::NodeSet& y, const moments::CVector& u, double n,
           std::optional<double> k_max) {
          const double k = k_max ? *k_max : minorant::recommended_k_max(model, y, n);
          return to_python(minorant::to_json(minorant::poisson_decomposition(model, y, u, n, k)));
        },
        py::arg("model"), py::arg("nodes"), py::arg("u"), py::arg("n"), py::arg("k_max") = py::none());

  // sweeps
  m.def("run_sweep",
        [](const py::dict& config) {
          const auto c = sweeps::config_from_json(from_python(config));
          py::gil_scoped_release release;
          return sweeps::to_csv(sweeps::run_sweep(c));
        },
        py::arg("config"), "Runs a sweep described by a config dict and returns the CSV text.");
  m.def("run_bound_campaign",
        [](int dim, double tau, std::vector<double> n_grid, int trials, std::uint64_t seed, int workers) {
          sweeps::CampaignReport report;
          {
            py::gil_scoped_release release;
            report = sweeps::run_bound_campaign(dim, tau, n_grid, trials, seed, workers);
          }
          return to_python(sweeps::to_json(report));
        },
        py::arg("dim"), py::arg("tau"), py::arg("n_grid"), py::arg("trials") = 20, py::arg("seed") = 1,
        py::arg("workers") = 0);
  m.attr("CSV_HEADER") = sweeps::kCsvHeader;
}
