#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roughfpca/bulk.hpp"
#include "roughfpca/cli.hpp"
#include "roughfpca/diagnostics.hpp"
#include "roughfpca/errors.hpp"
#include "roughfpca/fpca.hpp"
#include "roughfpca/io.hpp"
#include "roughfpca/parallel.hpp"
#include "roughfpca/rmt.hpp"
#include "roughfpca/simulate.hpp"
#include "roughfpca/spectral.hpp"
#include "roughfpca/theory.hpp"

namespace py = pybind11;
using namespace roughfpca;

namespace {

CurveSet as_curves(const Eigen::MatrixXd& values) {
  CurveSet c;
  c.values = values;
  return c;
}

py::dict report_dict(const CriticalityReport& r) {
  py::list spikes;
  for (const auto& s : r.per_spike) {
    py::dict d;
    d["index"] = s.index;
    d["spike"] = s.spike;
    d["regime"] = s.regime == Regime::Super ? "super" : "sub";
    d["limit_eigenvalue"] = s.limit_eigenvalue;
    d["limit_abs_cosine"] = s.limit_abs_cosine;
    d["limit_angle_deg"] = s.limit_angle_deg();
    spikes.append(d);
  }
  py::dict out;
  out["xi_inf"] = r.xi_inf;
  out["threshold"] = r.threshold;
  out["subcritical_limit"] = r.subcritical_limit;
  out["M"] = r.M;
  out["per_spike"] = spikes;
  return out;
}

py::dict test_dict(const TestResult& r) {
  py::dict d;
  d["statistic"] = r.statistic;
  d["quantile"] = r.quantile;
  d["alpha"] = r.alpha;
  d["reject"] = r.reject;
  d["K1"] = r.K1;
  d["reps_bootstrap"] = r.reps_bootstrap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rough functional data: FPCA phase transitions, eigengap test, deformed MP law";
  m.attr("__version__") = std::string(kVersion);

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", m.attr("ConfigError").ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<NoSolutionError>(m, "NoSolutionError", m.attr("NumericError").ptr());
  py::register_exception<CalibrationError>(m, "CalibrationError", m.attr("NumericError").ptr());
  py::register_exception<IntegrabilityError>(m, "IntegrabilityError", m.attr("NumericError").ptr());
  py::register_exception<BoundaryError>(m, "BoundaryError", m.attr("NumericError").ptr());
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError", m.attr("DataError").ptr());

  py::class_<BulkFunction>(m, "Bulk")
      .def_static("make", [](const std::string& family, double b0, double a) {
        return BulkFunction::make(parse_family(family), b0, a);
      }, py::arg("family"), py::arg("b0"), py::arg("a"))
      .def_static("table", &BulkFunction::tabulated, py::arg("knots"), py::arg("a") = 1.0)
      .def_static("calibrate", [](const std::string& family, double b0, double threshold) {
        return calibrate_rate(parse_family(family), b0, threshold);
      }, py::arg("family"), py::arg("b0"), py::arg("threshold"), "rate a with 1/xi(inf) = threshold")
      .def("with_rate", &BulkFunction::with_rate)
      .def("__call__", &BulkFunction::operator())
      .def_property_readonly("family", [](const BulkFunction& b) { return std::string(family_name(b.family())); })
      .def_property_readonly("b0", &BulkFunction::b0)
      .def_property_readonly("rate", &BulkFunction::rate)
      .def_property_readonly("support_end", &BulkFunction::support_end)
      .def("__repr__", [](const BulkFunction& b) {
        return "Bulk(" + std::string(family_name(b.family())) + ", b0=" + std::to_string(b.b0()) +
               ", a=" + std::to_string(b.rate()) + ")";
      });

  py::class_<ModelSpec>(m, "Model")
      .def(py::init<std::vector<double>, BulkFunction>(), py::arg("spikes"), py::arg("bulk"))
      .def_static("from_json", [](const std::string& text) { return model_from_json(json::parse(text)); })
      .def("to_json", [](const ModelSpec& s) { return model_to_json(s).dump(); })
      .def_property_readonly("spikes", &ModelSpec::spikes)
      .def_property_readonly("bulk", &ModelSpec::bulk)
      .def("spectrum", [](const ModelSpec& s, int N, int p) { return SpectrumView(s, N, p).eigenvalues(); },
           py::arg("N"), py::arg("p"));

  m.def("solve_xi", &solve_xi, py::arg("bulk"), py::arg("gamma") = numerics::kInf);
  m.def("psi", &psi, py::arg("bulk"), py::arg("y"), py::arg("gamma") = numerics::kInf);
  m.def("psi_prime", &psi_prime, py::arg("bulk"), py::arg("y"), py::arg("gamma") = numerics::kInf);
  m.def("classify", [](const ModelSpec& s) { return report_dict(classify(s)); }, py::arg("model"));

  m.def("simulate", [](const ModelSpec& model, int N, int p, int grid, std::uint64_t seed, bool center) {
    SimConfig cfg{model, N, p > 0 ? p : 5 * N, grid, seed, center};
    SimulatedSample s = draw_sample(cfg);
    return py::make_tuple(s.curves.values, s.coefficients);
  }, py::arg("model"), py::arg("N"), py::arg("p") = 0, py::arg("grid") = 256, py::arg("seed") = 1,
        py::arg("center") = false, "returns (curves N x grid, coefficients N x p)");

  m.def("eigen", [](const Eigen::MatrixXd& rows, double weight, bool center) {
    const EigenSystem es = empirical_covariance_eigen(SampleView(rows, weight), center);
    return py::make_tuple(es.eigenvalues, es.eigenfunctions);
  }, py::arg("rows"), py::arg("weight") = 1.0, py::arg("center") = true,
        "eigenvalues and eigenfunctions (rows) of the empirical covariance");
  m.def("angle_between", [](const Eigen::VectorXd& f, const Eigen::VectorXd& g, double w) {
    return angle_between(f, g, w);
  }, py::arg("f"), py::arg("g"), py::arg("weight") = 1.0);

  m.def("eigengap_ratio", py::overload_cast<const std::vector<double>&, int>(&eigengap_ratio), py::arg("eigenvalues"),
        py::arg("K1"));
  m.def("tw_ratio_quantile", &tw_ratio_quantile, py::arg("K1"), py::arg("alpha") = 0.05, py::arg("reps") = 1000,
        py::arg("goe_dim") = 1000, py::arg("seed") = 1);
  m.def("goe_top_eigs", py::overload_cast<int, int, std::uint64_t>(&sample_goe_top_eigs), py::arg("dim"),
        py::arg("k"), py::arg("seed"));
  m.def("test_supercritical", [](const Eigen::MatrixXd& curves, int K1, double alpha, int reps, int goe_dim,
                                 std::uint64_t seed, bool center) {
    const CurveSet c = as_curves(curves);
    return test_dict(test_supercritical(c, K1, alpha, reps, goe_dim, seed, center));
  }, py::arg("curves"), py::arg("K1"), py::arg("alpha") = 0.05, py::arg("reps") = 1000, py::arg("goe_dim") = 1000,
        py::arg("seed") = 1, py::arg("center") = true);
  m.def("mean_test", [](const Eigen::MatrixXd& curves, const Eigen::VectorXd& mu0, int k, double level) {
    const MeanTestResult r = mean_test(as_curves(curves), mu0, k, level);
    py::dict d;
    d["statistic"] = r.statistic;
    d["chi2_quantile"] = r.chi2_quantile;
    d["k"] = r.k;
    d["reject"] = r.reject;
    return d;
  }, py::arg("curves"), py::arg("mu0"), py::arg("k"), py::arg("level") = 0.95);
  m.def("moving_average", &moving_average, py::arg("curves"), py::arg("t"));

  m.def("mp_density", [](double y, std::vector<double> locations, std::vector<double> weights,
                         std::vector<double> grid, double eta) {
    const AtomicMeasure H(std::move(locations), std::move(weights));
    if (grid.empty()) grid = mp_default_grid(y, H);
    const MPLaw law = mp_density(y, H, grid, eta);
    std::vector<double> e, f;
    for (const auto& [x, v] : law.density_grid) {
      e.push_back(x);
      f.push_back(v);
    }
    py::dict d;
    d["E"] = e;
    d["density"] = f;
    d["atom_at_zero"] = law.atom_at_zero;
    d["support_edges"] = law.support_edges;
    d["bulk_mass"] = law.bulk_mass();
    return d;
  }, py::arg("y"), py::arg("locations"), py::arg("weights"), py::arg("grid") = std::vector<double>{},
        py::arg("eta") = 1e-4);
  m.def("finite_sample_edge", [](std::vector<double> locations, std::vector<double> weights, int p, int n) {
    const EdgeParams e = finite_sample_edge(AtomicMeasure(std::move(locations), std::move(weights)), p, n);
    py::dict d;
    d["xi_n"] = e.xi_n;
    d["r_n"] = e.r_n;
    d["sigma_n"] = e.sigma_n;
    d["y_n"] = e.y_n;
    return d;
  }, py::arg("locations"), py::arg("weights"), py::arg("p"), py::arg("n"));

  m.def("spectral_statistic", [](const Eigen::VectorXd& eigenvalues, int N, int power) {
    return spectral_statistic(eigenvalues, N, TestFunction::power(power));
  }, py::arg("eigenvalues"), py::arg("N"), py::arg("power") = 1, "(1/N) sum_i lambda_i^power");
  m.def("spectral_limit", [](const ModelSpec& model, int power, double gamma, int atoms) {
    return spectral_limit(model, TestFunction::power(power), gamma, atoms).value;
  }, py::arg("model"), py::arg("power"), py::arg("gamma"), py::arg("atoms") = 2000);

  m.def("run_experiment", [](const std::string& config, const std::string& outdir, std::uint64_t seed) {
    return manifest_to_json(run_experiment(json::parse(config), outdir, seed)).dump();
  }, py::arg("config"), py::arg("outdir"), py::arg("seed") = 0, "runs a JSON experiment; returns the manifest JSON");
  m.def("set_threads", &set_thread_count, py::arg("n"));
}
