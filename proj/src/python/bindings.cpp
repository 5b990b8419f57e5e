#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dareg/analysis.hpp"
#include "dareg/datagen.hpp"
#include "dareg/experiment.hpp"
#include "dareg/filters.hpp"
#include "dareg/problems.hpp"

namespace py = pybind11;

using namespace dareg;

namespace {

problems::IndexFunction make_phi(const std::string& kind, double value) {
  if (kind == "hoelder") return problems::IndexFunction::hoelder(value);
  if (kind == "logarithmic") return problems::IndexFunction::logarithmic(value);
  throw std::invalid_argument("index function kind must be 'hoelder' or 'logarithmic'");
}

filters::Method method_from_name(const std::string& name) {
  if (name == "nonstat") return filters::Method::NonStationaryArm;
  if (name == "stat") return filters::Method::StationaryArm;
  throw std::invalid_argument("method must be 'nonstat' or 'stat'");
}

}  // namespace

PYBIND11_MODULE(_dareg, m) {
  m.doc() = "Time-continuous data assimilation as regularization for steady "
            "linear statistical inverse problems";
  m.attr("__version__") = "0.1.0";

  py::class_<problems::Grid>(m, "Grid")
      .def_readonly("n", &problems::Grid::n)
      .def_readonly("points", &problems::Grid::points);

  py::class_<problems::ProblemInstance>(m, "ProblemInstance")
      .def_readonly("A", &problems::ProblemInstance::A)
      .def_readonly("sigma", &problems::ProblemInstance::Sigma)
      .def_readonly("u_true", &problems::ProblemInstance::u_true)
      .def_readonly("m0", &problems::ProblemInstance::m0)
      .def_readonly("grid", &problems::ProblemInstance::grid)
      .def_readonly("label", &problems::ProblemInstance::label);

  py::class_<problems::WhitenedProblem>(m, "WhitenedProblem")
      .def_readonly("base", &problems::WhitenedProblem::base)
      .def_readonly("prior_power", &problems::WhitenedProblem::prior_power)
      .def_readonly("rescale", &problems::WhitenedProblem::rescale)
      .def_readonly("K", &problems::WhitenedProblem::K)
      .def_readonly("omega", &problems::WhitenedProblem::omega)
      .def_property_readonly("singular_values",
                             [](const problems::WhitenedProblem& wp) {
                               return wp.k_svd.singular_values;
                             })
      .def("b_eigenvalues", &problems::WhitenedProblem::b_eigenvalues)
      .def("omega_trace", &problems::WhitenedProblem::omega_trace)
      .def("b_operator", &problems::WhitenedProblem::b_operator);

  py::class_<datagen::DataStream>(m, "DataStream")
      .def_readonly("h", &datagen::DataStream::h)
      .def_readonly("T", &datagen::DataStream::T)
      .def_readonly("seed", &datagen::DataStream::seed)
      .def_readonly("increments", &datagen::DataStream::increments)
      .def("steps", &datagen::DataStream::steps)
      .def("dim", &datagen::DataStream::dim);

  py::class_<filters::FilterRun>(m, "FilterRun")
      .def_readonly("alpha", &filters::FilterRun::alpha)
      .def_readonly("h", &filters::FilterRun::h)
      .def_readonly("times", &filters::FilterRun::times)
      .def_readonly("means", &filters::FilterRun::means)
      .def_property_readonly("final_covariance",
                             [](const filters::FilterRun& run) -> py::object {
                               if (!run.final_covariance) return py::none();
                               return py::cast(*run.final_covariance);
                             })
      .def_property_readonly("final_mean", [](const filters::FilterRun& run) {
        return run.final_mean();
      });

  py::class_<analysis::MseBreakdown>(m, "MseBreakdown")
      .def_readonly("bias_sq", &analysis::MseBreakdown::bias_sq)
      .def_readonly("variance", &analysis::MseBreakdown::variance)
      .def_readonly("total", &analysis::MseBreakdown::total);

  py::class_<analysis::BoundReport>(m, "BoundReport")
      .def_readonly("bias_bound", &analysis::BoundReport::bias_bound)
      .def_readonly("variance_bound", &analysis::BoundReport::variance_bound)
      .def_readonly("bound_value", &analysis::BoundReport::bound_value)
      .def_readonly("regime", &analysis::BoundReport::regime)
      .def_readonly("constant", &analysis::BoundReport::constant)
      .def_readonly("qualification", &analysis::BoundReport::qualification);

  m.def("midpoint_operator", &problems::midpoint_operator, py::arg("n"));
  m.def("example_solution",
        [](const std::string& id, int n) {
          return problems::example_solution(problems::example_from_name(id),
                                            problems::Grid::midpoints(n));
        },
        py::arg("example"), py::arg("n"));
  m.def("example_datum",
        [](const std::string& id, int n) {
          return problems::example_datum(problems::example_from_name(id),
                                         problems::Grid::midpoints(n));
        },
        py::arg("example"), py::arg("n"));
  m.def("make_example",
        [](const std::string& id, int n) {
          return problems::make_example(problems::example_from_name(id), n);
        },
        py::arg("example"), py::arg("n"));
  m.def("whiten", &problems::whiten, py::arg("problem"), py::arg("p"));
  m.def("diagonal_problem",
        [](const std::string& kind, double rate, double p, double nu, int n) {
          auto model = kind == "polynomial"
                           ? problems::SpectrumModel::polynomial(rate, n)
                           : problems::SpectrumModel::exponential(rate, n);
          return problems::diagonal_problem(
              model, p, problems::IndexFunction::hoelder(nu), n);
        },
        py::arg("kind"), py::arg("rate"), py::arg("p"), py::arg("nu"),
        py::arg("n"));

  m.def("simulate_stream", &datagen::simulate_stream, py::arg("problem"),
        py::arg("T"), py::arg("h"), py::arg("seed"));
  m.def("zero_noise_stream", &datagen::zero_noise_stream, py::arg("problem"),
        py::arg("T"), py::arg("h"));
  m.def("aggregate", &datagen::aggregate, py::arg("stream"), py::arg("factor"));
  m.def("averaged_datum", &datagen::averaged_datum, py::arg("stream"));

  m.def("nonstationary_run",
        [](const problems::WhitenedProblem& wp, const datagen::DataStream& s,
           double alpha) { return filters::nonstationary_run(wp, s, alpha); },
        py::arg("problem"), py::arg("stream"), py::arg("alpha"));
  m.def("stationary_run",
        [](const problems::WhitenedProblem& wp, const datagen::DataStream& s,
           double alpha) { return filters::stationary_run(wp, s, alpha); },
        py::arg("problem"), py::arg("stream"), py::arg("alpha"));
  m.def("closed_form_covariance", &filters::closed_form_covariance,
        py::arg("problem"), py::arg("alpha"), py::arg("t"));
  m.def("expected_mean_nonstationary", &filters::expected_mean_nonstationary,
        py::arg("problem"), py::arg("alpha"), py::arg("t"));
  m.def("expected_mean_stationary", &filters::expected_mean_stationary,
        py::arg("problem"), py::arg("alpha"), py::arg("t"));
  m.def("max_stable_step", &filters::max_stable_step, py::arg("problem"),
        py::arg("alpha"));

  m.def("tikhonov_reference", &analysis::tikhonov_reference, py::arg("problem"),
        py::arg("ybar"), py::arg("eps"), py::arg("m0"));
  m.def("showalter_reference", &analysis::showalter_reference,
        py::arg("problem"), py::arg("ybar"), py::arg("eps"), py::arg("m0"));
  m.def("effective_dimension",
        [](const Vector& eigs, double eps) {
          return analysis::effective_dimension(eigs, eps);
        },
        py::arg("eigenvalues"), py::arg("eps"));
  m.def("mse_exact",
        [](const problems::WhitenedProblem& wp, const std::string& method,
           double alpha, double t) {
          return analysis::mse_exact(wp, method_from_name(method), alpha, t);
        },
        py::arg("problem"), py::arg("method"), py::arg("alpha"), py::arg("t"));
  m.def("mse_bound",
        [](const problems::WhitenedProblem& wp, const std::string& method,
           const std::string& phi_kind, double phi_value, double alpha,
           double t) {
          return analysis::mse_bound(wp, method_from_name(method),
                                     make_phi(phi_kind, phi_value), alpha, t);
        },
        py::arg("problem"), py::arg("method"), py::arg("phi_kind"),
        py::arg("phi_value"), py::arg("alpha"), py::arg("t"));
  m.def("solve_alpha_theta",
        [](const problems::WhitenedProblem& wp, double nu, double T) {
          const auto c = analysis::solve_alpha_theta(
              wp, problems::IndexFunction::hoelder(nu), T);
          return std::make_pair(c.eps_star, c.alpha_star);
        },
        py::arg("problem"), py::arg("nu"), py::arg("T"));
  m.def("solve_alpha_psi",
        [](const problems::WhitenedProblem& wp, double nu, double T) {
          const auto c = analysis::solve_alpha_psi(
              wp, problems::IndexFunction::hoelder(nu), T);
          return std::make_pair(c.eps_star, c.alpha_star);
        },
        py::arg("problem"), py::arg("nu"), py::arg("T"));
  m.def("fit_slope",
        [](const std::vector<std::pair<double, double>>& pts) {
          return analysis::fit_slope(pts);
        },
        py::arg("points"));

  m.def("run_experiment",
        [](const std::string& config_json) {
          const auto cfg = experiment::parse_config(config_json);
          const auto table = experiment::run_experiment(cfg);
          py::list rows;
          for (const auto& r : table.rows) {
            py::dict d;
            d["example"] = r.example;
            d["method"] = r.method;
            d["p"] = r.p;
            d["n"] = r.n;
            d["T"] = r.T;
            d["h"] = r.h;
            d["alpha"] = r.alpha;
            d["rmse"] = r.rmse;
            d["stderr"] = r.stderr_;
            d["reps"] = r.reps;
            d["seed"] = r.seed;
            rows.append(d);
          }
          return rows;
        },
        py::arg("config_json"));
}
