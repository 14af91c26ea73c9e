#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "momidx/errors.hpp"
#include "momidx/indexes.hpp"
#include "momidx/job.hpp"
#include "momidx/json_io.hpp"
#include "momidx/orthopoly.hpp"
#include "momidx/similarity.hpp"

namespace py = pybind11;
using namespace momidx;

namespace {

MeasureSpec parse_measure(const std::string& text) {
  MeasureSpec m = measure_from_json(Json::parse(text), "measure");
  m.validate();
  return m;
}

DensitySpec parse_density(const std::string& text) {
  DensitySpec d = density_from_json(Json::parse(text), "density");
  d.validate();
  return d;
}

QuadratureConfig quadrature(std::size_t initial_nodes, std::size_t max_nodes, double rel_tol) {
  QuadratureConfig q{initial_nodes, max_nodes, rel_tol};
  q.validate();
  return q;
}

VerdictOptions verdict_options(double zero_tol, double rel_stall_tol, std::size_t window) {
  VerdictOptions o;
  o.limits = {zero_tol, rel_stall_tol, window};
  o.limits.validate();
  return o;
}

py::object breakdown_dict(const std::optional<Breakdown>& b) {
  if (!b) return py::none();
  py::dict d;
  d["order"] = b->order;
  d["pivot"] = b->pivot;
  d["reason"] = b->reason;
  return d;
}

py::dict estimate_dict(const LimitEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["status"] = to_string(e.status);
  d["window"] = e.window;
  d["residual"] = e.residual;
  return d;
}

py::dict verdict_dict(const Verdict& v) {
  py::dict d;
  d["question"] = to_string(v.question);
  d["answer"] = to_string(v.answer);
  d["estimate"] = estimate_dict(v.basis);
  d["applicability_note"] = v.applicability_note;
  d["z0"] = v.z0;
  d["requested_order"] = v.requested_order;
  d["order_reached"] = v.order_reached;
  if (v.certificate) {
    py::dict c;
    c["lower_bound"] = v.certificate->lower_bound;
    c["reason"] = v.certificate->reason;
    d["certificate"] = c;
  } else {
    d["certificate"] = py::none();
  }
  d["evaluation_constant"] = v.evaluation_constant ? py::cast(*v.evaluation_constant) : py::none();
  d["warnings"] = v.warnings;
  d["values"] = v.sequence.values;
  return d;
}

HermitianSection section_from(const ComplexMatrix& m) { return HermitianSection::from_matrix(m); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moment-matrix indexes: gamma, lambda, alpha and point evaluations";
  m.attr("__version__") = kToolVersion;

  auto base = py::register_exception<Error>(m, "MomidxError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", base.ptr());
  py::register_exception<NotApplicable>(m, "NotApplicable", base.ptr());
  py::register_exception<NotOnCircle>(m, "NotOnCircle", base.ptr());
  py::register_exception<TooShort>(m, "TooShort", base.ptr());

  py::class_<IndexSequence>(m, "IndexSequence")
      .def_property_readonly("kind", [](const IndexSequence& s) { return to_string(s.kind); })
      .def_readonly("z0", &IndexSequence::z0)
      .def_readonly("requested_order", &IndexSequence::requested_order)
      .def_readonly("values", &IndexSequence::values)
      .def_property_readonly("order_reached", &IndexSequence::order_reached)
      .def_property_readonly("breakdown", [](const IndexSequence& s) { return breakdown_dict(s.breakdown); })
      .def("__len__", [](const IndexSequence& s) { return s.values.size(); })
      .def("__repr__", [](const IndexSequence& s) {
        return "<IndexSequence " + to_string(s.kind) + " order " + std::to_string(s.order_reached()) + ">";
      });

  py::class_<MatrixOracle>(m, "Oracle")
      .def_static(
          "from_measure",
          [](const std::string& measure, std::size_t initial_nodes, std::size_t max_nodes, double rel_tol) {
            return MatrixOracle::moment(parse_measure(measure), quadrature(initial_nodes, max_nodes, rel_tol));
          },
          py::arg("measure_json"), py::arg("initial_nodes") = 512, py::arg("max_nodes") = 65536,
          py::arg("rel_tol") = 1e-12)
      .def_static(
          "toeplitz", [](const std::string& density) { return MatrixOracle::toeplitz(parse_density(density)); },
          py::arg("density_json"))
      .def_static(
          "explicit", [](const ComplexMatrix& a) { return MatrixOracle::explicit_matrix(section_from(a)); },
          py::arg("matrix"))
      .def_static("conjugated", &MatrixOracle::conjugated, py::arg("inner"), py::arg("alpha"), py::arg("beta"))
      .def_static("sum", &MatrixOracle::sum, py::arg("parts"))
      .def_property_readonly("kind", [](const MatrixOracle& o) { return to_string(o.kind()); })
      .def_property_readonly("description", &MatrixOracle::description)
      .def("entry", &MatrixOracle::entry, py::arg("j"), py::arg("k"))
      .def(
          "section", [](const MatrixOracle& o, std::size_t n) { return o.section(n).matrix(); }, py::arg("n"))
      .def("atom_mass_at", &MatrixOracle::atom_mass_at, py::arg("z0"), py::arg("tol") = 1e-12)
      .def("warnings", &MatrixOracle::warnings);

  m.def(
      "moment",
      [](const std::string& measure, std::size_t j, std::size_t k) {
        const MomentValue v = moment(parse_measure(measure), j, k);
        return py::make_tuple(v.value, v.error_bound, v.converged);
      },
      py::arg("measure_json"), py::arg("j"), py::arg("k"));
  m.def(
      "total_mass", [](const std::string& measure) { return total_mass(parse_measure(measure)); },
      py::arg("measure_json"));

  m.def(
      "lambda_sequence", [](const MatrixOracle& o, std::size_t n) { return lambda_sequence(o, n); },
      py::arg("oracle"), py::arg("n"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "gamma_sequence",
      [](const MatrixOracle& o, std::size_t n, bool stop) { return gamma_sequence(o, n, {stop}); },
      py::arg("oracle"), py::arg("n"), py::arg("stop_at_breakdown") = false,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "alpha_sequence",
      [](const MatrixOracle& o, std::size_t n, bool stop) { return alpha_sequence(o, n, {stop}); },
      py::arg("oracle"), py::arg("n"), py::arg("stop_at_breakdown") = false,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "gamma_at_sequence",
      [](const MatrixOracle& o, Complex z0, std::size_t n, bool stop) { return gamma_at_sequence(o, z0, n, {stop}); },
      py::arg("oracle"), py::arg("z0"), py::arg("n"), py::arg("stop_at_breakdown") = false,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "estimate_limit",
      [](const std::vector<double>& values, double zero_tol, double rel_stall_tol, std::size_t window) {
        return estimate_dict(estimate_limit(values, {zero_tol, rel_stall_tol, window}));
      },
      py::arg("values"), py::arg("zero_tol") = 1e-8, py::arg("rel_stall_tol") = 1e-6, py::arg("window") = 8);

  m.def(
      "szego_integral",
      [](const std::string& density) {
        const SzegoIntegral s = szego_integral(parse_density(density));
        py::dict d;
        d["value"] = s.value;
        d["error_bound"] = s.error_bound;
        d["nodes"] = s.nodes;
        d["zero_density"] = s.zero_density;
        return d;
      },
      py::arg("density_json"));

  m.def(
      "gamma_direct_ls", [](const ComplexMatrix& a) { return gamma_direct_ls(section_from(a)); }, py::arg("matrix"));
  m.def(
      "smallest_eigenvalue", [](const ComplexMatrix& a) { return smallest_eigenvalue(section_from(a)); },
      py::arg("matrix"));
  m.def(
      "cholesky_lower", [](const ComplexMatrix& a) { return cholesky(section_from(a)).lower(); }, py::arg("matrix"));
  m.def(
      "kernel_diag", [](const ComplexMatrix& a, Complex z0) { return kernel_diag(cholesky(section_from(a)), z0).value; },
      py::arg("matrix"), py::arg("z0"));
  m.def(
      "monic_norms", [](const ComplexMatrix& a) { return monic_norms(cholesky(section_from(a))); }, py::arg("matrix"));

  m.def(
      "binomial_matrix",
      [](std::size_t n, Complex alpha, Complex beta) { return binomial_matrix(n, AffineMap(alpha, beta)).upper; },
      py::arg("n"), py::arg("alpha"), py::arg("beta"));
  m.def(
      "conjugate_section",
      [](const ComplexMatrix& a, Complex alpha, Complex beta) {
        return conjugate_section(section_from(a), AffineMap(alpha, beta)).matrix();
      },
      py::arg("matrix"), py::arg("alpha"), py::arg("beta"));
  m.def(
      "gamma_shift_crosscheck",
      [](const MatrixOracle& o, Complex z0, std::size_t n) {
        ShiftCrosscheck c;
        {
          py::gil_scoped_release release;
          c = gamma_shift_crosscheck(o, z0, n);
        }
        py::dict d;
        d["direct"] = c.direct;
        d["conjugated"] = c.conjugated;
        d["orders_compared"] = c.orders_compared;
        d["max_rel_gap"] = c.max_rel_gap;
        d["warnings"] = c.warnings;
        return d;
      },
      py::arg("oracle"), py::arg("z0"), py::arg("n"));

  m.def(
      "szego_verdict",
      [](const std::string& measure, std::size_t n, double zero_tol, double rel_stall_tol, std::size_t window) {
        return verdict_dict(szego_verdict(parse_measure(measure), n, verdict_options(zero_tol, rel_stall_tol, window)));
      },
      py::arg("measure_json"), py::arg("n"), py::arg("zero_tol") = 1e-8, py::arg("rel_stall_tol") = 1e-6,
      py::arg("window") = 8);
  m.def(
      "density_verdict",
      [](const std::string& measure, Complex z_ref, std::size_t n, bool override_hypothesis) {
        return verdict_dict(density_verdict(parse_measure(measure), z_ref, n, override_hypothesis));
      },
      py::arg("measure_json"), py::arg("z_ref"), py::arg("n"), py::arg("override_hypothesis") = false);
  m.def(
      "bpe_verdict",
      [](const MatrixOracle& o, Complex z0, std::size_t n) { return verdict_dict(bpe_verdict(o, z0, n)); },
      py::arg("oracle"), py::arg("z0"), py::arg("n"));

  m.def(
      "bpe_map",
      [](const MatrixOracle& o, std::pair<double, double> re, std::pair<double, double> im,
         std::pair<std::size_t, std::size_t> steps, std::size_t n) {
        const GridSpec grid{re.first, re.second, im.first, im.second, steps.first, steps.second};
        BpeMap map;
        {
          py::gil_scoped_release release;
          map = bpe_map(o, grid, n);
        }
        Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.im_steps), static_cast<Eigen::Index>(grid.re_steps));
        for (std::size_t r = 0; r < grid.im_steps; ++r)
          for (std::size_t c = 0; c < grid.re_steps; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = map.values[r * grid.re_steps + c];
        return out;
      },
      py::arg("oracle"), py::arg("re_range"), py::arg("im_range"), py::arg("steps"), py::arg("n"));

  m.def(
      "run_job",
      [](const std::string& config, std::optional<std::size_t> max_order, std::uint64_t seed) {
        Report r;
        try {
          const JobConfig c = parse_config(Json::parse(config));
          py::gil_scoped_release release;
          r = run(c, {max_order, seed});
        } catch (const ConfigError& e) {
          r = error_report("", e);
        }
        return py::make_tuple(r.document.dump(), r.files, r.exit_code);
      },
      py::arg("config_json"), py::arg("max_order") = py::none(), py::arg("seed") = 0);
}
