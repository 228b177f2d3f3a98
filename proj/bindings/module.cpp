#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "hsclab/config.hpp"
#include "hsclab/expr_parser.hpp"
#include "hsclab/papercheck.hpp"
#include "hsclab/positivity.hpp"

namespace py = pybind11;
using namespace hsclab;

namespace {

MetricAndCurvature mc_at(const Model& m, double lambda, int chart,
                         const std::vector<Complex>& point) {
  const TotalSpace ts = m.total(lambda);
  if (chart < 0 || chart >= static_cast<int>(ts.manifold.charts.size()))
    throw std::out_of_range("chart index out of range");
  return metric_and_curvature_at(ts.manifold.charts[chart].potential, point);
}

Eigen::VectorXcd to_vec(const std::vector<Complex>& v) {
  Eigen::VectorXcd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

std::vector<std::vector<Complex>> matrix_out(const Eigen::MatrixXcd& m) {
  std::vector<std::vector<Complex>> out(m.rows());
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) out[a].push_back(m(a, b));
  return out;
}

py::dict scan_dict(const ScanReport& r) {
  py::dict d;
  d["model"] = r.model;
  d["lambda"] = r.lambda;
  d["n_points"] = r.n_points;
  d["kahler_ok"] = r.kahler_all_ok;
  d["worst_metric_eigenvalue"] = r.worst_metric_eig;
  d["global_min_hsc"] = r.global_min;
  d["global_max_hsc"] = r.global_max;
  d["pinching"] = r.pinching();
  d["pass"] = r.positive();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "curvature laboratory for Kahler metrics on projectivized vector bundles";

  py::register_exception<EvalDomainError>(m, "EvalDomainError");
  py::register_exception<SingularMetricError>(m, "SingularMetricError");

  py::class_<Model>(m, "Model")
      .def_property_readonly("name", [](const Model& mo) { return mo.name; })
      .def_property_readonly("base_dim", [](const Model& mo) { return mo.base.dim; })
      .def_property_readonly("total_dim", &Model::total_dim)
      .def_property_readonly("has_bundle", [](const Model& mo) { return mo.bundle.has_value(); })
      .def("chart_names", [](const Model& mo, double lambda) {
        std::vector<std::string> names;
        for (const auto& c : mo.total(lambda).manifold.charts) names.push_back(c.name);
        return names;
      }, py::arg("lam") = 1.0)
      .def("__repr__", [](const Model& mo) { return "<Model " + mo.name + ">"; });

  m.def("catalog", &catalog, py::arg("name"), "catalog model by name");
  m.def("catalog_names", &catalog_names);
  m.def("model_from_config", [](const std::string& text) {
    return model_from_json(nlohmann::json::parse(text));
  }, py::arg("json_text"), "model from a JSON config snippet (catalog name or custom description)");

  m.def("metric_at", [](const Model& mo, double lambda, int chart,
                        const std::vector<Complex>& point) {
    const TotalSpace ts = mo.total(lambda);
    auto G = metric_at(ts.manifold.charts.at(chart).potential, point);
    return matrix_out(G.entries());
  }, py::arg("model"), py::arg("lam"), py::arg("chart"), py::arg("point"));

  m.def("metric_min_eigenvalue", [](const Model& mo, double lambda, int chart,
                                    const std::vector<Complex>& point) {
    const TotalSpace ts = mo.total(lambda);
    return metric_at(ts.manifold.charts.at(chart).potential, point).min_eigenvalue();
  });

  m.def("curvature_at", [](const Model& mo, double lambda, int chart,
                           const std::vector<Complex>& point) {
    const auto mc = mc_at(mo, lambda, chart, point);
    py::dict d;
    d["dim"] = mc.R.dim();
    std::vector<Complex> flat;
    const int n = mc.R.dim();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) flat.push_back(mc.R.at(a, b, c, e));
    d["entries"] = flat;
    d["kahler_symmetry_deviation"] = mc.R.kahler_symmetry_deviation();
    d["reality_deviation"] = mc.R.reality_deviation();
    return d;
  });

  m.def("hsc_at", [](const Model& mo, double lambda, int chart,
                     const std::vector<Complex>& point, const std::vector<Complex>& v) {
    const auto mc = mc_at(mo, lambda, chart, point);
    return hsc(mc.R, mc.G, to_vec(v));
  }, py::arg("model"), py::arg("lam"), py::arg("chart"), py::arg("point"), py::arg("v"));

  m.def("scalar_curvature_at", [](const Model& mo, double lambda, int chart,
                                  const std::vector<Complex>& point) {
    const auto mc = mc_at(mo, lambda, chart, point);
    return scalar_curvature(mc.R, mc.G);
  });

  m.def("min_hsc_at", [](const Model& mo, double lambda, int chart,
                         const std::vector<Complex>& point, int starts, std::uint64_t seed) {
    const auto mc = mc_at(mo, lambda, chart, point);
    MinHscOptions opt;
    opt.starts = starts;
    opt.seed = seed;
    const auto r = min_hsc_at_point(mc.R, mc.G, opt);
    py::dict d;
    d["min_hsc"] = r.value;
    std::vector<Complex> dir(r.direction.data(), r.direction.data() + r.direction.size());
    d["argmin"] = dir;
    d["converged"] = r.converged;
    return d;
  }, py::arg("model"), py::arg("lam"), py::arg("chart"), py::arg("point"),
     py::arg("starts") = 32, py::arg("seed") = 1);

  m.def("sphere_average_at", [](const Model& mo, double lambda, int chart,
                                const std::vector<Complex>& point, int samples,
                                std::uint64_t seed) {
    const auto mc = mc_at(mo, lambda, chart, point);
    const auto avg = sphere_average_hsc(mc.R, mc.G, samples, seed);
    const double S = scalar_curvature(mc.R, mc.G);
    const int N = mc.G.dim();
    const double target = 2.0 * S / (N * (N + 1.0));
    py::dict d;
    d["mean"] = avg.mean;
    d["std_error"] = avg.std_error;
    d["samples"] = avg.samples;
    d["scalar_curvature"] = S;
    d["target"] = target;
    d["z_score"] = avg.std_error > 0.0 ? (avg.mean - target) / avg.std_error : 0.0;
    return d;
  }, py::arg("model"), py::arg("lam"), py::arg("chart"), py::arg("point"),
     py::arg("samples") = 100000, py::arg("seed") = 1);

  m.def("scan", [](const Model& mo, double lambda, int res, int fiber_res, int starts,
                   std::uint64_t seed, int jobs) {
    ScanOptions opt;
    opt.res = res;
    opt.fiber_res = fiber_res;
    opt.starts = starts;
    opt.seed = seed;
    opt.jobs = jobs;
    opt.keep_points = false;
    return scan_dict(scan(mo, lambda, opt));
  }, py::arg("model"), py::arg("lam"), py::arg("res") = 9, py::arg("fiber_res") = 9,
     py::arg("starts") = 16, py::arg("seed") = 1234, py::arg("jobs") = 0);

  m.def("kahler_check", [](const Model& mo, double lambda, int res, int fiber_res) {
    const auto r = kahler_check(mo, lambda, res, fiber_res);
    py::dict d;
    d["ok"] = r.ok;
    d["worst_eigenvalue"] = r.worst_eigenvalue;
    d["n_points"] = r.n_points;
    return d;
  }, py::arg("model"), py::arg("lam"), py::arg("res") = 9, py::arg("fiber_res") = 9);

  m.def("find_lambda0", [](const Model& mo, double lo, double hi, double tol, int res,
                           int fiber_res, int starts, std::uint64_t seed) {
    ScanOptions opt;
    opt.res = res;
    opt.fiber_res = fiber_res;
    opt.starts = starts;
    opt.seed = seed;
    opt.keep_points = false;
    opt.track_max = false;
    const auto r = find_lambda0(mo, lo, hi, tol, opt, opt);
    py::dict d;
    d["lambda0"] = r.lambda0;
    d["lower_edge"] = r.lower_edge;
    d["monotone_ok"] = r.monotone_ok;
    d["verified"] = r.verified;
    return d;
  }, py::arg("model"), py::arg("lo"), py::arg("hi"), py::arg("tol") = 0.02, py::arg("res") = 5,
     py::arg("fiber_res") = 5, py::arg("starts") = 8, py::arg("seed") = 1234);

  m.def("certify", [](double H0, double C) {
    const auto cert = certify_lambda(H0, C);
    py::dict d;
    d["H0"] = cert.H0;
    d["C"] = cert.C;
    d["lambda_star"] = cert.lambda_star;
    d["inner_min"] = cert.inner_min;
    d["argmin_s"] = cert.argmin_s;
    return d;
  }, py::arg("H0"), py::arg("C"));

  m.def("bundle_bound", [](const Model& mo, int res, std::uint64_t seed) {
    if (!mo.bundle) throw std::invalid_argument("bundle_bound: model has no bundle");
    const auto b = bundle_bound_C(*mo.bundle, mo.base, res, seed);
    py::dict d;
    d["sup_curvature"] = b.sup_curvature;
    d["sup_nabla"] = b.sup_nabla;
    d["second_jet"] = b.second_jet;
    d["second_jet_valid"] = b.second_jet_valid;
    d["C"] = b.C();
    return d;
  }, py::arg("model"), py::arg("res") = 9, py::arg("seed") = 4242);

  m.def("certificate_consistency", [](const Model& mo, int res, int starts, int trials,
                                      std::uint64_t seed) {
    ConsistencyOptions opt;
    opt.scan_opts.res = res;
    opt.scan_opts.fiber_res = res;
    opt.scan_opts.starts = starts;
    opt.base_res = res;
    opt.bound_res = res;
    opt.trials = trials;
    opt.seed = seed;
    const auto cc = certificate_consistency(mo, opt);
    py::dict d;
    d["H0"] = cc.H0;
    d["C"] = cc.bound.C();
    d["lambda_star"] = cc.cert.lambda_star;
    d["lambda0"] = cc.lambda0.lambda0;
    d["lambda0_lower_edge"] = cc.lambda0.lower_edge;
    d["check_lambda_star_ge_lambda0"] = cc.check_lambda_star_ge_lambda0;
    d["check_scan_positive"] = cc.check_scan_positive;
    d["check_final_bound"] = cc.bound_check.ok;
    d["final_bound_min_slack"] = cc.bound_check.min_slack;
    d["pass"] = cc.all_ok();
    return d;
  }, py::arg("model"), py::arg("res") = 5, py::arg("starts") = 8, py::arg("trials") = 100,
     py::arg("seed") = 777);

  m.def("papercheck", [](const Model& mo, double lambda, int decomposition_trials,
                         int bound_trials, std::uint64_t seed) {
    PaperCheckOptions opt;
    opt.lambda = lambda;
    opt.decomposition_trials = decomposition_trials;
    opt.bound_trials = bound_trials;
    opt.seed = seed;
    const auto rep = papercheck_model(mo, opt);
    py::dict d;
    d["model"] = rep.model;
    d["excluded"] = rep.excluded;
    d["exclusion_reason"] = rep.exclusion_reason;
    d["all_pass"] = rep.all_pass();
    py::list cases;
    for (const auto& c : rep.cases) {
      py::dict cd;
      cd["id"] = c.id;
      cd["chart"] = c.chart;
      cd["deviation"] = c.deviation;
      cd["tolerance"] = c.tolerance;
      cd["pass"] = c.pass();
      cases.append(cd);
    }
    d["cases"] = cases;
    return d;
  }, py::arg("model"), py::arg("lam") = 5.0, py::arg("decomposition_trials") = 100,
     py::arg("bound_trials") = 500, py::arg("seed") = 2024);

  m.def("expr_eval", [](const std::string& text, int n_base, int n_fiber,
                        const std::vector<Complex>& point) {
    const Expr e = parse_expr(text, chart_vars(n_base, n_fiber));
    return evaluate(e, point);
  }, py::arg("text"), py::arg("n_base"), py::arg("n_fiber"), py::arg("point"),
     "evaluate a potential-language expression at a point");

  m.def("expr_derivative_eval", [](const std::string& text, int n_base, int n_fiber,
                                   const std::vector<int>& hol, const std::vector<int>& anti,
                                   const std::vector<Complex>& point) {
    const Expr e = parse_expr(text, chart_vars(n_base, n_fiber));
    DerivIndex d{hol, anti};
    d.validate(n_base + n_fiber);
    return evaluate(differentiate(e, d), point);
  }, py::arg("text"), py::arg("n_base"), py::arg("n_fiber"), py::arg("hol"), py::arg("anti"),
     py::arg("point"), "evaluate a mixed Wirtinger derivative of an expression");
}
