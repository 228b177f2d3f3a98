// Batch driver: load a model config, run scans / λ searches / certificates /
// formula checks, and emit machine-readable JSON + CSV reports.
//
// Subcommands: eval | scan | lambda0 | certify | papercheck | berger
// Exit codes: 0 on pass, 1 on a failed check, 2 on configuration errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hsclab/config.hpp"
#include "hsclab/papercheck.hpp"
#include "hsclab/positivity.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace hsclab;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;  // 0 = use config value
  int jobs = 0;
  nlohmann::json config;

  std::uint64_t effective_seed() const {
    if (seed != 0) return seed;
    return config.value("seed", 1234ull);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "path to the JSON run config")->required();
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--out", c.out_dir, "output directory for reports");
  cmd->add_option("--jobs", c.jobs, "worker threads (0 = hardware)");
}

void load_config(Common& c) {
  std::ifstream in(c.config_path);
  if (!in) throw std::runtime_error("cannot open config file " + c.config_path);
  try {
    in >> c.config;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + c.config_path + ": " + e.what());
  }
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

ordered_json report_header(const std::string& command, const Common& c,
                           const std::string& model_name) {
  ordered_json j;
  j["schema_version"] = 1;
  j["generated_at"] = timestamp();
  j["command"] = command;
  j["model"] = model_name;
  j["seed"] = c.effective_seed();
  return j;
}

void write_json(const Common& c, const std::string& name, const ordered_json& j) {
  fs::create_directories(c.out_dir);
  const auto path = fs::path(c.out_dir) / name;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  std::cout << "wrote " << path.string() << "\n";
}

void write_text(const Common& c, const std::string& name, const std::string& text) {
  fs::create_directories(c.out_dir);
  const auto path = fs::path(c.out_dir) / name;
  std::ofstream out(path);
  out << text;
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<double> lambdas_from_config(const nlohmann::json& cfg, double fallback) {
  if (!cfg.contains("lambda")) return {fallback};
  const auto& l = cfg.at("lambda");
  if (l.is_array()) return l.get<std::vector<double>>();
  return {l.get<double>()};
}

ScanOptions scan_options(const Common& c) {
  ScanOptions o;
  const auto& cfg = c.config;
  if (cfg.contains("grid")) {
    o.res = cfg["grid"].value("res", 17);
    o.fiber_res = cfg["grid"].value("fiber_res", 17);
  }
  o.starts = cfg.value("starts", 64);
  o.tol = cfg.value("tol", 1e-10);
  o.seed = c.effective_seed();
  o.jobs = c.jobs;
  return o;
}

std::string cx(Complex v) {
  std::ostringstream os;
  os << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
  return os.str();
}

ordered_json coords_json(const std::vector<Complex>& coords) {
  ordered_json a = ordered_json::array();
  for (const auto& z : coords) a.push_back({z.real(), z.imag()});
  return a;
}

std::vector<Complex> coords_from_json(const nlohmann::json& j) {
  std::vector<Complex> out;
  for (const auto& p : j) out.push_back(Complex{p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

// ---- scan ----------------------------------------------------------------------

int cmd_scan(Common& c) {
  const Model model = model_from_json(c.config.at("model"));
  const auto lambdas = lambdas_from_config(c.config, 1.0);
  ScanOptions opt = scan_options(c);

  ordered_json rep = report_header("scan", c, model.name);
  rep["grid"] = {{"res", opt.res}, {"fiber_res", opt.fiber_res}};
  rep["starts"] = opt.starts;
  rep["tol"] = opt.tol;
  rep["results"] = ordered_json::array();

  std::ostringstream csv;
  csv << "lambda,chart,coords,min_hsc,max_hsc,metric_min_eig,kahler_ok,converged\n";

  bool all_pass = true;
  for (double lam : lambdas) {
    const ScanReport sr = scan(model, lam, opt);
    ordered_json r;
    r["lambda"] = lam;
    r["n_points"] = sr.n_points;
    r["kahler_ok"] = sr.kahler_all_ok;
    r["worst_metric_eigenvalue"] = sr.worst_metric_eig;
    r["global_min_hsc"] = sr.global_min;
    r["global_max_hsc"] = sr.global_max;
    r["pinching"] = sr.pinching();
    r["all_converged"] = sr.all_converged;
    r["pass"] = sr.positive();
    if (sr.argmin_chart >= 0) {
      r["argmin"] = {{"chart", sr.argmin_chart}, {"coords", coords_json(sr.argmin_coords)}};
    }
    rep["results"].push_back(r);
    all_pass = all_pass && sr.positive();

    for (const auto& p : sr.points) {
      csv << lam << "," << p.chart << ",\"";
      for (std::size_t i = 0; i < p.coords.size(); ++i)
        csv << (i ? ";" : "") << cx(p.coords[i]);
      csv << "\"," << p.min_hsc << "," << p.max_hsc << "," << p.metric_min_eig << ","
          << (p.kahler_ok ? 1 : 0) << "," << (p.converged ? 1 : 0) << "\n";
    }
  }
  rep["pass"] = all_pass;
  write_json(c, "scan.json", rep);
  write_text(c, "scan.csv", csv.str());
  return all_pass ? 0 : 1;
}

// ---- eval ----------------------------------------------------------------------

int cmd_eval(Common& c) {
  const Model model = model_from_json(c.config.at("model"));
  const double lam = c.config.value("lambda", 1.0);
  const TotalSpace ts = model.total(lam);

  ordered_json rep = report_header("eval", c, model.name);
  rep["lambda"] = lam;
  rep["points"] = ordered_json::array();

  std::ostringstream csv;
  csv << "chart,coords,direction,hsc\n";

  if (!c.config.contains("points")) throw std::runtime_error("eval: config needs \"points\"");
  for (const auto& pj : c.config.at("points")) {
    const int chart = pj.value("chart", 0);
    if (chart < 0 || chart >= static_cast<int>(ts.manifold.charts.size()))
      throw std::runtime_error("eval: chart index out of range");
    const auto coords = coords_from_json(pj.at("coords"));
    const auto mc = metric_and_curvature_at(ts.manifold.charts[chart].potential, coords);

    ordered_json pt;
    pt["chart"] = chart;
    pt["coords"] = coords_json(coords);
    ordered_json gm = ordered_json::array();
    for (int a = 0; a < mc.G.dim(); ++a) {
      ordered_json row = ordered_json::array();
      for (int b = 0; b < mc.G.dim(); ++b)
        row.push_back({mc.G.entries()(a, b).real(), mc.G.entries()(a, b).imag()});
      gm.push_back(row);
    }
    pt["metric"] = gm;
    pt["metric_min_eigenvalue"] = mc.G.min_eigenvalue();
    pt["scalar_curvature"] = scalar_curvature(mc.R, mc.G);
    pt["directions"] = ordered_json::array();

    if (pj.contains("directions")) {
      for (const auto& dj : pj.at("directions")) {
        const auto dv = coords_from_json(dj);
        Eigen::VectorXcd V(dv.size());
        for (std::size_t i = 0; i < dv.size(); ++i) V(i) = dv[i];
        const double h = hsc(mc.R, mc.G, V);
        ordered_json d;
        d["direction"] = coords_json(dv);
        d["hsc"] = h;
        pt["directions"].push_back(d);
        csv << chart << ",\"";
        for (std::size_t i = 0; i < coords.size(); ++i) csv << (i ? ";" : "") << cx(coords[i]);
        csv << "\",\"";
        for (std::size_t i = 0; i < dv.size(); ++i) csv << (i ? ";" : "") << cx(dv[i]);
        csv << "\"," << h << "\n";
      }
    }
    rep["points"].push_back(pt);
  }
  write_json(c, "eval.json", rep);
  write_text(c, "eval.csv", csv.str());
  return 0;
}

// ---- lambda0 -------------------------------------------------------------------

int cmd_lambda0(Common& c) {
  const Model model = model_from_json(c.config.at("model"));
  if (!c.config.contains("bracket")) throw std::runtime_error("lambda0: config needs \"bracket\"");
  const double lo = c.config["bracket"].at(0).get<double>();
  const double hi = c.config["bracket"].at(1).get<double>();
  const double tol = c.config.value("lambda0_tol", 0.02);

  ScanOptions search = scan_options(c);
  ScanOptions verify = search;
  if (c.config.contains("verify_grid")) {
    verify.res = c.config["verify_grid"].value("res", verify.res);
    verify.fiber_res = c.config["verify_grid"].value("fiber_res", verify.fiber_res);
  }

  Lambda0Result r;
  try {
    r = find_lambda0(model, lo, hi, tol, search, verify);
  } catch (const std::invalid_argument& e) {
    std::cerr << "lambda0: " << e.what()
              << " (hint: raise the upper bracket end or refine the grid)\n";
    return 2;
  }

  ordered_json rep = report_header("lambda0", c, model.name);
  rep["bracket"] = {lo, hi};
  rep["tol"] = tol;
  rep["lambda0"] = r.lambda0;
  rep["lower_edge"] = r.lower_edge;
  rep["monotone_ok"] = r.monotone_ok;
  rep["verified"] = r.verified;
  rep["grid_note"] =
      "lambda0 is the predicate sign change on the sampled grid; monotonicity in lambda is "
      "assumed (spot-checked) and the verification scan runs at lambda0 + tol";
  rep["verification"] = {{"res", verify.res},
                         {"fiber_res", verify.fiber_res},
                         {"n_points", r.verification.n_points},
                         {"global_min_hsc", r.verification.global_min},
                         {"kahler_ok", r.verification.kahler_all_ok}};
  write_json(c, "lambda0.json", rep);

  std::ostringstream csv;
  csv << "lambda,min_hsc\n";
  auto hist = r.history;
  std::sort(hist.begin(), hist.end());
  for (const auto& [lam, v] : hist) csv << lam << "," << v << "\n";
  write_text(c, "lambda0.csv", csv.str());
  return r.verified ? 0 : 1;
}

// ---- certify --------------------------------------------------------------------

int cmd_certify(Common& c) {
  ordered_json rep;
  int rc = 0;
  const bool has_model = c.config.contains("model");
  const bool manual = c.config.contains("H0") && c.config["H0"].is_number() &&
                      c.config.contains("C") && c.config["C"].is_number();

  if (manual) {
    const double H0 = c.config["H0"].get<double>();
    const double C = c.config["C"].get<double>();
    const Certificate cert = certify_lambda(H0, C);
    rep = report_header("certify", c, has_model ? c.config["model"].dump() : "-");
    rep["H0"] = H0;
    rep["C"] = C;
    rep["lambda_star"] = cert.lambda_star;
    rep["inner_min"] = cert.inner_min;
    rep["argmin_s"] = cert.argmin_s;

    std::ostringstream csv;
    csv << "s,p_at_lambda_star\n";
    for (double s = 0.0; s <= std::max(5.0, 2.0 * cert.argmin_s); s += 0.01)
      csv << s << "," << certificate_profile(cert, cert.lambda_star, s) << "\n";
    write_text(c, "certify.csv", csv.str());
  } else if (has_model) {
    const Model model = model_from_json(c.config.at("model"));
    ConsistencyOptions opt;
    opt.scan_opts = scan_options(c);
    opt.scan_opts.keep_points = false;
    opt.base_res = c.config.value("base_res", 9);
    opt.bound_res = c.config.value("bound_res", 9);
    opt.trials = c.config.value("trials", 200);
    opt.seed = c.effective_seed();
    const CertificateConsistency cc = certificate_consistency(model, opt);

    rep = report_header("certify", c, model.name);
    rep["H0"] = cc.H0;
    rep["C"] = {{"value", cc.bound.C()},
                {"sup_curvature", cc.bound.sup_curvature},
                {"sup_nabla", cc.bound.sup_nabla},
                {"second_jet", cc.bound.second_jet},
                {"second_jet_valid", cc.bound.second_jet_valid},
                {"grid_points", cc.bound.grid_points}};
    rep["lambda_star"] = cc.cert.lambda_star;
    rep["inner_min"] = cc.cert.inner_min;
    rep["lambda0"] = {{"value", cc.lambda0.lambda0},
                      {"lower_edge", cc.lambda0.lower_edge},
                      {"verified", cc.lambda0.verified}};
    rep["checks"] = {{"lambda_star_ge_lambda0", cc.check_lambda_star_ge_lambda0},
                     {"scan_at_lambda_star_positive", cc.check_scan_positive},
                     {"final_bound", cc.bound_check.ok},
                     {"final_bound_min_slack", cc.bound_check.min_slack},
                     {"final_bound_trials", cc.bound_check.trials}};
    rep["pass"] = cc.all_ok();
    rc = cc.all_ok() ? 0 : 1;

    std::ostringstream csv;
    csv << "s,p_at_lambda_star\n";
    for (double s = 0.0; s <= std::max(5.0, 2.0 * cc.cert.argmin_s); s += 0.01)
      csv << s << "," << certificate_profile(cc.cert, cc.cert.lambda_star, s) << "\n";
    write_text(c, "certify.csv", csv.str());
  } else {
    throw std::runtime_error("certify: config needs either numeric H0 and C, or a model");
  }
  write_json(c, "certify.json", rep);
  return rc;
}

// ---- papercheck -----------------------------------------------------------------

int cmd_papercheck(Common& c) {
  std::vector<std::string> names;
  if (c.config.contains("model") && c.config["model"].is_string() &&
      c.config["model"].get<std::string>() != "catalog") {
    names.push_back(c.config["model"].get<std::string>());
  } else if (c.config.contains("model") && !c.config["model"].is_string()) {
    // custom model: report the exclusion
    const Model model = model_from_json(c.config.at("model"));
    PaperCheckOptions opt;
    const PaperCheckReport r = papercheck_model(model, opt);
    ordered_json rep = report_header("papercheck", c, model.name);
    rep["excluded"] = r.excluded;
    rep["exclusion_reason"] = r.exclusion_reason;
    rep["all_pass"] = false;
    write_json(c, "papercheck.json", rep);
    std::cout << "papercheck: model excluded: " << r.exclusion_reason << "\n";
    return 2;
  } else {
    names = {"trivial-r2", "f1", "f2", "f3", "lb-1-1", "lb-2-1", "p2-lb-1-0", "twisted"};
  }

  PaperCheckOptions opt;
  opt.lambda = c.config.value("lambda", 5.0);
  opt.seed = c.effective_seed();
  opt.decomposition_trials = c.config.value("decomposition_trials", 100);
  opt.bound_trials = c.config.value("bound_trials", 500);

  ordered_json rep = report_header("papercheck", c, names.size() == 1 ? names[0] : "catalog");
  rep["lambda"] = opt.lambda;
  rep["cases"] = ordered_json::array();
  std::ostringstream csv;
  csv << "model,identity,chart,deviation,tolerance,pass\n";

  bool all = true;
  for (const auto& name : names) {
    const Model model = catalog(name);
    const PaperCheckReport r = papercheck_model(model, opt);
    if (r.excluded) {
      all = false;
      continue;
    }
    for (const auto& cse : r.cases) {
      ordered_json cj;
      cj["model"] = cse.model;
      cj["id"] = cse.id;
      cj["chart"] = cse.chart;
      cj["deviation"] = cse.deviation;
      cj["tolerance"] = cse.tolerance;
      cj["pass"] = cse.pass();
      if (!cse.detail.empty()) cj["detail"] = cse.detail;
      rep["cases"].push_back(cj);
      csv << cse.model << "," << cse.id << "," << cse.chart << "," << cse.deviation << ","
          << cse.tolerance << "," << (cse.pass() ? 1 : 0) << "\n";
      all = all && cse.pass();
    }
  }
  rep["all_pass"] = all;
  write_json(c, "papercheck.json", rep);
  write_text(c, "papercheck.csv", csv.str());

  std::cout << (all ? "papercheck: all identities pass\n" : "papercheck: FAILURES\n");
  return all ? 0 : 1;
}

// ---- berger ----------------------------------------------------------------------

int cmd_berger(Common& c) {
  const Model model = model_from_json(c.config.at("model"));
  const double lam = c.config.value("lambda", 1.0);
  const int samples = c.config.value("samples", 100000);
  const TotalSpace ts = model.total(lam);

  int chart = 0;
  std::vector<Complex> coords(ts.manifold.charts[0].dim, Complex{0.0, 0.0});
  if (c.config.contains("points") && !c.config["points"].empty()) {
    chart = c.config["points"][0].value("chart", 0);
    coords = coords_from_json(c.config["points"][0].at("coords"));
  }

  const auto mc = metric_and_curvature_at(ts.manifold.charts[chart].potential, coords);
  const double S = scalar_curvature(mc.R, mc.G);
  const int N = mc.G.dim();
  const double target = 2.0 * S / (N * (N + 1.0));
  const SphereAverage avg = sphere_average_hsc(mc.R, mc.G, samples, c.effective_seed());
  const double z = avg.std_error > 0.0 ? (avg.mean - target) / avg.std_error : 0.0;
  const bool pass = std::abs(z) < 4.0;

  ordered_json rep = report_header("berger", c, model.name);
  rep["lambda"] = lam;
  rep["chart"] = chart;
  rep["coords"] = coords_json(coords);
  rep["samples"] = samples;
  rep["sphere_average_hsc"] = avg.mean;
  rep["std_error"] = avg.std_error;
  rep["scalar_curvature"] = S;
  rep["target_2S_over_NN1"] = target;
  rep["z_score"] = z;
  rep["pass"] = pass;
  write_json(c, "berger.json", rep);

  std::ostringstream csv;
  csv << "samples,mean,std_error,target,z\n"
      << samples << "," << avg.mean << "," << avg.std_error << "," << target << "," << z << "\n";
  write_text(c, "berger.csv", csv.str());
  std::cout << "berger: mean " << avg.mean << " target " << target << " z " << z << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature laboratory for projectivized-bundle Kahler metrics"};
  app.require_subcommand(1);

  Common c;
  auto* sc_eval = app.add_subcommand("eval", "metric, curvature and H at listed points");
  auto* sc_scan = app.add_subcommand("scan", "grid scan of min H and the Kahler check");
  auto* sc_l0 = app.add_subcommand("lambda0", "bisection search for the positivity threshold");
  auto* sc_cert = app.add_subcommand("certify", "sufficient-lambda certificate");
  auto* sc_pc = app.add_subcommand("papercheck", "verify the component formula displays");
  auto* sc_berger = app.add_subcommand("berger", "Monte Carlo check of the H average identity");
  for (auto* s : {sc_eval, sc_scan, sc_l0, sc_cert, sc_pc, sc_berger}) add_common(s, c);

  CLI11_PARSE(app, argc, argv);

  try {
    load_config(c);
    if (sc_eval->parsed()) return cmd_eval(c);
    if (sc_scan->parsed()) return cmd_scan(c);
    if (sc_l0->parsed()) return cmd_lambda0(c);
    if (sc_cert->parsed()) return cmd_certify(c);
    if (sc_pc->parsed()) return cmd_papercheck(c);
    if (sc_berger->parsed()) return cmd_berger(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
