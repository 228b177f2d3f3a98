#include "hsclab/positivity.hpp"

#include <algorithm>
#include <cmath>

#include "hsclab/parallel.hpp"

namespace hsclab {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Gradient-descent minimization of the scale-invariant quartic Rayleigh
/// quotient f(W) = Re R̃(W,W̄,W,W̄) / |W|⁴ on the Euclidean sphere.
struct FrameOptimizer {
  const CurvatureTensor& R;  // already in a G-unitary frame
  int n;
  double sign;  // +1 minimizes H, −1 minimizes −H

  double value(const Eigen::VectorXcd& w) const { return sign * R.quartic(w); }

  Eigen::VectorXcd gradient(const Eigen::VectorXcd& w, double q) const {
    // ∂q/∂W̄_e = 2 Σ R(a,e,c,d) W_a W_c conj(W_d); on the unit sphere the
    // quotient gradient is q' − 2 q W
    Eigen::VectorXcd g(n);
    for (int e = 0; e < n; ++e) {
      Complex s{0.0, 0.0};
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
          const Complex ac = w(a) * w(c);
          if (ac == Complex{0.0, 0.0}) continue;
          for (int d = 0; d < n; ++d) s += R.at(a, e, c, d) * ac * std::conj(w(d));
        }
      g(e) = sign * 2.0 * s;
    }
    return g - 2.0 * q * w;
  }

  std::pair<double, bool> run(Eigen::VectorXcd& w, double tol, int max_iters) const {
    w /= w.norm();
    double f = value(w);
    double step = 0.5;
    for (int it = 0; it < max_iters; ++it) {
      const Eigen::VectorXcd g = gradient(w, f);
      const double gn = g.norm();
      if (gn < tol) return {f, true};
      bool improved = false;
      for (int half = 0; half < 30; ++half) {
        Eigen::VectorXcd cand = w - step * g;
        const double cn = cand.norm();
        if (cn < 1e-14) {
          step *= 0.5;
          continue;
        }
        cand /= cn;
        const double fc = value(cand);
        if (fc < f - 1e-18) {
          const double delta = f - fc;
          w = cand;
          f = fc;
          improved = true;
          step *= 1.9;
          if (delta < tol * (1.0 + std::abs(f))) return {f, true};
          break;
        }
        step *= 0.5;
      }
      if (!improved) return {f, true};  // no descent direction left at resolution
    }
    return {f, false};
  }
};

/// Global minimum of x^T A x + b^T x over the unit 2-sphere (trust-region
/// subproblem, 3x3): secular-equation bisection with the hard case.
std::pair<double, Eigen::Vector3d> min_quadratic_on_sphere(const Eigen::Matrix3d& A,
                                                           const Eigen::Vector3d& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A);
  const Eigen::Vector3d lam = es.eigenvalues();
  const Eigen::Matrix3d V = es.eigenvectors();
  const Eigen::Vector3d beta = V.transpose() * (-0.5 * b);
  const double scale = std::max({1.0, lam.cwiseAbs().maxCoeff(), b.norm()});

  auto q_of = [&](const Eigen::Vector3d& x) { return x.dot(A * x) + b.dot(x); };

  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_x = V.col(0);
  auto consider = [&](const Eigen::Vector3d& x) {
    const double nx = x.norm();
    if (nx < 1e-14) return;
    const Eigen::Vector3d xu = x / nx;
    const double q = q_of(xu);
    if (q < best) {
      best = q;
      best_x = xu;
    }
  };

  // eigenvector candidates cover b = 0 and degenerate corners
  for (int i = 0; i < 3; ++i) {
    consider(V.col(i));
    consider(-V.col(i));
  }

  if (b.norm() > 1e-14 * scale) {
    const double l1 = lam(0);
    auto norm2_at = [&](double t) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double d = lam(i) - t;
        if (std::abs(d) < 1e-300) return std::numeric_limits<double>::infinity();
        s += (beta(i) / d) * (beta(i) / d);
      }
      return s;
    };
    // hard case: b orthogonal to the bottom eigenspace
    if (std::abs(beta(0)) < 1e-11 * scale) {
      Eigen::Vector3d xp = Eigen::Vector3d::Zero();
      double np2 = 0.0;
      for (int i = 1; i < 3; ++i) {
        if (lam(i) - l1 > 1e-12 * scale) {
          const double ci = beta(i) / (lam(i) - l1);
          xp += ci * V.col(i);
          np2 += ci * ci;
        }
      }
      if (np2 <= 1.0) {
        const double a1 = std::sqrt(std::max(0.0, 1.0 - np2));
        consider(xp + a1 * V.col(0));
        consider(xp - a1 * V.col(0));
      }
    }
    // secular equation on t < lambda_1: |x(t)|^2 = 1 is increasing in t
    double hi = l1 - 1e-14 * scale;
    double lo = l1 - 2.0 * scale - b.norm();
    if (norm2_at(hi) >= 1.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (norm2_at(mid) >= 1.0)
          hi = mid;
        else
          lo = mid;
        if (hi - lo < 1e-15 * scale) break;
      }
      const double t = 0.5 * (lo + hi);
      Eigen::Vector3d x = Eigen::Vector3d::Zero();
      for (int i = 0; i < 3; ++i) x += (beta(i) / (lam(i) - t)) * V.col(i);
      consider(x);
    }
  }
  return {best, best_x};
}

/// Exact direction optimum for n = 2: in a G-unitary frame the quartic is a
/// quadratic function of the Bloch vector of P = W W^H, so minimizing H over
/// directions is a 3x3 trust-region problem.
MinHscResult optimize_hsc_bloch(const CurvatureTensor& Rt, double sign) {
  // B(P,Q) = Σ R̃_{a b̄ c d̄} P(a,b) Q(c,d) is real symmetric on Hermitian P,Q
  std::array<Eigen::Matrix2cd, 4> basis;
  basis[0] = 0.5 * Eigen::Matrix2cd::Identity();
  basis[1] << 0, 0.5, 0.5, 0;
  basis[2] << 0, Complex{0, -0.5}, Complex{0, 0.5}, 0;
  basis[3] << 0.5, 0, 0, -0.5;
  auto B = [&](const Eigen::Matrix2cd& P, const Eigen::Matrix2cd& Q) {
    Complex s{0.0, 0.0};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) s += Rt.at(a, b, c, d) * P(a, b) * Q(c, d);
    return sign * s.real();
  };
  Eigen::Matrix3d A;
  Eigen::Vector3d bv;
  for (int mu = 0; mu < 3; ++mu) {
    bv(mu) = 2.0 * B(basis[0], basis[mu + 1]);
    for (int nu = 0; nu < 3; ++nu) A(mu, nu) = B(basis[mu + 1], basis[nu + 1]);
  }
  const double c0 = B(basis[0], basis[0]);
  auto [qmin, x] = min_quadratic_on_sphere(0.5 * (A + A.transpose()), bv);

  MinHscResult out;
  out.value = sign * (qmin + c0);
  out.converged = true;
  Eigen::Matrix2cd P = basis[0];
  for (int mu = 0; mu < 3; ++mu) P += x(mu) * basis[mu + 1];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(P);
  out.direction = es.eigenvectors().col(1);  // dominant eigenvector of the rank-1 projector
  return out;
}

MinHscResult optimize_hsc(const CurvatureTensor& R, const HermitianForm& G,
                          const MinHscOptions& opt, double sign) {
  if (opt.starts < 1) throw std::invalid_argument("min_hsc_at_point: starts must be >= 1");
  const int n = R.dim();
  const Eigen::MatrixXcd S = G.inverse_sqrt();
  const CurvatureTensor Rt = R.transform(S);

  if (n == 2 && !opt.force_gradient) {
    MinHscResult r = optimize_hsc_bloch(Rt, sign);
    r.direction = S * r.direction;
    return r;
  }

  FrameOptimizer fo{Rt, n, sign};

  Rng rng(opt.seed);
  MinHscResult best;
  best.value = std::numeric_limits<double>::infinity();

  auto try_start = [&](Eigen::VectorXcd w) {
    auto [f, conv] = fo.run(w, opt.tol, opt.max_iters);
    if (f < best.value) {
      best.value = f;
      best.direction = S * w;
      best.converged = conv;
    }
  };

  for (int a = 0; a < n; ++a) try_start(Eigen::VectorXcd::Unit(n, a));
  try_start(Eigen::VectorXcd::Ones(n));
  for (int s = 0; s < opt.starts; ++s) {
    Eigen::VectorXcd w = rng.complex_normal_vector(n);
    if (w.norm() < 1e-12) continue;
    try_start(std::move(w));
  }
  best.value *= sign;
  return best;
}

}  // namespace

MinHscResult min_hsc_at_point(const CurvatureTensor& R, const HermitianForm& G,
                              const MinHscOptions& opt) {
  return optimize_hsc(R, G, opt, +1.0);
}

MinHscResult max_hsc_at_point(const CurvatureTensor& R, const HermitianForm& G,
                              const MinHscOptions& opt) {
  return optimize_hsc(R, G, opt, -1.0);
}

// ---- scans -------------------------------------------------------------------

namespace {

/// Per-coordinate grid resolutions: base coordinates vs fiber coordinates.
struct MixedGrid {
  std::vector<int> res;
  double box;

  std::size_t size() const {
    std::size_t t = 1;
    for (int r : res) t *= static_cast<std::size_t>(r) * r;
    return t;
  }
  std::vector<Complex> point(std::size_t index) const {
    std::vector<Complex> p(res.size());
    std::size_t rem = index;
    for (int c = static_cast<int>(res.size()) - 1; c >= 0; --c) {
      const int rc = res[c];
      const std::size_t iy = rem % rc;
      rem /= rc;
      const std::size_t ix = rem % rc;
      rem /= rc;
      auto coord = [&](std::size_t i) {
        return rc == 1 ? 0.0 : -box + 2.0 * box * static_cast<double>(i) / (rc - 1);
      };
      p[c] = Complex{coord(ix), coord(iy)};
    }
    return p;
  }
};

MixedGrid chart_grid(const Model& model, const Chart& chart, int res, int fiber_res) {
  MixedGrid g;
  const int n_base = model.base.dim;
  for (int c = 0; c < chart.dim; ++c) g.res.push_back(c < n_base ? res : fiber_res);
  g.box = chart.box;
  return g;
}

}  // namespace

ScanReport scan(const Model& model, double lambda, const ScanOptions& opt) {
  ScanReport rep;
  rep.model = model.name;
  rep.lambda = lambda;
  rep.options = opt;

  const TotalSpace ts = model.total(lambda);
  MinHscOptions mopt;
  mopt.starts = opt.starts;
  mopt.tol = opt.tol;

  std::size_t global_index_offset = 0;
  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const Chart& chart = ts.manifold.charts[ci];
    auto jet = jet_for(chart.potential, chart.dim);
    const MixedGrid grid = chart_grid(model, chart, opt.res, opt.fiber_res);
    const std::size_t npts = grid.size();

    std::vector<PointRecord> records(npts);
    parallel_for(npts, opt.jobs, [&](std::size_t i) {
      PointRecord& pr = records[i];
      pr.chart = static_cast<int>(ci);
      pr.coords = grid.point(i);
      const auto jv = jet->full(pr.coords);
      HermitianForm G(jv.G);
      pr.metric_min_eig = G.min_eigenvalue();
      pr.kahler_ok = pr.metric_min_eig > 1e-12;
      if (!pr.kahler_ok) return;
      const CurvatureTensor R = curvature_from_jet(jv, jv.G.inverse());
      MinHscOptions po = mopt;
      po.seed = mix_seed(opt.seed, global_index_offset + i);
      const MinHscResult mn = min_hsc_at_point(R, G, po);
      pr.min_hsc = mn.value;
      pr.argmin = mn.direction;
      pr.converged = mn.converged;
      if (opt.track_max) {
        po.seed = mix_seed(opt.seed ^ 0x5555aaaa5555aaaaull, global_index_offset + i);
        pr.max_hsc = max_hsc_at_point(R, G, po).value;
      }
    });
    global_index_offset += npts;

    for (auto& pr : records) {
      ++rep.n_points;
      rep.worst_metric_eig = std::min(rep.worst_metric_eig, pr.metric_min_eig);
      if (!pr.kahler_ok) {
        rep.kahler_all_ok = false;
      } else {
        if (pr.min_hsc < rep.global_min) {
          rep.global_min = pr.min_hsc;
          rep.argmin_chart = pr.chart;
          rep.argmin_coords = pr.coords;
          rep.argmin_direction = pr.argmin;
        }
        if (opt.track_max) rep.global_max = std::max(rep.global_max, pr.max_hsc);
        rep.all_converged = rep.all_converged && pr.converged;
      }
    }
    if (opt.keep_points)
      rep.points.insert(rep.points.end(), std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.end()));
  }
  return rep;
}

KahlerCheckResult kahler_check(const Model& model, double lambda, int res, int fiber_res,
                               int jobs) {
  KahlerCheckResult out;
  const TotalSpace ts = model.total(lambda);
  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const Chart& chart = ts.manifold.charts[ci];
    auto jet = jet_for(chart.potential, chart.dim);
    const MixedGrid grid = chart_grid(model, chart, res, fiber_res);
    const std::size_t npts = grid.size();
    std::vector<double> eigs(npts);
    parallel_for(npts, jobs, [&](std::size_t i) {
      const auto pt = grid.point(i);
      eigs[i] = HermitianForm(jet->metric(pt)).min_eigenvalue();
    });
    for (std::size_t i = 0; i < npts; ++i) {
      ++out.n_points;
      if (eigs[i] < out.worst_eigenvalue) {
        out.worst_eigenvalue = eigs[i];
        out.worst_chart = static_cast<int>(ci);
        out.worst_coords = grid.point(i);
      }
    }
  }
  out.ok = out.worst_eigenvalue > 1e-12;
  return out;
}

// ---- λ₀ search ------------------------------------------------------------------

Lambda0Result find_lambda0(const Model& model, double lo, double hi, double tol,
                           const ScanOptions& search, const ScanOptions& verify) {
  if (!(lo < hi) || !(lo > 0.0)) throw std::invalid_argument("find_lambda0: need 0 < lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("find_lambda0: tol must be > 0");

  Lambda0Result out;
  out.tol = tol;

  ScanOptions sopt = search;
  sopt.keep_points = false;
  sopt.track_max = false;

  auto probe = [&](double lam) {
    ScanReport r = scan(model, lam, sopt);
    const double v = r.kahler_all_ok ? r.global_min : std::numeric_limits<double>::quiet_NaN();
    out.history.emplace_back(lam, v);
    return r.positive();
  };

  if (!probe(hi))
    throw std::invalid_argument(
        "find_lambda0: predicate false at the upper bracket end; enlarge the bracket");

  // spot check that the predicate switches sign once across the bracket
  // (min H itself need not be monotone: on the catalog it decays like 1/λ
  // after turning positive, but its sign pattern is what bisection needs)
  {
    bool mono = true;
    bool seen_true = false;
    for (int i = 0; i < 5; ++i) {
      const double lam = lo + (hi - lo) * (i + 0.5) / 5.0;
      ScanReport r = scan(model, lam, sopt);
      out.history.emplace_back(lam, r.kahler_all_ok ? r.global_min
                                                    : std::numeric_limits<double>::quiet_NaN());
      const bool pos = r.positive();
      if (seen_true && !pos) mono = false;
      seen_true = seen_true || pos;
    }
    out.monotone_ok = mono;
  }

  double a = lo, b = hi;
  if (probe(lo)) {
    out.lower_edge = true;
    out.lambda0 = lo;
  } else if (out.monotone_ok) {
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (probe(mid))
        b = mid;
      else
        a = mid;
    }
    out.lambda0 = b;
  } else {
    // linear scan fallback, then one bisection refinement inside the step
    const double step = std::max(tol, (hi - lo) / 64.0);
    double first_pos = hi;
    for (double lam = lo; lam < hi; lam += step) {
      if (probe(lam)) {
        first_pos = lam;
        break;
      }
    }
    a = std::max(lo, first_pos - step);
    b = first_pos;
    while (b - a > tol && a < b) {
      const double mid = 0.5 * (a + b);
      if (probe(mid))
        b = mid;
      else
        a = mid;
    }
    out.lambda0 = b;
  }

  // verification scan at λ₀ + tol on the fine grid, bumping upward when the
  // finer grid disagrees with the search grid
  ScanOptions vopt = verify;
  vopt.keep_points = false;
  for (int attempt = 0; attempt < 4; ++attempt) {
    out.verification = scan(model, out.lambda0 + tol, vopt);
    out.verified = out.verification.positive();
    if (out.verified) break;
    out.lambda0 += tol;
  }
  return out;
}

// ---- certificates ------------------------------------------------------------------

namespace {

/// Real roots of x³ + px + q = 0.
std::vector<double> depressed_cubic_roots(double p, double q) {
  std::vector<double> roots;
  const double disc = -4.0 * p * p * p - 27.0 * q * q;
  if (std::abs(p) < 1e-300 && std::abs(q) < 1e-300) {
    roots.push_back(0.0);
    return roots;
  }
  if (disc > 0.0) {
    // three real roots
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0));
  } else {
    // one real root (Cardano)
    const double d = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double u = std::cbrt(-q / 2.0 + d);
    const double v = std::cbrt(-q / 2.0 - d);
    roots.push_back(u + v);
  }
  return roots;
}

}  // namespace

Certificate certify_lambda(double H0, double C) {
  if (!(H0 > 0.0)) throw std::invalid_argument("certify_lambda: H0 must be > 0");
  if (C < 0.0) throw std::invalid_argument("certify_lambda: C must be >= 0");

  Certificate cert;
  cert.H0 = H0;
  cert.C = C;

  auto inner = [C](double s) { return 2.0 * s * s * s * s - 8.0 * C * s * s - 4.0 * C * s; };

  double m = 0.0;  // s = 0 boundary candidate
  double argmin = 0.0;
  if (C > 0.0) {
    // stationarity 8s³ − 16Cs − 4C = 0  ⇔  s³ − 2Cs − C/2 = 0
    for (double s : depressed_cubic_roots(-2.0 * C, -C / 2.0)) {
      if (s <= 0.0) continue;
      const double v = inner(s);
      if (v < m) {
        m = v;
        argmin = s;
      }
    }
    // dense-grid cross-check
    const double smax = std::max(10.0, 2.0 * argmin);
    double mg = 0.0;
    for (double s = 0.0; s <= smax; s += 1e-5) mg = std::min(mg, inner(s));
    if (mg < m - 1e-9 * (1.0 + std::abs(m)))
      throw std::logic_error("certify_lambda: grid found a lower inner minimum than the cubic");
    if (m < mg - 1e-4 * (1.0 + std::abs(m)) - 1e-12)
      throw std::logic_error("certify_lambda: cubic minimum not confirmed by the grid");
  }
  cert.inner_min = m;
  cert.argmin_s = argmin;
  cert.lambda_star = (C - m) / H0;
  return cert;
}

double certificate_quartic(const Certificate& cert, double lambda, double x, double u) {
  const double x2 = x * x, u2 = u * u;
  return (lambda * cert.H0 - cert.C) * x2 * x2 - 8.0 * cert.C * x2 * u2 + 2.0 * u2 * u2 -
         4.0 * cert.C * x2 * x * u;
}

double certificate_profile(const Certificate& cert, double lambda, double s) {
  return certificate_quartic(cert, lambda, 1.0, s);
}

// ---- final-bound check ---------------------------------------------------------------

FinalBoundCheck check_final_bound_at_origins(const Model& model, double lambda, double H0,
                                             double C, int trials, std::uint64_t seed) {
  if (!model.bundle) throw std::invalid_argument("check_final_bound_at_origins: bundle required");
  FinalBoundCheck out;
  const TotalSpace ts = model.total(lambda);
  const int n = model.base.dim;
  const int N = model.total_dim();
  Rng rng(seed);

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const std::vector<Complex> origin(N, Complex{0.0, 0.0});
    const auto mc = metric_and_curvature_at(ts.manifold.charts[ci].potential, origin);
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd V = rng.complex_normal_vector(N);
      const double lhs = mc.R.quartic(V);
      const double x = V.head(n).norm();
      const double u = V.tail(N - n).norm();
      const double x2 = x * x, u2 = u * u;
      const double rhs =
          (lambda * H0 - C) * x2 * x2 - 8.0 * C * x2 * u2 + 2.0 * u2 * u2 - 4.0 * C * x2 * x * u;
      const double slack = lhs - rhs;
      ++out.trials;
      if (slack < out.min_slack) {
        out.min_slack = slack;
        out.worst_chart = static_cast<int>(ci);
        out.worst_V = V;
        out.worst_lhs = lhs;
        out.worst_rhs = rhs;
      }
      const double scale = std::abs(lhs) + std::abs(rhs) + 1.0;
      if (slack < -1e-9 * scale) {
        out.ok = false;
        ++out.violations;
      }
    }
  }
  return out;
}

// ---- certificate consistency ----------------------------------------------------------

CertificateConsistency certificate_consistency(const Model& model,
                                               const ConsistencyOptions& opt) {
  if (!model.bundle) throw std::invalid_argument("certificate_consistency: bundle required");
  CertificateConsistency out;

  // H₀: minimum H of the base metric g
  Model base_only;
  base_only.name = model.base.name;
  base_only.base = model.base;
  ScanOptions bopt = opt.scan_opts;
  bopt.res = opt.base_res;
  bopt.keep_points = false;
  bopt.track_max = false;
  const ScanReport base_scan = scan(base_only, 1.0, bopt);
  if (!base_scan.positive())
    throw std::runtime_error("certificate_consistency: base model does not have positive H");
  out.H0 = base_scan.global_min;

  out.bound = bundle_bound_C(*model.bundle, model.base, opt.bound_res, opt.seed);
  out.cert = certify_lambda(out.H0, out.bound.C());
  out.lambda_used = out.cert.lambda_star > 0.0 ? out.cert.lambda_star : 1.0;

  // (i) λ* ≥ empirical λ₀ (sufficiency is not sharp); a lower-edge bracket
  // means every sampled λ already works, which cannot contradict λ*
  ScanOptions searchopt = opt.scan_opts;
  searchopt.keep_points = false;
  searchopt.track_max = false;
  const double hi = std::max(out.lambda_used * 1.5, opt.bracket_lo * 2.0);
  out.lambda0 = find_lambda0(model, opt.bracket_lo, hi, 0.02, searchopt, searchopt);
  out.check_lambda_star_ge_lambda0 =
      out.lambda0.lower_edge || out.cert.lambda_star >= out.lambda0.lambda0 - 0.02;

  // (ii) scan at λ* has positive min H
  ScanOptions sopt = opt.scan_opts;
  sopt.keep_points = false;
  sopt.track_max = false;
  out.scan_at_lambda_star = scan(model, out.lambda_used, sopt);
  out.check_scan_positive = out.scan_at_lambda_star.positive();

  // (iii) pointwise inequality at distinguished points
  out.bound_check = check_final_bound_at_origins(model, out.lambda_used, out.H0, out.bound.C(),
                                                 opt.trials, opt.seed);
  return out;
}

}  // namespace hsclab
