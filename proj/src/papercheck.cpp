#include "hsclab/papercheck.hpp"

#include <cmath>

namespace hsclab {

namespace {

/// Everything needed to evaluate the display-side expressions on one
/// projectivized chart (base chart b, deleted index α0).
struct ChartContext {
  int n = 0, r = 0;
  double lambda = 0.0;
  int chart_index = -1;
  Expr phi_g;                       // base potential, vars 1..n
  Expr phi_G;                       // total potential, vars 1..n+r
  std::vector<int> frame;           // fiber slot s (0-based) -> frame index
  std::vector<std::vector<Expr>> h; // frame-indexed h_{α β̄}(z)
  Expr h_vv;                        // Σ v_α conj(v_β) h_{α β̄}
  std::vector<Expr> h_v_slot;       // s -> h_{v β̄} with β = frame[s]
  std::vector<Expr> h_slot_v;       // s -> h_{α v̄} with α = frame[s]

  int tvar(int s) const { return n + s + 1; }  // 1-based variable of slot s

  mutable EvalContext ctx;

  Complex ev(const Expr& e, std::span<const Complex> pt) const { return ctx.evaluate(e, pt); }
  Complex dv(const Expr& e, std::initializer_list<int> hol, std::initializer_list<int> anti,
             std::span<const Complex> pt) const {
    Expr d = e;
    for (int v : hol) d = differentiate(d, v, false);
    for (int v : anti) d = differentiate(d, v, true);
    return ctx.evaluate(d, pt);
  }
};

ChartContext make_context(const Model& model, const TotalSpace& ts, int chart_index,
                          double lambda) {
  const auto& info = ts.chart_info[chart_index];
  const BundleModel& bundle = *model.bundle;
  ChartContext c;
  c.n = model.base.dim;
  c.r = bundle.rank - 1;
  c.lambda = lambda;
  c.chart_index = chart_index;
  c.phi_g = model.base.manifold.charts[info.base_chart].potential;
  c.phi_G = ts.manifold.charts[chart_index].potential;

  for (int a = 0; a <= c.r; ++a)
    if (a != info.alpha0) c.frame.push_back(a);

  const auto& h = bundle.h[info.base_chart];
  c.h.assign(c.r, std::vector<Expr>(c.r, constant(0.0)));
  for (int s = 0; s < c.r; ++s)
    for (int sp = 0; sp < c.r; ++sp) c.h[s][sp] = h[c.frame[s]][c.frame[sp]];

  auto v_comp = [&](int alpha) -> Expr {
    if (alpha == info.alpha0) return constant(1.0);
    int slot = 0;
    while (c.frame[slot] != alpha) ++slot;
    return variable(c.tvar(slot));
  };

  std::vector<Expr> terms;
  for (int a = 0; a <= c.r; ++a)
    for (int b = 0; b <= c.r; ++b)
      terms.push_back(product({v_comp(a), conjugate(v_comp(b)), h[a][b]}));
  c.h_vv = sum(std::move(terms));

  for (int sp = 0; sp < c.r; ++sp) {
    std::vector<Expr> acc;
    for (int a = 0; a <= c.r; ++a) acc.push_back(v_comp(a) * h[a][c.frame[sp]]);
    c.h_v_slot.push_back(sum(std::move(acc)));
  }
  for (int s = 0; s < c.r; ++s) {
    std::vector<Expr> acc;
    for (int b = 0; b <= c.r; ++b) acc.push_back(conjugate(v_comp(b)) * h[c.frame[s]][b]);
    c.h_slot_v.push_back(sum(std::move(acc)));
  }
  return c;
}

void require_distinguished_frame(const Model& model, const ChartContext& c,
                                 const ProjChartInfo& info) {
  const std::vector<Complex> z0(c.n, Complex{0.0, 0.0});
  EvalContext ctx;
  double dev = 0.0;
  // g(0) = Id, dg(0) = 0
  for (int i = 1; i <= c.n; ++i)
    for (int j = 1; j <= c.n; ++j) {
      Expr gij = differentiate(differentiate(c.phi_g, i, false), j, true);
      const Complex g0 = ctx.evaluate(gij, z0);
      dev = std::max(dev, std::abs(g0 - (i == j ? 1.0 : 0.0)));
      for (int k = 1; k <= c.n; ++k)
        dev = std::max(dev, std::abs(ctx.evaluate(differentiate(gij, k, false), z0)));
    }
  // h(0) = Id, dh(0) = 0, ∂∂h(0) = 0
  const BundleModel& bundle = *model.bundle;
  const auto& h = bundle.h[info.base_chart];
  for (int a = 0; a < bundle.rank; ++a)
    for (int b = 0; b < bundle.rank; ++b) {
      dev = std::max(dev, std::abs(ctx.evaluate(h[a][b], z0) - (a == b ? 1.0 : 0.0)));
      for (int i = 1; i <= c.n; ++i) {
        dev = std::max(dev, std::abs(ctx.evaluate(differentiate(h[a][b], i, false), z0)));
        for (int k = i; k <= c.n; ++k)
          dev = std::max(dev, std::abs(ctx.evaluate(
                                  differentiate(differentiate(h[a][b], i, false), k, false), z0)));
      }
    }
  // Θ^h_{w w̄}(0) diagonal for w = e_{α0}
  const auto bc = bundle_curvature_at(bundle, model.base, info.base_chart, z0,
                                      Eigen::VectorXcd::Unit(bundle.rank, info.alpha0));
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      if (i != j) dev = std::max(dev, std::abs(bc.theta_ww(i, j)));
  if (dev > 1e-9)
    throw std::runtime_error("distinguished-frame conditions violated (deviation " +
                             std::to_string(dev) + ") on chart " +
                             std::to_string(c.chart_index));
}

std::vector<Complex> origin_of(int dim) { return std::vector<Complex>(dim, Complex{0.0, 0.0}); }

}  // namespace

// ---- origin values -------------------------------------------------------------

std::vector<IdentityCase> check_origin_values(const Model& model, double lambda) {
  if (!model.bundle) throw std::invalid_argument("check_origin_values: bundle required");
  const TotalSpace ts = model.total(lambda);
  std::vector<IdentityCase> cases;

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const auto& info = ts.chart_info[ci];
    ChartContext c = make_context(model, ts, static_cast<int>(ci), lambda);
    require_distinguished_frame(model, c, info);

    const int N = c.n + c.r;
    const auto origin = origin_of(N);
    const Eigen::MatrixXcd G = metric_at(c.phi_G, origin).entries();

    const auto bc =
        bundle_curvature_at(*model.bundle, model.base, info.base_chart, origin_of(c.n),
                            Eigen::VectorXcd::Unit(model.bundle->rank, info.alpha0));

    double dev = 0.0;
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j) {
        const Complex want =
            i == j ? Complex{lambda - bc.theta_ww(i, i).real(), 0.0} : Complex{0.0, 0.0};
        dev = std::max(dev, std::abs(G(i, j) - want));
      }
    for (int i = 0; i < c.n; ++i)
      for (int s = 0; s < c.r; ++s) {
        dev = std::max(dev, std::abs(G(i, c.n + s)));
        dev = std::max(dev, std::abs(G(c.n + s, i)));
      }
    for (int s = 0; s < c.r; ++s)
      for (int sp = 0; sp < c.r; ++sp)
        dev = std::max(dev, std::abs(G(c.n + s, c.n + sp) - (s == sp ? 1.0 : 0.0)));

    IdentityCase ic;
    ic.id = "origin-values";
    ic.model = model.name;
    ic.lambda = lambda;
    ic.chart = static_cast<int>(ci);
    ic.deviation = dev;
    ic.tolerance = 1e-8;
    cases.push_back(std::move(ic));
  }
  return cases;
}

// ---- component and first-derivative displays -------------------------------------

std::vector<IdentityCase> check_first_derivatives(const Model& model, double lambda,
                                                  std::uint64_t seed) {
  if (!model.bundle) throw std::invalid_argument("check_first_derivatives: bundle required");
  const TotalSpace ts = model.total(lambda);
  std::vector<IdentityCase> cases;
  Rng rng(seed);

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    ChartContext c = make_context(model, ts, static_cast<int>(ci), lambda);
    const int N = c.n + c.r;

    double dev = 0.0;
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<Complex> pt(N);
      for (int k = 0; k < N; ++k)
        pt[k] = 0.4 * Complex{rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};

      const Complex hv = c.ev(c.h_vv, pt);
      const Complex hv2 = hv * hv, hv3 = hv2 * hv;

      // component displays
      for (int i = 1; i <= c.n; ++i)
        for (int j = 1; j <= c.n; ++j) {
          const Complex lhs = c.dv(c.phi_G, {i}, {j}, pt);
          const Complex rhs = lambda * c.dv(c.phi_g, {i}, {j}, pt) +
                              c.dv(c.h_vv, {i}, {j}, pt) / hv -
                              c.dv(c.h_vv, {i}, {}, pt) * c.dv(c.h_vv, {}, {j}, pt) / hv2;
          dev = std::max(dev, std::abs(lhs - rhs));
        }
      for (int i = 1; i <= c.n; ++i)
        for (int s = 0; s < c.r; ++s) {
          const Complex lhs = c.dv(c.phi_G, {i}, {c.tvar(s)}, pt);
          const Complex rhs = c.dv(c.h_v_slot[s], {i}, {}, pt) / hv -
                              c.dv(c.h_vv, {i}, {}, pt) * c.ev(c.h_v_slot[s], pt) / hv2;
          dev = std::max(dev, std::abs(lhs - rhs));
        }
      for (int s = 0; s < c.r; ++s)
        for (int j = 1; j <= c.n; ++j) {
          const Complex lhs = c.dv(c.phi_G, {c.tvar(s)}, {j}, pt);
          const Complex rhs = c.dv(c.h_slot_v[s], {}, {j}, pt) / hv -
                              c.dv(c.h_vv, {}, {j}, pt) * c.ev(c.h_slot_v[s], pt) / hv2;
          dev = std::max(dev, std::abs(lhs - rhs));
        }
      for (int s = 0; s < c.r; ++s)
        for (int sp = 0; sp < c.r; ++sp) {
          const Complex lhs = c.dv(c.phi_G, {c.tvar(s)}, {c.tvar(sp)}, pt);
          const Complex rhs = c.ev(c.h[s][sp], pt) / hv -
                              c.ev(c.h_slot_v[s], pt) * c.ev(c.h_v_slot[sp], pt) / hv2;
          dev = std::max(dev, std::abs(lhs - rhs));
        }

      // three representative first-derivative displays
      for (int i = 1; i <= c.n; ++i)
        for (int j = 1; j <= c.n; ++j)
          for (int k = 1; k <= c.n; ++k) {
            // G_{i j̄, k}
            const Complex lhs = c.dv(c.phi_G, {i, k}, {j}, pt);
            const Complex rhs =
                lambda * c.dv(c.phi_g, {i, k}, {j}, pt) + c.dv(c.h_vv, {i, k}, {j}, pt) / hv -
                c.dv(c.h_vv, {k}, {}, pt) * c.dv(c.h_vv, {i}, {j}, pt) / hv2 -
                c.dv(c.h_vv, {i, k}, {}, pt) * c.dv(c.h_vv, {}, {j}, pt) / hv2 -
                c.dv(c.h_vv, {i}, {}, pt) * c.dv(c.h_vv, {k}, {j}, pt) / hv2 +
                2.0 * c.dv(c.h_vv, {k}, {}, pt) * c.dv(c.h_vv, {i}, {}, pt) *
                    c.dv(c.h_vv, {}, {j}, pt) / hv3;
            dev = std::max(dev, std::abs(lhs - rhs));
          }
      for (int i = 1; i <= c.n; ++i)
        for (int s = 0; s < c.r; ++s)
          for (int k = 1; k <= c.n; ++k) {
            // G_{i β̄, k}
            const Complex lhs = c.dv(c.phi_G, {i, k}, {c.tvar(s)}, pt);
            const Complex rhs =
                c.dv(c.h_v_slot[s], {i, k}, {}, pt) / hv -
                c.dv(c.h_vv, {k}, {}, pt) * c.dv(c.h_v_slot[s], {i}, {}, pt) / hv2 -
                c.dv(c.h_vv, {i}, {}, pt) * c.dv(c.h_v_slot[s], {k}, {}, pt) / hv2 -
                c.dv(c.h_vv, {i, k}, {}, pt) * c.ev(c.h_v_slot[s], pt) / hv2 +
                2.0 * c.dv(c.h_vv, {i}, {}, pt) * c.dv(c.h_vv, {k}, {}, pt) *
                    c.ev(c.h_v_slot[s], pt) / hv3;
            dev = std::max(dev, std::abs(lhs - rhs));
          }
      for (int s = 0; s < c.r; ++s)
        for (int sp = 0; sp < c.r; ++sp)
          for (int g = 0; g < c.r; ++g) {
            // G_{α β̄, γ}
            const Complex lhs = c.dv(c.phi_G, {c.tvar(s), c.tvar(g)}, {c.tvar(sp)}, pt);
            const Complex rhs = -c.ev(c.h[s][sp], pt) * c.ev(c.h_slot_v[g], pt) / hv2 -
                                c.ev(c.h_slot_v[s], pt) * c.ev(c.h[g][sp], pt) / hv2 +
                                2.0 * c.ev(c.h_slot_v[s], pt) * c.ev(c.h_slot_v[g], pt) *
                                    c.ev(c.h_v_slot[sp], pt) / hv3;
            dev = std::max(dev, std::abs(lhs - rhs));
          }
    }

    IdentityCase ic;
    ic.id = "first-derivs";
    ic.model = model.name;
    ic.lambda = lambda;
    ic.chart = static_cast<int>(ci);
    ic.deviation = dev;
    ic.tolerance = 1e-8;
    cases.push_back(std::move(ic));
  }
  return cases;
}

// ---- second derivatives at the origin -----------------------------------------------

std::vector<IdentityCase> check_second_derivatives(const Model& model, double lambda) {
  if (!model.bundle) throw std::invalid_argument("check_second_derivatives: bundle required");
  const TotalSpace ts = model.total(lambda);
  std::vector<IdentityCase> cases;

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const auto& info = ts.chart_info[ci];
    ChartContext c = make_context(model, ts, static_cast<int>(ci), lambda);
    require_distinguished_frame(model, c, info);
    const int N = c.n + c.r;
    const auto pt = origin_of(N);

    auto push = [&](const std::string& id, double dev) {
      IdentityCase ic;
      ic.id = id;
      ic.model = model.name;
      ic.lambda = lambda;
      ic.chart = static_cast<int>(ci);
      ic.deviation = dev;
      ic.tolerance = 1e-8;
      cases.push_back(std::move(ic));
    };

    double dev = 0.0;
    for (int i = 1; i <= c.n; ++i)
      for (int j = 1; j <= c.n; ++j)
        for (int k = 1; k <= c.n; ++k)
          for (int l = 1; l <= c.n; ++l) {
            const Complex lhs = c.dv(c.phi_G, {i, k}, {j, l}, pt);
            const Complex rhs = lambda * c.dv(c.phi_g, {i, k}, {j, l}, pt) +
                                c.dv(c.h_vv, {i, k}, {j, l}, pt) -
                                c.dv(c.h_vv, {i}, {j}, pt) * c.dv(c.h_vv, {k}, {l}, pt) -
                                c.dv(c.h_vv, {i}, {l}, pt) * c.dv(c.h_vv, {k}, {j}, pt);
            dev = std::max(dev, std::abs(lhs - rhs));
          }
    push("second-derivs-ijkl", dev);

    dev = 0.0;
    for (int i = 1; i <= c.n; ++i)
      for (int j = 1; j <= c.n; ++j)
        for (int k = 1; k <= c.n; ++k)
          for (int s = 0; s < c.r; ++s) {
            const Complex lhs = c.dv(c.phi_G, {i, k}, {j, c.tvar(s)}, pt);
            const Complex rhs = c.dv(c.h_v_slot[s], {i, k}, {j}, pt);
            dev = std::max(dev, std::abs(lhs - rhs));
          }
    push("second-derivs-ijkb", dev);

    dev = 0.0;
    for (int i = 1; i <= c.n; ++i)
      for (int j = 1; j <= c.n; ++j)
        for (int s = 0; s < c.r; ++s)
          for (int sp = 0; sp < c.r; ++sp) {
            const Complex lhs = c.dv(c.phi_G, {i, c.tvar(s)}, {j, c.tvar(sp)}, pt);
            const Complex rhs = c.dv(c.h[s][sp], {i}, {j}, pt) -
                                c.ev(c.h[s][sp], pt) * c.dv(c.h_vv, {i}, {j}, pt);
            dev = std::max(dev, std::abs(lhs - rhs));
          }
    push("second-derivs-ijab", dev);

    dev = 0.0;
    for (int s = 0; s < c.r; ++s)
      for (int j = 1; j <= c.n; ++j)
        for (int g = 0; g < c.r; ++g)
          for (int l = 1; l <= c.n; ++l)
            dev = std::max(dev,
                           std::abs(c.dv(c.phi_G, {c.tvar(s), c.tvar(g)}, {j, l}, pt)));
    push("second-derivs-ajgl", dev);

    dev = 0.0;
    for (int s = 0; s < c.r; ++s)
      for (int sp = 0; sp < c.r; ++sp)
        for (int g = 0; g < c.r; ++g)
          for (int j = 1; j <= c.n; ++j)
            dev = std::max(
                dev, std::abs(c.dv(c.phi_G, {c.tvar(s), c.tvar(g)}, {c.tvar(sp), j}, pt)));
    push("second-derivs-abgj", dev);

    dev = 0.0;
    for (int s = 0; s < c.r; ++s)
      for (int sp = 0; sp < c.r; ++sp)
        for (int g = 0; g < c.r; ++g)
          for (int d = 0; d < c.r; ++d) {
            const Complex lhs = c.dv(c.phi_G, {c.tvar(s), c.tvar(g)}, {c.tvar(sp), c.tvar(d)}, pt);
            const Complex rhs = -c.ev(c.h[s][sp], pt) * c.ev(c.h[g][d], pt) -
                                c.ev(c.h[s][d], pt) * c.ev(c.h[g][sp], pt);
            dev = std::max(dev, std::abs(lhs - rhs));
          }
    push("second-derivs-abgd", dev);
  }
  return cases;
}

// ---- curvature decomposition ---------------------------------------------------------

std::vector<IdentityCase> check_curvature_decomposition(const Model& model, double lambda,
                                                        int trials, std::uint64_t seed) {
  if (!model.bundle) throw std::invalid_argument("check_curvature_decomposition: bundle required");
  const TotalSpace ts = model.total(lambda);
  std::vector<IdentityCase> cases;

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    ChartContext c = make_context(model, ts, static_cast<int>(ci), lambda);
    const int N = c.n + c.r;
    const auto origin = origin_of(N);
    auto jet = jet_for(c.phi_G, N);
    const auto jv = jet->full(origin);
    HermitianForm G(jv.G);
    const CurvatureTensor R = curvature_from_jet(jv, G.inverse());

    Rng rng(seed + ci);
    double dev = 0.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd V = rng.complex_normal_vector(N);
      Eigen::VectorXcd X = V, U = V;
      X.tail(c.r).setZero();
      U.head(c.n).setZero();

      const double lhs = R.quartic(V);
      const Complex rxxxx = R.contract(X, X, X, X);
      const Complex rxxuu = R.contract(X, X, U, U);
      const Complex ruuuu = R.contract(U, U, U, U);
      const Complex rxuxu = R.contract(X, U, X, U);
      const Complex rxxxu = R.contract(X, X, X, U);
      const Complex ruuux = R.contract(U, U, U, X);
      const double rhs = (rxxxx + 4.0 * rxxuu + ruuuu).real() +
                         2.0 * (rxuxu + 2.0 * rxxxu + 2.0 * ruuux).real();
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
      dev = std::max(dev, std::abs(lhs - rhs) / scale);

      // diagonal-point formula from raw potential derivatives
      Complex g4{0.0, 0.0};
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          for (int cc = 0; cc < N; ++cc)
            for (int d = 0; d < N; ++d)
              g4 += jv.ddG_at(a, b, cc, d) * V(a) * std::conj(V(b)) * V(cc) * std::conj(V(d));
      double gamma = 0.0;
      for (int a = 0; a < N; ++a) {
        Complex gva{0.0, 0.0};
        for (int b = 0; b < N; ++b)
          for (int cc = 0; cc < N; ++cc) gva += V(b) * V(cc) * jv.dG_at(b, a, cc);
        gamma += std::norm(gva) / jv.G(a, a).real();
      }
      const double rhs_diag = -g4.real() + gamma;
      dev = std::max(dev, std::abs(lhs - rhs_diag) / std::max({std::abs(lhs), std::abs(rhs_diag),
                                                               1e-12}));
    }

    IdentityCase ic;
    ic.id = "curvature-decomposition";
    ic.model = model.name;
    ic.lambda = lambda;
    ic.chart = static_cast<int>(ci);
    ic.deviation = dev;
    ic.tolerance = 1e-9;
    ic.detail = "relative, incl. diagonal-point formula";
    cases.push_back(std::move(ic));
  }
  return cases;
}

// ---- final bound ---------------------------------------------------------------------

std::vector<IdentityCase> check_final_bound(const Model& model, double lambda, double H0, double C,
                                            int trials, std::uint64_t seed) {
  if (!model.bundle) throw std::invalid_argument("check_final_bound: bundle required");
  const TotalSpace ts = model.total(lambda);
  std::vector<IdentityCase> cases;

  for (std::size_t ci = 0; ci < ts.manifold.charts.size(); ++ci) {
    const auto& info = ts.chart_info[ci];
    ChartContext c = make_context(model, ts, static_cast<int>(ci), lambda);
    const int N = c.n + c.r;
    const auto origin = origin_of(N);
    auto jet = jet_for(c.phi_G, N);
    const auto jv = jet->full(origin);
    const CurvatureTensor R = curvature_from_jet(jv, jv.G.inverse());

    // base curvature R^g and bundle curvature R^h at the origin
    const CurvatureTensor Rg = curvature_at(c.phi_g, origin_of(c.n));
    const auto bc = bundle_curvature_at(*model.bundle, model.base, info.base_chart,
                                        origin_of(c.n),
                                        Eigen::VectorXcd::Unit(model.bundle->rank, info.alpha0));

    // derivative tensors at the origin (constant across trials)
    std::vector<Complex> hvv4_t(static_cast<std::size_t>(c.n) * c.n * c.n * c.n);
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        for (int k = 0; k < c.n; ++k)
          for (int l = 0; l < c.n; ++l)
            hvv4_t[((static_cast<std::size_t>(i) * c.n + j) * c.n + k) * c.n + l] =
                c.dv(c.h_vv, {i + 1, k + 1}, {j + 1, l + 1}, origin);
    std::vector<Complex> hvu3_t(static_cast<std::size_t>(c.r) * c.n * c.n * c.n);
    for (int s = 0; s < c.r; ++s)
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
          for (int k = 0; k < c.n; ++k)
            hvu3_t[((static_cast<std::size_t>(s) * c.n + i) * c.n + j) * c.n + k] =
                c.dv(c.h_v_slot[s], {i + 1, k + 1}, {j + 1}, origin);

    Rng rng(seed + ci);
    double eq_dev = 0.0;
    double min_slack = std::numeric_limits<double>::infinity();
    int violations = 0;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd V = rng.complex_normal_vector(N);
      const Eigen::VectorXcd X = V.head(c.n);
      const Eigen::VectorXcd U = V.tail(c.r);
      const double x = X.norm(), u = U.norm();

      // inequality R_{V V̄ V V̄} ≥ q(|X|,|U|)
      const double lhs = R.quartic(V);
      const double rhs = (lambda * H0 - C) * x * x * x * x - 8.0 * C * x * x * u * u +
                         2.0 * u * u * u * u - 4.0 * C * x * x * x * u;
      const double slack = lhs - rhs;
      min_slack = std::min(min_slack, slack);
      if (slack < -1e-9 * (std::abs(lhs) + std::abs(rhs) + 1.0)) ++violations;

      // expansion equality for −G_{V V̄, V V̄}
      Complex g4{0.0, 0.0};
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          for (int cc = 0; cc < N; ++cc)
            for (int d = 0; d < N; ++d)
              g4 += jv.ddG_at(a, b, cc, d) * V(a) * std::conj(V(b)) * V(cc) * std::conj(V(d));
      const double lhs_eq = -g4.real();

      const double rg_xxxx = Rg.contract(X, X, X, X).real();
      Complex hvv4{0.0, 0.0};
      Complex hvu3{0.0, 0.0};
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
          for (int k = 0; k < c.n; ++k) {
            for (int l = 0; l < c.n; ++l)
              hvv4 += hvv4_t[((static_cast<std::size_t>(i) * c.n + j) * c.n + k) * c.n + l] *
                      X(i) * std::conj(X(j)) * X(k) * std::conj(X(l));
            for (int s = 0; s < c.r; ++s)
              hvu3 += hvu3_t[((static_cast<std::size_t>(s) * c.n + i) * c.n + j) * c.n + k] *
                      std::conj(U(s)) * X(i) * std::conj(X(j)) * X(k);
          }
      Complex rh_vvxx{0.0, 0.0};
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) rh_vvxx += bc.theta_ww(i, j) * X(i) * std::conj(X(j));
      Complex rh_uuxx{0.0, 0.0};
      for (int s = 0; s < c.r; ++s)
        for (int sp = 0; sp < c.r; ++sp)
          for (int i = 0; i < c.n; ++i)
            for (int j = 0; j < c.n; ++j)
              rh_uuxx += bc.R_at(c.frame[s], c.frame[sp], i, j) * U(s) * std::conj(U(sp)) * X(i) *
                         std::conj(X(j));

      const double rhs_eq = lambda * rg_xxxx - hvv4.real() +
                            2.0 * rh_vvxx.real() * rh_vvxx.real() +
                            4.0 * (rh_uuxx.real() - u * u * rh_vvxx.real()) +
                            2.0 * u * u * u * u - 4.0 * hvu3.real();
      const double scale = std::max({std::abs(lhs_eq), std::abs(rhs_eq), 1e-12});
      eq_dev = std::max(eq_dev, std::abs(lhs_eq - rhs_eq) / scale);
    }

    IdentityCase ic;
    ic.id = "final-bound";
    ic.model = model.name;
    ic.lambda = lambda;
    ic.chart = static_cast<int>(ci);
    ic.deviation = violations > 0 ? std::max(0.0, -min_slack) : eq_dev;
    ic.tolerance = 1e-8;
    ic.detail = "min slack " + std::to_string(min_slack) + ", expansion dev " +
                std::to_string(eq_dev);
    cases.push_back(std::move(ic));
  }
  return cases;
}

// ---- driver -------------------------------------------------------------------------

PaperCheckReport papercheck_model(const Model& model, const PaperCheckOptions& opt) {
  PaperCheckReport rep;
  rep.model = model.name;
  rep.lambda = opt.lambda;
  if (!model.bundle) {
    rep.excluded = true;
    rep.exclusion_reason = "base-only model: the displays concern projectivized bundles";
    return rep;
  }
  if (!model.distinguished_frame_ok) {
    rep.excluded = true;
    rep.exclusion_reason =
        "custom model: the holomorphic second-order gauge at the origin is not constructed, so "
        "the distinguished-point identities do not apply";
    return rep;
  }

  // H0 from the base scan, C from the bundle bound
  Model base_only;
  base_only.name = model.base.name;
  base_only.base = model.base;
  ScanOptions bopt;
  bopt.res = opt.base_res;
  bopt.fiber_res = opt.base_res;
  bopt.starts = 12;
  bopt.keep_points = false;
  bopt.track_max = false;
  bopt.seed = opt.seed;
  const ScanReport base_scan = scan(base_only, 1.0, bopt);
  rep.H0 = base_scan.global_min;
  rep.C = bundle_bound_C(*model.bundle, model.base, opt.bound_res, opt.seed).C();

  auto append = [&](std::vector<IdentityCase> v) {
    rep.cases.insert(rep.cases.end(), std::make_move_iterator(v.begin()),
                     std::make_move_iterator(v.end()));
  };
  append(check_origin_values(model, opt.lambda));
  append(check_first_derivatives(model, opt.lambda, opt.seed));
  append(check_second_derivatives(model, opt.lambda));
  append(check_curvature_decomposition(model, opt.lambda, opt.decomposition_trials, opt.seed));
  append(check_final_bound(model, opt.lambda, rep.H0, rep.C, opt.bound_trials, opt.seed));
  return rep;
}

}  // namespace hsclab
