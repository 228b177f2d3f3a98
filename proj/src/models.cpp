#include "hsclab/models.hpp"

#include <algorithm>
#include <cmath>

#include "hsclab/parallel.hpp"

namespace hsclab {

namespace {

/// Remap variable indices k -> k + offset.
Expr shift_vars(const Expr& e, int offset) {
  if (offset == 0) return e;
  switch (e->kind) {
    case ExprKind::Constant:
      return e;
    case ExprKind::Var:
      return variable(e->var + offset);
    case ExprKind::ConjVar:
      return conj_variable(e->var + offset);
    default: {
      std::vector<Expr> kids;
      kids.reserve(e->kids.size());
      for (auto& k : e->kids) kids.push_back(shift_vars(k, offset));
      switch (e->kind) {
        case ExprKind::Sum: return sum(std::move(kids));
        case ExprKind::Product: return product(std::move(kids));
        case ExprKind::IntPower: return ipow(kids[0], e->exponent);
        case ExprKind::Log: return log(kids[0]);
        case ExprKind::Conj: return conjugate(kids[0]);
        default: throw std::logic_error("shift_vars: unreachable");
      }
    }
  }
}

/// 1-based position of homogeneous index j among {0..n}\{k}, ascending.
int fs_pos(int k, int j) { return j < k ? j + 1 : j; }

Expr fs_potential(int n) {
  std::vector<Expr> terms{constant(1.0)};
  for (int i = 1; i <= n; ++i) terms.push_back(variable(i) * conj_variable(i));
  return log(sum(std::move(terms)));
}

}  // namespace

// ---- transitions -------------------------------------------------------------

std::vector<Complex> ChartTransition::apply(std::span<const Complex> point) const {
  EvalContext ctx;
  std::vector<Complex> out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) out[i] = ctx.evaluate(components[i], point);
  return out;
}

Eigen::MatrixXcd ChartTransition::jacobian(std::span<const Complex> point) const {
  const int m = static_cast<int>(components.size());
  const int n = static_cast<int>(point.size());
  Eigen::MatrixXcd J(m, n);
  EvalContext ctx;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      J(i, j) = ctx.evaluate(differentiate(components[i], j + 1, false), point);
  return J;
}

// ---- base models ---------------------------------------------------------------

BaseModel fubini_study(int n) {
  if (n < 1) throw std::invalid_argument("fubini_study: n must be >= 1");
  BaseModel m;
  m.name = "P" + std::to_string(n);
  m.kind = "fubini_study";
  m.dim = n;
  m.manifold.dim = n;
  for (int k = 0; k <= n; ++k)
    m.manifold.charts.push_back({"c" + std::to_string(k), n, fs_potential(n), 2.0});
  for (int k = 0; k <= n; ++k)
    for (int l = 0; l <= n; ++l) {
      if (k == l) continue;
      ChartTransition t;
      t.from = k;
      t.to = l;
      const Expr inv_l = ipow(variable(fs_pos(k, l)), -1);
      for (int j = 0; j <= n; ++j) {
        if (j == l) continue;
        t.components.push_back(j == k ? inv_l : variable(fs_pos(k, j)) * inv_l);
      }
      m.manifold.transitions.push_back(std::move(t));
    }
  return m;
}

BaseModel fubini_study_chart0(int n) {
  BaseModel m = fubini_study(n);
  m.name = "P" + std::to_string(n) + "-chart0";
  m.manifold.charts.resize(1);
  m.manifold.charts[0].box = 1.0;
  m.manifold.transitions.clear();
  return m;
}

BaseModel flat_space(int n) {
  if (n < 1) throw std::invalid_argument("flat_space: n must be >= 1");
  BaseModel m;
  m.name = "flat" + std::to_string(n);
  m.kind = "flat";
  m.dim = n;
  m.manifold.dim = n;
  std::vector<Expr> terms;
  for (int i = 1; i <= n; ++i) terms.push_back(variable(i) * conj_variable(i));
  m.manifold.charts.push_back({"c0", n, sum(std::move(terms)), 2.0});
  return m;
}

BaseModel product(const BaseModel& a, const BaseModel& b) {
  BaseModel m;
  m.name = a.name + "x" + b.name;
  m.kind = "product";
  m.dim = a.dim + b.dim;
  m.manifold.dim = m.dim;
  const int na = static_cast<int>(a.manifold.charts.size());
  const int nb = static_cast<int>(b.manifold.charts.size());
  auto idx = [nb](int i, int j) { return i * nb + j; };
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const Chart& ca = a.manifold.charts[i];
      const Chart& cb = b.manifold.charts[j];
      Chart c;
      c.name = ca.name + "x" + cb.name;
      c.dim = m.dim;
      c.potential = ca.potential + shift_vars(cb.potential, a.dim);
      c.box = std::max(ca.box, cb.box);
      m.manifold.charts.push_back(std::move(c));
    }
  for (const auto& t : a.manifold.transitions)
    for (int j = 0; j < nb; ++j) {
      ChartTransition pt;
      pt.from = idx(t.from, j);
      pt.to = idx(t.to, j);
      pt.components = t.components;
      for (int q = 1; q <= b.dim; ++q) pt.components.push_back(variable(a.dim + q));
      m.manifold.transitions.push_back(std::move(pt));
    }
  for (const auto& t : b.manifold.transitions)
    for (int i = 0; i < na; ++i) {
      ChartTransition pt;
      pt.from = idx(i, t.from);
      pt.to = idx(i, t.to);
      for (int q = 1; q <= a.dim; ++q) pt.components.push_back(variable(q));
      for (const auto& comp : t.components) pt.components.push_back(shift_vars(comp, a.dim));
      m.manifold.transitions.push_back(std::move(pt));
    }
  return m;
}

// ---- bundles --------------------------------------------------------------------

BundleModel line_bundle_sum(const BaseModel& base, const std::vector<int>& degrees) {
  if (base.kind != "fubini_study")
    throw std::invalid_argument("line_bundle_sum: base must be a Fubini-Study model");
  if (degrees.empty()) throw std::invalid_argument("line_bundle_sum: need at least one degree");
  const int rank = static_cast<int>(degrees.size());
  const int n = base.dim;

  BundleModel bm;
  bm.kind = "line_bundle_sum";
  bm.degrees = degrees;
  bm.rank = rank;
  bm.name = "O(";
  for (std::size_t i = 0; i < degrees.size(); ++i)
    bm.name += (i ? "," : "") + std::to_string(degrees[i]);
  bm.name += ")/" + base.name;

  std::vector<Expr> norm_terms{constant(1.0)};
  for (int i = 1; i <= n; ++i) norm_terms.push_back(variable(i) * conj_variable(i));
  const Expr one_plus = sum(std::move(norm_terms));

  for (std::size_t c = 0; c < base.manifold.charts.size(); ++c) {
    std::vector<std::vector<Expr>> h(rank, std::vector<Expr>(rank, constant(0.0)));
    for (int a = 0; a < rank; ++a) h[a][a] = ipow(one_plus, -degrees[a]);
    bm.h.push_back(std::move(h));
  }
  for (const auto& t : base.manifold.transitions) {
    BundleModel::Cocycle co;
    co.from = t.from;
    co.to = t.to;
    co.A.assign(rank, std::vector<Expr>(rank, constant(0.0)));
    const Expr zl = variable(fs_pos(t.from, t.to));
    for (int a = 0; a < rank; ++a) co.A[a][a] = ipow(zl, -degrees[a]);
    bm.cocycles.push_back(std::move(co));
  }
  return bm;
}

BundleModel twisted_local_bundle(double epsilon) {
  BundleModel bm;
  bm.kind = "custom";
  bm.name = "twisted(eps=" + std::to_string(epsilon) + ")";
  bm.rank = 2;
  std::vector<Expr> norm_terms{constant(1.0), variable(1) * conj_variable(1)};
  const Expr one_plus = sum(std::move(norm_terms));
  const Expr off = constant(epsilon) * variable(1) * variable(1) * conj_variable(1);
  std::vector<std::vector<Expr>> h(2, std::vector<Expr>(2, constant(0.0)));
  h[0][0] = ipow(one_plus, -1);
  h[0][1] = off;
  h[1][0] = conjugate(off);
  h[1][1] = constant(1.0);
  bm.h.push_back(std::move(h));
  return bm;
}

// ---- projectivization -------------------------------------------------------------

namespace {

/// Fiber coordinate slot (1..r) of frame index alpha != alpha0.
int fiber_slot(int alpha0, int alpha) { return alpha < alpha0 ? alpha + 1 : alpha; }

Expr v_component(int alpha, int alpha0, int n) {
  if (alpha == alpha0) return constant(1.0);
  return variable(n + fiber_slot(alpha0, alpha));
}

}  // namespace

Expr proj_chart_potential(const BaseModel& base, const BundleModel& bundle, int base_chart,
                          int alpha0, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("proj_chart_potential: lambda must be > 0");
  if (base_chart < 0 || base_chart >= static_cast<int>(bundle.h.size()))
    throw std::invalid_argument("proj_chart_potential: no bundle data for this chart");
  if (alpha0 < 0 || alpha0 >= bundle.rank)
    throw std::invalid_argument("proj_chart_potential: alpha0 out of range");
  const int n = base.dim;
  const auto& h = bundle.h[base_chart];

  std::vector<Expr> terms;
  for (int a = 0; a < bundle.rank; ++a)
    for (int b = 0; b < bundle.rank; ++b)
      terms.push_back(
          product({v_component(a, alpha0, n), conjugate(v_component(b, alpha0, n)), h[a][b]}));
  const Expr h_vv = sum(std::move(terms));
  return constant(lambda) * base.manifold.charts[base_chart].potential + log(h_vv);
}

TotalSpace projectivize(const BaseModel& base, const BundleModel& bundle, double lambda) {
  const int n = base.dim;
  const int r = bundle.rank - 1;
  const int n_base_charts = static_cast<int>(bundle.h.size());
  if (n_base_charts > static_cast<int>(base.manifold.charts.size()))
    throw std::invalid_argument("projectivize: more bundle charts than base charts");

  TotalSpace ts;
  ts.manifold.dim = n + r;
  auto idx = [r](int b, int a0) { return b * (r + 1) + a0; };

  for (int b = 0; b < n_base_charts; ++b)
    for (int a0 = 0; a0 <= r; ++a0) {
      Chart c;
      c.name = base.manifold.charts[b].name + "-a" + std::to_string(a0);
      c.dim = n + r;
      c.potential = proj_chart_potential(base, bundle, b, a0, lambda);
      c.box = base.manifold.charts[b].box;
      ts.manifold.charts.push_back(std::move(c));
      ts.chart_info.push_back({b, a0});
    }

  // fiber chart changes: renormalize v by its alpha0'-component
  for (int b = 0; b < n_base_charts; ++b)
    for (int a0 = 0; a0 <= r; ++a0)
      for (int a1 = 0; a1 <= r; ++a1) {
        if (a0 == a1) continue;
        ChartTransition t;
        t.from = idx(b, a0);
        t.to = idx(b, a1);
        for (int i = 1; i <= n; ++i) t.components.push_back(variable(i));
        const Expr inv = ipow(v_component(a1, a0, n), -1);
        for (int g = 0; g <= r; ++g) {
          if (g == a1) continue;
          t.components.push_back(v_component(g, a0, n) * inv);
        }
        ts.manifold.transitions.push_back(std::move(t));
      }

  // base chart changes through the bundle cocycle, keeping alpha0
  for (const auto& co : bundle.cocycles) {
    const ChartTransition* bt = nullptr;
    for (const auto& t : base.manifold.transitions)
      if (t.from == co.from && t.to == co.to) {
        bt = &t;
        break;
      }
    if (!bt) continue;
    if (co.from >= n_base_charts || co.to >= n_base_charts) continue;
    for (int a0 = 0; a0 <= r; ++a0) {
      ChartTransition t;
      t.from = idx(co.from, a0);
      t.to = idx(co.to, a0);
      t.components = bt->components;
      std::vector<Expr> vprime(r + 1);
      for (int g = 0; g <= r; ++g) {
        std::vector<Expr> acc;
        for (int bta = 0; bta <= r; ++bta)
          acc.push_back(co.A[g][bta] * v_component(bta, a0, n));
        vprime[g] = sum(std::move(acc));
      }
      const Expr inv = ipow(vprime[a0], -1);
      for (int g = 0; g <= r; ++g) {
        if (g == a0) continue;
        t.components.push_back(vprime[g] * inv);
      }
      ts.manifold.transitions.push_back(std::move(t));
    }
  }
  return ts;
}

TotalSpace Model::total(double lambda) const {
  if (bundle) return projectivize(base, *bundle, lambda);
  return TotalSpace{base.manifold, {}};
}

// ---- catalog ----------------------------------------------------------------------

Model catalog(const std::string& name) {
  Model m;
  m.name = name;
  m.distinguished_frame_ok = true;
  if (name == "p1" || name == "p2" || name == "p3") {
    m.base = fubini_study(name[1] - '0');
    return m;
  }
  if (name == "flat1" || name == "flat2") {
    m.base = flat_space(name[4] - '0');
    m.distinguished_frame_ok = false;
    return m;
  }
  if (name == "p1xp1") {
    m.base = product(fubini_study(1), fubini_study(1));
    return m;
  }
  if (name == "p1xp2") {
    m.base = product(fubini_study(1), fubini_study(2));
    return m;
  }
  if (name == "f0" || name == "f1" || name == "f2" || name == "f3" || name == "trivial-r2") {
    const int a = name == "trivial-r2" ? 0 : name[1] - '0';
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {a, 0});
    return m;
  }
  if (name == "lb-1-1") {
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {1, 1});
    return m;
  }
  if (name == "lb-2-1") {
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {2, 1});
    return m;
  }
  if (name == "lb-2-1-0") {
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {2, 1, 0});
    return m;
  }
  if (name == "p2-lb-1-0") {
    m.base = fubini_study(2);
    m.bundle = line_bundle_sum(m.base, {1, 0});
    return m;
  }
  if (name == "twisted") {
    m.base = fubini_study_chart0(1);
    m.bundle = twisted_local_bundle();
    return m;
  }
  if (name == "rank1-trivial") {
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {0});
    return m;
  }
  if (name == "rank1-deg1") {
    m.base = fubini_study(1);
    m.bundle = line_bundle_sum(m.base, {1});
    return m;
  }
  throw std::invalid_argument("unknown catalog model '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"p1",      "p2",     "p3",     "p1xp1",  "p1xp2",    "flat1",
          "flat2",   "f0",     "f1",     "f2",     "f3",       "trivial-r2",
          "lb-1-1",  "lb-2-1", "lb-2-1-0", "p2-lb-1-0", "twisted",
          "rank1-trivial", "rank1-deg1"};
}

// ---- bundle jets -------------------------------------------------------------------

BundleJet::BundleJet(const std::vector<std::vector<Expr>>& h_entries, int n)
    : n_(n), rank_(static_cast<int>(h_entries.size())) {
  std::vector<Expr> roots;
  auto push = [&](int which, int a, int b, int i, int k, int j, int l, Expr e) {
    slots_.push_back({which, a, b, i, k, j, l});
    roots.push_back(std::move(e));
  };
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b) {
      const Expr& e = h_entries[a][b];
      push(0, a, b, 0, 0, 0, 0, e);
      std::vector<Expr> d1(n);
      for (int i = 0; i < n; ++i) {
        d1[i] = differentiate(e, i + 1, false);
        push(1, a, b, i, 0, 0, 0, d1[i]);
      }
      for (int j = 0; j < n; ++j) push(2, a, b, 0, 0, j, 0, differentiate(e, j + 1, true));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          push(3, a, b, i, 0, j, 0, differentiate(d1[i], j + 1, true));
      for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
          Expr d2 = differentiate(d1[i], k + 1, false);
          push(4, a, b, i, k, 0, 0, d2);
          std::vector<Expr> d21j(n);
          for (int j = 0; j < n; ++j) {
            d21j[j] = differentiate(d2, j + 1, true);
            push(5, a, b, i, k, j, 0, d21j[j]);
          }
          for (int j = 0; j < n; ++j)
            for (int l = j; l < n; ++l)
              push(6, a, b, i, k, j, l, differentiate(d21j[j], l + 1, true));
        }
    }
  tape_ = std::make_unique<CompiledExprSet>(roots);
}

BundleJet::Values BundleJet::eval(std::span<const Complex> z) const {
  std::vector<Complex> out(slots_.size());
  std::vector<Complex> scratch;
  tape_->eval(z, out, scratch);

  Values v;
  v.n = n_;
  v.rank = rank_;
  const std::size_t e2 = static_cast<std::size_t>(rank_) * rank_;
  const std::size_t n = n_;
  v.h.assign(e2, {});
  v.d10.assign(e2 * n, {});
  v.d01.assign(e2 * n, {});
  v.d11.assign(e2 * n * n, {});
  v.d20.assign(e2 * n * n, {});
  v.d21.assign(e2 * n * n * n, {});
  v.d22.assign(e2 * n * n * n * n, {});

  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const Slot& sl = slots_[s];
    const std::size_t e = static_cast<std::size_t>(sl.a) * rank_ + sl.b;
    const Complex val = out[s];
    switch (sl.which) {
      case 0: v.h[e] = val; break;
      case 1: v.d10[e * n + sl.i] = val; break;
      case 2: v.d01[e * n + sl.j] = val; break;
      case 3: v.d11[(e * n + sl.i) * n + sl.j] = val; break;
      case 4:
        v.d20[(e * n + sl.i) * n + sl.k] = val;
        v.d20[(e * n + sl.k) * n + sl.i] = val;
        break;
      case 5:
        v.d21[((e * n + sl.i) * n + sl.k) * n + sl.j] = val;
        v.d21[((e * n + sl.k) * n + sl.i) * n + sl.j] = val;
        break;
      case 6:
        v.d22[(((e * n + sl.i) * n + sl.k) * n + sl.j) * n + sl.l] = val;
        v.d22[(((e * n + sl.k) * n + sl.i) * n + sl.j) * n + sl.l] = val;
        v.d22[(((e * n + sl.i) * n + sl.k) * n + sl.l) * n + sl.j] = val;
        v.d22[(((e * n + sl.k) * n + sl.i) * n + sl.l) * n + sl.j] = val;
        break;
      default: throw std::logic_error("BundleJet: unreachable");
    }
  }
  return v;
}

// ---- bundle curvature ---------------------------------------------------------------

namespace {

/// Lowered Chern curvature from jet values at a point.
std::vector<Complex> curvature_components(const BundleJet::Values& jv,
                                          const Eigen::MatrixXcd& Hinv) {
  const int r = jv.rank, n = jv.n;
  std::vector<Complex> R(static_cast<std::size_t>(r) * r * n * n);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Complex gamma{0.0, 0.0};
          for (int g = 0; g < r; ++g)
            for (int d = 0; d < r; ++d)
              gamma += Hinv(g, d) * jv.d10_at(a, g, i) * std::conj(jv.d10_at(b, d, j));
          R[((static_cast<std::size_t>(a) * r + b) * n + i) * n + j] =
              -jv.d11_at(a, b, i, j) + gamma;
        }
  return R;
}

Eigen::MatrixXcd h_matrix(const BundleJet::Values& jv) {
  Eigen::MatrixXcd H(jv.rank, jv.rank);
  for (int a = 0; a < jv.rank; ++a)
    for (int b = 0; b < jv.rank; ++b) H(a, b) = jv.h_at(a, b);
  return H;
}

}  // namespace

BundleCurvature bundle_curvature_at(const BundleModel& bundle, const BaseModel& base, int chart,
                                    std::span<const Complex> z, const Eigen::VectorXcd& w) {
  if (chart < 0 || chart >= static_cast<int>(bundle.h.size()))
    throw std::invalid_argument("bundle_curvature_at: chart out of range");
  const int n = base.dim;
  BundleJet jet(bundle.h[chart], n);
  const auto jv = jet.eval(z);

  const Eigen::MatrixXcd H = h_matrix(jv);
  HermitianForm hf(H);
  const Eigen::MatrixXcd Hinv = hf.inverse();

  BundleCurvature bc;
  bc.n = n;
  bc.rank = bundle.rank;
  bc.R = curvature_components(jv, Hinv);

  // h-unit normalization of w
  const double wn = hf.norm_sq(w);
  if (!(wn > 0.0)) throw std::invalid_argument("bundle_curvature_at: w has nonpositive h-norm");
  const Eigen::VectorXcd wu = w / std::sqrt(wn);

  bc.theta_ww.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s{0.0, 0.0};
      for (int a = 0; a < bundle.rank; ++a)
        for (int b = 0; b < bundle.rank; ++b)
          s += bc.R_at(a, b, i, j) * wu(a) * std::conj(wu(b));
      bc.theta_ww(i, j) = s;
    }

  // eigenvalues relative to the base metric
  const Eigen::MatrixXcd G = jet_for(base.manifold.charts[chart].potential, n)->metric(z);
  const Eigen::MatrixXcd Sg = HermitianForm(G).inverse_sqrt();
  Eigen::MatrixXcd rel = Sg.transpose() * bc.theta_ww * Sg.conjugate();
  rel = 0.5 * (rel + rel.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rel, Eigen::EigenvaluesOnly);
  bc.xi = es.eigenvalues();
  return bc;
}

// ---- bundle bound -------------------------------------------------------------------

BundleBound bundle_bound_C(const BundleModel& bundle, const BaseModel& base, int res,
                           std::uint64_t seed) {
  if (res < 1) throw std::invalid_argument("bundle_bound_C: res must be >= 1");
  const int n = base.dim;
  const int r = bundle.rank;
  BundleBound out;

  for (std::size_t chart = 0; chart < bundle.h.size(); ++chart) {
    BundleJet jet(bundle.h[chart], n);
    auto base_jet = jet_for(base.manifold.charts[chart].potential, n);
    const GridSpec grid(n, res, base.manifold.charts[chart].box);

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const auto z = grid.point(gi);
      const auto jv = jet.eval(z);
      const auto bjv = base_jet->full(z);

      const Eigen::MatrixXcd H = h_matrix(jv);
      HermitianForm hf(H);
      HermitianForm gf(bjv.G);
      if (hf.min_eigenvalue() < 1e-12 || gf.min_eigenvalue() < 1e-12) continue;
      const Eigen::MatrixXcd Hinv = H.inverse();
      const Eigen::MatrixXcd Ginv = bjv.G.inverse();
      const Eigen::MatrixXcd Sh = hf.inverse_sqrt();
      const Eigen::MatrixXcd Sg = gf.inverse_sqrt();

      const auto R = curvature_components(jv, Hinv);
      auto R_at = [&](int a, int b, int i, int j) {
        return R[((static_cast<std::size_t>(a) * r + b) * n + i) * n + j];
      };
      ++out.grid_points;

      // unitary-frame curvature components
      for (int at = 0; at < r; ++at)
        for (int bt = 0; bt < r; ++bt)
          for (int it = 0; it < n; ++it)
            for (int jt = 0; jt < n; ++jt) {
              Complex s{0.0, 0.0};
              for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                      s += R_at(a, b, i, j) * Sh(a, at) * std::conj(Sh(b, bt)) * Sg(i, it) *
                           std::conj(Sg(j, jt));
              out.sup_curvature = std::max(out.sup_curvature, std::abs(s));
            }

      // ∂_k of the curvature, then the Chern-connection correction
      std::vector<Eigen::MatrixXcd> dH(n), omega(n), gammaG(n), dHinv(n);
      for (int k = 0; k < n; ++k) {
        dH[k].resize(r, r);
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) dH[k](a, b) = jv.d10_at(a, b, k);
        omega[k] = Hinv.transpose() * dH[k].transpose();
        dHinv[k] = -Hinv * dH[k] * Hinv;
        gammaG[k].resize(n, n);  // gammaG[k](p,i) = Γ^p_{k i}, ∇g = 0 pins it
        for (int p = 0; p < n; ++p)
          for (int i = 0; i < n; ++i) {
            Complex s{0.0, 0.0};
            for (int q = 0; q < n; ++q) s += Ginv(q, p) * bjv.dG_at(i, q, k);
            gammaG[k](p, i) = s;
          }
      }

      std::vector<Complex> nablaR(static_cast<std::size_t>(r) * r * n * n * n);
      auto nr_idx = [&](int a, int b, int i, int j, int k) {
        return (((static_cast<std::size_t>(a) * r + b) * n + i) * n + j) * n + k;
      };
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k) {
                // ∂_k R_{a b̄ i j̄}
                Complex dR = -jv.d21_at(a, b, i, k, j);
                for (int g = 0; g < r; ++g)
                  for (int d = 0; d < r; ++d) {
                    dR += dHinv[k](g, d) * jv.d10_at(a, g, i) * std::conj(jv.d10_at(b, d, j));
                    dR += Hinv(g, d) * jv.d20_at(a, g, i, k) * std::conj(jv.d10_at(b, d, j));
                    dR += Hinv(g, d) * jv.d10_at(a, g, i) * std::conj(jv.d11_at(b, d, j, k));
                  }
                // connection corrections
                Complex corr{0.0, 0.0};
                for (int g = 0; g < r; ++g) corr += omega[k](g, a) * R_at(g, b, i, j);
                for (int p = 0; p < n; ++p) corr += gammaG[k](p, i) * R_at(a, b, p, j);
                nablaR[nr_idx(a, b, i, j, k)] = dR - corr;
              }

      // unitary frames for ∇R (five slots)
      for (int at = 0; at < r; ++at)
        for (int bt = 0; bt < r; ++bt)
          for (int it = 0; it < n; ++it)
            for (int jt = 0; jt < n; ++jt)
              for (int kt = 0; kt < n; ++kt) {
                Complex s{0.0, 0.0};
                for (int a = 0; a < r; ++a)
                  for (int b = 0; b < r; ++b)
                    for (int i = 0; i < n; ++i)
                      for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k)
                          s += nablaR[nr_idx(a, b, i, j, k)] * Sh(a, at) * std::conj(Sh(b, bt)) *
                               Sg(i, it) * std::conj(Sg(j, jt)) * Sg(k, kt);
                out.sup_nabla = std::max(out.sup_nabla, std::abs(s));
              }
    }

    // distinguished-point fourth-order term; requires the frame conditions
    // h(0)=Id, dh(0)=0, ∂∂h(0)=0 and g(0)=Id, dg(0)=0 in this chart
    {
      const std::vector<Complex> z0(n, Complex{0.0, 0.0});
      const auto jv = jet.eval(z0);
      const auto bjv = base_jet->full(z0);
      double gauge_dev = (h_matrix(jv) - Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff();
      gauge_dev = std::max(gauge_dev,
                           (bjv.G - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());
      for (const auto& v : jv.d10) gauge_dev = std::max(gauge_dev, std::abs(v));
      for (const auto& v : jv.d20) gauge_dev = std::max(gauge_dev, std::abs(v));
      for (const auto& v : bjv.dG) gauge_dev = std::max(gauge_dev, std::abs(v));
      if (gauge_dev < 1e-9) {
        const auto R = curvature_components(jv, h_matrix(jv).inverse());
        auto R_at = [&](int a, int b, int i, int j) {
          return R[((static_cast<std::size_t>(a) * r + b) * n + i) * n + j];
        };
        Rng rng(seed + chart);
        std::vector<Eigen::VectorXcd> ws, xs;
        for (int a = 0; a < r; ++a) ws.push_back(Eigen::VectorXcd::Unit(r, a));
        for (int i = 0; i < n; ++i) xs.push_back(Eigen::VectorXcd::Unit(n, i));
        // line probes between basis pairs; for diagonal bundles the maximum
        // over w sits on such a segment
        for (int a = 0; a < r; ++a)
          for (int b = a + 1; b < r; ++b)
            for (int k = 1; k < 20; ++k) {
              const double s = k / 20.0;
              Eigen::VectorXcd w = Eigen::VectorXcd::Zero(r);
              w(a) = std::sqrt(s);
              w(b) = std::sqrt(1.0 - s);
              ws.push_back(w);
            }
        for (int s = 0; s < 32; ++s) {
          Eigen::VectorXcd w = rng.complex_normal_vector(r);
          ws.push_back(w / w.norm());
          Eigen::VectorXcd x = rng.complex_normal_vector(n);
          xs.push_back(x / x.norm());
        }
        for (const auto& w : ws)
          for (const auto& x : xs) {
            Complex jet4{0.0, 0.0};
            Complex rw{0.0, 0.0};
            for (int a = 0; a < r; ++a)
              for (int b = 0; b < r; ++b) {
                const Complex wab = w(a) * std::conj(w(b));
                if (wab == Complex{0.0, 0.0}) continue;
                for (int i = 0; i < n; ++i)
                  for (int j = 0; j < n; ++j) {
                    rw += R_at(a, b, i, j) * wab * x(i) * std::conj(x(j));
                    for (int k = 0; k < n; ++k)
                      for (int l = 0; l < n; ++l)
                        jet4 += jv.d22_at(a, b, i, k, j, l) * wab * x(i) * x(k) *
                                std::conj(x(j)) * std::conj(x(l));
                  }
              }
            const double B = jet4.real() - 2.0 * rw.real() * rw.real();
            out.second_jet = std::max(out.second_jet, std::max(0.0, B));
          }
        out.second_jet_valid = true;
      }
    }
  }
  return out;
}

}  // namespace hsclab
