#include <doctest.h>

#include "hsclab/models.hpp"

using namespace hsclab;

namespace {

std::vector<Complex> zeros(int n) { return std::vector<Complex>(n, Complex{0.0, 0.0}); }

/// Pullback of the metric in chart t.to through transition t, compared with
/// the metric computed directly in chart t.from.
double metric_overlap_deviation(const Manifold& m, const ChartTransition& t,
                                std::span<const Complex> x) {
  const auto Ga = jet_for(m.charts[t.from].potential, m.dim)->metric(x);
  const auto y = t.apply(x);
  const auto Gb = jet_for(m.charts[t.to].potential, m.dim)->metric(y);
  const Eigen::MatrixXcd J = t.jacobian(x);
  Eigen::MatrixXcd pulled(m.dim, m.dim);
  for (int a = 0; a < m.dim; ++a)
    for (int b = 0; b < m.dim; ++b) {
      Complex s{0.0, 0.0};
      for (int c = 0; c < m.dim; ++c)
        for (int d = 0; d < m.dim; ++d) s += J(c, a) * std::conj(J(d, b)) * Gb(c, d);
      pulled(a, b) = s;
    }
  return (pulled - Ga).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("fubini_study charts and transitions") {
  BaseModel p1 = fubini_study(1);
  CHECK(p1.manifold.charts.size() == 2);
  CHECK(p1.manifold.transitions.size() == 2);
  CHECK(std::abs(jet_for(p1.manifold.charts[0].potential, 1)->metric(zeros(1))(0, 0) - 1.0) <
        1e-14);
  // z -> 1/z
  const auto& t = p1.manifold.transitions[0];
  const std::vector<Complex> z{{2.0, 0.0}};
  CHECK(std::abs(t.apply(z)[0] - 0.5) < 1e-15);

  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    std::vector<Complex> x{rng.complex_normal() + Complex{1.0, 0.0}};
    if (std::abs(x[0]) < 0.2) continue;
    CHECK(metric_overlap_deviation(p1.manifold, t, x) < 1e-10);
  }
}

TEST_CASE("fubini_study P^2 overlap consistency") {
  BaseModel p2 = fubini_study(2);
  CHECK(p2.manifold.charts.size() == 3);
  Rng rng(7);
  for (const auto& t : p2.manifold.transitions) {
    for (int i = 0; i < 5; ++i) {
      std::vector<Complex> x{0.3 * rng.complex_normal() + Complex{0.9, 0.2},
                             0.3 * rng.complex_normal() + Complex{0.9, -0.2}};
      CHECK(metric_overlap_deviation(p2.manifold, t, x) < 1e-8);
    }
  }
}

TEST_CASE("product model: P^1 x P^1") {
  BaseModel prod = product(fubini_study(1), fubini_study(1));
  CHECK(prod.dim == 2);
  CHECK(prod.manifold.charts.size() == 4);
  // metric at origin is the identity
  const auto G = jet_for(prod.manifold.charts[0].potential, 2)->metric(zeros(2));
  CHECK((G - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  // transitions exist in both factors
  CHECK(prod.manifold.transitions.size() == 8);
  Rng rng(9);
  for (const auto& t : prod.manifold.transitions) {
    std::vector<Complex> x{rng.complex_normal() + Complex{1.0, 0.0},
                           rng.complex_normal() + Complex{1.0, 0.0}};
    CHECK(metric_overlap_deviation(prod.manifold, t, x) < 1e-8);
  }
}

TEST_CASE("product of flat factors is flat") {
  BaseModel ff = product(flat_space(1), flat_space(1));
  auto R = curvature_at(ff.manifold.charts[0].potential,
                        std::vector<Complex>{{0.4, -0.7}, {0.1, 0.9}});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) CHECK(std::abs(R.at(a, b, c, d)) < 1e-14);
}

TEST_CASE("line bundle sums over P^1") {
  BaseModel p1 = fubini_study(1);
  BundleModel f2 = line_bundle_sum(p1, {2, 0});
  CHECK(f2.rank == 2);
  CHECK(f2.h.size() == 2);

  // h at 0 is the identity
  EvalContext ctx;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Complex v = ctx.evaluate(f2.h[0][a][b], zeros(1));
      CHECK(std::abs(v - (a == b ? 1.0 : 0.0)) < 1e-14);
    }

  // xi_1 = 2 straight from the derivative engine: -d dbar log h_0 at 0
  {
    Expr neg_log_h0 = -log(f2.h[0][0][0]);
    const Complex xi = ctx.evaluate(
        differentiate(differentiate(neg_log_h0, 1, false), 1, true), zeros(1));
    CHECK(std::abs(xi - 2.0) < 1e-13);
  }

  // cocycle compatibility h_from = A^H h_to(T(z)) A at sampled points
  BundleModel lb21 = line_bundle_sum(p1, {2, 1});
  Rng rng(11);
  for (const auto& co : lb21.cocycles) {
    const ChartTransition* bt = nullptr;
    for (const auto& t : p1.manifold.transitions)
      if (t.from == co.from && t.to == co.to) bt = &t;
    REQUIRE(bt != nullptr);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Complex> z{rng.complex_normal() + Complex{1.2, 0.0}};
      if (std::abs(z[0]) < 0.3) continue;
      const auto zp = bt->apply(z);
      Eigen::MatrixXcd A(2, 2), Hfrom(2, 2), Hto(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          A(a, b) = ctx.evaluate(co.A[a][b], z);
          Hfrom(a, b) = ctx.evaluate(lb21.h[co.from][a][b], z);
          Hto(a, b) = ctx.evaluate(lb21.h[co.to][a][b], zp);
        }
      CHECK((Hfrom - A.adjoint() * Hto * A).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("proj chart potential matches the hand-built F_a formula") {
  BaseModel p1 = fubini_study(1);
  BundleModel fa = line_bundle_sum(p1, {3, 0});
  const double lambda = 7.0;
  Expr phi = proj_chart_potential(p1, fa, 0, 0, lambda);

  // lambda log(1+|z|^2) + log((1+|z|^2)^-3 + |t|^2)
  Expr one_plus = sum({constant(1.0), variable(1) * conj_variable(1)});
  Expr hand = constant(lambda) * log(one_plus) +
              log(sum({ipow(one_plus, -3), variable(2) * conj_variable(2)}));

  Rng rng(13);
  EvalContext ctx;
  for (int i = 0; i < 20; ++i) {
    std::vector<Complex> p{rng.complex_normal(), rng.complex_normal()};
    CHECK(std::abs(ctx.evaluate(phi, p) - ctx.evaluate(hand, p)) < 1e-12);
  }
}

TEST_CASE("trivial rank-2 bundle at lambda=1 equals the product P^1 x P^1") {
  Model f0 = catalog("trivial-r2");
  BaseModel prod = product(fubini_study(1), fubini_study(1));
  const TotalSpace ts = f0.total(1.0);

  auto jet_a = jet_for(ts.manifold.charts[0].potential, 2);
  auto jet_b = jet_for(prod.manifold.charts[0].potential, 2);
  Rng rng(15);
  for (int i = 0; i < 20; ++i) {
    std::vector<Complex> p{rng.complex_normal(), rng.complex_normal()};
    const auto Ga = jet_a->metric(p);
    const auto Gb = jet_b->metric(p);
    CHECK((Ga - Gb).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fiber restriction of any proj chart is Fubini-Study: H = 2 on fiber directions") {
  for (const char* name : {"f1", "f2", "lb-2-1-0"}) {
    Model m = catalog(name);
    const TotalSpace ts = m.total(4.5);
    const int n = m.base.dim;
    const int N = m.total_dim();
    auto mc = metric_and_curvature_at(ts.manifold.charts[0].potential, zeros(N));
    Rng rng(17);
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXcd V = Eigen::VectorXcd::Zero(N);
      for (int s = n; s < N; ++s) V(s) = rng.complex_normal();
      if (V.norm() < 1e-9) continue;
      CHECK(std::abs(hsc(mc.R, mc.G, V) - 2.0) < 1e-9);
    }
  }
}

TEST_CASE("chart-overlap invariance of H on F_1, F_2 and a rank-3 sum") {
  for (const char* name : {"f1", "f2", "lb-2-1-0"}) {
    Model m = catalog(name);
    const double lambda = 8.0;
    const TotalSpace ts = m.total(lambda);
    const int N = ts.manifold.dim;
    Rng rng(19);
    int tested = 0;
    for (const auto& t : ts.manifold.transitions) {
      for (int trial = 0; trial < 4 && tested < 24; ++trial) {
        std::vector<Complex> x(N);
        for (auto& c : x) c = 0.4 * rng.complex_normal() + Complex{0.9, 0.1};
        const auto y = t.apply(x);
        double ymax = 0.0;
        for (const auto& c : y) ymax = std::max(ymax, std::abs(c));
        if (ymax > 25.0) continue;
        const auto mca = metric_and_curvature_at(ts.manifold.charts[t.from].potential, x);
        const auto mcb = metric_and_curvature_at(ts.manifold.charts[t.to].potential, y);
        const Eigen::MatrixXcd J = t.jacobian(x);
        Eigen::VectorXcd V = rng.complex_normal_vector(N);
        const double ha = hsc(mca.R, mca.G, V);
        const double hb = hsc(mcb.R, mcb.G, Eigen::VectorXcd(J * V));
        CHECK(std::abs(ha - hb) < 1e-8);
        ++tested;
      }
    }
    CHECK(tested >= 10);
  }
}

TEST_CASE("bundle curvature: Hirzebruch eigenvalues") {
  BaseModel p1 = fubini_study(1);
  {
    BundleModel f2 = line_bundle_sum(p1, {2, 0});
    auto bc = bundle_curvature_at(f2, p1, 0, zeros(1), Eigen::VectorXcd::Unit(2, 0));
    CHECK(bc.xi.size() == 1);
    CHECK(std::abs(bc.xi(0) - 2.0) < 1e-12);
    // the O summand is flat
    auto bc1 = bundle_curvature_at(f2, p1, 0, zeros(1), Eigen::VectorXcd::Unit(2, 1));
    CHECK(std::abs(bc1.xi(0)) < 1e-12);
  }
  {
    BundleModel triv = line_bundle_sum(p1, {0, 0});
    auto bc = bundle_curvature_at(triv, p1, 0, zeros(1), Eigen::VectorXcd::Unit(2, 0));
    CHECK(std::abs(bc.xi(0)) < 1e-14);
  }
  {
    // degrees (1,0) over P^2: xi = (1,1) for w = e_0
    BaseModel p2 = fubini_study(2);
    BundleModel b = line_bundle_sum(p2, {1, 0});
    auto bc = bundle_curvature_at(b, p2, 0, zeros(2), Eigen::VectorXcd::Unit(2, 0));
    CHECK(std::abs(bc.xi(0) - 1.0) < 1e-12);
    CHECK(std::abs(bc.xi(1) - 1.0) < 1e-12);
  }
  {
    // eigenvalues relative to g stay constant along the homogeneous orbit
    BundleModel f2 = line_bundle_sum(p1, {2, 0});
    const std::vector<Complex> z{{0.8, -0.5}};
    auto bc = bundle_curvature_at(f2, p1, 0, z, Eigen::VectorXcd::Unit(2, 0));
    CHECK(bc.xi.maxCoeff() < 2.0 + 1e-10);  // mixing with the flat summand
    CHECK(bc.xi.maxCoeff() > 0.0);
  }
}

TEST_CASE("bundle bound: components and scaling") {
  BaseModel p1 = fubini_study(1);
  {
    BundleModel triv = line_bundle_sum(p1, {0, 0});
    auto b = bundle_bound_C(triv, p1, 5);
    CHECK(b.sup_curvature < 1e-12);
    CHECK(b.sup_nabla < 1e-10);
    CHECK(b.second_jet_valid);
    CHECK(b.second_jet < 1e-10);
    CHECK(b.C() < 1e-10);
  }
  {
    BundleModel f1 = line_bundle_sum(p1, {1, 0});
    auto b = bundle_bound_C(f1, p1, 5);
    CHECK(std::abs(b.sup_curvature - 1.0) < 1e-9);  // homogeneous, parallel
    CHECK(b.sup_nabla < 1e-8);
    CHECK(b.second_jet_valid);
    CHECK(std::abs(b.second_jet - 2.0) < 0.02);  // max of 2a(a+1)s - 2a^2 s^2 at s=1
    CHECK(b.C() >= 1.0);
  }
  {
    BundleModel f2 = line_bundle_sum(p1, {2, 0});
    auto b = bundle_bound_C(f2, p1, 5);
    // doubling all degrees doubles the curvature-component contribution
    CHECK(std::abs(b.sup_curvature - 2.0) < 1e-9);
    CHECK(b.sup_nabla < 1e-8);
    CHECK(std::abs(b.second_jet - 4.5) < 0.02);  // max at |w_0|^2 = 3/4
    CHECK(b.C() >= 2.0);
  }
}

TEST_CASE("bundle entries are conjugate-symmetric and positive definite on samples") {
  Rng rng(27);
  EvalContext ctx;
  for (const char* name : {"f2", "lb-2-1-0", "twisted"}) {
    Model m = catalog(name);
    const auto& h = m.bundle->h[0];
    const int r = m.bundle->rank;
    const double box = m.base.manifold.charts[0].box;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Complex> z(m.base.dim);
      for (auto& c : z) c = 0.5 * box * rng.complex_normal();
      Eigen::MatrixXcd H(r, r);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) H(a, b) = ctx.evaluate(h[a][b], z);
      CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(HermitianForm(H).min_eigenvalue() > 0.0);
    }
  }
}

TEST_CASE("twisted local bundle satisfies the frame conditions and perturbs h_{v beta,ijk}") {
  Model tw = catalog("twisted");
  REQUIRE(tw.bundle.has_value());
  EvalContext ctx;
  const auto& h = tw.bundle->h[0];
  // h(0) = Id, dh(0) = 0, d2h(0) = 0
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(ctx.evaluate(h[a][b], zeros(1)) - (a == b ? 1.0 : 0.0)) < 1e-14);
      CHECK(std::abs(ctx.evaluate(differentiate(h[a][b], 1, false), zeros(1))) < 1e-14);
      CHECK(std::abs(ctx.evaluate(differentiate(differentiate(h[a][b], 1, false), 1, false),
                                  zeros(1))) < 1e-14);
    }
  // the third-order mixed derivative that drives G_{i j̄, k β̄} is nonzero
  Expr d3 = differentiate(h[0][1], DerivIndex::d({1, 1}, {1}));
  CHECK(std::abs(ctx.evaluate(d3, zeros(1))) > 1e-4);
}

TEST_CASE("rank-1 bundles: total space metric") {
  Model r1 = catalog("rank1-trivial");
  const double lambda = 3.0;
  const TotalSpace ts = r1.total(lambda);
  CHECK(ts.manifold.dim == 1);
  // G = lambda g
  auto G = jet_for(ts.manifold.charts[0].potential, 1)->metric(zeros(1));
  CHECK(std::abs(G(0, 0) - lambda) < 1e-12);

  Model r1d = catalog("rank1-deg1");
  const TotalSpace ts2 = r1d.total(lambda);
  auto G2 = jet_for(ts2.manifold.charts[0].potential, 1)->metric(zeros(1));
  CHECK(std::abs(G2(0, 0) - (lambda - 1.0)) < 1e-12);
}

TEST_CASE("catalog names resolve") {
  for (const auto& name : catalog_names()) CHECK(catalog(name).name == name);
  CHECK_THROWS_AS(catalog("nope"), std::invalid_argument);
}
