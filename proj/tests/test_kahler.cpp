#include <doctest.h>

#include "hsclab/kahler.hpp"
#include "hsclab/models.hpp"

using namespace hsclab;

namespace {

Expr fs_pot(int n) {
  std::vector<Expr> t{constant(1.0)};
  for (int i = 1; i <= n; ++i) t.push_back(variable(i) * conj_variable(i));
  return log(sum(std::move(t)));
}

Expr flat_pot(int n) {
  std::vector<Expr> t;
  for (int i = 1; i <= n; ++i) t.push_back(variable(i) * conj_variable(i));
  return sum(std::move(t));
}

std::vector<Complex> zeros(int n) { return std::vector<Complex>(n, Complex{0.0, 0.0}); }

}  // namespace

TEST_CASE("metric_at: Fubini-Study and flat") {
  auto G = metric_at(fs_pot(1), zeros(1));
  CHECK(std::abs(G.entries()(0, 0) - 1.0) < 1e-14);

  auto F = metric_at(flat_pot(2), std::vector<Complex>{{0.3, 0.4}, {-0.2, 0.9}});
  CHECK((F.entries() - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("metric_at: F_2 chart potential at the origin is diag(lambda-2, 1)") {
  // lambda log(1+|z|^2) + log((1+|z|^2)^-2 + |t|^2), lambda = 5
  Expr one_plus = sum({constant(1.0), variable(1) * conj_variable(1)});
  Expr phi = constant(5.0) * log(one_plus) +
             log(sum({ipow(one_plus, -2), variable(2) * conj_variable(2)}));
  auto G = metric_at(phi, zeros(2));
  Eigen::MatrixXcd want(2, 2);
  want << 3.0, 0.0, 0.0, 1.0;
  CHECK((G.entries() - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("curvature_at: Fubini-Study P^1") {
  auto R = curvature_at(fs_pot(1), zeros(1));
  CHECK(std::abs(R.at(0, 0, 0, 0) - 2.0) < 1e-12);

  // constant holomorphic curvature away from the origin: R = 2 g^2
  const std::vector<Complex> z{{0.7, -0.4}};
  auto mc = metric_and_curvature_at(fs_pot(1), z);
  const double g = mc.G.entries()(0, 0).real();
  CHECK(std::abs(mc.R.at(0, 0, 0, 0).real() - 2.0 * g * g) < 1e-12);
  CHECK(std::abs(mc.R.at(0, 0, 0, 0).imag()) < 1e-14);
}

TEST_CASE("curvature_at: flat metric vanishes, scaling is linear") {
  auto R0 = curvature_at(flat_pot(2), zeros(2));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) CHECK(std::abs(R0.at(a, b, c, d)) < 1e-14);

  // phi -> 2 phi scales G by 2 and R by 2, so H = R/|V|^4 halves: H = 1
  Expr phi2 = constant(2.0) * fs_pot(1);
  auto mc = metric_and_curvature_at(phi2, zeros(1));
  CHECK(std::abs(mc.R.at(0, 0, 0, 0) - 4.0) < 1e-12);
  Eigen::VectorXcd V(1);
  V << Complex{1.0, 0.0};
  CHECK(std::abs(hsc(mc.R, mc.G, V) - 1.0) < 1e-12);
}

TEST_CASE("curvature_at refuses a non-positive metric") {
  // lambda = 2 on the F_2 chart: G(0) = diag(0, 1)
  Expr one_plus = sum({constant(1.0), variable(1) * conj_variable(1)});
  Expr phi = constant(2.0) * log(one_plus) +
             log(sum({ipow(one_plus, -2), variable(2) * conj_variable(2)}));
  CHECK_THROWS_AS(curvature_at(phi, zeros(2)), SingularMetricError);
  try {
    curvature_at(phi, zeros(2));
  } catch (const SingularMetricError& e) {
    CHECK(std::abs(e.min_eigenvalue()) < 1e-10);
  }
}

TEST_CASE("hsc: constancy, products, projective invariance") {
  Rng rng(23);
  // P^2 has H = 2 at random points and directions
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Complex> z{0.6 * rng.complex_normal(), 0.6 * rng.complex_normal()};
    auto mc = metric_and_curvature_at(fs_pot(2), z);
    Eigen::VectorXcd V = rng.complex_normal_vector(2);
    CHECK(std::abs(hsc(mc.R, mc.G, V) - 2.0) < 1e-9);
    // invariance under complex scaling
    const double h0 = hsc(mc.R, mc.G, V);
    for (int k = 0; k < 5; ++k) {
      const Complex cscale = rng.complex_normal() + Complex{1.5, 0.0};
      CHECK(std::abs(hsc(mc.R, mc.G, Eigen::VectorXcd(cscale * V)) - h0) < 1e-10);
    }
  }

  // product P^1 x P^1 with equal G-norm parts: H = (2+2)/(1+1)^2 = 1
  Expr prod = fs_pot(1) + log(sum({constant(1.0), variable(2) * conj_variable(2)}));
  auto mc = metric_and_curvature_at(prod, zeros(2));
  Eigen::VectorXcd V(2);
  V << Complex{1.0, 0.0}, Complex{0.0, 1.0};
  CHECK(std::abs(hsc(mc.R, mc.G, V) - 1.0) < 1e-12);

  auto flat = metric_and_curvature_at(flat_pot(2), zeros(2));
  CHECK(std::abs(hsc(flat.R, flat.G, V)) < 1e-14);

  CHECK_THROWS_AS(hsc(mc.R, mc.G, Eigen::VectorXcd::Zero(2)), std::invalid_argument);
}

TEST_CASE("scalar curvature: S = n(n+1) for P^n") {
  {
    auto mc = metric_and_curvature_at(fs_pot(1), zeros(1));
    CHECK(std::abs(scalar_curvature(mc.R, mc.G) - 2.0) < 1e-10);
  }
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Complex> z{0.5 * rng.complex_normal(), 0.5 * rng.complex_normal()};
    auto mc = metric_and_curvature_at(fs_pot(2), z);
    CHECK(std::abs(scalar_curvature(mc.R, mc.G) - 6.0) < 1e-8);
  }
  auto flat = metric_and_curvature_at(flat_pot(2), zeros(2));
  CHECK(std::abs(scalar_curvature(flat.R, flat.G)) < 1e-14);
}

TEST_CASE("Kahler symmetries and reality of the curvature tensor") {
  Rng rng(37);
  Expr one_plus = sum({constant(1.0), variable(1) * conj_variable(1)});
  Expr f2 = constant(5.0) * log(one_plus) +
            log(sum({ipow(one_plus, -2), variable(2) * conj_variable(2)}));
  for (const Expr& phi : {fs_pot(2), f2}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Complex> z{0.5 * rng.complex_normal(), 0.5 * rng.complex_normal()};
      auto R = curvature_at(phi, z);
      CHECK(R.kahler_symmetry_deviation() < 1e-9);
      CHECK(R.reality_deviation() < 1e-9);
    }
  }
}

TEST_CASE("potential gauge invariance: adding Re(holomorphic) changes nothing") {
  Expr phi = fs_pot(2);
  Expr gauge = real_part(ipow(variable(1), 2) + constant(3.0) * variable(2));
  Expr phi2 = phi + gauge;
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Complex> z{0.5 * rng.complex_normal(), 0.5 * rng.complex_normal()};
    auto a = metric_and_curvature_at(phi, z);
    auto b = metric_and_curvature_at(phi2, z);
    CHECK((a.G.entries() - b.G.entries()).cwiseAbs().maxCoeff() < 1e-9);
    double dev = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            dev = std::max(dev, std::abs(a.R.at(i, j, k, l) - b.R.at(i, j, k, l)));
    CHECK(dev < 1e-9);
  }
}

TEST_CASE("sphere average: constant case and Berger consistency") {
  {
    auto mc = metric_and_curvature_at(fs_pot(1), zeros(1));
    auto avg = sphere_average_hsc(mc.R, mc.G, 200, 5);
    CHECK(std::abs(avg.mean - 2.0) < 1e-12);  // H constant on P^1
  }
  {
    // F_0 with lambda = 2: G at the origin is diag(2,1), so this also
    // exercises the unitary-frame sampling
    Expr phi = constant(2.0) * fs_pot(1) +
               log(sum({constant(1.0), variable(2) * conj_variable(2)}));
    auto mc = metric_and_curvature_at(phi, zeros(2));
    const double S = scalar_curvature(mc.R, mc.G);
    const double target = 2.0 * S / (2.0 * 3.0);
    auto avg = sphere_average_hsc(mc.R, mc.G, 100000, 12345);
    CHECK(std::abs(avg.mean - target) < 3.0 * avg.std_error + 1e-12);
  }
  {
    auto flat = metric_and_curvature_at(flat_pot(2), zeros(2));
    auto avg = sphere_average_hsc(flat.R, flat.G, 100, 3);
    CHECK(std::abs(avg.mean) < 1e-13);
  }
}

TEST_CASE("catalog-wide invariants: tensor symmetries and the Berger average") {
  Rng rng(47);
  for (const auto& name : catalog_names()) {
    Model m = catalog(name);
    const double lambda = 6.0;  // above every catalog xi
    const TotalSpace ts = m.total(lambda);
    const int N = ts.manifold.dim;
    const double box = ts.manifold.charts[0].box;
    auto jet = jet_for(ts.manifold.charts[0].potential, N);

    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Complex> p(N);
      for (auto& c : p) c = 0.25 * box * rng.complex_normal();
      const auto jv = jet->full(p);
      HermitianForm G(jv.G);
      if (G.min_eigenvalue() < 1e-12) continue;
      const auto R = curvature_from_jet(jv, jv.G.inverse());
      INFO(name);
      CHECK(R.kahler_symmetry_deviation() < 1e-9);
      CHECK(R.reality_deviation() < 1e-9);

      if (trial == 0) {
        const double S = scalar_curvature(R, G);
        const double target = 2.0 * S / (N * (N + 1.0));
        const auto avg = sphere_average_hsc(R, G, 20000, 1000 + trial);
        if (avg.std_error > 1e-12) {
          CHECK(std::abs(avg.mean - target) < 4.0 * avg.std_error);
        } else {
          CHECK(std::abs(avg.mean - target) < 1e-9);  // constant-H models
        }
      }
    }
  }
}

TEST_CASE("tangent vector split") {
  TangentVector v;
  v.v = Eigen::VectorXcd::Ones(3);
  v.base_dim = 2;
  CHECK(v.base_part().size() == 2);
  CHECK(v.fiber_part().size() == 1);
  TangentVector w;
  w.v = Eigen::VectorXcd::Ones(3);
  CHECK_THROWS_AS(w.base_part(), std::logic_error);
}

TEST_CASE("jets refuse potentials that are not real-valued") {
  // i * |w|^2 is not a potential
  Expr bad = constant(Complex{0.0, 1.0}) * variable(1) * conj_variable(1);
  CHECK_THROWS_AS(metric_at(bad, zeros(1)), std::invalid_argument);
}

TEST_CASE("hermitian form diagnostics") {
  Eigen::MatrixXcd m(2, 2);
  m << Complex{1.0, 0.0}, Complex{0.2, 0.1}, Complex{0.2, -0.1}, Complex{2.0, 0.0};
  HermitianForm G(m);
  CHECK(G.conj_symmetry_deviation() < 1e-15);
  Eigen::VectorXcd v(2);
  v << Complex{1.0, 0.0}, Complex{0.0, 1.0};
  const double n2 = G.norm_sq(v);
  CHECK(n2 > 0.0);
  CHECK(std::abs(n2 - (3.0 + 2.0 * 0.1)) < 1e-14);  // 1 + 2 + 2 Re(m01 * i-bar...)
}
