#include <doctest.h>

#include "hsclab/positivity.hpp"

using namespace hsclab;

namespace {

std::vector<Complex> zeros(int n) { return std::vector<Complex>(n, Complex{0.0, 0.0}); }

MetricAndCurvature at_origin(const Model& m, double lambda) {
  const TotalSpace ts = m.total(lambda);
  return metric_and_curvature_at(ts.manifold.charts[0].potential, zeros(m.total_dim()));
}

}  // namespace

TEST_CASE("min_hsc_at_point: constant curvature and products") {
  MinHscOptions opt;
  opt.starts = 16;
  opt.seed = 3;

  {
    Model p2 = catalog("p2");
    Rng rng(5);
    for (int i = 0; i < 3; ++i) {
      std::vector<Complex> z{0.5 * rng.complex_normal(), 0.5 * rng.complex_normal()};
      auto mc = metric_and_curvature_at(p2.base.manifold.charts[0].potential, z);
      auto r = min_hsc_at_point(mc.R, mc.G, opt);
      CHECK(std::abs(r.value - 2.0) < 1e-9);
    }
  }
  {
    // product minimum c1 c2/(c1+c2) = 1 for P^1 x P^1, argmin balances the
    // G-norms of the two parts
    Model prod = catalog("p1xp1");
    auto mc = at_origin(prod, 1.0);
    auto r = min_hsc_at_point(mc.R, mc.G, opt);
    CHECK(std::abs(r.value - 1.0) < 1e-9);
    const double nx = std::norm(r.direction(0));
    const double nu = std::norm(r.direction(1));
    CHECK(std::abs(nx - nu) < 1e-4);
  }
  {
    Model flat = catalog("flat2");
    auto mc = at_origin(flat, 1.0);
    auto r = min_hsc_at_point(mc.R, mc.G, opt);
    CHECK(std::abs(r.value) < 1e-12);
  }
  {
    // P^1 x P^2 also has product minimum 2*2/(2+2) = 1; n = 3 exercises the
    // multistart gradient path
    Model prod = catalog("p1xp2");
    auto mc = at_origin(prod, 1.0);
    MinHscOptions o3 = opt;
    o3.starts = 24;
    auto r = min_hsc_at_point(mc.R, mc.G, o3);
    CHECK(std::abs(r.value - 1.0) < 1e-7);
  }
}

TEST_CASE("min_hsc_at_point is an upper-bound refiner and matches the ray oracle") {
  Model f2 = catalog("f2");
  const double lambda = 8.0;
  auto mc = at_origin(f2, lambda);
  MinHscOptions opt;
  opt.starts = 16;
  opt.seed = 7;
  auto r = min_hsc_at_point(mc.R, mc.G, opt);

  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXcd V = rng.complex_normal_vector(2);
    CHECK(r.value <= hsc(mc.R, mc.G, V) + 1e-10);
  }

  // at the F_a origin H depends only on (|x|^2,|u|^2):
  //   H = ((2λ-2a) p^2 - 4a p q + 2 q^2) / ((λ-a) p + q)^2
  double oracle = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100000; ++k) {
    const double t = k / 100000.0;
    const double p = t, q = 1.0 - t;
    const double num = 12.0 * p * p - 8.0 * p * q + 2.0 * q * q;
    const double den = (6.0 * p + q) * (6.0 * p + q);
    oracle = std::min(oracle, num / den);
  }
  CHECK(std::abs(r.value - oracle) < 1e-7);
}

TEST_CASE("n=2 exact direction optimum agrees with gradient descent") {
  Model f2 = catalog("f2");
  const TotalSpace ts = f2.total(7.0);
  Rng rng(21);
  for (int ci = 0; ci < 2; ++ci) {
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<Complex> p{0.8 * rng.complex_normal(), 0.8 * rng.complex_normal()};
      const auto mc = metric_and_curvature_at(ts.manifold.charts[ci].potential, p);
      MinHscOptions exact;
      exact.seed = 5;
      MinHscOptions grad = exact;
      grad.force_gradient = true;
      grad.starts = 24;
      const auto a = min_hsc_at_point(mc.R, mc.G, exact);
      const auto b = min_hsc_at_point(mc.R, mc.G, grad);
      CHECK(std::abs(a.value - b.value) < 1e-8);
      const auto ma = max_hsc_at_point(mc.R, mc.G, exact);
      const auto mb = max_hsc_at_point(mc.R, mc.G, grad);
      CHECK(std::abs(ma.value - mb.value) < 1e-8);
      // the reported direction realizes the reported value
      CHECK(std::abs(hsc(mc.R, mc.G, a.direction) - a.value) < 1e-9);
    }
  }
}

TEST_CASE("scan: product pinching and the negative control") {
  {
    Model f0 = catalog("trivial-r2");
    ScanOptions opt;
    opt.res = 5;
    opt.fiber_res = 5;
    opt.starts = 12;
    opt.seed = 42;
    ScanReport r = scan(f0, 1.0, opt);
    CHECK(r.kahler_all_ok);
    CHECK(std::abs(r.global_min - 1.0) < 1e-6);
    CHECK(std::abs(r.global_max - 2.0) < 1e-6);
    CHECK(std::abs(r.pinching() - 0.5) < 1e-6);
    CHECK(r.positive());

    // determinism
    ScanReport r2 = scan(f0, 1.0, opt);
    CHECK(r.global_min == r2.global_min);
    CHECK(r.global_max == r2.global_max);
  }
  {
    // F_2 below the Kähler threshold: G(0) = diag(lambda-2, 1)
    Model f2 = catalog("f2");
    ScanOptions opt;
    opt.res = 5;
    opt.fiber_res = 5;
    opt.starts = 4;
    opt.track_max = false;
    ScanReport r = scan(f2, 2.0, opt);
    CHECK_FALSE(r.kahler_all_ok);
    CHECK(r.worst_metric_eig < 1e-9);
    CHECK_FALSE(r.positive());

    KahlerCheckResult kc = kahler_check(f2, 2.0, 5, 5);
    CHECK_FALSE(kc.ok);
    KahlerCheckResult kc5 = kahler_check(f2, 5.0, 5, 5);
    CHECK(kc5.ok);
  }
}

TEST_CASE("scan: rank-1 scaling law") {
  ScanOptions opt;
  opt.res = 5;
  opt.starts = 8;
  opt.track_max = false;
  {
    Model r1 = catalog("rank1-trivial");
    for (double lambda : {1.0, 2.0, 5.0}) {
      ScanReport r = scan(r1, lambda, opt);
      CHECK(std::abs(r.global_min - 2.0 / lambda) < 1e-8);
    }
  }
  {
    // with a degree-a summand the scale is 1/(lambda - a)
    Model r1 = catalog("rank1-deg1");
    ScanReport r = scan(r1, 3.0, opt);
    CHECK(std::abs(r.global_min - 2.0 / (3.0 - 1.0)) < 1e-8);
  }
}

TEST_CASE("find_lambda0: lower edge on F_0, genuine threshold on F_2") {
  ScanOptions search;
  search.res = 5;
  search.fiber_res = 5;
  search.starts = 8;
  search.track_max = false;
  ScanOptions verify = search;
  verify.res = 9;
  verify.fiber_res = 9;

  {
    Model f0 = catalog("trivial-r2");
    auto r = find_lambda0(f0, 0.1, 10.0, 0.02, search, verify);
    CHECK(r.lower_edge);
    CHECK(r.lambda0 == 0.1);
    CHECK(r.verified);
  }
  {
    Model f2 = catalog("f2");
    auto r = find_lambda0(f2, 2.01, 40.0, 0.05, search, verify);
    CHECK_FALSE(r.lower_edge);
    CHECK(r.verified);
    // the origin analysis forces lambda >= a + a^2 = 6
    CHECK(r.lambda0 > 4.5);
    CHECK(r.lambda0 < 7.5);
    CHECK(r.monotone_ok);
  }
  {
    Model f2 = catalog("f2");
    CHECK_THROWS_AS(find_lambda0(f2, 0.5, 1.0, 0.05, search, verify), std::invalid_argument);
  }
}

TEST_CASE("certify_lambda: closed form vs dense grid") {
  {
    auto cert = certify_lambda(2.0, 0.0);
    CHECK(cert.lambda_star == 0.0);
    CHECK(cert.inner_min == 0.0);
  }
  {
    const auto cert = certify_lambda(2.0, 1.0);
    // independent grid oracle for m = min 2s^4 - 8s^2 - 4s
    double m = 0.0;
    for (int k = 0; k <= 1000000; ++k) {
      const double s = k * 1e-5;
      if (s > 10.0) break;
      m = std::min(m, 2.0 * s * s * s * s - 8.0 * s * s - 4.0 * s);
    }
    CHECK(std::abs(cert.lambda_star - (1.0 - m) / 2.0) < 1e-4);
    CHECK(cert.lambda_star > 7.4);
    CHECK(cert.lambda_star < 7.5);

    // doubling H0 halves lambda*
    const auto cert2 = certify_lambda(4.0, 1.0);
    CHECK(std::abs(cert2.lambda_star - cert.lambda_star / 2.0) < 1e-12);
  }
  {
    // profile positivity at lambda*(1+eps), failure below lambda*
    const auto cert = certify_lambda(2.0, 1.5);
    const double lam_hi = cert.lambda_star * (1.0 + 1e-6);
    const double lam_lo = cert.lambda_star * (1.0 - 1e-3);
    double worst_hi = std::numeric_limits<double>::infinity();
    double worst_lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200000; ++k) {
      const double s = k * 5e-5 * 10.0;
      worst_hi = std::min(worst_hi, certificate_profile(cert, lam_hi, s));
      worst_lo = std::min(worst_lo, certificate_profile(cert, lam_lo, s));
    }
    CHECK(worst_hi > 0.0);
    CHECK(worst_lo <= 0.0);
  }
  CHECK_THROWS_AS(certify_lambda(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(certify_lambda(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("final bound at distinguished points") {
  // trivial bundle: q = lambda H0 x^4 + 2u^4 with C = 0; equality for fiber-only V
  Model f0 = catalog("trivial-r2");
  auto fb = check_final_bound_at_origins(f0, 1.5, 2.0, 0.0, 200, 9);
  CHECK(fb.ok);
  CHECK(fb.min_slack >= -1e-12);
  CHECK(fb.min_slack < 1e-9);  // the trivial bundle is the equality case

  // F_2 with the certified C: slack nonnegative, strictly positive for mixed V
  Model f2 = catalog("f2");
  auto bound = bundle_bound_C(*f2.bundle, f2.base, 5);
  auto cert = certify_lambda(2.0, bound.C());
  auto fb2 = check_final_bound_at_origins(f2, cert.lambda_star, 2.0, bound.C(), 500, 13);
  CHECK(fb2.ok);
  CHECK(fb2.min_slack >= 0.0);
  CHECK(fb2.min_slack > 0.0);
}

TEST_CASE("certificate consistency on F_1") {
  Model f1 = catalog("f1");
  ConsistencyOptions opt;
  opt.scan_opts.res = 5;
  opt.scan_opts.fiber_res = 5;
  opt.scan_opts.starts = 8;
  opt.trials = 100;
  const auto cc = certificate_consistency(f1, opt);
  CHECK(std::abs(cc.H0 - 2.0) < 1e-9);
  CHECK(cc.bound.C() >= 2.0);  // second-jet term dominates for F_1
  CHECK(cc.check_lambda_star_ge_lambda0);
  CHECK(cc.check_scan_positive);
  CHECK(cc.bound_check.ok);
  CHECK(cc.all_ok());

  // rank-1 trivial: lambda* = 0, bisection hits the lower edge, and the
  // lower-edge outcome cannot contradict the certificate
  Model r1 = catalog("rank1-trivial");
  const auto cr = certificate_consistency(r1, opt);
  CHECK(cr.cert.lambda_star == 0.0);
  CHECK(cr.lambda0.lower_edge);
  CHECK(cr.all_ok());
}
