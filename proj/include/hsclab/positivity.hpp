#pragma once

// Minimize H over directions and sample points, search for the minimal
// positivity threshold λ₀, and compute the sufficient-λ certificate from the
// quartic lower bound
//   q(x,u) = (λ H₀ − C) x⁴ − 8C x²u² + 2u⁴ − 4C x³u.

#include <array>
#include <limits>

#include "hsclab/models.hpp"

namespace hsclab {

// ---- direction optimizer -----------------------------------------------------

struct MinHscOptions {
  int starts = 64;
  double tol = 1e-10;
  int max_iters = 300;
  std::uint64_t seed = 1;
  bool force_gradient = false;  // skip the exact n=2 path (cross-checks)
};

struct MinHscResult {
  double value = 0.0;
  Eigen::VectorXcd direction;  // G-unit minimizer
  bool converged = false;
};

/// Direction minimum of H over the G-unit sphere. For n = 2 this is exact:
/// in a G-unitary frame H is a quadratic function of the Bloch vector of the
/// direction's projector, so the global optimum is a 3x3 trust-region
/// problem. Other dimensions use multistart projected gradient descent in
/// the unitary frame. Deterministic for a fixed seed.
MinHscResult min_hsc_at_point(const CurvatureTensor& R, const HermitianForm& G,
                              const MinHscOptions& opt);

/// Same machinery on −H.
MinHscResult max_hsc_at_point(const CurvatureTensor& R, const HermitianForm& G,
                              const MinHscOptions& opt);

// ---- scans ---------------------------------------------------------------------

struct PointRecord {
  int chart = 0;
  std::vector<Complex> coords;
  bool kahler_ok = false;
  double metric_min_eig = 0.0;
  double min_hsc = std::numeric_limits<double>::quiet_NaN();
  double max_hsc = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXcd argmin;
  bool converged = false;
};

struct ScanOptions {
  int res = 17;        // samples per real axis, base coordinates
  int fiber_res = 17;  // samples per real axis, fiber coordinates
  int starts = 16;
  double tol = 1e-10;
  std::uint64_t seed = 1234;
  int jobs = 0;
  bool track_max = true;
  bool keep_points = true;  // retain per-point records (CSV output)
};

struct ScanReport {
  std::string model;
  double lambda = 0.0;
  ScanOptions options;
  std::vector<PointRecord> points;  // empty when keep_points is false
  std::size_t n_points = 0;

  bool kahler_all_ok = true;
  double worst_metric_eig = std::numeric_limits<double>::infinity();
  double global_min = std::numeric_limits<double>::infinity();
  double global_max = -std::numeric_limits<double>::infinity();
  int argmin_chart = -1;
  std::vector<Complex> argmin_coords;
  Eigen::VectorXcd argmin_direction;
  bool all_converged = true;

  double pinching() const {
    return (global_max > 0.0 && global_min > -std::numeric_limits<double>::infinity())
               ? global_min / global_max
               : std::numeric_limits<double>::quiet_NaN();
  }
  bool positive() const { return kahler_all_ok && global_min > 0.0; }
};

/// Evaluates the Kähler check and the direction minimum at every grid sample
/// of every chart. Non-positive-definite samples are recorded and the scan
/// continues.
ScanReport scan(const Model& model, double lambda, const ScanOptions& opt);

struct KahlerCheckResult {
  bool ok = false;
  double worst_eigenvalue = std::numeric_limits<double>::infinity();
  std::size_t n_points = 0;
  int worst_chart = -1;
  std::vector<Complex> worst_coords;
};

/// Minimum over the grid of the smallest eigenvalue of G; true iff > 0.
KahlerCheckResult kahler_check(const Model& model, double lambda, int res, int fiber_res,
                               int jobs = 0);

// ---- λ₀ search -----------------------------------------------------------------

struct Lambda0Result {
  double lambda0 = 0.0;
  bool lower_edge = false;  // predicate already true at the bracket's low end
  bool monotone_ok = true;  // spot check of min-H monotonicity in λ
  bool verified = false;    // verification scan at λ₀ + tol passed
  double tol = 0.0;
  std::vector<std::pair<double, double>> history;  // (λ, global min H; NaN if Kähler fails)
  ScanReport verification;
};

/// Bisection on the predicate "scan(λ) has positive min H" over [lo, hi].
/// The result is grid-relative: monotonicity is assumed (spot-checked, with
/// a linear-scan fallback) and a verification scan at λ₀ + tol is run with
/// `verify` options.
Lambda0Result find_lambda0(const Model& model, double lo, double hi, double tol,
                           const ScanOptions& search, const ScanOptions& verify);

// ---- certificates ----------------------------------------------------------------

struct Certificate {
  double H0 = 0.0;
  double C = 0.0;
  double lambda_star = 0.0;
  double inner_min = 0.0;  // m = min_{s≥0} (2s⁴ − 8Cs² − 4Cs)
  double argmin_s = 0.0;
};

/// Minimal λ* with p(s) = 2s⁴ − 8Cs² − 4Cs + (λH₀ − C) > 0 for all s ≥ 0;
/// the inner minimum is found from the stationarity cubic 8s³ − 16Cs − 4C = 0
/// and cross-checked on a dense grid.
Certificate certify_lambda(double H0, double C);

/// q(x,u) at a given λ.
double certificate_quartic(const Certificate& cert, double lambda, double x, double u);

/// p(s) = q(1,s) at a given λ.
double certificate_profile(const Certificate& cert, double lambda, double s);

// ---- final-bound check at distinguished points -------------------------------------

struct FinalBoundCheck {
  bool ok = true;
  int trials = 0;
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  int worst_chart = -1;
  Eigen::VectorXcd worst_V;
  double worst_lhs = 0.0, worst_rhs = 0.0;
};

/// Checks R_{V V̄ V V̄} ≥ q(|X|,|U|) for random V at the origin of every
/// projectivized chart, |X| and |U| taken in the g- resp. h-norm (the
/// coordinate norms at a distinguished point).
FinalBoundCheck check_final_bound_at_origins(const Model& model, double lambda, double H0,
                                             double C, int trials, std::uint64_t seed);

// ---- certificate consistency --------------------------------------------------------

struct CertificateConsistency {
  double H0 = 0.0;
  BundleBound bound;
  Certificate cert;
  double lambda_used = 0.0;  // λ* when positive, else a representative λ
  Lambda0Result lambda0;
  bool check_lambda_star_ge_lambda0 = false;
  ScanReport scan_at_lambda_star;
  bool check_scan_positive = false;
  FinalBoundCheck bound_check;

  bool all_ok() const {
    return check_lambda_star_ge_lambda0 && check_scan_positive && bound_check.ok;
  }
};

struct ConsistencyOptions {
  int base_res = 9;
  int bound_res = 9;
  ScanOptions scan_opts{.res = 9, .fiber_res = 9, .starts = 12};
  double bracket_lo = 0.05;
  int trials = 200;
  std::uint64_t seed = 777;
};

/// H₀ from scanning the base model, C from bundle_bound_C, λ* from
/// certify_lambda; then (i) λ* ≥ empirical λ₀, (ii) scan at λ* positive,
/// (iii) the pointwise inequality at distinguished points.
CertificateConsistency certificate_consistency(const Model& model, const ConsistencyOptions& opt);

}  // namespace hsclab
