#pragma once

// Numeric verification of the displayed component formulas for the metric
// G = λ π*(g) + i∂∂̄ log h(v,v̄) at the distinguished points (0,0) of the
// catalog charts: origin values, the in-chart component and
// first-derivative displays, the origin second-derivative table, the
// curvature decomposition, and the final quartic lower bound.

#include "hsclab/positivity.hpp"

namespace hsclab {

struct IdentityCase {
  std::string id;  // origin-values | first-derivs | second-derivs-ijkl |
                   // second-derivs-ijkb | second-derivs-ijab | second-derivs-ajgl |
                   // second-derivs-abgj | second-derivs-abgd |
                   // curvature-decomposition | final-bound
  std::string model;
  double lambda = 0.0;
  int chart = -1;
  double deviation = std::numeric_limits<double>::infinity();
  double tolerance = 1e-8;
  std::string detail;

  bool pass() const { return std::isfinite(deviation) && deviation < tolerance; }
};

std::vector<IdentityCase> check_origin_values(const Model& model, double lambda);

/// The four metric-component displays plus three representative
/// first-derivative displays, at random non-distinguished chart points
/// (they hold identically in the chart, not only at 0).
std::vector<IdentityCase> check_first_derivatives(const Model& model, double lambda,
                                                  std::uint64_t seed = 31);

/// All six second-derivative displays at the origin, one case per display.
std::vector<IdentityCase> check_second_derivatives(const Model& model, double lambda);

/// Quartic expansion of R_{V V̄ V V̄} into the grouped slot contractions for
/// random V, plus the diagonal-point curvature formula from raw potential
/// derivatives.
std::vector<IdentityCase> check_curvature_decomposition(const Model& model, double lambda,
                                                        int trials, std::uint64_t seed = 57);

/// Pointwise inequality R_{V V̄ V V̄} ≥ q(|X|,|U|) at the distinguished
/// points together with the expansion equality for −G_{V V̄, V V̄}.
std::vector<IdentityCase> check_final_bound(const Model& model, double lambda, double H0, double C,
                                            int trials, std::uint64_t seed = 91);

struct PaperCheckOptions {
  double lambda = 5.0;
  int decomposition_trials = 100;
  int bound_trials = 500;
  std::uint64_t seed = 2024;
  int base_res = 9;   // H0 scan resolution
  int bound_res = 9;  // bundle_bound_C resolution
};

struct PaperCheckReport {
  std::string model;
  double lambda = 0.0;
  bool excluded = false;  // custom models without the distinguished frame
  std::string exclusion_reason;
  double H0 = 0.0;
  double C = 0.0;
  std::vector<IdentityCase> cases;

  bool all_pass() const {
    if (excluded) return false;
    for (const auto& c : cases)
      if (!c.pass()) return false;
    return true;
  }
};

/// Runs every identity check on one model. Models without the catalog's
/// distinguished-frame guarantee are excluded with a report entry rather
/// than checked.
PaperCheckReport papercheck_model(const Model& model, const PaperCheckOptions& opt);

}  // namespace hsclab
