#pragma once

// Catalog of base manifolds (M,g), Hermitian bundles (E,h), and the
// projectivized-bundle charts carrying the potential λ φ_g + log h(v,v̄)
// with v = e_{α0} + Σ_{α≠α0} t_α e_α.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hsclab/kahler.hpp"

namespace hsclab {

// ---- charts, transitions, atlases -------------------------------------------

struct Chart {
  std::string name;
  int dim = 0;
  Expr potential;
  double box = 2.0;  // sample box |Re|,|Im| <= box per coordinate
};

struct ChartTransition {
  int from = -1;
  int to = -1;
  std::vector<Expr> components;  // holomorphic functions of the `from` coords

  std::vector<Complex> apply(std::span<const Complex> point) const;
  Eigen::MatrixXcd jacobian(std::span<const Complex> point) const;  // J(i,j) = ∂T_i/∂x_j
};

struct Manifold {
  int dim = 0;
  std::vector<Chart> charts;
  std::vector<ChartTransition> transitions;
};

// ---- base manifolds ----------------------------------------------------------

struct BaseModel {
  std::string name;
  std::string kind;  // "fubini_study" | "product" | "flat" | "custom"
  int dim = 0;
  Manifold manifold;
};

/// P^n with n+1 affine charts, φ_g = log(1 + Σ|z_i|²), rational transitions.
BaseModel fubini_study(int n);

/// Single-chart C^n with φ = Σ|w_i|² (test model, not compact).
BaseModel flat_space(int n);

/// Chartwise product; the potential is the sum.
BaseModel product(const BaseModel& a, const BaseModel& b);

/// First chart of P^n only (for local test bundles without global cocycles).
BaseModel fubini_study_chart0(int n);

// ---- bundles ------------------------------------------------------------------

struct BundleModel {
  std::string name;
  std::string kind;  // "line_bundle_sum" | "custom"
  int rank = 0;      // r+1
  // h[chart][alpha][beta] = h_{α β̄}(z), Expr in the base chart variables
  std::vector<std::vector<std::vector<Expr>>> h;
  struct Cocycle {
    int from = -1, to = -1;
    std::vector<std::vector<Expr>> A;  // v_to = A(z_from) v_from
  };
  std::vector<Cocycle> cocycles;
  std::vector<int> degrees;  // line_bundle_sum only
};

/// ⊕_α O(a_α) over P^n with h_α = (1 + |z|²)^{−a_α} and the standard cocycle.
BundleModel line_bundle_sum(const BaseModel& base, const std::vector<int>& degrees);

/// Rank-2 bundle over a single P^1 chart with a small non-diagonal term
/// h_{0 1̄} = ε z² z̄ that vanishes to second order at 0 (keeps the
/// distinguished-frame conditions while making the mixed third-order
/// derivative displays nontrivial).
BundleModel twisted_local_bundle(double epsilon = 0.05);

// ---- projectivized total space -------------------------------------------------

struct ProjChartInfo {
  int base_chart = 0;
  int alpha0 = 0;
};

struct TotalSpace {
  Manifold manifold;
  std::vector<ProjChartInfo> chart_info;  // one entry per chart when projectivized
};

/// Potential of a single projectivized chart: λ φ_g + log h(v,v̄) in
/// variables z_1..z_n, t_1..t_r.
Expr proj_chart_potential(const BaseModel& base, const BundleModel& bundle, int base_chart,
                          int alpha0, double lambda);

/// Full atlas of P(E): one chart per (base chart, deleted index α0), with
/// transitions assembled from the base transitions and the bundle cocycle.
TotalSpace projectivize(const BaseModel& base, const BundleModel& bundle, double lambda);

// ---- models (catalog / config surface) ----------------------------------------

struct Model {
  std::string name;
  BaseModel base;
  std::optional<BundleModel> bundle;
  bool distinguished_frame_ok = false;  // catalog models satisfy the frame
                                        // conditions at (0,0); custom ones
                                        // are not checked

  int total_dim() const { return base.dim + (bundle ? bundle->rank - 1 : 0); }
  /// Base-only models ignore λ.
  TotalSpace total(double lambda) const;
};

Model catalog(const std::string& name);
std::vector<std::string> catalog_names();

// ---- bundle curvature -----------------------------------------------------------

/// Full (≤2,≤2)-jet of every h_{α β̄} entry on one chart, compiled once.
class BundleJet {
public:
  BundleJet(const std::vector<std::vector<Expr>>& h_entries, int n);

  int n() const { return n_; }
  int rank() const { return rank_; }

  struct Values {
    int n = 0, rank = 0;
    // contiguous arrays, slowest index first; e(α,β) = α*rank+β
    std::vector<Complex> h;     // [e]
    std::vector<Complex> d10;   // [e][i]
    std::vector<Complex> d01;   // [e][j]
    std::vector<Complex> d11;   // [e][i][j]
    std::vector<Complex> d20;   // [e][i][k]
    std::vector<Complex> d21;   // [e][i][k][j]
    std::vector<Complex> d22;   // [e][i][k][j][l]

    Complex h_at(int a, int b) const { return h[idx2(a, b)]; }
    Complex d10_at(int a, int b, int i) const { return d10[idx2(a, b) * n + i]; }
    Complex d01_at(int a, int b, int j) const { return d01[idx2(a, b) * n + j]; }
    Complex d11_at(int a, int b, int i, int j) const {
      return d11[(idx2(a, b) * n + i) * n + j];
    }
    Complex d20_at(int a, int b, int i, int k) const {
      return d20[(idx2(a, b) * n + i) * n + k];
    }
    Complex d21_at(int a, int b, int i, int k, int j) const {
      return d21[((idx2(a, b) * n + i) * n + k) * n + j];
    }
    Complex d22_at(int a, int b, int i, int k, int j, int l) const {
      return d22[(((idx2(a, b) * n + i) * n + k) * n + j) * n + l];
    }

   private:
    std::size_t idx2(int a, int b) const { return static_cast<std::size_t>(a) * rank + b; }
    friend class BundleJet;
  };

  Values eval(std::span<const Complex> z) const;

private:
  int n_, rank_;
  std::unique_ptr<CompiledExprSet> tape_;
  struct Slot {
    int which;  // 0:h 1:d10 2:d01 3:d11 4:d20 5:d21 6:d22
    int a, b, i, k, j, l;
  };
  std::vector<Slot> slots_;
};

struct BundleCurvature {
  int n = 0, rank = 0;
  std::vector<Complex> R;       // R^h_{α β̄ i j̄}: [((α·rank+β)·n+i)·n+j]
  Eigen::MatrixXcd theta_ww;    // n×n matrix of the (1,1)-form Θ^h_{w w̄}
  Eigen::VectorXd xi;           // eigenvalues of Θ^h_{w w̄} relative to g, ascending

  Complex R_at(int a, int b, int i, int j) const {
    return R[((static_cast<std::size_t>(a) * rank + b) * n + i) * n + j];
  }
};

/// Chern curvature of (E,h) at z, lowered components
///   R^h_{α β̄ i j̄} = −∂_i ∂̄_j h_{α β̄} + Σ h^{γ δ̄} (∂_i h_{α γ̄})(∂̄_j h_{δ β̄}),
/// contracted with the bundle vector w (Θ^h_{w w̄}); eigenvalues taken
/// relative to the base metric g so that at a g-normal origin they are the
/// normalized eigenvalues ξ_i of a gauge origin.
BundleCurvature bundle_curvature_at(const BundleModel& bundle, const BaseModel& base, int chart,
                                    std::span<const Complex> z, const Eigen::VectorXcd& w);

struct BundleBound {
  double sup_curvature = 0.0;  // max |R^h| component over the grid, unitary frames
  double sup_nabla = 0.0;      // max |∇R^h| component over the grid, unitary frames
  double second_jet = 0.0;     // distinguished-point bound on the 4th-order
                               // jet term h_{v v̄, X X̄ X X̄} − 2 (R^h_{v v̄ X X̄})²
  bool second_jet_valid = false;
  int grid_points = 0;

  /// Constant used in the quartic lower bound.
  double C() const {
    double c = std::max(sup_curvature, sup_nabla);
    if (second_jet_valid) c = std::max(c, second_jet);
    return c;
  }
};

/// Samples |R^h| and |∇R^h| (frame-corrected covariant derivative) in
/// unitary-at-point frames over a grid of base points, plus the
/// distinguished-point fourth-order term required by the final curvature
/// lower bound. res is the number of samples per real axis.
BundleBound bundle_bound_C(const BundleModel& bundle, const BaseModel& base, int res,
                           std::uint64_t seed = 4242);

}  // namespace hsclab
