#pragma once

// Pointwise Kähler geometry from a local potential: complex Hessian metric,
// curvature tensor, holomorphic sectional curvature, scalar curvature.
//
// Conventions (these pin every downstream number):
//   G_{a b̄}      = ∂_a ∂̄_b φ
//   R_{a b̄ c d̄} = −∂_c ∂̄_d G_{a b̄} + Σ_{p,q} G^{p q̄} (∂_c G_{a p̄})(∂̄_d G_{q b̄})
//   H(V)         = R_{V V̄ V V̄} / |V|_G⁴
//   S            = Σ G^{a b̄} G^{c d̄} R_{a b̄ c d̄}
// so the Fubini–Study potential log(1+|z|²) has H ≡ +2 and S = n(n+1).

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "hsclab/expr.hpp"

namespace hsclab {

class SingularMetricError : public std::runtime_error {
public:
  SingularMetricError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

private:
  double min_eigenvalue_;
};

/// Hermitian coefficient matrix, entries(a,b) = G_{a b̄}.
class HermitianForm {
public:
  explicit HermitianForm(Eigen::MatrixXcd entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }

  double conj_symmetry_deviation() const;

  /// |V|²_G = Σ G_{a b̄} V_a conj(V_b); real for conjugate-symmetric entries.
  double norm_sq(const Eigen::VectorXcd& v) const;

  double min_eigenvalue() const;

  /// Inverse as a plain matrix: inverse()(q,p) together with the convention
  /// G^{p q̄} = inverse()(q,p). Throws SingularMetricError when the smallest
  /// eigenvalue is below 1e-12.
  Eigen::MatrixXcd inverse() const;

  /// Hermitian inverse square root of the norm matrix; maps Euclidean-unit
  /// vectors to G-unit vectors (unitary frame change).
  Eigen::MatrixXcd inverse_sqrt() const;

private:
  Eigen::MatrixXcd entries_;
};

/// Rank-4 curvature array R_{a b̄ c d̄} at a point.
class CurvatureTensor {
public:
  explicit CurvatureTensor(int dim);

  int dim() const { return dim_; }
  Complex& at(int a, int b, int c, int d) { return e_[idx(a, b, c, d)]; }
  Complex at(int a, int b, int c, int d) const { return e_[idx(a, b, c, d)]; }

  /// Σ R_{a b̄ c d̄} A_a conj(B_b) C_c conj(D_d)
  Complex contract(const Eigen::VectorXcd& A, const Eigen::VectorXcd& B,
                   const Eigen::VectorXcd& C, const Eigen::VectorXcd& D) const;

  /// real(R_{V V̄ V V̄})
  double quartic(const Eigen::VectorXcd& V) const;

  /// max |R_{a b̄ c d̄} − R_{c b̄ a d̄}| and |· − R_{a d̄ c b̄}|, relative.
  double kahler_symmetry_deviation() const;
  /// max |R_{a b̄ c d̄} − conj(R_{b ā d c̄})|, relative.
  double reality_deviation() const;

  /// Slotwise change of frame V = S·W: returns R̃ with R̃_{W...} = R_{V...}.
  CurvatureTensor transform(const Eigen::MatrixXcd& S) const;

private:
  std::size_t idx(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * dim_ + b) * dim_ + c) * dim_ + d;
  }
  int dim_;
  std::vector<Complex> e_;
};

/// Type-(1,0) tangent vector, optionally split into base and fiber parts.
struct TangentVector {
  Eigen::VectorXcd v;
  std::optional<int> base_dim;  // first base_dim components are the base part

  int dim() const { return static_cast<int>(v.size()); }
  Eigen::VectorXcd base_part() const;
  Eigen::VectorXcd fiber_part() const;
};

// ---- potential jets ---------------------------------------------------------

/// The (2,2)-jet of a potential compiled once: all mixed Wirtinger partials
/// of φ needed for the metric, its first derivatives and the curvature.
class PotentialJet {
public:
  PotentialJet(Expr phi, int dim);

  int dim() const { return dim_; }
  const Expr& potential() const { return phi_; }

  struct Values {
    int dim = 0;
    Eigen::MatrixXcd G;        // G_{a b̄}
    std::vector<Complex> dG;   // ∂_c G_{a b̄} at (a,b,c)
    std::vector<Complex> ddG;  // ∂_c ∂̄_d G_{a b̄} at (a,b,c,d)

    Complex dG_at(int a, int b, int c) const {
      return dG[(static_cast<std::size_t>(a) * dim + b) * dim + c];
    }
    Complex ddG_at(int a, int b, int c, int d) const {
      return ddG[((static_cast<std::size_t>(a) * dim + b) * dim + c) * dim + d];
    }
  };

  /// Metric only (cheaper tape). Thread-safe.
  Eigen::MatrixXcd metric(std::span<const Complex> point) const;

  /// Full jet. Thread-safe.
  Values full(std::span<const Complex> point) const;

private:
  Expr phi_;
  int dim_;
  // expression roots for the metric tape and the full tape, plus the
  // unpacking maps from tape outputs into symmetric storage
  std::unique_ptr<CompiledExprSet> metric_tape_;
  std::unique_ptr<CompiledExprSet> full_tape_;
  std::vector<std::pair<int, int>> g_slots_;                 // a<=b
  std::vector<std::array<int, 3>> dg_slots_;                 // a<=c, any b
  std::vector<std::array<int, 4>> ddg_slots_;                // a<=c, b<=d
};

/// Process-wide jet cache keyed by the potential's root node.
std::shared_ptr<const PotentialJet> jet_for(const Expr& phi, int dim);

// ---- operations -------------------------------------------------------------

HermitianForm metric_at(const Expr& phi, std::span<const Complex> point);

/// Throws SingularMetricError (naming the smallest eigenvalue) when the
/// metric at the point is not positive definite.
CurvatureTensor curvature_at(const Expr& phi, std::span<const Complex> point);

struct MetricAndCurvature {
  HermitianForm G;
  CurvatureTensor R;
};
MetricAndCurvature metric_and_curvature_at(const Expr& phi, std::span<const Complex> point);

/// Curvature from an already evaluated jet (scan hot path).
CurvatureTensor curvature_from_jet(const PotentialJet::Values& jv,
                                   const Eigen::MatrixXcd& G_inverse);

double hsc(const CurvatureTensor& R, const HermitianForm& G, const Eigen::VectorXcd& V);

double scalar_curvature(const CurvatureTensor& R, const HermitianForm& G);

struct SphereAverage {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Monte Carlo mean of H over G-unit vectors drawn uniformly (standard
/// complex Gaussians in a G-unitary frame, normalized). Converges to
/// 2S/(N(N+1)).
SphereAverage sphere_average_hsc(const CurvatureTensor& R, const HermitianForm& G,
                                 int samples, std::uint64_t seed);

// ---- deterministic RNG helpers ---------------------------------------------

/// Small xorshift-based generator used everywhere randomness is needed, so
/// reports are byte-identical for a fixed seed regardless of platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();             // [0,1)
  double normal();              // standard normal
  Complex complex_normal();     // (n1 + i n2)/√2
  Eigen::VectorXcd complex_normal_vector(int n);

private:
  std::uint64_t s_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hsclab
