#pragma once

// Scalar expression trees in complex variables w_1..w_N and their
// conjugates, with exact symbolic Wirtinger differentiation up to the
// mixed (2,2) order needed by curvature computations. Expressions are
// immutable DAGs; evaluation and differentiation are pure. Simplification
// is limited to constant folding and flattening of nested sums/products.

#include <atomic>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsclab {

using Complex = std::complex<double>;

enum class ExprKind : std::uint8_t {
  Constant,
  Var,       // w_k, 1-based index
  ConjVar,   // conj(w_k)
  Sum,
  Product,
  IntPower,  // integer exponent, may be negative
  Log,       // natural log
  Conj,
};

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
public:
  ExprKind kind;
  Complex value{0.0, 0.0};  // Constant
  int var = 0;              // Var / ConjVar
  int exponent = 0;         // IntPower
  std::vector<Expr> kids;
  std::uint32_t id;         // unique per node, never reused

  explicit ExprNode(ExprKind k);
};

// ---- builders -------------------------------------------------------------

Expr constant(Complex c);
Expr constant(double re);
Expr variable(int index);
Expr conj_variable(int index);
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr ipow(Expr base, int exponent);
Expr log(Expr arg);
Expr conjugate(Expr arg);
Expr real_part(Expr arg);  // (e + conj e) / 2

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(double s, const Expr& a);

/// Largest variable index referenced by e (0 for constants).
int max_var_index(const Expr& e);

std::string to_string(const Expr& e);

// ---- errors ---------------------------------------------------------------

/// Raised when evaluation leaves the expression's domain (log of zero or of
/// a nonpositive real, zero raised to a negative power). Carries the
/// offending subexpression.
class EvalDomainError : public std::runtime_error {
public:
  EvalDomainError(const std::string& what, Expr offending);
  const Expr& offending() const { return offending_; }

private:
  Expr offending_;
};

// ---- derivatives ----------------------------------------------------------

/// Mixed Wirtinger multi-index: up to two holomorphic and two
/// antiholomorphic derivatives (all curvature needs).
struct DerivIndex {
  std::vector<int> hol;   // ∂/∂w_k slots
  std::vector<int> anti;  // ∂/∂conj(w_k) slots

  int order() const { return static_cast<int>(hol.size() + anti.size()); }
  void validate(int dim) const;  // throws std::invalid_argument

  static DerivIndex d(std::initializer_list<int> h, std::initializer_list<int> a) {
    return DerivIndex{std::vector<int>(h), std::vector<int>(a)};
  }
};

/// Single Wirtinger derivative: ∂/∂w_var (conjugated = false) or
/// ∂/∂conj(w_var). Treats w and conj(w) as independent. Results are
/// memoized globally; safe to call from multiple threads.
Expr differentiate(const Expr& e, int var, bool conjugated);

Expr differentiate(const Expr& e, const DerivIndex& d);

// ---- evaluation -----------------------------------------------------------

/// DAG-aware evaluator; reuse one context across many points to avoid
/// reallocation. Not meant to be shared between threads.
class EvalContext {
public:
  Complex evaluate(const Expr& e, std::span<const Complex> point);

private:
  Complex eval_node(const ExprNode* n, std::span<const Complex> point);
  std::vector<Complex> memo_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t gen_ = 0;
};

Complex evaluate(const Expr& e, std::span<const Complex> point);

/// True if conj(eval(e,w)) == eval(e,w) at `samples` pseudo-random points.
bool numerically_real(const Expr& e, int dim, int samples, std::uint64_t seed);

// ---- compiled evaluation --------------------------------------------------

/// A batch of expressions compiled to a flat tape over their shared DAG.
/// eval() is const and thread-safe given a per-caller scratch buffer.
class CompiledExprSet {
public:
  explicit CompiledExprSet(std::span<const Expr> roots);

  int n_roots() const { return static_cast<int>(roots_.size()); }
  std::size_t scratch_size() const { return tape_.size(); }

  void eval(std::span<const Complex> point, std::span<Complex> out,
            std::vector<Complex>& scratch) const;

private:
  struct Instr {
    ExprKind kind;
    Complex cval;
    int var = 0;
    int exponent = 0;
    std::uint32_t kid_begin = 0, kid_end = 0;  // into kid_slots_
  };
  std::vector<Instr> tape_;
  std::vector<std::uint32_t> kid_slots_;
  std::vector<std::uint32_t> roots_;
  std::vector<Expr> keepalive_;
};

// ---- finite-difference oracle (test oracle) -------------------------------

/// Central-difference estimate of the mixed Wirtinger partial d of e at
/// point, with real step h per derivative. Accuracy O(h²); used in tests
/// against differentiate∘evaluate.
Complex finite_difference_oracle(const Expr& e, const DerivIndex& d,
                                 std::span<const Complex> point, double step);

/// One Richardson extrapolation of the oracle: (4 D(h/2) − D(h)) / 3.
Complex finite_difference_richardson(const Expr& e, const DerivIndex& d,
                                     std::span<const Complex> point, double step);

/// Two Richardson levels, O(h⁶); preferred for fourth-order derivatives
/// where the single-level roundoff/truncation tradeoff is tight.
Complex finite_difference_richardson2(const Expr& e, const DerivIndex& d,
                                      std::span<const Complex> point, double step);

}  // namespace hsclab
