#include "hsclab/kahler.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

namespace hsclab {

// ---- HermitianForm ----------------------------------------------------------

HermitianForm::HermitianForm(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols())
    throw std::invalid_argument("HermitianForm: square matrix required");
}

double HermitianForm::conj_symmetry_deviation() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double HermitianForm::norm_sq(const Eigen::VectorXcd& v) const {
  Complex s{0.0, 0.0};
  for (int a = 0; a < dim(); ++a)
    for (int b = 0; b < dim(); ++b) s += entries_(a, b) * v(a) * std::conj(v(b));
  return s.real();
}

double HermitianForm::min_eigenvalue() const {
  // entries_ is Hermitian when conjugate symmetry holds; symmetrize to be safe
  Eigen::MatrixXcd h = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXcd HermitianForm::inverse() const {
  const double mineig = min_eigenvalue();
  if (mineig < 1e-12)
    throw SingularMetricError(
        "metric not positive definite (smallest eigenvalue " + std::to_string(mineig) + ")",
        mineig);
  return entries_.inverse();
}

Eigen::MatrixXcd HermitianForm::inverse_sqrt() const {
  // norm matrix Ĥ with |V|² = V^H Ĥ V is the transpose of entries_
  Eigen::MatrixXcd h = entries_.transpose();
  h = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const double mineig = es.eigenvalues().minCoeff();
  if (mineig < 1e-12)
    throw SingularMetricError(
        "metric not positive definite (smallest eigenvalue " + std::to_string(mineig) + ")",
        mineig);
  return es.operatorInverseSqrt();
}

// ---- CurvatureTensor --------------------------------------------------------

CurvatureTensor::CurvatureTensor(int dim)
    : dim_(dim), e_(static_cast<std::size_t>(dim) * dim * dim * dim, Complex{0.0, 0.0}) {
  if (dim < 1) throw std::invalid_argument("CurvatureTensor: dim must be >= 1");
}

Complex CurvatureTensor::contract(const Eigen::VectorXcd& A, const Eigen::VectorXcd& B,
                                  const Eigen::VectorXcd& C, const Eigen::VectorXcd& D) const {
  Complex s{0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    if (A(a) == Complex{0.0, 0.0}) continue;
    for (int b = 0; b < dim_; ++b) {
      const Complex ab = A(a) * std::conj(B(b));
      if (ab == Complex{0.0, 0.0}) continue;
      for (int c = 0; c < dim_; ++c) {
        if (C(c) == Complex{0.0, 0.0}) continue;
        const Complex abc = ab * C(c);
        for (int d = 0; d < dim_; ++d) s += at(a, b, c, d) * abc * std::conj(D(d));
      }
    }
  }
  return s;
}

double CurvatureTensor::quartic(const Eigen::VectorXcd& V) const {
  return contract(V, V, V, V).real();
}

double CurvatureTensor::kahler_symmetry_deviation() const {
  double scale = 0.0;
  for (const auto& v : e_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double dev = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d) {
          dev = std::max(dev, std::abs(at(a, b, c, d) - at(c, b, a, d)));
          dev = std::max(dev, std::abs(at(a, b, c, d) - at(a, d, c, b)));
        }
  return dev / scale;
}

double CurvatureTensor::reality_deviation() const {
  double scale = 0.0;
  for (const auto& v : e_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double dev = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d)
          dev = std::max(dev, std::abs(at(a, b, c, d) - std::conj(at(b, a, d, c))));
  return dev / scale;
}

CurvatureTensor CurvatureTensor::transform(const Eigen::MatrixXcd& S) const {
  const int n = dim_;
  if (S.rows() != n || S.cols() != n)
    throw std::invalid_argument("CurvatureTensor::transform: dimension mismatch");
  // contract one slot at a time; holomorphic slots with S, antiholomorphic
  // with conj(S)
  auto contract_slot = [n](const std::vector<Complex>& in, const Eigen::MatrixXcd& M, int slot) {
    std::vector<Complex> out(in.size(), Complex{0.0, 0.0});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            const std::size_t i = ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d;
            const int new_idx[4] = {a, b, c, d};
            Complex s{0.0, 0.0};
            for (int k = 0; k < n; ++k) {
              int idx4[4] = {a, b, c, d};
              idx4[slot] = k;
              const std::size_t j =
                  ((static_cast<std::size_t>(idx4[0]) * n + idx4[1]) * n + idx4[2]) * n + idx4[3];
              s += in[j] * M(k, new_idx[slot]);
            }
            out[i] = s;
          }
    return out;
  };

  CurvatureTensor r(n);
  std::vector<Complex> cur = e_;
  const Eigen::MatrixXcd Sc = S.conjugate();
  cur = contract_slot(cur, S, 0);
  cur = contract_slot(cur, Sc, 1);
  cur = contract_slot(cur, S, 2);
  cur = contract_slot(cur, Sc, 3);
  r.e_ = std::move(cur);
  return r;
}

Eigen::VectorXcd TangentVector::base_part() const {
  if (!base_dim) throw std::logic_error("TangentVector: no split marker");
  return v.head(*base_dim);
}

Eigen::VectorXcd TangentVector::fiber_part() const {
  if (!base_dim) throw std::logic_error("TangentVector: no split marker");
  return v.tail(v.size() - *base_dim);
}

// ---- PotentialJet -----------------------------------------------------------

PotentialJet::PotentialJet(Expr phi, int dim) : phi_(std::move(phi)), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("PotentialJet: dim must be >= 1");
  if (max_var_index(phi_) > dim)
    throw std::invalid_argument("PotentialJet: potential references variables beyond dim");
  if (!numerically_real(phi_, dim, 8, 0xa5f00d))
    throw std::invalid_argument("PotentialJet: potential is not real-valued at sample points");

  std::vector<Expr> g_roots;
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      g_slots_.push_back({a, b});
      g_roots.push_back(differentiate(differentiate(phi_, a + 1, false), b + 1, true));
    }
  metric_tape_ = std::make_unique<CompiledExprSet>(g_roots);

  std::vector<Expr> full_roots = g_roots;
  // ∂_c G_{a b̄} = φ_{,ac b̄}, symmetric in (a,c)
  for (int a = 0; a < dim; ++a)
    for (int c = a; c < dim; ++c) {
      Expr dac = differentiate(differentiate(phi_, a + 1, false), c + 1, false);
      for (int b = 0; b < dim; ++b) {
        dg_slots_.push_back({a, b, c});
        full_roots.push_back(differentiate(dac, b + 1, true));
      }
    }
  // ∂_c ∂̄_d G_{a b̄} = φ_{,ac b̄d̄}, symmetric in (a,c) and (b,d)
  for (int a = 0; a < dim; ++a)
    for (int c = a; c < dim; ++c) {
      Expr dac = differentiate(differentiate(phi_, a + 1, false), c + 1, false);
      for (int b = 0; b < dim; ++b)
        for (int d = b; d < dim; ++d) {
          ddg_slots_.push_back({a, b, c, d});
          full_roots.push_back(differentiate(differentiate(dac, b + 1, true), d + 1, true));
        }
    }
  full_tape_ = std::make_unique<CompiledExprSet>(full_roots);
}

Eigen::MatrixXcd PotentialJet::metric(std::span<const Complex> point) const {
  std::vector<Complex> out(g_slots_.size());
  std::vector<Complex> scratch;
  metric_tape_->eval(point, out, scratch);
  Eigen::MatrixXcd G(dim_, dim_);
  for (std::size_t i = 0; i < g_slots_.size(); ++i) {
    const auto [a, b] = g_slots_[i];
    G(a, b) = out[i];
    if (a != b) G(b, a) = std::conj(out[i]);
  }
  return G;
}

PotentialJet::Values PotentialJet::full(std::span<const Complex> point) const {
  std::vector<Complex> out(g_slots_.size() + dg_slots_.size() + ddg_slots_.size());
  std::vector<Complex> scratch;
  full_tape_->eval(point, out, scratch);

  Values v;
  v.dim = dim_;
  v.G.resize(dim_, dim_);
  const std::size_t n = dim_;
  v.dG.assign(n * n * n, Complex{0.0, 0.0});
  v.ddG.assign(n * n * n * n, Complex{0.0, 0.0});

  std::size_t k = 0;
  for (std::size_t i = 0; i < g_slots_.size(); ++i, ++k) {
    const auto [a, b] = g_slots_[i];
    v.G(a, b) = out[k];
    if (a != b) v.G(b, a) = std::conj(out[k]);
  }
  auto dg_set = [&](int a, int b, int c, Complex val) {
    v.dG[(static_cast<std::size_t>(a) * n + b) * n + c] = val;
  };
  for (std::size_t i = 0; i < dg_slots_.size(); ++i, ++k) {
    const auto [a, b, c] = dg_slots_[i];
    dg_set(a, b, c, out[k]);
    if (a != c) dg_set(c, b, a, out[k]);
  }
  auto ddg_set = [&](int a, int b, int c, int d, Complex val) {
    v.ddG[((static_cast<std::size_t>(a) * n + b) * n + c) * n + d] = val;
  };
  for (std::size_t i = 0; i < ddg_slots_.size(); ++i, ++k) {
    const auto [a, b, c, d] = ddg_slots_[i];
    ddg_set(a, b, c, d, out[k]);
    if (a != c) ddg_set(c, b, a, d, out[k]);
    if (b != d) ddg_set(a, d, c, b, out[k]);
    if (a != c && b != d) ddg_set(c, d, a, b, out[k]);
  }
  return v;
}

namespace {

struct JetCache {
  std::mutex mu;
  std::unordered_map<const ExprNode*, std::shared_ptr<const PotentialJet>> map;
};

JetCache& jet_cache() {
  static JetCache c;
  return c;
}

}  // namespace

std::shared_ptr<const PotentialJet> jet_for(const Expr& phi, int dim) {
  auto& c = jet_cache();
  {
    std::lock_guard<std::mutex> lk(c.mu);
    auto it = c.map.find(phi.get());
    if (it != c.map.end()) return it->second;
  }
  auto jet = std::make_shared<const PotentialJet>(phi, dim);
  std::lock_guard<std::mutex> lk(c.mu);
  c.map.emplace(phi.get(), jet);
  return c.map.at(phi.get());
}

// ---- operations -------------------------------------------------------------

HermitianForm metric_at(const Expr& phi, std::span<const Complex> point) {
  const int dim = static_cast<int>(point.size());
  auto jet = jet_for(phi, dim);
  return HermitianForm(jet->metric(point));
}

CurvatureTensor curvature_from_jet(const PotentialJet::Values& jv,
                                   const Eigen::MatrixXcd& G_inverse) {
  const int n = jv.dim;
  CurvatureTensor R(n);
  // Γ(a,b,c,d) = Σ_{p,q} G^{p q̄} ∂_c G_{a p̄} conj(∂_d G_{b q̄}), where
  // G^{p q̄} is the (p,q) entry of the matrix inverse of G_{a b̄}; the
  // pairing is pinned by constant H on Fubini-Study away from the origin
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Complex gamma{0.0, 0.0};
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              gamma += G_inverse(p, q) * jv.dG_at(a, p, c) * std::conj(jv.dG_at(b, q, d));
          R.at(a, b, c, d) = -jv.ddG_at(a, b, c, d) + gamma;
        }
  return R;
}

MetricAndCurvature metric_and_curvature_at(const Expr& phi, std::span<const Complex> point) {
  const int dim = static_cast<int>(point.size());
  auto jet = jet_for(phi, dim);
  auto jv = jet->full(point);
  HermitianForm G(jv.G);
  Eigen::MatrixXcd Ginv = G.inverse();  // throws when not positive definite
  return MetricAndCurvature{std::move(G), curvature_from_jet(jv, Ginv)};
}

CurvatureTensor curvature_at(const Expr& phi, std::span<const Complex> point) {
  return metric_and_curvature_at(phi, point).R;
}

double hsc(const CurvatureTensor& R, const HermitianForm& G, const Eigen::VectorXcd& V) {
  const double n2 = G.norm_sq(V);
  if (!(n2 > 0.0)) {
    if (V.norm() == 0.0) throw std::invalid_argument("hsc: zero tangent vector");
    throw SingularMetricError("hsc: vector has nonpositive G-norm", n2);
  }
  return R.quartic(V) / (n2 * n2);
}

double scalar_curvature(const CurvatureTensor& R, const HermitianForm& G) {
  const Eigen::MatrixXcd Minv = G.inverse();
  const int n = R.dim();
  // pairing fixed by the unitary-frame trace Σ R̃_{a ā c c̄}
  Complex s{0.0, 0.0};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          s += Minv(b, a) * Minv(d, c) * R.at(a, b, c, d);
  return s.real();
}

SphereAverage sphere_average_hsc(const CurvatureTensor& R, const HermitianForm& G, int samples,
                                 std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sphere_average_hsc: samples must be >= 1");
  const int n = R.dim();
  // move to a G-unitary frame, where the G-sphere is the Euclidean sphere
  const Eigen::MatrixXcd S = G.inverse_sqrt();
  const CurvatureTensor Rt = R.transform(S);

  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXcd w = rng.complex_normal_vector(n);
    const double nrm = w.norm();
    if (nrm < 1e-12) {
      w.setZero();
      w(0) = 1.0;
    } else {
      w /= nrm;
    }
    const double h = Rt.quartic(w);
    const double delta = h - mean;
    mean += delta / (i + 1);
    m2 += delta * (h - mean);
  }
  SphereAverage out;
  out.mean = mean;
  out.samples = samples;
  out.std_error = samples > 1 ? std::sqrt(m2 / (samples - 1.0) / samples) : 0.0;
  return out;
}

// ---- Rng --------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : s_(seed ? seed : 0x853c49e6748fea9bull) {}

std::uint64_t Rng::next_u64() {
  s_ ^= s_ << 13;
  s_ ^= s_ >> 7;
  s_ ^= s_ << 17;
  return s_;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) / 9007199254740992.0;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

Complex Rng::complex_normal() {
  const double a = normal();
  const double b = normal();
  return Complex{a, b} / std::sqrt(2.0);
}

Eigen::VectorXcd Rng::complex_normal_vector(int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_normal();
  return v;
}

}  // namespace hsclab
