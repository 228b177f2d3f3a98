#include "hsclab/expr.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace hsclab {

namespace {

std::atomic<std::uint32_t> g_next_id{1};

Expr make(ExprKind k) { return std::make_shared<ExprNode>(k); }

bool is_const(const Expr& e, Complex c) {
  return e->kind == ExprKind::Constant && e->value == c;
}

}  // namespace

ExprNode::ExprNode(ExprKind k) : kind(k), id(g_next_id.fetch_add(1, std::memory_order_relaxed)) {}

Expr constant(Complex c) {
  auto n = std::make_shared<ExprNode>(ExprKind::Constant);
  n->value = c;
  return n;
}

Expr constant(double re) { return constant(Complex{re, 0.0}); }

Expr variable(int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  auto n = std::make_shared<ExprNode>(ExprKind::Var);
  n->var = index;
  return n;
}

Expr conj_variable(int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  auto n = std::make_shared<ExprNode>(ExprKind::ConjVar);
  n->var = index;
  return n;
}

Expr sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  Complex c{0.0, 0.0};
  for (auto& t : terms) {
    if (!t) throw std::invalid_argument("null expression in sum");
    if (t->kind == ExprKind::Constant) {
      c += t->value;
    } else if (t->kind == ExprKind::Sum) {
      for (auto& k : t->kids) {
        if (k->kind == ExprKind::Constant)
          c += k->value;
        else
          flat.push_back(k);
      }
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (c != Complex{0.0, 0.0}) flat.push_back(constant(c));
  if (flat.empty()) return constant(0.0);
  if (flat.size() == 1) return flat[0];
  auto n = make(ExprKind::Sum);
  const_cast<ExprNode*>(n.get())->kids = std::move(flat);
  return n;
}

Expr product(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  Complex c{1.0, 0.0};
  for (auto& f : factors) {
    if (!f) throw std::invalid_argument("null expression in product");
    if (f->kind == ExprKind::Constant) {
      c *= f->value;
    } else if (f->kind == ExprKind::Product) {
      for (auto& k : f->kids) {
        if (k->kind == ExprKind::Constant)
          c *= k->value;
        else
          flat.push_back(k);
      }
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (c == Complex{0.0, 0.0}) return constant(0.0);
  if (c != Complex{1.0, 0.0}) flat.push_back(constant(c));
  if (flat.empty()) return constant(1.0);
  if (flat.size() == 1) return flat[0];
  // constants at the front for readable printing
  std::stable_partition(flat.begin(), flat.end(),
                        [](const Expr& e) { return e->kind == ExprKind::Constant; });
  auto n = make(ExprKind::Product);
  const_cast<ExprNode*>(n.get())->kids = std::move(flat);
  return n;
}

Expr ipow(Expr base, int exponent) {
  if (!base) throw std::invalid_argument("null base in ipow");
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  if (base->kind == ExprKind::Constant) {
    const Complex v = base->value;
    if (v != Complex{0.0, 0.0} || exponent > 0) {
      Complex r{1.0, 0.0};
      const int n = exponent < 0 ? -exponent : exponent;
      Complex b = v;
      for (int i = 0; i < n; ++i) r *= b;
      if (exponent < 0) r = Complex{1.0, 0.0} / r;
      return constant(r);
    }
  }
  if (base->kind == ExprKind::IntPower)
    return ipow(base->kids[0], base->exponent * exponent);
  auto n = make(ExprKind::IntPower);
  auto* m = const_cast<ExprNode*>(n.get());
  m->exponent = exponent;
  m->kids.push_back(std::move(base));
  return n;
}

Expr log(Expr arg) {
  if (!arg) throw std::invalid_argument("null argument in log");
  if (arg->kind == ExprKind::Constant && arg->value.imag() == 0.0 && arg->value.real() > 0.0)
    return constant(std::log(arg->value.real()));
  auto n = make(ExprKind::Log);
  const_cast<ExprNode*>(n.get())->kids.push_back(std::move(arg));
  return n;
}

Expr conjugate(Expr arg) {
  if (!arg) throw std::invalid_argument("null argument in conjugate");
  switch (arg->kind) {
    case ExprKind::Constant:
      return constant(std::conj(arg->value));
    case ExprKind::Var:
      return conj_variable(arg->var);
    case ExprKind::ConjVar:
      return variable(arg->var);
    case ExprKind::Sum: {
      std::vector<Expr> kids;
      kids.reserve(arg->kids.size());
      for (auto& k : arg->kids) kids.push_back(conjugate(k));
      return sum(std::move(kids));
    }
    case ExprKind::Product: {
      std::vector<Expr> kids;
      kids.reserve(arg->kids.size());
      for (auto& k : arg->kids) kids.push_back(conjugate(k));
      return product(std::move(kids));
    }
    case ExprKind::IntPower:
      return ipow(conjugate(arg->kids[0]), arg->exponent);
    case ExprKind::Conj:
      return arg->kids[0];
    case ExprKind::Log: {
      // keep the wrapper; pushing conj through log is only valid off the
      // branch cut
      auto n = make(ExprKind::Conj);
      const_cast<ExprNode*>(n.get())->kids.push_back(std::move(arg));
      return n;
    }
  }
  throw std::logic_error("conjugate: unreachable");
}

Expr real_part(Expr arg) {
  Expr c = conjugate(arg);
  return product({constant(0.5), sum({std::move(arg), std::move(c)})});
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, product({constant(-1.0), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator-(const Expr& a) { return product({constant(-1.0), a}); }
Expr operator*(double s, const Expr& a) { return product({constant(s), a}); }

int max_var_index(const Expr& e) {
  int m = (e->kind == ExprKind::Var || e->kind == ExprKind::ConjVar) ? e->var : 0;
  for (auto& k : e->kids) m = std::max(m, max_var_index(k));
  return m;
}

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Sum: return 1;
    case ExprKind::Product: return 2;
    case ExprKind::IntPower: return 3;
    default: return 4;
  }
}

void print(std::ostringstream& os, const Expr& e, int parent_prec) {
  const int prec = precedence(e->kind);
  const bool paren = prec < parent_prec;
  if (paren) os << '(';
  switch (e->kind) {
    case ExprKind::Constant: {
      const Complex v = e->value;
      if (v.imag() == 0.0) {
        os << v.real();
      } else {
        os << '(' << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i)";
      }
      break;
    }
    case ExprKind::Var: os << 'w' << e->var; break;
    case ExprKind::ConjVar: os << "conj(w" << e->var << ')'; break;
    case ExprKind::Sum:
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << " + ";
        print(os, e->kids[i], prec);
      }
      break;
    case ExprKind::Product:
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << '*';
        print(os, e->kids[i], prec + 1);
      }
      break;
    case ExprKind::IntPower:
      print(os, e->kids[0], prec + 1);
      os << '^' << e->exponent;
      break;
    case ExprKind::Log:
      os << "log(";
      print(os, e->kids[0], 0);
      os << ')';
      break;
    case ExprKind::Conj:
      os << "conj(";
      print(os, e->kids[0], 0);
      os << ')';
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

EvalDomainError::EvalDomainError(const std::string& what, Expr offending)
    : std::runtime_error(what + ": " + to_string(offending)), offending_(std::move(offending)) {}

void DerivIndex::validate(int dim) const {
  if (hol.size() > 2 || anti.size() > 2)
    throw std::invalid_argument("DerivIndex: at most two derivatives per type");
  for (int v : hol)
    if (v < 1 || v > dim) throw std::invalid_argument("DerivIndex: holomorphic index out of range");
  for (int v : anti)
    if (v < 1 || v > dim) throw std::invalid_argument("DerivIndex: antiholomorphic index out of range");
}

// ---- differentiation ------------------------------------------------------

namespace {

class DiffCache {
public:
  static DiffCache& instance() {
    static DiffCache c;
    return c;
  }

  Expr get(const Expr& e, int var, bool bar) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(e->id) << 8) | (static_cast<std::uint64_t>(var) << 1) |
        (bar ? 1u : 0u);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second.result;
    }
    Expr r = compute(e, var, bar);
    std::lock_guard<std::mutex> lk(mu_);
    map_.emplace(key, Entry{e, r});
    return r;
  }

private:
  Expr compute(const Expr& e, int var, bool bar);

  struct Entry {
    Expr source;  // keeps the keyed node (and thus its id) alive
    Expr result;
  };
  std::mutex mu_;
  std::unordered_map<std::uint64_t, Entry> map_;
};

Expr DiffCache::compute(const Expr& e, int var, bool bar) {
  switch (e->kind) {
    case ExprKind::Constant:
      return constant(0.0);
    case ExprKind::Var:
      return constant((!bar && e->var == var) ? 1.0 : 0.0);
    case ExprKind::ConjVar:
      return constant((bar && e->var == var) ? 1.0 : 0.0);
    case ExprKind::Sum: {
      std::vector<Expr> kids;
      kids.reserve(e->kids.size());
      for (auto& k : e->kids) kids.push_back(get(k, var, bar));
      return sum(std::move(kids));
    }
    case ExprKind::Product: {
      std::vector<Expr> terms;
      terms.reserve(e->kids.size());
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        Expr di = get(e->kids[i], var, bar);
        if (is_const(di, Complex{0.0, 0.0})) continue;
        std::vector<Expr> fac;
        fac.reserve(e->kids.size());
        for (std::size_t j = 0; j < e->kids.size(); ++j) fac.push_back(j == i ? di : e->kids[j]);
        terms.push_back(product(std::move(fac)));
      }
      return sum(std::move(terms));
    }
    case ExprKind::IntPower: {
      Expr df = get(e->kids[0], var, bar);
      if (is_const(df, Complex{0.0, 0.0})) return constant(0.0);
      return product({constant(static_cast<double>(e->exponent)),
                      ipow(e->kids[0], e->exponent - 1), std::move(df)});
    }
    case ExprKind::Log: {
      Expr df = get(e->kids[0], var, bar);
      if (is_const(df, Complex{0.0, 0.0})) return constant(0.0);
      return product({std::move(df), ipow(e->kids[0], -1)});
    }
    case ExprKind::Conj:
      return conjugate(get(e->kids[0], var, !bar));
  }
  throw std::logic_error("differentiate: unreachable");
}

}  // namespace

Expr differentiate(const Expr& e, int var, bool conjugated) {
  if (!e) throw std::invalid_argument("differentiate: null expression");
  if (var < 1 || var > 63) throw std::invalid_argument("differentiate: variable index out of range");
  return DiffCache::instance().get(e, var, conjugated);
}

Expr differentiate(const Expr& e, const DerivIndex& d) {
  Expr r = e;
  for (int v : d.hol) r = differentiate(r, v, false);
  for (int v : d.anti) r = differentiate(r, v, true);
  return r;
}

// ---- evaluation -----------------------------------------------------------

namespace {

Complex eval_pow(Complex base, int exponent, const ExprNode* n) {
  if (base == Complex{0.0, 0.0} && exponent < 0)
    throw EvalDomainError("zero raised to a negative power",
                          Expr(n->kids[0]));
  Complex r{1.0, 0.0};
  Complex b = base;
  int k = exponent < 0 ? -exponent : exponent;
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  if (exponent < 0) r = Complex{1.0, 0.0} / r;
  return r;
}

Complex eval_log(Complex v, const Expr& arg) {
  const double mag = std::abs(v);
  if (mag == 0.0) throw EvalDomainError("log of zero", arg);
  if (v.real() <= 0.0 && std::abs(v.imag()) <= 1e-14 * (1.0 + mag))
    throw EvalDomainError("log of a nonpositive real", arg);
  return std::log(v);
}

}  // namespace

Complex EvalContext::eval_node(const ExprNode* n, std::span<const Complex> point) {
  if (n->id < stamp_.size() && stamp_[n->id] == gen_) return memo_[n->id];
  Complex r;
  switch (n->kind) {
    case ExprKind::Constant: r = n->value; break;
    case ExprKind::Var:
      if (n->var > static_cast<int>(point.size()))
        throw std::out_of_range("evaluate: point dimension too small for w" + std::to_string(n->var));
      r = point[n->var - 1];
      break;
    case ExprKind::ConjVar:
      if (n->var > static_cast<int>(point.size()))
        throw std::out_of_range("evaluate: point dimension too small for w" + std::to_string(n->var));
      r = std::conj(point[n->var - 1]);
      break;
    case ExprKind::Sum: {
      r = Complex{0.0, 0.0};
      for (auto& k : n->kids) r += eval_node(k.get(), point);
      break;
    }
    case ExprKind::Product: {
      r = Complex{1.0, 0.0};
      for (auto& k : n->kids) r *= eval_node(k.get(), point);
      break;
    }
    case ExprKind::IntPower:
      r = eval_pow(eval_node(n->kids[0].get(), point), n->exponent, n);
      break;
    case ExprKind::Log:
      r = eval_log(eval_node(n->kids[0].get(), point), n->kids[0]);
      break;
    case ExprKind::Conj:
      r = std::conj(eval_node(n->kids[0].get(), point));
      break;
    default:
      throw std::logic_error("evaluate: unreachable");
  }
  if (n->id >= stamp_.size()) {
    stamp_.resize(n->id + 1, 0);
    memo_.resize(n->id + 1);
  }
  stamp_[n->id] = gen_;
  memo_[n->id] = r;
  return r;
}

Complex EvalContext::evaluate(const Expr& e, std::span<const Complex> point) {
  if (!e) throw std::invalid_argument("evaluate: null expression");
  ++gen_;
  if (gen_ == 0) {  // stamp wrap-around
    std::fill(stamp_.begin(), stamp_.end(), 0u);
    gen_ = 1;
  }
  return eval_node(e.get(), point);
}

Complex evaluate(const Expr& e, std::span<const Complex> point) {
  EvalContext ctx;
  return ctx.evaluate(e, point);
}

bool numerically_real(const Expr& e, int dim, int samples, std::uint64_t seed) {
  EvalContext ctx;
  std::uint64_t s = seed ? seed : 0x9e3779b97f4a7c15ull;
  auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  std::vector<Complex> pt(dim);
  for (int i = 0; i < samples; ++i) {
    for (int k = 0; k < dim; ++k) {
      const double re = (static_cast<double>(next() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
      const double im = (static_cast<double>(next() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
      pt[k] = Complex{re, im};
    }
    Complex v;
    try {
      v = ctx.evaluate(e, pt);
    } catch (const EvalDomainError&) {
      continue;
    }
    if (std::abs(v.imag()) > 1e-10 * (1.0 + std::abs(v))) return false;
  }
  return true;
}

// ---- compiled evaluation --------------------------------------------------

CompiledExprSet::CompiledExprSet(std::span<const Expr> roots) {
  std::unordered_map<const ExprNode*, std::uint32_t> slot;
  slot.reserve(1024);

  // iterative postorder over the shared DAG
  struct Frame {
    const ExprNode* n;
    std::size_t next_kid;
  };
  std::vector<Frame> stack;
  auto emit = [&](const ExprNode* n) -> std::uint32_t {
    auto it = slot.find(n);
    if (it != slot.end()) return it->second;
    stack.push_back({n, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_kid < f.n->kids.size()) {
        const ExprNode* k = f.n->kids[f.next_kid++].get();
        if (!slot.count(k)) stack.push_back({k, 0});
        continue;
      }
      if (!slot.count(f.n)) {
        Instr ins;
        ins.kind = f.n->kind;
        ins.cval = f.n->value;
        ins.var = f.n->var;
        ins.exponent = f.n->exponent;
        ins.kid_begin = static_cast<std::uint32_t>(kid_slots_.size());
        for (auto& k : f.n->kids) kid_slots_.push_back(slot.at(k.get()));
        ins.kid_end = static_cast<std::uint32_t>(kid_slots_.size());
        slot.emplace(f.n, static_cast<std::uint32_t>(tape_.size()));
        tape_.push_back(ins);
      }
      stack.pop_back();
    }
    return slot.at(n);
  };

  for (auto& r : roots) {
    if (!r) throw std::invalid_argument("CompiledExprSet: null root");
    roots_.push_back(emit(r.get()));
    keepalive_.push_back(r);
  }
}

void CompiledExprSet::eval(std::span<const Complex> point, std::span<Complex> out,
                           std::vector<Complex>& scratch) const {
  if (out.size() < roots_.size()) throw std::invalid_argument("CompiledExprSet: output too small");
  scratch.resize(tape_.size());
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const Instr& ins = tape_[i];
    Complex r;
    switch (ins.kind) {
      case ExprKind::Constant: r = ins.cval; break;
      case ExprKind::Var:
        if (ins.var > static_cast<int>(point.size()))
          throw std::out_of_range("CompiledExprSet: point dimension too small");
        r = point[ins.var - 1];
        break;
      case ExprKind::ConjVar:
        if (ins.var > static_cast<int>(point.size()))
          throw std::out_of_range("CompiledExprSet: point dimension too small");
        r = std::conj(point[ins.var - 1]);
        break;
      case ExprKind::Sum: {
        r = Complex{0.0, 0.0};
        for (std::uint32_t k = ins.kid_begin; k < ins.kid_end; ++k) r += scratch[kid_slots_[k]];
        break;
      }
      case ExprKind::Product: {
        r = Complex{1.0, 0.0};
        for (std::uint32_t k = ins.kid_begin; k < ins.kid_end; ++k) r *= scratch[kid_slots_[k]];
        break;
      }
      case ExprKind::IntPower: {
        const Complex b = scratch[kid_slots_[ins.kid_begin]];
        if (b == Complex{0.0, 0.0} && ins.exponent < 0)
          throw EvalDomainError("zero raised to a negative power", keepalive_.front());
        Complex acc{1.0, 0.0};
        Complex bb = b;
        int k = ins.exponent < 0 ? -ins.exponent : ins.exponent;
        while (k > 0) {
          if (k & 1) acc *= bb;
          bb *= bb;
          k >>= 1;
        }
        r = ins.exponent < 0 ? Complex{1.0, 0.0} / acc : acc;
        break;
      }
      case ExprKind::Log: {
        const Complex v = scratch[kid_slots_[ins.kid_begin]];
        const double mag = std::abs(v);
        if (mag == 0.0) throw EvalDomainError("log of zero", keepalive_.front());
        if (v.real() <= 0.0 && std::abs(v.imag()) <= 1e-14 * (1.0 + mag))
          throw EvalDomainError("log of a nonpositive real", keepalive_.front());
        r = std::log(v);
        break;
      }
      case ExprKind::Conj:
        r = std::conj(scratch[kid_slots_[ins.kid_begin]]);
        break;
      default:
        throw std::logic_error("CompiledExprSet: unreachable");
    }
    scratch[i] = r;
  }
  for (std::size_t i = 0; i < roots_.size(); ++i) out[i] = scratch[roots_[i]];
}

// ---- finite differences ---------------------------------------------------

namespace {

Complex fd_recurse(const Expr& e, std::span<const int> hol, std::span<const int> anti,
                   std::vector<Complex>& pt, double h, EvalContext& ctx) {
  if (!hol.empty()) {
    const int a = hol.front() - 1;
    auto rest_h = hol.subspan(1);
    const Complex save = pt[a];
    auto probe = [&](Complex delta) {
      pt[a] = save + delta;
      Complex v = fd_recurse(e, rest_h, anti, pt, h, ctx);
      pt[a] = save;
      return v;
    };
    // ∂/∂w = (∂/∂x − i ∂/∂y)/2 via central differences
    const Complex fx = probe(Complex{h, 0.0}) - probe(Complex{-h, 0.0});
    const Complex fy = probe(Complex{0.0, h}) - probe(Complex{0.0, -h});
    return (fx - Complex{0.0, 1.0} * fy) / (4.0 * h);
  }
  if (!anti.empty()) {
    const int a = anti.front() - 1;
    auto rest_a = anti.subspan(1);
    const Complex save = pt[a];
    auto probe = [&](Complex delta) {
      pt[a] = save + delta;
      Complex v = fd_recurse(e, hol, rest_a, pt, h, ctx);
      pt[a] = save;
      return v;
    };
    const Complex fx = probe(Complex{h, 0.0}) - probe(Complex{-h, 0.0});
    const Complex fy = probe(Complex{0.0, h}) - probe(Complex{0.0, -h});
    return (fx + Complex{0.0, 1.0} * fy) / (4.0 * h);
  }
  return ctx.evaluate(e, pt);
}

}  // namespace

Complex finite_difference_oracle(const Expr& e, const DerivIndex& d,
                                 std::span<const Complex> point, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_difference_oracle: step must be > 0");
  std::vector<Complex> pt(point.begin(), point.end());
  const int need = max_var_index(e);
  if (static_cast<int>(pt.size()) < need) pt.resize(need, Complex{0.0, 0.0});
  EvalContext ctx;
  return fd_recurse(e, d.hol, d.anti, pt, step, ctx);
}

Complex finite_difference_richardson(const Expr& e, const DerivIndex& d,
                                     std::span<const Complex> point, double step) {
  const Complex coarse = finite_difference_oracle(e, d, point, step);
  const Complex fine = finite_difference_oracle(e, d, point, step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

Complex finite_difference_richardson2(const Expr& e, const DerivIndex& d,
                                      std::span<const Complex> point, double step) {
  const Complex coarse = finite_difference_richardson(e, d, point, step);
  const Complex fine = finite_difference_richardson(e, d, point, step / 2.0);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace hsclab
