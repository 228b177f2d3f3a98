#include "hsclab/expr_parser.hpp"

#include <cctype>
#include <cstdlib>

namespace hsclab {

ParseError::ParseError(const std::string& msg, std::size_t position)
    : std::runtime_error(msg + " (at column " + std::to_string(position + 1) + ")"),
      position_(position) {}

namespace {

class Parser {
public:
  Parser(const std::string& text, const std::map<std::string, int>& vars)
      : text_(text), vars_(vars) {}

  Expr run() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr parse_sum() {
    skip_ws();
    bool neg = false;
    while (true) {
      if (eat('-')) neg = !neg;
      else if (eat('+')) continue;
      else break;
    }
    Expr e = parse_term();
    if (neg) e = -e;
    while (true) {
      if (eat('+')) {
        e = e + parse_term();
      } else if (eat('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      if (eat('*')) {
        e = e * parse_unary();
      } else if (eat('/')) {
        e = e * ipow(parse_unary(), -1);
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    bool neg = false;
    while (true) {
      if (eat('-')) neg = !neg;
      else if (eat('+')) continue;
      else break;
    }
    Expr e = parse_power();
    return neg ? -e : e;
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (eat('^')) return ipow(std::move(base), parse_int());
    return base;
  }

  int parse_int() {
    skip_ws();
    bool neg = false;
    if (eat('-')) neg = true;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected integer exponent", pos_);
    const int v = std::atoi(text_.substr(start, pos_ - start).c_str());
    return neg ? -v : v;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string s = text_.substr(start, pos_ - start);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ParseError("bad numeric literal", start);
    return constant(v);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    if (name == "log" || name == "conj") {
      if (!eat('(')) throw ParseError("expected '(' after " + name, pos_);
      Expr arg = parse_sum();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return name == "log" ? log(std::move(arg)) : conjugate(std::move(arg));
    }
    if (name == "pow") {
      if (!eat('(')) throw ParseError("expected '(' after pow", pos_);
      Expr base = parse_sum();
      if (!eat(',')) throw ParseError("expected ',' in pow", pos_);
      const int k = parse_int();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return ipow(std::move(base), k);
    }
    if (name == "i") return constant(Complex{0.0, 1.0});

    auto it = vars_.find(name);
    if (it == vars_.end()) throw ParseError("unknown identifier '" + name + "'", start);
    return variable(it->second);
  }

  const std::string& text_;
  const std::map<std::string, int>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text, const std::map<std::string, int>& vars) {
  return Parser(text, vars).run();
}

std::map<std::string, int> chart_vars(int n_base, int n_fiber) {
  std::map<std::string, int> m;
  for (int i = 1; i <= n_base; ++i) m["z" + std::to_string(i)] = i;
  for (int a = 1; a <= n_fiber; ++a) m["t" + std::to_string(a)] = n_base + a;
  return m;
}

}  // namespace hsclab
