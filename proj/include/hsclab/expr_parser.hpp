#pragma once

// Parser for potential / metric entry strings used in model config files.
// Grammar: +, -, *, /, ^INT, parentheses, numeric literals, `i` for the
// imaginary unit, and the functions log(x), conj(x), pow(x, INT).
// Variables are named by the caller (z1..zn, t1..tr).

#include <map>
#include <string>

#include "hsclab/expr.hpp"

namespace hsclab {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// vars maps variable name -> 1-based index.
Expr parse_expr(const std::string& text, const std::map<std::string, int>& vars);

/// Standard variable map for a chart: z1..zn then t1..tr.
std::map<std::string, int> chart_vars(int n_base, int n_fiber);

}  // namespace hsclab
