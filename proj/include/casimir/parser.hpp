#pragma once

#include <string>
#include <vector>

#include "casimir/algebra.hpp"
#include "casimir/base.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

/// A well-formed line whose meaning is rejected: duplicate or diagonal
/// bracket, index out of range, undeclared parameter, nonlinear bracket
/// right side, unpinnable equality assumption.
struct SemanticError : Error {
  int line;  // 1-based; 0 when not tied to a line
  explicit SemanticError(const std::string& msg, int line_ = 0)
      : Error(msg), line(line_) {}
};

/// A lexically valid identifier that names nothing in scope.
struct UnknownSymbol : Error {
  std::string symbol;
  int line, col;  // 1-based
  UnknownSymbol(const std::string& symbol_, int line_, int col_)
      : Error("unknown symbol '" + symbol_ + "'"),
        symbol(symbol_),
        line(line_),
        col(col_) {}
};

/// Parses the line-oriented algebra format:
///
///   algebra <id>
///   dim <n>
///   params <name> ...                   (optional, at most once)
///   assume <poly in params> (!=|=|>) 0  (optional, repeated)
///   [i,j] = <linear comb of e1..en over Q(params)>
///
/// `#` starts a comment; blank lines are skipped; unlisted brackets are
/// zero; [j,i] with j > i is normalized by antisymmetry.  A univariate
/// linear `= 0` assumption pins the parameter to its root; other `= 0`
/// forms are rejected.  Does not check the Jacobi identity.
StructureConstants parse_algebra_file(const std::string& text);

/// Canonical text form; parse_algebra_file(serialize_algebra(sc))
/// reproduces sc, and serialization of the reparse is byte-identical.
std::string serialize_algebra(const StructureConstants& sc);

/// Parses an invariant over coordinates x1..xn (alias e1..en) and the
/// given parameters.  Operators + - * / ^ with the usual precedence,
/// functions exp, ln, atan (alias arctan), rational literals `p/q` via
/// constant folding.  `^` takes an exact rational exponent: a bare
/// (optionally negated) integer, or a parenthesized expression; if that
/// expression is not constant, b^(u) is read as exp(u*ln(b)).
SEp parse_invariant_expr(const std::string& text, int n,
                         const std::vector<std::string>& params = {});

}  // namespace casimir
