#pragma once

#include <string>
#include <vector>

#include "casimir/scalar_expr.hpp"

namespace casimir {

/// One term of a polynomial in non-commuting basis symbols: a commutative
/// scalar coefficient (exact rational, possibly involving parameters) times
/// an ordered word of 0-based basis indices.
struct NCTerm {
  SEp coeff;
  std::vector<int> word;
};

/// Polynomial in non-commuting basis symbols. Terms stay in first-use order;
/// every construction path merges like words and drops zero coefficients, so
/// equality is order-insensitive term-set equality.
struct NCPolynomial {
  std::vector<NCTerm> terms;

  bool zero() const { return terms.empty(); }
};

/// Normalizes an arbitrary term list: merges like words, drops zeros.
NCPolynomial nc_make(std::vector<NCTerm> terms);
NCPolynomial nc_add(const NCPolynomial& a, const NCPolynomial& b);
NCPolynomial nc_scale(const SEp& c, const NCPolynomial& p);
bool nc_equal(const NCPolynomial& a, const NCPolynomial& b);

/// Forgets ordering: each word becomes a commutative product of Var leaves.
SEp nc_collapse(const NCPolynomial& p);

/// Average of e_{i1}...e_{ir} over all r! reorderings of its letters, with
/// equal words merged exactly, so each distinct arrangement of a word with
/// repeated letters carries (product of letter multiplicities)/r!. Length-1
/// words map to themselves. Throws Error on an empty word.
NCPolynomial symmetrize_monomial(const std::vector<int>& word);

/// Applies symmetrize_monomial to every term, keeping coefficients.
NCPolynomial nc_symmetrize(const NCPolynomial& p);

/// Table-style rendering: runs of a repeated symbol print as powers, and
/// terms whose words are reorderings of one another and share a coefficient
/// group as c*(w1 + ... + wk).
std::string nc_text(const NCPolynomial& p, const NameCtx& names);
std::string nc_latex(const NCPolynomial& p, const NameCtx& names);

/// One symmetrized polynomial subtree of an invariant.
struct SymBlock {
  SEp source;        // the commutative subtree that was replaced
  NCPolynomial sym;  // its expansion with every monomial symmetrized
  bool formal;       // sits inside a transcendental argument, where the
                     // ordering is notational rather than operator-valued
};

/// A generalized Casimir operator: the invariant's expression with every
/// maximal polynomial subtree containing a mixed monomial (two or more
/// distinct basis symbols) replaced by a Slot leaf whose body is the
/// symmetrized non-commutative polynomial. Denominators and transcendental
/// wrappers stay commutative.
struct SymmetrizedInvariant {
  SEp shape;                     // Slot k refers to blocks[k]
  std::vector<SymBlock> blocks;

  /// Symmetrization changed nothing: the expression is its own operator form.
  bool trivial() const { return blocks.empty(); }
  bool formal() const;
};

SymmetrizedInvariant symmetrize(const SEp& f);

/// Substitutes every block's commutative source back into its slot,
/// recovering the expression symmetrize was given, exactly.
SEp sym_collapse(const SymmetrizedInvariant& s);

/// Rendering; `names` is by value because the slot bodies are filled in.
std::string sym_text(const SymmetrizedInvariant& s, NameCtx names);
std::string sym_latex(const SymmetrizedInvariant& s, NameCtx names);

}  // namespace casimir
