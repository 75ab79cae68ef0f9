#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "casimir/poly.hpp"

namespace casimir {

/// Node kinds, in canonical sort-rank order.
enum class SK { Const, Param, Var, Theta, Slot, Pow, Exp, Ln, Atan, Mul, Add };

struct SE;
using SEp = std::shared_ptr<const SE>;

/// Immutable expression node. Trees are built only through the se_* builders,
/// which maintain the structural normal form: sums and products are flattened
/// and sorted, like terms and like factors are collected, rational constants
/// are folded, and exp/ln/pow interact (exp(q*ln u) -> u^q for rational q).
struct SE {
  SK kind;
  Rational val;         // Const: value; Pow: exponent
  int idx = -1;         // Param/Var/Theta/Slot index, 0-based
  std::vector<SEp> ch;  // children
};

SEp se_const(const Rational& c);
SEp se_int(long n);
SEp se_param(int i);
SEp se_var(int i);
SEp se_theta(int i);
SEp se_slot(int i);
SEp se_add(std::vector<SEp> terms);
SEp se_add2(const SEp& a, const SEp& b);
SEp se_sub(const SEp& a, const SEp& b);
SEp se_neg(const SEp& a);
SEp se_mul(std::vector<SEp> factors);
SEp se_mul2(const SEp& a, const SEp& b);
SEp se_div(const SEp& a, const SEp& b);
SEp se_pow(const SEp& base, const Rational& exp);
SEp se_exp(const SEp& arg);
SEp se_ln(const SEp& arg);
SEp se_atan(const SEp& arg);

/// Total structural order; 0 iff structurally equal (== semantically equal
/// within the rational fragment's normal form).
int se_cmp(const SEp& a, const SEp& b);
bool se_equal(const SEp& a, const SEp& b);
bool se_is_zero(const SEp& e);
bool se_is_one(const SEp& e);

struct EvalPoint {
  std::vector<double> params, x, theta;
};

/// Numeric evaluation; throws DomainError outside the real domain or on
/// non-finite intermediates. A positive `guard` additionally rejects points
/// where any denominator or logarithm argument has magnitude below it, so
/// sampled checks stay away from singular loci.
double se_eval(const SEp& e, const EvalPoint& pt, double guard = 0.0);

/// Partial derivative with respect to the leaf (kind, idx); params are
/// treated as constants.
SEp se_diff(const SEp& e, SK leaf, int idx);

/// Replace every leaf (kind, idx) by `repl`, renormalizing bottom-up.
SEp se_subst(const SEp& e, SK leaf, int idx, const SEp& repl);

/// Does any leaf of this kind occur (any index when idx == -1)?
bool se_uses(const SEp& e, SK leaf, int idx = -1);
void se_leaf_indices(const SEp& e, SK leaf, std::set<int>& out);

/// True when the subtree uses only Const/Param/Var with +,*,nonneg-int powers.
bool se_is_polynomial(const SEp& e);
/// Distributes products/integer powers over sums.
SEp se_expand(const SEp& e);

/// Exact conversion of the rational fragment; nullopt when the expression
/// uses Exp/Ln/Atan/Theta/Slot or fractional powers. Variable layout of the
/// result: params at [0, nparams), x at [nparams, nparams + nx).
std::optional<RatFunc> se_to_ratfunc(const SEp& e, int nparams, int nx);
SEp poly_to_se(const Poly& p, int nparams);
SEp ratfunc_to_se(const RatFunc& f, int nparams);

struct NameCtx {
  std::vector<std::string> params;
  std::string var_prefix = "e";
  std::string theta_prefix = "th";
  std::vector<std::string> slot_text;  // rendered noncommutative slot bodies
};

/// Plain-text form, parseable by parse_invariant_expr.
std::string se_text(const SEp& e, const NameCtx& names);
std::string se_latex(const SEp& e, const NameCtx& names);

}  // namespace casimir
