#pragma once

#include <functional>
#include <map>
#include <vector>

#include "casimir/poly.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

/// Decides whether a rational function is identically nonzero under the
/// active assumptions. Returning false means "unknown", which makes
/// operations that would divide by it raise UndecidableCaseSplit.
using NonzeroDecider = std::function<bool(const RatFunc&)>;

/// Accepts nonzero constants only.
bool constants_only_decider(const RatFunc& f);

enum class Trig { One = 0, Cos = 1, Sin = 2 };

/// One closed-form basis function  theta^mono * exp(sum rate_k theta_k) *
/// trig(sum freq_k theta_k).  Keys are canonical: a One trig part has an
/// all-zero frequency vector, and Cos/Sin frequencies have their first
/// nonzero component sign-positive (sin absorbs the flip into the
/// coefficient).
struct CFKey {
  std::vector<unsigned> mono;
  std::vector<RatFunc> rate;
  Trig trig = Trig::One;
  std::vector<RatFunc> freq;

  bool operator<(const CFKey& o) const;
  bool operator==(const CFKey& o) const;
};

/// Exact linear combination of closed-form basis functions with rational
/// function coefficients. The basis functions are linearly independent over
/// the coefficient field, so an empty term map is the only representation of
/// zero.
class ClosedForm {
 public:
  ClosedForm(int nthetas, int arity);

  static ClosedForm zero(int nthetas, int arity);
  static ClosedForm constant(int nthetas, const RatFunc& c);
  static ClosedForm term(int nthetas, const RatFunc& coeff,
                         std::vector<unsigned> mono, std::vector<RatFunc> rate,
                         Trig trig = Trig::One, std::vector<RatFunc> freq = {});

  int nthetas() const { return nthetas_; }
  int arity() const { return arity_; }
  const std::map<CFKey, RatFunc>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  ClosedForm operator+(const ClosedForm& o) const;
  ClosedForm operator-(const ClosedForm& o) const;
  ClosedForm operator*(const ClosedForm& o) const;
  ClosedForm scaled(const RatFunc& c) const;
  bool operator==(const ClosedForm& o) const;

  ClosedForm diff(int k) const;
  /// Integral of this form over theta_k from 0 to theta_k (other thetas held
  /// symbolic). Divisions by exponential rates require them decided nonzero.
  ClosedForm integrate_from_zero(int k, const NonzeroDecider& nz) const;
  ClosedForm subst_theta_zero(int k) const;

  double eval(const std::vector<double>& coeff_point,
              const std::vector<double>& theta) const;

  /// Conversion to a scalar expression; requires every term trig-free.
  /// Throws Error otherwise. nparams splits the coefficient variables into
  /// params [0, nparams) and x [nparams, arity).
  SEp to_scalar(int nparams) const;
  bool has_trig() const;

  void add_term(CFKey key, RatFunc coeff);

 private:
  int nthetas_, arity_;
  std::map<CFKey, RatFunc> terms_;
};

/// Remappings into a doubled variable set (theta_1..theta_r, eta_1..eta_r),
/// used to state the one-parameter group law exactly:
/// cf_embed(F, 0) is F(theta), cf_embed(F, 1) is F(eta), and
/// cf_shift_sum(F) is F(theta + eta).
ClosedForm cf_embed(const ClosedForm& f, int which);
ClosedForm cf_shift_sum(const ClosedForm& f);

}  // namespace casimir
