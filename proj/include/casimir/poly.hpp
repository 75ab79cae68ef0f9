#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "casimir/base.hpp"

namespace casimir {

/// Exponent vector; size equals the owning polynomial's variable count.
using Mono = std::vector<unsigned>;

/// Sparse multivariate polynomial over Q in a fixed number of variables.
/// Terms are kept in lex order on the exponent vector; zero coefficients
/// are never stored, so structural equality is semantic equality.
class Poly {
 public:
  Poly() = default;
  explicit Poly(int nvars) : nv_(nvars) {}

  static Poly zero(int nvars) { return Poly(nvars); }
  static Poly constant(int nvars, const Rational& c);
  static Poly one(int nvars) { return constant(nvars, 1); }
  static Poly var(int nvars, int i, unsigned exp = 1);

  int nvars() const { return nv_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Constant term (the whole value when is_constant()).
  Rational constant_value() const;

  int degree(int var) const;
  int total_degree() const;
  bool uses_var(int var) const { return degree(var) > 0; }
  /// Lowest variable index with positive degree, or -1 for constants.
  int lowest_var() const;

  const std::map<Mono, Rational>& terms() const { return terms_; }
  /// Lex-leading coefficient; sign fixes the normal-form orientation.
  const Rational& leading_coeff() const;

  void add_term(const Mono& m, const Rational& c);

  Poly operator-() const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Rational& c) const;
  bool operator==(const Poly& o) const { return nv_ == o.nv_ && terms_ == o.terms_; }
  bool operator!=(const Poly& o) const { return !(*this == o); }
  bool operator<(const Poly& o) const;

  Poly pow(unsigned e) const;
  /// Partial evaluation of one variable at an exact point.
  Poly substitute(int var, const Rational& value) const;
  Rational eval(const std::vector<Rational>& point) const;
  double eval_d(const std::vector<double>& point) const;

  /// Scales so coefficients are coprime integers with positive leading
  /// coefficient; returns the removed rational factor (0 for the zero poly).
  Rational make_primitive();
  /// Primitive positive-leading copy (unit-normal form in Q[vars]).
  Poly unit_normal() const;

  std::string str(const std::vector<std::string>& names) const;

 private:
  int nv_ = 0;
  std::map<Mono, Rational> terms_;
};

/// GCD in Q[vars], returned in unit-normal form (1 for coprime inputs).
Poly poly_gcd(const Poly& a, const Poly& b);
/// Exact quotient; throws Error if b does not divide a.
Poly divide_exact(const Poly& a, const Poly& b);
/// Quotient when divisible.
std::optional<Poly> try_divide(const Poly& a, const Poly& b);

/// Rational function num/den over Q[vars] in normal form: gcd(num, den) = 1
/// and den primitive with integer coefficients and positive leading
/// coefficient, so equality is structural.
class RatFunc {
 public:
  RatFunc() = default;
  explicit RatFunc(Poly num) : num_(std::move(num)), den_(Poly::one(num_.nvars())) {}
  RatFunc(Poly num, Poly den);

  static RatFunc zero(int nvars) { return RatFunc(Poly::zero(nvars)); }
  static RatFunc constant(int nvars, const Rational& c) { return RatFunc(Poly::constant(nvars, c)); }
  static RatFunc one(int nvars) { return constant(nvars, 1); }
  static RatFunc var(int nvars, int i) { return RatFunc(Poly::var(nvars, i)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  int nvars() const { return num_.nvars(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
  bool is_polynomial() const { return den_.is_constant(); }

  RatFunc operator-() const;
  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;
  bool operator==(const RatFunc& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const RatFunc& o) const { return !(*this == o); }
  bool operator<(const RatFunc& o) const;

  RatFunc substitute(int var, const Rational& value) const;
  /// Throws DomainError when the denominator vanishes at the point.
  Rational eval(const std::vector<Rational>& point) const;
  double eval_d(const std::vector<double>& point) const;

  std::string str(const std::vector<std::string>& names) const;

 private:
  void normalize();
  Poly num_, den_;
};

}  // namespace casimir
