#include "casimir/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace casimir {

std::string rat_str(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  if (sgn(c) != 0) p.terms_.emplace(Mono(nvars, 0), c);
  return p;
}

Poly Poly::var(int nvars, int i, unsigned exp) {
  Poly p(nvars);
  Mono m(nvars, 0);
  m[i] = exp;
  p.terms_.emplace(std::move(m), Rational(1));
  return p;
}

bool Poly::is_constant() const {
  if (terms_.empty()) return true;
  return terms_.size() == 1 && terms_.begin()->first == Mono(nv_, 0);
}

Rational Poly::constant_value() const {
  auto it = terms_.find(Mono(nv_, 0));
  return it == terms_.end() ? Rational(0) : it->second;
}

int Poly::degree(int var) const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m[var]));
  return terms_.empty() ? -1 : d;
}

int Poly::total_degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (unsigned e : m) s += static_cast<int>(e);
    d = std::max(d, s);
  }
  return d;
}

int Poly::lowest_var() const {
  for (int v = 0; v < nv_; ++v)
    for (const auto& [m, c] : terms_)
      if (m[v] > 0) return v;
  return -1;
}

const Rational& Poly::leading_coeff() const {
  static const Rational kZero(0);
  return terms_.empty() ? kZero : terms_.rbegin()->second;
}

void Poly::add_term(const Mono& m, const Rational& c) {
  if (sgn(c) == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly r(nv_);
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(nv_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      Mono m(nv_);
      for (int v = 0; v < nv_; ++v) m[v] = ma[v] + mb[v];
      r.add_term(m, ca * cb);
    }
  return r;
}

Poly Poly::operator*(const Rational& c) const {
  Poly r(nv_);
  if (sgn(c) == 0) return r;
  for (const auto& [m, k] : terms_) r.terms_.emplace(m, k * c);
  return r;
}

bool Poly::operator<(const Poly& o) const {
  if (nv_ != o.nv_) return nv_ < o.nv_;
  return terms_ < o.terms_;
}

Poly Poly::pow(unsigned e) const {
  Poly r = Poly::one(nv_);
  Poly base = *this;
  while (e) {
    if (e & 1u) r = r * base;
    base = base * base;
    e >>= 1u;
  }
  return r;
}

Poly Poly::substitute(int var, const Rational& value) const {
  Poly r(nv_);
  for (const auto& [m, c] : terms_) {
    Rational k = c;
    for (unsigned e = 0; e < m[var]; ++e) k *= value;
    Mono m2 = m;
    m2[var] = 0;
    r.add_term(m2, k);
  }
  return r;
}

Rational Poly::eval(const std::vector<Rational>& point) const {
  Rational acc(0);
  for (const auto& [m, c] : terms_) {
    Rational t = c;
    for (int v = 0; v < nv_; ++v)
      for (unsigned e = 0; e < m[v]; ++e) t *= point[v];
    acc += t;
  }
  return acc;
}

double Poly::eval_d(const std::vector<double>& point) const {
  double acc = 0;
  for (const auto& [m, c] : terms_) {
    double t = to_double(c);
    for (int v = 0; v < nv_; ++v)
      if (m[v]) t *= std::pow(point[v], static_cast<int>(m[v]));
    acc += t;
  }
  return acc;
}

Rational Poly::make_primitive() {
  if (terms_.empty()) return Rational(0);
  // content = gcd(numerators) / lcm(denominators), signed by the leading term
  mpz_class num_gcd(0), den_lcm(1);
  for (const auto& [m, c] : terms_) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
  }
  Rational content(num_gcd, den_lcm);
  content.canonicalize();
  if (sgn(leading_coeff()) < 0) content = -content;
  for (auto& [m, c] : terms_) c /= content;
  return content;
}

Poly Poly::unit_normal() const {
  Poly p = *this;
  p.make_primitive();
  return p;
}

std::string Poly::str(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // print highest monomial first for readability
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    Rational a = c;
    if (first) {
      if (sgn(a) < 0) {
        os << "-";
        a = -a;
      }
    } else {
      os << (sgn(a) < 0 ? " - " : " + ");
      if (sgn(a) < 0) a = -a;
    }
    first = false;
    bool unit_mono = (m == Mono(nv_, 0));
    bool printed = false;
    if (a != Rational(1) || unit_mono) {
      os << rat_str(a);
      printed = true;
    }
    for (int v = 0; v < nv_; ++v) {
      if (!m[v]) continue;
      if (printed) os << "*";
      os << (v < static_cast<int>(names.size()) ? names[v] : "v" + std::to_string(v));
      if (m[v] > 1) os << "^" << m[v];
      printed = true;
    }
  }
  return os.str();
}

// -------- division / gcd --------

static bool mono_divides(const Mono& a, const Mono& b) {
  for (size_t v = 0; v < a.size(); ++v)
    if (a[v] > b[v]) return false;
  return true;
}

std::optional<Poly> try_divide(const Poly& a, const Poly& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return Poly::zero(a.nvars());
  const int nv = a.nvars();
  Poly rem = a, quot(nv);
  const auto& blt = *b.terms().rbegin();
  while (!rem.is_zero()) {
    const auto& rlt = *rem.terms().rbegin();
    if (!mono_divides(blt.first, rlt.first)) return std::nullopt;
    Mono q(nv);
    for (int v = 0; v < nv; ++v) q[v] = rlt.first[v] - blt.first[v];
    Rational qc = rlt.second / blt.second;
    Poly qt(nv);
    qt.add_term(q, qc);
    quot = quot + qt;
    rem = rem - qt * b;
  }
  return quot;
}

Poly divide_exact(const Poly& a, const Poly& b) {
  auto q = try_divide(a, b);
  if (!q) throw Error("exact polynomial division failed");
  return *q;
}

// Univariate view in variable v: degree -> coefficient (with v cleared).
static std::map<unsigned, Poly> uview(const Poly& a, int v) {
  std::map<unsigned, Poly> r;
  for (const auto& [m, c] : a.terms()) {
    Mono m2 = m;
    unsigned d = m2[v];
    m2[v] = 0;
    auto [it, fresh] = r.try_emplace(d, Poly(a.nvars()));
    it->second.add_term(m2, c);
  }
  return r;
}

static Poly leading_coeff_in(const Poly& a, int v) { return uview(a, v).rbegin()->second; }

static Poly content_in(const Poly& a, int v) {
  Poly g = Poly::zero(a.nvars());
  for (const auto& [d, coeff] : uview(a, v)) {
    g = poly_gcd(g, coeff);
    if (g.is_constant() && !g.is_zero()) break;
  }
  return g;
}

// Standard pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b in variable v.
static Poly prem_full(Poly a, const Poly& b, int v) {
  const int nv = a.nvars();
  const int db = b.degree(v);
  const Poly lb = leading_coeff_in(b, v);
  int e = a.degree(v) - db + 1;
  int da;
  while (!a.is_zero() && (da = a.degree(v)) >= db) {
    Poly la = leading_coeff_in(a, v);
    Poly shift = (da == db) ? Poly::one(nv) : Poly::var(nv, v, static_cast<unsigned>(da - db));
    a = a * lb - b * shift * la;
    --e;
  }
  while (e-- > 0) a = a * lb;
  return a;
}

// Subresultant remainder sequence on v-primitive inputs with deg_v >= 1.
// Growth stays polynomial, all interior divisions are exact.
static Poly subresultant_prim_gcd(Poly a, Poly b, int v) {
  const int nv = a.nvars();
  if (a.degree(v) < b.degree(v)) std::swap(a, b);
  Poly g = Poly::one(nv), h = Poly::one(nv);
  for (;;) {
    int delta = a.degree(v) - b.degree(v);
    Poly r = prem_full(a, b, v);
    if (r.is_zero()) break;
    if (r.degree(v) == 0) return Poly::one(nv);
    a = b;
    b = divide_exact(r, g * h.pow(static_cast<unsigned>(delta)));
    g = leading_coeff_in(a, v);
    if (delta == 1) {
      h = g;
    } else if (delta > 1) {
      h = divide_exact(g.pow(static_cast<unsigned>(delta)), h.pow(static_cast<unsigned>(delta - 1)));
    }
  }
  return divide_exact(b, content_in(b, v));
}

Poly poly_gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.unit_normal();
  if (b.is_zero()) return a.unit_normal();
  if (a.is_constant() || b.is_constant()) return Poly::one(a.nvars());
  // divisibility short-circuits cover most normal-form reductions
  if (try_divide(a, b).has_value()) return b.unit_normal();
  if (try_divide(b, a).has_value()) return a.unit_normal();
  int va = a.lowest_var(), vb = b.lowest_var();
  int v = (va < 0) ? vb : (vb < 0 ? va : std::min(va, vb));
  Poly ca = content_in(a, v), cb = content_in(b, v);
  Poly cont = poly_gcd(ca, cb);
  Poly pa = divide_exact(a, ca), pb = divide_exact(b, cb);
  // v-primitive parts that are v-free are units
  if (pa.degree(v) <= 0 || pb.degree(v) <= 0) return cont.unit_normal();
  return (cont * subresultant_prim_gcd(pa, pb, v)).unit_normal();
}

// -------- RatFunc --------

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw DomainError("rational function with zero denominator");
  normalize();
}

void RatFunc::normalize() {
  if (num_.is_zero()) {
    den_ = Poly::one(num_.nvars());
    return;
  }
  Poly g = poly_gcd(num_, den_);
  if (!g.is_constant()) {
    num_ = divide_exact(num_, g);
    den_ = divide_exact(den_, g);
  }
  Poly d = den_;
  Rational scale = d.make_primitive();
  den_ = d;
  num_ = num_ * (Rational(1) / scale);
}

RatFunc RatFunc::operator-() const {
  RatFunc r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
  return RatFunc(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-(const RatFunc& o) const {
  return RatFunc(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator*(const RatFunc& o) const {
  return RatFunc(num_ * o.num_, den_ * o.den_);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.is_zero()) throw DomainError("division by zero rational function");
  return RatFunc(num_ * o.den_, den_ * o.num_);
}

bool RatFunc::operator<(const RatFunc& o) const {
  if (num_ != o.num_) return num_ < o.num_;
  return den_ < o.den_;
}

RatFunc RatFunc::substitute(int var, const Rational& value) const {
  return RatFunc(num_.substitute(var, value), den_.substitute(var, value));
}

Rational RatFunc::eval(const std::vector<Rational>& point) const {
  Rational d = den_.eval(point);
  if (sgn(d) == 0) throw DomainError("rational function denominator vanishes at sample");
  return num_.eval(point) / d;
}

double RatFunc::eval_d(const std::vector<double>& point) const {
  double d = den_.eval_d(point);
  if (d == 0.0) throw DomainError("rational function denominator vanishes at sample");
  return num_.eval_d(point) / d;
}

std::string RatFunc::str(const std::vector<std::string>& names) const {
  if (is_polynomial()) {
    if (den_.constant_value() == Rational(1)) return num_.str(names);
  }
  std::string n = num_.str(names);
  std::string d = den_.str(names);
  bool npar = num_.terms().size() > 1;
  bool dpar = den_.terms().size() > 1 || !den_.is_constant();
  std::string r = npar ? "(" + n + ")" : n;
  r += " / ";
  r += dpar && den_.terms().size() > 1 ? "(" + d + ")" : d;
  return r;
}

}  // namespace casimir
