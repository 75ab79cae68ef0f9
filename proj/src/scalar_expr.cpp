#include "casimir/scalar_expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace casimir {

namespace {

SEp mk_leaf(SK k, int idx) {
  auto n = std::make_shared<SE>();
  n->kind = k;
  n->idx = idx;
  return n;
}

SEp mk_const(const Rational& c) {
  auto n = std::make_shared<SE>();
  n->kind = SK::Const;
  n->val = c;
  return n;
}

// Raw node constructors: callers guarantee the children already satisfy the
// normal-form invariants for the node being built.
SEp mk_node(SK k, std::vector<SEp> ch) {
  auto n = std::make_shared<SE>();
  n->kind = k;
  n->ch = std::move(ch);
  return n;
}

SEp mk_pow(const SEp& base, const Rational& e) {
  auto n = std::make_shared<SE>();
  n->kind = SK::Pow;
  n->val = e;
  n->ch = {base};
  return n;
}

const SEp& one_node() {
  static const SEp one = mk_const(1);
  return one;
}
const SEp& zero_node() {
  static const SEp zero = mk_const(0);
  return zero;
}

bool is_const(const SEp& e, long v) {
  return e->kind == SK::Const && e->val == Rational(v);
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

struct SECmp {
  bool operator()(const SEp& a, const SEp& b) const { return se_cmp(a, b) < 0; }
};

// Splits a canonical term into (rational coefficient, coefficient-free core).
// The core is nullptr for pure constants.
std::pair<Rational, SEp> split_coeff(const SEp& t) {
  if (t->kind == SK::Const) return {t->val, nullptr};
  if (t->kind == SK::Mul && t->ch.front()->kind == SK::Const) {
    Rational c = t->ch.front()->val;
    if (t->ch.size() == 2) return {c, t->ch[1]};
    std::vector<SEp> rest(t->ch.begin() + 1, t->ch.end());
    return {c, mk_node(SK::Mul, std::move(rest))};
  }
  return {Rational(1), t};
}

// Rebuilds coeff * core from canonical pieces without re-normalizing.
SEp join_coeff(const Rational& c, const SEp& core) {
  if (core == nullptr) return mk_const(c);
  if (c == 0) return zero_node();
  if (c == 1) return core;
  if (core->kind == SK::Mul) {
    std::vector<SEp> ch;
    ch.reserve(core->ch.size() + 1);
    ch.push_back(mk_const(c));
    ch.insert(ch.end(), core->ch.begin(), core->ch.end());
    return mk_node(SK::Mul, std::move(ch));
  }
  return mk_node(SK::Mul, {mk_const(c), core});
}

Rational rat_pow_exact(const Rational& b, long e) {
  if (e < 0) {
    if (b == 0) throw DomainError("0 raised to a negative power");
    Rational inv = Rational(1) / b;
    return rat_pow_exact(inv, -e);
  }
  Rational r(1), base = b;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

}  // namespace

int se_cmp(const SEp& a, const SEp& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind)
    return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
  switch (a->kind) {
    case SK::Const:
      return cmp(a->val, b->val) < 0 ? -1 : (a->val == b->val ? 0 : 1);
    case SK::Param:
    case SK::Var:
    case SK::Theta:
    case SK::Slot:
      return a->idx < b->idx ? -1 : (a->idx == b->idx ? 0 : 1);
    case SK::Pow: {
      int c = se_cmp(a->ch[0], b->ch[0]);
      if (c != 0) return c;
      int s = cmp(a->val, b->val);
      return s < 0 ? -1 : (s == 0 ? 0 : 1);
    }
    case SK::Exp:
    case SK::Ln:
    case SK::Atan:
      return se_cmp(a->ch[0], b->ch[0]);
    case SK::Mul:
    case SK::Add: {
      size_t n = std::min(a->ch.size(), b->ch.size());
      for (size_t i = 0; i < n; ++i) {
        int c = se_cmp(a->ch[i], b->ch[i]);
        if (c != 0) return c;
      }
      if (a->ch.size() != b->ch.size())
        return a->ch.size() < b->ch.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

bool se_equal(const SEp& a, const SEp& b) { return se_cmp(a, b) == 0; }
bool se_is_zero(const SEp& e) { return is_const(e, 0); }
bool se_is_one(const SEp& e) { return is_const(e, 1); }

SEp se_const(const Rational& c) { return mk_const(c); }
SEp se_int(long n) { return mk_const(Rational(n)); }
SEp se_param(int i) { return mk_leaf(SK::Param, i); }
SEp se_var(int i) { return mk_leaf(SK::Var, i); }
SEp se_theta(int i) { return mk_leaf(SK::Theta, i); }
SEp se_slot(int i) { return mk_leaf(SK::Slot, i); }

SEp se_add(std::vector<SEp> terms) {
  Rational const_sum(0);
  std::map<SEp, Rational, SECmp> acc;
  std::function<void(const SEp&)> absorb = [&](const SEp& t) {
    if (t->kind == SK::Add) {
      for (const auto& c : t->ch) absorb(c);
      return;
    }
    // A rational multiple of a sum distributes on entry, so that expressions
    // like x - (x + y) collapse fully.
    if (t->kind == SK::Mul && t->ch.size() == 2 &&
        t->ch[0]->kind == SK::Const && t->ch[1]->kind == SK::Add) {
      const Rational& c = t->ch[0]->val;
      for (const auto& s : t->ch[1]->ch) {
        auto [c2, core2] = split_coeff(s);
        if (core2 == nullptr)
          const_sum += c * c2;
        else
          acc[core2] += c * c2;
      }
      return;
    }
    auto [coeff, core] = split_coeff(t);
    if (core == nullptr) {
      const_sum += coeff;
      return;
    }
    acc[core] += coeff;
  };
  for (const auto& t : terms) absorb(t);

  std::vector<SEp> out;
  for (const auto& [core, coeff] : acc) {
    if (coeff == 0) continue;
    out.push_back(join_coeff(coeff, core));
  }
  std::sort(out.begin(), out.end(), SECmp{});
  if (const_sum != 0) out.push_back(mk_const(const_sum));
  if (out.empty()) return zero_node();
  if (out.size() == 1) return out.front();
  return mk_node(SK::Add, std::move(out));
}

SEp se_add2(const SEp& a, const SEp& b) { return se_add({a, b}); }
SEp se_sub(const SEp& a, const SEp& b) { return se_add({a, se_neg(b)}); }
SEp se_neg(const SEp& a) { return se_mul2(mk_const(-1), a); }

SEp se_mul(std::vector<SEp> factors) {
  Rational scalar(1);
  std::map<SEp, Rational, SECmp> bases;
  std::vector<SEp> exp_args;

  std::function<void(const SEp&)> absorb = [&](const SEp& f) {
    if (f->kind == SK::Mul) {
      for (const auto& c : f->ch) absorb(c);
      return;
    }
    if (f->kind == SK::Const) {
      scalar *= f->val;
      return;
    }
    if (f->kind == SK::Exp) {
      exp_args.push_back(f->ch[0]);
      return;
    }
    if (f->kind == SK::Pow) {
      bases[f->ch[0]] += f->val;
      return;
    }
    bases[f] += 1;
  };
  for (const auto& f : factors) absorb(f);
  if (scalar == 0) return zero_node();

  std::vector<SEp> out;
  for (const auto& [base, e] : bases) {
    if (e == 0) continue;
    if (base->kind == SK::Const) {
      if (is_integer(e)) {
        scalar *= rat_pow_exact(base->val, e.get_num().get_si());
        continue;
      }
      if (base->val == 1) continue;
      if (base->val == 0) {
        if (e > 0) return zero_node();
        throw DomainError("0 raised to a negative power");
      }
    }
    if (e == 1)
      out.push_back(base);
    else
      out.push_back(mk_pow(base, e));
  }
  if (!exp_args.empty()) {
    // The summed argument may expose rational ln-multiples; go through the
    // normalizing exp builder. If it rewrote into powers, re-merge.
    SEp ex = se_exp(se_add(std::move(exp_args)));
    if (ex->kind == SK::Exp) {
      out.push_back(ex);
    } else if (!se_is_one(ex)) {
      out.push_back(mk_const(scalar));
      out.push_back(ex);
      return se_mul(std::move(out));
    }
  }
  std::sort(out.begin(), out.end(), SECmp{});
  if (out.empty()) return mk_const(scalar);
  if (scalar == 1 && out.size() == 1) return out.front();
  if (scalar != 1) out.insert(out.begin(), mk_const(scalar));
  if (out.size() == 1) return out.front();
  return mk_node(SK::Mul, std::move(out));
}

SEp se_mul2(const SEp& a, const SEp& b) { return se_mul({a, b}); }

SEp se_div(const SEp& a, const SEp& b) {
  return se_mul({a, se_pow(b, Rational(-1))});
}

SEp se_pow(const SEp& base, const Rational& e) {
  if (e == 0) return one_node();
  if (e == 1) return base;
  if (base->kind == SK::Const) {
    if (is_integer(e)) return mk_const(rat_pow_exact(base->val, e.get_num().get_si()));
    if (base->val == 0) {
      if (e > 0) return zero_node();
      throw DomainError("0 raised to a negative power");
    }
    if (base->val == 1) return one_node();
    return mk_pow(base, e);
  }
  if (base->kind == SK::Pow) return se_pow(base->ch[0], base->val * e);
  if (base->kind == SK::Exp)
    return se_exp(se_mul2(mk_const(e), base->ch[0]));
  if (base->kind == SK::Mul) {
    std::vector<SEp> fs;
    fs.reserve(base->ch.size());
    for (const auto& f : base->ch) fs.push_back(se_pow(f, e));
    return se_mul(std::move(fs));
  }
  return mk_pow(base, e);
}

SEp se_exp(const SEp& arg) {
  if (se_is_zero(arg)) return one_node();
  if (arg->kind == SK::Ln) return arg->ch[0];

  // Split additive terms of the form q*ln(u), rational q, into u^q factors.
  std::vector<SEp> terms;
  if (arg->kind == SK::Add)
    terms = arg->ch;
  else
    terms = {arg};
  std::vector<SEp> pow_factors, rest;
  for (const auto& t : terms) {
    if (t->kind == SK::Ln) {
      pow_factors.push_back(t->ch[0]);
      continue;
    }
    if (t->kind == SK::Mul && t->ch.size() == 2 &&
        t->ch[0]->kind == SK::Const && t->ch[1]->kind == SK::Ln) {
      pow_factors.push_back(se_pow(t->ch[1]->ch[0], t->ch[0]->val));
      continue;
    }
    rest.push_back(t);
  }
  if (pow_factors.empty()) return mk_node(SK::Exp, {arg});
  if (!rest.empty()) pow_factors.push_back(mk_node(SK::Exp, {se_add(std::move(rest))}));
  return se_mul(std::move(pow_factors));
}

SEp se_ln(const SEp& arg) {
  if (se_is_one(arg)) return zero_node();
  if (arg->kind == SK::Exp) return arg->ch[0];
  if (arg->kind == SK::Pow) {
    // ln(u^q) -> q*ln(u) only when it preserves the real domain: q with odd
    // numerator and odd denominator keeps sign(u^q) = sign(u); non-integer q
    // already requires u > 0.  Even-power rewrites (ln(u^2) -> 2 ln u) would
    // shrink the domain to u > 0, so keep them.
    const Rational& q = arg->val;
    bool odd_over_odd = (q.get_num() % 2 != 0) && (q.get_den() % 2 != 0);
    if (odd_over_odd || !is_integer(q))
      return se_mul2(mk_const(q), se_ln(arg->ch[0]));
  }
  return mk_node(SK::Ln, {arg});
}

SEp se_atan(const SEp& arg) {
  if (se_is_zero(arg)) return zero_node();
  // atan is odd with full real domain: pull a negative rational coefficient.
  auto [coeff, core] = split_coeff(arg);
  if (core != nullptr && coeff < 0)
    return se_neg(mk_node(SK::Atan, {join_coeff(-coeff, core)}));
  if (core == nullptr && coeff < 0)
    return se_neg(mk_node(SK::Atan, {mk_const(-coeff)}));
  return mk_node(SK::Atan, {arg});
}

double se_eval(const SEp& e, const EvalPoint& pt, double guard) {
  auto finite = [](double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite value in evaluation");
    return v;
  };
  switch (e->kind) {
    case SK::Const:
      return to_double(e->val);
    case SK::Param:
      return pt.params.at(static_cast<size_t>(e->idx));
    case SK::Var:
      return pt.x.at(static_cast<size_t>(e->idx));
    case SK::Theta:
      return pt.theta.at(static_cast<size_t>(e->idx));
    case SK::Slot:
      throw Error("cannot evaluate a noncommutative slot numerically");
    case SK::Add: {
      double s = 0;
      for (const auto& c : e->ch) s += se_eval(c, pt, guard);
      return finite(s);
    }
    case SK::Mul: {
      double p = 1;
      for (const auto& c : e->ch) p *= se_eval(c, pt, guard);
      return finite(p);
    }
    case SK::Pow: {
      double b = se_eval(e->ch[0], pt, guard);
      const Rational& q = e->val;
      if (q < 0 && std::fabs(b) < guard)
        throw DomainError("ill-conditioned denominator");
      if (is_integer(q)) {
        long n = q.get_num().get_si();
        if (b == 0 && n < 0) throw DomainError("division by zero");
        return finite(std::pow(b, static_cast<double>(n)));
      }
      if (b < 0) throw DomainError("fractional power of a negative base");
      if (b == 0 && q < 0) throw DomainError("division by zero");
      return finite(std::pow(b, to_double(q)));
    }
    case SK::Exp:
      return finite(std::exp(se_eval(e->ch[0], pt, guard)));
    case SK::Ln: {
      double a = se_eval(e->ch[0], pt, guard);
      if (a < guard) throw DomainError("ill-conditioned logarithm");
      if (a <= 0) throw DomainError("logarithm of a non-positive value");
      return finite(std::log(a));
    }
    case SK::Atan:
      return std::atan(se_eval(e->ch[0], pt, guard));
  }
  throw Error("unreachable expression kind");
}

SEp se_diff(const SEp& e, SK leaf, int idx) {
  switch (e->kind) {
    case SK::Const:
      return zero_node();
    case SK::Param:
    case SK::Var:
    case SK::Theta:
      return (e->kind == leaf && e->idx == idx) ? one_node() : zero_node();
    case SK::Slot:
      throw Error("cannot differentiate a noncommutative slot");
    case SK::Add: {
      std::vector<SEp> ds;
      for (const auto& c : e->ch) ds.push_back(se_diff(c, leaf, idx));
      return se_add(std::move(ds));
    }
    case SK::Mul: {
      std::vector<SEp> sum;
      for (size_t i = 0; i < e->ch.size(); ++i) {
        SEp di = se_diff(e->ch[i], leaf, idx);
        if (se_is_zero(di)) continue;
        std::vector<SEp> fs;
        fs.push_back(di);
        for (size_t j = 0; j < e->ch.size(); ++j)
          if (j != i) fs.push_back(e->ch[j]);
        sum.push_back(se_mul(std::move(fs)));
      }
      return se_add(std::move(sum));
    }
    case SK::Pow: {
      SEp db = se_diff(e->ch[0], leaf, idx);
      if (se_is_zero(db)) return zero_node();
      return se_mul({mk_const(e->val), se_pow(e->ch[0], e->val - 1), db});
    }
    case SK::Exp: {
      SEp da = se_diff(e->ch[0], leaf, idx);
      if (se_is_zero(da)) return zero_node();
      return se_mul2(da, se_exp(e->ch[0]));
    }
    case SK::Ln: {
      SEp da = se_diff(e->ch[0], leaf, idx);
      if (se_is_zero(da)) return zero_node();
      return se_mul2(da, se_pow(e->ch[0], Rational(-1)));
    }
    case SK::Atan: {
      SEp da = se_diff(e->ch[0], leaf, idx);
      if (se_is_zero(da)) return zero_node();
      SEp denom = se_add2(one_node(), se_pow(e->ch[0], Rational(2)));
      return se_mul2(da, se_pow(denom, Rational(-1)));
    }
  }
  throw Error("unreachable expression kind");
}

SEp se_subst(const SEp& e, SK leaf, int idx, const SEp& repl) {
  switch (e->kind) {
    case SK::Const:
      return e;
    case SK::Param:
    case SK::Var:
    case SK::Theta:
    case SK::Slot:
      return (e->kind == leaf && e->idx == idx) ? repl : e;
    case SK::Add: {
      std::vector<SEp> cs;
      for (const auto& c : e->ch) cs.push_back(se_subst(c, leaf, idx, repl));
      return se_add(std::move(cs));
    }
    case SK::Mul: {
      std::vector<SEp> cs;
      for (const auto& c : e->ch) cs.push_back(se_subst(c, leaf, idx, repl));
      return se_mul(std::move(cs));
    }
    case SK::Pow:
      return se_pow(se_subst(e->ch[0], leaf, idx, repl), e->val);
    case SK::Exp:
      return se_exp(se_subst(e->ch[0], leaf, idx, repl));
    case SK::Ln:
      return se_ln(se_subst(e->ch[0], leaf, idx, repl));
    case SK::Atan:
      return se_atan(se_subst(e->ch[0], leaf, idx, repl));
  }
  throw Error("unreachable expression kind");
}

bool se_uses(const SEp& e, SK leaf, int idx) {
  if (e->kind == leaf && (idx == -1 || e->idx == idx)) return true;
  for (const auto& c : e->ch)
    if (se_uses(c, leaf, idx)) return true;
  return false;
}

void se_leaf_indices(const SEp& e, SK leaf, std::set<int>& out) {
  if (e->kind == leaf) out.insert(e->idx);
  for (const auto& c : e->ch) se_leaf_indices(c, leaf, out);
}

bool se_is_polynomial(const SEp& e) {
  switch (e->kind) {
    case SK::Const:
    case SK::Param:
    case SK::Var:
      return true;
    case SK::Add:
    case SK::Mul:
      for (const auto& c : e->ch)
        if (!se_is_polynomial(c)) return false;
      return true;
    case SK::Pow:
      return is_integer(e->val) && e->val > 0 && se_is_polynomial(e->ch[0]);
    default:
      return false;
  }
}

SEp se_expand(const SEp& e) {
  switch (e->kind) {
    case SK::Add: {
      std::vector<SEp> cs;
      for (const auto& c : e->ch) cs.push_back(se_expand(c));
      return se_add(std::move(cs));
    }
    case SK::Mul: {
      // Distribute: running sum-of-products over the expanded factors.
      std::vector<SEp> acc = {one_node()};
      for (const auto& c : e->ch) {
        SEp f = se_expand(c);
        std::vector<SEp> fterms =
            f->kind == SK::Add ? f->ch : std::vector<SEp>{f};
        std::vector<SEp> next;
        next.reserve(acc.size() * fterms.size());
        for (const auto& a : acc)
          for (const auto& t : fterms) next.push_back(se_mul2(a, t));
        acc = std::move(next);
      }
      return se_add(std::move(acc));
    }
    case SK::Pow: {
      SEp b = se_expand(e->ch[0]);
      if (b->kind == SK::Add && is_integer(e->val) && e->val > 1) {
        // Repeated term-by-term products; multiplying whole sums would just
        // re-collect into the power being expanded.
        long n = e->val.get_num().get_si();
        std::vector<SEp> acc = b->ch;
        for (long i = 1; i < n; ++i) {
          std::vector<SEp> next;
          next.reserve(acc.size() * b->ch.size());
          for (const auto& a : acc)
            for (const auto& t : b->ch) next.push_back(se_mul2(a, t));
          SEp merged = se_add(std::move(next));
          acc = merged->kind == SK::Add ? merged->ch : std::vector<SEp>{merged};
        }
        return se_add(std::move(acc));
      }
      return se_pow(b, e->val);
    }
    case SK::Exp:
      return se_exp(se_expand(e->ch[0]));
    case SK::Ln:
      return se_ln(se_expand(e->ch[0]));
    case SK::Atan:
      return se_atan(se_expand(e->ch[0]));
    default:
      return e;
  }
}

std::optional<RatFunc> se_to_ratfunc(const SEp& e, int nparams, int nx) {
  int arity = nparams + nx;
  switch (e->kind) {
    case SK::Const:
      return RatFunc::constant(arity, e->val);
    case SK::Param:
      if (e->idx >= nparams) return std::nullopt;
      return RatFunc::var(arity, e->idx);
    case SK::Var:
      if (e->idx >= nx) return std::nullopt;
      return RatFunc::var(arity, nparams + e->idx);
    case SK::Add: {
      RatFunc s = RatFunc::zero(arity);
      for (const auto& c : e->ch) {
        auto r = se_to_ratfunc(c, nparams, nx);
        if (!r) return std::nullopt;
        s = s + *r;
      }
      return s;
    }
    case SK::Mul: {
      RatFunc p = RatFunc::one(arity);
      for (const auto& c : e->ch) {
        auto r = se_to_ratfunc(c, nparams, nx);
        if (!r) return std::nullopt;
        p = p * *r;
      }
      return p;
    }
    case SK::Pow: {
      if (!is_integer(e->val)) return std::nullopt;
      auto b = se_to_ratfunc(e->ch[0], nparams, nx);
      if (!b) return std::nullopt;
      long n = e->val.get_num().get_si();
      RatFunc r = RatFunc::one(arity);
      for (long i = 0; i < std::abs(n); ++i) r = r * *b;
      if (n < 0) r = RatFunc::one(arity) / r;
      return r;
    }
    default:
      return std::nullopt;
  }
}

SEp poly_to_se(const Poly& p, int nparams) {
  std::vector<SEp> terms;
  for (const auto& [mono, coeff] : p.terms()) {
    std::vector<SEp> fs = {mk_const(coeff)};
    for (size_t v = 0; v < mono.size(); ++v) {
      if (mono[v] == 0) continue;
      SEp leaf = static_cast<int>(v) < nparams
                     ? se_param(static_cast<int>(v))
                     : se_var(static_cast<int>(v) - nparams);
      fs.push_back(se_pow(leaf, Rational(mono[v])));
    }
    terms.push_back(se_mul(std::move(fs)));
  }
  return se_add(std::move(terms));
}

SEp ratfunc_to_se(const RatFunc& f, int nparams) {
  SEp num = poly_to_se(f.num(), nparams);
  if (f.den().is_constant())
    return se_mul2(num, mk_const(Rational(1) / f.den().constant_value()));
  return se_div(num, poly_to_se(f.den(), nparams));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

struct Printer {
  const NameCtx& names;
  bool latex;

  std::string rat(const Rational& q, bool force_parens) const {
    std::string s = rat_str(q);
    if (latex && q.get_den() != 1) {
      std::string num = q.get_num().get_str(), den = q.get_den().get_str();
      bool neg = false;
      if (!num.empty() && num[0] == '-') {
        neg = true;
        num = num.substr(1);
      }
      s = (neg ? std::string("-") : std::string("")) + "\\frac{" + num + "}{" +
          den + "}";
    }
    if (force_parens && (q < 0 || q.get_den() != 1))
      return latex ? "\\left(" + s + "\\right)" : "(" + s + ")";
    return s;
  }

  std::string paren(const std::string& s) const {
    return latex ? "\\left(" + s + "\\right)" : "(" + s + ")";
  }

  std::string leaf(const SEp& e) const {
    std::ostringstream os;
    switch (e->kind) {
      case SK::Param: {
        size_t i = static_cast<size_t>(e->idx);
        if (i < names.params.size())
          os << names.params[i];
        else
          os << "p" << (i + 1);
        break;
      }
      case SK::Var:
        if (latex)
          os << names.var_prefix << "_{" << (e->idx + 1) << "}";
        else
          os << names.var_prefix << (e->idx + 1);
        break;
      case SK::Theta:
        if (latex)
          os << "\\theta_{" << (e->idx + 1) << "}";
        else
          os << names.theta_prefix << (e->idx + 1);
        break;
      case SK::Slot: {
        size_t i = static_cast<size_t>(e->idx);
        if (i < names.slot_text.size())
          os << names.slot_text[i];
        else
          os << "[S" << (i + 1) << "]";
        break;
      }
      default:
        break;
    }
    return os.str();
  }

  // prec: 1 = additive context, 2 = multiplicative, 3 = power base/exponent.
  std::string render(const SEp& e, int prec) const {
    switch (e->kind) {
      case SK::Const: {
        std::string s = rat(e->val, false);
        if ((e->val < 0 || (!latex && e->val.get_den() != 1)) && prec >= 2)
          return prec >= 3 || e->val < 0 ? paren(s) : s;
        return s;
      }
      case SK::Param:
      case SK::Var:
      case SK::Theta:
        return leaf(e);
      case SK::Slot: {
        // Slot bodies are sums of noncommuting words; parenthesize whenever
        // the context binds tighter than addition.
        std::string s = leaf(e);
        return prec >= 2 ? paren(s) : s;
      }
      case SK::Add: {
        std::string s;
        bool first = true;
        for (const auto& t : e->ch) {
          auto [coeff, core] = split_coeff(t);
          if (coeff < 0) {
            SEp abs_t = join_coeff(-coeff, core);
            s += first ? "-" : " - ";
            s += render(abs_t, 1);
          } else {
            if (!first) s += " + ";
            s += render(t, 1);
          }
          first = false;
        }
        return prec >= 2 ? paren(s) : s;
      }
      case SK::Mul: {
        // Detect q*ln(u) sugar handled at Exp; here render factors in order,
        // folding a leading -1 into a sign.
        std::string s;
        size_t start = 0;
        bool neg = false;
        // Separate negative-exponent factors into a denominator for text
        // readability; fold a negative scalar coefficient into a sign.
        std::vector<SEp> numer, denom;
        Rational c(1);
        if (e->ch[0]->kind == SK::Const) {
          c = e->ch[0]->val;
          start = 1;
          if (c < 0) {
            neg = true;
            c = -c;
          }
        }
        for (size_t i = start; i < e->ch.size(); ++i) {
          const SEp& f = e->ch[i];
          if (f->kind == SK::Pow && f->val < 0)
            denom.push_back(se_pow(f->ch[0], -f->val));
          else
            numer.push_back(f);
        }
        // A fractional scalar shares itself between the two sides of the
        // bar: 1/2*x2/x1 reads better as x2/(2*x1).
        if (c != 1) {
          if (!denom.empty() && c.get_den() != 1) {
            if (c.get_num() != 1)
              numer.insert(numer.begin(), mk_const(Rational(c.get_num())));
            denom.insert(denom.begin(), mk_const(Rational(c.get_den())));
          } else {
            numer.insert(numer.begin(), mk_const(c));
          }
        }
        auto join = [&](const std::vector<SEp>& fs) {
          std::string r;
          for (size_t i = 0; i < fs.size(); ++i) {
            if (i) r += latex ? " " : "*";
            r += render(fs[i], 2);
          }
          return r;
        };
        if (!denom.empty() && latex) {
          // Inside \frac the bar already delimits, so a lone factor needs
          // no parentheses on either side.
          auto side = [&](const std::vector<SEp>& fs) {
            return fs.size() == 1 ? render(fs[0], 1) : join(fs);
          };
          s = "\\frac{" + (numer.empty() ? "1" : side(numer)) + "}{" +
              side(denom) + "}";
        } else if (!denom.empty()) {
          std::string up = numer.empty() ? "1" : join(numer);
          if (denom.size() == 1 && denom[0]->kind != SK::Mul)
            s = up + "/" + render(denom[0], 3);
          else
            s = up + "/" + paren(join(denom));
        } else {
          s = numer.empty() ? "1" : join(numer);
        }
        if (neg) {
          s = "-" + s;
          return prec >= 2 ? paren(s) : s;
        }
        return s;
      }
      case SK::Pow: {
        std::string b = render(e->ch[0], 3);
        if (e->ch[0]->kind == SK::Add || e->ch[0]->kind == SK::Mul ||
            (e->ch[0]->kind == SK::Const &&
             (e->ch[0]->val < 0 || e->ch[0]->val.get_den() != 1)))
          b = paren(render(e->ch[0], 1));
        if (latex) return b + "^{" + rat_str(e->val) + "}";
        return b + "^" + rat(e->val, true);
      }
      case SK::Exp: {
        // Render exp(c*ln(u) + rest) as u^(c) * exp(rest) when c is free of
        // ln; this mirrors the parser's desugaring of symbolic exponents.
        std::vector<SEp> terms =
            e->ch[0]->kind == SK::Add ? e->ch[0]->ch : std::vector<SEp>{e->ch[0]};
        std::vector<std::pair<SEp, SEp>> powers;  // (base, exponent)
        std::vector<SEp> rest;
        for (const auto& t : terms) {
          if (t->kind == SK::Ln) {
            powers.push_back({t->ch[0], one_node()});
            continue;
          }
          if (t->kind == SK::Mul) {
            std::vector<SEp> coeff_fs;
            SEp ln_arg = nullptr;
            bool ok = true;
            for (const auto& f : t->ch) {
              if (f->kind == SK::Ln && ln_arg == nullptr)
                ln_arg = f->ch[0];
              else if (se_uses(f, SK::Slot) || f->kind == SK::Ln)
                ok = false;
              else
                coeff_fs.push_back(f);
            }
            if (ok && ln_arg != nullptr) {
              powers.push_back({ln_arg, se_mul(std::move(coeff_fs))});
              continue;
            }
          }
          rest.push_back(t);
        }
        if (powers.empty()) {
          std::string inner = render(e->ch[0], 1);
          return latex ? "\\exp" + paren(inner) : "exp" + paren(inner);
        }
        std::vector<std::string> parts;
        for (const auto& [base, expo] : powers) {
          std::string b = render(base, 3);
          if (base->kind == SK::Add || base->kind == SK::Mul ||
              base->kind == SK::Pow)
            b = paren(render(base, 1));
          if (latex)
            parts.push_back(b + "^{" + render(expo, 1) + "}");
          else
            parts.push_back(b + "^" + paren(render(expo, 1)));
        }
        if (!rest.empty()) {
          std::string inner = render(se_add(std::move(rest)), 1);
          parts.push_back((latex ? "\\exp" : "exp") + paren(inner));
        }
        std::string s;
        for (size_t i = 0; i < parts.size(); ++i) {
          if (i) s += latex ? " " : "*";
          s += parts[i];
        }
        return s;
      }
      case SK::Ln:
        return (latex ? "\\ln" : "ln") + paren(render(e->ch[0], 1));
      case SK::Atan:
        return (latex ? "\\arctan" : "atan") + paren(render(e->ch[0], 1));
    }
    return "";
  }
};

}  // namespace

std::string se_text(const SEp& e, const NameCtx& names) {
  Printer p{names, false};
  return p.render(e, 1);
}

std::string se_latex(const SEp& e, const NameCtx& names) {
  Printer p{names, true};
  return p.render(e, 1);
}

}  // namespace casimir
