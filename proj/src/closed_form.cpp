#include "casimir/closed_form.hpp"

#include <cmath>
#include <sstream>

namespace casimir {

namespace {

int lex_cmp_rf(const std::vector<RatFunc>& a, const std::vector<RatFunc>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (a[i] < b[i]) return -1;
    if (b[i] < a[i]) return 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

bool all_zero(const std::vector<RatFunc>& v) {
  for (const auto& f : v)
    if (!f.is_zero()) return false;
  return true;
}

/// Sign of the lexicographically leading numerator coefficient; the
/// denominator is positive-leading by the normal form.
bool lead_positive(const RatFunc& f) { return f.num().leading_coeff() > 0; }

std::vector<RatFunc> vec_add(const std::vector<RatFunc>& a,
                             const std::vector<RatFunc>& b) {
  std::vector<RatFunc> r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] + b[i];
  return r;
}

std::vector<RatFunc> vec_sub(const std::vector<RatFunc>& a,
                             const std::vector<RatFunc>& b) {
  std::vector<RatFunc> r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] - b[i];
  return r;
}

Rational binom(unsigned n, unsigned k) {
  Rational r(1);
  for (unsigned i = 0; i < k; ++i)
    r *= Rational(static_cast<long>(n - i), static_cast<long>(i + 1));
  return r;
}

}  // namespace

bool constants_only_decider(const RatFunc& f) {
  return f.is_constant() && !f.is_zero();
}

bool CFKey::operator<(const CFKey& o) const {
  if (mono != o.mono) return mono < o.mono;
  int c = lex_cmp_rf(rate, o.rate);
  if (c != 0) return c < 0;
  if (trig != o.trig) return static_cast<int>(trig) < static_cast<int>(o.trig);
  return lex_cmp_rf(freq, o.freq) < 0;
}

bool CFKey::operator==(const CFKey& o) const {
  return !(*this < o) && !(o < *this);
}

ClosedForm::ClosedForm(int nthetas, int arity)
    : nthetas_(nthetas), arity_(arity) {}

ClosedForm ClosedForm::zero(int nthetas, int arity) {
  return ClosedForm(nthetas, arity);
}

ClosedForm ClosedForm::constant(int nthetas, const RatFunc& c) {
  ClosedForm f(nthetas, c.nvars());
  CFKey key;
  key.mono.assign(static_cast<size_t>(nthetas), 0);
  key.rate.assign(static_cast<size_t>(nthetas), RatFunc::zero(c.nvars()));
  key.freq = key.rate;
  f.add_term(std::move(key), c);
  return f;
}

ClosedForm ClosedForm::term(int nthetas, const RatFunc& coeff,
                            std::vector<unsigned> mono,
                            std::vector<RatFunc> rate, Trig trig,
                            std::vector<RatFunc> freq) {
  ClosedForm f(nthetas, coeff.nvars());
  CFKey key;
  key.mono = std::move(mono);
  key.rate = std::move(rate);
  key.trig = trig;
  if (freq.empty())
    key.freq.assign(static_cast<size_t>(nthetas), RatFunc::zero(coeff.nvars()));
  else
    key.freq = std::move(freq);
  f.add_term(std::move(key), coeff);
  return f;
}

void ClosedForm::add_term(CFKey key, RatFunc coeff) {
  if (coeff.is_zero()) return;
  if (key.trig != Trig::One) {
    if (all_zero(key.freq)) {
      if (key.trig == Trig::Sin) return;  // sin(0) = 0
      key.trig = Trig::One;
    } else {
      size_t lead = 0;
      while (key.freq[lead].is_zero()) ++lead;
      if (!lead_positive(key.freq[lead])) {
        for (auto& f : key.freq) f = RatFunc::zero(arity_) - f;
        if (key.trig == Trig::Sin) coeff = RatFunc::zero(arity_) - coeff;
      }
    }
  }
  if (key.trig == Trig::One) {
    for (auto& f : key.freq) f = RatFunc::zero(arity_);
  }
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(std::move(key), std::move(coeff));
  } else {
    it->second = it->second + coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

ClosedForm ClosedForm::operator+(const ClosedForm& o) const {
  ClosedForm r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k, c);
  return r;
}

ClosedForm ClosedForm::operator-(const ClosedForm& o) const {
  ClosedForm r = *this;
  RatFunc zero = RatFunc::zero(arity_);
  for (const auto& [k, c] : o.terms_) r.add_term(k, zero - c);
  return r;
}

ClosedForm ClosedForm::scaled(const RatFunc& c) const {
  ClosedForm r(nthetas_, arity_);
  for (const auto& [k, v] : terms_) r.add_term(k, v * c);
  return r;
}

ClosedForm ClosedForm::operator*(const ClosedForm& o) const {
  ClosedForm r(nthetas_, arity_);
  const Rational half = rat(1, 2);
  for (const auto& [ka, ca] : terms_) {
    for (const auto& [kb, cb] : o.terms_) {
      CFKey base;
      base.mono = ka.mono;
      for (size_t i = 0; i < base.mono.size(); ++i) base.mono[i] += kb.mono[i];
      base.rate = vec_add(ka.rate, kb.rate);
      RatFunc c = ca * cb;

      auto emit = [&](Trig t, std::vector<RatFunc> fr, const Rational& s) {
        CFKey k = base;
        k.trig = t;
        k.freq = std::move(fr);
        r.add_term(std::move(k), c * RatFunc::constant(arity_, s));
      };

      Trig ta = ka.trig, tb = kb.trig;
      if (ta == Trig::One && tb == Trig::One) {
        emit(Trig::One, ka.freq, 1);
      } else if (ta == Trig::One) {
        emit(tb, kb.freq, 1);
      } else if (tb == Trig::One) {
        emit(ta, ka.freq, 1);
      } else {
        auto sum = vec_add(ka.freq, kb.freq);
        auto dif = vec_sub(ka.freq, kb.freq);
        if (ta == Trig::Cos && tb == Trig::Cos) {
          emit(Trig::Cos, dif, half);
          emit(Trig::Cos, sum, half);
        } else if (ta == Trig::Sin && tb == Trig::Sin) {
          emit(Trig::Cos, dif, half);
          emit(Trig::Cos, sum, -half);
        } else if (ta == Trig::Sin && tb == Trig::Cos) {
          emit(Trig::Sin, sum, half);
          emit(Trig::Sin, dif, half);
        } else {  // cos * sin: sin(sum)/2 - sin(dif)/2
          emit(Trig::Sin, sum, half);
          emit(Trig::Sin, dif, -half);
        }
      }
    }
  }
  return r;
}

bool ClosedForm::operator==(const ClosedForm& o) const {
  return (*this - o).is_zero();
}

ClosedForm ClosedForm::diff(int k) const {
  ClosedForm r(nthetas_, arity_);
  size_t ki = static_cast<size_t>(k);
  for (const auto& [key, c] : terms_) {
    if (key.mono[ki] > 0) {
      CFKey m = key;
      m.mono[ki] -= 1;
      r.add_term(std::move(m),
                 c * RatFunc::constant(arity_, Rational(key.mono[ki])));
    }
    if (!key.rate[ki].is_zero()) {
      r.add_term(key, c * key.rate[ki]);
    }
    if (key.trig != Trig::One && !key.freq[ki].is_zero()) {
      CFKey t = key;
      RatFunc mult = key.freq[ki];
      if (key.trig == Trig::Cos) {
        t.trig = Trig::Sin;
        mult = RatFunc::zero(arity_) - mult;
      } else {
        t.trig = Trig::Cos;
      }
      r.add_term(std::move(t), c * mult);
    }
  }
  return r;
}

ClosedForm ClosedForm::subst_theta_zero(int k) const {
  ClosedForm r(nthetas_, arity_);
  size_t ki = static_cast<size_t>(k);
  for (const auto& [key, c] : terms_) {
    if (key.mono[ki] > 0) continue;
    CFKey v = key;
    v.rate[ki] = RatFunc::zero(arity_);
    v.freq[ki] = RatFunc::zero(arity_);
    r.add_term(std::move(v), c);
  }
  return r;
}

ClosedForm ClosedForm::integrate_from_zero(int k, const NonzeroDecider& nz) const {
  ClosedForm anti(nthetas_, arity_);
  size_t ki = static_cast<size_t>(k);
  auto require_nonzero = [&](const RatFunc& d) {
    if (d.is_zero() || !nz(d)) {
      std::ostringstream os;
      os << "cannot integrate: the case split on '" << d.num().str({})
         << " = 0' is undecided";
      throw UndecidableCaseSplit(os.str());
    }
  };

  for (const auto& [key, c] : terms_) {
    unsigned m = key.mono[ki];
    const RatFunc alpha = key.rate[ki];
    const RatFunc beta =
        key.trig == Trig::One ? RatFunc::zero(arity_) : key.freq[ki];

    if (beta.is_zero()) {
      if (alpha.is_zero()) {
        // integral of s^m is s^(m+1)/(m+1)
        CFKey t = key;
        t.mono[ki] = m + 1;
        anti.add_term(std::move(t),
                      c * RatFunc::constant(arity_, rat(1, m + 1)));
      } else {
        // Repeated parts: integral of s^m e^(a s) =
        //   sum_{j=0..m} (-1)^(m-j) (m!/j!) s^j e^(a s) / a^(m-j+1)
        require_nonzero(alpha);
        RatFunc inv_a = RatFunc::one(arity_) / alpha;
        Rational fall(1);  // m! / j!, built downward
        RatFunc apow = inv_a;
        for (long j = static_cast<long>(m); j >= 0; --j) {
          CFKey t = key;
          t.mono[ki] = static_cast<unsigned>(j);
          Rational sign = ((static_cast<long>(m) - j) % 2 == 0) ? 1 : -1;
          anti.add_term(std::move(t),
                        c * apow * RatFunc::constant(arity_, sign * fall));
          fall *= Rational(j);
          apow = apow * inv_a;
        }
      }
    } else {
      // Joint recursion for C_m = int s^m e^(a s) cos(u), S_m likewise with
      // sin; u = sum freq_j theta_j and du/ds = beta.
      //   C_0 = e^(as) (a cos u + b sin u) / (a^2 + b^2)
      //   S_0 = e^(as) (a sin u - b cos u) / (a^2 + b^2)
      //   C_m = s^m e^(as)(a cos + b sin)/(a^2+b^2) - m (a C_{m-1} + b S_{m-1})/(a^2+b^2)
      //   S_m = s^m e^(as)(a sin - b cos)/(a^2+b^2) - m (a S_{m-1} - b C_{m-1})/(a^2+b^2)
      // Over the reals a^2 + b^2 vanishes only where both a and b do, so one
      // decided-nonzero member makes the divisor safe.
      if (!nz(alpha) && !nz(beta)) require_nonzero(alpha * alpha + beta * beta);
      RatFunc denom = alpha * alpha + beta * beta;
      RatFunc inv = RatFunc::one(arity_) / denom;

      // coefficients of C_j and S_j contributions, built top-down
      // result = sum_j (ccos_j * [s^j e cos] + csin_j * [s^j e sin])
      // We carry the pair (wc, ws) meaning "wc * C_level + ws * S_level".
      RatFunc wc = c, ws = RatFunc::zero(arity_);
      bool want_cos = key.trig == Trig::Cos;
      if (!want_cos) {
        wc = RatFunc::zero(arity_);
        ws = c;
      }
      for (long level = static_cast<long>(m); level >= 0; --level) {
        // Emit the explicit boundary part of C_level and S_level.
        CFKey tcos = key, tsin = key;
        tcos.mono[ki] = static_cast<unsigned>(level);
        tsin.mono[ki] = static_cast<unsigned>(level);
        tcos.trig = Trig::Cos;
        tsin.trig = Trig::Sin;
        // wc * C: e(a cos + b sin)/D ; ws * S: e(a sin - b cos)/D
        anti.add_term(tcos, (wc * alpha - ws * beta) * inv);
        anti.add_term(tsin, (wc * beta + ws * alpha) * inv);
        if (level == 0) break;
        // Descend: replace (wc, ws) by the coefficients multiplying
        // C_{level-1} and S_{level-1}.
        RatFunc mrf = RatFunc::constant(arity_, Rational(level));
        RatFunc nwc = RatFunc::zero(arity_) -
                      (wc * alpha - ws * beta) * inv * mrf;
        RatFunc nws = RatFunc::zero(arity_) -
                      (wc * beta + ws * alpha) * inv * mrf;
        wc = nwc;
        ws = nws;
      }
    }
  }
  return anti - anti.subst_theta_zero(k);
}

double ClosedForm::eval(const std::vector<double>& coeff_point,
                        const std::vector<double>& theta) const {
  double total = 0;
  for (const auto& [key, c] : terms_) {
    double v = c.eval_d(coeff_point);
    for (size_t i = 0; i < key.mono.size(); ++i)
      for (unsigned e = 0; e < key.mono[i]; ++e) v *= theta[i];
    double rate_arg = 0, freq_arg = 0;
    for (size_t i = 0; i < key.rate.size(); ++i) {
      if (!key.rate[i].is_zero())
        rate_arg += key.rate[i].eval_d(coeff_point) * theta[i];
      if (key.trig != Trig::One && !key.freq[i].is_zero())
        freq_arg += key.freq[i].eval_d(coeff_point) * theta[i];
    }
    v *= std::exp(rate_arg);
    if (key.trig == Trig::Cos) v *= std::cos(freq_arg);
    if (key.trig == Trig::Sin) v *= std::sin(freq_arg);
    total += v;
  }
  if (!std::isfinite(total)) throw DomainError("non-finite closed-form value");
  return total;
}

bool ClosedForm::has_trig() const {
  for (const auto& [key, c] : terms_)
    if (key.trig != Trig::One) return true;
  return false;
}

SEp ClosedForm::to_scalar(int nparams) const {
  std::vector<SEp> sum;
  for (const auto& [key, c] : terms_) {
    if (key.trig != Trig::One)
      throw Error("closed form still contains trigonometric terms");
    std::vector<SEp> fs;
    fs.push_back(ratfunc_to_se(c, nparams));
    for (size_t i = 0; i < key.mono.size(); ++i)
      if (key.mono[i] > 0)
        fs.push_back(
            se_pow(se_theta(static_cast<int>(i)), Rational(key.mono[i])));
    std::vector<SEp> arg;
    for (size_t i = 0; i < key.rate.size(); ++i)
      if (!key.rate[i].is_zero())
        arg.push_back(se_mul2(ratfunc_to_se(key.rate[i], nparams),
                              se_theta(static_cast<int>(i))));
    if (!arg.empty()) fs.push_back(se_exp(se_add(std::move(arg))));
    sum.push_back(se_mul(std::move(fs)));
  }
  return se_add(std::move(sum));
}

ClosedForm cf_embed(const ClosedForm& f, int which) {
  int r = f.nthetas();
  ClosedForm out(2 * r, f.arity());
  RatFunc z = RatFunc::zero(f.arity());
  for (const auto& [key, c] : f.terms()) {
    CFKey k;
    k.mono.assign(static_cast<size_t>(2 * r), 0);
    k.rate.assign(static_cast<size_t>(2 * r), z);
    k.freq = k.rate;
    int off = which == 0 ? 0 : r;
    for (int i = 0; i < r; ++i) {
      k.mono[static_cast<size_t>(off + i)] = key.mono[static_cast<size_t>(i)];
      k.rate[static_cast<size_t>(off + i)] = key.rate[static_cast<size_t>(i)];
      k.freq[static_cast<size_t>(off + i)] = key.freq[static_cast<size_t>(i)];
    }
    k.trig = key.trig;
    out.add_term(std::move(k), c);
  }
  return out;
}

ClosedForm cf_shift_sum(const ClosedForm& f) {
  int r = f.nthetas();
  ClosedForm out(2 * r, f.arity());
  RatFunc z = RatFunc::zero(f.arity());
  for (const auto& [key, c] : f.terms()) {
    // (theta_i + eta_i)^m expands binomially; rates and frequencies apply to
    // both halves.
    std::vector<std::pair<std::vector<unsigned>, Rational>> monos;
    monos.push_back({std::vector<unsigned>(static_cast<size_t>(2 * r), 0),
                     Rational(1)});
    for (int i = 0; i < r; ++i) {
      unsigned m = key.mono[static_cast<size_t>(i)];
      if (m == 0) continue;
      std::vector<std::pair<std::vector<unsigned>, Rational>> next;
      for (const auto& [base, coeff] : monos) {
        for (unsigned j = 0; j <= m; ++j) {
          auto mono = base;
          mono[static_cast<size_t>(i)] = j;
          mono[static_cast<size_t>(r + i)] = m - j;
          next.push_back({std::move(mono), coeff * binom(m, j)});
        }
      }
      monos = std::move(next);
    }
    for (const auto& [mono, bc] : monos) {
      CFKey k;
      k.mono = mono;
      k.rate.assign(static_cast<size_t>(2 * r), z);
      k.freq = k.rate;
      for (int i = 0; i < r; ++i) {
        k.rate[static_cast<size_t>(i)] = key.rate[static_cast<size_t>(i)];
        k.rate[static_cast<size_t>(r + i)] = key.rate[static_cast<size_t>(i)];
        k.freq[static_cast<size_t>(i)] = key.freq[static_cast<size_t>(i)];
        k.freq[static_cast<size_t>(r + i)] = key.freq[static_cast<size_t>(i)];
      }
      k.trig = key.trig;
      out.add_term(std::move(k), c * RatFunc::constant(f.arity(), bc));
    }
  }
  return out;
}

}  // namespace casimir
