#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "casimir/moving_frame.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"

using namespace casimir;

namespace {

RatFunc K(int A, long num, long den = 1) {
  return RatFunc::constant(A, rat(num, den));
}

std::vector<RatFunc> bvec(int A, int n,
                          std::initializer_list<std::pair<int, RatFunc>> parts) {
  std::vector<RatFunc> v(static_cast<size_t>(n), RatFunc::zero(A));
  for (const auto& [k, c] : parts) v[static_cast<size_t>(k)] = c;
  return v;
}

std::vector<RatFunc> unit(int A, int n, int k, long c = 1) {
  return bvec(A, n, {{k, K(A, c)}});
}

// [e1,e4] = a e1, [e2,e4] = b e2 - e3, [e3,e4] = e2 + b e3, with a > 0
StructureConstants a46() {
  StructureConstants sc("A4.6", 4, {"a", "b"});
  int A = sc.arity();
  RatFunc a = RatFunc::var(A, 0), b = RatFunc::var(A, 1);
  sc.set_bracket(0, 3, bvec(A, 4, {{0, a}}));
  sc.set_bracket(1, 3, bvec(A, 4, {{1, b}, {2, K(A, -1)}}));
  sc.set_bracket(2, 3, bvec(A, 4, {{1, K(A, 1)}, {2, b}}));
  sc.assumptions().add(Poly::var(A, 0), AssumeKind::Positive);
  sc.validate();
  return sc;
}

// [e3,e4] = e1, [e1,e5] = e1, [e2,e5] = e1 + e2, [e3,e5] = e2 + e3
StructureConstants a527() {
  StructureConstants sc("A5.27", 5);
  sc.set_bracket(2, 3, unit(5, 5, 0));
  sc.set_bracket(0, 4, unit(5, 5, 0));
  sc.set_bracket(1, 4, bvec(5, 5, {{0, K(5, 1)}, {1, K(5, 1)}}));
  sc.set_bracket(2, 4, bvec(5, 5, {{1, K(5, 1)}, {2, K(5, 1)}}));
  sc.validate();
  return sc;
}

// [e2,e3] = e1, [e1,e4] = e1, [e2,e4] = e2, [e2,e5] = -e2, [e3,e5] = e3
StructureConstants a536() {
  StructureConstants sc("A5.36", 5);
  sc.set_bracket(1, 2, unit(5, 5, 0));
  sc.set_bracket(0, 3, unit(5, 5, 0));
  sc.set_bracket(1, 3, unit(5, 5, 1));
  sc.set_bracket(1, 4, unit(5, 5, 1, -1));
  sc.set_bracket(2, 4, unit(5, 5, 2));
  sc.validate();
  return sc;
}

// [e2,e5] = e1, [e3,e5] = a e3 + e4, [e4,e5] = -e3 + a e4,
// [e1,e6] = e1, [e2,e6] = e2, [e3,e6] = b e3, [e4,e6] = b e4
StructureConstants n616() {
  StructureConstants sc("N6.16", 6, {"a", "b"});
  int A = sc.arity();
  RatFunc a = RatFunc::var(A, 0), b = RatFunc::var(A, 1);
  sc.set_bracket(1, 4, unit(A, 6, 0));
  sc.set_bracket(2, 4, bvec(A, 6, {{2, a}, {3, K(A, 1)}}));
  sc.set_bracket(3, 4, bvec(A, 6, {{2, K(A, -1)}, {3, a}}));
  sc.set_bracket(0, 5, unit(A, 6, 0));
  sc.set_bracket(1, 5, unit(A, 6, 1));
  sc.set_bracket(2, 5, bvec(A, 6, {{2, b}}));
  sc.set_bracket(3, 5, bvec(A, 6, {{3, b}}));
  sc.validate();
  return sc;
}

// [e2,e5] = a e2, [e3,e5] = e4, [e4,e5] = -e3, [e2,e6] = b e2,
// [e3,e6] = e3, [e4,e6] = e4, [e5,e6] = e1, with a^2 + b^2 != 0
StructureConstants n625() {
  StructureConstants sc("N6.25", 6, {"a", "b"});
  int A = sc.arity();
  RatFunc a = RatFunc::var(A, 0), b = RatFunc::var(A, 1);
  sc.set_bracket(1, 4, bvec(A, 6, {{1, a}}));
  sc.set_bracket(2, 4, unit(A, 6, 3));
  sc.set_bracket(3, 4, unit(A, 6, 2, -1));
  sc.set_bracket(1, 5, bvec(A, 6, {{1, b}}));
  sc.set_bracket(2, 5, unit(A, 6, 2));
  sc.set_bracket(3, 5, unit(A, 6, 3));
  sc.set_bracket(4, 5, unit(A, 6, 0));
  sc.assumptions().add(Poly::var(A, 0) * Poly::var(A, 0) +
                           Poly::var(A, 1) * Poly::var(A, 1),
                       AssumeKind::Nonzero);
  sc.validate();
  return sc;
}

// filiform chain [e_k, e_n] = e_{k-1}, k = 2 .. n-1
StructureConstants nil_chain(int n) {
  StructureConstants sc("n" + std::to_string(n) + ".1", n);
  for (int k = 2; k <= n - 1; ++k)
    sc.set_bracket(k - 1, n - 1, unit(n, n, k - 2));
  sc.validate();
  return sc;
}

StructureConstants so3() {
  StructureConstants sc("so3", 3);
  sc.set_bracket(0, 1, unit(3, 3, 2));
  sc.set_bracket(1, 2, unit(3, 3, 0));
  sc.set_bracket(0, 2, unit(3, 3, 1, -1));
  sc.validate();
  return sc;
}

SEp iv(const SEp& e) { return se_pow(e, rat(-1)); }

Eigen::MatrixXd ad_numeric(const StructureConstants& sc, int i,
                           const std::vector<double>& cp) {
  int n = sc.n();
  auto m = ad_matrix(sc, i);
  Eigen::MatrixXd out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out(r, c) = m[static_cast<size_t>(r)][static_cast<size_t>(c)].eval_d(cp);
  return out;
}

// x * prod_k exp(-theta_k ad_{factors[k]}), evaluated in doubles
std::vector<double> act_numeric(const StructureConstants& sc,
                                const std::vector<int>& factors,
                                const std::vector<double>& cp,
                                const std::vector<double>& x,
                                const std::vector<double>& theta) {
  int n = sc.n();
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  for (size_t k = 0; k < factors.size(); ++k)
    b *= exp_numeric(-theta[k] * ad_numeric(sc, factors[k], cp));
  Eigen::RowVectorXd xv(n);
  for (int i = 0; i < n; ++i) xv(i) = x[static_cast<size_t>(i)];
  Eigen::RowVectorXd y = xv * b;
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = y(i);
  return out;
}

struct Sample {
  std::vector<double> params, x, theta;
  std::vector<double> cp;  // params followed by x, the coefficient point
};

Sample draw(const StructureConstants& sc, int r, Rng& rng, double theta_scale,
            const std::set<int>& positive_x) {
  Sample s;
  for (const auto& q : sc.assumptions().sample_params(rng))
    s.params.push_back(to_double(q));
  for (int i = 0; i < sc.n(); ++i) {
    double v = 0;
    while (std::fabs(v) < 0.25)
      v = to_double(positive_x.count(i) ? rng.positive_rational()
                                        : rng.nonzero_rational());
    s.x.push_back(v);
  }
  for (int k = 0; k < r; ++k)
    s.theta.push_back(to_double(rng.rational()) * theta_scale);
  s.cp = s.params;
  s.cp.insert(s.cp.end(), s.x.begin(), s.x.end());
  return s;
}

void check_lift_numeric(const StructureConstants& sc, unsigned long seed) {
  auto lift = lifted_invariants(sc);
  Rng rng(seed);
  int done = 0;
  for (int t = 0; t < 200 && done < 20; ++t) {
    try {
      Sample s = draw(sc, lift.nthetas(), rng, 1.0, {});
      auto xt = act_numeric(sc, lift.factors, s.cp, s.x, s.theta);
      for (int j = 0; j < sc.n(); ++j) {
        double got = lift.components[static_cast<size_t>(j)].eval(s.cp, s.theta);
        double want = xt[static_cast<size_t>(j)];
        CHECK(std::fabs(got - want) <= 1e-9 * std::max(1.0, std::fabs(want)));
      }
      ++done;
    } catch (const DomainError&) {
      continue;
    }
  }
  CHECK(done == 20);
}

// F(x . B(theta)) == F(x) for the emitted invariants. Thetas are kept small
// and arctan arguments bounded so no branch of atan is crossed.
void check_finite_invariance(const StructureConstants& sc, unsigned long seed,
                             const std::set<int>& positive_x,
                             std::optional<std::pair<int, int>> atan_pair) {
  auto lift = lifted_invariants(sc);
  auto res = normalize_frame(sc, lift, seed);
  REQUIRE(res.complete);
  Rng rng(seed + 1);
  int done = 0;
  for (int t = 0; t < 400 && done < 10; ++t) {
    try {
      Sample s = draw(sc, lift.nthetas(), rng, 0.025, positive_x);
      auto xt = act_numeric(sc, lift.factors, s.cp, s.x, s.theta);
      if (atan_pair) {
        auto [p, q] = *atan_pair;
        if (std::fabs(s.x[static_cast<size_t>(q)]) >
            8 * std::fabs(s.x[static_cast<size_t>(p)]))
          continue;
        if (std::fabs(xt[static_cast<size_t>(q)]) >
            8 * std::fabs(xt[static_cast<size_t>(p)]))
          continue;
      }
      bool usable = true;
      for (int i : positive_x)
        if (xt[static_cast<size_t>(i)] <= 1e-6) usable = false;
      if (!usable) continue;
      EvalPoint base{s.params, s.x, {}};
      EvalPoint moved{s.params, xt, {}};
      for (const auto& f : res.invariants) {
        double fb = se_eval(f, base), fm = se_eval(f, moved);
        CHECK(std::fabs(fm - fb) <= 1e-8 * std::max(1.0, std::fabs(fb)));
      }
      ++done;
    } catch (const DomainError&) {
      continue;
    }
  }
  CHECK(done == 10);
}

// Plugging the recorded frame values theta(x) back into the lifted pivot
// components must reproduce the normalization constants. Components that were
// replaced by a rotation rewrite are skipped; their originals carry trig.
void check_frame_property(const StructureConstants& sc, unsigned long seed,
                          const std::set<int>& positive_x) {
  auto lift = lifted_invariants(sc);
  auto res = normalize_frame(sc, lift, seed);
  REQUIRE(res.complete);
  int r = lift.nthetas();
  Rng rng(seed + 2);
  int done = 0;
  for (int t = 0; t < 300 && done < 10; ++t) {
    try {
      Sample s = draw(sc, r, rng, 0.0, positive_x);
      EvalPoint pt{s.params, s.x, {}};
      std::vector<double> th(static_cast<size_t>(r), 0.0);
      for (const auto& [k, e] : res.solved)
        th[static_cast<size_t>(k)] = se_eval(e, pt);
      for (const auto& [j, c] : res.constants) {
        if (lift.components[static_cast<size_t>(j)].has_trig()) continue;
        double got = lift.components[static_cast<size_t>(j)].eval(s.cp, th);
        CHECK(std::fabs(got - to_double(c)) <= 1e-8);
      }
      ++done;
    } catch (const DomainError&) {
      continue;
    }
  }
  CHECK(done == 10);
}

void check_jacobian_zero(const StructureConstants& sc) {
  auto lift = lifted_invariants(sc);
  auto jac = theta_jacobian(lift);
  int n = sc.n(), np = sc.nparams(), A = sc.arity(), r = lift.nthetas();
  for (int k = 0; k < r; ++k) {
    auto ad = ad_matrix(sc, lift.factors[static_cast<size_t>(k)]);
    for (int j = 0; j < n; ++j) {
      ClosedForm e = jac[static_cast<size_t>(j)][static_cast<size_t>(k)];
      for (int m = 0; m < r; ++m) e = e.subst_theta_zero(m);
      RatFunc want = RatFunc::zero(A);
      for (int i = 0; i < n; ++i)
        want = want - RatFunc::var(A, np + i) *
                          ad[static_cast<size_t>(i)][static_cast<size_t>(j)];
      CHECK(e == ClosedForm::constant(r, want));
    }
  }
}

}  // namespace

TEST_CASE("factor selection skips zero adjoint directions") {
  CHECK(inner_automorphism_matrix(a46()).factors == std::vector<int>{0, 1, 2, 3});
  CHECK(inner_automorphism_matrix(a527()).factors ==
        std::vector<int>{0, 1, 2, 3, 4});
  CHECK(inner_automorphism_matrix(n616()).factors ==
        std::vector<int>{0, 1, 2, 3, 4, 5});
  // e1 is central in both
  CHECK(inner_automorphism_matrix(n625()).factors ==
        std::vector<int>{1, 2, 3, 4, 5});
  CHECK(inner_automorphism_matrix(nil_chain(5)).factors ==
        std::vector<int>{1, 2, 3, 4});

  StructureConstants ab("abelian3", 3);
  auto fr = inner_automorphism_matrix(ab);
  CHECK(fr.factors.empty());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        CHECK(fr.b[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
              ClosedForm::constant(0, RatFunc::one(3)));
      else
        CHECK(fr.b[static_cast<size_t>(i)][static_cast<size_t>(j)].is_zero());
    }
}

TEST_CASE("automorphism matrix of A4.6") {
  auto fr = inner_automorphism_matrix(a46());
  const int r = 4, A = 6;
  RatFunc one = RatFunc::one(A);
  RatFunc pa = RatFunc::var(A, 0), pb = RatFunc::var(A, 1);
  std::vector<RatFunc> zr(r, RatFunc::zero(A));
  auto ra = zr, rb = zr, f1 = zr;
  ra[3] = pa;
  rb[3] = pb;
  f1[3] = one;
  std::vector<unsigned> m0(r, 0);
  auto th = [&](int k) {
    auto m = m0;
    m[static_cast<size_t>(k)] = 1;
    return m;
  };

  CHECK(fr.b[0][0] == ClosedForm::term(r, one, m0, ra));
  CHECK(fr.b[1][1] == ClosedForm::term(r, one, m0, rb, Trig::Cos, f1));
  CHECK(fr.b[1][2] == ClosedForm::term(r, one, m0, rb, Trig::Sin, f1));
  CHECK(fr.b[2][1] == ClosedForm::term(r, -one, m0, rb, Trig::Sin, f1));
  CHECK(fr.b[2][2] == ClosedForm::term(r, one, m0, rb, Trig::Cos, f1));
  CHECK(fr.b[3][3] == ClosedForm::constant(r, one));
  CHECK(fr.b[0][3] == ClosedForm::term(r, -pa, th(0), zr));
  CHECK(fr.b[1][3] == ClosedForm::term(r, -pb, th(1), zr) +
                          ClosedForm::term(r, -one, th(2), zr));
  CHECK(fr.b[2][3] == ClosedForm::term(r, one, th(1), zr) +
                          ClosedForm::term(r, -pb, th(2), zr));
  const std::vector<std::pair<int, int>> zeros = {
      {0, 1}, {0, 2}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {3, 2}};
  for (auto [i, j] : zeros)
    CHECK(fr.b[static_cast<size_t>(i)][static_cast<size_t>(j)].is_zero());
}

TEST_CASE("automorphism matrix of A5.27") {
  auto fr = inner_automorphism_matrix(a527());
  const int r = 5, A = 5;
  RatFunc one = RatFunc::one(A);
  std::vector<RatFunc> zr(r, RatFunc::zero(A));
  auto re = zr;
  re[4] = one;  // rate e^{theta5}
  std::vector<unsigned> m0(r, 0);
  auto mono = [&](std::initializer_list<std::pair<int, unsigned>> ps) {
    auto m = m0;
    for (auto [k, e] : ps) m[static_cast<size_t>(k)] = e;
    return m;
  };

  std::map<std::pair<int, int>, ClosedForm> want;
  auto put = [&](int i, int j, ClosedForm cf) {
    want.emplace(std::make_pair(i, j), std::move(cf));
  };
  put(0, 0, ClosedForm::term(r, one, m0, re));
  put(0, 1, ClosedForm::term(r, one, mono({{4, 1}}), re));
  put(0, 2, ClosedForm::term(r, one, mono({{3, 1}}), re) +
                ClosedForm::term(r, K(A, 1, 2), mono({{4, 2}}), re));
  put(0, 3, ClosedForm::term(r, -one, mono({{2, 1}}), zr));
  put(0, 4, ClosedForm::term(r, -one, mono({{0, 1}}), zr) +
                ClosedForm::term(r, -one, mono({{1, 1}}), zr));
  put(1, 1, ClosedForm::term(r, one, m0, re));
  put(1, 2, ClosedForm::term(r, one, mono({{4, 1}}), re));
  put(1, 4, ClosedForm::term(r, -one, mono({{1, 1}}), zr) +
                ClosedForm::term(r, -one, mono({{2, 1}}), zr));
  put(2, 2, ClosedForm::term(r, one, m0, re));
  put(2, 4, ClosedForm::term(r, -one, mono({{2, 1}}), zr));
  put(3, 3, ClosedForm::constant(r, one));
  put(4, 4, ClosedForm::constant(r, one));

  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      auto it = want.find({i, j});
      const auto& got = fr.b[static_cast<size_t>(i)][static_cast<size_t>(j)];
      if (it == want.end())
        CHECK(got.is_zero());
      else
        CHECK(got == it->second);
    }
}

TEST_CASE("lifted invariants reduce to the coordinates at theta zero") {
  for (const auto& sc : {a46(), a527(), a536(), n616(), n625(), nil_chain(6)}) {
    auto lift = lifted_invariants(sc);
    int r = lift.nthetas(), A = sc.arity(), np = sc.nparams();
    for (int j = 0; j < sc.n(); ++j) {
      ClosedForm e = lift.components[static_cast<size_t>(j)];
      for (int k = 0; k < r; ++k) e = e.subst_theta_zero(k);
      CHECK(e == ClosedForm::constant(r, RatFunc::var(A, np + j)));
    }
  }
}

TEST_CASE("lifted invariants of A4.6") {
  auto sc = a46();
  auto lift = lifted_invariants(sc);
  const int r = 4, A = 6;
  RatFunc one = RatFunc::one(A);
  RatFunc pa = RatFunc::var(A, 0), pb = RatFunc::var(A, 1);
  RatFunc x1 = RatFunc::var(A, 2), x2 = RatFunc::var(A, 3),
          x3 = RatFunc::var(A, 4), x4 = RatFunc::var(A, 5);
  std::vector<RatFunc> zr(r, RatFunc::zero(A));
  auto ra = zr, rb = zr, f1 = zr;
  ra[3] = pa;
  rb[3] = pb;
  f1[3] = one;
  std::vector<unsigned> m0(r, 0);
  auto th = [&](int k) {
    auto m = m0;
    m[static_cast<size_t>(k)] = 1;
    return m;
  };

  CHECK(lift.components[0] == ClosedForm::term(r, x1, m0, ra));
  CHECK(lift.components[1] ==
        ClosedForm::term(r, x2, m0, rb, Trig::Cos, f1) +
            ClosedForm::term(r, -x3, m0, rb, Trig::Sin, f1));
  CHECK(lift.components[2] ==
        ClosedForm::term(r, x2, m0, rb, Trig::Sin, f1) +
            ClosedForm::term(r, x3, m0, rb, Trig::Cos, f1));
  CHECK(lift.components[3] ==
        ClosedForm::term(r, -pa * x1, th(0), zr) +
            ClosedForm::term(r, -pb * x2 + x3, th(1), zr) +
            ClosedForm::term(r, -x2 - pb * x3, th(2), zr) +
            ClosedForm::constant(r, x4));
}

TEST_CASE("lifted invariants agree with numeric matrix exponentials") {
  check_lift_numeric(a46(), 101);
  check_lift_numeric(a527(), 102);
  check_lift_numeric(a536(), 103);
  check_lift_numeric(n616(), 104);
  check_lift_numeric(n625(), 105);
  check_lift_numeric(nil_chain(5), 106);
}

TEST_CASE("theta jacobian at zero is x times the negated adjoint") {
  check_jacobian_zero(a46());
  check_jacobian_zero(a527());
  check_jacobian_zero(n616());
}

TEST_CASE("normalization of A4.6") {
  auto sc = a46();
  auto lift = lifted_invariants(sc);
  auto res = normalize_frame(sc, lift, 7);

  CHECK(res.rank == 2);
  CHECK(res.complete);
  CHECK(res.residual_thetas.empty());
  CHECK(res.residual_components.empty());
  REQUIRE(res.invariants.size() == 2);

  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2), x4 = se_var(3);
  SEp a = se_param(0), b = se_param(1);
  SEp s = se_mul2(se_add2(se_pow(x2, rat(2)), se_pow(x3, rat(2))),
                  se_exp(se_mul({se_int(-2), b, iv(a), se_ln(x1)})));
  SEp t = se_add2(se_atan(se_div(x3, x2)),
                  se_mul({se_int(-1), iv(a), se_ln(x1)}));
  CHECK(se_equal(res.invariants[0], s));
  CHECK(se_equal(res.invariants[1], t));

  REQUIRE(res.constants.size() == 2);
  CHECK(res.constants[0] == std::pair<int, Rational>(0, Rational(1)));
  CHECK(res.constants[1] == std::pair<int, Rational>(3, Rational(0)));

  REQUIRE(res.solved.size() == 2);
  CHECK(res.solved[0].first == 3);
  CHECK(se_equal(res.solved[0].second,
                 se_mul({se_int(-1), iv(a), se_ln(x1)})));
  CHECK(res.solved[1].first == 0);
  CHECK(se_equal(res.solved[1].second, se_mul({x4, iv(a), iv(x1)})));

  // the exponential pivot really becomes 1 under its substitution
  SEp w1 = lift.components[0].to_scalar(sc.nparams());
  CHECK(se_is_one(se_subst(w1, SK::Theta, 3, res.solved[0].second)));
}

TEST_CASE("normalization of A5.27") {
  auto sc = a527();
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);

  CHECK(res.rank == 4);
  CHECK(res.complete);
  REQUIRE(res.invariants.size() == 1);

  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2);
  CHECK(se_equal(res.invariants[0],
                 se_add2(se_mul2(x2, iv(x1)), se_neg(se_ln(x1)))));

  REQUIRE(res.constants.size() == 4);
  CHECK(res.constants[0] == std::pair<int, Rational>(0, Rational(1)));
  CHECK(res.constants[1] == std::pair<int, Rational>(2, Rational(0)));
  CHECK(res.constants[2] == std::pair<int, Rational>(3, Rational(0)));
  CHECK(res.constants[3] == std::pair<int, Rational>(4, Rational(0)));

  REQUIRE(res.solved.size() == 4);
  CHECK(res.solved[0].first == 4);
  CHECK(se_equal(res.solved[0].second, se_neg(se_ln(x1))));
  CHECK(res.solved[1].first == 3);
  CHECK(se_equal(res.solved[1].second,
                 se_neg(se_add({se_mul2(se_const(rat(1, 2)),
                                        se_pow(se_ln(x1), rat(2))),
                                se_mul({se_int(-1), x2, se_ln(x1), iv(x1)}),
                                se_mul2(x3, iv(x1))}))));
  CHECK(res.solved[2].first == 2);
  CHECK(res.solved[3].first == 0);
}

TEST_CASE("normalization of A5.36") {
  auto sc = a536();
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);

  CHECK(res.rank == 4);
  CHECK(res.complete);
  CHECK(res.residual_thetas.empty());
  REQUIRE(res.invariants.size() == 1);

  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2), x5 = se_var(4);
  CHECK(se_equal(res.invariants[0],
                 se_add2(x5, se_mul({x2, x3, iv(x1)}))));

  // theta5 acts trivially on the orbit once the others are fixed
  REQUIRE(res.solved.size() == 4);
  for (const auto& [k, e] : res.solved) {
    CHECK(k != 4);
    CHECK(!se_uses(e, SK::Theta));
  }
  CHECK(res.solved[0].first == 3);
  CHECK(se_equal(res.solved[0].second, se_neg(se_ln(x1))));
  CHECK(res.solved[1].first == 2);
  CHECK(se_equal(res.solved[1].second, se_mul({se_int(-1), x2, iv(x1)})));
  CHECK(res.solved[2].first == 1);
  CHECK(se_equal(res.solved[2].second, se_mul2(x3, iv(x1))));
  CHECK(res.solved[3].first == 0);
}

TEST_CASE("normalization of N6.16") {
  auto sc = n616();
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);

  CHECK(res.rank == 4);
  CHECK(res.complete);
  REQUIRE(res.invariants.size() == 2);

  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2), x4 = se_var(3),
      x5 = se_var(4);
  SEp a = se_param(0), b = se_param(1);
  SEp s = se_mul2(
      se_add2(se_pow(x3, rat(2)), se_pow(x4, rat(2))),
      se_exp(se_add2(se_mul({se_int(-2), a, x2, iv(x1)}),
                     se_mul({se_int(-2), b, se_ln(x1)}))));
  SEp t = se_add2(se_mul2(x2, iv(x1)), se_atan(se_div(x4, x3)));
  CHECK(se_equal(res.invariants[0], s));
  CHECK(se_equal(res.invariants[1], t));

  REQUIRE(res.constants.size() == 4);
  CHECK(res.constants[0] == std::pair<int, Rational>(0, Rational(1)));
  CHECK(res.constants[1] == std::pair<int, Rational>(1, Rational(0)));
  CHECK(res.constants[2] == std::pair<int, Rational>(4, Rational(0)));
  CHECK(res.constants[3] == std::pair<int, Rational>(5, Rational(0)));

  REQUIRE(res.solved.size() == 4);
  CHECK(res.solved[0].first == 5);
  CHECK(se_equal(res.solved[0].second, se_neg(se_ln(x1))));
  CHECK(res.solved[1].first == 4);
  CHECK(se_equal(res.solved[1].second, se_mul({se_int(-1), x2, iv(x1)})));
  CHECK(res.solved[2].first == 1);
  CHECK(se_equal(res.solved[2].second, se_mul2(x5, iv(x1))));
  CHECK(res.solved[3].first == 0);
}

TEST_CASE("normalization of N6.25") {
  auto sc = n625();
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);

  CHECK(res.rank == 4);
  CHECK(res.complete);
  REQUIRE(res.invariants.size() == 2);

  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2), x4 = se_var(3);
  SEp a = se_param(0), b = se_param(1);
  CHECK(se_equal(res.invariants[0], x1));

  SEp ln_ss = se_ln(se_add2(se_pow(x3, rat(2)), se_pow(x4, rat(2))));
  SEp t = se_add2(se_mul2(se_add2(se_ln(x2),
                                  se_mul({se_const(rat(-1, 2)), b, ln_ss})),
                          iv(a)),
                  se_atan(se_div(x4, x3)));
  CHECK(se_equal(res.invariants[1], t));

  // same formula in a different tree shape, evaluated numerically
  SEp ref = se_add2(
      se_mul({se_int(-1),
              se_add2(se_neg(se_ln(x2)),
                      se_mul({se_const(rat(1, 2)), b, ln_ss})),
              iv(a)}),
      se_atan(se_div(x4, x3)));
  Rng rng(99);
  int done = 0;
  for (int tdraw = 0; tdraw < 100 && done < 20; ++tdraw) {
    try {
      Sample smp = draw(sc, 0, rng, 0.0, {1});
      EvalPoint pt{smp.params, smp.x, {}};
      double gv = se_eval(res.invariants[1], pt), rv = se_eval(ref, pt);
      CHECK(std::fabs(gv - rv) <= 1e-10 * std::max(1.0, std::fabs(rv)));
      ++done;
    } catch (const DomainError&) {
      continue;
    }
  }
  CHECK(done == 20);

  REQUIRE(res.solved.size() == 4);
  CHECK(res.solved[0].first == 3);
  CHECK(res.solved[1].first == 4);
  CHECK(se_equal(res.solved[1].second,
                 se_mul2(se_const(rat(-1, 2)), ln_ss)));
}

TEST_CASE("normalization of nilpotent chains") {
  for (int n = 3; n <= 10; ++n) {
    auto sc = nil_chain(n);
    auto res = normalize_frame(sc, lifted_invariants(sc), 7);
    CHECK(res.rank == 2);
    CHECK(res.complete);
    CHECK(res.residual_thetas.empty());
    REQUIRE(res.invariants.size() == static_cast<size_t>(n - 2));
    for (const auto& f : res.invariants) CHECK(!se_uses(f, SK::Theta));
    CHECK(se_equal(res.invariants[0], se_var(0)));
  }

  // exact basis for n = 5
  auto res = normalize_frame(nil_chain(5), lifted_invariants(nil_chain(5)), 7);
  REQUIRE(res.invariants.size() == 3);
  SEp x1 = se_var(0), x2 = se_var(1), x3 = se_var(2), x4 = se_var(3),
      x5 = se_var(4);
  CHECK(se_equal(res.invariants[1],
                 se_add2(x3, se_mul({se_const(rat(-1, 2)),
                                     se_pow(x2, rat(2)), iv(x1)}))));
  CHECK(se_equal(res.invariants[2],
                 se_add({x4, se_mul({se_int(-1), x2, x3, iv(x1)}),
                         se_mul({se_const(rat(1, 3)), se_pow(x2, rat(3)),
                                 se_pow(x1, rat(-2))})})));
  REQUIRE(res.solved.size() == 2);
  CHECK(res.solved[0].first == 3);
  CHECK(se_equal(res.solved[0].second, se_mul({se_int(-1), x2, iv(x1)})));
  CHECK(res.solved[1].first == 0);
  CHECK(se_equal(res.solved[1].second, se_mul2(x5, iv(x1))));
}

TEST_CASE("abelian algebra needs no frame") {
  StructureConstants sc("abelian3", 3);
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);
  CHECK(res.rank == 0);
  CHECK(res.complete);
  CHECK(res.solved.empty());
  REQUIRE(res.invariants.size() == 3);
  for (int j = 0; j < 3; ++j) CHECK(se_equal(res.invariants[j], se_var(j)));
}

TEST_CASE("so3 trig spread is reported, not hidden") {
  auto sc = so3();
  auto res = normalize_frame(sc, lifted_invariants(sc), 7);
  CHECK(!res.complete);
  CHECK(res.invariants.empty());
  bool spread = false, kept = false;
  for (const auto& line : res.log) {
    if (line.find("spreads over components") != std::string::npos)
      spread = true;
    if (line.find("unresolved trigonometric") != std::string::npos)
      kept = true;
  }
  CHECK(spread);
  CHECK(kept);
}

TEST_CASE("normalization is deterministic in the seed") {
  for (const auto& sc : {a46(), n625()}) {
    auto lift = lifted_invariants(sc);
    auto r1 = normalize_frame(sc, lift, 7);
    auto r2 = normalize_frame(sc, lift, 7);
    CHECK(r1.log == r2.log);
    REQUIRE(r1.invariants.size() == r2.invariants.size());
    for (size_t i = 0; i < r1.invariants.size(); ++i)
      CHECK(se_equal(r1.invariants[i], r2.invariants[i]));
    REQUIRE(r1.solved.size() == r2.solved.size());
    for (size_t i = 0; i < r1.solved.size(); ++i) {
      CHECK(r1.solved[i].first == r2.solved[i].first);
      CHECK(se_equal(r1.solved[i].second, r2.solved[i].second));
    }
  }
}

TEST_CASE("emitted invariants are unchanged under the lifted action") {
  check_finite_invariance(a46(), 201, {0}, std::pair<int, int>{1, 2});
  check_finite_invariance(a527(), 202, {0}, std::nullopt);
  check_finite_invariance(a536(), 203, {}, std::nullopt);
  check_finite_invariance(n616(), 204, {0}, std::pair<int, int>{2, 3});
  check_finite_invariance(n625(), 205, {1}, std::pair<int, int>{2, 3});
  check_finite_invariance(nil_chain(7), 206, {}, std::nullopt);
}

TEST_CASE("frame values drive pivot components to their constants") {
  check_frame_property(a46(), 301, {0});
  check_frame_property(a527(), 302, {0});
  check_frame_property(a536(), 303, {0});
  check_frame_property(n616(), 304, {0});
  check_frame_property(n625(), 305, {1});
  check_frame_property(nil_chain(6), 306, {});
}
