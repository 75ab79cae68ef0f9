#include "casimir/algebra.hpp"

#include <algorithm>
#include <sstream>

namespace casimir {

AssumptionSet::AssumptionSet(int nparams, int arity)
    : nparams_(nparams), arity_(arity) {}

void AssumptionSet::add(Poly p, AssumeKind k) {
  if (p.nvars() != arity_) throw Error("assumption arity mismatch");
  items_.push_back({std::move(p), k});
}

bool AssumptionSet::decides_nonzero(const Poly& p0) const {
  if (p0.is_zero()) return false;

  auto direct = [&](const Poly& q) -> bool {
    if (q.is_constant()) return !q.is_zero();
    Poly qn = q.unit_normal();
    for (const auto& a : items_) {
      if (a.kind == AssumeKind::Zero) continue;
      if (a.poly.unit_normal() == qn) return true;
    }
    // Same-sign even-exponent polynomials with a constant term are bounded
    // away from zero over the reals (e.g. 1 + b^2).
    bool all_even = true, has_const = false, same_sign = true;
    int sign = 0;
    for (const auto& [m, c] : q.terms()) {
      bool constant_term = true;
      for (unsigned e : m) {
        if (e % 2 != 0) all_even = false;
        if (e != 0) constant_term = false;
      }
      if (constant_term) has_const = true;
      int s = c > 0 ? 1 : -1;
      if (sign == 0)
        sign = s;
      else if (s != sign)
        same_sign = false;
    }
    return all_even && has_const && same_sign;
  };

  Poly p = p0.unit_normal();
  if (direct(p)) return true;

  // Peel assumed-nonzero factors and retest.
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& a : items_) {
      if (a.kind == AssumeKind::Zero || a.poly.is_constant()) continue;
      while (auto q = try_divide(p, a.poly)) {
        p = q->unit_normal();
        progress = true;
        if (direct(p)) return true;
      }
    }
  }
  return direct(p);
}

bool AssumptionSet::decides_nonzero(const RatFunc& f) const {
  if (f.is_zero()) return false;
  return decides_nonzero(f.num());
}

NonzeroDecider AssumptionSet::decider() const {
  // copy the set so the lambda owns its data
  AssumptionSet self = *this;
  return [self](const RatFunc& f) { return self.decides_nonzero(f); };
}

std::vector<Rational> AssumptionSet::sample_params(Rng& rng,
                                                   int max_tries) const {
  const Rational margin = rat(1, 64);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<Rational> point(static_cast<size_t>(arity_), Rational(0));
    for (int i = 0; i < nparams_; ++i)
      point[static_cast<size_t>(i)] = rng.rational();
    bool ok = true;
    for (const auto& a : items_) {
      Rational v = a.poly.eval(point);
      switch (a.kind) {
        case AssumeKind::Nonzero:
          if (cmp(v < 0 ? -v : v, margin) < 0) ok = false;
          break;
        case AssumeKind::Positive:
          if (cmp(v, margin) < 0) ok = false;
          break;
        case AssumeKind::Zero:
          if (v != 0) ok = false;
          break;
      }
      if (!ok) break;
    }
    if (ok) {
      point.resize(static_cast<size_t>(nparams_));
      return point;
    }
  }
  throw TooManyDomainFailures(
      "could not sample parameters satisfying the assumptions");
}

StructureConstants::StructureConstants(std::string id, int n,
                                       std::vector<std::string> param_names)
    : id_(std::move(id)),
      n_(n),
      param_names_(std::move(param_names)),
      assumptions_(static_cast<int>(param_names_.size()),
                   static_cast<int>(param_names_.size()) + n) {
  if (n <= 0) throw Error("dimension must be positive");
}

void StructureConstants::set_bracket(int i, int j,
                                     std::vector<RatFunc> coeffs) {
  if (i == j) throw Error("bracket [e_i, e_i] is identically zero");
  if (i > j) {
    RatFunc z = RatFunc::zero(arity());
    for (auto& c : coeffs) c = z - c;
    std::swap(i, j);
  }
  if (i < 0 || j >= n_) throw Error("bracket index out of range");
  if (static_cast<int>(coeffs.size()) != n_)
    throw Error("bracket coefficient count mismatch");
  bool nonzero = false;
  for (const auto& c : coeffs) {
    if (c.nvars() != arity()) throw Error("bracket coefficient arity mismatch");
    if (!c.is_zero()) nonzero = true;
  }
  if (!nonzero) {
    brackets_.erase({i, j});
    return;
  }
  brackets_[{i, j}] = std::move(coeffs);
}

RatFunc StructureConstants::c(int i, int j, int k) const {
  if (i == j) return RatFunc::zero(arity());
  bool flip = i > j;
  if (flip) std::swap(i, j);
  auto it = brackets_.find({i, j});
  if (it == brackets_.end()) return RatFunc::zero(arity());
  const RatFunc& v = it->second[static_cast<size_t>(k)];
  return flip ? RatFunc::zero(arity()) - v : v;
}

void StructureConstants::substitute_param(int param, const Rational& value) {
  for (auto& [ij, coeffs] : brackets_)
    for (auto& c : coeffs) c = c.substitute(param, value);
  // prune brackets that became zero
  for (auto it = brackets_.begin(); it != brackets_.end();) {
    bool nonzero = false;
    for (const auto& c : it->second)
      if (!c.is_zero()) nonzero = true;
    it = nonzero ? std::next(it) : brackets_.erase(it);
  }
  AssumptionSet rebuilt(assumptions_.nparams(), assumptions_.arity());
  for (const auto& a : assumptions_.items()) {
    Poly p = a.poly.substitute(param, value);
    if (p.is_zero()) continue;  // the satisfied pin itself
    rebuilt.add(std::move(p), a.kind);
  }
  assumptions_ = std::move(rebuilt);
}

void StructureConstants::validate() const {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      for (int k = j + 1; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          RatFunc res = RatFunc::zero(arity());
          for (int m = 0; m < n_; ++m) {
            res = res + c(i, j, m) * c(m, k, l);
            res = res + c(j, k, m) * c(m, i, l);
            res = res + c(k, i, m) * c(m, j, l);
          }
          if (!res.is_zero())
            throw JacobiViolation(i + 1, j + 1, k + 1, l + 1,
                                  res.num().str(param_names_));
        }
}

ParamMatrix ad_matrix(const StructureConstants& sc, int i) {
  int n = sc.n();
  ParamMatrix m(static_cast<size_t>(n),
                std::vector<RatFunc>(static_cast<size_t>(n),
                                     RatFunc::zero(sc.arity())));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      m[static_cast<size_t>(k)][static_cast<size_t>(j)] = sc.c(i, j, k);
  return m;
}

bool is_zero_matrix(const ParamMatrix& m) {
  for (const auto& row : m)
    for (const auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

ParamMatrix commutator_matrix(const StructureConstants& sc) {
  int n = sc.n(), np = sc.nparams();
  ParamMatrix m(static_cast<size_t>(n),
                std::vector<RatFunc>(static_cast<size_t>(n),
                                     RatFunc::zero(sc.arity())));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      RatFunc entry = RatFunc::zero(sc.arity());
      for (int k = 0; k < n; ++k) {
        RatFunc ck = sc.c(i, j, k);
        if (ck.is_zero()) continue;
        entry = entry + ck * RatFunc::var(sc.arity(), np + k);
      }
      m[static_cast<size_t>(i)][static_cast<size_t>(j)] = entry;
      m[static_cast<size_t>(j)][static_cast<size_t>(i)] =
          RatFunc::zero(sc.arity()) - entry;
    }
  return m;
}

namespace {

int count_nonzero(const std::vector<RatFunc>& row) {
  int c = 0;
  for (const auto& e : row)
    if (!e.is_zero()) ++c;
  return c;
}

}  // namespace

std::vector<std::vector<RatFunc>> center_basis(const StructureConstants& sc) {
  const int n = sc.n();
  const int A = sc.arity();
  const auto& as = sc.assumptions();
  RatFunc zero = RatFunc::zero(A);

  std::vector<std::vector<RatFunc>> rows;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      std::vector<RatFunc> row(static_cast<size_t>(n), zero);
      bool nonzero = false;
      for (int i = 0; i < n; ++i) {
        row[static_cast<size_t>(i)] = sc.c(i, j, k);
        if (!row[static_cast<size_t>(i)].is_zero()) nonzero = true;
      }
      if (nonzero) rows.push_back(std::move(row));
    }

  // forced[i]: variable pinned to zero. pivot_of[i]: row expressing v_i.
  std::vector<bool> forced(static_cast<size_t>(n), false);
  std::vector<int> pivot_of(static_cast<size_t>(n), -1);
  std::vector<bool> row_used(rows.size(), false);
  std::vector<int> pivot_col(rows.size(), -1);

  auto zero_out_column = [&](int col) {
    for (auto& row : rows) row[static_cast<size_t>(col)] = zero;
  };

  bool progress = true;
  while (progress) {
    progress = false;

    // Rule 1: single-entry rows. Over the reals, several equations
    // p_m v_j = 0 force v_j = 0 as soon as sum p_m^2 cannot vanish.
    for (int col = 0; col < n && !progress; ++col) {
      if (forced[static_cast<size_t>(col)] ||
          pivot_of[static_cast<size_t>(col)] >= 0)
        continue;
      RatFunc sq = zero;
      bool any = false, decided = false;
      for (size_t r = 0; r < rows.size(); ++r) {
        if (row_used[r]) continue;
        if (count_nonzero(rows[r]) != 1) continue;
        const RatFunc& e = rows[r][static_cast<size_t>(col)];
        if (e.is_zero()) continue;
        any = true;
        if (as.decides_nonzero(e)) decided = true;
        sq = sq + e * e;
      }
      if (any && (decided || as.decides_nonzero(sq))) {
        forced[static_cast<size_t>(col)] = true;
        zero_out_column(col);
        progress = true;
      }
    }
    if (progress) continue;

    // Rule 2: standard elimination on a pivot that is decidably nonzero.
    for (size_t r = 0; r < rows.size() && !progress; ++r) {
      if (row_used[r]) continue;
      for (int col = 0; col < n; ++col) {
        const RatFunc& e = rows[r][static_cast<size_t>(col)];
        if (e.is_zero() || !as.decides_nonzero(e)) continue;
        RatFunc inv = RatFunc::one(A) / e;
        for (auto& entry : rows[r]) entry = entry * inv;
        for (size_t r2 = 0; r2 < rows.size(); ++r2) {
          if (r2 == r) continue;
          const RatFunc& f = rows[r2][static_cast<size_t>(col)];
          if (f.is_zero()) continue;
          RatFunc factor = f;
          for (int c2 = 0; c2 < n; ++c2)
            rows[r2][static_cast<size_t>(c2)] =
                rows[r2][static_cast<size_t>(c2)] -
                factor * rows[r][static_cast<size_t>(c2)];
        }
        row_used[r] = true;
        pivot_col[r] = col;
        pivot_of[static_cast<size_t>(col)] = static_cast<int>(r);
        progress = true;
        break;
      }
    }
    if (progress) continue;

    // Rule 3: two rows supported on the same column pair with a decidably
    // nonzero determinant force both variables to zero.
    std::vector<size_t> pair_rows;
    for (size_t r = 0; r < rows.size(); ++r)
      if (!row_used[r] && count_nonzero(rows[r]) == 2) pair_rows.push_back(r);
    for (size_t a = 0; a < pair_rows.size() && !progress; ++a)
      for (size_t b = a + 1; b < pair_rows.size() && !progress; ++b) {
        const auto& ra = rows[pair_rows[a]];
        const auto& rb = rows[pair_rows[b]];
        int c1 = -1, c2 = -1;
        for (int c0 = 0; c0 < n; ++c0)
          if (!ra[static_cast<size_t>(c0)].is_zero()) (c1 < 0 ? c1 : c2) = c0;
        if (c2 < 0) continue;
        if (rb[static_cast<size_t>(c1)].is_zero() ||
            rb[static_cast<size_t>(c2)].is_zero())
          continue;
        int c3 = -1;
        for (int c0 = 0; c0 < n; ++c0)
          if (!rb[static_cast<size_t>(c0)].is_zero() && c0 != c1 && c0 != c2)
            c3 = c0;
        if (c3 >= 0) continue;  // rb uses a third column
        RatFunc det = ra[static_cast<size_t>(c1)] * rb[static_cast<size_t>(c2)] -
                      ra[static_cast<size_t>(c2)] * rb[static_cast<size_t>(c1)];
        if (as.decides_nonzero(det)) {
          forced[static_cast<size_t>(c1)] = true;
          forced[static_cast<size_t>(c2)] = true;
          zero_out_column(c1);
          zero_out_column(c2);
          progress = true;
        }
      }
  }

  // Any remaining nonzero row marks an undecided case split.
  for (size_t r = 0; r < rows.size(); ++r) {
    if (row_used[r]) continue;
    for (const auto& e : rows[r])
      if (!e.is_zero())
        throw ParametricCenter(e.num().str(sc.param_names()));
  }

  // Free columns span the center; pivot columns back-substitute.
  std::vector<std::vector<RatFunc>> basis;
  for (int col = 0; col < n; ++col) {
    if (forced[static_cast<size_t>(col)] ||
        pivot_of[static_cast<size_t>(col)] >= 0)
      continue;
    std::vector<RatFunc> v(static_cast<size_t>(n), zero);
    v[static_cast<size_t>(col)] = RatFunc::one(A);
    for (int pc = 0; pc < n; ++pc) {
      int pr = pivot_of[static_cast<size_t>(pc)];
      if (pr < 0) continue;
      // pivot row (normalized): v_pc + sum_free coef v_free = 0
      v[static_cast<size_t>(pc)] =
          zero - rows[static_cast<size_t>(pr)][static_cast<size_t>(col)];
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

int rational_rank(std::vector<std::vector<Rational>> m) {
  if (m.empty()) return 0;
  size_t nr = m.size(), nc = m[0].size();
  int rank = 0;
  size_t row = 0;
  for (size_t col = 0; col < nc && row < nr; ++col) {
    size_t piv = row;
    while (piv < nr && m[piv][col] == 0) ++piv;
    if (piv == nr) continue;
    std::swap(m[piv], m[row]);
    Rational inv = Rational(1) / m[row][col];
    for (size_t c2 = col; c2 < nc; ++c2) m[row][c2] *= inv;
    for (size_t r2 = 0; r2 < nr; ++r2) {
      if (r2 == row || m[r2][col] == 0) continue;
      Rational f = m[r2][col];
      for (size_t c2 = col; c2 < nc; ++c2) m[r2][c2] -= f * m[row][c2];
    }
    ++row;
    ++rank;
  }
  return rank;
}

int symbolic_rank(ParamMatrix m) {
  if (m.empty()) return 0;
  size_t nr = m.size(), nc = m[0].size();
  int A = m[0][0].nvars();
  RatFunc zero = RatFunc::zero(A);
  int rank = 0;
  size_t row = 0;
  for (size_t col = 0; col < nc && row < nr; ++col) {
    size_t piv = row;
    while (piv < nr && m[piv][col].is_zero()) ++piv;
    if (piv == nr) continue;
    std::swap(m[piv], m[row]);
    RatFunc inv = RatFunc::one(A) / m[row][col];
    for (size_t c2 = col; c2 < nc; ++c2) m[row][c2] = m[row][c2] * inv;
    for (size_t r2 = row + 1; r2 < nr; ++r2) {
      if (m[r2][col].is_zero()) continue;
      RatFunc f = m[r2][col];
      for (size_t c2 = col; c2 < nc; ++c2)
        m[r2][c2] = m[r2][c2] - f * m[row][c2];
    }
    ++row;
    ++rank;
  }
  return rank;
}

std::vector<std::vector<Rational>> eval_matrix(
    const ParamMatrix& m, const std::vector<Rational>& point) {
  std::vector<std::vector<Rational>> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    out[i].reserve(m[i].size());
    for (const auto& e : m[i]) out[i].push_back(e.eval(point));
  }
  return out;
}

RankResult generic_rank(const StructureConstants& sc, unsigned long seed,
                        int trials) {
  ParamMatrix M = commutator_matrix(sc);
  Rng rng(seed);
  RankResult best;
  best.seed = seed;
  for (int t = 0; t < trials; ++t) {
    std::vector<Rational> params;
    try {
      params = sc.assumptions().sample_params(rng);
    } catch (const TooManyDomainFailures&) {
      continue;
    }
    std::vector<Rational> point(static_cast<size_t>(sc.arity()), Rational(0));
    for (int i = 0; i < sc.nparams(); ++i)
      point[static_cast<size_t>(i)] = params[static_cast<size_t>(i)];
    for (int i = 0; i < sc.n(); ++i)
      point[static_cast<size_t>(sc.nparams() + i)] = rng.rational();
    std::vector<std::vector<Rational>> num;
    try {
      num = eval_matrix(M, point);
    } catch (const DomainError&) {
      continue;  // denominator vanished at the sample
    }
    int r = rational_rank(std::move(num));
    ++best.trials;
    if (r > best.rank) {
      best.rank = r;
      best.params.assign(point.begin(),
                         point.begin() + static_cast<long>(sc.nparams()));
      best.x.assign(point.begin() + static_cast<long>(sc.nparams()),
                    point.end());
    }
  }
  if (best.rank < 0)
    throw TooManyDomainFailures("no usable sample for the generic rank");
  return best;
}

}  // namespace casimir
