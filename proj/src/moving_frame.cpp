#include "casimir/moving_frame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace casimir {

namespace {

ParamMatrix negated(const ParamMatrix& m) {
  ParamMatrix out = m;
  for (auto& row : out)
    for (auto& e : row) e = -e;
  return out;
}

}  // namespace

FrameMatrix inner_automorphism_matrix(const StructureConstants& sc) {
  int n = sc.n(), arity = sc.arity();
  NonzeroDecider nz = sc.assumptions().decider();
  FrameMatrix frame;
  for (int i = 0; i < n; ++i)
    if (!is_zero_matrix(ad_matrix(sc, i))) frame.factors.push_back(i);
  int r = static_cast<int>(frame.factors.size());
  frame.b = cfm_identity(n, r, arity);
  for (int k = 0; k < r; ++k) {
    CFMatrix e = exp_theta(negated(ad_matrix(sc, frame.factors[static_cast<size_t>(k)])), k, r, nz);
    frame.b = cfm_mul(frame.b, e);
  }
  return frame;
}

LiftedInvariant lifted_invariants(const StructureConstants& sc) {
  return lifted_invariants(sc, inner_automorphism_matrix(sc));
}

LiftedInvariant lifted_invariants(const StructureConstants& sc,
                                  const FrameMatrix& frame) {
  int n = sc.n(), np = sc.nparams(), arity = sc.arity();
  int r = static_cast<int>(frame.factors.size());
  LiftedInvariant inv;
  inv.factors = frame.factors;
  for (int j = 0; j < n; ++j) {
    ClosedForm c = ClosedForm::zero(r, arity);
    for (int i = 0; i < n; ++i)
      c = c + frame.b[static_cast<size_t>(i)][static_cast<size_t>(j)].scaled(
                  RatFunc::var(arity, np + i));
    inv.components.push_back(std::move(c));
  }
  return inv;
}

CFMatrix theta_jacobian(const LiftedInvariant& inv) {
  CFMatrix j;
  for (const auto& c : inv.components) {
    std::vector<ClosedForm> row;
    for (int k = 0; k < inv.nthetas(); ++k) row.push_back(c.diff(k));
    j.push_back(std::move(row));
  }
  return j;
}

namespace {

/// e == A*theta_k + B with A, B free of theta_k; nullopt when not affine.
std::optional<std::pair<SEp, SEp>> split_affine(const SEp& e, int k) {
  std::vector<SEp> terms =
      e->kind == SK::Add ? e->ch : std::vector<SEp>{e};
  std::vector<SEp> a_terms, b_terms;
  for (const auto& t : terms) {
    if (!se_uses(t, SK::Theta, k)) {
      b_terms.push_back(t);
      continue;
    }
    if (t->kind == SK::Theta && t->idx == k) {
      a_terms.push_back(se_int(1));
      continue;
    }
    if (t->kind == SK::Mul) {
      std::vector<SEp> rest;
      int hits = 0;
      bool bad = false;
      for (const auto& f : t->ch) {
        if (f->kind == SK::Theta && f->idx == k) {
          ++hits;
          continue;
        }
        if (se_uses(f, SK::Theta, k)) bad = true;
        rest.push_back(f);
      }
      if (bad || hits != 1) return std::nullopt;
      a_terms.push_back(se_mul(std::move(rest)));
      continue;
    }
    return std::nullopt;
  }
  if (a_terms.empty()) return std::nullopt;
  return std::make_pair(se_add(std::move(a_terms)), se_add(std::move(b_terms)));
}

/// e == gamma * exp(lambda*theta_k + mu), gamma and mu free of theta_k,
/// lambda in params only.
struct ExpPattern {
  SEp gamma, mu, lambda;
};

std::optional<ExpPattern> split_exponential(const SEp& e, int k) {
  std::vector<SEp> factors =
      e->kind == SK::Mul ? e->ch : std::vector<SEp>{e};
  std::vector<SEp> gamma;
  SEp arg;
  for (const auto& f : factors) {
    if (f->kind == SK::Exp && se_uses(f->ch[0], SK::Theta, k)) {
      if (arg) return std::nullopt;
      arg = f->ch[0];
      continue;
    }
    if (se_uses(f, SK::Theta, k)) return std::nullopt;
    gamma.push_back(f);
  }
  if (!arg) return std::nullopt;
  auto ab = split_affine(arg, k);
  if (!ab) return std::nullopt;
  if (se_uses(ab->first, SK::Theta) || se_uses(ab->first, SK::Var))
    return std::nullopt;
  return ExpPattern{se_mul(std::move(gamma)), ab->second, ab->first};
}

bool key_has_trig_at(const CFKey& key, int k) {
  return key.trig != Trig::One &&
         !key.freq[static_cast<size_t>(k)].is_zero();
}

struct Rewritten {
  std::vector<std::optional<SEp>> comps;  // nullopt: trig survived, unusable
  std::vector<std::string> log;
};

/// Replaces each detected rotation pair (W_p, W_q) for theta_k by the derived
/// combinations S = W_p^2 + W_q^2 (trig-free) and T = omega*theta_k +
/// arctan(W_q/W_p at theta_k = 0), validated by the exact identities
/// S trig-free and W_q' W_p - W_p' W_q == omega * S.
Rewritten rotation_rewrite(const LiftedInvariant& inv, int np) {
  int n = inv.n(), r = inv.nthetas();
  std::vector<ClosedForm> cfs = inv.components;
  std::map<int, SEp> overrides;
  Rewritten out;
  for (int k = 0; k < r; ++k) {
    std::vector<int> rows;
    for (int j = 0; j < n; ++j) {
      if (overrides.count(j)) continue;
      for (const auto& [key, coeff] : cfs[static_cast<size_t>(j)].terms())
        if (key_has_trig_at(key, k)) {
          rows.push_back(j);
          break;
        }
    }
    if (rows.empty()) continue;
    std::ostringstream where;
    for (int j : rows) where << " " << j + 1;
    if (rows.size() != 2) {
      out.log.push_back("rotation rewrite: trig of parameter " +
                        std::to_string(k + 1) + " spreads over components" +
                        where.str() + "; no pair rule applies");
      continue;
    }
    const ClosedForm& wp = cfs[static_cast<size_t>(rows[0])];
    const ClosedForm& wq = cfs[static_cast<size_t>(rows[1])];
    ClosedForm s = wp * wp + wq * wq;
    if (s.has_trig()) continue;
    ClosedForm num = wq.diff(k) * wp - wp.diff(k) * wq;
    if (num.is_zero() || s.is_zero()) continue;
    const auto& [skey, scoeff] = *s.terms().begin();
    auto it = num.terms().find(skey);
    if (it == num.terms().end()) continue;
    RatFunc omega = it->second / scoeff;
    if (!(num == s.scaled(omega))) continue;
    ClosedForm wp0 = wp.subst_theta_zero(k), wq0 = wq.subst_theta_zero(k);
    if (wp0.has_trig() || wq0.has_trig()) continue;
    SEp t = se_add2(se_mul2(ratfunc_to_se(omega, np), se_theta(k)),
                    se_atan(se_div(wq0.to_scalar(np), wp0.to_scalar(np))));
    cfs[static_cast<size_t>(rows[0])] = s;
    overrides[rows[1]] = t;
    out.log.push_back("rotation pair (" + std::to_string(rows[0] + 1) + "," +
                      std::to_string(rows[1] + 1) + ") for parameter " +
                      std::to_string(k + 1) +
                      ": replaced by sum of squares and arctan combination");
  }
  for (int j = 0; j < n; ++j) {
    auto ov = overrides.find(j);
    if (ov != overrides.end()) {
      out.comps.push_back(ov->second);
    } else if (cfs[static_cast<size_t>(j)].has_trig()) {
      out.comps.push_back(std::nullopt);
      out.log.push_back("component " + std::to_string(j + 1) +
                        " keeps unresolved trigonometric terms");
    } else {
      out.comps.push_back(cfs[static_cast<size_t>(j)].to_scalar(np));
    }
  }
  return out;
}

struct PivotSample {
  std::vector<std::pair<int, int>> pivots;  // (component row, theta col)
  EvalPoint pt;
  int attempt = 0;
};

PivotSample select_pivots(const StructureConstants& sc,
                          const std::vector<std::optional<SEp>>& w, int r,
                          int rho, unsigned long seed, bool lenient) {
  int n = static_cast<int>(w.size());
  for (int attempt = 0; attempt < 25; ++attempt) {
    Rng rng(seed + static_cast<unsigned long>(attempt));
    try {
      std::vector<Rational> params = sc.assumptions().sample_params(rng);
      EvalPoint pt;
      for (const auto& q : params) pt.params.push_back(to_double(q));
      for (int i = 0; i < n; ++i)
        pt.x.push_back(to_double(rng.nonzero_rational()));
      for (int k = 0; k < r; ++k)
        pt.theta.push_back(to_double(rng.rational()));

      std::vector<std::vector<double>> work(
          static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(r), 0.0));
      for (int j = 0; j < n; ++j) {
        if (!w[static_cast<size_t>(j)]) continue;
        for (int k = 0; k < r; ++k)
          work[static_cast<size_t>(j)][static_cast<size_t>(k)] =
              se_eval(se_diff(*w[static_cast<size_t>(j)], SK::Theta, k), pt);
      }

      std::vector<std::pair<int, int>> pivots;
      std::vector<char> used(static_cast<size_t>(r), 0);
      for (int j = 0; j < n; ++j) {
        auto& row = work[static_cast<size_t>(j)];
        for (const auto& [pj, pk] : pivots) {
          double f = row[static_cast<size_t>(pk)] /
                     work[static_cast<size_t>(pj)][static_cast<size_t>(pk)];
          if (f == 0.0) continue;
          for (int k = 0; k < r; ++k)
            row[static_cast<size_t>(k)] -=
                f * work[static_cast<size_t>(pj)][static_cast<size_t>(k)];
        }
        double rowmax = 0.0;
        for (int k = 0; k < r; ++k)
          if (!used[static_cast<size_t>(k)])
            rowmax = std::max(rowmax, std::fabs(row[static_cast<size_t>(k)]));
        double thr = 1e-7 * std::max(1.0, rowmax);
        if (rowmax <= 1e-9) continue;
        for (int k = 0; k < r; ++k)
          if (!used[static_cast<size_t>(k)] &&
              std::fabs(row[static_cast<size_t>(k)]) > thr) {
            pivots.emplace_back(j, k);
            used[static_cast<size_t>(k)] = 1;
            break;
          }
      }
      if (lenient || static_cast<int>(pivots.size()) == rho)
        return PivotSample{std::move(pivots), std::move(pt), attempt};
    } catch (const DomainError&) {
      continue;
    }
  }
  throw SampleDegenerate(25);
}

}  // namespace

EliminationResult normalize_frame(const StructureConstants& sc,
                                  const LiftedInvariant& inv,
                                  unsigned long seed) {
  int n = inv.n(), r = inv.nthetas(), np = sc.nparams();
  EliminationResult res;
  res.rank = generic_rank(sc, seed).rank;

  Rewritten rw = rotation_rewrite(inv, np);
  res.log = std::move(rw.log);
  std::vector<std::optional<SEp>>& w = rw.comps;
  bool untranslatable =
      std::any_of(w.begin(), w.end(), [](const auto& c) { return !c; });

  PivotSample ps = select_pivots(sc, w, r, res.rank, seed, untranslatable);
  {
    std::ostringstream os;
    os << "sample attempt " << ps.attempt << ": selected " << ps.pivots.size()
       << " pivots";
    for (const auto& [j, k] : ps.pivots)
      os << " (component " << j + 1 << ", parameter " << k + 1 << ")";
    res.log.push_back(os.str());
  }

  NameCtx names;
  names.params = sc.param_names();
  names.var_prefix = "x";

  std::vector<char> consumed(static_cast<size_t>(n), 0);
  bool any_failure = untranslatable;
  for (const auto& [j, k] : ps.pivots) {
    const SEp& comp = *w[static_cast<size_t>(j)];
    SEp sol;
    Rational c;
    std::string pattern;
    // Substitutions can bury the pivot parameter inside a product of sums;
    // the expanded form recovers the term-level affine shape in that case.
    auto ab = split_affine(comp, k);
    if (!ab && !split_exponential(comp, k)) ab = split_affine(se_expand(comp), k);
    if (ab) {
      sol = se_div(se_neg(ab->second), ab->first);
      c = 0;
      pattern = "affine";
    } else if (auto ep = split_exponential(comp, k)) {
      SEp lng = se_is_one(ep->gamma) ? se_int(0) : se_ln(ep->gamma);
      sol = se_div(se_neg(se_add2(lng, ep->mu)), ep->lambda);
      c = 1;
      pattern = "exponential";
    } else {
      any_failure = true;
      res.residual_thetas.push_back(k);
      res.log.push_back(PatternNotSolvable(k, j).what());
      continue;
    }
    consumed[static_cast<size_t>(j)] = 1;
    res.constants.emplace_back(j, c);
    for (int j2 = 0; j2 < n; ++j2) {
      if (j2 == j || !w[static_cast<size_t>(j2)]) continue;
      w[static_cast<size_t>(j2)] =
          se_subst(*w[static_cast<size_t>(j2)], SK::Theta, k, sol);
    }
    for (auto& [k2, expr] : res.solved) expr = se_subst(expr, SK::Theta, k, sol);
    res.solved.emplace_back(k, sol);
    res.log.push_back("component " + std::to_string(j + 1) + " = " +
                      rat_str(c) + " (" + pattern + "): parameter " +
                      std::to_string(k + 1) + " := " + se_text(sol, names));
  }

  for (int j = 0; j < n; ++j) {
    if (consumed[static_cast<size_t>(j)] || !w[static_cast<size_t>(j)])
      continue;
    const SEp& comp = *w[static_cast<size_t>(j)];
    if (se_uses(comp, SK::Theta)) {
      res.residual_components.push_back(comp);
      std::set<int> ks;
      se_leaf_indices(comp, SK::Theta, ks);
      for (int k : ks)
        if (std::find(res.residual_thetas.begin(), res.residual_thetas.end(),
                      k) == res.residual_thetas.end())
          res.residual_thetas.push_back(k);
    } else {
      res.invariants.push_back(comp);
    }
  }
  std::sort(res.residual_thetas.begin(), res.residual_thetas.end());

  // Unsolved parameters absent from every emitted component are unessential
  // directions; pin them to 0 so recorded substitutions depend on x alone.
  for (auto& [k, expr] : res.solved) {
    std::set<int> ks;
    se_leaf_indices(expr, SK::Theta, ks);
    for (int m : ks) {
      if (std::find(res.residual_thetas.begin(), res.residual_thetas.end(),
                    m) != res.residual_thetas.end())
        continue;
      expr = se_subst(expr, SK::Theta, m, se_int(0));
      res.log.push_back("unessential parameter " + std::to_string(m + 1) +
                        " pinned to 0 in the recorded substitution for " +
                        std::to_string(k + 1));
    }
  }

  res.complete = !any_failure && res.residual_components.empty() &&
                 static_cast<int>(res.invariants.size()) == n - res.rank;
  return res;
}

}  // namespace casimir
