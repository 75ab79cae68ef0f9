#include "casimir/verifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include "casimir/mat_exp.hpp"

namespace casimir {

namespace {

constexpr double kEvalGuard = 1e-3;   // minimal denominator / log magnitude
constexpr double kSvdCutoff = 1e-8;   // relative singular-value threshold
constexpr double kThetaScale = 0.05;  // |theta_k| <= 0.1 per draw
constexpr int kTriesPerSample = 50;
constexpr std::size_t kMaxWitnesses = 8;

struct DrawnPoint {
  std::vector<double> params, x, theta;
  std::vector<double> cp;  // params then x: the coefficient point
};

DrawnPoint draw_point(const StructureConstants& sc, int nthetas, Rng& rng) {
  DrawnPoint p;
  for (const Rational& q : sc.assumptions().sample_params(rng))
    p.params.push_back(to_double(q));
  for (int i = 0; i < sc.n(); ++i) {
    Rational q = rng.rational();
    while (abs(q) < Rational(1, 4)) q = rng.rational();
    p.x.push_back(to_double(q));
  }
  for (int k = 0; k < nthetas; ++k)
    p.theta.push_back(kThetaScale * to_double(rng.rational()));
  p.cp = p.params;
  p.cp.insert(p.cp.end(), p.x.begin(), p.x.end());
  return p;
}

Eigen::MatrixXd ad_numeric(const StructureConstants& sc, int i,
                           const std::vector<double>& cp) {
  const int n = sc.n();
  const ParamMatrix m = ad_matrix(sc, i);
  Eigen::MatrixXd out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out(r, c) = m[static_cast<size_t>(r)][static_cast<size_t>(c)].eval_d(cp);
  return out;
}

std::vector<int> acting_generators(const StructureConstants& sc) {
  std::vector<int> res;
  for (int i = 0; i < sc.n(); ++i)
    if (!is_zero_matrix(ad_matrix(sc, i))) res.push_back(i);
  return res;
}

/// x * prod_k exp(-t theta_k ad_k), ascending k.
std::vector<double> acted(const std::vector<Eigen::MatrixXd>& ads,
                          const DrawnPoint& p, double t) {
  const auto n = static_cast<Eigen::Index>(p.x.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  for (size_t k = 0; k < ads.size(); ++k)
    b *= exp_numeric(-t * p.theta[k] * ads[k]);
  Eigen::RowVectorXd xv(n);
  for (Eigen::Index i = 0; i < n; ++i) xv(i) = p.x[static_cast<size_t>(i)];
  const Eigen::RowVectorXd y = xv * b;
  std::vector<double> out(p.x.size());
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<size_t>(i)] = y(i);
  return out;
}

std::vector<std::vector<SEp>> gradients(const std::vector<SEp>& hs, int n) {
  std::vector<std::vector<SEp>> g(hs.size());
  for (size_t l = 0; l < hs.size(); ++l) {
    g[l].reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) g[l].push_back(se_diff(hs[l], SK::Var, j));
  }
  return g;
}

int svd_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kSvdCutoff * sv(0)) ++r;
  return r;
}

void note_witness(CheckReport& rep, int op, const DrawnPoint& p, double res) {
  if (rep.witnesses.size() < kMaxWitnesses)
    rep.witnesses.push_back({op, p.params, p.x, p.theta, res});
}

void settle(CheckReport& rep, int samples, bool failed, const char* what) {
  if (rep.accepted == 0 || rep.rejected > 9 * rep.accepted)
    throw TooManyDomainFailures(std::string(what) +
                                ": sampling kept leaving the domain");
  if (failed)
    rep.verdict = Verdict::Fail;
  else
    rep.verdict =
        rep.accepted < samples ? Verdict::DomainLimited : Verdict::Pass;
}

}  // namespace

std::string CheckReport::text() const {
  std::ostringstream os;
  switch (verdict) {
    case Verdict::Pass:
      os << "pass";
      break;
    case Verdict::Fail:
      os << "fail";
      break;
    case Verdict::DomainLimited:
      os << "domain-limited";
      break;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                " max_residual=%.3e tol=%.0e samples=%d rejected=%d",
                max_residual, tol, accepted, rejected);
  os << buf;
  for (const auto& w : witnesses) {
    os << "\n  witness";
    if (w.op >= 0) os << " operator " << w.op + 1;
    std::snprintf(buf, sizeof buf, " residual=%.3e at", w.residual);
    os << buf;
    auto vec = [&](const char* name, const std::vector<double>& v) {
      if (v.empty()) return;
      os << ' ' << name << "=(";
      for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", v[i]);
        os << buf;
      }
      os << ')';
    };
    vec("params", w.params);
    vec("x", w.x);
    vec("theta", w.theta);
  }
  return os.str();
}

CheckReport infinitesimal_check(const StructureConstants& sc, const SEp& f,
                                int samples, double tol, unsigned long seed) {
  const int n = sc.n();
  const std::vector<std::vector<SEp>> grad = gradients({f}, n);
  const ParamMatrix coef = commutator_matrix(sc);  // (i,j): sum_k c_ij^k x_k

  Rng rng(seed);
  CheckReport rep;
  rep.tol = tol;
  bool failed = false;
  for (int s = 0; s < samples; ++s) {
    for (int t = 0; t < kTriesPerSample; ++t) {
      try {
        const DrawnPoint p = draw_point(sc, 0, rng);
        const EvalPoint pt{p.params, p.x, {}};
        se_eval(f, pt, kEvalGuard);  // domain probe: F itself must exist here
        std::vector<double> g(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
          g[static_cast<size_t>(j)] = se_eval(grad[0][static_cast<size_t>(j)], pt, kEvalGuard);
        std::vector<std::pair<int, double>> residuals;
        for (int i = 0; i < n; ++i) {
          double sum = 0, mag = 0;
          for (int j = 0; j < n; ++j) {
            const double w =
                coef[static_cast<size_t>(i)][static_cast<size_t>(j)].eval_d(p.cp) *
                g[static_cast<size_t>(j)];
            sum += w;
            mag += std::fabs(w);
          }
          residuals.emplace_back(i, std::fabs(sum) / std::max(1.0, mag));
        }
        for (const auto& [op, res] : residuals) {
          rep.max_residual = std::max(rep.max_residual, res);
          if (res > tol) {
            failed = true;
            note_witness(rep, op, p, res);
          }
        }
        ++rep.accepted;
        break;
      } catch (const DomainError&) {
        ++rep.rejected;
      }
    }
  }
  settle(rep, samples, failed, "infinitesimal check");
  return rep;
}

CheckReport finite_check(const StructureConstants& sc, const SEp& f,
                         int samples, double tol, unsigned long seed) {
  const std::vector<int> gens = acting_generators(sc);
  Rng rng(seed);
  CheckReport rep;
  rep.tol = tol;
  bool failed = false;
  for (int s = 0; s < samples; ++s) {
    for (int t = 0; t < kTriesPerSample; ++t) {
      try {
        const DrawnPoint p =
            draw_point(sc, static_cast<int>(gens.size()), rng);
        std::vector<Eigen::MatrixXd> ads;
        ads.reserve(gens.size());
        for (int i : gens) ads.push_back(ad_numeric(sc, i, p.cp));
        const EvalPoint base_pt{p.params, p.x, {}};
        const double base = se_eval(f, base_pt, kEvalGuard);
        const double scale = std::max(1.0, std::fabs(base));
        auto diff_at = [&](double time) {
          const EvalPoint moved{p.params, acted(ads, p, time), {}};
          return se_eval(f, moved, kEvalGuard) - base;
        };
        const double d1 = diff_at(1.0);
        const double res = std::fabs(d1) / scale;
        if (res > tol) {
          // Non-invariance drifts smoothly along the path; leaving the
          // branch of an arctan or logarithm chart jumps. Bisect toward
          // the interval where the mismatch concentrates to tell them
          // apart: a jump survives with its full height, drift dilutes.
          double lo = 0, hi = 1, dlo = 0, dhi = d1;
          for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = diff_at(mid);
            if (std::fabs(dm - dlo) >= std::fabs(dhi - dm)) {
              hi = mid;
              dhi = dm;
            } else {
              lo = mid;
              dlo = dm;
            }
          }
          if (std::fabs(dhi - dlo) >= 0.5 * std::fabs(d1))
            throw DomainError("branch jump along the action path");
          failed = true;
          note_witness(rep, -1, p, res);
        }
        rep.max_residual = std::max(rep.max_residual, res);
        ++rep.accepted;
        break;
      } catch (const DomainError&) {
        ++rep.rejected;
      }
    }
  }
  settle(rep, samples, failed, "finite check");
  return rep;
}

int independence_rank(const StructureConstants& sc, const std::vector<SEp>& fs,
                      int samples, unsigned long seed) {
  const int n = sc.n();
  const auto m = static_cast<Eigen::Index>(fs.size());
  if (m == 0) return 0;
  const std::vector<std::vector<SEp>> grad = gradients(fs, n);

  Rng rng(seed);
  int best = 0, accepted = 0, rejected = 0;
  for (int s = 0; s < samples; ++s) {
    for (int t = 0; t < kTriesPerSample; ++t) {
      try {
        const DrawnPoint p = draw_point(sc, 0, rng);
        const EvalPoint pt{p.params, p.x, {}};
        for (const SEp& h : fs) se_eval(h, pt, kEvalGuard);
        Eigen::MatrixXd jac(m, n);
        for (Eigen::Index l = 0; l < m; ++l)
          for (int j = 0; j < n; ++j)
            jac(l, j) = se_eval(grad[static_cast<size_t>(l)][static_cast<size_t>(j)],
                                pt, kEvalGuard);
        best = std::max(best, svd_rank(jac));
        ++accepted;
        break;
      } catch (const DomainError&) {
        ++rejected;
      }
    }
  }
  if (accepted == 0 || rejected > 9 * accepted)
    throw TooManyDomainFailures(
        "independence rank: sampling kept leaving the domain");
  return best;
}

CheckReport equivalence_check(const StructureConstants& sc,
                              const std::vector<SEp>& fs,
                              const std::vector<SEp>& gs, int samples,
                              unsigned long seed) {
  const int n = sc.n();
  const int na = n - generic_rank(sc, seed).rank;
  const std::vector<std::vector<SEp>> gf = gradients(fs, n);
  const std::vector<std::vector<SEp>> gg = gradients(gs, n);
  const auto mf = static_cast<Eigen::Index>(fs.size());
  const auto mg = static_cast<Eigen::Index>(gs.size());

  Rng rng(seed);
  CheckReport rep;
  rep.tol = 0;
  bool failed = false;
  for (int s = 0; s < samples; ++s) {
    for (int t = 0; t < kTriesPerSample; ++t) {
      try {
        const DrawnPoint p = draw_point(sc, 0, rng);
        const EvalPoint pt{p.params, p.x, {}};
        for (const SEp& h : fs) se_eval(h, pt, kEvalGuard);
        for (const SEp& h : gs) se_eval(h, pt, kEvalGuard);
        Eigen::MatrixXd ju(mf + mg, n);
        for (Eigen::Index l = 0; l < mf; ++l)
          for (int j = 0; j < n; ++j)
            ju(l, j) = se_eval(gf[static_cast<size_t>(l)][static_cast<size_t>(j)],
                               pt, kEvalGuard);
        for (Eigen::Index l = 0; l < mg; ++l)
          for (int j = 0; j < n; ++j)
            ju(mf + l, j) =
                se_eval(gg[static_cast<size_t>(l)][static_cast<size_t>(j)], pt,
                        kEvalGuard);
        // Below-rank samples are non-generic points of a claimed basis;
        // union rank above n - rank is a genuine inequivalence.
        if (svd_rank(ju.topRows(mf)) < na || svd_rank(ju.bottomRows(mg)) < na)
          throw DomainError("non-generic sample for the claimed rank");
        const int ru = svd_rank(ju);
        rep.max_residual =
            std::max(rep.max_residual, static_cast<double>(ru - na));
        if (ru != na) {
          failed = true;
          note_witness(rep, -1, p, static_cast<double>(ru - na));
        }
        ++rep.accepted;
        break;
      } catch (const DomainError&) {
        ++rep.rejected;
      }
    }
  }
  settle(rep, samples, failed, "equivalence check");
  return rep;
}

}  // namespace casimir
