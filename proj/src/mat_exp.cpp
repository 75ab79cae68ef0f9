#include "casimir/mat_exp.hpp"

#include <algorithm>
#include <functional>

namespace casimir {

namespace {

// Tarjan strongly connected components; emission order is reverse
// topological, so reversing it puts source components first, which makes the
// permuted matrix block *upper* triangular for edges i -> j at nonzero
// m[i][j].
std::vector<std::vector<int>> tarjan_sccs(
    const std::vector<std::vector<int>>& adj) {
  int n = static_cast<int>(adj.size());
  std::vector<int> index(static_cast<size_t>(n), -1),
      low(static_cast<size_t>(n), 0);
  std::vector<bool> on_stack(static_cast<size_t>(n), false);
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int counter = 0;

  std::function<void(int)> strongconnect = [&](int v) {
    index[static_cast<size_t>(v)] = low[static_cast<size_t>(v)] = counter++;
    stack.push_back(v);
    on_stack[static_cast<size_t>(v)] = true;
    for (int w : adj[static_cast<size_t>(v)]) {
      if (index[static_cast<size_t>(w)] < 0) {
        strongconnect(w);
        low[static_cast<size_t>(v)] =
            std::min(low[static_cast<size_t>(v)], low[static_cast<size_t>(w)]);
      } else if (on_stack[static_cast<size_t>(w)]) {
        low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)],
                                               index[static_cast<size_t>(w)]);
      }
    }
    if (low[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<size_t>(w)] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      sccs.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[static_cast<size_t>(v)] < 0) strongconnect(v);
  std::reverse(sccs.begin(), sccs.end());
  return sccs;
}

}  // namespace

BlockStructure block_structure(const ParamMatrix& m) {
  int n = static_cast<int>(m.size());
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !m[static_cast<size_t>(i)][static_cast<size_t>(j)].is_zero())
        adj[static_cast<size_t>(i)].push_back(j);

  BlockStructure bs;
  bs.blocks = tarjan_sccs(adj);

  std::vector<int> pos(static_cast<size_t>(n), -1);
  for (size_t b = 0; b < bs.blocks.size(); ++b) {
    const auto& blk = bs.blocks[b];
    if (blk.size() > 2) throw NotBlockTriangularizable(blk);
    if (blk.size() == 2) {
      int p = blk[0], q = blk[1];
      const RatFunc& app = m[static_cast<size_t>(p)][static_cast<size_t>(p)];
      const RatFunc& aqq = m[static_cast<size_t>(q)][static_cast<size_t>(q)];
      const RatFunc& apq = m[static_cast<size_t>(p)][static_cast<size_t>(q)];
      const RatFunc& aqp = m[static_cast<size_t>(q)][static_cast<size_t>(p)];
      if (!(app == aqq) || !(apq == RatFunc::zero(apq.nvars()) - aqp))
        throw NotBlockTriangularizable(blk);
    }
    for (int v : blk) pos[static_cast<size_t>(v)] = static_cast<int>(b);
  }
  // consistency: no entries below the block diagonal
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!m[static_cast<size_t>(i)][static_cast<size_t>(j)].is_zero() &&
          pos[static_cast<size_t>(i)] > pos[static_cast<size_t>(j)])
        throw Error("block ordering failed; matrix is not triangularizable");
  return bs;
}

CFMatrix cfm_identity(int n, int r, int arity) {
  CFMatrix x(static_cast<size_t>(n),
             std::vector<ClosedForm>(static_cast<size_t>(n),
                                     ClosedForm::zero(r, arity)));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)][static_cast<size_t>(i)] =
        ClosedForm::constant(r, RatFunc::one(arity));
  return x;
}

CFMatrix cfm_mul(const CFMatrix& a, const CFMatrix& b) {
  size_t n = a.size(), mid = b.size(), m = b[0].size();
  int r = a[0][0].nthetas(), arity = a[0][0].arity();
  CFMatrix out(n, std::vector<ClosedForm>(m, ClosedForm::zero(r, arity)));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < mid; ++k) {
      if (a[i][k].is_zero()) continue;
      for (size_t j = 0; j < m; ++j) {
        if (b[k][j].is_zero()) continue;
        out[i][j] = out[i][j] + a[i][k] * b[k][j];
      }
    }
  return out;
}

ClosedForm cf_det(const CFMatrix& m) {
  size_t n = m.size();
  int r = m[0][0].nthetas(), arity = m[0][0].arity();
  // cofactor expansion along the first column of the index subset
  std::function<ClosedForm(std::vector<size_t>, std::vector<size_t>)> det =
      [&](std::vector<size_t> rows, std::vector<size_t> cols) -> ClosedForm {
    if (rows.size() == 1) return m[rows[0]][cols[0]];
    ClosedForm acc = ClosedForm::zero(r, arity);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (m[rows[i]][cols[0]].is_zero()) continue;
      std::vector<size_t> sub_rows;
      for (size_t k = 0; k < rows.size(); ++k)
        if (k != i) sub_rows.push_back(rows[k]);
      std::vector<size_t> sub_cols(cols.begin() + 1, cols.end());
      ClosedForm minor = det(sub_rows, sub_cols) * m[rows[i]][cols[0]];
      acc = (i % 2 == 0) ? acc + minor : acc - minor;
    }
    return acc;
  };
  std::vector<size_t> all(n);
  for (size_t i = 0; i < n; ++i) all[i] = i;
  return det(all, all);
}

CFMatrix exp_theta(const ParamMatrix& m, int k, int r,
                   const NonzeroDecider& nz) {
  const int n = static_cast<int>(m.size());
  const int A = n > 0 ? m[0][0].nvars() : 0;
  BlockStructure bs = block_structure(m);
  const int nb = static_cast<int>(bs.blocks.size());

  auto zero_rates = [&]() {
    return std::vector<RatFunc>(static_cast<size_t>(r), RatFunc::zero(A));
  };
  auto zero_mono = [&]() {
    return std::vector<unsigned>(static_cast<size_t>(r), 0);
  };
  // e^{lambda theta_k} picking up an optional cos/sin(c theta_k)
  auto diag_term = [&](const RatFunc& lambda, Trig trig,
                       const RatFunc& c) -> ClosedForm {
    auto rate = zero_rates();
    rate[static_cast<size_t>(k)] = lambda;
    auto freq = zero_rates();
    freq[static_cast<size_t>(k)] = c;
    return ClosedForm::term(r, RatFunc::one(A), zero_mono(), rate, trig, freq);
  };

  // Diagonal block exponential with the given sign of theta.
  auto block_exp = [&](const std::vector<int>& blk, bool negate) -> CFMatrix {
    RatFunc sgn = negate ? RatFunc::zero(A) - RatFunc::one(A) : RatFunc::one(A);
    if (blk.size() == 1) {
      RatFunc lam = m[static_cast<size_t>(blk[0])][static_cast<size_t>(blk[0])] * sgn;
      CFMatrix e(1, std::vector<ClosedForm>(1, ClosedForm::zero(r, A)));
      e[0][0] = diag_term(lam, Trig::One, RatFunc::zero(A));
      return e;
    }
    int p = blk[0], q = blk[1];
    RatFunc a = m[static_cast<size_t>(p)][static_cast<size_t>(p)] * sgn;
    RatFunc c = m[static_cast<size_t>(q)][static_cast<size_t>(p)] * sgn;
    CFMatrix e(2, std::vector<ClosedForm>(2, ClosedForm::zero(r, A)));
    e[0][0] = diag_term(a, Trig::Cos, c);
    e[1][1] = e[0][0];
    e[1][0] = diag_term(a, Trig::Sin, c);
    e[0][1] = ClosedForm::zero(r, A) - e[1][0];
    return e;
  };

  CFMatrix X(static_cast<size_t>(n),
             std::vector<ClosedForm>(static_cast<size_t>(n),
                                     ClosedForm::zero(r, A)));
  auto put = [&](const std::vector<int>& rows, const std::vector<int>& cols,
                 const CFMatrix& v) {
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j)
        X[static_cast<size_t>(rows[i])][static_cast<size_t>(cols[j])] = v[i][j];
  };
  auto get = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    CFMatrix v(rows.size(),
               std::vector<ClosedForm>(cols.size(), ClosedForm::zero(r, A)));
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j)
        v[i][j] = X[static_cast<size_t>(rows[i])][static_cast<size_t>(cols[j])];
    return v;
  };

  for (int J = 0; J < nb; ++J) {
    const auto& colblk = bs.blocks[static_cast<size_t>(J)];
    put(colblk, colblk, block_exp(colblk, false));

    for (int I = J - 1; I >= 0; --I) {
      const auto& rowblk = bs.blocks[static_cast<size_t>(I)];
      // F = sum over intermediate blocks K in (I, J] of m[I,K] X[K,J]
      CFMatrix F(rowblk.size(), std::vector<ClosedForm>(
                                    colblk.size(), ClosedForm::zero(r, A)));
      bool any = false;
      for (int K = I + 1; K <= J; ++K) {
        const auto& midblk = bs.blocks[static_cast<size_t>(K)];
        for (size_t i = 0; i < rowblk.size(); ++i)
          for (size_t t = 0; t < midblk.size(); ++t) {
            const RatFunc& mik =
                m[static_cast<size_t>(rowblk[i])][static_cast<size_t>(midblk[t])];
            if (mik.is_zero()) continue;
            for (size_t j = 0; j < colblk.size(); ++j) {
              const ClosedForm& xkj =
                  X[static_cast<size_t>(midblk[t])][static_cast<size_t>(colblk[j])];
              if (xkj.is_zero()) continue;
              F[i][j] = F[i][j] + xkj.scaled(mik);
              any = true;
            }
          }
      }
      if (!any) continue;
      // variation of parameters: X[I,J] = E_I(theta) int_0^theta E_I(-s) F(s) ds
      CFMatrix G = cfm_mul(block_exp(rowblk, true), F);
      for (auto& row : G)
        for (auto& entry : row) entry = entry.integrate_from_zero(k, nz);
      put(rowblk, colblk, cfm_mul(block_exp(rowblk, false), G));
    }
  }
  return X;
}

Eigen::MatrixXd exp_numeric(const Eigen::MatrixXd& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled /= 2;
    ++squarings;
  }
  Eigen::MatrixXd b = m / std::pow(2.0, squarings);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd term = result;
  for (int i = 1; i <= 40; ++i) {
    term = term * b / static_cast<double>(i);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * result.cwiseAbs().maxCoeff())
      break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace casimir
