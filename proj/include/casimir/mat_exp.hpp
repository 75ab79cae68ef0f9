#pragma once

#include <Eigen/Dense>
#include <vector>

#include "casimir/algebra.hpp"
#include "casimir/closed_form.hpp"

namespace casimir {

/// Ordered partition of indices into diagonal blocks of size 1 or 2 such
/// that the permuted matrix is block upper triangular. Size-2 blocks are in
/// rotation form [[a, -c], [c, a]].
struct BlockStructure {
  std::vector<std::vector<int>> blocks;  // original indices, block order
};

/// Computes the block structure from the sparsity pattern (strongly
/// connected components of the nonzero digraph, topologically ordered).
/// Throws NotBlockTriangularizable when a component has more than two
/// members or a 2x2 diagonal block is not of rotation form.
BlockStructure block_structure(const ParamMatrix& m);

using CFMatrix = std::vector<std::vector<ClosedForm>>;

/// X(theta_k) = exp(theta_k m) with entries as closed forms over r theta
/// variables. Diagonal blocks exponentiate directly; entries above them come
/// from variation of parameters, which needs the decider for divisions by
/// eigenvalue differences.
CFMatrix exp_theta(const ParamMatrix& m, int k, int r,
                   const NonzeroDecider& nz);

CFMatrix cfm_identity(int n, int r, int arity);
CFMatrix cfm_mul(const CFMatrix& a, const CFMatrix& b);
ClosedForm cf_det(const CFMatrix& m);

/// Numerically stable matrix exponential (scaling and squaring with a
/// Taylor core); relative accuracy ~1e-13 for norms up to ~50.
Eigen::MatrixXd exp_numeric(const Eigen::MatrixXd& m);

}  // namespace casimir
