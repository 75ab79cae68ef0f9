#pragma once

#include <utility>

#include "casimir/algebra.hpp"
#include "casimir/mat_exp.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

/// B(theta): the generic inner automorphism matrix, an ordered product of
/// one factor exp(-theta_k ad_{e_i}) per basis vector with nonzero adjoint
/// matrix, ascending i. `factors[k]` records which basis vector theta_k
/// belongs to.
struct FrameMatrix {
  CFMatrix b;                // n x n over r thetas, coefficient arity np + n
  std::vector<int> factors;  // size r, 0-based basis indices
};

FrameMatrix inner_automorphism_matrix(const StructureConstants& sc);

/// The fundamental lifted invariant x * B(theta), componentwise. Linear in x;
/// reduces to x at theta = 0.
struct LiftedInvariant {
  std::vector<ClosedForm> components;  // size n
  std::vector<int> factors;            // as in FrameMatrix
  int n() const { return static_cast<int>(components.size()); }
  int nthetas() const { return static_cast<int>(factors.size()); }
};

LiftedInvariant lifted_invariants(const StructureConstants& sc);
LiftedInvariant lifted_invariants(const StructureConstants& sc,
                                  const FrameMatrix& frame);

/// n x r matrix of derivatives d I_j / d theta_k.
CFMatrix theta_jacobian(const LiftedInvariant& inv);

struct EliminationResult {
  /// Substitutions theta_k -> expression in x (free parameters pinned to 0).
  std::vector<std::pair<int, SEp>> solved;
  /// Emitted theta-free components: the candidate invariants.
  std::vector<SEp> invariants;
  /// Pivot parameters whose pattern solve failed, plus parameters still
  /// occurring in leftover components.
  std::vector<int> residual_thetas;
  /// Components that still depend on theta after all substitutions.
  std::vector<SEp> residual_components;
  /// Normalization constant used per consumed component (original index).
  std::vector<std::pair<int, Rational>> constants;
  std::vector<std::string> log;
  int rank = 0;  // rho: number of pivot equations selected
  bool complete = false;
};

/// Normalization step: picks rho = generic_rank(sc) pivot equations via a
/// seeded random sample of d I / d theta, sets each pivot component to a
/// constant (1 for exponential solves, 0 for affine), solves for its theta
/// and substitutes everywhere. Rotation pairs are first replaced by the
/// derived combinations I_p^2 + I_q^2 and omega*theta + arctan(I_q/I_p).
/// Pattern failures are soft: the result carries the residual system.
/// Throws SampleDegenerate after 25 fruitless reseeds.
EliminationResult normalize_frame(const StructureConstants& sc,
                                  const LiftedInvariant& inv,
                                  unsigned long seed);

}  // namespace casimir
