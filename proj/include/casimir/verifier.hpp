#pragma once

#include <string>
#include <vector>

#include "casimir/algebra.hpp"
#include "casimir/scalar_expr.hpp"

namespace casimir {

enum class Verdict { Pass, Fail, DomainLimited };

struct SampleWitness {
  int op;  // 0-based generator index for the infinitesimal system, -1 otherwise
  std::vector<double> params, x, theta;
  double residual;
};

/// Aggregated result of a sampled check. `accepted` counts samples that
/// entered the comparison; `rejected` counts draws discarded for domain
/// reasons (singular denominators, branch crossings, non-generic points).
/// Fail wins over DomainLimited; DomainLimited means fewer than the
/// requested samples could be placed but none of the placed ones failed.
struct CheckReport {
  Verdict verdict = Verdict::Pass;
  double max_residual = 0.0;
  double tol = 0.0;
  int accepted = 0;
  int rejected = 0;
  std::vector<SampleWitness> witnesses;

  bool passed() const { return verdict == Verdict::Pass; }
  /// Canonical rendering; bit-identical across runs with the same seed.
  std::string text() const;
};

/// Does F solve the defining linear system: for every generator e_i,
/// sum_{j,k} c_ij^k x_k dF/dx_j = 0 at `samples` random points? Residuals
/// are normalized by the magnitude sum of the contributing terms. Throws
/// TooManyDomainFailures when over 90% of the draws leave F's domain.
CheckReport infinitesimal_check(const StructureConstants& sc, const SEp& f,
                                int samples = 20, double tol = 1e-9,
                                unsigned long seed = 1);

/// Is F constant along the inner-automorphism action x -> x B(theta), with
/// B(theta) evaluated by numeric matrix exponentials, independently of the
/// closed-form pipeline? A jump discontinuity along the path (the action
/// leaving the branch of an arctan or logarithm chart) is a domain
/// rejection, not a failure; smooth drift is a failure.
CheckReport finite_check(const StructureConstants& sc, const SEp& f,
                         int samples = 20, double tol = 1e-8,
                         unsigned long seed = 1);

/// Maximal numeric rank over the samples of the Jacobian [dF_l/dx_j]
/// (singular values above 1e-8 times the largest one).
int independence_rank(const StructureConstants& sc, const std::vector<SEp>& fs,
                      int samples = 20, unsigned long seed = 1);

/// Do the two sets generate each other functionally? Pass iff at every
/// accepted sample rank(fs) = rank(gs) = rank(fs u gs) = n - generic rank.
/// Samples where either set falls below that rank are non-generic and
/// rejected; a union rank above it is a failure with witness.
CheckReport equivalence_check(const StructureConstants& sc,
                              const std::vector<SEp>& fs,
                              const std::vector<SEp>& gs, int samples = 20,
                              unsigned long seed = 1);

}  // namespace casimir
