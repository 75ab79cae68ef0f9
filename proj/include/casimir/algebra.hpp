#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "casimir/closed_form.hpp"
#include "casimir/poly.hpp"

namespace casimir {

enum class AssumeKind { Nonzero, Zero, Positive };

struct Assumption {
  Poly poly;  // over the full variable layout; uses parameter slots only
  AssumeKind kind;
};

/// Declared parameter conditions. Variable layout everywhere in this module:
/// parameters at [0, nparams), coordinates x at [nparams, nparams + n).
class AssumptionSet {
 public:
  AssumptionSet(int nparams, int arity);

  void add(Poly p, AssumeKind k);
  int nparams() const { return nparams_; }
  int arity() const { return arity_; }
  const std::vector<Assumption>& items() const { return items_; }

  /// Is p identically nonzero as a real function of the parameters, given
  /// the assumptions? Decision procedure: nonzero constants; unit-normal
  /// match with an assumed-nonzero polynomial; same-sign even-power
  /// polynomials with a constant term; and peeling assumed-nonzero factors.
  /// Returning false means "could not decide".
  bool decides_nonzero(const Poly& p) const;
  bool decides_nonzero(const RatFunc& f) const;
  NonzeroDecider decider() const;

  /// Rational parameter values satisfying every assumption, bounded away
  /// from the excluded sets. Throws TooManyDomainFailures when max_tries
  /// random draws all fail.
  std::vector<Rational> sample_params(Rng& rng, int max_tries = 200) const;

 private:
  int nparams_, arity_;
  std::vector<Assumption> items_;
};

/// A finite-dimensional real Lie algebra given by structure constants
/// c_ij^k, rational functions of the declared parameters.
class StructureConstants {
 public:
  StructureConstants(std::string id, int n,
                     std::vector<std::string> param_names = {});

  const std::string& id() const { return id_; }
  int n() const { return n_; }
  int nparams() const { return static_cast<int>(param_names_.size()); }
  int arity() const { return nparams() + n_; }
  const std::vector<std::string>& param_names() const { return param_names_; }

  AssumptionSet& assumptions() { return assumptions_; }
  const AssumptionSet& assumptions() const { return assumptions_; }

  /// [e_i, e_j] = sum_k coeffs[k] e_k for 0-based i < j.
  void set_bracket(int i, int j, std::vector<RatFunc> coeffs);
  /// Structure constant c_ij^k with full antisymmetry, arity()-variable.
  RatFunc c(int i, int j, int k) const;
  const std::map<std::pair<int, int>, std::vector<RatFunc>>& brackets() const {
    return brackets_;
  }

  /// Pin one parameter to a rational value in every bracket coefficient and
  /// assumption polynomial (used by `assume <linear> = 0` declarations).
  void substitute_param(int param, const Rational& value);

  /// Checks the Jacobi identity exactly; throws JacobiViolation.
  void validate() const;

 private:
  std::string id_;
  int n_;
  std::vector<std::string> param_names_;
  AssumptionSet assumptions_;
  std::map<std::pair<int, int>, std::vector<RatFunc>> brackets_;
};

using ParamMatrix = std::vector<std::vector<RatFunc>>;

/// Matrix of the adjoint action of e_i: column j holds the coordinates of
/// [e_i, e_j], i.e. entry (k, j) is c_ij^k.
ParamMatrix ad_matrix(const StructureConstants& sc, int i);
bool is_zero_matrix(const ParamMatrix& m);

/// Antisymmetric commutator matrix C(x) with entry (i, j) = sum_k c_ij^k x_k.
ParamMatrix commutator_matrix(const StructureConstants& sc);

/// Exact basis of the center. Throws ParametricCenter when the dimension
/// depends on an undecided parameter condition.
std::vector<std::vector<RatFunc>> center_basis(const StructureConstants& sc);

struct RankResult {
  int rank = -1;
  std::vector<Rational> params, x;  // witness sample attaining the rank
  int trials = 0;
  unsigned long seed = 0;
};

/// Generic rank of the commutator matrix by exact evaluation at random
/// rational points (maximum over trials, assumption-consistent parameters).
RankResult generic_rank(const StructureConstants& sc, unsigned long seed,
                        int trials = 5);

/// Rank over the rational function field (any syntactically nonzero pivot).
int symbolic_rank(ParamMatrix m);
int rational_rank(std::vector<std::vector<Rational>> m);

/// Evaluate a parametric matrix at exact parameter/coordinate values.
std::vector<std::vector<Rational>> eval_matrix(
    const ParamMatrix& m, const std::vector<Rational>& point);

}  // namespace casimir
