#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace casimir {

/// Exact rational scalar used throughout the symbolic layer.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Renders "p" or "p/q" in lowest terms.
std::string rat_str(const Rational& q);

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input text could not be parsed; carries a 1-based position.
struct ParseError : Error {
  int line, col;
  ParseError(const std::string& msg, int line_ = 0, int col_ = 0)
      : Error(msg), line(line_), col(col_) {}
};

/// Structure constants violate the Jacobi identity.
struct JacobiViolation : Error {
  int i, j, k, l;  // offending triple and output coordinate, 1-based
  std::string residual;
  JacobiViolation(int i_, int j_, int k_, int l_, const std::string& res)
      : Error("Jacobi identity fails on (e" + std::to_string(i_) + ",e" + std::to_string(j_) +
              ",e" + std::to_string(k_) + ") coordinate e" + std::to_string(l_) +
              ": residual " + res),
        i(i_), j(j_), k(k_), l(l_), residual(res) {}
};

/// The center's dimension depends on parameter values not pinned by assumptions.
struct ParametricCenter : Error {
  std::string splitting;
  explicit ParametricCenter(const std::string& poly)
      : Error("center dimension splits on parameter condition: " + poly), splitting(poly) {}
};

/// A closed-form step needs to know whether a parameter polynomial vanishes
/// and the declared assumptions do not decide it.
struct UndecidableCaseSplit : Error {
  std::string splitting;
  explicit UndecidableCaseSplit(const std::string& poly)
      : Error("case split on undecided parameter condition: " + poly), splitting(poly) {}
};

/// The adjoint matrix cannot be permuted to block-triangular form with
/// 1x1 / rotation-form 2x2 diagonal blocks.
struct NotBlockTriangularizable : Error {
  std::vector<int> component;  // offending index set, 0-based
  explicit NotBlockTriangularizable(std::vector<int> comp)
      : Error("no block-triangular form with 1x1/2x2 rotation blocks"), component(std::move(comp)) {}
};

/// Numeric evaluation left the real domain (log of a non-positive value,
/// fractional power of a negative base, division by zero).
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Sampling kept leaving the domain; the expression is unusable numerically.
struct TooManyDomainFailures : Error {
  explicit TooManyDomainFailures(const std::string& msg) : Error(msg) {}
};

/// Every reseeded sample left the elimination Jacobian rank-deficient or
/// outside the domain; surfaced only after the retry budget is spent.
struct SampleDegenerate : Error {
  int attempts;
  explicit SampleDegenerate(int attempts_)
      : Error("elimination sample degenerate after " + std::to_string(attempts_) + " reseeds"),
        attempts(attempts_) {}
};

/// A normalized component does not match any solving pattern for its pivot
/// parameter. Soft failure: the caller records the residual and moves on.
struct PatternNotSolvable : Error {
  int theta, component;  // 0-based pivot parameter and component index
  PatternNotSolvable(int theta_, int component_)
      : Error("component " + std::to_string(component_ + 1) +
              " is neither affine nor pure-exponential in parameter " +
              std::to_string(theta_ + 1)),
        theta(theta_), component(component_) {}
};

/// Deterministic RNG for every randomized routine; seeds are always explicit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform integer in [lo, hi].
  long uniform(long lo, long hi) {
    std::uniform_int_distribution<long> d(lo, hi);
    return d(gen_);
  }

  /// Random rational in [-2, 2] with denominator at most `max_den`.
  Rational rational(long max_den = 97) {
    long den = uniform(1, max_den);
    long num = uniform(-2 * den, 2 * den);
    return rat(num, den);
  }

  /// Random nonzero rational in [-2, 2] bounded away from zero.
  Rational nonzero_rational(long max_den = 97) {
    for (;;) {
      Rational q = rational(max_den);
      if (sgn(q) != 0 && abs(q) > Rational(1, 1000)) return q;
    }
  }

  /// Random rational in (0, 2].
  Rational positive_rational(long max_den = 97) {
    long den = uniform(1, max_den);
    long num = uniform(1, 2 * den);
    return rat(num, den);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace casimir
