#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistlab/sparse_vec.hpp"

namespace twistlab::tsirelson {

/// A finite set A is admissible when |A| <= min A. Throws on the empty set,
/// which has no admissibility status.
bool is_admissible(const std::set<int>& a);

/// Element of the norming set of T: either a signed unit functional or half
/// the sum of norming functionals with successive supports E_1 < ... < E_k,
/// k <= min supp of the first child.
struct NormingFunctional {
  struct Node {
    int index = 0;  // leaf coordinate; 0 for half-sum nodes
    int sign = 1;
    std::vector<Node> children;
    bool leaf() const { return children.empty(); }
  };

  Node root;
  QVec coefficients;  // derived flat coefficient vector

  /// Recursive evaluation straight from the definition; equals the dot
  /// product with `coefficients` (tested as an invariant).
  double eval(const DVec& x) const;
  Rational evalExact(const QVec& x) const;
};

struct DualCertificate {
  double value = 0.0;     // reported norm (upper end of the certified bracket)
  double residual = 0.0;  // bracket width: value - best feasible witness value
  int iterations = 0;
};

class DualSolverError : public std::runtime_error {
 public:
  DualSolverError(const std::string& what, DVec iterate, double residual)
      : std::runtime_error(what), lastIterate(std::move(iterate)), residual(residual) {}
  DVec lastIterate;
  double residual;
};

/// Exact and certified computation of the Tsirelson norm, its
/// p-convexifications and their duals on finitely supported vectors.
///
/// The norm is the unique fixed point of
///   ||x|| = max( ||x||_inf, 1/2 sup sum_i ||E_i x|| )
/// over admissible interval families E_1 < ... < E_k, k <= min E_1. Interval
/// hulls suffice: the norm is 1-unconditional and lattice monotone, so
/// replacing successive sets by their hulls cannot decrease block norms and
/// keeps the family admissible. Evaluating intervals by increasing length
/// resolves the implicit equation bottom-up without iteration (a partition of
/// [a,b] other than the degenerate one-piece partition only references
/// strictly shorter intervals, and the degenerate piece never attains the
/// maximum).
class Engine {
 public:
  static constexpr int kDefaultCap = 8;

  explicit Engine(int normingSetCap = kDefaultCap) : cap_(normingSetCap) {}

  int cap() const { return cap_; }

  // --- primal norms ------------------------------------------------------
  Rational normT(const QVec& x) const;
  double normT(const DVec& x) const;
  /// Also extracts a norming functional f with <f,x> = ||x||_T.
  double normT(const DVec& x, DVec& functional) const;

  /// ||x||_{T^p} = ||(|x|^p)||_T^{1/p}, p >= 1.
  double normTp(const DVec& x, double p) const;
  /// Exact mode for p = 2: squared coordinates stay rational, one square
  /// root at the very end.
  Rational normT2Squared(const QVec& x) const;
  double normT2(const QVec& x) const;

  // --- norming set --------------------------------------------------------
  /// Complete norming set on coordinates 1..n: signed unit functionals plus
  /// the closure under the half-sum rule (k >= 2), deduplicated by
  /// coefficient vector. Guarantees norm_T(x) = max_f <f,x> for x supported
  /// on 1..n.
  std::vector<NormingFunctional> enumerateNormingSet(int n) const;

  // --- dual norms ---------------------------------------------------------
  /// min sum |lambda_i| over representations y = sum lambda_i f_i, solved as
  /// a linear program over the T-ball (cutting planes with the DP as
  /// separation oracle); equals sup <y,x>/||x||_T.
  double dualNormT(const DVec& y) const;
  double dualNormT(const DVec& y, DVec& maximizer) const;

  /// ||y||_{(T^p)*}: concave maximization of sum |y_j| t_j^{1/p} over the
  /// polyhedral positive T-ball, certified by the bracket residual.
  DualCertificate dualNormTp(const DVec& y, double p) const;
  DualCertificate dualNormTp(const DVec& y, double p, double tol, int maxIter,
                             bool throwOnFail) const;

  /// Scalable p = 2 path used by the norm oracles; `warmWeights` carries the
  /// active dual weight vector across calls, `maximizer` receives x* with
  /// <x*, y> = value and ||x*||_{T^2} <= 1 (up to the residual).
  DualCertificate dualNormT2(const DVec& y, double tol, int maxIter, DVec* warmWeights,
                             DVec* maximizer) const;

 private:
  /// Frank-Wolfe on the conjugate form min_{g in conv(F+)} (sum |y|^q g^{1-q})^{1/q},
  /// q = p/(p-1); the linear minimization oracle is one DP call.
  DualCertificate dualNormFw(const DVec& y, double p, double tol, int maxIter, DVec* warmWeights,
                             DVec* maximizer) const;
  DualCertificate dualNormKelley(const DVec& y, double p, double tol, int maxIter) const;
  void checkCap(int dim, const char* op) const;
  int cap_;
};

}  // namespace twistlab::tsirelson
