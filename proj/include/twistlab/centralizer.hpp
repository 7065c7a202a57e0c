#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistlab/sparse_vec.hpp"
#include "twistlab/tsirelson.hpp"

namespace twistlab::centralizer {

/// Lipschitz function descriptor with phi(0) = 0, restricted to a closed set
/// of safe primitives plus tabulated interpolants. Arbitrary callables are
/// deliberately not accepted; a non-Lipschitz phi silently breaks every
/// centralizer bound downstream.
struct PhiSpec {
  enum class Kind { Identity, Clip, Power, Table };
  Kind kind = Kind::Identity;
  double param = 0.0;
  std::vector<std::pair<double, double>> table;  // increasing t, with (0,0) implied

  double operator()(double t) const;
  std::string name() const;

  static PhiSpec identity();
  static PhiSpec clip(double c);
  static PhiSpec power(double alpha);  // t -> t^alpha, 0 < alpha <= 1
  static PhiSpec tabulated(std::vector<std::pair<double, double>> pts);
};

/// Kalton-Peck map: Omega(y)_j = y_j * phi(log(||y||_2 / |y_j|)), with
/// 0 * phi(log inf) taken as 0.
DVec kalton_peck_omega(const DVec& y, const PhiSpec& phi);

/// Explicit centralizer of the (T^p, (T^p)*) couple:
/// Omega(x) = (2/q - 2/p) x log(|x| / ||x||_2), extended by homogeneity;
/// identically zero at p = 2. Requires 1/p + 1/q = 1.
DVec omega_tp_explicit(const DVec& x, double p);

// ---------------------------------------------------------------------------
// Norm oracles
// ---------------------------------------------------------------------------

struct NormEval {
  double value = 0.0;
  DVec functional;     // dual-ball element with <functional, x> = value
  double upper = 0.0;  // certified upper bound of the norm; value when exact

  double certifiedUpper() const { return upper > 0.0 ? upper : value; }
};

/// 1-unconditional lattice norm with a norming-functional (subgradient)
/// oracle; what the factorization solver descends on. Stateful oracles (warm
/// starts) expose resetState so a solve always starts from the same state;
/// evaluations stay deterministic that way.
struct NormOracle {
  std::string name;
  std::function<NormEval(const DVec&)> eval;
  std::function<void()> resetState;
  double operator()(const DVec& x) const { return eval(x).value; }
  void reset() const {
    if (resetState) resetState();
  }
};

namespace oracles {
NormOracle l1();
NormOracle l2();
NormOracle linf();
NormOracle tsirelsonT(std::shared_ptr<tsirelson::Engine> engine);
NormOracle tsirelsonT2(std::shared_ptr<tsirelson::Engine> engine);
/// (T^2)* via the Frank-Wolfe dual; keeps a warm-started weight vector, so a
/// single oracle instance is cheap along a solver trajectory but not
/// shareable across threads. The per-call budget trades speed for sharpness:
/// the warm weights keep improving across calls either way, and the `upper`
/// field stays a certificate at any budget.
NormOracle tsirelsonT2Dual(std::shared_ptr<tsirelson::Engine> engine, double tol = 1e-5,
                           int maxIter = 120);
}  // namespace oracles

// ---------------------------------------------------------------------------
// Lozanovskii factorization
// ---------------------------------------------------------------------------

struct FactorizationParams {
  int maxIters = 100000;
  double improveTol = 1e-10;  // stop when best objective improves less ...
  int improveWindow = 100;    // ... than improveTol over this many iterations
  int fixedIters = 0;         // > 0: run exactly this many steps (deterministic profile)
  std::optional<DVec> initW0;
};

struct FactorizationResult {
  DVec w0;  // nonnegative, supp w0 = supp x
  DVec w1;  // w1_j = x_j^2 / w0_j, so sqrt(w0 w1) = |x| holds exactly
  double objective = 0.0;  // max(||w0||_{X0}, ||w1||_{X1}) after balancing
  double kktResidual = 0.0;
  int iterations = 0;
};

class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, FactorizationResult best)
      : std::runtime_error(what), best(std::move(best)) {}
  FactorizationResult best;
};

/// Minimizes max(||w0||_{X0}, ||x^2/w0||_{X1}) over w0 > 0 on supp x by
/// subgradient descent in u = log w0 (the objective is convex there), with a
/// final exact rebalancing of the two norms. Initial iterates double as
/// candidate selections: the returned objective never exceeds the best
/// iterate seen, including the starting point.
FactorizationResult lozanovskii_factorize(const DVec& x, const NormOracle& norm0,
                                          const NormOracle& norm1,
                                          const FactorizationParams& params = {});

/// Omega = derivative at 1/2 of the analytic selection z -> sgn(x) w0^{1-z} w1^z:
/// coordinatewise x_j log(w1_j / w0_j). Support-preserving by construction.
DVec omega_from_factorization(const DVec& x, const FactorizationResult& fr);

// ---------------------------------------------------------------------------
// Centralizer specifications
// ---------------------------------------------------------------------------

class CentralizerSpec {
 public:
  enum class Kind { Zero, KaltonPeck, TpExplicit, Factorization };

  static CentralizerSpec zero();
  static CentralizerSpec kaltonPeck(PhiSpec phi);
  static CentralizerSpec tpExplicit(double p);
  /// Factorization-backed Omega for the couple (norm0, norm1). The solver
  /// runs a fixed, deterministic number of steps per evaluation; every
  /// evaluation certifies its own selection bound rho = objective / ||x||_2
  /// and the running maximum is available from observedRho().
  static CentralizerSpec factorization(NormOracle norm0, NormOracle norm1, int solverIters = 220);

  CentralizerSpec negated() const;

  Kind kind() const { return kind_; }
  bool negatedFlag() const { return negated_; }
  bool supportPreserving() const { return true; }  // all implemented kinds are
  bool homogeneous() const { return true; }
  const std::string& name() const { return name_; }
  double tpParam() const { return p_; }
  const PhiSpec& phi() const { return phi_; }

  /// Evaluates Omega(y). Exactly homogeneous and sign-equivariant for every
  /// kind: factorization evaluations normalize to |y| / ||y||_2 first.
  DVec apply(const DVec& y) const;

  double observedRho() const;
  void resetObservedRho() const;

 private:
  CentralizerSpec() = default;

  Kind kind_ = Kind::Zero;
  bool negated_ = false;
  std::string name_ = "zero";
  PhiSpec phi_;
  double p_ = 2.0;
  NormOracle norm0_, norm1_;
  int solverIters_ = 220;
  std::shared_ptr<double> rho_ = std::make_shared<double>(0.0);
};

// ---------------------------------------------------------------------------
// Delta estimation
// ---------------------------------------------------------------------------

struct DeltaEstimate {
  double delta = 0.0;  // empirical lower bound of Delta(Omega)
  double rho = 0.0;    // max certified selection bound seen (factorization kind)
  int samples = 0;
};

/// max over sampled (a, x) of ||Omega(ax) - a Omega(x)||_2 / (||a||_inf ||x||_2).
/// Sampling cycles random sign patterns, random {0,1} cut-offs and uniform
/// a in [-1,1]^dim; x is i.i.d. Gaussian. Per-sample derived seeds make the
/// stream independent of batching, so the estimate is monotone in `samples`
/// and reproducible under `seed`.
DeltaEstimate estimate_delta(const CentralizerSpec& omega, int dim, int samples,
                             std::uint64_t seed);

}  // namespace twistlab::centralizer
