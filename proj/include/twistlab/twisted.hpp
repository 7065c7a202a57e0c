#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "twistlab/centralizer.hpp"
#include "twistlab/sparse_vec.hpp"

namespace twistlab::twisted {

/// Element (x, y) of a derived space, expanded along the canonical basis
/// v_{2j-1} = (e_j, 0), v_{2j} = (0, e_j).
struct TwistedVector {
  DVec x;
  DVec y;

  static TwistedVector basis(int vIndex);

  bool empty() const { return x.empty() && y.empty(); }
  /// Support bounds in v-indices; 0 when empty.
  int minVIndex() const;
  int maxVIndex() const;

  TwistedVector& operator+=(const TwistedVector& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  TwistedVector& operator-=(const TwistedVector& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  TwistedVector& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend TwistedVector operator+(TwistedVector a, const TwistedVector& b) { return a += b; }
  friend TwistedVector operator-(TwistedVector a, const TwistedVector& b) { return a -= b; }
  friend TwistedVector operator*(double s, TwistedVector a) { return a *= s; }
};

/// Finite section [v_1 .. v_N] together with the centralizer norming it.
struct SectionSpec {
  int N = 1;
  centralizer::CentralizerSpec omega;

  void validate() const {
    if (N < 1) throw std::invalid_argument("SectionSpec: need at least one basis vector");
  }
  bool contains(const TwistedVector& v) const { return v.maxVIndex() <= N; }
};

/// Coordinate embedding into the section [v_1..v_N]; throws when the vector
/// sticks out of the section.
Eigen::VectorXd toCoords(const TwistedVector& v, int sectionN);
TwistedVector fromCoords(const Eigen::VectorXd& coords);

/// ||(x, y)|| = ||x - Omega(y)||_2 + ||y||_2.
double quasi_norm(const TwistedVector& v, const centralizer::CentralizerSpec& omega);

/// <I(x,y), (u,v)> = <x, v> + <y, u>.
double duality_pairing(const TwistedVector& v, const TwistedVector& w);

struct UpperCheckReport {
  double maxRatio = 0.0;  // max |pairing| / (||v||_Omega * ||w||_{-Omega})
  double bound = 0.0;     // 8 * deltaHat * (1 + slack)
  double deltaHat = 0.0;
  double slack = 0.0;
  int violations = 0;  // nonzero signals deltaHat underestimated, not a broken bound
  int samples = 0;
};

/// Samples pairs and checks |pairing(v,w)| <= 8 deltaHat ||v||_Omega
/// ||w||_{-Omega} (1 + slack). The witness side is measured in the -Omega
/// quasi-norm, matching the dual space the pairing maps into.
UpperCheckReport duality_upper_check(const centralizer::CentralizerSpec& omega, int dim,
                                     int samples, double deltaHat, double slack,
                                     std::uint64_t seed);

struct WitnessResult {
  TwistedVector w;
  double lower = 0.0;          // pairing(v, w)
  double quasiNormV = 0.0;     // quasi_norm(v) under Omega
  double wNormNegOmega = 0.0;  // quasi_norm(w) under -Omega; 8 deltaHat + 2 by construction
  bool certified = false;      // lower >= quasiNormV - 1e-9, re-verified numerically
};

/// The explicit lower-bound witness: pick the unit vector aligned with
/// x - Omega(y), set w = (-Omega(unit) + (8 deltaHat + 1) y / ||y||_2, unit).
/// Requires v.y != 0 (the construction divides by ||y||).
WitnessResult duality_witness(const TwistedVector& v, const centralizer::CentralizerSpec& omega,
                              double deltaHat);

struct FmResult {
  int headCount = 0;  // head section v_1..v_headCount (kept to whole pairs)
  std::vector<TwistedVector> e2Basis;
  std::vector<TwistedVector> fmBasis;
  int dimE = 0;
  int dimF = 0;
  double logmN = 0.0;  // m-fold iterated natural log of dimE
  bool johnRegime = false;
};

/// F_m = [v_1 .. v_h] + (E intersect tail), h = [log_m n] rounded down to an
/// even head so whole v-pairs are kept. Below the threshold where
/// [log_m n] >= 2 the construction returns F_m = E (the John regime, where
/// the trivial bound d(E, E*) <= dim E is already uniform). Guarantees
/// dim F_m <= n + log_m(n).
FmResult build_F_m(const std::vector<TwistedVector>& eBasis, int m);

}  // namespace twistlab::twisted
