#include "twistlab/twisted.hpp"

#include <cmath>

#include "twistlab/rng.hpp"
#include "twistlab/subspace.hpp"

namespace twistlab::twisted {

TwistedVector TwistedVector::basis(int vIndex) {
  if (vIndex < 1) throw std::invalid_argument("TwistedVector::basis: v-indices are 1-based");
  TwistedVector v;
  if (vIndex % 2 == 1) {
    v.x.set((vIndex + 1) / 2, 1.0);
  } else {
    v.y.set(vIndex / 2, 1.0);
  }
  return v;
}

int TwistedVector::minVIndex() const {
  int mn = 0;
  if (!x.empty()) mn = 2 * x.minIndex() - 1;
  if (!y.empty()) {
    int my = 2 * y.minIndex();
    mn = mn == 0 ? my : std::min(mn, my);
  }
  return mn;
}

int TwistedVector::maxVIndex() const {
  int mx = 0;
  if (!x.empty()) mx = 2 * x.maxIndex() - 1;
  if (!y.empty()) mx = std::max(mx, 2 * y.maxIndex());
  return mx;
}

Eigen::VectorXd toCoords(const TwistedVector& v, int sectionN) {
  if (v.maxVIndex() > sectionN) {
    throw std::invalid_argument("toCoords: vector is not inside the section [v_1..v_" +
                                std::to_string(sectionN) + "]");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sectionN);
  for (const auto& [j, val] : v.x.entries()) out(2 * j - 2) = val;
  for (const auto& [j, val] : v.y.entries()) out(2 * j - 1) = val;
  return out;
}

TwistedVector fromCoords(const Eigen::VectorXd& coords) {
  TwistedVector v;
  for (int k = 0; k < coords.size(); ++k) {
    if (coords(k) == 0.0) continue;
    const int vIndex = k + 1;
    if (vIndex % 2 == 1) {
      v.x.set((vIndex + 1) / 2, coords(k));
    } else {
      v.y.set(vIndex / 2, coords(k));
    }
  }
  return v;
}

double quasi_norm(const TwistedVector& v, const centralizer::CentralizerSpec& omega) {
  return l2Norm(v.x - omega.apply(v.y)) + l2Norm(v.y);
}

double duality_pairing(const TwistedVector& v, const TwistedVector& w) {
  return dot(v.x, w.y) + dot(v.y, w.x);
}

UpperCheckReport duality_upper_check(const centralizer::CentralizerSpec& omega, int dim,
                                     int samples, double deltaHat, double slack,
                                     std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("duality_upper_check: samples must be >= 1");
  UpperCheckReport rep;
  rep.samples = samples;
  rep.deltaHat = deltaHat;
  rep.slack = slack;
  rep.bound = 8.0 * deltaHat * (1.0 + slack);
  const auto neg = omega.negated();
  for (int i = 0; i < samples; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    TwistedVector v, w;
    for (int j = 1; j <= dim; ++j) {
      v.x.set(j, rng.gaussian());
      v.y.set(j, rng.gaussian());
      w.x.set(j, rng.gaussian());
      w.y.set(j, rng.gaussian());
    }
    const double den = quasi_norm(v, omega) * quasi_norm(w, neg);
    if (den <= 0.0) continue;
    const double ratio = std::abs(duality_pairing(v, w)) / den;
    rep.maxRatio = std::max(rep.maxRatio, ratio);
    if (ratio > rep.bound) ++rep.violations;
  }
  return rep;
}

WitnessResult duality_witness(const TwistedVector& v, const centralizer::CentralizerSpec& omega,
                              double deltaHat) {
  if (v.y.empty()) {
    throw std::invalid_argument("duality_witness: witness construction needs y != 0");
  }
  WitnessResult res;
  const DVec omegaY = omega.apply(v.y);
  const DVec z = v.x - omegaY;
  const double zn = l2Norm(z);

  DVec unit;  // aligned with x - Omega(y); any unit vector when z = 0
  if (zn > 0.0) {
    unit = z;
    unit *= 1.0 / zn;
  } else {
    unit.set(v.y.minIndex(), 1.0);
  }

  const double yn = l2Norm(v.y);
  DVec u = omega.apply(unit);
  u *= -1.0;
  DVec scaledY = v.y;
  scaledY *= (8.0 * deltaHat + 1.0) / yn;
  u += scaledY;

  res.w.x = u;
  res.w.y = unit;
  res.lower = duality_pairing(v, res.w);
  res.quasiNormV = quasi_norm(v, omega);
  res.wNormNegOmega = quasi_norm(res.w, omega.negated());
  res.certified = res.lower >= res.quasiNormV - 1e-9;
  return res;
}

namespace {

double iteratedLog(double n, int m) {
  double v = n;
  for (int i = 0; i < m; ++i) {
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
    v = std::log(v);
  }
  return v;
}

}  // namespace

FmResult build_F_m(const std::vector<TwistedVector>& eBasis, int m) {
  if (eBasis.empty()) throw std::invalid_argument("build_F_m: empty basis");
  if (m < 1) throw std::invalid_argument("build_F_m: m must be >= 1");

  int ambient = 0;
  for (const auto& v : eBasis) ambient = std::max(ambient, v.maxVIndex());
  Eigen::MatrixXd cols(ambient, static_cast<int>(eBasis.size()));
  for (int c = 0; c < static_cast<int>(eBasis.size()); ++c) {
    cols.col(c) = toCoords(eBasis[c], ambient);
  }
  const Eigen::MatrixXd basis = linalg::orthonormalColumns(cols);
  const int n = static_cast<int>(basis.cols());
  if (n == 0) throw std::invalid_argument("build_F_m: basis spans the zero subspace");

  FmResult res;
  res.dimE = n;
  res.logmN = iteratedLog(static_cast<double>(n), m);
  const int level = res.logmN > 0 ? static_cast<int>(std::floor(res.logmN)) : 0;

  if (level < 2) {
    // John regime: d(E, E*) <= dim E is already the uniform bound here.
    res.johnRegime = true;
    res.dimF = n;
    for (int c = 0; c < n; ++c) res.fmBasis.push_back(fromCoords(basis.col(c)));
    return res;
  }

  const int head = (level % 2 == 1) ? level - 1 : level;  // whole v-pairs only
  res.headCount = head;

  // E2 = E intersect [v_j : j > head]: kernel of the head rows within E.
  Eigen::MatrixXd e2;
  if (head >= ambient) {
    e2 = Eigen::MatrixXd(ambient, 0);
  } else {
    const Eigen::MatrixXd headRows = basis.topRows(std::min(head, ambient));
    const Eigen::MatrixXd k = linalg::kernel(headRows);
    e2 = linalg::orthonormalColumns(basis * k);
  }
  for (int c = 0; c < e2.cols(); ++c) res.e2Basis.push_back(fromCoords(e2.col(c)));

  res.dimF = head + static_cast<int>(e2.cols());
  for (int j = 1; j <= head; ++j) res.fmBasis.push_back(TwistedVector::basis(j));
  for (const auto& v : res.e2Basis) res.fmBasis.push_back(v);
  return res;
}

}  // namespace twistlab::twisted
