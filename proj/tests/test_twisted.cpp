#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "twistlab/twisted.hpp"

using namespace twistlab;
using namespace twistlab::twisted;
using centralizer::CentralizerSpec;
using centralizer::PhiSpec;

namespace {
TwistedVector randomTv(Rng& rng, int dim) {
  TwistedVector v;
  for (int j = 1; j <= dim; ++j) {
    v.x.set(j, rng.gaussian());
    v.y.set(j, rng.gaussian());
  }
  return v;
}
}  // namespace

TEST_CASE("basis vectors and v-index bookkeeping") {
  const auto v1 = TwistedVector::basis(1);
  CHECK(v1.x.get(1) == 1.0);
  CHECK(v1.y.empty());
  const auto v4 = TwistedVector::basis(4);
  CHECK(v4.y.get(2) == 1.0);
  CHECK(v4.minVIndex() == 4);
  CHECK(v4.maxVIndex() == 4);
  TwistedVector w = v1 + v4;
  CHECK(w.minVIndex() == 1);
  CHECK(w.maxVIndex() == 4);
  const auto coords = toCoords(w, 4);
  CHECK(coords(0) == 1.0);
  CHECK(coords(3) == 1.0);
  const auto back = fromCoords(coords);
  CHECK(back.x == w.x);
  CHECK(back.y == w.y);
  CHECK_THROWS_AS(toCoords(w, 3), std::invalid_argument);
}

TEST_CASE("section specs") {
  SectionSpec sec{4, CentralizerSpec::zero()};
  sec.validate();
  CHECK(sec.contains(TwistedVector::basis(4)));
  CHECK_FALSE(sec.contains(TwistedVector::basis(5)));
  SectionSpec bad{0, CentralizerSpec::zero()};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quasi-norm basics") {
  const auto zero = CentralizerSpec::zero();
  Rng rng(11);
  // on (x, 0) the quasi-norm is exactly the l2 norm whenever Omega(0) = 0
  for (int t = 0; t < 20; ++t) {
    TwistedVector v;
    for (int j = 1; j <= 6; ++j) v.x.set(j, rng.gaussian());
    CHECK(quasi_norm(v, zero) == doctest::Approx(l2Norm(v.x)).epsilon(1e-14));
    const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
    CHECK(quasi_norm(v, kp) == doctest::Approx(l2Norm(v.x)).epsilon(1e-14));
  }
  // zero vector iff zero quasi-norm at finite support
  CHECK(quasi_norm(TwistedVector{}, zero) == 0.0);
  for (int t = 0; t < 50; ++t) {
    const auto v = randomTv(rng, 4);
    CHECK(quasi_norm(v, CentralizerSpec::kaltonPeck(PhiSpec::identity())) > 0.0);
  }
  // with Omega = 0 the quasi-norm is ||x||_2 + ||y||_2
  const auto v = randomTv(rng, 5);
  CHECK(quasi_norm(v, zero) == doctest::Approx(l2Norm(v.x) + l2Norm(v.y)).epsilon(1e-14));
}

TEST_CASE("Kalton-Peck closed form on flat y-vectors") {
  for (const auto& phi : {PhiSpec::identity(), PhiSpec::power(0.5)}) {
    const auto kp = CentralizerSpec::kaltonPeck(phi);
    for (int n : {1, 2, 4, 7, 16, 64}) {
      TwistedVector v;
      for (int j = 1; j <= n; ++j) v.y.set(j, 1.0);
      const double sn = std::sqrt(static_cast<double>(n));
      const double expected = sn * phi(std::log(sn)) + sn;
      CHECK(quasi_norm(v, kp) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  // pinned: n = 4, phi = id gives 2 log 2 + 2
  TwistedVector v;
  for (int j = 1; j <= 4; ++j) v.y.set(j, 1.0);
  CHECK(quasi_norm(v, CentralizerSpec::kaltonPeck(PhiSpec::identity())) ==
        doctest::Approx(2.0 * std::log(2.0) + 2.0).epsilon(1e-12));
}

TEST_CASE("quasi-triangle inequality with an estimate-driven constant") {
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  const double deltaHat = centralizer::estimate_delta(kp, 8, 2000, 3).delta;
  Rng rng(21);
  double worst = 0.0;
  for (int t = 0; t < 400; ++t) {
    const auto a = randomTv(rng, 8);
    const auto b = randomTv(rng, 8);
    worst = std::max(worst, quasi_norm(a + b, kp) / (quasi_norm(a, kp) + quasi_norm(b, kp)));
  }
  CHECK(worst > 0.9);  // the bound is not vacuous
  CHECK(worst <= 1.0 + deltaHat + 0.5);
}

TEST_CASE("duality pairing: pinned values and bilinearity") {
  const auto e1x = TwistedVector::basis(1);  // (e1, 0)
  const auto e1y = TwistedVector::basis(2);  // (0, e1)
  CHECK(duality_pairing(e1x, e1y) == 1.0);
  CHECK(duality_pairing(e1x, e1x) == 0.0);
  Rng rng(33);
  for (int t = 0; t < 50; ++t) {
    const auto v = randomTv(rng, 5), vp = randomTv(rng, 5), w = randomTv(rng, 5);
    const double alpha = rng.gaussian();
    const double lhs = duality_pairing(alpha * v + vp, w);
    const double rhs = alpha * duality_pairing(v, w) + duality_pairing(vp, w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("pairing Gram matrix of the basis has full rank 2n") {
  const int n = 6;
  Eigen::MatrixXd gram(2 * n, 2 * n);
  for (int i = 1; i <= 2 * n; ++i) {
    for (int j = 1; j <= 2 * n; ++j) {
      gram(i - 1, j - 1) = duality_pairing(TwistedVector::basis(i), TwistedVector::basis(j));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  CHECK(svd.singularValues()(2 * n - 1) > 0.99);
}

TEST_CASE("duality upper check") {
  // Omega = 0: ratio bounded by 1 via Cauchy-Schwarz in both slots
  const auto rep0 = duality_upper_check(CentralizerSpec::zero(), 8, 3000, 0.25, 0.05, 17);
  CHECK(rep0.maxRatio <= 1.0 + 1e-12);
  CHECK(rep0.violations == 0);

  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  const double deltaHat = centralizer::estimate_delta(kp, 16, 4000, 17).delta;
  const auto rep = duality_upper_check(kp, 16, 4000, deltaHat, 0.5, 17);
  CHECK(rep.maxRatio > 0.0);
  CHECK(rep.maxRatio <= 8.0 * deltaHat * 1.5);
  CHECK(rep.violations == 0);

  // the ratio is invariant under scaling one argument
  Rng rng(70);
  const auto v = randomTv(rng, 6);
  const auto w = randomTv(rng, 6);
  const auto neg = kp.negated();
  const double r1 = std::abs(duality_pairing(v, w)) / (quasi_norm(v, kp) * quasi_norm(w, neg));
  TwistedVector v2 = v;
  v2 *= 2.0;
  const double r2 = std::abs(duality_pairing(v2, w)) / (quasi_norm(v2, kp) * quasi_norm(w, neg));
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("duality witness construction") {
  // Omega = 0, v = (0, e1), deltaHat = 0: everything is exact
  TwistedVector v;
  v.y.set(1, 1.0);
  const auto res = duality_witness(v, CentralizerSpec::zero(), 0.0);
  CHECK(res.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.quasiNormV == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.wNormNegOmega == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(res.certified);

  // Kalton-Peck on the flat vector: the closed form is the certified floor
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  const double deltaHat = centralizer::estimate_delta(kp, 8, 2000, 3).delta;
  TwistedVector f;
  for (int j = 1; j <= 4; ++j) f.y.set(j, 1.0);
  const auto resF = duality_witness(f, kp, deltaHat);
  CHECK(resF.lower >= 2.0 * std::log(2.0) + 2.0 - 1e-9);
  CHECK(resF.wNormNegOmega <= 8.0 * deltaHat + 2.0 + 1e-6);
  CHECK(resF.certified);

  // 100 random witnesses: certified lower bound and the w-norm identity
  Rng rng(1234);
  for (int t = 0; t < 100; ++t) {
    const auto u = randomTv(rng, 8);
    const auto r = duality_witness(u, kp, deltaHat);
    CHECK(r.lower >= r.quasiNormV - 1e-9);
    CHECK(r.wNormNegOmega <= 8.0 * deltaHat + 2.0 + 1e-6);
  }

  // y = 0 is rejected: the construction divides by ||y||
  TwistedVector xonly;
  xonly.x.set(1, 1.0);
  CHECK_THROWS_WITH_AS(duality_witness(xonly, kp, deltaHat),
                       doctest::Contains("needs y != 0"), std::invalid_argument);
}

TEST_CASE("build_F_m") {
  Rng rng(8);
  // n = 6, m = 1: [log 6] = 1 is odd, head drops to 0, so F = E
  {
    std::vector<TwistedVector> basis;
    for (int i = 0; i < 6; ++i) basis.push_back(randomTv(rng, 8));
    const auto fm = build_F_m(basis, 1);
    CHECK(fm.dimE == 6);
    CHECK(fm.dimF == 6);
    CHECK(fm.headCount == 0);
    CHECK(fm.dimF <= 6 + std::log(6.0));
  }
  // large n, m = 1: head is even and the dimension bound is strict
  {
    std::vector<TwistedVector> basis;
    for (int i = 0; i < 12; ++i) basis.push_back(randomTv(rng, 16));
    const auto fm = build_F_m(basis, 1);
    CHECK(fm.dimE == 12);
    CHECK_FALSE(fm.johnRegime);
    CHECK(fm.headCount == 2);  // [log 12] = 2
    CHECK(fm.headCount % 2 == 0);
    CHECK(fm.dimF <= 12 + std::log(12.0));
    CHECK(fm.dimF - fm.dimE <= static_cast<int>(std::log(12.0)));
  }
  // small n falls back to the John regime
  {
    std::vector<TwistedVector> basis{randomTv(rng, 3), randomTv(rng, 3)};
    const auto fm = build_F_m(basis, 2);
    CHECK(fm.johnRegime);
    CHECK(fm.dimF == fm.dimE);
  }
  // random subspaces: exact integer check of dim F <= n + log_m n
  for (int t = 0; t < 60; ++t) {
    const int n = rng.uniformInt(2, 10);
    const int m = 1 + t % 3;
    std::vector<TwistedVector> basis;
    for (int i = 0; i < n; ++i) basis.push_back(randomTv(rng, 12));
    const auto fm = build_F_m(basis, m);
    CHECK(static_cast<double>(fm.dimF) <= fm.dimE + std::max(fm.logmN, 0.0));
    CHECK(fm.dimF >= fm.dimE);  // dim(E /\ tail) >= n - head, so F never shrinks
  }
  CHECK_THROWS_AS(build_F_m({}, 1), std::invalid_argument);
}
