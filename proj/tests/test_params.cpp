#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "twistlab/params.hpp"

using namespace twistlab;
using namespace twistlab::params;
using centralizer::CentralizerSpec;
using centralizer::PhiSpec;
using twisted::TwistedVector;

TEST_CASE("block sequence validation") {
  BlockSequence ok;
  ok.scalarBlocks = {DVec::unit(1), DVec::unit(3)};
  validateBlockSequence(ok);  // no throw
  ok.separation = BlockSequence::Separation::Gap;
  validateBlockSequence(ok);

  BlockSequence bad;
  bad.scalarBlocks = {DVec::unit(3), DVec::unit(2)};
  CHECK_THROWS_AS(validateBlockSequence(bad), std::invalid_argument);
  BlockSequence adj;
  adj.scalarBlocks = {DVec::unit(1), DVec::unit(2)};
  adj.separation = BlockSequence::Separation::Gap;
  CHECK_THROWS_AS(validateBlockSequence(adj), std::invalid_argument);
  CHECK_THROWS_AS(validateBlockSequence(BlockSequence{}), std::invalid_argument);
}

TEST_CASE("estimate_Dn on l2 is exactly sqrt(n)") {
  for (int n = 1; n <= 8; ++n) {
    DnBudget budget;
    budget.randomSystems = 10;
    budget.ascentIters = 8;
    const auto est = estimate_Dn(spaceL2(), n, budget);
    CHECK(est.lower == doctest::Approx(std::sqrt(double(n))).epsilon(1e-9));
    CHECK(est.saturated);  // always a lower bound
    validateBlockSequence(est.witness);
    // witness re-evaluation reproduces the reported value
    DVec sum;
    for (const auto& b : est.witness.scalarBlocks) sum += b;
    CHECK(l2Norm(sum) == doctest::Approx(est.lower).epsilon(1e-9));
  }
  // strict monotonicity in n for l2
  double prev = 0.0;
  for (int n = 1; n <= 6; ++n) {
    DnBudget b;
    b.light = true;
    const double v = estimate_Dn(spaceL2(), n, b).lower;
    CHECK(v > prev + 1e-6);
    prev = v;
  }
  CHECK_THROWS_AS(estimate_Dn(spaceL2(), 0), std::invalid_argument);
}

TEST_CASE("estimate_Dn on T2 stays inside the sqrt(n) envelope") {
  auto eng = std::make_shared<tsirelson::Engine>(8);
  for (int n = 1; n <= 4; ++n) {
    DnBudget budget;
    budget.randomSystems = 16;
    budget.ascentIters = 10;
    const auto est = estimate_Dn(spaceT2(eng), n, budget);
    const double sn = std::sqrt(double(n));
    CHECK(est.lower >= sn / 2.0 - 1e-12);
    CHECK(est.lower <= 2.0 * sn + 1e-12);
    // re-verify the witness against the oracle directly
    DVec sum;
    for (const auto& b : est.witness.scalarBlocks) {
      CHECK(eng->normTp(b, 2.0) <= 1.0 + 1e-9);
      sum += b;
    }
    CHECK(eng->normTp(sum, 2.0) == doctest::Approx(est.lower).epsilon(1e-9));
  }
}

TEST_CASE("estimate_Dn on the twisted space finds the scalar-head witness") {
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  for (int n = 1; n <= 4; ++n) {
    DnBudget budget;
    budget.randomSystems = 10;
    budget.ascentIters = 6;
    const auto est = estimate_Dn(spaceTwisted(kp), n, budget);
    CHECK(est.lower >= std::sqrt(double(n)) - 1e-9);
    validateBlockSequence(est.witness);
    TwistedVector sum;
    for (const auto& b : est.witness.twistedBlocks) {
      CHECK(quasi_norm(b, kp) <= 1.0 + 1e-9);
      sum += b;
    }
    CHECK(quasi_norm(sum, kp) == doctest::Approx(est.lower).epsilon(1e-9));
  }
}

TEST_CASE("separation lemma check") {
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  // pinned: singleton blocks with a v-index gap
  CHECK(check_separation_lemma(TwistedVector::basis(1), TwistedVector::basis(5), kp));

  // 1000 random <<-separated pairs never fail (this is the lemma's claim)
  Rng rng(404);
  for (int t = 0; t < 1000; ++t) {
    const int cut = rng.uniformInt(2, 8);
    TwistedVector u1, u2;
    for (int k = 1; k <= cut; ++k) {
      if (rng.uniform() < 0.6) {
        if (k % 2 == 1) {
          u1.x.set((k + 1) / 2, rng.gaussian());
        } else {
          u1.y.set(k / 2, rng.gaussian());
        }
      }
    }
    if (u1.empty()) u1.x.set(1, 1.0);
    const int lo = u1.maxVIndex() + 2;  // << separation
    for (int k = lo; k <= lo + 6; ++k) {
      if (rng.uniform() < 0.6) {
        if (k % 2 == 1) {
          u2.x.set((k + 1) / 2, rng.gaussian());
        } else {
          u2.y.set(k / 2, rng.gaussian());
        }
      }
    }
    if (u2.empty()) {
      if (lo % 2 == 1) {
        u2.x.set((lo + 1) / 2, 1.0);
      } else {
        u2.y.set(lo / 2, 1.0);
      }
    }
    CHECK(check_separation_lemma(u1, u2, kp));
  }

  // adjacency (plain < separation) is refused, not answered
  TwistedVector a = TwistedVector::basis(1);  // max v-index 1
  TwistedVector b = TwistedVector::basis(2);  // min v-index 2: 1 + 1 >= 2
  CHECK_THROWS_WITH_AS(check_separation_lemma(a, b, kp), doctest::Contains("<<-separated"),
                       std::invalid_argument);
}

TEST_CASE("basis equivalence constants") {
  // single basis vector: the ratio degenerates to 1
  const auto zero = CentralizerSpec::zero();
  const auto one = basis_equivalence_constants(1, zero, 50, 5);
  CHECK(one.cLow == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.cHigh == doctest::Approx(1.0).epsilon(1e-12));

  // Omega = 0: the quasi-norm is ||x||_2 + ||y||_2, sqrt(2)-equivalent to l2
  const auto c0 = basis_equivalence_constants(12, zero, 400, 5);
  CHECK(c0.cLow >= 1.0 / std::sqrt(2.0) - 1e-9);
  CHECK(c0.cHigh <= std::sqrt(2.0) + 1e-9);
  CHECK(c0.ratio() <= std::sqrt(2.0) + 1e-9);

  // Kalton-Peck: the reported constant grows with the section
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  const auto c8 = basis_equivalence_constants(8, kp, 400, 5);
  const auto c32 = basis_equivalence_constants(32, kp, 400, 5);
  CHECK(c32.ratio() > c8.ratio());
  // seed determinism
  const auto again = basis_equivalence_constants(8, kp, 400, 5);
  CHECK(again.cLow == c8.cLow);
  CHECK(again.cHigh == c8.cHigh);
}

TEST_CASE("omega growth probe") {
  const auto zero = CentralizerSpec::zero();
  for (const auto& row : omega_growth_probe(zero, {1, 2, 4})) CHECK(row.ratio == 0.0);

  // Kalton-Peck identity: exactly log sqrt(n) in every coordinate
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  for (const auto& row : omega_growth_probe(kp, {1, 2, 4, 8, 16, 64})) {
    const double expect = std::log(std::sqrt(double(row.n)));
    CHECK(row.ratio == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(omega_growth_probe(kp, {4, 2}), std::invalid_argument);
}

TEST_CASE("commutator gap") {
  const auto kp = CentralizerSpec::kaltonPeck(PhiSpec::identity());
  auto eng = std::make_shared<tsirelson::Engine>(8);

  // single block: Omega(b) - Omega(b) = 0
  CommutatorOptions opts;
  opts.engine = eng;
  opts.dnT2 = 1.0;
  opts.dnT2Dual = 1.0;
  const auto single = commutator_gap({DVec::unit(2)}, kp, opts);
  CHECK(single.gap == 0.0);

  // disjoint unit coordinates: the gap is the closed form sqrt(n) log sqrt(n)
  for (int n : {2, 4, 6}) {
    std::vector<DVec> blocks;
    for (int j = 1; j <= n; ++j) blocks.push_back(DVec::unit(2 * j));
    CommutatorOptions o2;
    o2.engine = eng;
    o2.dnT2 = std::sqrt(double(n));  // pin the envelope: the gap value is the point here
    o2.dnT2Dual = std::sqrt(double(n));
    const auto r = commutator_gap(blocks, kp, o2);
    const double sn = std::sqrt(double(n));
    CHECK(r.gap == doctest::Approx(sn * std::log(sn)).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(6.0 * sn).epsilon(1e-12));
  }

  // internally estimated D_n values feed the envelope
  std::vector<DVec> blocks{DVec::unit(1), DVec::unit(2), DVec::unit(3)};
  CommutatorOptions o3;
  o3.engine = eng;
  const auto r3 = commutator_gap(blocks, kp, o3);
  CHECK(r3.dnT2 > 0.0);
  CHECK(r3.dnT2Dual > 0.0);
  CHECK(r3.bound > 0.0);
  CHECK(r3.gap <= r3.bound * 2.0);

  // non-successive blocks are rejected
  CHECK_THROWS_AS(commutator_gap({DVec::unit(3), DVec::unit(2)}, kp, opts),
                  std::invalid_argument);
}

TEST_CASE("commutator gap under the factorization centralizer stays in the envelope") {
  auto eng = std::make_shared<tsirelson::Engine>(16);
  const auto om = centralizer::CentralizerSpec::factorization(
      centralizer::oracles::tsirelsonT2(eng), centralizer::oracles::tsirelsonT2Dual(eng, 3e-4, 12),
      80);
  Rng rng(51);
  for (int n : {2, 3, 5}) {
    // random successive blocks of width 2 with unit l2 mass
    std::vector<DVec> blocks;
    int a = 1;
    for (int i = 0; i < n; ++i) {
      DVec b;
      b.set(a, rng.gaussian());
      b.set(a + 1, rng.gaussian());
      b *= 1.0 / l2Norm(b);
      blocks.push_back(std::move(b));
      a += 2;
    }
    CommutatorOptions opts;
    opts.engine = eng;
    opts.budget.seed = 3;
    const auto r = commutator_gap(blocks, om, opts);
    CHECK(r.gap <= r.bound * 2.0);
    CHECK(r.bound > 0.0);
  }
}
