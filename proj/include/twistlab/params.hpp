#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/centralizer.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab::params {

/// Successive blocks of a basis; scalar blocks for unconditional spaces,
/// twisted blocks (indexed along the v-basis) for derived spaces. Exactly one
/// of the two lists is populated.
struct BlockSequence {
  enum class Separation { Strict, Gap };  // u_i < u_{i+1}  vs  u_i << u_{i+1}

  std::vector<DVec> scalarBlocks;
  std::vector<twisted::TwistedVector> twistedBlocks;
  Separation separation = Separation::Strict;

  std::size_t size() const {
    return scalarBlocks.empty() ? twistedBlocks.size() : scalarBlocks.size();
  }
};

/// Throws unless the blocks have successive supports (and a +1 gap when the
/// sequence is declared Gap-separated).
void validateBlockSequence(const BlockSequence& b);

/// Space descriptor for the D_n search: a norm plus the flavor of blocks the
/// basis carries.
struct DnSpace {
  std::string name;
  bool twisted = false;
  std::function<double(const DVec&)> scalarNorm;
  std::optional<centralizer::CentralizerSpec> omega;
};

DnSpace spaceL2();
DnSpace spaceScalar(std::string name, std::function<double(const DVec&)> norm);
DnSpace spaceT2(std::shared_ptr<tsirelson::Engine> engine);
DnSpace spaceT2Dual(std::shared_ptr<tsirelson::Engine> engine);
DnSpace spaceTwisted(const centralizer::CentralizerSpec& omega);

struct DnBudget {
  int maxCoord = 0;       // 0: default 3n; paper-style witnesses live in heads
  int randomSystems = 40;
  int ascentIters = 40;
  int ascentTopK = 2;
  std::uint64_t seed = 1;
  bool light = false;  // candidates only, no ascent (for expensive norms)
};

struct DnEstimate {
  double lower = 0.0;  // certified by re-evaluating the witness
  BlockSequence witness;
  bool saturated = true;  // a search lower bound, always; records budget exhaustion
};

/// Certified lower bound on D_n(X) = sup ||u_1 + ... + u_n||, u_1 < ... < u_n,
/// ||u_j|| <= 1: block boundaries are searched over the first maxCoord
/// coordinates, block coefficients by seeded sampling plus coordinate ascent,
/// and the reported value is re-verified on the returned witness.
DnEstimate estimate_Dn(const DnSpace& space, int n, const DnBudget& budget = {});

/// Lemma hypothesis check: for u1 << u2 (v-index gap) and support-preserving
/// Omega, the supports of a_i - Omega(b_i) and of b_i stay in strict order.
/// Throws when Omega is not support-preserving or the blocks are only
/// <-separated (adjacency genuinely breaks the conclusion: the trailing
/// (e_j, 0) of u1 and the leading (0, e_j) of u2 share the scalar index j).
bool check_separation_lemma(const twisted::TwistedVector& u1, const twisted::TwistedVector& u2,
                            const centralizer::CentralizerSpec& omega);

struct EquivalenceConstants {
  double cLow = 0.0;
  double cHigh = 0.0;
  double ratio() const { return cLow > 0 ? cHigh / cLow : 0.0; }
};

/// Empirical extremes of quasi_norm(sum a_j v_j) / ||a||_2 over sampled and
/// locally optimized coefficient vectors on [v_1..v_N].
EquivalenceConstants basis_equivalence_constants(int N, const centralizer::CentralizerSpec& omega,
                                                 int samples, std::uint64_t seed);

struct GrowthRow {
  int n = 0;
  double ratio = 0.0;  // ||Omega(1_n)||_2 / sqrt(n)
};

/// Growth surrogate for the distance of the sections to Hilbert space.
std::vector<GrowthRow> omega_growth_probe(const centralizer::CentralizerSpec& omega,
                                          const std::vector<int>& ns);

struct CommutatorGap {
  double gap = 0.0;    // ||Omega(sum b_j) - sum Omega(b_j)||_2
  double bound = 0.0;  // 6 sqrt(D_n(T^2) D_n((T^2)*)) + |log ratio| ||sum b_j||_2
  double dnT2 = 0.0;
  double dnT2Dual = 0.0;
};

struct CommutatorOptions {
  std::shared_ptr<tsirelson::Engine> engine;  // default: fresh engine sized for the blocks
  std::optional<double> dnT2;                 // precomputed estimates, else estimated here
  std::optional<double> dnT2Dual;
  DnBudget budget;
};

/// Commutator defect of Omega across successive scalar blocks against the
/// D_n-assembled envelope.
CommutatorGap commutator_gap(const std::vector<DVec>& blocks,
                             const centralizer::CentralizerSpec& omega,
                             const CommutatorOptions& opts = {});

}  // namespace twistlab::params
