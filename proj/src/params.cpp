#include "twistlab/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twistlab/rng.hpp"

namespace twistlab::params {

namespace {

int blockMin(const DVec& b) { return b.minIndex(); }
int blockMax(const DVec& b) { return b.maxIndex(); }
int blockMin(const twisted::TwistedVector& b) { return b.minVIndex(); }
int blockMax(const twisted::TwistedVector& b) { return b.maxVIndex(); }

template <typename B>
void validateBlocks(const std::vector<B>& blocks, BlockSequence::Separation sep) {
  const int need = sep == BlockSequence::Separation::Gap ? 2 : 1;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blockMin(blocks[i]) == 0) {
      throw std::invalid_argument("BlockSequence: blocks must be nonzero");
    }
    if (i + 1 < blocks.size() && blockMin(blocks[i + 1]) - blockMax(blocks[i]) < need) {
      throw std::invalid_argument("BlockSequence: blocks must have successive supports" +
                                  std::string(need == 2 ? " with a +1 gap" : ""));
    }
  }
}

/// Expand a coefficient vector over v-indices into a twisted vector.
twisted::TwistedVector expandV(const DVec& coeffs) {
  twisted::TwistedVector t;
  for (const auto& [k, c] : coeffs.entries()) {
    if (k % 2 == 1) {
      t.x.add((k + 1) / 2, c);
    } else {
      t.y.add(k / 2, c);
    }
  }
  return t;
}

struct SearchSpace {
  std::function<double(const DVec&)> norm;  // over basis coefficient vectors
  bool signedCoeffs = false;
};

struct SearchState {
  double value = 0.0;
  std::vector<DVec> blocks;  // normalized coefficient vectors
};

double totalOf(const SearchSpace& sp, const std::vector<DVec>& blocks) {
  DVec sum;
  for (const auto& b : blocks) sum += b;
  return sp.norm(sum);
}

std::vector<DVec> normalizeAll(const SearchSpace& sp, std::vector<DVec> blocks) {
  for (auto& b : blocks) {
    const double nb = sp.norm(b);
    if (nb <= 0.0) continue;
    b *= 1.0 / nb;
  }
  return blocks;
}

SearchState evalSystem(const SearchSpace& sp, const std::vector<DVec>& coeffs) {
  SearchState st;
  st.blocks = normalizeAll(sp, coeffs);
  st.value = totalOf(sp, st.blocks);
  return st;
}

void ascentPolish(const SearchSpace& sp, SearchState& st,
                  const std::vector<std::pair<int, int>>& intervals, int iters) {
  double step = 0.5;
  for (int round = 0; round < iters; ++round) {
    bool improved = false;
    for (std::size_t i = 0; i < st.blocks.size(); ++i) {
      for (int j = intervals[i].first; j <= intervals[i].second; ++j) {
        for (double d : {step, -step}) {
          DVec cand = st.blocks[i];
          double nv = cand.get(j) + d;
          if (!sp.signedCoeffs) nv = std::max(0.0, nv);
          cand.set(j, nv);
          if (cand.empty()) continue;
          const double nb = sp.norm(cand);
          if (nb <= 0.0) continue;
          cand *= 1.0 / nb;
          std::vector<DVec> trial = st.blocks;
          trial[i] = cand;
          const double tv = totalOf(sp, trial);
          if (tv > st.value + 1e-12) {
            st.blocks = std::move(trial);
            st.value = tv;
            improved = true;
          }
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if (step < 1e-3) break;
    }
  }
}

std::vector<std::vector<std::pair<int, int>>> candidateSystems(int n, int M, const DnBudget& budget,
                                                               bool twistedSpace) {
  std::vector<std::vector<std::pair<int, int>>> systems;
  auto run = [&](int start, int len, int gap) {
    std::vector<std::pair<int, int>> sys;
    int a = start;
    for (int i = 0; i < n; ++i) {
      int b = a + len - 1;
      if (b > M) return;
      sys.emplace_back(a, b);
      a = b + 1 + gap;
    }
    systems.push_back(std::move(sys));
  };
  // singleton runs at every shift; the classical witnesses live here
  for (int s = 1; s + n - 1 <= M; ++s) run(s, 1, 0);
  if (twistedSpace) {
    // whole-pair blocks (e_j, 0): v-indices 1,3,5,... with the +1 gap built in
    for (int s : {1, 2}) run(s, 1, 1);
  }
  for (int len = 2; len * n <= M; ++len) {
    for (int s = 1; s <= std::min(n + 1, M - len * n + 1); ++s) run(s, len, 0);
  }
  // seeded random boundary placements
  Rng rng(Rng::derive(budget.seed, 0xD17));
  for (int r = 0; r < budget.randomSystems; ++r) {
    std::vector<int> cuts;
    for (int i = 0; i < 2 * n; ++i) cuts.push_back(rng.uniformInt(1, M));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<int, int>> sys;
    bool ok = true;
    int prevEnd = 0;
    for (int i = 0; i < n; ++i) {
      int a = std::max(cuts[2 * i], prevEnd + 1);
      int b = std::max(cuts[2 * i + 1], a);
      if (b > M) {
        ok = false;
        break;
      }
      sys.emplace_back(a, b);
      prevEnd = b;
    }
    if (ok) systems.push_back(std::move(sys));
  }
  return systems;
}

}  // namespace

void validateBlockSequence(const BlockSequence& b) {
  if (!b.scalarBlocks.empty() && !b.twistedBlocks.empty()) {
    throw std::invalid_argument("BlockSequence: mixed scalar and twisted blocks");
  }
  if (b.scalarBlocks.empty() && b.twistedBlocks.empty()) {
    throw std::invalid_argument("BlockSequence: empty");
  }
  if (!b.scalarBlocks.empty()) {
    validateBlocks(b.scalarBlocks, b.separation);
  } else {
    validateBlocks(b.twistedBlocks, b.separation);
  }
}

DnSpace spaceL2() {
  return {"l2", false, [](const DVec& x) { return l2Norm(x); }, std::nullopt};
}

DnSpace spaceScalar(std::string name, std::function<double(const DVec&)> norm) {
  return {std::move(name), false, std::move(norm), std::nullopt};
}

DnSpace spaceT2(std::shared_ptr<tsirelson::Engine> engine) {
  return {"T2", false, [engine](const DVec& x) { return engine->normTp(x, 2.0); }, std::nullopt};
}

DnSpace spaceT2Dual(std::shared_ptr<tsirelson::Engine> engine) {
  auto warm = std::make_shared<DVec>();
  return {"T2*", false,
          [engine, warm](const DVec& x) {
            return engine->dualNormT2(x, 1e-8, 600, warm.get(), nullptr).value;
          },
          std::nullopt};
}

DnSpace spaceTwisted(const centralizer::CentralizerSpec& omega) {
  DnSpace sp;
  sp.name = "Z(" + omega.name() + ")";
  sp.twisted = true;
  sp.omega = omega;
  return sp;
}

DnEstimate estimate_Dn(const DnSpace& space, int n, const DnBudget& budget) {
  if (n < 1) throw std::invalid_argument("estimate_Dn: n must be >= 1");
  const int M = std::max(budget.maxCoord > 0 ? budget.maxCoord : 3 * n, n);

  SearchSpace sp;
  if (space.twisted) {
    const auto omega = *space.omega;
    sp.norm = [omega](const DVec& coeffs) {
      return twisted::quasi_norm(expandV(coeffs), omega);
    };
    sp.signedCoeffs = true;  // the quasi-norm is not unconditional
  } else {
    sp.norm = space.scalarNorm;
    sp.signedCoeffs = false;  // WLOG by 1-unconditionality
  }

  const auto systems = candidateSystems(n, M, budget, space.twisted);

  SearchState best;
  std::vector<std::pair<double, int>> ranking;
  std::vector<std::vector<std::pair<int, int>>> kept;
  Rng rng(Rng::derive(budget.seed, 0xC0));
  for (const auto& sys : systems) {
    // indicator start
    std::vector<DVec> coeffs;
    for (const auto& [a, b] : sys) {
      DVec c;
      for (int j = a; j <= b; ++j) c.set(j, 1.0);
      coeffs.push_back(std::move(c));
    }
    SearchState st = evalSystem(sp, coeffs);
    if (st.value > best.value) best = st;
    ranking.emplace_back(st.value, static_cast<int>(kept.size()));
    kept.push_back(sys);
    // one random start per system keeps the search from locking onto flats
    if (!budget.light) {
      for (auto& c : coeffs) {
        DVec r;
        for (const auto& [j, v] : c.entries()) {
          (void)v;
          r.set(j, sp.signedCoeffs ? rng.gaussian() : std::abs(rng.gaussian()) + 1e-3);
        }
        c = r;
      }
      st = evalSystem(sp, coeffs);
      if (st.value > best.value) best = st;
    }
  }

  if (!budget.light && budget.ascentIters > 0) {
    std::sort(ranking.rbegin(), ranking.rend());
    const int top = std::min<int>(budget.ascentTopK, static_cast<int>(ranking.size()));
    for (int t = 0; t < top; ++t) {
      const auto& sys = kept[ranking[t].second];
      std::vector<DVec> coeffs;
      for (const auto& [a, b] : sys) {
        DVec c;
        for (int j = a; j <= b; ++j) c.set(j, 1.0);
        coeffs.push_back(std::move(c));
      }
      SearchState st = evalSystem(sp, coeffs);
      ascentPolish(sp, st, sys, budget.ascentIters);
      if (st.value > best.value) best = st;
    }
  }

  DnEstimate est;
  est.saturated = true;
  // re-verify on the witness before reporting
  est.lower = totalOf(sp, best.blocks);
  int prevMax = 0;
  int minGap = std::numeric_limits<int>::max();
  for (const auto& b : best.blocks) {
    if (prevMax > 0) minGap = std::min(minGap, b.minIndex() - prevMax);
    prevMax = b.maxIndex();
  }
  est.witness.separation = (best.blocks.size() > 1 && minGap >= 2)
                               ? BlockSequence::Separation::Gap
                               : BlockSequence::Separation::Strict;
  if (space.twisted) {
    for (const auto& b : best.blocks) est.witness.twistedBlocks.push_back(expandV(b));
  } else {
    est.witness.scalarBlocks = best.blocks;
  }
  return est;
}

bool check_separation_lemma(const twisted::TwistedVector& u1, const twisted::TwistedVector& u2,
                            const centralizer::CentralizerSpec& omega) {
  if (!omega.supportPreserving()) {
    throw std::invalid_argument(
        "check_separation_lemma: centralizer must be support-preserving (lemma hypothesis)");
  }
  if (u1.empty() || u2.empty()) {
    throw std::invalid_argument("check_separation_lemma: blocks must be nonzero");
  }
  if (1 + u1.maxVIndex() >= u2.minVIndex()) {
    throw std::invalid_argument(
        "check_separation_lemma: blocks must be <<-separated (1 + max supp u1 < min supp u2); "
        "mere <-separation lets the trailing x-slot of u1 collide with Omega of the leading "
        "y-slot of u2");
  }
  const DVec r1 = u1.x - omega.apply(u1.y);
  const DVec r2 = u2.x - omega.apply(u2.y);
  const bool aOrder = r1.empty() || r2.empty() || r1.maxIndex() < r2.minIndex();
  const bool bOrder = u1.y.empty() || u2.y.empty() || u1.y.maxIndex() < u2.y.minIndex();
  return aOrder && bOrder;
}

EquivalenceConstants basis_equivalence_constants(int N, const centralizer::CentralizerSpec& omega,
                                                 int samples, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("basis_equivalence_constants: N must be >= 1");
  auto ratioOf = [&](const DVec& coeffs) {
    return twisted::quasi_norm(expandV(coeffs), omega) / l2Norm(coeffs);
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  DVec loArg, hiArg;
  auto consider = [&](const DVec& a) {
    if (a.empty()) return;
    const double r = ratioOf(a);
    if (r < lo) {
      lo = r;
      loArg = a;
    }
    if (r > hi) {
      hi = r;
      hiArg = a;
    }
  };

  for (int s = 0; s < samples; ++s) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(s)));
    DVec a;
    for (int k = 1; k <= N; ++k) a.set(k, rng.gaussian());
    consider(a);
  }
  // structured candidates: single basis vector, flat y, and x = Omega(y)
  consider(DVec::unit(1));
  DVec flatY;
  for (int k = 2; k <= N; k += 2) flatY.set(k, 1.0);
  if (!flatY.empty()) {
    consider(flatY);
    DVec yPart;
    for (const auto& [k, v] : flatY.entries()) yPart.set(k / 2, v);
    const DVec om = omega.apply(yPart);
    DVec comp = flatY;
    for (const auto& [j, v] : om.entries()) {
      if (2 * j - 1 <= N) comp.set(2 * j - 1, v);
    }
    consider(comp);
  }

  // local polish from both extremes
  auto polish = [&](DVec a, bool maximize) {
    if (a.empty()) return;
    double cur = ratioOf(a);
    double step = 0.4;
    for (int round = 0; round < 10; ++round) {
      bool improved = false;
      const double scale = std::max(linfNorm(a), 1e-6);
      for (int k = 1; k <= N; ++k) {
        for (double d : {step * scale, -step * scale}) {
          DVec cand = a;
          cand.set(k, cand.get(k) + d);
          if (cand.empty()) continue;
          const double r = ratioOf(cand);
          if ((maximize && r > cur + 1e-12) || (!maximize && r < cur - 1e-12)) {
            a = cand;
            cur = r;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
      consider(a);
    }
  };
  polish(hiArg, true);
  polish(loArg, false);

  return {lo, hi};
}

std::vector<GrowthRow> omega_growth_probe(const centralizer::CentralizerSpec& omega,
                                          const std::vector<int>& ns) {
  for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
    if (ns[i + 1] <= ns[i]) throw std::invalid_argument("omega_growth_probe: ns must increase");
  }
  std::vector<GrowthRow> rows;
  for (int n : ns) {
    if (n < 1) throw std::invalid_argument("omega_growth_probe: n must be >= 1");
    DVec ones;
    for (int j = 1; j <= n; ++j) ones.set(j, 1.0);
    rows.push_back({n, l2Norm(omega.apply(ones)) / std::sqrt(static_cast<double>(n))});
  }
  return rows;
}

CommutatorGap commutator_gap(const std::vector<DVec>& blocks,
                             const centralizer::CentralizerSpec& omega,
                             const CommutatorOptions& opts) {
  if (blocks.empty()) throw std::invalid_argument("commutator_gap: no blocks");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].empty()) throw std::invalid_argument("commutator_gap: blocks must be nonzero");
    if (i + 1 < blocks.size() && blocks[i].maxIndex() >= blocks[i + 1].minIndex()) {
      throw std::invalid_argument("commutator_gap: blocks must be successive (b_i < b_{i+1})");
    }
  }
  if (!omega.supportPreserving()) {
    throw std::invalid_argument("commutator_gap: Omega must be support-preserving");
  }

  const int n = static_cast<int>(blocks.size());
  DVec sum;
  DVec omegaSum;
  for (const auto& b : blocks) {
    sum += b;
    omegaSum += omega.apply(b);
  }
  CommutatorGap out;
  out.gap = l2Norm(omega.apply(sum) - omegaSum);

  auto engine = opts.engine ? opts.engine : std::make_shared<tsirelson::Engine>(8);
  DnBudget budget = opts.budget;
  if (opts.dnT2) {
    out.dnT2 = *opts.dnT2;
  } else {
    out.dnT2 = estimate_Dn(spaceT2(engine), n, budget).lower;
  }
  if (opts.dnT2Dual) {
    out.dnT2Dual = *opts.dnT2Dual;
  } else {
    DnBudget light = budget;
    light.light = true;  // each dual evaluation is a solver run
    out.dnT2Dual = estimate_Dn(spaceT2Dual(engine), n, light).lower;
  }
  out.bound = 6.0 * std::sqrt(out.dnT2 * out.dnT2Dual) +
              std::abs(std::log(out.dnT2 / out.dnT2Dual)) * l2Norm(sum);
  return out;
}

}  // namespace twistlab::params
