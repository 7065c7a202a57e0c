#include "twistlab/tsirelson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "twistlab/simplex.hpp"

namespace twistlab::tsirelson {

bool is_admissible(const std::set<int>& a) {
  if (a.empty()) throw std::invalid_argument("is_admissible: empty set has no admissibility status");
  return static_cast<int>(a.size()) <= *a.begin();
}

double NormingFunctional::eval(const DVec& x) const {
  struct Rec {
    static double go(const Node& n, const DVec& x) {
      if (n.leaf()) return n.sign * x.get(n.index);
      double s = 0;
      for (const Node& c : n.children) s += go(c, x);
      return 0.5 * s;
    }
  };
  return Rec::go(root, x);
}

Rational NormingFunctional::evalExact(const QVec& x) const {
  struct Rec {
    static Rational go(const Node& n, const QVec& x) {
      if (n.leaf()) {
        Rational v = x.get(n.index);
        return n.sign < 0 ? -v : v;
      }
      Rational s(0);
      for (const Node& c : n.children) s += go(c, x);
      return s.half();
    }
  };
  return Rec::go(root, x);
}

namespace {

template <typename S>
S absOf(const S& v) {
  if constexpr (std::is_same_v<S, Rational>) {
    return v.abs();
  } else {
    return std::abs(v);
  }
}

template <typename S>
S halfOf(const S& v) {
  if constexpr (std::is_same_v<S, Rational>) {
    return v.half();
  } else {
    return 0.5 * v;
  }
}

/// Support-compressed interval DP. Positions index the ascending support of
/// |x|; an interval of positions stands for the hull interval of coordinates,
/// so admissibility only ever consults the coordinate of a part's first
/// support point. Scratch tables are flat and allocated once per run; this is
/// the hot path under every solver in the project.
template <typename S>
struct Dp {
  struct Arg {
    int unitPos = -1;
    std::vector<std::pair<int, int>> parts;  // position ranges of the winning family
  };

  int m = 0;
  std::vector<int> coord;
  std::vector<S> absval;
  std::vector<S> norm;  // m x m, row-major [a*m+b]
  std::vector<Arg> arg;

  explicit Dp(const SparseVec<S>& x) {
    for (const auto& [j, v] : x.entries()) {
      coord.push_back(j);
      absval.push_back(absOf(v));
    }
    m = static_cast<int>(coord.size());
    if (m == 0) return;
    norm.assign(static_cast<std::size_t>(m) * m, S(0));
    arg.assign(static_cast<std::size_t>(m) * m, Arg{});
    const std::size_t scratch = static_cast<std::size_t>(m + 1) * (m + 1);
    h_.assign(scratch, S(0));
    ok_.assign(scratch, 0);
    ptr_.assign(scratch, -1);
    run();
  }

  S value() const { return m == 0 ? S(0) : norm[0 * m + (m - 1)]; }

  const Arg& argOf(int a, int b) const { return arg[a * m + b]; }

  void run() {
    for (int len = 1; len <= m; ++len) {
      for (int a = 0; a + len - 1 < m; ++a) {
        const int b = a + len - 1;
        S best = absval[a];
        Arg bestArg;
        bestArg.unitPos = a;
        for (int j = a + 1; j <= b; ++j) {
          if (best < absval[j]) {
            best = absval[j];
            bestArg.unitPos = j;
          }
        }
        if (len >= 2) runPartitions(a, b, best, bestArg);
        norm[a * m + b] = best;
        arg[a * m + b] = std::move(bestArg);
      }
    }
  }

  void runPartitions(int a, int b, S& best, Arg& bestArg) {
    const int len = b - a + 1;
    const int kcap = len;
    const int stride = kcap + 1;
    // h[t*stride+j]: best sum of j successive part norms in positions [t,b]
    // (t relative to a); ptr -1 invalid, -2 skip, else end position of [t,e].
    auto at = [stride](int t, int j) { return t * stride + j; };
    for (int t = 0; t <= len; ++t) {
      ok_[at(t, 0)] = 1;
      h_[at(t, 0)] = S(0);
    }
    for (int j = 1; j <= kcap; ++j) {
      ok_[at(len, j)] = 0;
      for (int t = len - 1; t >= 0; --t) {
        const int pos = a + t;
        char okHere = 0;
        S bestHere(0);
        int ptrHere = -1;
        if (ok_[at(t + 1, j)]) {
          bestHere = h_[at(t + 1, j)];
          okHere = 1;
          ptrHere = -2;
        }
        const S* normRow = norm.data() + pos * m;
        for (int e = pos; e <= b; ++e) {
          if (pos == a && e == b) continue;  // degenerate self-partition
          const int nt = e - a + 1;
          if (!ok_[at(nt, j - 1)]) continue;
          S cand = normRow[e] + h_[at(nt, j - 1)];
          if (!okHere || bestHere < cand) {
            bestHere = cand;
            okHere = 1;
            ptrHere = e;
          }
        }
        h_[at(t, j)] = bestHere;
        ok_[at(t, j)] = okHere;
        ptr_[at(t, j)] = ptrHere;
      }
    }
    for (int k = 2; k <= kcap; ++k) {
      int s0 = a;
      while (s0 <= b && coord[s0] < k) ++s0;  // k <= min coordinate of the first part
      if (s0 > b) break;
      const int t0 = s0 - a;
      if (!ok_[at(t0, k)]) continue;
      S cand = halfOf(h_[at(t0, k)]);
      if (best < cand) {
        best = cand;
        bestArg.unitPos = -1;
        bestArg.parts.clear();
        int t = t0, j = k;
        while (j > 0) {
          int p = ptr_[at(t, j)];
          if (p == -2) {
            ++t;
            continue;
          }
          bestArg.parts.emplace_back(a + t, p);
          t = p - a + 1;
          --j;
        }
      }
    }
  }

  /// Nonnegative norming shape achieving <shape, |x|> = value (double only).
  void extractShape(int a, int b, double scale, DVec& out) const {
    const Arg& ar = argOf(a, b);
    if (ar.unitPos >= 0) {
      out.add(coord[ar.unitPos], scale);
      return;
    }
    for (const auto& [s, e] : ar.parts) extractShape(s, e, 0.5 * scale, out);
  }

 private:
  std::vector<S> h_;
  std::vector<char> ok_;
  std::vector<int> ptr_;
};

DVec denseAbs(const DVec& x) { return x.cwiseAbs(); }

}  // namespace

Rational Engine::normT(const QVec& x) const {
  Dp<Rational> dp(x.cwiseAbs());
  return dp.value();
}

double Engine::normT(const DVec& x) const {
  Dp<double> dp(denseAbs(x));
  return dp.value();
}

double Engine::normT(const DVec& x, DVec& functional) const {
  Dp<double> dp(denseAbs(x));
  functional = DVec{};
  if (dp.m == 0) return 0.0;
  DVec shape;
  dp.extractShape(0, dp.m - 1, 1.0, shape);
  for (const auto& [j, c] : shape.entries()) {
    functional.set(j, x.get(j) < 0 ? -c : c);
  }
  return dp.value();
}

double Engine::normTp(const DVec& x, double p) const {
  if (p < 1.0) throw std::invalid_argument("norm_Tp: requires p >= 1");
  DVec xp;
  for (const auto& [j, v] : x.entries()) xp.set(j, std::pow(std::abs(v), p));
  return std::pow(normT(xp), 1.0 / p);
}

Rational Engine::normT2Squared(const QVec& x) const {
  QVec sq;
  for (const auto& [j, v] : x.entries()) sq.set(j, v * v);
  return normT(sq);
}

double Engine::normT2(const QVec& x) const { return std::sqrt(normT2Squared(x).toDouble()); }

void Engine::checkCap(int dim, const char* op) const {
  if (dim > cap_) {
    throw std::invalid_argument(std::string(op) + ": dimension " + std::to_string(dim) +
                                " exceeds the norming-set cap " + std::to_string(cap_) +
                                " (construct the engine with a larger cap to override)");
  }
}

// ---------------------------------------------------------------------------
// Norming-set enumeration
// ---------------------------------------------------------------------------

namespace {

struct Shape {
  std::vector<std::pair<int, Rational>> coeffs;  // sorted, nonnegative
  NormingFunctional::Node tree;
  int minIdx = 0;
  int maxIdx = 0;
};

NormingFunctional::Node signedTree(const NormingFunctional::Node& n,
                                   const std::map<int, int>& signs) {
  NormingFunctional::Node out = n;
  if (out.leaf()) {
    out.sign = signs.at(out.index);
    return out;
  }
  for (auto& c : out.children) c = signedTree(c, signs);
  return out;
}

}  // namespace

std::vector<NormingFunctional> Engine::enumerateNormingSet(int n) const {
  if (n < 1) throw std::invalid_argument("enumerate_norming_set: dimension must be >= 1");
  checkCap(n, "enumerate_norming_set");

  // Closure of nonnegative shapes under the half-sum rule (k >= 2). The k = 1
  // rule never changes the norm and would make the closure infinite.
  std::vector<Shape> shapes;
  std::set<std::vector<std::pair<int, Rational>>> seen;
  for (int j = 1; j <= n; ++j) {
    Shape s;
    s.coeffs = {{j, Rational(1)}};
    s.tree.index = j;
    s.minIdx = s.maxIdx = j;
    seen.insert(s.coeffs);
    shapes.push_back(std::move(s));
  }

  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::vector<int>> byMin(n + 1);
    for (int i = 0; i < static_cast<int>(shapes.size()); ++i) byMin[shapes[i].minIdx].push_back(i);
    std::vector<Shape> fresh;

    // chain = indices of successive shapes; kmax = min support of the first
    std::vector<int> chain;
    auto emit = [&]() {
      std::map<int, Rational> acc;
      for (int idx : chain) {
        for (const auto& [j, v] : shapes[idx].coeffs) {
          auto [it, inserted] = acc.try_emplace(j, v);
          if (!inserted) it->second += v;
        }
      }
      Shape s;
      for (auto& [j, v] : acc) s.coeffs.emplace_back(j, v.half());
      if (!seen.insert(s.coeffs).second) return;
      s.tree.index = 0;
      for (int idx : chain) s.tree.children.push_back(shapes[idx].tree);
      s.minIdx = s.coeffs.front().first;
      s.maxIdx = s.coeffs.back().first;
      fresh.push_back(std::move(s));
    };

    std::function<void(int, int)> extend = [&](int lastMax, int kmax) {
      const int k = static_cast<int>(chain.size());
      if (k >= 2 && k <= kmax) emit();
      if (k == kmax) return;
      for (int mn = lastMax + 1; mn <= n; ++mn) {
        for (int idx : byMin[mn]) {
          chain.push_back(idx);
          extend(shapes[idx].maxIdx, kmax);
          chain.pop_back();
        }
      }
    };
    for (int mn = 2; mn <= n; ++mn) {
      for (int idx : byMin[mn]) {
        chain.assign(1, idx);
        extend(shapes[idx].maxIdx, mn);
      }
    }
    if (!fresh.empty()) {
      grew = true;
      for (auto& s : fresh) shapes.push_back(std::move(s));
    }
  }

  // Signed expansion: the closure is sign-symmetric coordinatewise, so every
  // sign pattern on the support of a shape is again a norming functional.
  std::vector<NormingFunctional> out;
  for (const Shape& s : shapes) {
    const int sup = static_cast<int>(s.coeffs.size());
    for (unsigned mask = 0; mask < (1u << sup); ++mask) {
      std::map<int, int> signs;
      QVec coeff;
      for (int i = 0; i < sup; ++i) {
        const int sgn = (mask >> i) & 1u ? -1 : 1;
        signs[s.coeffs[i].first] = sgn;
        coeff.set(s.coeffs[i].first, sgn < 0 ? -s.coeffs[i].second : s.coeffs[i].second);
      }
      NormingFunctional f;
      f.root = signedTree(s.tree, signs);
      f.coefficients = std::move(coeff);
      out.push_back(std::move(f));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dual norms
// ---------------------------------------------------------------------------

double Engine::dualNormT(const DVec& y) const {
  DVec ignored;
  return dualNormT(y, ignored);
}

double Engine::dualNormT(const DVec& y, DVec& maximizer) const {
  maximizer = DVec{};
  if (y.empty()) return 0.0;
  checkCap(y.maxIndex(), "dual_norm_T");
  const int n = y.maxIndex();

  std::vector<double> obj(n, 0.0);
  for (const auto& [j, v] : y.entries()) obj[j - 1] = std::abs(v);

  // Outer approximation of the positive T-ball; the DP separates.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (int j = 0; j < n; ++j) {
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    rows.push_back(std::move(r));
    rhs.push_back(1.0);
  }

  DVec xs;
  double value = 0.0;
  for (int round = 0; round < 2000; ++round) {
    LpResult lp = simplexSolve(rows, rhs, obj);
    if (lp.status != LpResult::Status::Optimal) {
      throw DualSolverError("dual_norm_T: master LP did not solve", xs, 0.0);
    }
    xs = DVec{};
    for (int j = 0; j < n; ++j) {
      if (lp.x[j] > 1e-14) xs.set(j + 1, lp.x[j]);
    }
    DVec shape;
    const double sigma = normT(xs, shape);
    if (sigma <= 1.0 + 1e-9) {
      value = lp.value / std::max(1.0, sigma);
      break;
    }
    std::vector<double> r(n, 0.0);
    for (const auto& [j, c] : shape.entries()) r[j - 1] = c;
    rows.push_back(std::move(r));
    rhs.push_back(1.0);
    if (round == 1999) {
      throw DualSolverError("dual_norm_T: cutting planes did not converge", xs, 0.0);
    }
  }
  for (const auto& [j, v] : xs.entries()) {
    maximizer.set(j, y.get(j) < 0 ? -v : v);
  }
  return value;
}

DualCertificate Engine::dualNormFw(const DVec& y, double p, double tol, int maxIter,
                                   DVec* warmWeights, DVec* maximizer) const {
  DualCertificate cert;
  if (maximizer) *maximizer = DVec{};
  if (y.empty()) return cert;
  const double q = p / (p - 1.0);
  const bool q2 = std::abs(q - 2.0) < 1e-12;

  // Conjugate form: ||y||_{(T^p)*}^q = min over g in conv(F+) of
  // sum_j |y_j|^q g_j^{1-q}; the linear minimization oracle over conv(F+) is
  // exactly one Tsirelson DP call on c_j = (|y_j|/g_j)^q. All inner loops run
  // on flat support arrays.
  const auto& ent = y.entries();
  const int m = static_cast<int>(ent.size());
  std::vector<int> supp(m);
  std::vector<double> aq(m), g(m), shape(m), cArr(m);
  for (int i = 0; i < m; ++i) {
    supp[i] = ent[i].first;
    aq[i] = q2 ? ent[i].second * ent[i].second : std::pow(std::abs(ent[i].second), q);
    g[i] = 1.0 / m;
  }
  if (warmWeights && !warmWeights->empty()) {
    bool usable = true;
    for (int i = 0; i < m; ++i) usable = usable && warmWeights->get(supp[i]) > 1e-14;
    if (usable) {
      for (int i = 0; i < m; ++i) g[i] = warmWeights->get(supp[i]);
    }
  }

  auto phiOf = [&](const std::vector<double>& gg) {
    double s = 0;
    for (int i = 0; i < m; ++i) {
      s += q2 ? aq[i] / gg[i] : aq[i] * std::pow(gg[i], 1.0 - q);
    }
    return s;
  };

  double phi = phiOf(g);
  int it = 0;
  DVec cVec;
  for (; it < maxIter; ++it) {
    cVec = DVec{};
    double inner = 0.0;
    for (int i = 0; i < m; ++i) {
      cArr[i] = q2 ? aq[i] / (g[i] * g[i]) : aq[i] * std::pow(g[i], -q);
      inner += cArr[i] * g[i];
      cVec.set(supp[i], cArr[i]);  // ascending inserts: no shifting
    }
    DVec shapeVec;
    const double lin = normT(cVec, shapeVec);  // c >= 0, so the shape is nonnegative
    const double gap = (q - 1.0) * (lin - inner);  // <grad, g - s>, grad = (1-q) c
    if (gap <= tol * std::max(1.0, phi)) break;
    for (int i = 0; i < m; ++i) shape[i] = shapeVec.get(supp[i]);

    // exact line search on the segment toward the shape vertex
    auto phiAt = [&](double gamma) {
      double s = 0;
      for (int i = 0; i < m; ++i) {
        const double gj = (1 - gamma) * g[i] + gamma * shape[i];
        if (gj <= 0) return std::numeric_limits<double>::infinity();
        s += q2 ? aq[i] / gj : aq[i] * std::pow(gj, 1.0 - q);
      }
      return s;
    };
    double lo = 0.0, hi = 1.0;
    for (int ls = 0; ls < 48; ++ls) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (phiAt(m1) < phiAt(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    const double gamma = 0.5 * (lo + hi);
    if (gamma <= 1e-18) break;
    for (int i = 0; i < m; ++i) {
      g[i] = std::max((1 - gamma) * g[i] + gamma * shape[i], 1e-30);
    }
    phi = phiOf(g);
  }

  cert.value = std::pow(phi, 1.0 / q);
  cert.iterations = it;

  // feasible witness: t ~ (|y_j|/g_j)^q rescaled into the T-ball, then
  // x*_j = sgn(y_j) t_j^{1/p}
  DVec t;
  for (int i = 0; i < m; ++i) {
    t.set(supp[i], q2 ? (ent[i].second / g[i]) * (ent[i].second / g[i])
                      : std::pow(std::abs(ent[i].second) / g[i], q));
  }
  const double sigma = normT(t);
  double feas = 0.0;
  DVec xs;
  if (sigma > 0) {
    for (int i = 0; i < m; ++i) {
      xs.set(supp[i],
             (ent[i].second < 0 ? -1.0 : 1.0) * std::pow(t.get(supp[i]) / sigma, 1.0 / p));
    }
    feas = dot(y, xs);
  }
  cert.residual = std::max(0.0, cert.value - feas);
  if (maximizer) *maximizer = xs;
  if (warmWeights) {
    DVec gOut;
    for (int i = 0; i < m; ++i) gOut.set(supp[i], g[i]);
    *warmWeights = gOut;
  }
  return cert;
}

DualCertificate Engine::dualNormT2(const DVec& y, double tol, int maxIter, DVec* warmWeights,
                                   DVec* maximizer) const {
  return dualNormFw(y, 2.0, tol, maxIter, warmWeights, maximizer);
}

DualCertificate Engine::dualNormTp(const DVec& y, double p) const {
  if (!y.empty()) checkCap(y.maxIndex(), "dual_norm_Tp");
  return dualNormTp(y, p, 1e-7, 4000, true);
}

DualCertificate Engine::dualNormTp(const DVec& y, double p, double tol, int maxIter,
                                   bool throwOnFail) const {
  if (p < 1.0) throw std::invalid_argument("dual_norm_Tp: requires p >= 1");
  DualCertificate cert;
  if (y.empty()) return cert;

  if (p <= 1.0 + 1e-12) {
    // (T^1)* = T*: the cutting-plane LP is exact here
    DVec maximizer;
    cert.value = dualNormT(y, maximizer);
    cert.residual = 0.0;
    cert.iterations = 1;
    return cert;
  }
  if (p > 1.2) {
    cert = dualNormFw(y, p, tol, maxIter, nullptr, nullptr);
    if (throwOnFail && cert.residual > 100 * tol * std::max(1.0, cert.value)) {
      throw DualSolverError("dual_norm_Tp: residual above tolerance", y, cert.residual);
    }
    return cert;
  }
  // near-linear objective: Kelley cuts converge quickly only in this regime
  cert = dualNormKelley(y, p, tol, maxIter);
  if (throwOnFail && cert.residual > 100 * tol * std::max(1.0, cert.value)) {
    throw DualSolverError("dual_norm_Tp: solver did not reach tolerance", y, cert.residual);
  }
  return cert;
}

DualCertificate Engine::dualNormKelley(const DVec& y, double p, double tol, int maxIter) const {
  DualCertificate cert;
  const int n = y.maxIndex();
  std::vector<double> a(n, 0.0);
  for (const auto& [j, v] : y.entries()) a[j - 1] = std::abs(v);

  auto gOf = [&](const std::vector<double>& t) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      if (a[j] > 0 && t[j] > 0) s += a[j] * std::pow(t[j], 1.0 / p);
    }
    return s;
  };

  // variables: t_1..t_n, theta ; rows: facets [f,0]<=1 and cuts [-grad,1]<=c
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (int j = 0; j < n; ++j) {
    std::vector<double> r(n + 1, 0.0);
    r[j] = 1.0;
    rows.push_back(std::move(r));
    rhs.push_back(1.0);
  }
  std::vector<double> obj(n + 1, 0.0);
  obj[n] = 1.0;

  auto addCut = [&](const std::vector<double>& t) {
    std::vector<double> r(n + 1, 0.0);
    double c = 0.0;
    for (int j = 0; j < n; ++j) {
      if (a[j] <= 0) continue;
      double tj = std::max(t[j], 1e-12);
      double grad = (a[j] / p) * std::pow(tj, 1.0 / p - 1.0);
      r[j] = -grad;
      c += a[j] * std::pow(tj, 1.0 / p) - grad * tj;
    }
    r[n] = 1.0;
    rows.push_back(std::move(r));
    rhs.push_back(std::max(c, 0.0));
  };

  QVec ones;
  for (int j = 1; j <= n; ++j) ones.set(j, Rational(1));
  const double unitNorm = normT(toDouble(ones));
  std::vector<double> t0(n, 0.9 / unitNorm);
  double lb = gOf(t0);
  addCut(t0);

  std::vector<double> lastT(n, 0.0);
  double ub = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < maxIter; ++it) {
    LpResult lp = simplexSolve(rows, rhs, obj);
    if (lp.status != LpResult::Status::Optimal) break;
    ub = lp.value;
    for (int j = 0; j < n; ++j) lastT[j] = std::max(lp.x[j], 0.0);
    DVec tv;
    for (int j = 0; j < n; ++j) {
      if (lastT[j] > 1e-14) tv.set(j + 1, lastT[j]);
    }
    DVec shape;
    const double sigma = normT(tv, shape);
    if (sigma > 1.0 + 1e-9) {
      std::vector<double> r(n + 1, 0.0);
      for (const auto& [j, c] : shape.entries()) r[j - 1] = c;
      rows.push_back(std::move(r));
      rhs.push_back(1.0);
      continue;
    }
    const double scale = std::max(1.0, sigma);
    std::vector<double> tf = lastT;
    for (double& v : tf) v /= scale;
    lb = std::max(lb, gOf(tf));
    if (ub - lb <= tol * std::max(1.0, lb)) break;
    addCut(lastT);
  }

  cert.value = std::min(ub, std::numeric_limits<double>::max());
  cert.residual = std::max(0.0, ub - lb);
  cert.iterations = it;
  return cert;
}

}  // namespace twistlab::tsirelson
