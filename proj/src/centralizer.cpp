#include "twistlab/centralizer.hpp"

#include <algorithm>
#include <cmath>

#include "twistlab/rng.hpp"

namespace twistlab::centralizer {

// ---------------------------------------------------------------------------
// PhiSpec
// ---------------------------------------------------------------------------

double PhiSpec::operator()(double t) const {
  switch (kind) {
    case Kind::Identity:
      return t;
    case Kind::Clip:
      return std::min(t, param);
    case Kind::Power:
      return std::pow(t, param);
    case Kind::Table: {
      if (t <= 0.0) return 0.0;
      double pt = 0.0, pv = 0.0;
      for (const auto& [tt, vv] : table) {
        if (t <= tt) {
          double w = (t - pt) / (tt - pt);
          return pv + w * (vv - pv);
        }
        pt = tt;
        pv = vv;
      }
      return pv;  // constant extension beyond the table keeps phi Lipschitz
    }
  }
  return 0.0;
}

std::string PhiSpec::name() const {
  switch (kind) {
    case Kind::Identity:
      return "id";
    case Kind::Clip:
      return "clip(" + std::to_string(param) + ")";
    case Kind::Power:
      return "pow(" + std::to_string(param) + ")";
    case Kind::Table:
      return "table[" + std::to_string(table.size()) + "]";
  }
  return "?";
}

PhiSpec PhiSpec::identity() { return PhiSpec{}; }

PhiSpec PhiSpec::clip(double c) {
  if (c <= 0) throw std::invalid_argument("PhiSpec::clip: cutoff must be positive");
  PhiSpec p;
  p.kind = Kind::Clip;
  p.param = c;
  return p;
}

PhiSpec PhiSpec::power(double alpha) {
  if (alpha <= 0 || alpha > 1) throw std::invalid_argument("PhiSpec::power: need 0 < alpha <= 1");
  PhiSpec p;
  p.kind = Kind::Power;
  p.param = alpha;
  return p;
}

PhiSpec PhiSpec::tabulated(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw std::invalid_argument("PhiSpec::tabulated: empty table");
  double pt = 0.0;
  for (const auto& [t, v] : pts) {
    if (t <= pt && !(pt == 0.0 && t == 0.0)) {
      throw std::invalid_argument("PhiSpec::tabulated: abscissae must increase");
    }
    pt = t;
  }
  PhiSpec p;
  p.kind = Kind::Table;
  p.table = std::move(pts);
  return p;
}

// ---------------------------------------------------------------------------
// Explicit maps
// ---------------------------------------------------------------------------

DVec kalton_peck_omega(const DVec& y, const PhiSpec& phi) {
  const double n2 = l2Norm(y);
  DVec out;
  if (n2 == 0.0) return out;
  for (const auto& [j, v] : y.entries()) {
    out.set(j, v * phi(std::log(n2 / std::abs(v))));
  }
  return out;
}

DVec omega_tp_explicit(const DVec& x, double p) {
  if (p < 1.0) throw std::invalid_argument("omega_tp_explicit: requires p >= 1");
  DVec out;
  const double n2 = l2Norm(x);
  if (n2 == 0.0) return out;
  // 1/p + 1/q = 1; the coefficient 2/q - 2/p = 2 - 4/p vanishes at p = 2.
  const double coeff = 2.0 - 4.0 / p;
  if (coeff == 0.0) return out;
  for (const auto& [j, v] : x.entries()) {
    out.set(j, coeff * v * std::log(std::abs(v) / n2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

namespace oracles {

NormOracle l1() {
  NormOracle o;
  o.name = "l1";
  o.eval = [](const DVec& x) {
    NormEval e;
    for (const auto& [j, v] : x.entries()) {
      e.value += std::abs(v);
      e.functional.set(j, v < 0 ? -1.0 : 1.0);
    }
    return e;
  };
  return o;
}

NormOracle l2() {
  NormOracle o;
  o.name = "l2";
  o.eval = [](const DVec& x) {
    NormEval e;
    e.value = l2Norm(x);
    if (e.value > 0) {
      e.functional = x;
      e.functional *= 1.0 / e.value;
    }
    return e;
  };
  return o;
}

NormOracle linf() {
  NormOracle o;
  o.name = "linf";
  o.eval = [](const DVec& x) {
    NormEval e;
    int arg = 0;
    for (const auto& [j, v] : x.entries()) {
      if (std::abs(v) > e.value) {
        e.value = std::abs(v);
        arg = j;
      }
    }
    if (arg > 0) e.functional.set(arg, x.get(arg) < 0 ? -1.0 : 1.0);
    return e;
  };
  return o;
}

NormOracle tsirelsonT(std::shared_ptr<tsirelson::Engine> engine) {
  NormOracle o;
  o.name = "T";
  o.eval = [engine](const DVec& x) {
    NormEval e;
    e.value = engine->normT(x, e.functional);
    return e;
  };
  return o;
}

NormOracle tsirelsonT2(std::shared_ptr<tsirelson::Engine> engine) {
  NormOracle o;
  o.name = "T2";
  o.eval = [engine](const DVec& x) {
    NormEval e;
    DVec sq;
    for (const auto& [j, v] : x.entries()) sq.set(j, v * v);
    DVec shape;
    const double t = engine->normT(sq, shape);
    e.value = std::sqrt(t);
    if (e.value > 0) {
      for (const auto& [j, c] : shape.entries()) {
        e.functional.set(j, c * x.get(j) / e.value);
      }
    }
    return e;
  };
  return o;
}

NormOracle tsirelsonT2Dual(std::shared_ptr<tsirelson::Engine> engine, double tol, int maxIter) {
  auto warm = std::make_shared<DVec>();
  NormOracle o;
  o.name = "T2*";
  o.eval = [engine, warm, tol, maxIter](const DVec& x) {
    NormEval e;
    DVec maximizer;
    auto cert = engine->dualNormT2(x, tol, maxIter, warm.get(), &maximizer);
    // report the feasible-witness value so that <functional, x> = value
    e.functional = maximizer;
    e.value = dot(x, maximizer);
    if (e.value <= 0.0) e.value = cert.value;
    e.upper = cert.value;
    return e;
  };
  o.resetState = [warm]() { *warm = DVec{}; };
  return o;
}

}  // namespace oracles

// ---------------------------------------------------------------------------
// Factorization solver
// ---------------------------------------------------------------------------

FactorizationResult lozanovskii_factorize(const DVec& x, const NormOracle& norm0,
                                          const NormOracle& norm1,
                                          const FactorizationParams& params) {
  if (x.empty()) throw std::invalid_argument("lozanovskii_factorize: zero vector");
  norm0.reset();
  norm1.reset();

  std::vector<int> supp;
  std::vector<double> ax;
  for (const auto& [j, v] : x.entries()) {
    supp.push_back(j);
    ax.push_back(std::abs(v));
  }
  const int m = static_cast<int>(supp.size());

  std::vector<double> u(m);
  if (params.initW0) {
    for (int i = 0; i < m; ++i) {
      double w = params.initW0->get(supp[i]);
      if (w <= 0.0) {
        throw std::invalid_argument("lozanovskii_factorize: initW0 must be positive on supp x");
      }
      u[i] = std::log(w);
    }
  } else {
    for (int i = 0; i < m; ++i) u[i] = std::log(ax[i]);
  }

  auto weightsAt = [&](const std::vector<double>& uu) {
    DVec w0, w1;
    for (int i = 0; i < m; ++i) {
      const double w = std::exp(uu[i]);
      w0.set(supp[i], w);
      w1.set(supp[i], ax[i] * ax[i] / w);
    }
    return std::pair{w0, w1};
  };

  double bestBal = std::numeric_limits<double>::infinity();
  std::vector<double> bestU = u;
  std::vector<double> history;
  history.reserve(1024);

  const int cap = params.fixedIters > 0 ? params.fixedIters : params.maxIters;
  int it = 1;
  bool converged = params.fixedIters > 0;
  for (; it <= cap; ++it) {
    auto [w0, w1] = weightsAt(u);
    NormEval e0 = norm0.eval(w0);
    NormEval e1 = norm1.eval(w1);
    const double bal = std::sqrt(e0.value * e1.value);
    if (bal < bestBal) {
      bestBal = bal;
      bestU = u;
    }
    history.push_back(bestBal);
    if (params.fixedIters == 0 && it > params.improveWindow) {
      if (history[it - 1 - params.improveWindow] - bestBal < params.improveTol) {
        converged = true;
        break;
      }
    }

    // subgradient of log||e^u||_{X0} + log||x^2 e^{-u}||_{X1}
    std::vector<double> grad(m, 0.0);
    double gn = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d0 = e0.functional.get(supp[i]) * w0.get(supp[i]) / std::max(e0.value, 1e-300);
      const double d1 = e1.functional.get(supp[i]) * w1.get(supp[i]) / std::max(e1.value, 1e-300);
      grad[i] = d0 - d1;
      gn += grad[i] * grad[i];
    }
    gn = std::sqrt(gn);
    if (gn < 1e-14) {
      converged = true;
      break;
    }
    const double step = 1.0 / std::sqrt(static_cast<double>(it));
    for (int i = 0; i < m; ++i) u[i] -= step * grad[i] / gn;
  }

  // rebalance the best iterate so both norms agree with the geometric mean;
  // the reported objective uses the oracles' certified upper bounds, so it
  // stays a valid selection bound at any solver budget
  auto [w0, w1] = weightsAt(bestU);
  NormEval e0 = norm0.eval(w0);
  NormEval e1 = norm1.eval(w1);
  const double s = std::sqrt(e1.value / e0.value);
  w0 *= s;
  w1 *= 1.0 / s;

  FactorizationResult res;
  res.w0 = w0;
  res.w1 = w1;
  res.objective = std::max(s * e0.certifiedUpper(), e1.certifiedUpper() / s);
  res.iterations = it;
  double resid = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d0 = e0.functional.get(supp[i]) * w0.get(supp[i]) / (s * std::max(e0.value, 1e-300));
    const double d1 =
        s * e1.functional.get(supp[i]) * w1.get(supp[i]) / std::max(e1.value, 1e-300);
    resid += (d0 - d1) * (d0 - d1);
  }
  res.kktResidual = std::sqrt(resid);

  if (!converged) {
    throw FactorizationError("lozanovskii_factorize: iteration cap reached before convergence",
                             res);
  }
  return res;
}

DVec omega_from_factorization(const DVec& x, const FactorizationResult& fr) {
  DVec out;
  for (const auto& [j, v] : x.entries()) {
    const double w0 = fr.w0.get(j);
    const double w1 = fr.w1.get(j);
    if (w0 <= 0.0 || w1 <= 0.0) {
      throw std::invalid_argument("omega_from_factorization: factorization degenerate on supp x");
    }
    const double r = std::log(w1 / w0);
    if (r != 0.0) out.set(j, v * r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CentralizerSpec
// ---------------------------------------------------------------------------

CentralizerSpec CentralizerSpec::zero() { return CentralizerSpec{}; }

CentralizerSpec CentralizerSpec::kaltonPeck(PhiSpec phi) {
  CentralizerSpec s;
  s.kind_ = Kind::KaltonPeck;
  s.phi_ = std::move(phi);
  s.name_ = "kalton-peck(" + s.phi_.name() + ")";
  return s;
}

CentralizerSpec CentralizerSpec::tpExplicit(double p) {
  if (p < 1.0) throw std::invalid_argument("CentralizerSpec::tpExplicit: requires p >= 1");
  CentralizerSpec s;
  s.kind_ = Kind::TpExplicit;
  s.p_ = p;
  s.name_ = "tp-couple(p=" + std::to_string(p) + ")";
  return s;
}

CentralizerSpec CentralizerSpec::factorization(NormOracle norm0, NormOracle norm1,
                                               int solverIters) {
  CentralizerSpec s;
  s.kind_ = Kind::Factorization;
  s.norm0_ = std::move(norm0);
  s.norm1_ = std::move(norm1);
  s.solverIters_ = solverIters;
  s.name_ = "factorization(" + s.norm0_.name + "," + s.norm1_.name + ")";
  return s;
}

CentralizerSpec CentralizerSpec::negated() const {
  CentralizerSpec s = *this;
  s.negated_ = !s.negated_;
  s.name_ = s.negated_ ? "-" + name_ : name_.substr(1);
  return s;
}

DVec CentralizerSpec::apply(const DVec& y) const {
  DVec out;
  switch (kind_) {
    case Kind::Zero:
      break;
    case Kind::KaltonPeck:
      out = kalton_peck_omega(y, phi_);
      break;
    case Kind::TpExplicit:
      out = omega_tp_explicit(y, p_);
      break;
    case Kind::Factorization: {
      if (y.empty()) break;
      const double n2 = l2Norm(y);
      // Quantize the normalized modulus to 40 mantissa bits: inputs on the
      // same ray then hit the identical solver trajectory, so homogeneity and
      // sign-equivariance hold to the last bit instead of drifting through
      // argmax switches.
      auto quantize = [](double v) {
        int e = 0;
        const double m = std::frexp(v, &e);
        return std::ldexp(std::round(m * 1099511627776.0) / 1099511627776.0, e);
      };
      DVec unitAbs;
      for (const auto& [j, v] : y.entries()) unitAbs.set(j, quantize(std::abs(v) / n2));
      FactorizationParams params;
      params.fixedIters = solverIters_;
      FactorizationResult fr = lozanovskii_factorize(unitAbs, norm0_, norm1_, params);
      // certified selection bound at this input: ||unitAbs||_2 = 1
      if (fr.objective > *rho_) *rho_ = fr.objective;
      for (const auto& [j, v] : y.entries()) {
        const double r = std::log(fr.w1.get(j) / fr.w0.get(j));
        if (r != 0.0) out.set(j, v * r);
      }
      break;
    }
  }
  if (negated_) out *= -1.0;
  return out;
}

double CentralizerSpec::observedRho() const { return *rho_; }
void CentralizerSpec::resetObservedRho() const { *rho_ = 0.0; }

// ---------------------------------------------------------------------------
// Delta estimation
// ---------------------------------------------------------------------------

namespace {
DVec cwiseProduct(const DVec& a, const DVec& b) {
  DVec out;
  for (const auto& [j, v] : a.entries()) {
    const double w = b.get(j);
    if (w != 0.0 && v != 0.0) out.set(j, v * w);
  }
  return out;
}
}  // namespace

DeltaEstimate estimate_delta(const CentralizerSpec& omega, int dim, int samples,
                             std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_delta: samples must be >= 1");
  omega.resetObservedRho();
  DeltaEstimate est;
  est.samples = samples;
  for (int i = 0; i < samples; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    DVec x;
    for (int j = 1; j <= dim; ++j) x.set(j, rng.gaussian());
    DVec a;
    switch (i % 3) {
      case 0:
        for (int j = 1; j <= dim; ++j) a.set(j, static_cast<double>(rng.sign()));
        break;
      case 1:
        for (int j = 1; j <= dim; ++j) {
          if (rng.coin()) a.set(j, 1.0);
        }
        if (a.empty()) a.set(1, 1.0);
        break;
      default:
        for (int j = 1; j <= dim; ++j) a.set(j, rng.uniform(-1.0, 1.0));
        break;
    }
    const DVec ax = cwiseProduct(a, x);
    const DVec lhs = omega.apply(ax) - cwiseProduct(a, omega.apply(x));
    const double den = linfNorm(a) * l2Norm(x);
    if (den <= 0.0) continue;
    est.delta = std::max(est.delta, l2Norm(lhs) / den);
  }
  est.rho = omega.observedRho();
  return est;
}

}  // namespace twistlab::centralizer
