#pragma once

#include <vector>

namespace twistlab {

struct LpResult {
  enum class Status { Optimal, Unbounded, IterLimit };
  Status status = Status::Optimal;
  double value = 0.0;
  std::vector<double> x;     // primal solution
  std::vector<double> dual;  // row multipliers (>= 0)
};

/// Dense primal simplex for  max c'x  s.t.  Ax <= b, x >= 0  with b >= 0.
///
/// The nonnegative right-hand side makes the slack basis feasible, which is
/// all the cutting-plane and Kelley masters in this project ever need. Dantzig
/// pricing with a Bland fallback against cycling.
LpResult simplexSolve(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                      const std::vector<double>& c, int maxIter = 50000);

}  // namespace twistlab
