#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "twistlab/centralizer.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab::jl {

/// n >= 2 points inside the section [v_1 .. v_sectionN].
struct PointCloud {
  std::vector<twisted::TwistedVector> points;
  int sectionN = 0;

  int n() const { return static_cast<int>(points.size()); }
  void validate() const;
};

struct SplitResult {
  int headDim = 0;  // head cutoff [log n] in v-indices
  std::vector<twisted::TwistedVector> e1Basis;
  std::vector<twisted::TwistedVector> e2Basis;
  double distortionE2 = 1.0;  // cHigh/cLow of the coordinate map on E2

  // dense orthonormal bases kept for the compression map
  Eigen::MatrixXd e1;  // ambient x dim(E1)
  Eigen::MatrixXd e2;  // ambient x dim(E2)
  int ambient = 0;
};

/// Splits E = span of pairwise differences into the tail intersection
/// E2 = E /\ [v_j : j > headDim] and its orthocomplement E1 inside E (so that
/// E = E1 (+) E2 holds exactly; dim E1 <= headDim always). distortionE2 is the
/// spread of quasi_norm / coordinate-l2 over sampled unit vectors of E2, the
/// computable surrogate for being uniformly Euclidean.
SplitResult log_split(const PointCloud& cloud, const centralizer::CentralizerSpec& omega);

struct JlMapDescription {
  int targetDim = 0;
  int identityDim = 0;   // = dim E1
  int gaussianRows = 0;  // = targetDim - dim E1
  std::uint64_t seed = 0;
};

struct JlCompression {
  JlMapDescription map;
  double distortion = 1.0;  // (max pair ratio) / (min pair ratio)
};

struct JlConfig {
  double c = 4.0;  // the O(log n) target floor is headDim + c log n
};

/// L = identity on E1, seeded Gaussian projection (entry variance
/// 1/targetDim) composed with the coordinate map on E2. Distortion compares
/// image l2 distances against source quasi-norm distances over all pairs.
JlCompression jl_compress(const PointCloud& cloud, const SplitResult& split, int targetDim,
                          std::uint64_t seed, const centralizer::CentralizerSpec& omega,
                          const JlConfig& config = {});

}  // namespace twistlab::jl
