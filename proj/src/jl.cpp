#include "twistlab/jl.hpp"

#include <cmath>
#include <limits>

#include "twistlab/rng.hpp"
#include "twistlab/subspace.hpp"

namespace twistlab::jl {

void PointCloud::validate() const {
  if (n() < 2) throw std::invalid_argument("PointCloud: need at least 2 points");
  if (sectionN < 1) throw std::invalid_argument("PointCloud: section must be [v_1..v_N], N >= 1");
  for (const auto& p : points) {
    if (p.maxVIndex() > sectionN) {
      throw std::invalid_argument("PointCloud: point outside the declared section");
    }
  }
}

SplitResult log_split(const PointCloud& cloud, const centralizer::CentralizerSpec& omega) {
  cloud.validate();
  const int N = cloud.sectionN;

  // E = span of the pairwise differences (differences against the first
  // point span the same subspace).
  Eigen::MatrixXd diffs(N, cloud.n() - 1);
  const Eigen::VectorXd p0 = toCoords(cloud.points[0], N);
  for (int k = 1; k < cloud.n(); ++k) {
    diffs.col(k - 1) = toCoords(cloud.points[k], N) - p0;
  }
  const Eigen::MatrixXd basis = linalg::orthonormalColumns(diffs);
  if (basis.cols() == 0) {
    throw std::invalid_argument("log_split: degenerate cloud (all points equal)");
  }

  SplitResult res;
  res.ambient = N;
  res.headDim = static_cast<int>(std::floor(std::log(static_cast<double>(cloud.n()))));

  if (res.headDim >= N) {
    res.e2 = Eigen::MatrixXd(N, 0);
  } else if (res.headDim == 0) {
    res.e2 = basis;
  } else {
    const Eigen::MatrixXd headRows = basis.topRows(res.headDim);
    const Eigen::MatrixXd k = linalg::kernel(headRows);
    res.e2 = linalg::orthonormalColumns(basis * k);
  }
  // orthocomplement of E2 inside E; tops the paper's head intersection up so
  // that E = E1 (+) E2 holds for every cloud
  const Eigen::MatrixXd proj = basis - res.e2 * (res.e2.transpose() * basis);
  res.e1 = linalg::orthonormalColumns(proj);

  for (int c = 0; c < res.e1.cols(); ++c) res.e1Basis.push_back(twisted::fromCoords(res.e1.col(c)));
  for (int c = 0; c < res.e2.cols(); ++c) res.e2Basis.push_back(twisted::fromCoords(res.e2.col(c)));

  // coordinate-map distortion on E2
  if (res.e2.cols() == 0) {
    res.distortionE2 = 1.0;  // by convention for the trivial tail part
  } else {
    const int r = static_cast<int>(res.e2.cols());
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    Rng rng(Rng::derive(0x5EEDCAFEULL, static_cast<std::uint64_t>(N * 131 + r)));
    const int trials = 64 + 16 * r;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd c(r);
      if (t < r) {
        c.setZero();
        c(t) = 1.0;
      } else {
        for (int i = 0; i < r; ++i) c(i) = rng.gaussian();
        const double nc = c.norm();
        if (nc == 0.0) continue;
        c /= nc;
      }
      const twisted::TwistedVector u = twisted::fromCoords(res.e2 * c);
      const double q = twisted::quasi_norm(u, omega);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    res.distortionE2 = lo > 0 ? hi / lo : 1.0;
  }
  return res;
}

JlCompression jl_compress(const PointCloud& cloud, const SplitResult& split, int targetDim,
                          std::uint64_t seed, const centralizer::CentralizerSpec& omega,
                          const JlConfig& config) {
  cloud.validate();
  const int n = cloud.n();
  const double floorDim = split.headDim + config.c * std::log(static_cast<double>(n));
  if (targetDim < floorDim) {
    throw std::invalid_argument("jl_compress: targetDim " + std::to_string(targetDim) +
                                " below the floor headDim + c log n = " +
                                std::to_string(floorDim));
  }
  const int d1 = static_cast<int>(split.e1.cols());
  const int rows = targetDim - d1;
  if (rows < 1) {
    throw std::invalid_argument("jl_compress: no room left for the Gaussian block");
  }
  const int N = split.ambient;

  Rng rng(Rng::derive(seed, 0x6A55));
  const double sd = 1.0 / std::sqrt(static_cast<double>(targetDim));
  Eigen::MatrixXd g(rows, N);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < N; ++j) g(i, j) = sd * rng.gaussian();
  }
  const Eigen::MatrixXd gOnE2 = g * (split.e2 * split.e2.transpose());

  std::vector<Eigen::VectorXd> images;
  images.reserve(n);
  for (const auto& p : cloud.points) {
    const Eigen::VectorXd v = toCoords(p, N);
    Eigen::VectorXd img(d1 + rows);
    img.head(d1) = split.e1.transpose() * v;
    img.tail(rows) = gOnE2 * v;
    images.push_back(std::move(img));
  }

  double rLo = std::numeric_limits<double>::infinity(), rHi = 0.0;
  bool any = false;
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const double src = twisted::quasi_norm(cloud.points[i] - cloud.points[k], omega);
      if (src <= 0.0) continue;  // duplicate points constrain nothing
      const double ratio = (images[i] - images[k]).norm() / src;
      rLo = std::min(rLo, ratio);
      rHi = std::max(rHi, ratio);
      any = true;
    }
  }

  JlCompression out;
  out.map = {targetDim, d1, rows, seed};
  out.distortion = any && rLo > 0.0 ? rHi / rLo : 1.0;
  return out;
}

}  // namespace twistlab::jl
