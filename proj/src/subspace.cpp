#include "twistlab/subspace.hpp"

namespace twistlab::linalg {

Eigen::MatrixXd orthonormalColumns(const Eigen::MatrixXd& a, double tol) {
  if (a.cols() == 0 || a.rows() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cut = s.size() ? s(0) * tol : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > tol) ++r;
  }
  return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = s.size() ? std::max(s(0) * tol, tol) : tol;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return svd.matrixV().rightCols(a.cols() - r);
}

int rank(const Eigen::MatrixXd& a, double tol) {
  if (a.cols() == 0 || a.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double cut = std::max(s(0) * tol, tol);
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

}  // namespace twistlab::linalg
