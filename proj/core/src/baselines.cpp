#include "lexalign/baselines.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace lexalign {

MappingMatrix least_squares_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() == 0 || x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("least_squares_fit: X and Y must be nonempty n x d");
  }
  // Normal equations (X^T X) W^T = X^T Y. CompleteOrthogonalDecomposition
  // solves the full-rank case exactly and falls back to the pseudo-inverse
  // (minimum-norm solution) when X^T X is singular.
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::MatrixXd rhs = x.transpose() * y;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  MappingMatrix map;
  map.w = cod.solve(rhs).transpose();
  map.constraint = ConstraintDomain::Unconstrained;
  return map;
}

MappingMatrix procrustes_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() == 0 || x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("procrustes_fit: X and Y must be nonempty n x d");
  }
  const Eigen::MatrixXd m = y.transpose() * x;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MappingMatrix map;
  map.w = svd.matrixU() * svd.matrixV().transpose();
  map.constraint = ConstraintDomain::Orthogonal;
  return map;
}

}  // namespace lexalign
