#pragma once

#include <Eigen/Core>

namespace lexalign {

enum class ConstraintDomain { Orthogonal, SpectralBall, Unconstrained };

/// The d x d alignment map together with the domain it was solved over.
/// Orthogonal maps satisfy ||W^T W - I||_max <= 1e-6; spectral-ball maps have
/// largest singular value <= 1 + 1e-6.
struct MappingMatrix {
  Eigen::MatrixXd w;
  ConstraintDomain constraint = ConstraintDomain::Unconstrained;
};

/// Unconstrained least squares: W minimizing (1/n) sum ||W x_i - y_i||^2,
/// via the normal equations; pseudo-inverse when X^T X is singular.
/// X and Y are n x d with one seed vector per row.
MappingMatrix least_squares_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Orthogonal Procrustes: W = U V^T from the SVD of Y^T X. Minimizes the
/// same objective over orthogonal matrices.
MappingMatrix procrustes_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace lexalign
