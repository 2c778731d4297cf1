#include "dense_solve.hpp"

#include <cmath>
#include <sstream>

#include "polishkrige/error.hpp"

namespace polishkrige::detail {

DenseSolver::DenseSolver(Eigen::MatrixXd matrix, const std::string& what) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorCategory::invalid_argument, what + ": matrix must be square and non-empty");
  }
  lu_.compute(matrix_);
  rcond_ = lu_.rcond();
  if (!(rcond_ >= kMinRcond) || !std::isfinite(rcond_)) {
    std::ostringstream os;
    os << what << ": numerically singular system (reciprocal condition estimate " << rcond_ << ")";
    throw SingularSystemError(os.str(), std::isfinite(rcond_) ? rcond_ : 0.0);
  }
}

Eigen::VectorXd DenseSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_.solve(rhs);
  const Eigen::Index n = matrix_.rows();
  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    long double acc = rhs[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      acc -= static_cast<long double>(matrix_(i, j)) * static_cast<long double>(x[j]);
    }
    residual[i] = static_cast<double>(acc);
  }
  x += lu_.solve(residual);
  return x;
}

}  // namespace polishkrige::detail
