#pragma once

#include <Eigen/Dense>
#include <string>

namespace polishkrige::detail {

/// Partial-pivoting LU with a reciprocal-condition guard and one round of
/// iterative refinement carried out with long-double residuals.
class DenseSolver {
 public:
  static constexpr double kMinRcond = 1e-14;

  /// Throws SingularSystemError (tagged with `what`) if rcond < kMinRcond.
  DenseSolver(Eigen::MatrixXd matrix, const std::string& what);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  double rcond() const noexcept { return rcond_; }
  Eigen::Index size() const noexcept { return matrix_.rows(); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

}  // namespace polishkrige::detail
