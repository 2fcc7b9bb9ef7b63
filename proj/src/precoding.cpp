#include "mbnoma/precoding.hpp"

#include <Eigen/SVD>
#include <limits>

namespace mbnoma {

CVector group_equivalent_channel(const CMatrix& group_columns) {
  if (group_columns.cols() < 1 || group_columns.rows() < 1)
    throw std::invalid_argument("group_equivalent_channel: empty input");
  if (group_columns.norm() == 0.0)
    throw std::invalid_argument("group_equivalent_channel: all-zero effective channel");
  if (group_columns.cols() == 1) return group_columns.col(0);

  // Dominant direction of the members' stacked rows.
  Eigen::JacobiSVD<CMatrix> svd(group_columns.adjoint(), Eigen::ComputeFullU);
  CVector u1 = svd.matrixU().col(0);
  for (Eigen::Index i = 0; i < u1.size(); ++i) {
    if (std::abs(u1(i)) > 1e-12) {
      u1 *= std::conj(u1(i)) / std::abs(u1(i));
      break;
    }
  }
  return group_columns * u1;
}

CMatrix zf_precoder(const CMatrix& h_hat, double cond_cap) {
  const Eigen::Index groups = h_hat.cols();
  if (groups < 1 || h_hat.rows() < groups)
    throw std::invalid_argument("zf_precoder: need num_chains >= num_groups >= 1");

  Eigen::JacobiSVD<CMatrix> svd(h_hat);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(groups - 1);
  if (!(smin > 0.0) || smax / smin > cond_cap)
    throw IllConditionedError(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());

  // Right inverse of h_hat^H, so h_hat^H g0 = I, then unit columns: the
  // diagonal becomes 1/||g0_col|| which stays real positive.
  const CMatrix gram = h_hat.adjoint() * h_hat;
  const CMatrix g0 = h_hat * gram.ldlt().solve(CMatrix::Identity(groups, groups));
  CMatrix g = g0;
  for (Eigen::Index c = 0; c < groups; ++c) g.col(c) /= g0.col(c).norm();
  return g;
}

}  // namespace mbnoma
