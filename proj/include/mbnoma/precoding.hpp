#pragma once

#include <stdexcept>

#include "mbnoma/common.hpp"

namespace mbnoma {

/// Thrown when the stacked equivalent channel is too close to singular for a
/// trustworthy zero-forcing inverse; callers drop the sample.
struct IllConditionedError : std::runtime_error {
  explicit IllConditionedError(double cond)
      : std::runtime_error("zf_precoder: condition number " + std::to_string(cond) +
                           " exceeds the cap"),
        condition(cond) {}
  double condition;
};

/// Collapses one group's effective channel columns (num_chains x group_size)
/// to a single vector: the column itself for a singleton, otherwise the
/// dominant-direction combination H u1 where u1 is the leading left singular
/// vector of H^H. u1's first significant entry is rotated real positive so
/// repeated calls agree to the bit. The result's norm equals the largest
/// singular value of the input.
CVector group_equivalent_channel(const CMatrix& group_columns);

/// Unit-column zero-forcing precoder G for the stacked equivalent channels
/// h_hat (num_chains x num_groups, num_groups <= num_chains): h_hat^H G is
/// diagonal with strictly positive real entries. Throws IllConditionedError
/// when sigma_max/sigma_min exceeds cond_cap.
CMatrix zf_precoder(const CMatrix& h_hat, double cond_cap = 1e8);

}  // namespace mbnoma
