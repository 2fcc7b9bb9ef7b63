#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mbnoma/common.hpp"

namespace mbnoma {

/// Inputs of the power-allocation stage: squared effective gains
/// |h~_k^H g_r|^2 (users x chains), the scheduling mask (1 where user k rides
/// chain r; row sums <= 1, column sums <= 2), and the noise floor in mW.
struct RateParams {
  RMatrix gain;
  IMatrix mask;
  double noise_mw = 0.0;

  int num_users() const { return static_cast<int>(gain.rows()); }
  int num_chains() const { return static_cast<int>(gain.cols()); }
  void validate() const;
};

/// Decoding-stage rate: the stronger (lower-index) user strong decodes the
/// weaker user weak's message on chain; must not fall below the weaker
/// user's own rate for cancellation to work.
struct SicRate {
  int strong = 0;  // row indices into gain/mask
  int weak = 0;
  int chain = 0;
  double rate = 0.0;
};

struct RateReport {
  RMatrix individual;        // users x chains, zero where unscheduled
  RVector per_user;
  std::vector<SicRate> sic;  // one entry per two-user chain
  double sum_rate = 0.0;
};

/// Evaluates the achievable rates at a power matrix (mW, users x chains).
RateReport rate_report(const RateParams& params, const RMatrix& p);

/// Difference-of-concave split of the sum rate: sum_rate = h2 - h1 with both
/// terms of the form -sum log2(affine in p), plus the closed-form gradient of
/// h2 (zero at unscheduled entries).
struct DcParts {
  double h1 = 0.0;
  double h2 = 0.0;
  RMatrix grad_h2;
};

DcParts dc_objective_parts(const RateParams& params, const RMatrix& p);

/// Phase-one verdicts. Users/chains carry 0-based indices.
struct InfeasibleQosError : std::runtime_error {
  explicit InfeasibleQosError(std::vector<int> bad_users)
      : std::runtime_error("power allocation: rate floors unreachable"),
        users(std::move(bad_users)) {}
  std::vector<int> users;
};

struct InfeasibleSicError : std::runtime_error {
  explicit InfeasibleSicError(std::vector<int> bad_chains)
      : std::runtime_error("power allocation: decoding-order constraints unreachable"),
        chains(std::move(bad_chains)) {}
  std::vector<int> chains;
};

struct SolveOptions {
  double mu0 = 1.0;          // initial barrier weight (normalized problem)
  double mu_min = 1e-9;      // final weight; complementarity residual at exit
  double mu_shrink = 0.1;
  double newton_tol = 1e-10;  // stage ends when decrement^2/2 drops below
  int newton_max = 80;        // per stage
  int sca_iter_max = 30;
};

struct SolveInfo {
  double kkt_stationarity = 0.0;    // ||grad f + A^T lambda||_inf / (1 + ||grad f||_inf)
  double kkt_complementarity = 0.0; // max_j lambda_j * (-c_j)
};

/// One convex step: minimizes h1(p) - <grad_h2(p_ref), p> subject to the
/// nonnegativity, budget, decoding-order and rate-floor constraints, via a
/// primal log-barrier method started from p_ref (phase-one runs first if
/// p_ref is not strictly feasible). Every returned entry satisfies the
/// constraints with slack >= -1e-8.
RMatrix solve_subproblem(const RateParams& params, const std::vector<double>& r_min,
                         double p_bs_mw, const RMatrix& p_ref, SolveInfo* info = nullptr,
                         const SolveOptions& opts = {});

struct PowerResult {
  RMatrix p;
  std::vector<double> trace;  // sum rate after init and after each step
  int iterations = 0;
  bool converged = false;
  bool qos_dropped = false;   // rate floors removed after phase-one failure
  bool sic_dropped = false;   // decoding-order rows removed as a last resort
  SolveInfo info;
};

/// Successive convex approximation: feasibility phase, then init at the
/// argmin of h1, then repeated subproblems until the step norm falls below
/// 1e-3*sqrt(p_bs) or the iteration cap. Infeasible rate floors degrade to a
/// flagged re-solve without them (and without the decoding rows if still
/// infeasible) so every drop yields a comparable allocation.
PowerResult sca_power_allocation(const RateParams& params, const std::vector<double>& r_min,
                                 double p_bs_mw, const SolveOptions& opts = {});

}  // namespace mbnoma
