#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "mbnoma/power.hpp"

using namespace mbnoma;

namespace {

// Random scheduled instance: users x chains, at most two riders per chain.
RateParams random_params(int users, int chains, std::mt19937_64& rng,
                         double exp_low = -8.0, double exp_high = -5.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  RateParams p;
  p.noise_mw = 1e-8;
  p.gain.resize(users, chains);
  p.mask = IMatrix::Zero(users, chains);
  for (int k = 0; k < users; ++k)
    for (int c = 0; c < chains; ++c)
      p.gain(k, c) = std::pow(10.0, exp_low + (exp_high - exp_low) * uni(rng));

  std::vector<int> slots;
  for (int c = 0; c < chains; ++c) {
    slots.push_back(c);
    slots.push_back(c);
  }
  std::shuffle(slots.begin(), slots.end(), rng);
  size_t next = 0;
  for (int k = 0; k < users && next < slots.size(); ++k) p.mask(k, slots[next++]) = 1;
  return p;
}

RMatrix spread_power(const RateParams& params, double p_bs) {
  int scheduled = params.mask.sum();
  RMatrix p = RMatrix::Zero(params.num_users(), params.num_chains());
  for (int k = 0; k < params.num_users(); ++k)
    for (int c = 0; c < params.num_chains(); ++c)
      if (params.mask(k, c)) p(k, c) = p_bs / (2.0 * scheduled);
  return p;
}

}  // namespace

TEST_CASE("two users sharing a beam: every rate term matches hand arithmetic") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 1);
  params.gain << 4e-6, 1e-6;
  params.mask = IMatrix::Ones(2, 1);
  RMatrix p(2, 1);
  p << 100.0, 300.0;

  const RateReport rr = rate_report(params, p);

  const double r_strong = std::log2(1.0 + 4e-6 * 100.0 / 1e-8);
  const double r_weak = std::log2(1.0 + 1e-6 * 300.0 / (1e-6 * 100.0 + 1e-8));
  const double r_cancel = std::log2(1.0 + 4e-6 * 300.0 / (4e-6 * 100.0 + 1e-8));

  CHECK(rr.individual(0, 0) == doctest::Approx(r_strong).epsilon(1e-12));
  CHECK(rr.individual(1, 0) == doctest::Approx(r_weak).epsilon(1e-12));
  CHECK(rr.per_user(0) == doctest::Approx(r_strong).epsilon(1e-12));
  CHECK(rr.per_user(1) == doctest::Approx(r_weak).epsilon(1e-12));
  CHECK(rr.sum_rate == doctest::Approx(r_strong + r_weak).epsilon(1e-12));

  REQUIRE(rr.sic.size() == 1);
  CHECK(rr.sic[0].strong == 0);
  CHECK(rr.sic[0].weak == 1);
  CHECK(rr.sic[0].chain == 0);
  CHECK(rr.sic[0].rate == doctest::Approx(r_cancel).epsilon(1e-12));
}

TEST_CASE("cross-beam interference enters every denominator") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 2);
  params.gain << 5e-6, 2e-7,  // user 0: beam 0 strong, beam 1 leakage
      3e-7, 3e-6;             // user 1: beam 1 strong, beam 0 leakage
  params.mask = IMatrix::Zero(2, 2);
  params.mask(0, 0) = 1;
  params.mask(1, 1) = 1;
  RMatrix p = RMatrix::Zero(2, 2);
  p(0, 0) = 400.0;
  p(1, 1) = 500.0;

  const RateReport rr = rate_report(params, p);
  const double r0 = std::log2(1.0 + 5e-6 * 400.0 / (2e-7 * 500.0 + 1e-8));
  const double r1 = std::log2(1.0 + 3e-6 * 500.0 / (3e-7 * 400.0 + 1e-8));
  CHECK(rr.per_user(0) == doctest::Approx(r0).epsilon(1e-12));
  CHECK(rr.per_user(1) == doctest::Approx(r1).epsilon(1e-12));
  CHECK(rr.sic.empty());
}

TEST_CASE("parameter validation rejects impossible schedules") {
  RateParams p;
  p.noise_mw = 1e-8;
  p.gain = RMatrix::Ones(3, 2) * 1e-6;

  p.mask = IMatrix::Zero(3, 2);
  p.mask(0, 0) = 1;
  p.mask(0, 1) = 1;  // one user on two beams
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p.mask = IMatrix::Zero(3, 2);
  p.mask(0, 0) = p.mask(1, 0) = p.mask(2, 0) = 1;  // three riders on one beam
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p.mask = IMatrix::Zero(3, 2);
  p.mask(0, 0) = 2;  // mask must be 0/1
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p.mask = IMatrix::Zero(3, 2);
  p.mask(0, 0) = p.mask(1, 0) = p.mask(2, 1) = 1;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("the concave-minus-concave split reproduces the sum rate") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 20; ++t) {
    const RateParams params = random_params(3 + int(rng() % 2), 2 + int(rng() % 2), rng);
    const RMatrix p = spread_power(params, 1000.0);
    const DcParts parts = dc_objective_parts(params, p);
    const double direct = rate_report(params, p).sum_rate;
    CHECK(parts.h2 - parts.h1 == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("closed-form gradient agrees with central differences") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const RateParams params = random_params(4, 2, rng);
    const RMatrix p = spread_power(params, 1000.0);
    const DcParts parts = dc_objective_parts(params, p);
    const double h = 1e-3;
    for (int k = 0; k < 4; ++k) {
      for (int c = 0; c < 2; ++c) {
        if (!params.mask(k, c)) {
          CHECK(parts.grad_h2(k, c) == 0.0);
          continue;
        }
        RMatrix pp = p, pm = p;
        pp(k, c) += h;
        pm(k, c) -= h;
        const double fd =
            (dc_objective_parts(params, pp).h2 - dc_objective_parts(params, pm).h2) / (2.0 * h);
        CHECK(parts.grad_h2(k, c) ==
              doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1e-3));
      }
    }
  }
}

TEST_CASE("a lone user is driven to the full budget") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain = RMatrix::Ones(1, 1) * 2e-6;
  params.mask = IMatrix::Ones(1, 1);
  const double p_bs = 1000.0;

  const PowerResult res = sca_power_allocation(params, {0.0}, p_bs);
  CHECK(res.converged);
  CHECK(res.p(0, 0) == doctest::Approx(p_bs).epsilon(1e-6));
  const double cap = std::log2(1.0 + 2e-6 * p_bs / 1e-8);
  CHECK(rate_report(params, res.p).sum_rate == doctest::Approx(cap).epsilon(1e-6));
}

TEST_CASE("interference-free private beams recover water-filling") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 2);
  params.gain << 4e-6, 0.0, 0.0, 5e-7;
  params.mask = IMatrix::Zero(2, 2);
  params.mask(0, 0) = 1;
  params.mask(1, 1) = 1;
  const double p_bs = 1000.0;

  // Independent oracle: bisection on the water level.
  const double g0 = 4e-6 / 1e-8, g1 = 5e-7 / 1e-8;  // per-mW SNR slopes
  double lo = 0.0, hi = 1e9;
  for (int it = 0; it < 200; ++it) {
    const double level = 0.5 * (lo + hi);
    const double used = std::max(0.0, level - 1.0 / g0) + std::max(0.0, level - 1.0 / g1);
    (used > p_bs ? hi : lo) = level;
  }
  const double level = 0.5 * (lo + hi);
  const double p0 = std::max(0.0, level - 1.0 / g0);
  const double p1 = std::max(0.0, level - 1.0 / g1);

  const PowerResult res = sca_power_allocation(params, {0.0, 0.0}, p_bs);
  CHECK(res.converged);
  CHECK(res.iterations <= 3);  // the subproblem is already exact here
  CHECK(res.p(0, 0) == doctest::Approx(p0).epsilon(2e-4));
  CHECK(res.p(1, 1) == doctest::Approx(p1).epsilon(2e-4));
  CHECK(res.p(0, 1) <= 1e-6 * p_bs);
  CHECK(res.p(1, 0) <= 1e-6 * p_bs);
}

TEST_CASE("allocations are feasible, monotone along the trace, and first-order optimal") {
  std::mt19937_64 rng(19);
  const double p_bs = 1000.0;
  for (int t = 0; t < 12; ++t) {
    const RateParams params = random_params(4, 2, rng);
    const PowerResult res = sca_power_allocation(params, std::vector<double>(4, 0.0), p_bs);

    // Nearly tied splits leave the objective flat along whole faces, where the
    // step criterion may legitimately run into the iteration cap.
    CHECK((res.converged || res.iterations == SolveOptions{}.sca_iter_max));
    CHECK((res.p.array() >= -1e-12).all());
    CHECK(res.p.sum() <= p_bs * (1.0 + 1e-9));
    for (int k = 0; k < 4; ++k)
      for (int c = 0; c < 2; ++c)
        if (!params.mask(k, c)) CHECK(res.p(k, c) == 0.0);

    REQUIRE(res.trace.size() >= 1);
    for (size_t i = 1; i < res.trace.size(); ++i)
      CHECK(res.trace[i] >= res.trace[i - 1] - 1e-7 * (1.0 + std::abs(res.trace[i - 1])));

    // The decode-order guarantee is only owed when its constraints were kept.
    if (!res.sic_dropped) {
      const RateReport rr = rate_report(params, res.p);
      for (const SicRate& s : rr.sic)
        CHECK(s.rate >= rr.individual(s.weak, s.chain) - 1e-6);
    }

    CHECK(res.info.kkt_complementarity <= 1e-6);
    CHECK(res.info.kkt_stationarity <= 1e-6);
  }
}

TEST_CASE("active rate floors bend the allocation and stay met") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 1);
  params.gain << 6e-6, 8e-7;
  params.mask = IMatrix::Ones(2, 1);
  const double p_bs = 1000.0;

  const PowerResult loose = sca_power_allocation(params, {0.0, 0.0}, p_bs);
  const double floor_w = 2.0;
  const PowerResult tight = sca_power_allocation(params, {0.0, floor_w}, p_bs);

  CHECK(!tight.qos_dropped);
  CHECK(!tight.sic_dropped);
  const RateReport rr = rate_report(params, tight.p);
  CHECK(rr.per_user(1) >= floor_w - 1e-6);
  // The floor binds: the weak user needs more power than the loose optimum gave.
  CHECK(rate_report(params, loose.p).per_user(1) < floor_w);
  CHECK(tight.p(1, 0) > loose.p(1, 0));
}

TEST_CASE("unreachable rate floors raise a typed verdict and a flagged fallback") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 1);
  params.gain << 6e-6, 8e-7;
  params.mask = IMatrix::Ones(2, 1);
  const double p_bs = 1000.0;
  const std::vector<double> absurd = {0.0, 25.0};

  CHECK_THROWS_AS(solve_subproblem(params, absurd, p_bs, spread_power(params, p_bs)),
                  InfeasibleQosError);

  const PowerResult res = sca_power_allocation(params, absurd, p_bs);
  CHECK(res.qos_dropped);
  CHECK(!res.sic_dropped);
  CHECK(res.converged);
  CHECK(res.p.sum() <= p_bs * (1.0 + 1e-9));
}

TEST_CASE("an inverted decoding order is diagnosed and dropped as a last resort") {
  RateParams params;
  params.noise_mw = 1e-8;
  params.gain.resize(2, 1);
  params.gain << 8e-7, 6e-6;  // the nominally weaker rider has the better beam gain
  params.mask = IMatrix::Ones(2, 1);
  const double p_bs = 1000.0;

  const PowerResult res = sca_power_allocation(params, {0.0, 0.0}, p_bs);
  CHECK(res.sic_dropped);
  CHECK(res.converged);
  CHECK(res.p.sum() <= p_bs * (1.0 + 1e-9));
  CHECK(rate_report(params, res.p).sum_rate > 0.0);
}
