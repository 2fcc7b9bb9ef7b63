#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "mbnoma/baselines.hpp"
#include "mbnoma/common.hpp"
#include "mbnoma/precoding.hpp"

using namespace mbnoma;

namespace {

std::vector<UserChannel> drop(const DropConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_drop(cfg, rng);
}

// Pushes the departure angles apart so no two users can share a beam.
void separate_aods(std::vector<UserChannel>& users, int m_bs) {
  const double width = pairing_beamwidth_rad(m_bs);
  for (size_t k = 0; k < users.size(); ++k)
    users[k].los.aod = 0.3 + 3.0 * width * static_cast<double>(k);
}

}  // namespace

TEST_CASE("half-power beamwidth shrinks inversely with the array") {
  CHECK(pairing_beamwidth_rad(100) == doctest::Approx(deg_to_rad(1.021)).epsilon(1e-12));
  CHECK(pairing_beamwidth_rad(50) == doctest::Approx(deg_to_rad(102.1 / 50.0)).epsilon(1e-12));
}

TEST_CASE("orthogonal baseline fits one slot when the chains suffice") {
  DropConfig cfg;
  cfg.num_users = 3;
  cfg.num_rf_chains = 3;
  const auto users = drop(cfg, 111);
  const std::vector<double> floors(3, 0.0);

  const SchemeOutcome out = run_oma(users, cfg, floors);
  REQUIRE(out.slots.size() == 1);
  REQUIRE(out.slot_duty == std::vector<double>{1.0});
  CHECK(out.slots[0].served_ids == std::vector<int>{1, 2, 3});
  CHECK(out.sum_rate == doctest::Approx(out.slots[0].report.sum_rate).epsilon(1e-12));
  CHECK(out.per_user.sum() == doctest::Approx(out.sum_rate).epsilon(1e-9));
  for (int k = 0; k < 3; ++k) CHECK(out.per_user(k) > 0.0);
}

TEST_CASE("overloaded orthogonal baseline alternates two half-duty slots") {
  DropConfig cfg;  // 7 users, 4 chains
  const auto users = drop(cfg, 113);
  const std::vector<double> floors(7, 0.0);

  const SchemeOutcome out = run_oma(users, cfg, floors);
  REQUIRE(out.slots.size() == 2);
  CHECK(out.slot_duty == std::vector<double>{0.5, 0.5});
  CHECK(out.slots[0].served_ids == std::vector<int>{1, 3, 5, 7});
  CHECK(out.slots[1].served_ids == std::vector<int>{2, 4, 6});
  CHECK(out.sum_rate ==
        doctest::Approx(0.5 * (out.slots[0].report.sum_rate + out.slots[1].report.sum_rate))
            .epsilon(1e-12));
  CHECK(out.per_user.sum() == doctest::Approx(out.sum_rate).epsilon(1e-9));
}

TEST_CASE("without shareable angles the superposition baseline collapses to orthogonal") {
  DropConfig cfg;
  cfg.num_users = 5;
  cfg.num_rf_chains = 3;
  auto users = drop(cfg, 115);
  separate_aods(users, cfg.m_bs);
  const std::vector<double> floors(5, 0.5);

  const SchemeOutcome oma = run_oma(users, cfg, floors);
  const SchemeOutcome sb = run_single_beam(users, cfg, floors);
  CHECK(sb.sum_rate == oma.sum_rate);
  for (int k = 0; k < 5; ++k) CHECK(sb.per_user(k) == oma.per_user(k));
  CHECK(sb.slots.size() == oma.slots.size());
}

TEST_CASE("close departure angles pair onto the stronger user's beam") {
  DropConfig cfg;
  cfg.num_users = 3;
  cfg.num_rf_chains = 2;
  auto users = drop(cfg, 117);
  const double width = pairing_beamwidth_rad(cfg.m_bs);
  users[0].los.aod = deg_to_rad(90.0);
  users[1].los.aod = deg_to_rad(90.0) + 0.4 * width;  // within one beamwidth of user 1
  users[2].los.aod = deg_to_rad(150.0);
  const std::vector<double> floors(3, 0.0);

  const SchemeOutcome out = run_single_beam(users, cfg, floors);
  REQUIRE(out.slots.size() == 1);  // two units fit the two chains
  REQUIRE(out.slots[0].served_ids == std::vector<int>{1, 2, 3});

  // Units are not exposed on the outcome, so infer the pairing from the
  // schedule shape: one of the two chains must carry two riders.
  bool found_pair = false;
  const IMatrix& mask = out.slots[0].params.mask;
  for (int c = 0; c < mask.cols(); ++c)
    if (mask.col(c).sum() == 2) found_pair = true;
  CHECK(found_pair);
}

TEST_CASE("pairing lets an overloaded cell fit a single slot") {
  DropConfig cfg;
  cfg.num_users = 5;
  cfg.num_rf_chains = 4;
  auto users = drop(cfg, 119);
  separate_aods(users, cfg.m_bs);
  const double width = pairing_beamwidth_rad(cfg.m_bs);
  users[4].los.aod = users[0].los.aod + 0.3 * width;  // exactly one shareable pair
  const std::vector<double> floors(5, 0.0);

  const SchemeOutcome sb = run_single_beam(users, cfg, floors);
  const SchemeOutcome oma = run_oma(users, cfg, floors);
  CHECK(sb.slots.size() == 1);
  CHECK(oma.slots.size() == 2);
}

TEST_CASE("beam sharing beats time sharing on average in a crowded sector") {
  DropConfig cfg;
  cfg.num_users = 7;
  cfg.num_rf_chains = 4;
  cfg.cell_portion = 1.0 / 6.0;  // clustered angles make pairs common
  const std::vector<double> floors(7, 0.0);

  double mean_sb = 0.0, mean_oma = 0.0;
  const int drops = 120;
  int used = 0;
  for (int t = 0; t < drops; ++t) {
    const auto users = drop(cfg, 2000 + t);
    try {
      const SchemeOutcome sb = run_single_beam(users, cfg, floors);
      const SchemeOutcome oma = run_oma(users, cfg, floors);
      mean_sb += sb.sum_rate;
      mean_oma += oma.sum_rate;
      ++used;
    } catch (const IllConditionedError&) {
      continue;
    }
  }
  REQUIRE(used >= 80);
  mean_sb /= used;
  mean_oma /= used;
  CHECK(mean_sb >= mean_oma * 0.999);
}

TEST_CASE("infeasible floors surface through the slot flags") {
  DropConfig cfg;
  cfg.num_users = 4;
  cfg.num_rf_chains = 2;
  const auto users = drop(cfg, 121);
  const std::vector<double> floors(4, 30.0);  // unreachable

  const SchemeOutcome out = run_oma(users, cfg, floors);
  CHECK(out.qos_dropped);
  CHECK(out.ok);
  CHECK(out.sum_rate > 0.0);
}
