#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "mbnoma/grouping.hpp"

using namespace mbnoma;

namespace {

DropConfig small_config() {
  DropConfig cfg;
  cfg.num_users = 3;
  cfg.num_rf_chains = 2;
  cfg.m_bs = 16;
  cfg.m_min = 2;
  return cfg;
}

std::vector<UserChannel> make_users(const DropConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_drop(cfg, rng);
}

// Reference sum rate computed straight from the evaluator's effective
// channels with explicit SINR arithmetic.
double reference_sum_rate(const ConditionalEvaluator& ev, const Partition& p,
                          double power_each, double noise, int n_rf) {
  const int n = p.size();
  double total = 0.0;
  for (int c = 0; c < n; ++c) {
    const auto& members = p.coalitions[c].members;
    for (size_t pos = 0; pos < members.size(); ++pos) {
      const int u = members[pos];
      const double own = std::norm(ev.effective(u, p.coalitions[c]));
      double intra = 0.0;
      for (size_t q = 0; q < pos; ++q) intra += own * power_each;
      double inter = 0.0;
      for (int c2 = 0; c2 < n; ++c2) {
        if (c2 == c) continue;
        inter += std::norm(ev.effective(u, p.coalitions[c2])) * power_each *
                 p.coalitions[c2].members.size();
      }
      total += std::log2(1.0 + own * power_each / (intra + inter + noise));
    }
  }
  return (n > n_rf ? double(n_rf) / n : 1.0) * total;
}

}  // namespace

TEST_CASE("partition validation catches malformed structures") {
  const int users = 3, m_bs = 16, m_min = 2;
  Partition good;
  good.coalitions = {{{1, 3}, {10, 6}}, {{2}, {16}}};
  CHECK_NOTHROW(good.validate(users, m_bs, m_min));

  Partition p = good;
  p.coalitions[1].members = {1};  // user 1 appears twice, user 2 never
  CHECK_THROWS_AS(p.validate(users, m_bs, m_min), std::invalid_argument);

  p = good;
  p.coalitions[0].antennas = {15, 6};  // exceeds the array
  CHECK_THROWS_AS(p.validate(users, m_bs, m_min), std::invalid_argument);

  p = good;
  p.coalitions[0].antennas = {15, 1};  // below the per-user floor
  CHECK_THROWS_AS(p.validate(users, m_bs, m_min), std::invalid_argument);

  p = good;
  p.coalitions[1].antennas = {12};  // a lone user keeps the full array
  CHECK_THROWS_AS(p.validate(users, m_bs, m_min), std::invalid_argument);

  p = good;
  p.coalitions[0].members = {3, 1};  // members must ascend
  CHECK_THROWS_AS(p.validate(users, m_bs, m_min), std::invalid_argument);
}

TEST_CASE("evaluator effective channels agree with the analog chain") {
  const DropConfig cfg = small_config();
  const auto users = make_users(cfg, 41);
  const ConditionalEvaluator ev(users, cfg);

  Partition p;
  p.coalitions = {{{1, 2}, {9, 7}}, {{3}, {16}}};
  const auto units = units_from_partition(p, users, cfg.m_bs);
  const BeamformerBank bank = build_bank(units, users, cfg.m_bs, cfg.m_ue);
  const CMatrix h_eff = effective_channel(bank, users);

  for (int c = 0; c < p.size(); ++c) {
    for (int u = 1; u <= cfg.num_users; ++u) {
      const Complex fast = ev.effective(u, p.coalitions[c]);
      const Complex direct = h_eff(c, u - 1);
      CHECK(std::abs(fast - direct) <= 1e-9 * std::abs(direct) + 1e-15);
    }
  }
}

TEST_CASE("conditional rates vanish outside the coalition and sum correctly") {
  const DropConfig cfg = small_config();
  const auto users = make_users(cfg, 43);
  const ConditionalEvaluator ev(users, cfg);

  Partition p;
  p.coalitions = {{{1, 3}, {8, 8}}, {{2}, {16}}};
  CHECK(ev.conditional_rate(p, 2, 0) == 0.0);
  CHECK(ev.conditional_rate(p, 1, 1) == 0.0);

  double manual = 0.0;
  for (int c = 0; c < p.size(); ++c)
    for (int u : p.coalitions[c].members) manual += ev.conditional_rate(p, u, c);
  CHECK(ev.sum_rate(p) == doctest::Approx(manual).epsilon(1e-12));

  const double ref = reference_sum_rate(ev, p, cfg.bs_power_mw() / cfg.num_users,
                                        cfg.noise_mw(), cfg.num_rf_chains);
  CHECK(ev.sum_rate(p) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("structures beyond the RF budget are payoff-scaled by time sharing") {
  const DropConfig cfg = small_config();  // 3 users, 2 chains
  const auto users = make_users(cfg, 47);
  const ConditionalEvaluator ev(users, cfg);

  Partition all_single;
  all_single.coalitions = {{{1}, {16}}, {{2}, {16}}, {{3}, {16}}};
  const double ref = reference_sum_rate(ev, all_single, cfg.bs_power_mw() / 3.0,
                                        cfg.noise_mw(), cfg.num_rf_chains);
  CHECK(ev.sum_rate(all_single) == doctest::Approx(ref).epsilon(1e-10));

  double unscaled = 0.0;
  for (int c = 0; c < 3; ++c) unscaled += ev.conditional_rate(all_single, c + 1, c);
  CHECK(ev.sum_rate(all_single) == doctest::Approx(unscaled * 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("pair split scan matches brute force and prefers the smaller head") {
  const DropConfig cfg = small_config();
  const auto users = make_users(cfg, 53);
  const ConditionalEvaluator ev(users, cfg);

  Partition p;
  p.coalitions = {{{1, 2}, {8, 8}}, {{3}, {16}}};
  const double got = best_pair_split(ev, p, 0);

  double best = -1.0;
  int best_m = -1;
  for (int m = cfg.m_min; m <= cfg.m_bs - cfg.m_min; ++m) {
    Partition q = p;
    q.coalitions[0].antennas = {m, cfg.m_bs - m};
    const double v = ev.sum_rate(q);
    if (v > best) {
      best = v;
      best_m = m;
    }
  }
  CHECK(got == doctest::Approx(best).epsilon(1e-12));
  CHECK(p.coalitions[0].antennas[0] == best_m);
  CHECK(p.coalitions[0].antennas[1] == cfg.m_bs - best_m);
}

TEST_CASE("switch re-optimizes both pair splits jointly") {
  DropConfig cfg;
  cfg.num_users = 4;
  cfg.num_rf_chains = 2;
  cfg.m_bs = 16;
  cfg.m_min = 2;

  for (std::uint64_t seed : {61, 62, 63, 64, 65}) {
    const auto users = make_users(cfg, seed);
    const ConditionalEvaluator ev(users, cfg);

    Partition p;
    p.coalitions = {{{1, 2}, {8, 8}}, {{3, 4}, {8, 8}}};
    // Force acceptance of whatever the scan finds by passing a floor value.
    const auto moved = try_switch(ev, p, 1, 3, -1.0);
    REQUIRE(moved.has_value());
    moved->partition.validate(cfg.num_users, cfg.m_bs, cfg.m_min);

    // Brute force over both splits of the swapped structure {2,3},{1,4}.
    double best = -1.0;
    for (int m1 = cfg.m_min; m1 <= cfg.m_bs - cfg.m_min; ++m1) {
      for (int m2 = cfg.m_min; m2 <= cfg.m_bs - cfg.m_min; ++m2) {
        Partition q;
        q.coalitions = {{{2, 3}, {m1, cfg.m_bs - m1}}, {{1, 4}, {m2, cfg.m_bs - m2}}};
        best = std::max(best, ev.sum_rate(q));
      }
    }
    CHECK(moved->sum_rate == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("leave-join builds the candidate it claims and only improving ones") {
  const DropConfig cfg = small_config();
  for (std::uint64_t seed : {71, 72, 73}) {
    const auto users = make_users(cfg, seed);
    const ConditionalEvaluator ev(users, cfg);

    Partition p;
    p.coalitions = {{{1}, {16}}, {{2}, {16}}, {{3}, {16}}};
    const double current = ev.sum_rate(p);
    const int target = p.find_coalition_of(2);
    const auto moved = try_leave_join(ev, p, 1, target, current);
    if (moved) {
      moved->partition.validate(cfg.num_users, cfg.m_bs, cfg.m_min);
      CHECK(moved->sum_rate > current * (1.0 + 1e-10));
      CHECK(moved->sum_rate == doctest::Approx(ev.sum_rate(moved->partition)).epsilon(1e-12));
      const int joined = moved->partition.find_coalition_of(1);
      CHECK(joined == moved->partition.find_coalition_of(2));
    }
  }
}

TEST_CASE("coalition formation lands on a stable feasible structure") {
  struct Scenario {
    int users, chains;
  };
  for (const Scenario sc : {Scenario{3, 2}, Scenario{5, 3}, Scenario{8, 6}, Scenario{12, 8}}) {
    DropConfig cfg;
    cfg.num_users = sc.users;
    cfg.num_rf_chains = sc.chains;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto users = make_users(cfg, 100 * sc.users + seed);
      const ConditionalEvaluator ev(users, cfg);
      const GroupingResult res = coalition_formation(ev);

      res.partition.validate(cfg.num_users, cfg.m_bs, cfg.m_min);
      CHECK(res.partition.size() <= cfg.num_rf_chains);
      CHECK(res.sweeps <= ev.max_sweeps());
      CHECK(res.sum_rate == doctest::Approx(ev.sum_rate(res.partition)).epsilon(1e-12));

      int ops_in_trace = 0;
      for (const TraceRow& row : res.trace)
        if (row.type == "join" || row.type == "switch") ++ops_in_trace;
      CHECK(ops_in_trace == res.accepted_ops);
      CHECK(res.trace.front().type == "init");

      if (!res.merge_fallback) CHECK(is_stable(ev, res.partition));
    }
  }
}

TEST_CASE("a two-user single-chain cell always shares the beam") {
  DropConfig cfg;
  cfg.num_users = 2;
  cfg.num_rf_chains = 1;
  for (std::uint64_t seed : {81, 82, 83}) {
    const auto users = make_users(cfg, seed);
    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult res = coalition_formation(ev);
    REQUIRE(res.partition.size() == 1);
    CHECK(res.partition.coalitions[0].members == std::vector<int>{1, 2});
  }
}

TEST_CASE("exhaustive candidate counts follow the closed form") {
  CHECK(exhaustive_search_count(3, 2, 16, 2) == doctest::Approx(39.0));
  CHECK(exhaustive_search_count(4, 2, 16, 2) == doctest::Approx(507.0));
  CHECK(exhaustive_search_count(5, 3, 100, 10) == doctest::Approx(98415.0));
}

TEST_CASE("exhaustive search refuses budgets it would blow through") {
  const DropConfig cfg = small_config();
  const auto users = make_users(cfg, 91);
  const ConditionalEvaluator ev(users, cfg);
  CHECK_THROWS_AS(exhaustive_grouping(ev, 10.0), std::runtime_error);
}

TEST_CASE("formation never beats the exhaustive optimum") {
  const DropConfig cfg = small_config();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto users = make_users(cfg, 1000 + seed);
    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult alg = coalition_formation(ev);
    const GroupingResult ex = exhaustive_grouping(ev);
    ex.partition.validate(cfg.num_users, cfg.m_bs, cfg.m_min);
    CHECK(ex.partition.size() <= cfg.num_rf_chains);
    CHECK(ex.sum_rate >= alg.sum_rate * (1.0 - 1e-9));
  }
}

TEST_CASE("units mirror the partition's membership and antenna plan") {
  const DropConfig cfg = small_config();
  const auto users = make_users(cfg, 97);

  Partition p;
  p.coalitions = {{{1, 3}, {11, 5}}, {{2}, {16}}};
  const auto units = units_from_partition(p, users, cfg.m_bs);
  REQUIRE(units.size() == 2);

  CHECK(units[0].user_ids == std::vector<int>{1, 3});
  REQUIRE(units[0].subarrays.size() == 2);
  CHECK(units[0].subarrays[0].antennas == 11);
  CHECK(units[0].subarrays[0].steer == users[0].los.aod);
  CHECK(units[0].subarrays[1].antennas == 5);
  CHECK(units[0].subarrays[1].steer == users[2].los.aod);

  CHECK(units[1].user_ids == std::vector<int>{2});
  REQUIRE(units[1].subarrays.size() == 1);
  CHECK(units[1].subarrays[0].antennas == 16);
  CHECK(units[1].subarrays[0].steer == users[1].los.aod);
}
