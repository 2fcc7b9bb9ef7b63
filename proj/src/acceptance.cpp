#include "mbnoma/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mbnoma/baselines.hpp"
#include "mbnoma/beamforming.hpp"
#include "mbnoma/channel.hpp"
#include "mbnoma/config.hpp"
#include "mbnoma/grouping.hpp"
#include "mbnoma/montecarlo.hpp"
#include "mbnoma/pipeline.hpp"
#include "mbnoma/power.hpp"
#include "mbnoma/precoding.hpp"

namespace mbnoma {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// --------------------------------------------------------------------------
// Gate 1: mean optimality gap of coalition formation against the exhaustive
// joint search on a scenario small enough to enumerate.
GateResult gate_grouping() {
  constexpr int kDrops = 120;
  constexpr double kMeanGapTol = 0.02;
  constexpr double kWallLimit = 60.0;
  const auto t0 = Clock::now();

  DropConfig cfg;
  cfg.num_users = 3;
  cfg.num_rf_chains = 2;
  cfg.m_bs = 16;
  cfg.m_min = 2;

  std::vector<double> gap(kDrops, 0.0);
  std::vector<char> above(kDrops, 0);  // heuristic beat the "optimum": oracle bug
  parallel_for(kDrops, 0, [&](int d) {
    std::mt19937_64 rng(drop_seed(101, static_cast<std::uint64_t>(d)));
    const std::vector<UserChannel> users = generate_drop(cfg, rng);
    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult alg = coalition_formation(ev);
    const GroupingResult ex = exhaustive_grouping(ev);
    gap[d] = (ex.sum_rate - alg.sum_rate) / ex.sum_rate;
    if (gap[d] < -1e-9) above[d] = 1;
    gap[d] = std::max(gap[d], 0.0);
  });

  const double mean_gap = pairwise_sum(gap) / kDrops;
  const double worst = *std::max_element(gap.begin(), gap.end());
  const int oracle_bugs = static_cast<int>(std::count(above.begin(), above.end(), char(1)));
  const double secs = seconds_since(t0);

  GateResult r;
  r.passed = mean_gap <= kMeanGapTol && oracle_bugs == 0 && secs <= kWallLimit;
  r.detail = "mean gap " + fmt(mean_gap) + " (tol " + fmt(kMeanGapTol) + "), worst " +
             fmt(worst) + ", " + std::to_string(kDrops) + " drops, " + fmt(secs) + " s";
  if (oracle_bugs > 0) r.detail += ", heuristic above exhaustive on " +
                                   std::to_string(oracle_bugs) + " drops";
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 2: accepted-operation count stays within budget and the objective
// trace climbs strictly across accepted operations.
GateResult gate_convergence() {
  constexpr int kDrops = 100;
  constexpr double kMeanOpsTol = 15.0;
  const auto t0 = Clock::now();

  DropConfig cfg;
  cfg.num_users = 5;
  cfg.num_rf_chains = 3;

  std::vector<double> ops(kDrops, 0.0);
  std::vector<char> monotone(kDrops, 1);
  parallel_for(kDrops, 0, [&](int d) {
    std::mt19937_64 rng(drop_seed(202, static_cast<std::uint64_t>(d)));
    const std::vector<UserChannel> users = generate_drop(cfg, rng);
    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult res = coalition_formation(ev);
    ops[d] = res.accepted_ops;
    double prev = res.trace.front().sum_rate;
    for (size_t t = 1; t < res.trace.size(); ++t) {
      if (res.trace[t].type == "merge") continue;  // forced feasibility, not an accepted op
      if (!(res.trace[t].sum_rate > prev + 1e-12 * std::max(1.0, std::abs(prev))))
        monotone[d] = 0;
      prev = res.trace[t].sum_rate;
    }
  });

  const double mean_ops = pairwise_sum(ops) / kDrops;
  const double max_ops = *std::max_element(ops.begin(), ops.end());
  const int broken = kDrops - static_cast<int>(std::count(monotone.begin(), monotone.end(), char(1)));
  const double secs = seconds_since(t0);

  GateResult r;
  r.passed = mean_ops <= kMeanOpsTol && broken == 0;
  r.detail = "mean accepted ops " + fmt(mean_ops) + " (tol " + fmt(kMeanOpsTol) + "), max " +
             fmt(max_ops) + ", non-monotone traces " + std::to_string(broken) + "/" +
             std::to_string(kDrops);
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 3: two users on one chain; the successive convex allocation must land
// within 1% of a dense grid optimum and satisfy the decoding-order and
// rate-floor constraints to 1e-6.
GateResult gate_power() {
  constexpr int kNeeded = 50;
  constexpr int kMaxAttempts = 400;
  constexpr int kGridPoints = 200;  // per axis
  constexpr double kRelTol = 0.01;
  constexpr double kResidualTol = 1e-6;
  const auto t0 = Clock::now();

  DropConfig cfg;
  cfg.num_users = 2;
  cfg.num_rf_chains = 1;
  cfg.r_min_high = 2.0;  // keep the floors active yet typically reachable

  int collected = 0;
  double max_shortfall = 0.0;  // grid above SCA: the direction that indicts the solver
  double max_excess = 0.0;     // SCA above grid: bounded only by the lattice resolution
  double max_sic_violation = 0.0;
  double max_qos_violation = 0.0;
  const double p_bs = cfg.bs_power_mw();

  for (int attempt = 0; attempt < kMaxAttempts && collected < kNeeded; ++attempt) {
    std::mt19937_64 rng(drop_seed(303, static_cast<std::uint64_t>(attempt)));
    const std::vector<UserChannel> users = generate_drop(cfg, rng);
    const std::vector<double> floors = draw_rate_floors(cfg, rng, cfg.num_users);

    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult grp = coalition_formation(ev);
    const std::vector<Unit> units = units_from_partition(grp.partition, users, cfg.m_bs);

    ServeResult sr;
    try {
      sr = serve_units(units, users, cfg, floors, p_bs);
    } catch (const IllConditionedError&) {
      continue;
    }
    // Both constraint families must be genuinely active and satisfiable.
    if (sr.power.qos_dropped || sr.power.sic_dropped) continue;

    double grid_best = -1.0;
    RMatrix p(2, 1);
    for (int i = 0; i < kGridPoints; ++i) {
      const double p1 = p_bs * i / (kGridPoints - 1);
      for (int j = 0; j < kGridPoints; ++j) {
        const double p2 = p_bs * j / (kGridPoints - 1);
        if (p1 + p2 > p_bs * (1.0 + 1e-12)) break;
        p(0, 0) = p1;
        p(1, 0) = p2;
        const RateReport rr = rate_report(sr.params, p);
        if (rr.per_user(0) < floors[sr.served_ids[0] - 1]) continue;
        if (rr.per_user(1) < floors[sr.served_ids[1] - 1]) continue;
        bool sic_ok = true;
        for (const SicRate& s : rr.sic)
          if (s.rate < rr.individual(s.weak, s.chain) - 1e-12) sic_ok = false;
        if (!sic_ok) continue;
        grid_best = std::max(grid_best, rr.sum_rate);
      }
    }
    if (grid_best <= 0.0) continue;  // floors too tight for the grid resolution

    // The lattice maximum is a lower bound on the constrained optimum: every
    // lattice point is feasible and exactly evaluated, but active rate floors
    // cut thin slivers the 5 mW spacing cannot resolve. A returned point that
    // passes the residual checks below therefore can only land above the grid
    // through that resolution error; the solver-quality requirement is the
    // shortfall direction.
    const double sca_val = sr.report.sum_rate;
    max_shortfall = std::max(max_shortfall, (grid_best - sca_val) / grid_best);
    max_excess = std::max(max_excess, (sca_val - grid_best) / grid_best);
    for (const SicRate& s : sr.report.sic)
      max_sic_violation = std::max(max_sic_violation,
                                   sr.report.individual(s.weak, s.chain) - s.rate);
    for (int k = 0; k < 2; ++k)
      max_qos_violation = std::max(
          max_qos_violation, floors[sr.served_ids[k] - 1] - sr.report.per_user(k));
    ++collected;
  }

  const double secs = seconds_since(t0);
  GateResult r;
  r.passed = collected >= kNeeded && max_shortfall <= kRelTol &&
             max_sic_violation <= kResidualTol && max_qos_violation <= kResidualTol;
  r.detail = std::to_string(collected) + "/" + std::to_string(kNeeded) +
             " instances, worst shortfall vs grid " + fmt(max_shortfall) + " (tol " +
             fmt(kRelTol) + ", grid undershoots by up to " + fmt(max_excess) +
             "), residuals sic " + fmt(max_sic_violation) + " qos " + fmt(max_qos_violation) +
             " (tol " + fmt(kResidualTol) + ")";
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 4: closed-form gradient of the concave part against central finite
// differences on random instances.
GateResult gate_gradient() {
  constexpr int kInstances = 100;
  constexpr double kRelTol = 1e-4;
  // Denominator floor: gradients live around 1/p ~ 1e-2 per mW here, so the
  // floor turns the test absolute only where the true entry nearly cancels.
  constexpr double kDenomFloor = 1e-3;
  const auto t0 = Clock::now();

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double p_bs = 1000.0;
  double max_rel = 0.0;
  int done = 0;
  while (done < kInstances) {
    const int users = 2 + static_cast<int>(rng() % 3);
    const int chains = 1 + static_cast<int>(rng() % 3);

    std::vector<int> slots;
    for (int c = 0; c < chains; ++c) {
      slots.push_back(c);
      slots.push_back(c);
    }
    std::shuffle(slots.begin(), slots.end(), rng);

    RateParams params;
    params.noise_mw = 1e-8;
    params.gain.resize(users, chains);
    params.mask = IMatrix::Zero(users, chains);
    for (int k = 0; k < users; ++k)
      for (int c = 0; c < chains; ++c) params.gain(k, c) = std::pow(10.0, -9.0 + 4.0 * uni(rng));
    size_t next_slot = 0;
    int scheduled = 0;
    for (int k = 0; k < users && next_slot < slots.size(); ++k) {
      if (uni(rng) < 0.85) {
        params.mask(k, slots[next_slot++]) = 1;
        ++scheduled;
      }
    }
    if (scheduled < 2) continue;

    RMatrix p = RMatrix::Zero(users, chains);
    for (int k = 0; k < users; ++k)
      for (int c = 0; c < chains; ++c)
        if (params.mask(k, c)) p(k, c) = (0.5 + 0.5 * uni(rng)) * p_bs / scheduled;

    const DcParts parts = dc_objective_parts(params, p);
    const double h = 1e-6 * p_bs;
    for (int k = 0; k < users; ++k) {
      for (int c = 0; c < chains; ++c) {
        if (!params.mask(k, c)) continue;
        RMatrix pp = p, pm = p;
        pp(k, c) += h;
        pm(k, c) -= h;
        const double fd =
            (dc_objective_parts(params, pp).h2 - dc_objective_parts(params, pm).h2) / (2.0 * h);
        const double an = parts.grad_h2(k, c);
        const double rel =
            std::abs(fd - an) / std::max({std::abs(an), std::abs(fd), kDenomFloor});
        max_rel = std::max(max_rel, rel);
      }
    }
    ++done;
  }

  const double secs = seconds_since(t0);
  GateResult r;
  r.passed = max_rel <= kRelTol;
  r.detail = "worst relative error " + fmt(max_rel) + " (tol " + fmt(kRelTol) + ") over " +
             std::to_string(kInstances) + " instances";
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 5: zero-forcing leakage and column normalization on full pipeline
// drops at the default scenario.
GateResult gate_zf() {
  constexpr int kDrops = 50;
  constexpr int kMinUsable = 40;
  constexpr double kLeakTol = 1e-9;
  constexpr double kNormTol = 1e-12;
  const auto t0 = Clock::now();

  const DropConfig cfg;  // 7 users, 4 chains, 100 antennas
  const std::vector<double> floors(cfg.num_users, 0.0);

  std::vector<double> leak(kDrops, 0.0), norm_err(kDrops, 0.0);
  std::vector<char> usable(kDrops, 0);
  parallel_for(kDrops, 0, [&](int d) {
    std::mt19937_64 rng(drop_seed(505, static_cast<std::uint64_t>(d)));
    const std::vector<UserChannel> users = generate_drop(cfg, rng);
    const ConditionalEvaluator ev(users, cfg);
    const GroupingResult grp = coalition_formation(ev);
    const std::vector<Unit> units = units_from_partition(grp.partition, users, cfg.m_bs);
    ServeResult sr;
    try {
      sr = serve_units(units, users, cfg, floors, cfg.bs_power_mw());
    } catch (const IllConditionedError&) {
      return;  // counted as unusable
    }
    usable[d] = 1;
    const int n = static_cast<int>(sr.h_hat.cols());
    for (int row = 0; row < n; ++row) {
      const double scale = sr.h_hat.col(row).norm();
      for (int col = 0; col < n; ++col) {
        if (row == col) continue;
        leak[d] = std::max(leak[d],
                           std::abs(sr.h_hat.col(row).dot(sr.precoder.col(col))) / scale);
      }
    }
    for (int col = 0; col < n; ++col)
      norm_err[d] = std::max(norm_err[d], std::abs(sr.precoder.col(col).norm() - 1.0));
  });

  const int ok = static_cast<int>(std::count(usable.begin(), usable.end(), char(1)));
  const double worst_leak = *std::max_element(leak.begin(), leak.end());
  const double worst_norm = *std::max_element(norm_err.begin(), norm_err.end());
  const double secs = seconds_since(t0);

  GateResult r;
  r.passed = ok >= kMinUsable && worst_leak <= kLeakTol && worst_norm <= kNormTol;
  r.detail = "worst cross-beam leakage " + fmt(worst_leak) + " (tol " + fmt(kLeakTol) +
             "), worst column norm error " + fmt(worst_norm) + " (tol " + fmt(kNormTol) +
             "), usable drops " + std::to_string(ok) + "/" + std::to_string(kDrops);
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 6: split-beam pattern places its peaks at the steered departure
// angles with the predicted per-subarray gains.
GateResult gate_beamsplit(const std::string& out_dir) {
  constexpr int kMBs = 128;
  constexpr double kAngleTolDeg = 1.0;
  constexpr double kGainTol = 0.02;
  const auto t0 = Clock::now();

  const CVector w_split = rf_chain_beamformer(
      {{78, deg_to_rad(90.0)}, {50, deg_to_rad(70.0)}}, kMBs);
  const CVector w_single = rf_chain_beamformer({{kMBs, deg_to_rad(120.0)}}, kMBs);

  RVector angles(179);
  for (int i = 0; i < 179; ++i) angles(i) = deg_to_rad(1.0 + i);
  const RVector g_split = beam_pattern(w_split, angles);
  const RVector g_single = beam_pattern(w_single, angles);

  std::filesystem::create_directories(out_dir);
  write_pattern_csv(out_dir + "/beamsplit_pattern.csv", angles, g_split);
  write_pattern_csv(out_dir + "/singleton_pattern.csv", angles, g_single);

  const auto local_maxima = [](const RVector& g) {
    std::vector<int> idx;
    for (int i = 1; i + 1 < g.size(); ++i)
      if (g(i) > g(i - 1) && g(i) > g(i + 1)) idx.push_back(i);
    return idx;
  };
  // Nearest local peak to the steered angle: distance and gain there.
  const auto peak_near = [&](const RVector& g, double steer_deg, double& dist_deg,
                             double& gain) {
    dist_deg = 1e9;
    gain = 0.0;
    for (int i : local_maxima(g)) {
      const double a = 1.0 + i;
      if (std::abs(a - steer_deg) < dist_deg) {
        dist_deg = std::abs(a - steer_deg);
        gain = g(i);
      }
    }
  };

  struct Check {
    const RVector* g;
    double steer;
    double target;
  };
  const double root_m = std::sqrt(static_cast<double>(kMBs));
  const std::vector<Check> checks = {{&g_split, 90.0, 78.0 / root_m},
                                     {&g_split, 70.0, 50.0 / root_m},
                                     {&g_single, 120.0, root_m}};
  bool ok = true;
  std::string detail;
  for (const Check& c : checks) {
    double dist = 0.0, gain = 0.0;
    peak_near(*c.g, c.steer, dist, gain);
    const double rel = std::abs(gain - c.target) / c.target;
    if (dist > kAngleTolDeg || rel > kGainTol) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += fmt(c.steer) + " deg: peak off by " + fmt(dist) + " deg, gain " + fmt(gain) +
              " vs " + fmt(c.target) + " (rel " + fmt(rel) + ")";
  }

  GateResult r;
  r.passed = ok;
  r.detail = detail + " [tols " + fmt(kAngleTolDeg) + " deg, " + fmt(kGainTol) + "]";
  r.seconds = seconds_since(t0);
  return r;
}

// --------------------------------------------------------------------------
// Gate 7: Monte Carlo sweeps reproduce the expected orderings and trends.
GateResult gate_trends(const std::string& out_dir) {
  constexpr int kDrops = 200;
  constexpr double kWallLimit = 1800.0;
  constexpr double kOmaAdvantage = 1.05;  // at 30 dBm
  constexpr double kOrderSlack = 1e-9;
  const auto t0 = Clock::now();

  const auto run = [&](const std::string& preset) {
    ParsedConfig cfg = preset_defaults(preset);
    cfg.experiment.drops = kDrops;
    cfg.experiment.master_seed = 777;
    cfg.experiment.out_dir = out_dir + "/trends_" + preset;
    return run_experiment(cfg);
  };
  const auto by_scheme = [](const ExperimentResult& res) {
    std::map<std::string, std::vector<double>> m;
    for (const SchemePoint& row : res.rows) m[row.scheme].push_back(row.mean_sum_rate);
    return m;
  };
  const auto increasing = [](const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };

  std::string detail;
  bool ok = true;
  const auto fail = [&](const std::string& what) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  };

  const auto power = by_scheme(run("sumrate_vs_power"));
  const auto antennas = by_scheme(run("sumrate_vs_antennas"));
  const auto density = by_scheme(run("sumrate_vs_density"));

  for (const char* sch : {"proposed", "single_beam", "oma"}) {
    if (!increasing(power.at(sch))) fail(std::string(sch) + " not increasing in power");
    if (!increasing(antennas.at(sch))) fail(std::string(sch) + " not increasing in antennas");
  }
  const auto ordering = [&](const std::map<std::string, std::vector<double>>& m,
                            const std::string& sweep_name) {
    const auto& prop = m.at("proposed");
    const auto& sb = m.at("single_beam");
    const auto& oma = m.at("oma");
    for (size_t i = 0; i < prop.size(); ++i) {
      if (prop[i] < sb[i] - kOrderSlack)
        fail("proposed < single_beam at " + sweep_name + " point " + std::to_string(i));
      if (sb[i] < oma[i] - kOrderSlack)
        fail("single_beam < oma at " + sweep_name + " point " + std::to_string(i));
    }
  };
  ordering(power, "power");
  ordering(antennas, "antennas");

  // 30 dBm sits at index 2 of the default power grid.
  const double adv = power.at("proposed")[2] / power.at("oma")[2];
  if (!(adv >= kOmaAdvantage)) fail("advantage over oma at 30 dBm only " + fmt(adv));

  // Density sweep runs the kept cell portion downward, so density upward.
  const auto& oma_d = density.at("oma");
  const auto& prop_d = density.at("proposed");
  for (size_t i = 1; i < oma_d.size(); ++i)
    if (!(oma_d[i] < oma_d[i - 1])) fail("oma not decreasing with density at point " +
                                         std::to_string(i));
  const double oma_drop = (oma_d.front() - oma_d.back()) / oma_d.front();
  const double prop_drop = (prop_d.front() - prop_d.back()) / prop_d.front();
  if (!(prop_drop < oma_drop))
    fail("proposed relative drop " + fmt(prop_drop) + " not below oma " + fmt(oma_drop));

  const double secs = seconds_since(t0);
  if (secs > kWallLimit) fail("wall time " + fmt(secs) + " s over " + fmt(kWallLimit));

  GateResult r;
  r.passed = ok;
  r.detail = ok ? "power/antenna sweeps increasing, proposed >= single_beam >= oma, 30 dBm "
                  "advantage " +
                      fmt(power.at("proposed")[2] / power.at("oma")[2]) +
                      ", density drops proposed " + fmt(prop_drop) + " vs oma " + fmt(oma_drop)
                : detail;
  r.seconds = secs;
  return r;
}

// --------------------------------------------------------------------------
// Gate 8: identical reruns produce byte-identical CSV files, traces
// included, under default (parallel) execution.
GateResult gate_determinism(const std::string& out_dir) {
  const auto t0 = Clock::now();

  const auto run_pair = [&](const std::string& preset, int drops, std::uint64_t seed,
                            bool trace, const std::vector<double>& sweep, std::string& why) {
    ParsedConfig cfg = preset_defaults(preset);
    cfg.experiment.drops = drops;
    cfg.experiment.master_seed = seed;
    cfg.experiment.trace = trace;
    cfg.experiment.sweep = sweep;

    std::vector<std::vector<std::string>> files(2);
    for (int rep = 0; rep < 2; ++rep) {
      cfg.experiment.out_dir =
          out_dir + "/det_" + preset + (rep == 0 ? "_a" : "_b");
      std::filesystem::remove_all(cfg.experiment.out_dir);
      files[rep] = run_experiment(cfg).files;
    }
    if (files[0].size() != files[1].size()) {
      why = preset + ": file count differs";
      return false;
    }
    for (size_t i = 0; i < files[0].size(); ++i) {
      if (read_file_bytes(files[0][i]) != read_file_bytes(files[1][i])) {
        why = preset + ": " + std::filesystem::path(files[0][i]).filename().string() +
              " differs between reruns";
        return false;
      }
    }
    return true;
  };

  std::string why;
  bool ok = run_pair("sumrate_vs_power", 6, 42, true, {20.0, 30.0}, why);
  if (ok) ok = run_pair("convergence", 4, 9, false, {}, why);

  GateResult r;
  r.passed = ok;
  r.detail = ok ? "power and convergence presets byte-identical across reruns (traces on)"
                : why;
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace

std::vector<int> all_gate_ids() { return {1, 2, 3, 4, 5, 6, 7, 8}; }

std::string gate_name(int id) {
  switch (id) {
    case 1: return "grouping";
    case 2: return "convergence";
    case 3: return "power";
    case 4: return "gradient";
    case 5: return "zf";
    case 6: return "beamsplit";
    case 7: return "trends";
    case 8: return "determinism";
    default: throw std::invalid_argument("unknown gate id " + std::to_string(id));
  }
}

int gate_id_from_name(const std::string& name) {
  for (int id : all_gate_ids())
    if (gate_name(id) == name) return id;
  try {
    const int id = std::stoi(name);
    gate_name(id);  // validates
    return id;
  } catch (const std::exception&) {
    throw std::invalid_argument("unknown gate '" + name + "'");
  }
}

GateResult run_gate(int id, const std::string& out_dir) {
  GateResult r;
  try {
    switch (id) {
      case 1: r = gate_grouping(); break;
      case 2: r = gate_convergence(); break;
      case 3: r = gate_power(); break;
      case 4: r = gate_gradient(); break;
      case 5: r = gate_zf(); break;
      case 6: r = gate_beamsplit(out_dir); break;
      case 7: r = gate_trends(out_dir); break;
      case 8: r = gate_determinism(out_dir); break;
      default: throw std::invalid_argument("unknown gate id " + std::to_string(id));
    }
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.id = id;
  r.name = gate_name(id);
  return r;
}

std::vector<GateResult> run_gates(const std::vector<int>& ids, const std::string& out_dir) {
  std::vector<GateResult> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(run_gate(id, out_dir));
  return out;
}

}  // namespace mbnoma
