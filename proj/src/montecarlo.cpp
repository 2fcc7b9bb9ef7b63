#include "mbnoma/montecarlo.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mbnoma/baselines.hpp"
#include "mbnoma/precoding.hpp"

namespace mbnoma {

double pairwise_sum(const std::vector<double>& v) {
  std::function<double(size_t, size_t)> rec = [&](size_t lo, size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (size_t i = lo; i < hi; ++i) s += v[i];
      return s;
    }
    const size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return v.empty() ? 0.0 : rec(0, v.size());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SchemeOutcome run_scheme(const std::string& scheme, const std::vector<UserChannel>& users,
                         const DropConfig& cfg, const std::vector<double>& r_min) {
  if (scheme == "proposed") return run_proposed(users, cfg, r_min);
  if (scheme == "single_beam") return run_single_beam(users, cfg, r_min);
  if (scheme == "oma") return run_oma(users, cfg, r_min);
  throw std::invalid_argument("unknown scheme '" + scheme + "'");
}

std::vector<DropRecord> run_drop(const DropConfig& cfg, const std::vector<std::string>& schemes,
                                 std::uint64_t seed, bool with_exhaustive) {
  std::mt19937_64 rng(seed);
  const std::vector<UserChannel> users = generate_drop(cfg, rng);
  const std::vector<double> r_min = draw_rate_floors(cfg, rng, cfg.num_users);

  double exhaustive_value = 0.0;
  if (with_exhaustive) {
    const ConditionalEvaluator ev(users, cfg);
    exhaustive_value = exhaustive_grouping(ev).sum_rate;
  }

  std::vector<DropRecord> records;
  records.reserve(schemes.size());
  for (const std::string& scheme : schemes) {
    DropRecord rec;
    rec.exhaustive_value = exhaustive_value;
    if (scheme == "exhaustive") {
      if (!with_exhaustive) {
        const ConditionalEvaluator ev(users, cfg);
        rec.exhaustive_value = exhaustive_grouping(ev).sum_rate;
      }
      rec.sum_rate = rec.exhaustive_value;
      rec.ok = true;
      records.push_back(std::move(rec));
      continue;
    }
    try {
      const SchemeOutcome out = run_scheme(scheme, users, cfg, r_min);
      rec.sum_rate = out.sum_rate;
      rec.ok = true;
      rec.qos_dropped = out.qos_dropped;
      rec.sic_dropped = out.sic_dropped;
      if (scheme == "proposed") {
        rec.grouping_rows = out.grouping.trace;
        for (const TraceRow& row : out.grouping.trace)
          rec.grouping_trace.push_back(row.sum_rate);
      }
    } catch (const IllConditionedError&) {
      rec.ok = false;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

SchemePoint aggregate(const std::string& scheme, double sweep_value,
                      const std::vector<DropRecord>& recs) {
  SchemePoint pt;
  pt.scheme = scheme;
  pt.sweep_value = sweep_value;
  std::vector<double> values;
  int infeasible = 0;
  for (const DropRecord& r : recs) {
    if (!r.ok) {
      ++pt.dropped_samples;
      continue;
    }
    values.push_back(r.sum_rate);
    if (r.qos_dropped || r.sic_dropped) ++infeasible;
  }
  pt.drops = static_cast<int>(values.size());
  if (pt.drops > 0) {
    pt.mean_sum_rate = pairwise_sum(values) / pt.drops;
    if (pt.drops > 1) {
      std::vector<double> sq;
      sq.reserve(values.size());
      for (double v : values) sq.push_back((v - pt.mean_sum_rate) * (v - pt.mean_sum_rate));
      pt.std_error = std::sqrt(pairwise_sum(sq) / (pt.drops - 1)) / std::sqrt(pt.drops);
    }
    pt.infeasible_qos_fraction = static_cast<double>(infeasible) / pt.drops;
  }
  return pt;
}

void write_rows_csv(const std::string& path, const std::string& preset,
                    const std::vector<SchemePoint>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "preset,sweep_value,scheme,mean_sum_rate,std_error,"
                  "infeasible_qos_fraction,drops\n");
  for (const SchemePoint& r : rows)
    std::fprintf(f, "%s,%s,%s,%s,%s,%s,%d\n", preset.c_str(), fmt(r.sweep_value).c_str(),
                 r.scheme.c_str(), fmt(r.mean_sum_rate).c_str(), fmt(r.std_error).c_str(),
                 fmt(r.infeasible_qos_fraction).c_str(), r.drops);
  std::fclose(f);
}

}  // namespace

ExperimentResult run_experiment(const ParsedConfig& cfg) {
  const std::string& preset = cfg.experiment.preset;
  std::vector<double> sweep = cfg.experiment.sweep;
  if (sweep.empty()) sweep = default_sweep(preset);
  std::vector<std::string> schemes = cfg.experiment.schemes;
  if (schemes.empty()) schemes = default_schemes(preset);
  const int drops = cfg.experiment.drops;
  if (drops < 1) throw std::invalid_argument("run_experiment: drops must be >= 1");

  std::filesystem::create_directories(cfg.experiment.out_dir);
  const std::string base = cfg.experiment.out_dir + "/" + preset;

  ExperimentResult result;
  const bool convergence = preset == "convergence";
  bool want_exhaustive = false;
  std::vector<std::string> model_schemes;
  for (const std::string& s : schemes) {
    if (s == "exhaustive")
      want_exhaustive = true;
    else
      model_schemes.push_back(s);
  }

  if (convergence) {
    // One point; the "sweep" of the output is the accepted-operation index.
    std::vector<std::vector<DropRecord>> per_drop(drops);
    std::vector<std::string> drop_schemes = {"proposed"};
    parallel_for(drops, cfg.experiment.threads, [&](int d) {
      per_drop[d] = run_drop(cfg.drop, drop_schemes, drop_seed(cfg.experiment.master_seed, d),
                             want_exhaustive);
    });
    size_t max_ops = 1;
    for (const auto& recs : per_drop) max_ops = std::max(max_ops, recs[0].grouping_trace.size());
    for (size_t op = 0; op < max_ops; ++op) {
      std::vector<double> vals, ex_vals;
      for (const auto& recs : per_drop) {
        const auto& tr = recs[0].grouping_trace;
        vals.push_back(op < tr.size() ? tr[op] : tr.back());
        ex_vals.push_back(recs[0].exhaustive_value);
      }
      SchemePoint pt;
      pt.scheme = "proposed";
      pt.sweep_value = static_cast<double>(op);
      pt.drops = drops;
      pt.mean_sum_rate = pairwise_sum(vals) / drops;
      result.rows.push_back(pt);
      if (want_exhaustive) {
        SchemePoint ex = pt;
        ex.scheme = "exhaustive";
        ex.mean_sum_rate = pairwise_sum(ex_vals) / drops;
        result.rows.push_back(ex);
      }
    }
    const std::string table = base + ".csv";
    write_rows_csv(table, preset, result.rows);
    result.files.push_back(table);
    return result;
  }

  // records[point][drop][scheme]
  std::vector<std::vector<std::vector<DropRecord>>> records(sweep.size());
  for (size_t sv = 0; sv < sweep.size(); ++sv) {
    const DropConfig point_cfg = apply_sweep_value(cfg.drop, preset, sweep[sv]);
    point_cfg.validate();
    records[sv].resize(drops);
    parallel_for(drops, cfg.experiment.threads, [&, sv](int d) {
      records[sv][d] =
          run_drop(point_cfg, model_schemes, drop_seed(cfg.experiment.master_seed, d), false);
    });
  }

  for (size_t sv = 0; sv < sweep.size(); ++sv)
    for (size_t s = 0; s < model_schemes.size(); ++s) {
      std::vector<DropRecord> col;
      col.reserve(drops);
      for (int d = 0; d < drops; ++d) col.push_back(records[sv][d][s]);
      result.rows.push_back(aggregate(model_schemes[s], sweep[sv], col));
    }

  const std::string table = base + ".csv";
  write_rows_csv(table, preset, result.rows);
  result.files.push_back(table);

  if (cfg.experiment.trace) {
    const std::string raw_path = base + "_raw.csv";
    std::FILE* f = std::fopen(raw_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + raw_path);
    std::fprintf(f, "sweep_value,drop,scheme,sum_rate,ok,qos_fallback,sic_fallback\n");
    for (size_t sv = 0; sv < sweep.size(); ++sv)
      for (int d = 0; d < drops; ++d)
        for (size_t s = 0; s < model_schemes.size(); ++s) {
          const DropRecord& r = records[sv][d][s];
          std::fprintf(f, "%s,%d,%s,%s,%d,%d,%d\n", fmt(sweep[sv]).c_str(), d,
                       model_schemes[s].c_str(), fmt(r.sum_rate).c_str(), r.ok ? 1 : 0,
                       r.qos_dropped ? 1 : 0, r.sic_dropped ? 1 : 0);
        }
    std::fclose(f);
    result.files.push_back(raw_path);

    const std::string gt_path = base + "_grouping_trace.csv";
    std::FILE* g = std::fopen(gt_path.c_str(), "w");
    if (!g) throw std::runtime_error("cannot open " + gt_path);
    std::fprintf(g, "sweep_value,drop,op_index,type,user,coalitions,sum_rate\n");
    for (size_t sv = 0; sv < sweep.size(); ++sv)
      for (int d = 0; d < drops; ++d)
        for (size_t s = 0; s < model_schemes.size(); ++s)
          for (const TraceRow& row : records[sv][d][s].grouping_rows)
            std::fprintf(g, "%s,%d,%d,%s,%d,%d,%s\n", fmt(sweep[sv]).c_str(), d, row.op_index,
                         row.type.c_str(), row.user_id, row.coalitions,
                         fmt(row.sum_rate).c_str());
    std::fclose(g);
    result.files.push_back(gt_path);
  }
  return result;
}

}  // namespace mbnoma
