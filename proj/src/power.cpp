#include "mbnoma/power.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mbnoma {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

void RateParams::validate() const {
  if (gain.rows() != mask.rows() || gain.cols() != mask.cols())
    throw std::invalid_argument("RateParams: gain/mask shape mismatch");
  if (gain.rows() < 1 || gain.cols() < 1)
    throw std::invalid_argument("RateParams: empty gain matrix");
  if (!(noise_mw > 0.0)) throw std::invalid_argument("RateParams: noise_mw must be > 0");
  for (int k = 0; k < gain.rows(); ++k)
    for (int r = 0; r < gain.cols(); ++r) {
      if (!std::isfinite(gain(k, r)) || gain(k, r) < 0.0)
        throw std::invalid_argument("RateParams: gains must be finite and >= 0");
      if (mask(k, r) != 0 && mask(k, r) != 1)
        throw std::invalid_argument("RateParams: mask entries must be 0 or 1");
    }
  for (int k = 0; k < mask.rows(); ++k)
    if (mask.row(k).sum() > 1)
      throw std::invalid_argument("RateParams: a user may ride at most one chain");
  for (int r = 0; r < mask.cols(); ++r)
    if (mask.col(r).sum() > 2)
      throw std::invalid_argument("RateParams: a chain may carry at most two users");
}

RateReport rate_report(const RateParams& params, const RMatrix& p_in) {
  params.validate();
  if (p_in.rows() != params.gain.rows() || p_in.cols() != params.gain.cols())
    throw std::invalid_argument("rate_report: power shape mismatch");
  const int K = params.num_users();
  const int R = params.num_chains();
  RMatrix p = p_in;
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r) {
      if (params.mask(k, r) == 0) continue;
      if (p(k, r) < -1e-9) throw std::invalid_argument("rate_report: negative power");
      p(k, r) = std::max(p(k, r), 0.0);
    }

  RVector load = RVector::Zero(R);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k)
      if (params.mask(k, r)) load(r) += p(k, r);

  RateReport rep;
  rep.individual = RMatrix::Zero(K, R);
  auto inter_of = [&](int k, int r) {
    double v = 0.0;
    for (int r2 = 0; r2 < R; ++r2)
      if (r2 != r) v += params.gain(k, r2) * load(r2);
    return v;
  };
  for (int r = 0; r < R; ++r) {
    double below = 0.0;  // power of stronger users already summed on this chain
    std::vector<int> riders;
    for (int k = 0; k < K; ++k) {
      if (!params.mask(k, r)) continue;
      const double denom = inter_of(k, r) + params.gain(k, r) * below + params.noise_mw;
      rep.individual(k, r) = std::log2(1.0 + params.gain(k, r) * p(k, r) / denom);
      below += p(k, r);
      riders.push_back(k);
    }
    if (riders.size() == 2) {
      const int k = riders[0], i = riders[1];
      // Stronger user decoding the weaker user's message before cancelling.
      const double denom =
          inter_of(k, r) + params.gain(k, r) * p(k, r) + params.noise_mw;
      rep.sic.push_back(
          {k, i, r, std::log2(1.0 + params.gain(k, r) * p(i, r) / denom)});
    }
  }
  rep.per_user = rep.individual.rowwise().sum();
  rep.sum_rate = rep.per_user.sum();
  return rep;
}

DcParts dc_objective_parts(const RateParams& params, const RMatrix& p) {
  params.validate();
  const int K = params.num_users();
  const int R = params.num_chains();

  RVector load = RVector::Zero(R);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k)
      if (params.mask(k, r)) load(r) += p(k, r);

  RMatrix d2(K, R), d1(K, R);
  for (int r = 0; r < R; ++r) {
    double below = 0.0;
    for (int k = 0; k < K; ++k) {
      double inter = 0.0;
      for (int r2 = 0; r2 < R; ++r2)
        if (r2 != r) inter += params.gain(k, r2) * load(r2);
      d2(k, r) = params.noise_mw + inter + params.gain(k, r) * below;
      const double own = params.mask(k, r) ? p(k, r) : 0.0;
      d1(k, r) = d2(k, r) + params.gain(k, r) * own;
      below += own;
    }
  }

  DcParts parts;
  parts.grad_h2 = RMatrix::Zero(K, R);
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r) {
      parts.h1 -= std::log2(d1(k, r));
      parts.h2 -= std::log2(d2(k, r));
    }

  // inv_sum(k') = sum_r 1/d2(k',r); the r' != r sums reuse it.
  RVector inv_sum = RVector::Zero(K);
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r) inv_sum(k) += 1.0 / d2(k, r);
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r) {
      if (!params.mask(k, r)) continue;
      double s = 0.0;
      for (int k2 = 0; k2 < K; ++k2) {
        s += params.gain(k2, r) * (inv_sum(k2) - 1.0 / d2(k2, r));  // other chains
        if (k2 > k) s += params.gain(k2, r) / d2(k2, r);            // weaker on own chain
      }
      parts.grad_h2(k, r) = -s / kLn2;
    }
  return parts;
}

namespace {

struct Affine {
  RVector a;
  double b = 0.0;
  double value(const RVector& x) const { return a.dot(x) + b; }
};

enum class RowType { Bound, Budget, Sic, Qos };

struct Row {
  RVector a;
  double b = 0.0;
  RowType type = RowType::Bound;
  int who = -1;  // chain for Sic, user for Qos
  double value(const RVector& x) const { return a.dot(x) + b; }
};

/// The convex program in normalized variables x = p/p_bs over the scheduled
/// (user, chain) entries.
struct Problem {
  int n = 0;
  std::vector<std::pair<int, int>> vars;
  std::vector<Affine> d1_diag;  // all users x chains decode denominators
  std::vector<Row> rows;
  double p_bs = 0.0;
  const RateParams* params = nullptr;

  RMatrix unpack(const RVector& x) const {
    RMatrix p = RMatrix::Zero(params->gain.rows(), params->gain.cols());
    for (int j = 0; j < n; ++j) p(vars[j].first, vars[j].second) = p_bs * x(j);
    return p;
  }
  RVector pack(const RMatrix& p) const {
    RVector x(n);
    for (int j = 0; j < n; ++j) x(j) = p(vars[j].first, vars[j].second) / p_bs;
    return x;
  }
  bool strictly_feasible(const RVector& x) const {
    for (const Row& r : rows)
      if (!(r.value(x) < 0.0)) return false;
    return true;
  }
};

// Denominator D2/D1 of user k decoding message i on chain r, affine in x.
Affine build_denominator(const Problem& prob, int k, int i, int r, bool include_equal) {
  Affine f{RVector::Zero(prob.n), prob.params->noise_mw};
  for (int j = 0; j < prob.n; ++j) {
    const auto [d, rho] = prob.vars[j];
    if (rho != r)
      f.a(j) += prob.params->gain(k, rho) * prob.p_bs;
    else if (d < i || (include_equal && d == i))
      f.a(j) += prob.params->gain(k, r) * prob.p_bs;
  }
  return f;
}

Problem build_problem(const RateParams& params, const std::vector<double>& r_min,
                      double p_bs, bool use_sic, bool use_qos) {
  Problem prob;
  prob.params = &params;
  prob.p_bs = p_bs;
  const int K = params.num_users();
  const int R = params.num_chains();
  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r)
      if (params.mask(k, r)) prob.vars.emplace_back(k, r);
  prob.n = static_cast<int>(prob.vars.size());

  for (int k = 0; k < K; ++k)
    for (int r = 0; r < R; ++r) prob.d1_diag.push_back(build_denominator(prob, k, k, r, true));

  auto push_row = [&prob](RVector a, double b, RowType type, int who) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), std::abs(b), 1e-30});
    prob.rows.push_back({a / scale, b / scale, type, who});
  };
  for (int j = 0; j < prob.n; ++j) {
    RVector a = RVector::Zero(prob.n);
    a(j) = -1.0;
    push_row(std::move(a), 0.0, RowType::Bound, j);
  }
  push_row(RVector::Ones(prob.n), -1.0, RowType::Budget, -1);

  if (use_sic) {
    for (int r = 0; r < R; ++r) {
      std::vector<int> riders;
      for (int k = 0; k < K; ++k)
        if (params.mask(k, r)) riders.push_back(k);
      if (riders.size() != 2) continue;
      const int k = riders[0], i = riders[1];
      const Affine dki = build_denominator(prob, k, i, r, false);
      const Affine dii = build_denominator(prob, i, i, r, false);
      RVector a = params.gain(i, r) * dki.a - params.gain(k, r) * dii.a;
      const double b = params.gain(i, r) * dki.b - params.gain(k, r) * dii.b;
      push_row(std::move(a), b, RowType::Sic, r);
    }
  }
  if (use_qos) {
    for (int j = 0; j < prob.n; ++j) {
      const auto [k, r] = prob.vars[j];
      const double floor_factor = std::exp2(r_min[k]) - 1.0;
      if (floor_factor <= 0.0) continue;
      const Affine d = build_denominator(prob, k, k, r, false);
      RVector a = floor_factor * d.a;
      a(j) -= params.gain(k, r) * p_bs;
      push_row(std::move(a), floor_factor * d.b, RowType::Qos, k);
    }
  }
  return prob;
}

using ObjFn =
    std::function<void(const RVector& x, double& f, RVector& g, RMatrix& h)>;

ObjFn make_h1_objective(const Problem& prob, RVector lin) {
  return [&prob, lin = std::move(lin)](const RVector& x, double& f, RVector& g, RMatrix& h) {
    f = lin.dot(x);
    g = lin;
    h = RMatrix::Zero(x.size(), x.size());
    for (const Affine& d : prob.d1_diag) {
      const double v = d.value(x);
      f -= std::log2(v);
      g -= d.a / (v * kLn2);
      h.noalias() += (d.a * d.a.transpose()) / (v * v * kLn2);
    }
  };
}

ObjFn make_linear_objective(int n, int which) {
  return [n, which](const RVector& x, double& f, RVector& g, RMatrix& h) {
    f = x(which);
    g = RVector::Zero(n);
    g(which) = 1.0;
    h = RMatrix::Zero(n, n);
  };
}

/// Damped-Newton log-barrier descent over the given rows, weight schedule
/// mu0 -> mu_min by mu_shrink. x0 must be strictly feasible. early_stop, when
/// given, aborts as soon as an accepted iterate satisfies it.
RVector barrier_minimize(const ObjFn& obj, const std::vector<Row>& rows, RVector x,
                         const SolveOptions& opts,
                         const std::function<bool(const RVector&)>* early_stop = nullptr) {
  const int n = static_cast<int>(x.size());
  double f = 0.0;
  RVector g(n);
  RMatrix h(n, n);

  // Barrier value, gradient, and Newton step of f + mu * barrier at x.
  auto newton_step = [&](double mu, double& barrier_val, RVector& gphi, RVector& step) {
    obj(x, f, g, h);
    barrier_val = 0.0;
    gphi = g;
    RMatrix hphi = h;
    for (const Row& r : rows) {
      const double c = r.value(x);
      barrier_val -= std::log(-c);
      gphi.noalias() += (mu / -c) * r.a;
      hphi.noalias() += (mu / (c * c)) * (r.a * r.a.transpose());
    }
    // Proportional damping: scaling each diagonal entry by (1 + ridge) keeps
    // the step well-formed even when barrier curvature spans many decades,
    // which a uniform shift would not (it drowns the flat directions).
    const RVector dscale = hphi.diagonal().cwiseAbs().cwiseMax(1e-300);
    double ridge = 1e-12;
    for (int attempt = 0; attempt < 4; ++attempt) {
      RMatrix hr = hphi;
      hr.diagonal() += ridge * dscale;
      Eigen::LDLT<RMatrix> ldlt(hr);
      if (ldlt.info() == Eigen::Success) {
        step = -ldlt.solve(gphi);
        if (step.allFinite()) return;
      }
      ridge *= 1e3;
      step = RVector::Zero(n);
    }
  };
  auto feasible = [&rows](const RVector& cand) {
    for (const Row& r : rows)
      if (!(r.value(cand) < 0.0)) return false;
    return true;
  };

  double barrier_val = 0.0;
  RVector gphi(n), step(n);
  for (double mu = opts.mu0;; mu *= opts.mu_shrink) {
    for (int it = 0; it < opts.newton_max; ++it) {
      newton_step(mu, barrier_val, gphi, step);
      const double phi_x = f + mu * barrier_val;
      const double decrement2 = -gphi.dot(step);
      if (!(decrement2 > 2.0 * opts.newton_tol)) break;

      double t = 1.0;
      bool ok = false;
      for (int ls = 0; ls < 90; ++ls) {
        const RVector cand = x + t * step;
        if (feasible(cand)) {
          double fv;
          RVector gv;
          RMatrix hv;
          obj(cand, fv, gv, hv);
          double bv = 0.0;
          for (const Row& r : rows) bv -= std::log(-r.value(cand));
          if (fv + mu * bv <= phi_x - 0.25 * t * decrement2) {
            x = cand;
            ok = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!ok) break;
      if (early_stop && (*early_stop)(x)) return x;
    }
    if (mu <= opts.mu_min * 1.0000001) break;
  }

  // Polish: the Armijo test cannot certify the last few orders of magnitude of
  // centering (the required decreases sink below the noise floor of f), yet
  // those orders decide how clean the stiffest directions end up. A few pure
  // Newton steps, accepted while feasible and strictly shrinking the
  // decrement, finish the job.
  double prev_dec = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 4; ++it) {
    newton_step(opts.mu_min, barrier_val, gphi, step);
    const double decrement2 = -gphi.dot(step);
    if (!(decrement2 > 0.0) || decrement2 >= prev_dec) break;
    prev_dec = decrement2;
    double t = 1.0;
    RVector cand = x + step;
    for (int ls = 0; ls < 60 && !feasible(cand); ++ls) {
      t *= 0.5;
      cand = x + t * step;
    }
    if (!feasible(cand)) break;
    x = cand;
  }
  return x;
}

double min_slack(const std::vector<Row>& rows, const RVector& x) {
  double ms = std::numeric_limits<double>::infinity();
  for (const Row& r : rows) ms = std::min(ms, -r.value(x));
  return ms;
}

/// Warm starts inherited from a previous solve can sit numerically on the
/// boundary, where the barrier Hessian overwhelms double precision. Nudging
/// toward a known interior point restores workable slacks at negligible cost.
RVector dejam(const std::vector<Row>& rows, RVector x, const RVector& interior) {
  if (min_slack(rows, x) < 1e-10) {
    const RVector blend = 0.999 * x + 0.001 * interior;
    if (min_slack(rows, blend) > 0.0) x = blend;
  }
  return x;
}

/// Strictly feasible start: equal split when it already clears every row,
/// otherwise a phase-one minimization of the worst violation. Throws the
/// typed infeasibility errors when the polyhedron is (numerically) empty.
RVector find_start(const Problem& prob, const SolveOptions& opts) {
  RVector x = RVector::Constant(prob.n, 0.5 / prob.n);
  if (prob.strictly_feasible(x)) return x;

  const int n = prob.n;
  double worst = 0.0;
  for (const Row& r : prob.rows)
    if (r.type == RowType::Sic || r.type == RowType::Qos)
      worst = std::max(worst, r.value(x));
  const double s0 = 2.0 * worst + 1.0;
  const double s_cap = 10.0 * s0;

  std::vector<Row> ext;
  auto extend = [n](const Row& r, double s_coef) {
    Row e;
    e.a = RVector::Zero(n + 1);
    e.a.head(n) = r.a;
    e.a(n) = s_coef;
    e.b = r.b;
    e.type = r.type;
    e.who = r.who;
    return e;
  };
  for (const Row& r : prob.rows)
    ext.push_back(extend(r, (r.type == RowType::Sic || r.type == RowType::Qos) ? -1.0 : 0.0));
  {
    Row cap;
    cap.a = RVector::Zero(n + 1);
    cap.a(n) = 1.0;
    cap.b = -s_cap;
    cap.type = RowType::Bound;
    cap.who = n;
    ext.push_back(cap);
  }

  RVector y0(n + 1);
  y0.head(n) = x;
  y0(n) = s0;
  std::function<bool(const RVector&)> early = [n](const RVector& y) { return y(n) < -1e-6; };
  const RVector y =
      barrier_minimize(make_linear_objective(n + 1, n), ext, y0, opts, &early);

  RVector found = y.head(n);
  if (y(n) < -1e-7 && prob.strictly_feasible(found)) return found;

  std::vector<int> qos_users, sic_chains;
  for (const Row& r : prob.rows) {
    if (r.value(found) < -1e-7) continue;
    if (r.type == RowType::Qos) qos_users.push_back(r.who);
    if (r.type == RowType::Sic) sic_chains.push_back(r.who);
  }
  if (!qos_users.empty()) throw InfeasibleQosError(qos_users);
  if (!sic_chains.empty()) throw InfeasibleSicError(sic_chains);
  throw std::runtime_error("power allocation: phase one failed on the core polytope");
}

SolveInfo kkt_of(const Problem& prob, const ObjFn& obj, const RVector& x, double mu) {
  double f;
  RVector g;
  RMatrix h;
  obj(x, f, g, h);
  const double gscale = 1.0 + g.cwiseAbs().maxCoeff();

  // The interior-point estimates mu/slack only identify the active set; they
  // are far too slack-sensitive to certify optimality. A nonnegative
  // least-squares fit over the active rows measures the actual distance from
  // -grad f to the cone of outward constraint normals. The fit is shrunk
  // gently toward the mu/slack estimates so that nearly collinear normals
  // resolve in favor of the rows that are actually tight.
  std::vector<int> act;
  for (int j = 0; j < static_cast<int>(prob.rows.size()); ++j) {
    const double slack = -prob.rows[j].value(x);
    if (mu / slack >= 1e-9 * gscale) act.push_back(j);
  }
  RVector lam;
  while (!act.empty()) {
    const int m = static_cast<int>(act.size());
    RMatrix basis(prob.n, m);
    RVector prior(m);
    for (int i = 0; i < m; ++i) {
      basis.col(i) = prob.rows[act[i]].a;
      prior(i) = mu / -prob.rows[act[i]].value(x);
    }
    const double rho = 1e-8;
    RMatrix gram = basis.transpose() * basis;
    gram.diagonal().array() += rho;
    lam = gram.ldlt().solve(basis.transpose() * (-g) + rho * prior);
    int worst = -1;
    for (int i = 0; i < m; ++i)
      if (lam(i) < 0.0 && (worst < 0 || lam(i) < lam(worst))) worst = i;
    if (worst < 0) break;
    act.erase(act.begin() + worst);
  }

  RVector resid = g;
  double comp = mu;  // rows outside the active set hold lambda*slack = mu
  for (size_t i = 0; i < act.size(); ++i) {
    const Row& r = prob.rows[act[i]];
    resid.noalias() += lam(i) * r.a;
    comp = std::max(comp, lam(i) * -r.value(x));
  }
  SolveInfo info;
  info.kkt_stationarity = resid.cwiseAbs().maxCoeff() / gscale;
  info.kkt_complementarity = comp;
  return info;
}

RVector linear_term(const Problem& prob, const RateParams& params, const RMatrix& p_ref) {
  const DcParts parts = dc_objective_parts(params, p_ref);
  RVector lin(prob.n);
  for (int j = 0; j < prob.n; ++j)
    lin(j) = -parts.grad_h2(prob.vars[j].first, prob.vars[j].second) * prob.p_bs;
  return lin;
}

}  // namespace

RMatrix solve_subproblem(const RateParams& params, const std::vector<double>& r_min,
                         double p_bs_mw, const RMatrix& p_ref, SolveInfo* info,
                         const SolveOptions& opts) {
  params.validate();
  if (static_cast<int>(r_min.size()) != params.num_users())
    throw std::invalid_argument("solve_subproblem: r_min size mismatch");
  if (!(p_bs_mw > 0.0)) throw std::invalid_argument("solve_subproblem: p_bs must be > 0");

  Problem prob = build_problem(params, r_min, p_bs_mw, true, true);
  if (prob.n == 0) {
    if (info) *info = {};
    return RMatrix::Zero(params.gain.rows(), params.gain.cols());
  }
  RVector x0 = prob.pack(p_ref);
  if (min_slack(prob.rows, x0) < 1e-10) {
    const RVector interior = find_start(prob, opts);
    x0 = prob.strictly_feasible(x0) ? dejam(prob.rows, x0, interior) : interior;
  }
  const RVector lin = linear_term(prob, params, p_ref);
  const ObjFn obj = make_h1_objective(prob, lin);
  const RVector x = barrier_minimize(obj, prob.rows, x0, opts);
  if (info) *info = kkt_of(prob, obj, x, opts.mu_min);
  return prob.unpack(x);
}

PowerResult sca_power_allocation(const RateParams& params, const std::vector<double>& r_min,
                                 double p_bs_mw, const SolveOptions& opts) {
  params.validate();
  if (static_cast<int>(r_min.size()) != params.num_users())
    throw std::invalid_argument("sca_power_allocation: r_min size mismatch");
  if (!(p_bs_mw > 0.0)) throw std::invalid_argument("sca_power_allocation: p_bs must be > 0");

  PowerResult res;
  const std::vector<double> zero_floors(params.num_users(), 0.0);
  bool use_sic = true;
  bool use_qos = false;
  for (double v : r_min)
    if (v > 0.0) use_qos = true;

  Problem prob;
  RVector x;
  for (int attempt = 0;; ++attempt) {
    prob = build_problem(params, use_qos ? r_min : zero_floors, p_bs_mw, use_sic, use_qos);
    if (prob.n == 0) {
      res.p = RMatrix::Zero(params.gain.rows(), params.gain.cols());
      res.trace = {0.0};
      res.converged = true;
      return res;
    }
    try {
      x = find_start(prob, opts);
      break;
    } catch (const InfeasibleQosError&) {
      res.qos_dropped = true;
      use_qos = false;
    } catch (const InfeasibleSicError&) {
      res.sic_dropped = true;
      use_sic = false;
    }
    if (attempt >= 2)
      throw std::runtime_error("sca_power_allocation: feasibility ladder exhausted");
  }

  // Initial point: most total received signal, i.e. the minimum of h1 alone.
  const RVector x_interior = x;
  ObjFn obj = make_h1_objective(prob, RVector::Zero(prob.n));
  x = barrier_minimize(obj, prob.rows, x, opts);
  RMatrix p_cur = prob.unpack(x);
  res.trace.push_back(rate_report(params, p_cur).sum_rate);

  const double eps = 1e-3 * std::sqrt(p_bs_mw);
  RVector last_lin = RVector::Zero(prob.n);
  for (int t = 1; t <= opts.sca_iter_max; ++t) {
    last_lin = linear_term(prob, params, p_cur);
    obj = make_h1_objective(prob, last_lin);
    x = barrier_minimize(obj, prob.rows, dejam(prob.rows, x, x_interior), opts);
    const RMatrix p_next = prob.unpack(x);
    res.trace.push_back(rate_report(params, p_next).sum_rate);
    res.iterations = t;
    const double step = (p_next - p_cur).norm();
    p_cur = p_next;
    if (step <= eps) {
      res.converged = true;
      break;
    }
  }
  res.p = p_cur;
  res.info = kkt_of(prob, make_h1_objective(prob, last_lin), x, opts.mu_min);
  return res;
}

}  // namespace mbnoma
