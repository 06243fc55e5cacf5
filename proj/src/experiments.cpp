#include "actsense/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include <omp.h>

#include "actsense/cmdp_lp.hpp"
#include "actsense/csv.hpp"
#include "actsense/rng.hpp"
#include "actsense/stationary.hpp"

namespace actsense {

std::string exception_kind(const std::exception& e) {
  if (auto* s = dynamic_cast<const StageError*>(&e)) return s->kind();
  if (dynamic_cast<const ModelError*>(&e)) return "config_error";
  if (dynamic_cast<const NotConverged*>(&e)) return "not_converged";
  if (dynamic_cast<const NotErgodic*>(&e)) return "not_ergodic";
  if (dynamic_cast<const LpError*>(&e)) return "lp_error";
  if (dynamic_cast<const NoFeasibleLambda*>(&e)) return "no_feasible_lambda";
  if (dynamic_cast<const DegenerateMixture*>(&e)) return "degenerate_mixture";
  if (dynamic_cast<const NotThreshold*>(&e)) return "not_threshold";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  return "error";
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, exception_kind(e), e.what());
  }
}

bool supports_meet(double p, double q) {
  constexpr double band = 1e-6;
  return (p > band && q > band) || (p < 1.0 - band && q < 1.0 - band);
}

int thread_count(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

}  // namespace

RouteAgreement compare_routes(const Policy& cmdp, const Policy& lagrangian, const ViResult& vi, double gap_tol) {
  const std::size_t n = vi.policy.size();
  RouteAgreement a;
  a.cmdp_lp = cmdp.active_prob;
  a.lagrangian_lp = lagrangian.active_prob;
  a.value_iteration.resize(n);
  a.q_gap.resize(n);
  a.counted.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    a.value_iteration[s] = vi.policy[s] == Action::Active ? 1.0 : 0.0;
    a.q_gap[s] = vi.q.gap(s);
    a.counted[s] = std::abs(a.q_gap[s]) >= gap_tol;
    if (!a.counted[s]) continue;
    ++a.counted_states;
    a.cmdp_vs_lagrangian += !supports_meet(a.cmdp_lp[s], a.lagrangian_lp[s]);
    a.cmdp_vs_vi += !supports_meet(a.cmdp_lp[s], a.value_iteration[s]);
    a.lagrangian_vs_vi += !supports_meet(a.lagrangian_lp[s], a.value_iteration[s]);
  }
  return a;
}

PipelineReport run_pipeline(const Problem& problem, const PipelineOptions& options) {
  const TabularMdp& mdp = problem.mdp();
  const SensingModel& model = problem.model();
  PipelineReport r;

  r.cmdp = stage("cmdp-lp", [&] { return solve_cmdp(mdp, model.budget, options.lagrange.simplex); });
  r.cmdp_policy = policy_from_phi(r.cmdp.phi);

  LagrangeOptions lo = options.lagrange;
  lo.backend = InnerSolver::Lp;
  r.trace = stage("lambda-estimation", [&] { return estimate_lambda(problem, lo); });
  r.lagrangian = stage("lagrangian-lp", [&] { return solve_lagrangian(mdp, r.trace.lambda_star, lo.simplex); });
  r.lagrangian_policy = policy_from_phi(r.lagrangian.phi);
  r.grid = stage("lambda-grid", [&] {
    return lambda_optimality_check(problem, r.trace.lambda_star, options.grid_width, options.grid_points);
  });

  if (options.mixture_lambda) {
    r.mixture_lambda = *options.mixture_lambda;
    r.mixture_lambda_source = "override";
  } else {
    r.bisection = stage("lambda-bisection", [&] {
      return bisect_lambda(problem, InnerSolver::ValueIteration, options.bisection_tol, lo.vi);
    });
    r.mixture_lambda = r.bisection->lambda_star;
    r.mixture_lambda_source = "bisection";
  }
  r.mixture_lambda *= options.lambda_scale;

  r.vi = stage("value-iteration", [&] { return value_iteration(mdp, r.mixture_lambda, model.discount, lo.vi); });
  try {
    r.cuts = extract_threshold(r.vi.policy, problem.space());
  } catch (const NotThreshold& e) {
    r.threshold_failure = e.what();
  }
  r.monotone = verify_value_monotone(r.vi.value, problem.space());
  r.submodular = verify_q_submodular(r.vi.q, problem.space());

  // A multiplier below delta_lambda would put the lower policy at a negative
  // lambda; shift the pair up so it starts at 0.
  const double centre = std::max(r.mixture_lambda, options.delta_lambda);
  r.mixture = stage("mixture", [&] {
    return build_mixture(problem, centre, options.delta_lambda, model.discount, lo.vi);
  });
  r.mixture_measure = stage("mixture", [&] { return mixture_as_stationary(problem, r.mixture); });
  r.budget_deviation = std::abs(r.mixture_measure.data_usage - model.budget);
  r.budget_flag = r.budget_deviation > options.budget_tol;

  r.agreement = compare_routes(r.cmdp_policy, r.lagrangian_policy, r.vi, options.gap_tol);
  return r;
}

void write_pipeline_summary(const PipelineReport& r, const Problem& problem, std::ostream& out) {
  CsvWriter w(out, {"key", "value"});
  auto num = [&](const char* k, double v) { w.row_strings({k, format_number(v)}); };
  auto str = [&](const char* k, const std::string& v) { w.row_strings({k, v}); };
  auto flag = [&](const char* k, bool v) { w.row_strings({k, v ? "1" : "0"}); };
  auto count = [&](const char* k, std::size_t v) { w.row_strings({k, std::to_string(v)}); };

  num("budget", problem.model().budget);
  num("J_cmdp", r.cmdp.objective);
  num("D_cmdp", r.cmdp.data_usage);
  count("cmdp_randomized_states", count_randomized(r.cmdp_policy));
  num("lambda_star", r.trace.lambda_star);
  count("lambda_iterations", r.trace.iterations.size());
  flag("lambda_converged", r.trace.converged);
  num("J_lagrangian", r.lagrangian.objective);
  num("D_lagrangian", r.lagrangian.data_usage);
  flag("lambda_grid_monotone", r.grid.monotone());
  flag("lambda_grid_consistent", r.grid.lambda_star_consistent);
  num("mixture_lambda", r.mixture_lambda);
  str("mixture_lambda_source", r.mixture_lambda_source);
  if (r.bisection) {
    num("bisection_lower", r.bisection->lower);
    num("bisection_D_star", r.bisection->data_at_star);
    num("bisection_D_lower", r.bisection->data_at_lower);
  }
  count("vi_sweeps", r.vi.sweeps);
  flag("threshold_ok", r.cuts.has_value());
  if (!r.threshold_failure.empty()) str("threshold_failure", r.threshold_failure);
  str("value_direction", to_string(r.monotone.overall));
  count("submodular_comparisons", r.submodular.comparisons);
  count("submodular_violations", r.submodular.violations.size());
  num("lambda_minus", r.mixture.lambda_minus);
  num("lambda_plus", r.mixture.lambda_plus);
  num("D_minus", r.mixture.data_minus);
  num("D_plus", r.mixture.data_plus);
  num("gamma", r.mixture.gamma);
  flag("gamma_clamped", r.mixture.gamma_clamped);
  flag("mixture_slack", r.mixture.slack);
  num("J_mixture", r.mixture_measure.objective);
  num("D_mixture", r.mixture_measure.data_usage);
  num("budget_deviation", r.budget_deviation);
  flag("budget_flag", r.budget_flag);
  count("agreement_counted", r.agreement.counted_states);
  count("disagree_cmdp_lagrangian", r.agreement.cmdp_vs_lagrangian);
  count("disagree_cmdp_vi", r.agreement.cmdp_vs_vi);
  count("disagree_lagrangian_vi", r.agreement.lagrangian_vs_vi);
}

void write_agreement_csv(const RouteAgreement& a, const StateSpace& space, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b", "cmdp_lp", "lagrangian_lp", "value_iteration", "q_gap", "counted"});
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    w.row(st.u, st.e, st.b, a.cmdp_lp[s], a.lagrangian_lp[s], a.value_iteration[s], a.q_gap[s],
          static_cast<bool>(a.counted[s]));
  }
}

void write_agreement_matrix(const RouteAgreement& a, std::ostream& out) {
  CsvWriter w(out, {"route_a", "route_b", "counted", "disagree"});
  w.row("cmdp_lp", "lagrangian_lp", a.counted_states, a.cmdp_vs_lagrangian);
  w.row("cmdp_lp", "value_iteration", a.counted_states, a.cmdp_vs_vi);
  w.row("lagrangian_lp", "value_iteration", a.counted_states, a.lagrangian_vs_vi);
}

void write_lambda_grid_csv(const OptimalityReport& grid, std::ostream& out) {
  CsvWriter w(out, {"lambda", "data_usage"});
  for (const auto& p : grid.grid) w.row(p.lambda, p.data_usage);
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

QlearnCompareResult run_qlearn_compare(const Problem& problem, const QlearnCompareOptions& options) {
  if (options.seeds.empty()) throw std::invalid_argument("qlearn-compare needs at least one seed");
  QlearnCompareResult res;
  res.seeds = options.seeds;
  res.lambda = options.lambda ? *options.lambda : stage("lambda-bisection", [&] {
    return bisect_lambda(problem, InnerSolver::ValueIteration, options.bisection_tol).lambda_star;
  });
  const ViResult optimal =
      stage("value-iteration", [&] { return value_iteration(problem.mdp(), res.lambda, options.learner.beta); });
  const MismatchReference ref = MismatchReference::from(optimal);

  const std::size_t n = options.seeds.size();
  res.conventional.resize(n);
  res.structured.resize(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(options.workers))
  for (std::size_t k = 0; k < n; ++k) {
    try {
      LearnerConfig cfg = options.learner;
      cfg.lambda = res.lambda;
      cfg.seed = options.seeds[k];
      res.conventional[k] = run_conventional(problem, cfg, ref);
      res.structured[k] = run_structured(problem, cfg, ref);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> conv, st;
  for (std::size_t k = 0; k < n; ++k) {
    conv.push_back(res.conventional[k].mismatch.back());
    st.push_back(res.structured[k].mismatch.back());
    res.structured_better += st.back() < conv.back();
    res.ties += st.back() == conv.back();
  }
  res.median_conventional = median(conv);
  res.median_structured = median(st);
  return res;
}

void write_mismatch_csv(const LearningRun& conventional, const LearningRun& structured, std::ostream& out) {
  if (conventional.checkpoints != structured.checkpoints)
    throw std::invalid_argument("paired runs have different checkpoints");
  CsvWriter w(out, {"step", "mismatch_conventional", "mismatch_structured"});
  for (std::size_t i = 0; i < conventional.checkpoints.size(); ++i)
    w.row(conventional.checkpoints[i], conventional.mismatch[i], structured.mismatch[i]);
}

void write_qlearn_summary(const QlearnCompareResult& r, std::ostream& out) {
  CsvWriter w(out, {"seed", "final_conventional", "final_structured"});
  for (std::size_t k = 0; k < r.seeds.size(); ++k)
    w.row(r.seeds[k], r.conventional[k].mismatch.back(), r.structured[k].mismatch.back());
}

std::vector<SweepCell> run_sweep(const SensingModel& base, const SweepOptions& options) {
  std::vector<double> budgets = options.budgets, charges = options.charge_probs;
  std::vector<int> caps = options.capacities;
  if (budgets.empty()) budgets = {base.budget};
  if (caps.empty()) caps = {base.capacity()};
  if (charges.empty()) charges = {base.charge_prob};

  std::vector<SweepCell> cells;
  for (double cp : charges)
    for (int cap : caps)
      for (double d : budgets) {
        SweepCell c;
        c.budget = d, c.capacity = cap, c.charge_prob = cp;
        cells.push_back(std::move(c));
      }

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(options.workers))
  for (std::size_t k = 0; k < cells.size(); ++k) {
    SweepCell& c = cells[k];
    try {
      SensingModel m = base;
      m.budget = c.budget;
      m.charge_prob = c.charge_prob;
      m.space = StateSpace(base.num_activities(), c.capacity);
      m.validate();
      const Problem p(m);
      const StationarySolution opt = solve_cmdp(p.mdp(), m.budget, options.pipeline.lagrange.simplex);
      c.J = opt.objective;
      c.D = opt.data_usage;
      c.b_avg = avg_battery(p.space(), opt.phi);
      c.b_avg_active = avg_battery_when_active(p.space(), opt.phi);
      c.rho = sync_probability(p.mdp(), opt.phi);
      c.rho_active = sync_probability_when_active(p.mdp(), opt.phi);
      c.tau = overflow_probability(m, opt.phi);
      c.tau_energy = energy_overflow_probability(m, opt.phi);
      const ActivityError ae = per_activity_error(m, p.mdp(), opt.phi);
      c.activity_raw = ae.raw;
      c.activity_normalized = ae.normalized;

      const CupSolution cup = cup_policy(m, p.mdp());
      c.J_cup_closed = cup.measure.objective;
      c.D_cup_closed = cup.measure.data_usage;
      const StationarySolution cup_chain = stationary_distribution(p.mdp(), cup.policy);
      c.J_cup = cup_chain.objective;
      c.D_cup = cup_chain.data_usage;
      const ActivityError ce = per_activity_error(m, p.mdp(), cup_chain.phi);
      c.cup_activity_raw = ce.raw;
      c.cup_activity_normalized = ce.normalized;

      if (options.full_pipeline) {
        const PipelineReport rep = run_pipeline(p, options.pipeline);
        c.lambda_star = rep.trace.lambda_star;
        c.mixture_lambda = rep.mixture_lambda;
        c.J_mixture = rep.mixture_measure.objective;
        c.D_mixture = rep.mixture_measure.data_usage;
      }
      c.ok = true;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }
  return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, int num_activities, bool full_pipeline, std::ostream& out) {
  std::vector<std::string> header = {"D",   "B",     "charge_prob", "ok",           "J",   "D_analytic",
                                     "J_cup", "D_cup", "J_cup_closed", "D_cup_closed", "b_avg", "b_avg_active",
                                     "rho", "rho_active", "tau",     "tau_energy"};
  for (int u = 0; u < num_activities; ++u) header.push_back("err_raw_u" + std::to_string(u));
  for (int u = 0; u < num_activities; ++u) header.push_back("err_norm_u" + std::to_string(u));
  for (int u = 0; u < num_activities; ++u) header.push_back("cup_err_raw_u" + std::to_string(u));
  for (int u = 0; u < num_activities; ++u) header.push_back("cup_err_norm_u" + std::to_string(u));
  if (full_pipeline)
    for (const char* h : {"lambda_star", "mixture_lambda", "J_mixture", "D_mixture"}) header.push_back(h);
  header.push_back("error");
  CsvWriter w(out, header);

  for (const SweepCell& c : cells) {
    std::vector<std::string> row = {format_number(c.budget), std::to_string(c.capacity), format_number(c.charge_prob),
                                    c.ok ? "1" : "0"};
    auto put = [&](double v) { row.push_back(c.ok ? format_number(v) : ""); };
    for (double v : {c.J, c.D, c.J_cup, c.D_cup, c.J_cup_closed, c.D_cup_closed, c.b_avg, c.b_avg_active, c.rho,
                     c.rho_active, c.tau, c.tau_energy})
      put(v);
    for (const auto* vec : {&c.activity_raw, &c.activity_normalized, &c.cup_activity_raw, &c.cup_activity_normalized})
      for (int u = 0; u < num_activities; ++u) put(c.ok ? (*vec)[static_cast<std::size_t>(u)] : 0.0);
    if (full_pipeline)
      for (double v : {c.lambda_star, c.mixture_lambda, c.J_mixture, c.D_mixture}) put(v);
    row.push_back(c.error);
    w.row_strings(row);
  }
}

std::vector<PolicyEvaluation> evaluate_policies(const Problem& problem, const std::vector<NamedPolicy>& policies,
                                                const SimOptions& sim, int workers) {
  std::vector<PolicyEvaluation> out(policies.size());
  std::vector<std::exception_ptr> errors(policies.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(workers))
  for (std::size_t k = 0; k < policies.size(); ++k) {
    try {
      PolicyEvaluation& ev = out[k];
      ev.name = policies[k].name;
      ev.analytic = stationary_distribution(problem.mdp(), policies[k].policy);
      ev.b_avg = avg_battery(problem.space(), ev.analytic.phi);
      ev.rho = sync_probability(problem.mdp(), ev.analytic.phi);
      ev.tau = overflow_probability(problem.model(), ev.analytic.phi);
      ev.tau_energy = energy_overflow_probability(problem.model(), ev.analytic.phi);
      SimOptions o = sim;
      o.seed = derive_seed(sim.seed, k);
      ev.seed = o.seed;
      ev.mc = simulate(problem.model(), policies[k].policy, o);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_stats_csv(const std::vector<PolicyEvaluation>& evals, const SensingModel& model, std::ostream& out) {
  CsvWriter w(out, {"policy_name", "D", "B", "charge_prob", "J_analytic", "D_analytic", "J_mc", "J_mc_se", "b_avg",
                    "rho", "tau", "seed", "epochs"});
  for (const auto& ev : evals)
    w.row(ev.name, model.budget, model.capacity(), model.charge_prob, ev.analytic.objective, ev.analytic.data_usage,
          ev.mc.detect_error.mean, ev.mc.detect_error.se, ev.b_avg, ev.rho, ev.tau, ev.seed, ev.mc.epochs);
}

void write_stats_detail_csv(const std::vector<PolicyEvaluation>& evals, std::ostream& out) {
  CsvWriter w(out, {"policy_name", "metric", "analytic", "mc", "mc_se"});
  for (const auto& ev : evals) {
    w.row(ev.name, "J", ev.analytic.objective, ev.mc.detect_error.mean, ev.mc.detect_error.se);
    w.row(ev.name, "D", ev.analytic.data_usage, ev.mc.data_usage.mean, ev.mc.data_usage.se);
    w.row(ev.name, "b_avg", ev.b_avg, ev.mc.avg_battery.mean, ev.mc.avg_battery.se);
    w.row(ev.name, "rho", ev.rho, ev.mc.sync_rate.mean, ev.mc.sync_rate.se);
    w.row(ev.name, "tau", ev.tau, ev.mc.overflow.mean, ev.mc.overflow.se);
    w.row(ev.name, "tau_energy", ev.tau_energy, ev.mc.energy_overflow.mean, ev.mc.energy_overflow.se);
  }
}

bool within_standard_errors(double analytic, const Estimate& mc, std::uint64_t epochs, double k, bool rate) {
  double se = mc.se;
  if (rate && epochs > 0) {
    const double p = std::clamp(analytic, 0.0, 1.0);
    se = std::max(se, std::sqrt(p * (1.0 - p) / static_cast<double>(epochs)));
  }
  return std::abs(mc.mean - analytic) <= k * se;
}

}  // namespace actsense
