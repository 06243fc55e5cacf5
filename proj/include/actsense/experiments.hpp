#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsense/dp.hpp"
#include "actsense/lagrange.hpp"
#include "actsense/mixture.hpp"
#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/qlearn.hpp"
#include "actsense/simulate.hpp"
#include "actsense/structure.hpp"

namespace actsense {

/// Short name of a library exception type ("not_converged", "lp_error", ...).
std::string exception_kind(const std::exception& e);

/// A module error rethrown with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::string kind, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), kind_(std::move(kind)) {}
  const std::string& stage() const { return stage_; }
  /// exception_kind of the original error.
  const std::string& kind() const { return kind_; }

 private:
  std::string stage_;
  std::string kind_;
};

struct PipelineOptions {
  LagrangeOptions lagrange;  // multiplier search on the LP backend
  std::size_t grid_points = 11;
  double grid_width = 0.1;
  double bisection_tol = 1e-6;
  double delta_lambda = 0.01;
  /// Mixture multiplier; when unset it comes from bisection on the VI backend.
  std::optional<double> mixture_lambda;
  double lambda_scale = 1.0;  // applied to the mixture multiplier, e.g. 2 for the wrong-lambda check
  double gap_tol = 1e-6;
  double budget_tol = 1e-3;
};

/// Per-state comparison of the three solution routes. Randomized routes are
/// stored as P(active); two routes agree at a state when their supports
/// intersect.
struct RouteAgreement {
  std::vector<double> cmdp_lp;
  std::vector<double> lagrangian_lp;
  std::vector<double> value_iteration;
  std::vector<double> q_gap;
  std::vector<bool> counted;  // |q_gap| >= gap_tol
  std::size_t counted_states = 0;
  std::size_t cmdp_vs_lagrangian = 0;
  std::size_t cmdp_vs_vi = 0;
  std::size_t lagrangian_vs_vi = 0;

  bool all_agree() const { return cmdp_vs_lagrangian == 0 && cmdp_vs_vi == 0 && lagrangian_vs_vi == 0; }
};

RouteAgreement compare_routes(const Policy& cmdp, const Policy& lagrangian, const ViResult& vi, double gap_tol);

struct PipelineReport {
  StationarySolution cmdp;
  Policy cmdp_policy;
  LagrangeTrace trace;
  StationarySolution lagrangian;  // at trace.lambda_star
  Policy lagrangian_policy;
  OptimalityReport grid;
  std::optional<BisectionResult> bisection;
  double mixture_lambda = 0.0;
  std::string mixture_lambda_source;  // "bisection" or "override"
  ViResult vi;                        // at mixture_lambda
  std::optional<ThresholdTable> cuts; // empty when the VI policy is not threshold
  std::string threshold_failure;
  MonotoneReport monotone;
  SubmodularReport submodular;
  MixturePolicy mixture;
  StationarySolution mixture_measure;
  RouteAgreement agreement;
  double budget_deviation = 0.0;  // |D_mixture - D|
  bool budget_flag = false;       // budget_deviation > budget_tol
};

/// CMDP LP, Lagrangian LP family, multiplier search, value iteration with
/// structure checks, mixture, route comparison. Throws StageError.
PipelineReport run_pipeline(const Problem& problem, const PipelineOptions& options = {});

/// key,value rows describing a pipeline run.
void write_pipeline_summary(const PipelineReport& report, const Problem& problem, std::ostream& out);
/// u,e,b,cmdp_lp,lagrangian_lp,value_iteration,q_gap,counted
void write_agreement_csv(const RouteAgreement& a, const StateSpace& space, std::ostream& out);
/// route_a,route_b,counted,disagree
void write_agreement_matrix(const RouteAgreement& a, std::ostream& out);
/// lambda,data_usage
void write_lambda_grid_csv(const OptimalityReport& grid, std::ostream& out);

struct QlearnCompareOptions {
  std::vector<std::uint64_t> seeds;
  LearnerConfig learner;  // mode and seed are set per run
  /// Fixed multiplier; when unset it comes from bisection on the VI backend.
  std::optional<double> lambda;
  double bisection_tol = 1e-6;
  int workers = 0;
};

struct QlearnCompareResult {
  double lambda = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<LearningRun> conventional;
  std::vector<LearningRun> structured;
  double median_conventional = 0.0;
  double median_structured = 0.0;
  std::size_t structured_better = 0;
  std::size_t ties = 0;
};

double median(std::vector<double> xs);

/// Paired runs, one seed per worker.
QlearnCompareResult run_qlearn_compare(const Problem& problem, const QlearnCompareOptions& options);
/// step,mismatch_conventional,mismatch_structured
void write_mismatch_csv(const LearningRun& conventional, const LearningRun& structured, std::ostream& out);
/// seed,final_conventional,final_structured
void write_qlearn_summary(const QlearnCompareResult& result, std::ostream& out);

struct SweepOptions {
  std::vector<double> budgets;
  std::vector<int> capacities;
  std::vector<double> charge_probs;
  /// Also run the multiplier search, bisection and the mixture per cell.
  bool full_pipeline = true;
  PipelineOptions pipeline;
  int workers = 0;
};

struct SweepCell {
  double budget = 0.0;
  int capacity = 0;
  double charge_prob = 0.0;
  bool ok = false;
  std::string error;
  double J = 0.0, D = 0.0;
  double J_cup = 0.0, D_cup = 0.0;          // CUP policy under its own stationary law
  double J_cup_closed = 0.0, D_cup_closed = 0.0;  // closed-form CUP measure
  double b_avg = 0.0, b_avg_active = 0.0;
  double rho = 0.0, rho_active = 0.0;
  double tau = 0.0, tau_energy = 0.0;
  std::vector<double> activity_raw, activity_normalized;
  std::vector<double> cup_activity_raw, cup_activity_normalized;
  double lambda_star = 0.0, mixture_lambda = 0.0, J_mixture = 0.0, D_mixture = 0.0;
};

/// Cartesian product of the axes, charge_prob outermost and D innermost. An
/// empty axis takes the base model's value. Cell failures are recorded and the
/// sweep continues.
std::vector<SweepCell> run_sweep(const SensingModel& base, const SweepOptions& options);
void write_sweep_csv(const std::vector<SweepCell>& cells, int num_activities, bool full_pipeline, std::ostream& out);

struct NamedPolicy {
  std::string name;
  Policy policy;
};

struct PolicyEvaluation {
  std::string name;
  StationarySolution analytic;
  double b_avg = 0.0, rho = 0.0, tau = 0.0, tau_energy = 0.0;
  TrajectoryStats mc;
  std::uint64_t seed = 0;
};

/// Exact stationary metrics and a Monte-Carlo run per policy; policy k uses
/// seed derive_seed(sim.seed, k). Policies run concurrently.
std::vector<PolicyEvaluation> evaluate_policies(const Problem& problem, const std::vector<NamedPolicy>& policies,
                                                const SimOptions& sim, int workers = 0);
/// policy_name,D,B,charge_prob,J_analytic,D_analytic,J_mc,J_mc_se,b_avg,rho,tau,seed,epochs
void write_stats_csv(const std::vector<PolicyEvaluation>& evals, const SensingModel& model, std::ostream& out);
/// policy_name,metric,analytic,mc,mc_se
void write_stats_detail_csv(const std::vector<PolicyEvaluation>& evals, std::ostream& out);

/// |mc - analytic| <= k * se, with se floored at the binomial standard error
/// sqrt(p(1-p)/n) of the analytic rate when `rate` is set (a run that sees no
/// rare event has zero batch spread).
bool within_standard_errors(double analytic, const Estimate& mc, std::uint64_t epochs, double k, bool rate);

}  // namespace actsense
