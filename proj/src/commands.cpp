#include "actsense/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "actsense/cmdp_lp.hpp"
#include "actsense/config.hpp"
#include "actsense/csv.hpp"
#include "actsense/experiments.hpp"
#include "actsense/rng.hpp"
#include "actsense/stationary.hpp"
#include "actsense/tables.hpp"

namespace actsense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ModelError(std::string("argument '") + key + "' has the wrong type", key);
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& into) {
  if (!j.contains(key) || j.at(key).is_null()) {
    into.reset();
    return;
  }
  T v{};
  read(j, key, v);
  into = v;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ModelError("cannot create output directory " + dir_.string(), "out");
  }

  template <typename F>
  void write(const std::string& name, F&& body) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ModelError("cannot write " + (dir_ / name).string(), "out");
    body(out);
    out.close();
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

PipelineOptions pipeline_options(const RunArgs& a) {
  PipelineOptions o;
  o.lagrange.epsilon = a.tol;
  o.delta_lambda = a.delta_lambda;
  o.mixture_lambda = a.lambda;
  o.lambda_scale = a.lambda_scale;
  return o;
}

std::vector<std::uint64_t> learner_seeds(const RunArgs& a) {
  return a.seeds.empty() ? std::vector<std::uint64_t>{a.seed} : a.seeds;
}

void cmd_solve_cmdp(const RunArgs& a, const Problem& p, Outputs& out) {
  const TabularMdp& mdp = p.mdp();
  StationarySolution sol;
  try {
    sol = solve_cmdp(mdp, p.model().budget);
  } catch (const std::exception& e) {
    throw StageError("cmdp-lp", exception_kind(e), e.what());
  }
  const Policy pol = policy_from_phi(sol.phi);
  out.write("cmdp_phi.csv", [&](std::ostream& o) { write_phi_csv(p.space(), sol, o); });
  out.write("cmdp_policy.csv", [&](std::ostream& o) { write_policy_csv(p.space(), pol, o); });
  out.write("cmdp_summary.csv", [&](std::ostream& o) {
    CsvWriter w(o, {"key", "value"});
    w.row_strings({"budget", format_number(p.model().budget)});
    w.row_strings({"J", format_number(sol.objective)});
    w.row_strings({"D", format_number(sol.data_usage)});
    w.row_strings({"randomized_states", std::to_string(count_randomized(pol))});
    w.row_strings({"balance_residual", format_number(balance_residual(mdp, sol.phi))});
  });
  if (a.lp_dump) out.write("cmdp.lp", [&](std::ostream& o) { write_lp_format(build_cmdp_lp(mdp, p.model().budget), o); });
}

void cmd_pipeline(const RunArgs& a, const Problem& p, Outputs& out) {
  const PipelineReport r = run_pipeline(p, pipeline_options(a));
  const StateSpace& sp = p.space();
  out.write("summary.csv", [&](std::ostream& o) { write_pipeline_summary(r, p, o); });
  out.write("lambda_trace.csv", [&](std::ostream& o) { write_trace_csv(r.trace, o); });
  out.write("lambda_grid.csv", [&](std::ostream& o) { write_lambda_grid_csv(r.grid, o); });
  out.write("cmdp_phi.csv", [&](std::ostream& o) { write_phi_csv(sp, r.cmdp, o); });
  out.write("cmdp_policy.csv", [&](std::ostream& o) { write_policy_csv(sp, r.cmdp_policy, o); });
  out.write("lagrangian_policy.csv", [&](std::ostream& o) { write_policy_csv(sp, r.lagrangian_policy, o); });
  out.write("vi_value.csv", [&](std::ostream& o) { write_value_csv(sp, r.vi.value, o); });
  out.write("vi_q.csv", [&](std::ostream& o) { write_q_csv(sp, r.vi.q, o); });
  out.write("vi_policy.csv", [&](std::ostream& o) { write_policy_csv(sp, r.vi.policy, o); });
  if (r.cuts) out.write("thresholds.csv", [&](std::ostream& o) { write_threshold_csv(*r.cuts, o); });
  out.write("mixture.csv", [&](std::ostream& o) { write_mixture_csv(r.mixture, o); });
  out.write("agreement.csv", [&](std::ostream& o) { write_agreement_csv(r.agreement, sp, o); });
  out.write("agreement_matrix.csv", [&](std::ostream& o) { write_agreement_matrix(r.agreement, o); });
}

void cmd_qlearn_compare(const RunArgs& a, const Problem& p, Outputs& out) {
  QlearnCompareOptions o;
  o.seeds = learner_seeds(a);
  o.lambda = a.lambda;
  o.workers = a.workers;
  o.learner.beta = p.model().discount;
  o.learner.max_iters = a.iters;
  o.learner.kappa = a.kappa;
  o.learner.per_pair_step = a.per_pair_step;
  o.learner.project_checkpoints = a.project_checkpoints;
  o.learner.project_visited_only = !a.project_all_states;
  const QlearnCompareResult r = run_qlearn_compare(p, o);
  for (std::size_t k = 0; k < r.seeds.size(); ++k) {
    const std::string tag = "seed" + std::to_string(r.seeds[k]);
    out.write("mismatch_" + tag + ".csv",
              [&](std::ostream& os) { write_mismatch_csv(r.conventional[k], r.structured[k], os); });
    out.write("policy_conventional_" + tag + ".csv",
              [&](std::ostream& os) { write_policy_csv(p.space(), r.conventional[k].policy, os); });
    out.write("policy_structured_" + tag + ".csv",
              [&](std::ostream& os) { write_policy_csv(p.space(), r.structured[k].policy, os); });
  }
  out.write("qlearn_finals.csv", [&](std::ostream& os) { write_qlearn_summary(r, os); });
  out.write("summary.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"key", "value"});
    w.row_strings({"lambda", format_number(r.lambda)});
    w.row_strings({"iterations", std::to_string(a.iters)});
    w.row_strings({"seeds", std::to_string(r.seeds.size())});
    w.row_strings({"median_conventional", format_number(r.median_conventional)});
    w.row_strings({"median_structured", format_number(r.median_structured)});
    w.row_strings({"structured_better", std::to_string(r.structured_better)});
    w.row_strings({"ties", std::to_string(r.ties)});
  });
}

void cmd_sweep(const RunArgs& a, const Problem& p, Outputs& out) {
  SweepOptions o;
  o.budgets = a.budgets;
  o.capacities = a.capacities;
  o.charge_probs = a.charge_probs;
  o.full_pipeline = !a.lp_only;
  o.pipeline = pipeline_options(a);
  o.workers = a.workers;
  const std::vector<SweepCell> cells = run_sweep(p.model(), o);
  out.write("sweep.csv",
            [&](std::ostream& os) { write_sweep_csv(cells, p.model().num_activities(), o.full_pipeline, os); });
}

void cmd_simulate(const RunArgs& a, const Problem& p, Outputs& out) {
  std::vector<NamedPolicy> policies;
  try {
    policies.push_back({"cmdp_lp", policy_from_phi(solve_cmdp(p.mdp(), p.model().budget).phi)});
  } catch (const std::exception& e) {
    throw StageError("cmdp-lp", exception_kind(e), e.what());
  }
  PipelineOptions po = pipeline_options(a);
  double lam = 0.0;
  if (po.mixture_lambda) {
    lam = *po.mixture_lambda;
  } else {
    try {
      lam = bisect_lambda(p, InnerSolver::ValueIteration, po.bisection_tol).lambda_star;
    } catch (const std::exception& e) {
      throw StageError("lambda-bisection", exception_kind(e), e.what());
    }
  }
  lam = std::max(lam * po.lambda_scale, po.delta_lambda);
  try {
    policies.push_back({"mixture", build_mixture(p, lam, po.delta_lambda, p.model().discount).as_policy()});
  } catch (const std::exception& e) {
    throw StageError("mixture", exception_kind(e), e.what());
  }
  policies.push_back({"cup", cup_policy(p.model(), p.mdp()).policy});

  SimOptions sim;
  sim.epochs = a.epochs;
  sim.warmup = a.warmup;
  sim.seed = a.seed;
  const auto evals = evaluate_policies(p, policies, sim, a.workers);
  out.write("stats.csv", [&](std::ostream& os) { write_stats_csv(evals, p.model(), os); });
  out.write("stats_detail.csv", [&](std::ostream& os) { write_stats_detail_csv(evals, os); });
}

json seeds_used(const RunArgs& a) {
  json s = json::object();
  s["master"] = a.seed;
  if (a.command == "qlearn-compare") {
    json per = json::array();
    for (std::uint64_t seed : learner_seeds(a))
      per.push_back({{"seed", seed}, {"environment", derive_seed(seed, 0)}, {"exploration", derive_seed(seed, 1)}});
    s["learners"] = per;
  }
  if (a.command == "simulate") {
    json per = json::array();
    for (std::uint64_t k = 0; k < 3; ++k) per.push_back(derive_seed(a.seed, k));
    s["policies"] = per;
  }
  return s;
}

json tolerances(const RunArgs& a) {
  const PipelineOptions po;
  const SimplexOptions so;
  const ViOptions vo;
  const StationaryOptions st;
  return {{"lambda_epsilon", a.tol},
          {"lambda_max_iters", po.lagrange.max_iters},
          {"bisection_tol", po.bisection_tol},
          {"vi_tol", vo.tol},
          {"stationary_tol", st.tol},
          {"simplex_feasibility_tol", so.feasibility_tol},
          {"simplex_pivot_tol", so.pivot_tol},
          {"q_gap_tol", po.gap_tol},
          {"budget_flag_tol", po.budget_tol}};
}

}  // namespace

std::string args_to_json(const RunArgs& a) {
  json j = {{"command", a.command},
            {"config", a.config},
            {"seed", a.seed},
            {"workers", a.workers},
            {"tol", a.tol},
            {"budget", opt(a.budget)},
            {"lp_dump", a.lp_dump},
            {"delta_lambda", a.delta_lambda},
            {"lambda", opt(a.lambda)},
            {"lambda_scale", a.lambda_scale},
            {"seeds", a.seeds},
            {"iters", a.iters},
            {"kappa", a.kappa},
            {"per_pair_step", a.per_pair_step},
            {"project_checkpoints", a.project_checkpoints},
            {"project_all_states", a.project_all_states},
            {"budgets", a.budgets},
            {"capacities", a.capacities},
            {"charge_probs", a.charge_probs},
            {"lp_only", a.lp_only},
            {"epochs", a.epochs},
            {"warmup", a.warmup}};
  return j.dump(2);
}

RunArgs args_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("arguments are not valid JSON: ") + e.what(), "args");
  }
  if (!j.is_object()) throw ModelError("arguments must be a JSON object", "args");
  static const std::set<std::string> known = {
      "command", "config", "seed", "workers", "tol", "budget", "lp_dump", "delta_lambda", "lambda",
      "lambda_scale", "seeds", "iters", "kappa", "per_pair_step", "project_checkpoints", "project_all_states",
      "budgets", "capacities", "charge_probs", "lp_only", "epochs", "warmup"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ModelError("unknown argument '" + item.key() + "'", item.key());
  RunArgs a;
  read(j, "command", a.command);
  read(j, "config", a.config);
  read(j, "seed", a.seed);
  read(j, "workers", a.workers);
  read(j, "tol", a.tol);
  read(j, "budget", a.budget);
  read(j, "lp_dump", a.lp_dump);
  read(j, "delta_lambda", a.delta_lambda);
  read(j, "lambda", a.lambda);
  read(j, "lambda_scale", a.lambda_scale);
  read(j, "seeds", a.seeds);
  read(j, "iters", a.iters);
  read(j, "kappa", a.kappa);
  read(j, "per_pair_step", a.per_pair_step);
  read(j, "project_checkpoints", a.project_checkpoints);
  read(j, "project_all_states", a.project_all_states);
  read(j, "budgets", a.budgets);
  read(j, "capacities", a.capacities);
  read(j, "charge_probs", a.charge_probs);
  read(j, "lp_only", a.lp_only);
  read(j, "epochs", a.epochs);
  read(j, "warmup", a.warmup);
  return a;
}

SensingModel resolve_model(const RunArgs& args) {
  SensingModel m = args.config.empty() ? default_model() : load_model(args.config);
  if (args.budget) {
    m.budget = *args.budget;
    try {
      m.validate();
    } catch (const ModelError& e) {
      throw ModelError(e.what(), "budget");
    }
  }
  return m;
}

namespace {

void check_args(const RunArgs& a) {
  static const std::set<std::string> commands = {"solve-cmdp", "pipeline", "qlearn-compare", "sweep", "simulate"};
  if (!commands.count(a.command)) throw ModelError("unknown command '" + a.command + "'", "command");
  if (!(a.tol > 0.0)) throw ModelError("tol must be positive", "tol");
  if (a.workers < 0) throw ModelError("workers must be nonnegative", "workers");
  if (!(a.delta_lambda > 0.0)) throw ModelError("delta_lambda must be positive", "delta_lambda");
  if (a.lambda && !(*a.lambda >= 0.0)) throw ModelError("lambda must be nonnegative", "lambda");
  if (!(a.lambda_scale > 0.0)) throw ModelError("lambda_scale must be positive", "lambda_scale");
  if (a.iters < 1) throw ModelError("iters must be at least 1", "iters");
  if (!(a.kappa > 0.0)) throw ModelError("kappa must be positive", "kappa");
  if (a.epochs < 1) throw ModelError("epochs must be at least 1", "epochs");
  for (double d : a.budgets)
    if (!(d > 0.0)) throw ModelError("budgets must be positive", "budgets");
  for (int b : a.capacities)
    if (b < 0) throw ModelError("capacities must be nonnegative", "capacities");
  for (double c : a.charge_probs)
    if (!(c >= 0.0 && c <= 1.0)) throw ModelError("charge_probs must lie in [0,1]", "charge_probs");
}

}  // namespace

RunResult execute(const RunArgs& args, const SensingModel& model, const fs::path& out_dir) {
  check_args(args);
  model.validate();
  const Problem problem(model);
  Outputs out(out_dir);
  if (args.command == "solve-cmdp") cmd_solve_cmdp(args, problem, out);
  else if (args.command == "pipeline") cmd_pipeline(args, problem, out);
  else if (args.command == "qlearn-compare") cmd_qlearn_compare(args, problem, out);
  else if (args.command == "sweep") cmd_sweep(args, problem, out);
  else cmd_simulate(args, problem, out);

  const std::string model_text = model_to_json(model);
  json outputs = json::object();
  for (const auto& f : out.files()) outputs[f] = hex64(fnv1a64(file_bytes(out.dir() / f)));
  json manifest = {{"tool", "actsense"},
                   {"version", kToolVersion},
                   {"command", args.command},
                   {"args", json::parse(args_to_json(args))},
                   {"config_path", args.config},
                   {"config_hash", hex64(fnv1a64(model_text))},
                   {"model", json::parse(model_text)},
                   {"seeds", seeds_used(args)},
                   {"tolerances", tolerances(args)},
                   {"rng", kRngName},
                   {"created", utc_timestamp()},
                   {"outputs", outputs}};
  std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
  if (!mf) throw ModelError("cannot write manifest in " + out.dir().string(), "out");
  mf << manifest.dump(2) << '\n';
  return {out.files()};
}

RerunReport rerun_manifest(const fs::path& manifest_path, const fs::path& out_dir) {
  json m;
  try {
    m = json::parse(file_bytes(manifest_path));
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("manifest is not valid JSON: ") + e.what(), "manifest");
  } catch (const std::runtime_error& e) {
    throw ModelError(e.what(), "manifest");
  }
  for (const char* key : {"args", "model", "outputs"})
    if (!m.contains(key)) throw ModelError(std::string("manifest lacks '") + key + "'", key);
  const RunArgs args = args_from_json(m.at("args").dump());
  const SensingModel model = model_from_json(m.at("model").dump());
  if (fs::exists(out_dir) && fs::equivalent(out_dir, manifest_path.parent_path()))
    throw ModelError("re-run output directory must differ from the manifest's", "out");

  RerunReport rep;
  rep.files = execute(args, model, out_dir).files;
  const std::set<std::string> produced(rep.files.begin(), rep.files.end());
  for (const auto& item : m.at("outputs").items()) {
    const std::string expected = item.value().get<std::string>();
    if (!produced.count(item.key()) || hex64(fnv1a64(file_bytes(out_dir / item.key()))) != expected)
      rep.mismatched.push_back(item.key());
  }
  for (const auto& f : rep.files)
    if (!m.at("outputs").contains(f)) rep.mismatched.push_back(f);
  return rep;
}

int exit_code_for(const std::exception& e) {
  const std::string kind = exception_kind(e);
  return kind == "config_error" || kind == "invalid_argument" ? 2 : 1;
}

std::string error_record(const std::exception& e) {
  json j = {{"error", exception_kind(e)}, {"message", e.what()}};
  if (auto* s = dynamic_cast<const StageError*>(&e)) j["stage"] = s->stage();
  if (auto* m = dynamic_cast<const ModelError*>(&e); m && !m->key().empty()) j["key"] = m->key();
  return j.dump();
}

}  // namespace actsense
