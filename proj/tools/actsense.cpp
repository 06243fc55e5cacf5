#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "actsense/commands.hpp"

namespace fs = std::filesystem;
using actsense::RunArgs;

namespace {

// "3", "1-20" and "1..20" are accepted; entries are comma-separated.
std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
  std::vector<std::uint64_t> out;
  for (const auto& item : items) {
    std::size_t cut = item.find("..");
    std::size_t skip = 2;
    if (cut == std::string::npos) cut = item.find('-'), skip = 1;
    try {
      if (cut == std::string::npos) {
        out.push_back(std::stoull(item));
        continue;
      }
      const std::uint64_t lo = std::stoull(item.substr(0, cut)), hi = std::stoull(item.substr(cut + skip));
      if (hi < lo) throw std::invalid_argument("empty range");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } catch (const std::exception&) {
      throw actsense::ModelError("bad seed list entry '" + item + "'", "seeds");
    }
  }
  return out;
}

void write_error_file(const fs::path& out, const std::string& record) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return;
  std::ofstream f(out / "error.json");
  if (f) f << record << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity-sensing CMDP toolkit"};
  app.require_subcommand(0, 1);

  std::string manifest;
  std::string rerun_out = "rerun";
  app.add_option("--manifest", manifest, "Re-run the run recorded in this manifest");
  auto* rerun_out_opt = app.add_option("--out", rerun_out, "Output directory for --manifest");
  (void)rerun_out_opt;

  RunArgs args;
  std::string out_dir = "out";
  std::vector<std::string> seed_items;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "Model config (JSON); default model when omitted");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", args.seed, "Master seed")->capture_default_str();
    sub->add_option("--workers", args.workers, "Worker threads (0: OpenMP default)")->capture_default_str();
    sub->add_option("--tol", args.tol, "Multiplier search stopping tolerance")->capture_default_str();
    sub->add_option("--budget", args.budget, "Override the data budget D");
  };
  auto multiplier = [&](CLI::App* sub) {
    sub->add_option("--delta-lambda", args.delta_lambda, "Mixture half-width")->capture_default_str();
    sub->add_option("--lambda", args.lambda, "Fixed multiplier instead of bisection");
    sub->add_option("--lambda-scale", args.lambda_scale, "Scale applied to the multiplier")->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve-cmdp", "Solve the CMDP by linear programming");
  common(solve);
  solve->add_flag("--lp-dump", args.lp_dump, "Also write the LP in CPLEX LP format");

  auto* pipeline = app.add_subcommand("pipeline", "CMDP LP, Lagrangian LP, multiplier search, value iteration, mixture");
  common(pipeline);
  multiplier(pipeline);

  auto* qlearn = app.add_subcommand("qlearn-compare", "Paired conventional and structured Q-learning");
  common(qlearn);
  qlearn->add_option("--seeds", seed_items, "Learner seeds, e.g. 1-20 or 1,4,9")->delimiter(',');
  qlearn->add_option("--iters", args.iters, "Learning steps L")->capture_default_str();
  qlearn->add_option("--kappa", args.kappa, "Structured start slope")->capture_default_str();
  qlearn->add_option("--lambda", args.lambda, "Fixed multiplier instead of bisection");
  qlearn->add_flag("--per-pair-step", args.per_pair_step, "Step 1/sqrt(n(s,a)+1) instead of the global counter");
  qlearn->add_flag("--project-checkpoints", args.project_checkpoints, "Project the structured policy at checkpoints");
  qlearn->add_flag("--project-all-states", args.project_all_states,
                   "Count never-visited states in the threshold projection");

  auto* sweep = app.add_subcommand("sweep", "Grid over D, B and charge probability");
  common(sweep);
  multiplier(sweep);
  sweep->add_option("--budgets", args.budgets, "D values (default 0.05..0.50 step 0.05)")->delimiter(',');
  sweep->add_option("--capacities", args.capacities, "B values")->delimiter(',');
  sweep->add_option("--charge-probs", args.charge_probs, "Charging probabilities")->delimiter(',');
  sweep->add_flag("--lp-only", args.lp_only, "Skip the multiplier search and the mixture per cell");

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo check of the CMDP, mixture and uniform policies");
  common(simulate);
  multiplier(simulate);
  simulate->add_option("--epochs", args.epochs, "Simulated epochs per policy")->capture_default_str();
  simulate->add_option("--warmup", args.warmup, "Discarded warm-up epochs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.get_subcommands().empty()) {
      if (manifest.empty()) {
        std::cout << app.help();
        return 2;
      }
      out_dir = rerun_out;
      const auto rep = actsense::rerun_manifest(manifest, rerun_out);
      for (const auto& f : rep.files) std::cout << (rerun_out / fs::path(f)).string() << '\n';
      if (rep.identical()) {
        std::cout << "identical: " << rep.files.size() << " files\n";
        return 0;
      }
      for (const auto& f : rep.mismatched) std::cout << "differs: " << f << '\n';
      return 1;
    }
    args.command = app.get_subcommands().front()->get_name();
    args.seeds = parse_seeds(seed_items);
    if (args.command == "sweep" && args.budgets.empty())
      for (int k = 1; k <= 10; ++k) args.budgets.push_back(k / 20.0);
    const actsense::SensingModel model = actsense::resolve_model(args);
    const auto res = actsense::execute(args, model, out_dir);
    for (const auto& f : res.files) std::cout << (fs::path(out_dir) / f).string() << '\n';
    std::cout << (fs::path(out_dir) / "manifest.json").string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    const std::string record = actsense::error_record(e);
    std::cerr << record << '\n';
    write_error_file(out_dir, record);
    return actsense::exit_code_for(e);
  }
}
