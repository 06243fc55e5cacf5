#include "actsense/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "actsense/rng.hpp"
#include "actsense/simulate.hpp"
#include "actsense/structure.hpp"

namespace actsense {

const char* to_string(LearnerMode m) { return m == LearnerMode::Conventional ? "conventional" : "structured"; }

void LearnerConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
    throw std::invalid_argument("exploration rates must lie in [0,1]");
  if (!(eps_decay_fraction >= 0.0 && eps_decay_fraction <= 1.0))
    throw std::invalid_argument("eps_decay_fraction must lie in [0,1]");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
  if (num_checkpoints < 1) throw std::invalid_argument("need at least one checkpoint");
}

MismatchReference MismatchReference::from(const ViResult& optimal, double gap_tol) {
  MismatchReference r{optimal.policy, std::vector<bool>(optimal.policy.size())};
  for (std::size_t s = 0; s < r.counted.size(); ++s) r.counted[s] = std::abs(optimal.q.gap(s)) >= gap_tol;
  return r;
}

double MismatchReference::mismatch(const DeterministicPolicy& p) const {
  std::size_t counted_states = 0, wrong = 0;
  for (std::size_t s = 0; s < counted.size(); ++s) {
    if (!counted[s]) continue;
    ++counted_states;
    wrong += p[s] != policy[s];
  }
  return counted_states ? static_cast<double>(wrong) / static_cast<double>(counted_states) : 0.0;
}

double exploration_rate(const LearnerConfig& cfg, std::uint64_t step) {
  const double horizon = cfg.eps_decay_fraction * static_cast<double>(cfg.max_iters);
  if (horizon <= 0.0) return cfg.eps_end;
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

void q_update(QTable& q, std::size_t s, Action a, double cost, std::size_t s_next, std::uint64_t i, double beta) {
  const double alpha = 1.0 / std::sqrt(static_cast<double>(i) + 1.0);
  double& entry = q(s, a);
  entry += alpha * (cost + beta * q.min_at(s_next) - entry);
}

namespace {

LearningRun learn(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref, QTable q,
                  bool structured) {
  cfg.validate();
  const TabularMdp& mdp = problem.mdp();
  const StateSpace& space = problem.space();
  if (ref.policy.size() != mdp.num_states()) throw std::invalid_argument("reference policy has the wrong size");

  Environment env(problem.model(), derive_seed(cfg.seed, 0));
  Rng explore(derive_seed(cfg.seed, 1));
  std::vector<std::uint64_t> pair_visits(cfg.per_pair_step ? mdp.num_states() * kNumActions : 0, 0);
  LearningRun run;
  run.visits.assign(mdp.num_states(), 0);
  std::vector<bool> seen(mdp.num_states(), false);

  auto current_policy = [&](bool final_policy) {
    DeterministicPolicy p = greedy_policy(q);
    if (structured && (final_policy || cfg.project_checkpoints))
      p = project_threshold(p, q, space, cfg.project_visited_only ? &seen : nullptr);
    return p;
  };

  const std::uint64_t interval = std::max<std::uint64_t>(1, cfg.max_iters / cfg.num_checkpoints);
  for (std::uint64_t i = 0; i < cfg.max_iters; ++i) {
    const std::size_t s = env.state_index();
    Action a;
    if (explore.uniform() < exploration_rate(cfg, i)) a = explore.bernoulli(0.5) ? Action::Active : Action::Sleep;
    else a = greedy_action(q, s);
    const Environment::Step st = env.step(a);
    ++run.visits[s];
    seen[s] = true;
    const std::size_t s_next = space.index(st.to);
    std::uint64_t counter = i;
    if (cfg.per_pair_step) counter = pair_visits[s * kNumActions + static_cast<std::size_t>(to_int(a))]++;
    q_update(q, s, a, mdp.lagrangian_cost(s, a, cfg.lambda), s_next, counter, cfg.beta);

    const std::uint64_t done = i + 1;
    if (done % interval == 0 || done == cfg.max_iters) {
      if (!run.checkpoints.empty() && run.checkpoints.back() == done) continue;
      run.checkpoints.push_back(done);
      run.mismatch.push_back(ref.mismatch(current_policy(done == cfg.max_iters)));
    }
  }
  run.steps = cfg.max_iters;
  run.policy = current_policy(true);
  run.q = std::move(q);
  return run;
}

}  // namespace

LearningRun run_conventional(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref) {
  return learn(problem, cfg, ref, QTable(problem.num_states(), 0.0), false);
}

LearningRun run_structured(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref) {
  const StateSpace& space = problem.space();
  QTable q(problem.num_states());
  for (std::size_t s = 0; s < space.size(); ++s) {
    const double v = cfg.kappa * space.state(s).b;
    q(s, Action::Sleep) = v;
    q(s, Action::Active) = v;
  }
  return learn(problem, cfg, ref, std::move(q), true);
}

LearningRun run_learner(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref) {
  return cfg.mode == LearnerMode::Structured ? run_structured(problem, cfg, ref) : run_conventional(problem, cfg, ref);
}

}  // namespace actsense
