#pragma once

#include <cstdint>
#include <vector>

#include "actsense/dp.hpp"
#include "actsense/model.hpp"
#include "actsense/policy.hpp"

namespace actsense {

enum class LearnerMode { Conventional, Structured };

const char* to_string(LearnerMode m);

struct LearnerConfig {
  double lambda = 0.0;
  double beta = 0.99;
  std::uint64_t max_iters = 100000;  // L
  // epsilon-greedy: linear decay from eps_start to eps_end over the first
  // eps_decay_fraction * L steps, constant afterwards.
  double eps_start = 0.5;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;
  std::uint64_t seed = 1;
  LearnerMode mode = LearnerMode::Conventional;
  double kappa = 0.01;                // structured start: Q0(u,e,b,a) = kappa b
  bool per_pair_step = false;         // 1/sqrt(n(s,a)+1) instead of the global counter
  bool project_checkpoints = false;   // structured only: project at every checkpoint
  /// Structured projection counts flips only over visited states. When
  /// false, every state counts, including never-visited ones whose greedy
  /// action is just the tie-break.
  bool project_visited_only = true;
  std::uint64_t num_checkpoints = 100;

  void validate() const;
};

/// Reference for mismatch counting: the dp policy and which states count
/// (optimal Q gap at least gap_tol).
struct MismatchReference {
  DeterministicPolicy policy;
  std::vector<bool> counted;

  static MismatchReference from(const ViResult& optimal, double gap_tol = 1e-6);
  /// Fraction of counted states where `p` disagrees; 0 if none are counted.
  double mismatch(const DeterministicPolicy& p) const;
};

struct LearningRun {
  QTable q;
  DeterministicPolicy policy;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> mismatch;
  std::vector<std::uint64_t> visits;  // per state
  std::uint64_t steps = 0;

  friend bool operator==(const LearningRun& a, const LearningRun& b) {
    return a.q.q == b.q.q && a.policy == b.policy && a.checkpoints == b.checkpoints && a.mismatch == b.mismatch &&
           a.visits == b.visits && a.steps == b.steps;
  }
};

double exploration_rate(const LearnerConfig& cfg, std::uint64_t step);

/// Q(s,a) += (1/sqrt(i+1)) (cost + beta min_a' Q(s',a') - Q(s,a)).
void q_update(QTable& q, std::size_t s, Action a, double cost, std::size_t s_next, std::uint64_t i, double beta);

/// Zero start, greedy policy at the end without projection.
LearningRun run_conventional(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref);

/// Start strictly increasing in b (kappa b), same updates, final greedy
/// policy projected onto threshold form.
LearningRun run_structured(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref);

/// Dispatches on cfg.mode.
LearningRun run_learner(const Problem& problem, const LearnerConfig& cfg, const MismatchReference& ref);

}  // namespace actsense
