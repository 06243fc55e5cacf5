#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "actsense/dp.hpp"
#include "actsense/model.hpp"
#include "actsense/policy.hpp"

namespace actsense {

enum class Direction { Constant, NonDecreasing, NonIncreasing, None };

const char* to_string(Direction d);

struct MonotoneReport {
  struct Slice {
    int u = 0, e = 0;
    Direction direction = Direction::None;
  };
  std::vector<Slice> slices;
  std::vector<State> violations;  // first offending b of each non-monotone slice
  Direction overall = Direction::None;

  /// Every slice monotone, all in one direction (constant slices fit either).
  bool pass() const { return overall != Direction::None; }
};

/// Classifies v(u,e,.) per slice with tolerance tol per step.
MonotoneReport verify_value_monotone(const ValueTable& value, const StateSpace& space, double tol = 1e-9);

struct SubmodularReport {
  std::size_t comparisons = 0;
  std::vector<State> violations;  // (u,e,b): gap(b) < gap(b+1) - tol

  bool pass() const { return violations.empty(); }
};

/// Checks gap(u,e,b) >= gap(u,e,b+1) for b in 0..B-1, gap = Q(active) - Q(sleep).
SubmodularReport verify_q_submodular(const QTable& q, const StateSpace& space, double tol = 1e-9);

/// b_cut per (u,e): the policy is active exactly when b >= b_cut; B+1 means
/// never active.
struct ThresholdTable {
  int num_activities = 0;
  int capacity = 0;
  std::vector<int> b_cut;  // index u*2+e

  int operator()(int u, int e) const { return b_cut[static_cast<std::size_t>(u * 2 + e)]; }
  int& operator()(int u, int e) { return b_cut[static_cast<std::size_t>(u * 2 + e)]; }
  DeterministicPolicy to_policy(const StateSpace& space) const;

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

class NotThreshold : public std::runtime_error {
 public:
  explicit NotThreshold(const State& where);
  const State& where() const { return where_; }

 private:
  State where_;
};

/// Throws NotThreshold at the first b where a slice goes active -> sleep.
ThresholdTable extract_threshold(const DeterministicPolicy& policy, const StateSpace& space);

/// Per slice, the b_cut with the fewest flipped actions; ties go to the larger
/// b_cut. With `evidence`, only states marked true count as flips; the rest
/// follow whatever cut is chosen.
ThresholdTable project_threshold_table(const DeterministicPolicy& policy, const StateSpace& space,
                                       const std::vector<bool>* evidence = nullptr);
/// The Q table is accepted for interface symmetry; the greedy actions in
/// `policy` are what gets projected.
DeterministicPolicy project_threshold(const DeterministicPolicy& policy, const QTable& q, const StateSpace& space,
                                      const std::vector<bool>* evidence = nullptr);

}  // namespace actsense
