#pragma once

#include <cstddef>
#include <vector>

#include "actsense/model.hpp"

namespace actsense {

/// One action per state.
struct DeterministicPolicy {
  std::vector<Action> actions;

  std::size_t size() const { return actions.size(); }
  Action operator[](std::size_t s) const { return actions[s]; }
  Action& operator[](std::size_t s) { return actions[s]; }

  static DeterministicPolicy constant(std::size_t num_states, Action a) {
    return {std::vector<Action>(num_states, a)};
  }
  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;
};

/// Stationary randomized policy stored as P(active | state). Deterministic,
/// LP-derived, mixture and uniform policies all use this form.
struct Policy {
  std::vector<double> active_prob;

  std::size_t size() const { return active_prob.size(); }
  double prob(std::size_t s, Action a) const {
    return a == Action::Active ? active_prob[s] : 1.0 - active_prob[s];
  }

  static Policy from(const DeterministicPolicy& d);
  static Policy constant(std::size_t num_states, double p) { return {std::vector<double>(num_states, p)}; }
  /// Throws std::invalid_argument if any probability is outside [0,1].
  void validate(std::size_t num_states) const;
};

/// Occupation measure phi(s, a), laid out |S| x 2, plus the two long-run
/// averages it induces.
struct StationarySolution {
  std::vector<double> phi;
  double objective = 0.0;   // sum phi * c
  double data_usage = 0.0;  // sum phi * d

  double at(std::size_t s, Action a) const { return phi[s * kNumActions + to_int(a)]; }
  double state_mass(std::size_t s) const { return at(s, Action::Sleep) + at(s, Action::Active); }
  std::size_t num_states() const { return phi.size() / kNumActions; }
};

/// Fills objective and data_usage of an occupation measure from the tables.
StationarySolution with_averages(const TabularMdp& mdp, std::vector<double> phi);

/// pi(active|s) = phi(s,active) / sum_a phi(s,a); states carrying no mass
/// (<= 1e-12) sleep.
Policy policy_from_phi(const std::vector<double>& phi);

/// Number of states with randomization strictly inside (band, 1 - band).
std::size_t count_randomized(const Policy& policy, double band = 1e-6);

}  // namespace actsense
