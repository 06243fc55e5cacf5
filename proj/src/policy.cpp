#include "actsense/policy.hpp"

#include <stdexcept>
#include <string>

namespace actsense {

Policy Policy::from(const DeterministicPolicy& d) {
  Policy p;
  p.active_prob.reserve(d.size());
  for (Action a : d.actions) p.active_prob.push_back(a == Action::Active ? 1.0 : 0.0);
  return p;
}

void Policy::validate(std::size_t num_states) const {
  if (active_prob.size() != num_states)
    throw std::invalid_argument("policy has " + std::to_string(active_prob.size()) + " states, model has " +
                                std::to_string(num_states));
  for (std::size_t s = 0; s < num_states; ++s) {
    const double p = active_prob[s];
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("policy probability outside [0,1] at state " + std::to_string(s));
  }
}

StationarySolution with_averages(const TabularMdp& mdp, std::vector<double> phi) {
  StationarySolution sol;
  sol.phi = std::move(phi);
  for (std::size_t i = 0; i < sol.phi.size(); ++i) {
    sol.objective += sol.phi[i] * mdp.cost_table[i];
    sol.data_usage += sol.phi[i] * mdp.data_table[i];
  }
  return sol;
}

Policy policy_from_phi(const std::vector<double>& phi) {
  const std::size_t n = phi.size() / kNumActions;
  Policy p = Policy::constant(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double sleep = phi[s * kNumActions], active = phi[s * kNumActions + 1];
    const double total = sleep + active;
    if (total > 1e-12) p.active_prob[s] = active / total;
  }
  return p;
}

std::size_t count_randomized(const Policy& policy, double band) {
  std::size_t n = 0;
  for (double p : policy.active_prob)
    if (p > band && p < 1.0 - band) ++n;
  return n;
}

}  // namespace actsense
