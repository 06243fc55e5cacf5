#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/rng.hpp"

namespace testing {

using namespace actsense;

/// Dense random MDP: every transition probability positive, so every policy
/// induces an irreducible chain.
inline TabularMdp random_mdp(Rng& rng, std::size_t n) {
  std::vector<double> dense(n * kNumActions * n);
  for (std::size_t r = 0; r < n * kNumActions; ++r) {
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) total += dense[r * n + t] = 0.05 + rng.uniform();
    for (std::size_t t = 0; t < n; ++t) dense[r * n + t] /= total;
  }
  TabularMdp mdp;
  mdp.kernel = TransitionKernel(n, std::move(dense));
  mdp.cost_table.resize(n * kNumActions);
  mdp.data_table.resize(n * kNumActions);
  mdp.conn_table.assign(n * kNumActions, 0.0);
  for (auto& c : mdp.cost_table) c = rng.uniform();
  for (auto& d : mdp.data_table) d = rng.uniform();
  return mdp;
}

/// Stationary law of P_pi by a direct linear solve (mu (P - I) = 0, sum mu = 1).
inline Eigen::VectorXd stationary_direct(const TabularMdp& mdp, const Policy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto su = static_cast<std::size_t>(s), tu = static_cast<std::size_t>(t);
      a(t, s) = pi.prob(su, Action::Sleep) * mdp.kernel(su, Action::Sleep, tu) +
                pi.prob(su, Action::Active) * mdp.kernel(su, Action::Active, tu) - (s == t ? 1.0 : 0.0);
    }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return a.fullPivLu().solve(rhs);
}

struct Averages {
  double cost = 0.0;
  double data = 0.0;
};

inline Averages averages_direct(const TabularMdp& mdp, const Policy& pi) {
  const Eigen::VectorXd mu = stationary_direct(mdp, pi);
  Averages r;
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (Action a : {Action::Sleep, Action::Active}) {
      const double w = mu(static_cast<Eigen::Index>(s)) * pi.prob(s, a);
      r.cost += w * mdp.cost(s, a);
      r.data += w * mdp.data(s, a);
    }
  return r;
}

inline DeterministicPolicy policy_from_bits(std::size_t n, std::uint64_t bits) {
  DeterministicPolicy p = DeterministicPolicy::constant(n, Action::Sleep);
  for (std::size_t s = 0; s < n; ++s)
    if (bits >> s & 1u) p[s] = Action::Active;
  return p;
}

/// Smallest long-run average cost over all 2^n deterministic policies.
inline double brute_force_average_cost(const TabularMdp& mdp) {
  const std::size_t n = mdp.num_states();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits)
    best = std::min(best, averages_direct(mdp, Policy::from(policy_from_bits(n, bits))).cost);
  return best;
}

/// Small sensing model for fast tests.
inline SensingModel small_model(int activities = 2, int capacity = 3) {
  SensingModel m;
  m.space = StateSpace(activities, capacity);
  const auto n = static_cast<std::size_t>(activities);
  m.user_transition.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.user_transition[i * n + j] = i == j ? 0.7 : 0.3 / static_cast<double>(n - 1);
  if (n == 1) m.user_transition[0] = 1.0;
  m.charge_prob = 0.3;
  for (std::size_t i = 0; i < n; ++i) {
    m.detect_error_active.push_back(0.3 - 0.1 * static_cast<double>(i) / static_cast<double>(n));
    m.connectivity_active.push_back(0.5 + 0.2 * static_cast<double>(i) / static_cast<double>(n));
    m.data_usage_active.push_back(1.0);
  }
  m.budget = 0.2;
  m.discount = 0.9;
  return m;
}

}  // namespace testing
