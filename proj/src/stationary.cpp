#include "actsense/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace actsense {

namespace {

std::vector<double> to_phi(const std::vector<double>& mu, const Policy& policy) {
  std::vector<double> phi(mu.size() * kNumActions);
  for (std::size_t s = 0; s < mu.size(); ++s) {
    phi[s * kNumActions] = mu[s] * policy.prob(s, Action::Sleep);
    phi[s * kNumActions + 1] = mu[s] * policy.prob(s, Action::Active);
  }
  return phi;
}

// P_pi transposed in compressed rows: inflow[t] lists (source, weight).
struct Inflow {
  std::vector<std::size_t> offsets;
  std::vector<std::pair<std::size_t, double>> entries;
};

Inflow induced_inflow(const TabularMdp& mdp, const Policy& policy) {
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (int ai = 0; ai < kNumActions; ++ai) {
      const Action a = action_from(ai);
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (const auto& [to, p] : mdp.kernel.sparse_row(s, a)) rows[to].emplace_back(s, w * p);
    }
  }
  Inflow in;
  in.offsets.assign(n + 1, 0);
  for (std::size_t t = 0; t < n; ++t) {
    in.entries.insert(in.entries.end(), rows[t].begin(), rows[t].end());
    in.offsets[t + 1] = in.entries.size();
  }
  return in;
}

}  // namespace

StationarySolution stationary_distribution(const TabularMdp& mdp, const Policy& policy,
                                           const StationaryOptions& options) {
  const std::size_t n = mdp.num_states();
  policy.validate(n);
  const Inflow pt = induced_inflow(mdp, policy);
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::vector<double> mu(n, 1.0 / static_cast<double>(n)), next(n);
  double residual = 0.0;
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    residual = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : residual)
    for (std::ptrdiff_t t = 0; t < count; ++t) {
      double in = 0.0;
      for (std::size_t k = pt.offsets[static_cast<std::size_t>(t)]; k < pt.offsets[static_cast<std::size_t>(t) + 1]; ++k)
        in += pt.entries[k].second * mu[pt.entries[k].first];
      residual += std::abs(in - mu[static_cast<std::size_t>(t)]);
      next[static_cast<std::size_t>(t)] = 0.5 * (in + mu[static_cast<std::size_t>(t)]);
    }
    if (residual <= options.tol) return with_averages(mdp, to_phi(mu, policy));
    mu.swap(next);
  }
  throw NotErgodic("power iteration did not converge, residual " + std::to_string(residual), residual);
}

namespace serial {

StationarySolution stationary_distribution(const TabularMdp& mdp, const Policy& policy,
                                           const StationaryOptions& options) {
  const std::size_t n = mdp.num_states();
  policy.validate(n);
  std::vector<double> mu(n, 1.0 / static_cast<double>(n)), flow(n);
  double residual = 0.0;
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    std::fill(flow.begin(), flow.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (int ai = 0; ai < kNumActions; ++ai) {
        const Action a = action_from(ai);
        const double w = mu[s] * policy.prob(s, a);
        if (w == 0.0) continue;
        for (const auto& [to, p] : mdp.kernel.sparse_row(s, a)) flow[to] += w * p;
      }
    }
    residual = 0.0;
    for (std::size_t t = 0; t < n; ++t) residual += std::abs(flow[t] - mu[t]);
    if (residual <= options.tol) return with_averages(mdp, to_phi(mu, policy));
    for (std::size_t t = 0; t < n; ++t) mu[t] = 0.5 * (flow[t] + mu[t]);
  }
  throw NotErgodic("power iteration did not converge, residual " + std::to_string(residual), residual);
}

}  // namespace serial

double active_mass(const std::vector<double>& phi) {
  double m = 0.0;
  for (std::size_t i = 1; i < phi.size(); i += kNumActions) m += phi[i];
  return m;
}

double avg_battery(const StateSpace& space, const std::vector<double>& phi) {
  double acc = 0.0;
  for (std::size_t s = 0; s < space.size(); ++s) acc += space.state(s).b * phi[s * kNumActions + 1];
  return acc;
}

double avg_battery_when_active(const StateSpace& space, const std::vector<double>& phi) {
  const double m = active_mass(phi);
  return m > 0.0 ? avg_battery(space, phi) / m : 0.0;
}

double sync_probability(const TabularMdp& mdp, const std::vector<double>& phi) {
  double acc = 0.0;
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    acc += mdp.connectivity(s, Action::Active) * phi[s * kNumActions + 1];
  return acc;
}

double sync_probability_when_active(const TabularMdp& mdp, const std::vector<double>& phi) {
  const double m = active_mass(phi);
  return m > 0.0 ? sync_probability(mdp, phi) / m : 0.0;
}

double overflow_probability(const SensingModel& model, const std::vector<double>& phi) {
  const StateSpace& sp = model.space;
  if (sp.battery_capacity() == 0) return 0.0;
  double acc = 0.0;
  for (int u = 0; u < sp.num_activities(); ++u) {
    const State st{u, 1, sp.battery_capacity() - 1};
    const std::size_t s = sp.index(st);
    acc += phi[s * kNumActions + 1] * (1.0 - model.connectivity(st, Action::Active)) + phi[s * kNumActions];
  }
  return acc;
}

double energy_overflow_probability(const SensingModel& model, const std::vector<double>& phi) {
  const StateSpace& sp = model.space;
  const int cap = sp.battery_capacity();
  double acc = 0.0;
  for (int u = 0; u < sp.num_activities(); ++u) {
    const State full{u, 1, cap};
    const std::size_t s = sp.index(full);
    const double g = model.connectivity(full, Action::Active);
    // Nothing is consumed when sleeping or when the upload fails.
    acc += phi[s * kNumActions] + phi[s * kNumActions + 1] * (1.0 - g);
    // A successful upload frees a unit unless the battery holds none.
    if (cap == 0) acc += phi[s * kNumActions + 1] * g;
  }
  return acc;
}

ActivityError per_activity_error(const SensingModel& model, const TabularMdp& mdp, const std::vector<double>& phi) {
  const auto nu = static_cast<std::size_t>(model.num_activities());
  ActivityError out{std::vector<double>(nu, 0.0), std::vector<double>(nu, 0.0)};
  std::vector<double> mass(nu, 0.0);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    const auto u = static_cast<std::size_t>(model.space.state(s).u);
    for (int a = 0; a < kNumActions; ++a) {
      const std::size_t i = s * kNumActions + static_cast<std::size_t>(a);
      out.raw[u] += mdp.cost_table[i] * phi[i];
      mass[u] += phi[i];
    }
  }
  for (std::size_t u = 0; u < nu; ++u) out.normalized[u] = mass[u] > 0.0 ? out.raw[u] / mass[u] : 0.0;
  return out;
}

CupSolution cup_policy(const SensingModel& model, const TabularMdp& mdp) {
  const double xi = sensing_fraction(model);
  if (xi > 1.0) throw ModelError("sensing fraction exceeds 1", "data_budget");
  const std::size_t n = mdp.num_states();
  // |U| x |B| x 2 counts every state once (the 2 is the charge flag).
  const double cells = static_cast<double>(n);
  std::vector<double> phi(n * kNumActions);
  for (std::size_t s = 0; s < n; ++s) {
    phi[s * kNumActions] = (1.0 - xi) / cells;
    phi[s * kNumActions + 1] = xi / cells;
  }
  return {Policy::constant(n, xi), with_averages(mdp, std::move(phi))};
}

}  // namespace actsense
