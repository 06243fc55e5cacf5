#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "actsense/cmdp_lp.hpp"
#include "actsense/simulate.hpp"
#include "actsense/stationary.hpp"

using namespace actsense;

TEST_CASE("all-sleep with certain charging fills the battery") {
  SensingModel m = testing::small_model(2, 4);
  m.charge_prob = 1.0;
  const Problem p(m);
  const StationarySolution sol = stationary_distribution(p.mdp(), Policy::constant(p.num_states(), 0.0));
  double full = 0.0;
  for (std::size_t s = 0; s < p.num_states(); ++s)
    if (m.space.state(s).b == 4) full += sol.state_mass(s);
  CHECK(full == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.data_usage == 0.0);
}

TEST_CASE("random MDPs against a direct linear solve") {
  testing::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const TabularMdp mdp = testing::random_mdp(rng, n);
    Policy pi = Policy::constant(n, 0.0);
    for (auto& x : pi.active_prob) x = rng.uniform();
    const StationarySolution sol = stationary_distribution(mdp, pi);
    const Eigen::VectorXd mu = testing::stationary_direct(mdp, pi);
    for (std::size_t s = 0; s < n; ++s) CHECK(sol.state_mass(s) == doctest::Approx(mu(static_cast<Eigen::Index>(s))));
    CHECK(sol.objective == doctest::Approx(testing::averages_direct(mdp, pi).cost));
  }
}

TEST_CASE("LP occupation measure is reproduced by the chain") {
  const Problem p(default_model());
  const StationarySolution lp = solve_cmdp(p.mdp(), 0.25);
  const Policy pi = policy_from_phi(lp.phi);
  const StationarySolution chain = stationary_distribution(p.mdp(), pi);
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.phi.size(); ++i) worst = std::max(worst, std::abs(lp.phi[i] - chain.phi[i]));
  CHECK(worst < 1e-6);
  CHECK(chain.objective == doctest::Approx(lp.objective).epsilon(1e-6));
  const StationarySolution ser = serial::stationary_distribution(p.mdp(), pi);
  for (std::size_t i = 0; i < lp.phi.size(); ++i) CHECK(ser.phi[i] == doctest::Approx(chain.phi[i]).epsilon(1e-12));
}

TEST_CASE("metrics stay within their ranges") {
  const Problem p(default_model());
  const StationarySolution sol = solve_cmdp(p.mdp(), 0.25);
  const double act = active_mass(sol.phi);
  CHECK(act > 0.0);
  CHECK(act <= 1.0 + 1e-12);
  CHECK(avg_battery(p.space(), sol.phi) <= 20.0 * act + 1e-12);
  CHECK(avg_battery_when_active(p.space(), sol.phi) == doctest::Approx(avg_battery(p.space(), sol.phi) / act));
  CHECK(sync_probability(p.mdp(), sol.phi) <= act);
  CHECK(sync_probability_when_active(p.mdp(), sol.phi) <= 1.0);
  const double tau = overflow_probability(p.model(), sol.phi);
  CHECK(tau >= 0.0);
  CHECK(tau <= 1.0);
  CHECK(energy_overflow_probability(p.model(), sol.phi) >= 0.0);
  const ActivityError err = per_activity_error(p.model(), p.mdp(), sol.phi);
  double total = 0.0;
  for (double x : err.raw) total += x;
  CHECK(total == doctest::Approx(sol.objective));
  for (double x : err.normalized) CHECK(x <= 1.0 + 1e-12);
}

TEST_CASE("overflow vanishes without a battery") {
  SensingModel m = testing::small_model(2, 0);
  const Problem p(m);
  const StationarySolution sol = stationary_distribution(p.mdp(), Policy::constant(p.num_states(), 0.5));
  CHECK(overflow_probability(m, sol.phi) == 0.0);
}

TEST_CASE("uniform policy closed form") {
  const Problem p(default_model());
  const CupSolution cup = cup_policy(p.model(), p.mdp());
  double sum = 0.0;
  for (double x : cup.measure.phi) sum += x;
  CHECK(sum == doctest::Approx(1.0));
  const double xi = sensing_fraction(p.model());
  CHECK(cup.policy.active_prob[7] == doctest::Approx(xi));
  CHECK(cup.measure.data_usage == doctest::Approx(xi * 20.0 / 21.0));
}

TEST_CASE("simulator: determinism and the all-sleep policy") {
  const SensingModel m = default_model();
  SimOptions opt;
  opt.epochs = 20000;
  opt.warmup = 100;
  opt.seed = 4;
  const Policy pi = Policy::constant(m.space.size(), 0.3);
  const TrajectoryStats a = simulate(m, pi, opt), b = simulate(m, pi, opt);
  CHECK(a.detect_error.mean == b.detect_error.mean);
  CHECK(a.data_usage.se == b.data_usage.se);
  const TrajectoryStats sleep = simulate(m, Policy::constant(m.space.size(), 0.0), opt);
  CHECK(sleep.detect_error.mean == 1.0);
  CHECK(sleep.data_usage.mean == 0.0);
  CHECK(sleep.sync_rate.mean == 0.0);
}

TEST_CASE("environment step follows the battery recursion") {
  SensingModel m = testing::small_model(2, 3);
  m.connectivity_active = {1.0, 1.0};
  m.charge_prob = 0.0;
  Environment env(m, 1, {0, 0, 3});
  const auto st = env.step(Action::Active);
  CHECK(st.connected);
  CHECK(st.to.b == 2);
  CHECK(env.step(Action::Sleep).to.b == 2);
}
