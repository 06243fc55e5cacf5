#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"

#include "actsense/dp.hpp"
#include "actsense/simulate.hpp"

using namespace actsense;

TEST_CASE("single state closed form") {
  TabularMdp mdp;
  mdp.kernel = TransitionKernel(1, {1.0, 1.0});
  mdp.cost_table = {1.0, 0.3};
  mdp.data_table = {0.0, 1.0};
  mdp.conn_table = {0.0, 0.5};
  const ViResult r = value_iteration(mdp, 0.5, 0.9);
  CHECK(r.value(0) == doctest::Approx(0.8 / 0.1).epsilon(1e-7));
  CHECK(r.policy[0] == Action::Active);
  const ViResult high = value_iteration(mdp, 0.8, 0.9);
  CHECK(high.value(0) == doctest::Approx(10.0).epsilon(1e-7));
  CHECK(high.policy[0] == Action::Sleep);
}

TEST_CASE("all-sleep costs sum to 1/(1-beta)") {
  const Problem p(testing::small_model());
  const ValueTable v = policy_evaluation(p.mdp(), Policy::constant(p.num_states(), 0.0), 0.3, 0.9);
  for (double x : v.v) CHECK(x == doctest::Approx(10.0));
}

TEST_CASE("beta = 0 gives the immediate cost") {
  const Problem p(testing::small_model());
  const ViResult r = value_iteration(p.mdp(), 0.2, 0.0);
  for (std::size_t s = 0; s < p.num_states(); ++s)
    CHECK(r.value(s) == doctest::Approx(std::min(p.mdp().lagrangian_cost(s, Action::Sleep, 0.2),
                                                 p.mdp().lagrangian_cost(s, Action::Active, 0.2))));
}

TEST_CASE("value iteration matches brute force over deterministic policies") {
  testing::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const TabularMdp mdp = testing::random_mdp(rng, n);
    const double lambda = rng.uniform(), beta = 0.5 + 0.45 * rng.uniform();
    const ViResult r = value_iteration(mdp, lambda, beta, {1e-11});
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
      const ValueTable v = policy_evaluation(mdp, Policy::from(testing::policy_from_bits(n, bits)), lambda, beta);
      for (std::size_t s = 0; s < n; ++s) best[s] = std::min(best[s], v(s));
    }
    for (std::size_t s = 0; s < n; ++s) CHECK(r.value(s) == doctest::Approx(best[s]).epsilon(1e-8));
    // the greedy policy attains the optimum
    const ValueTable vg = policy_evaluation(mdp, Policy::from(r.policy), lambda, beta);
    for (std::size_t s = 0; s < n; ++s) CHECK(vg(s) == doctest::Approx(best[s]).epsilon(1e-8));
  }
}

TEST_CASE("sweeps contract at rate beta") {
  const Problem p(default_model());
  ViOptions opt;
  opt.record_residuals = true;
  const ViResult r = value_iteration(p.mdp(), 0.3, 0.99, opt);
  REQUIRE(r.residuals.size() == r.sweeps);
  for (std::size_t k = 0; k + 1 < r.residuals.size(); ++k) CHECK(r.residuals[k + 1] <= 0.99 * r.residuals[k] + 1e-12);
  CHECK(r.residual <= opt.tol);
}

TEST_CASE("Bellman consistency and serial agreement") {
  const Problem p(default_model());
  const ViResult r = value_iteration(p.mdp(), 0.3, 0.99);
  const QTable q = q_from_value(p.mdp(), r.value, 0.3, 0.99);
  double worst = 0.0;
  for (std::size_t s = 0; s < p.num_states(); ++s) worst = std::max(worst, std::abs(q.min_at(s) - r.value(s)));
  CHECK(worst < 1e-6);
  const ViResult rs = serial::value_iteration(p.mdp(), 0.3, 0.99);
  CHECK(rs.value.v == r.value.v);
  CHECK(rs.policy == r.policy);
}

TEST_CASE("sweep limit raises NotConverged") {
  const Problem p(default_model());
  ViOptions opt;
  opt.max_sweeps = 3;
  CHECK_THROWS_AS(value_iteration(p.mdp(), 0.3, 0.99, opt), NotConverged);
}

TEST_CASE("ties go to sleep") {
  QTable q(2);
  q(0, Action::Sleep) = 1.0;
  q(0, Action::Active) = 1.0;
  q(1, Action::Sleep) = 1.0;
  q(1, Action::Active) = 0.5;
  CHECK(greedy_action(q, 0) == Action::Sleep);
  CHECK(greedy_action(q, 1) == Action::Active);
}

TEST_CASE("policy evaluation matches a Monte-Carlo discounted return") {
  const SensingModel m = testing::small_model(2, 2);
  const Problem p(m);
  const double beta = 0.8, lambda = 0.4;
  const Policy pi = Policy::from(value_iteration(p.mdp(), lambda, beta).policy);
  const ValueTable v = policy_evaluation(p.mdp(), pi, lambda, beta);
  const State start{1, 0, 2};
  Rng coin(5);
  double sum = 0.0, sum2 = 0.0;
  const int runs = 20000;
  for (int k = 0; k < runs; ++k) {
    Environment env(m, derive_seed(9, static_cast<std::uint64_t>(k)), start);
    double ret = 0.0, w = 1.0;
    for (int t = 0; t < 80; ++t) {
      const std::size_t s = env.state_index();
      const Action a = coin.bernoulli(pi.active_prob[s]) ? Action::Active : Action::Sleep;
      ret += w * p.mdp().lagrangian_cost(s, a, lambda);
      w *= beta;
      env.step(a);
    }
    sum += ret;
    sum2 += ret * ret;
  }
  const double mean = sum / runs, se = std::sqrt((sum2 / runs - mean * mean) / runs);
  CHECK(std::abs(mean - v(m.space.index(start))) < 4 * se + 1e-6);
}
