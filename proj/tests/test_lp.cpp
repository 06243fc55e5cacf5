#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "actsense/cmdp_lp.hpp"
#include "actsense/simplex.hpp"

using namespace actsense;

namespace {

LinearProgram make_lp(std::initializer_list<double> c, std::vector<std::vector<double>> a_ub, std::vector<double> b_ub,
                      std::vector<std::vector<double>> a_eq = {}, std::vector<double> b_eq = {}) {
  LinearProgram lp;
  const auto n = static_cast<Eigen::Index>(c.size());
  lp.objective = Eigen::VectorXd(n);
  Eigen::Index i = 0;
  for (double x : c) lp.objective(i++) = x;
  auto fill = [n](const std::vector<std::vector<double>>& rows, const std::vector<double>& rhs, Eigen::MatrixXd& m,
                  Eigen::VectorXd& r) {
    m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
    r = Eigen::VectorXd(static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(k), j) = rows[k][static_cast<std::size_t>(j)];
      r(static_cast<Eigen::Index>(k)) = rhs[k];
    }
  };
  fill(a_ub, b_ub, lp.ineq, lp.ineq_rhs);
  fill(a_eq, b_eq, lp.eq, lp.eq_rhs);
  return lp;
}

// Best vertex of {x >= 0, A x <= b} for two variables: every pair of tight
// constraints (including the bounds) is intersected.
double brute_force_2d(const LinearProgram& lp) {
  std::vector<Eigen::Vector3d> lines;  // a0 x + a1 y = r
  for (Eigen::Index k = 0; k < lp.ineq.rows(); ++k) lines.emplace_back(lp.ineq(k, 0), lp.ineq(k, 1), lp.ineq_rhs(k));
  lines.emplace_back(1, 0, 0);
  lines.emplace_back(0, 1, 0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      Eigen::Matrix2d m;
      m << lines[i](0), lines[i](1), lines[j](0), lines[j](1);
      if (std::abs(m.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = m.inverse() * Eigen::Vector2d(lines[i](2), lines[j](2));
      if (x.minCoeff() < -1e-9) continue;
      if (((lp.ineq * x - lp.ineq_rhs).array() > 1e-9).any()) continue;
      best = std::min(best, lp.objective.dot(x));
    }
  return best;
}

}  // namespace

TEST_CASE("textbook LP") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
  const LinearProgram lp = make_lp({-3, -5}, {{1, 0}, {0, 2}, {3, 2}}, {4, 12, 18});
  const LpResult r = solve_lp(lp);
  CHECK(r.objective == doctest::Approx(-36));
  CHECK(r.x(0) == doctest::Approx(2));
  CHECK(r.x(1) == doctest::Approx(6));
  CHECK(r.min_reduced_cost >= -1e-9);
  CHECK(r.max_residual < 1e-9);
}

TEST_CASE("lower bound through an inequality row") {
  // min x s.t. -x <= -1
  const LpResult r = solve_lp(make_lp({1}, {{-1}}, {-1}));
  CHECK(r.objective == doctest::Approx(1));
}

TEST_CASE("equality constrained LP") {
  const LpResult r = solve_lp(make_lp({1, 2, 3}, {}, {}, {{1, 1, 1}, {0, 1, 1}}, {1, 0.5}));
  CHECK(r.objective == doctest::Approx(1.5));
  CHECK(r.x(1) == doctest::Approx(0.5));
}

TEST_CASE("redundant equality rows are dropped") {
  const LpResult r = solve_lp(make_lp({1, 1}, {}, {}, {{1, 1}, {2, 2}}, {1, 2}));
  CHECK(r.objective == doctest::Approx(1));
  CHECK(r.redundant_rows == 1);
}

TEST_CASE("infeasible and unbounded programs") {
  try {
    solve_lp(make_lp({1}, {{1}, {-1}}, {1, -2}));
    FAIL("expected infeasible");
  } catch (const LpError& e) {
    CHECK(e.status() == LpStatus::Infeasible);
  }
  try {
    solve_lp(make_lp({-1, 0}, {{0, 1}}, {1}));
    FAIL("expected unbounded");
  } catch (const LpError& e) {
    CHECK(e.status() == LpStatus::Unbounded);
  }
}

TEST_CASE("bad dimensions are rejected") {
  LinearProgram lp = make_lp({1, 1}, {{1, 1}}, {1});
  lp.ineq_rhs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
}

TEST_CASE("random two-variable LPs against vertex enumeration") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double c0 = rng.uniform() * 2 - 1, c1 = rng.uniform() * 2 - 1;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (int k = 0; k < 4; ++k) {
      rows.push_back({rng.uniform() + 0.1, rng.uniform() + 0.1});
      rhs.push_back(rng.uniform() * 5 + 0.5);
    }
    const LinearProgram lp = make_lp({c0, c1}, rows, rhs);
    const double expect = brute_force_2d(lp);
    CHECK(solve_lp(lp).objective == doctest::Approx(expect).epsilon(1e-9));
    SimplexOptions bland;
    bland.bland_only = true;
    CHECK(solve_lp(lp, bland).objective == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("LP text format") {
  LinearProgram lp = make_lp({1, -2}, {{1, 1}}, {3}, {{1, -1}}, {0});
  std::ostringstream out;
  write_lp_format(lp, out);
  const std::string s = out.str();
  CHECK(s.find("Minimize") != std::string::npos);
  CHECK(s.find("Subject To") != std::string::npos);
  CHECK(s.find("x1") != std::string::npos);
  CHECK(s.find("End") != std::string::npos);
}

TEST_CASE("CMDP LP dimensions") {
  const Problem p(default_model());
  const LinearProgram lp = build_cmdp_lp(p.mdp(), 0.25);
  CHECK(lp.num_vars() == 504);
  CHECK(lp.ineq.rows() == 1);
  CHECK(lp.eq.rows() == 253);
  CHECK_THROWS_AS(build_lagrangian_lp(p.mdp(), -1.0), std::invalid_argument);
  CHECK(build_lagrangian_lp(p.mdp(), 0.3).ineq.rows() == 0);
}

TEST_CASE("CMDP LP on random small MDPs matches brute force") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const TabularMdp mdp = testing::random_mdp(rng, n);
    // with the budget slack the LP optimum is the best deterministic policy
    const StationarySolution sol = solve_cmdp(mdp, 10.0);
    CHECK(sol.objective == doctest::Approx(testing::brute_force_average_cost(mdp)).epsilon(1e-8));
    CHECK(balance_residual(mdp, sol.phi) < 1e-9);
    // the occupation measure reproduces the induced policy's stationary law
    const Policy pi = policy_from_phi(sol.phi);
    const Eigen::VectorXd mu = testing::stationary_direct(mdp, pi);
    for (std::size_t s = 0; s < n; ++s) CHECK(sol.state_mass(s) == doctest::Approx(mu(static_cast<Eigen::Index>(s))));
  }
}

TEST_CASE("CMDP budget response") {
  const Problem p(default_model());
  double previous = 2.0;
  for (double d : {0.05, 0.15, 0.25, 0.35}) {
    const StationarySolution sol = solve_cmdp(p.mdp(), d);
    CHECK(sol.data_usage <= d + 1e-9);
    CHECK(sol.objective <= previous + 1e-9);
    CHECK(balance_residual(p.mdp(), sol.phi) < 1e-9);
    previous = sol.objective;
  }
  // at most one randomized state with a binding budget
  CHECK(count_randomized(policy_from_phi(solve_cmdp(p.mdp(), 0.25).phi)) <= 1);
}

TEST_CASE("large multiplier shuts off transmission; zero budget matches it") {
  const Problem p(default_model());
  CHECK(solve_lagrangian(p.mdp(), 1e6).data_usage == doctest::Approx(0.0).epsilon(1e-12));
  const StationarySolution free = solve_lagrangian(p.mdp(), 0.0);
  const StationarySolution slack = solve_cmdp(p.mdp(), 1.0);
  CHECK(slack.objective == doctest::Approx(free.objective).epsilon(1e-9));
  CHECK(solve_cmdp(p.mdp(), 0.0).data_usage <= 1e-12);
}

TEST_CASE("CMDP optimum with a slack budget beats always-active") {
  const Problem p(default_model());
  const StationarySolution sol = solve_cmdp(p.mdp(), 1.0);
  const auto always = testing::averages_direct(p.mdp(), Policy::constant(p.num_states(), 1.0));
  CHECK(sol.objective <= always.cost + 1e-9);
}

TEST_CASE("policy from occupation measure") {
  const Policy pi = policy_from_phi({0.3, 0.1, 0.0, 0.0, 0.0, 0.6});
  CHECK(pi.active_prob[0] == doctest::Approx(0.25));
  CHECK(pi.active_prob[1] == 0.0);
  CHECK(pi.active_prob[2] == 1.0);
  CHECK(count_randomized(pi) == 1);
}
