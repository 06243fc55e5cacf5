#include "doctest.h"
#include "helpers.hpp"

#include "actsense/structure.hpp"

using namespace actsense;

namespace {

ValueTable table_from(const StateSpace& sp, double (*f)(const State&)) {
  ValueTable v;
  for (std::size_t s = 0; s < sp.size(); ++s) v.v.push_back(f(sp.state(s)));
  return v;
}

DeterministicPolicy slice_policy(const StateSpace& sp, const std::vector<int>& actions) {
  DeterministicPolicy p = DeterministicPolicy::constant(sp.size(), Action::Sleep);
  for (std::size_t s = 0; s < sp.size(); ++s)
    if (actions[static_cast<std::size_t>(sp.state(s).b)]) p[s] = Action::Active;
  return p;
}

}  // namespace

TEST_CASE("monotone classification") {
  const StateSpace sp(2, 4);
  CHECK(verify_value_monotone(table_from(sp, [](const State&) { return 1.0; }), sp).overall == Direction::Constant);
  const auto dec = verify_value_monotone(table_from(sp, [](const State& s) { return 10.0 - s.b; }), sp);
  CHECK(dec.pass());
  CHECK(dec.overall == Direction::NonIncreasing);
  const auto bump = verify_value_monotone(table_from(sp, [](const State& s) { return s.b == 2 ? 5.0 : 1.0; }), sp);
  CHECK_FALSE(bump.pass());
  CHECK(bump.violations.size() == 4);
}

TEST_CASE("submodularity") {
  const StateSpace sp(1, 4);
  QTable constant(sp.size());
  for (std::size_t s = 0; s < sp.size(); ++s) constant(s, Action::Active) = 0.5;
  const auto r = verify_q_submodular(constant, sp);
  CHECK(r.pass());
  CHECK(r.comparisons == 8);
  QTable increasing(sp.size());
  for (std::size_t s = 0; s < sp.size(); ++s) increasing(s, Action::Active) = 0.1 * sp.state(s).b;
  CHECK(verify_q_submodular(increasing, sp).violations.size() == 8);
}

TEST_CASE("threshold extraction") {
  const StateSpace sp(2, 10);
  CHECK(extract_threshold(DeterministicPolicy::constant(sp.size(), Action::Sleep), sp)(1, 1) == 11);
  std::vector<int> from7(11, 0);
  for (int b = 7; b <= 10; ++b) from7[static_cast<std::size_t>(b)] = 1;
  const ThresholdTable t = extract_threshold(slice_policy(sp, from7), sp);
  for (int u = 0; u < 2; ++u)
    for (int e = 0; e < 2; ++e) CHECK(t(u, e) == 7);
  CHECK(t.to_policy(sp) == slice_policy(sp, from7));
  std::vector<int> bad(11, 0);
  bad[3] = 1;
  CHECK_THROWS_AS(extract_threshold(slice_policy(sp, bad), sp), NotThreshold);
}

TEST_CASE("projection") {
  const StateSpace sp(1, 4);
  const DeterministicPolicy p = slice_policy(sp, {0, 1, 0, 1, 1});
  const ThresholdTable t = project_threshold_table(p, sp);
  CHECK(t(0, 0) == 3);
  const DeterministicPolicy proj = project_threshold(p, QTable(sp.size()), sp);
  CHECK(proj == t.to_policy(sp));
  // idempotent
  CHECK(project_threshold(proj, QTable(sp.size()), sp) == proj);
  // ties go to the larger cut
  CHECK(project_threshold_table(slice_policy(sp, {0, 0, 1, 0, 0}), sp)(0, 0) == 5);
}

TEST_CASE("projection with an evidence mask") {
  const StateSpace sp(1, 4);
  // unvisited states sleep by the tie-break; only b = 1, 2 were seen
  const DeterministicPolicy p = slice_policy(sp, {0, 1, 1, 0, 0});
  std::vector<bool> seen(sp.size(), false);
  seen[sp.index({0, 0, 1})] = seen[sp.index({0, 0, 2})] = true;
  seen[sp.index({0, 1, 1})] = seen[sp.index({0, 1, 2})] = true;
  CHECK(project_threshold_table(p, sp, &seen)(0, 0) == 1);
  CHECK(project_threshold_table(p, sp)(0, 0) == 5);
}
