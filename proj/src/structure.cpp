#include "actsense/structure.hpp"

namespace actsense {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Constant: return "constant";
    case Direction::NonDecreasing: return "non-decreasing";
    case Direction::NonIncreasing: return "non-increasing";
    case Direction::None: return "non-monotone";
  }
  return "unknown";
}

MonotoneReport verify_value_monotone(const ValueTable& value, const StateSpace& space, double tol) {
  MonotoneReport rep;
  bool any_up = false, any_down = false, broken = false;
  for (int u = 0; u < space.num_activities(); ++u) {
    for (int e = 0; e < 2; ++e) {
      bool up = true, down = true;
      int first_bad = -1;
      for (int b = 0; b < space.battery_capacity(); ++b) {
        const double step = value(space.index({u, e, b + 1})) - value(space.index({u, e, b}));
        if (step < -tol) up = false;
        if (step > tol) down = false;
        if (!up && !down && first_bad < 0) first_bad = b + 1;
      }
      MonotoneReport::Slice sl{u, e, Direction::None};
      if (up && down) sl.direction = Direction::Constant;
      else if (up) sl.direction = Direction::NonDecreasing, any_up = true;
      else if (down) sl.direction = Direction::NonIncreasing, any_down = true;
      else broken = true, rep.violations.push_back({u, e, first_bad});
      rep.slices.push_back(sl);
    }
  }
  if (broken || (any_up && any_down)) rep.overall = Direction::None;
  else if (any_up) rep.overall = Direction::NonDecreasing;
  else if (any_down) rep.overall = Direction::NonIncreasing;
  else rep.overall = Direction::Constant;
  return rep;
}

SubmodularReport verify_q_submodular(const QTable& q, const StateSpace& space, double tol) {
  SubmodularReport rep;
  for (int u = 0; u < space.num_activities(); ++u) {
    for (int e = 0; e < 2; ++e) {
      for (int b = 0; b < space.battery_capacity(); ++b) {
        ++rep.comparisons;
        const double here = q.gap(space.index({u, e, b}));
        const double next = q.gap(space.index({u, e, b + 1}));
        if (here < next - tol) rep.violations.push_back({u, e, b});
      }
    }
  }
  return rep;
}

DeterministicPolicy ThresholdTable::to_policy(const StateSpace& space) const {
  DeterministicPolicy p = DeterministicPolicy::constant(space.size(), Action::Sleep);
  for (std::size_t s = 0; s < space.size(); ++s) {
    const State st = space.state(s);
    if (st.b >= (*this)(st.u, st.e)) p[s] = Action::Active;
  }
  return p;
}

NotThreshold::NotThreshold(const State& where)
    : std::runtime_error("policy is not a threshold policy at (u=" + std::to_string(where.u) +
                         ", e=" + std::to_string(where.e) + ", b=" + std::to_string(where.b) + ")"),
      where_(where) {}

ThresholdTable extract_threshold(const DeterministicPolicy& policy, const StateSpace& space) {
  ThresholdTable t{space.num_activities(), space.battery_capacity(),
                   std::vector<int>(static_cast<std::size_t>(space.num_activities() * 2), space.battery_capacity() + 1)};
  for (int u = 0; u < space.num_activities(); ++u) {
    for (int e = 0; e < 2; ++e) {
      for (int b = 0; b <= space.battery_capacity(); ++b) {
        const bool active = policy[space.index({u, e, b})] == Action::Active;
        if (active && t(u, e) > b) t(u, e) = b;
        if (!active && t(u, e) <= b) throw NotThreshold({u, e, b});
      }
    }
  }
  return t;
}

ThresholdTable project_threshold_table(const DeterministicPolicy& policy, const StateSpace& space,
                                       const std::vector<bool>* evidence) {
  const int cap = space.battery_capacity();
  ThresholdTable t{space.num_activities(), cap, std::vector<int>(static_cast<std::size_t>(space.num_activities() * 2))};
  for (int u = 0; u < space.num_activities(); ++u) {
    for (int e = 0; e < 2; ++e) {
      auto counts = [&](int b) { return !evidence || (*evidence)[space.index({u, e, b})]; };
      auto active = [&](int b) { return policy[space.index({u, e, b})] == Action::Active; };
      // flips(c) = #active below c + #sleep at or above c; walk c downward.
      int active_below = 0;
      for (int b = 0; b <= cap; ++b) active_below += counts(b) && active(b);
      int sleep_above = 0;
      int best = cap + 1, best_flips = active_below;
      for (int c = cap; c >= 0; --c) {
        if (counts(c)) {
          if (active(c)) --active_below;
          else ++sleep_above;
        }
        const int flips = active_below + sleep_above;
        if (flips < best_flips) best_flips = flips, best = c;
      }
      t(u, e) = best;
    }
  }
  return t;
}

DeterministicPolicy project_threshold(const DeterministicPolicy& policy, const QTable& /*q*/, const StateSpace& space,
                                      const std::vector<bool>* evidence) {
  return project_threshold_table(policy, space, evidence).to_policy(space);
}

}  // namespace actsense
