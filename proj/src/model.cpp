#include "actsense/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace actsense {

namespace {

constexpr double kRowTol = 1e-10;

std::string describe(const State& s, Action a) {
  std::ostringstream os;
  os << "(u=" << s.u << ", e=" << s.e << ", b=" << s.b << ", action=" << to_int(a) << ")";
  return os.str();
}

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

// Fills one (from, action) row of the dense kernel. Both battery branches of
// the transition are clamped with the Lindley rule; when they land on the same
// level their masses add.
void fill_row(const SensingModel& m, const State& from, Action a, std::span<double> row) {
  const StateSpace& sp = m.space;
  const int cap = m.capacity();
  const double g = m.connectivity(from, a);
  const int b_success = lindley_update(from.b, from.e, a, cap);
  const int b_fail = std::min(from.b + from.e, cap);
  std::fill(row.begin(), row.end(), 0.0);
  for (int u2 = 0; u2 < m.num_activities(); ++u2) {
    const double pu = m.user_prob(from.u, u2);
    if (pu == 0.0) continue;
    for (int e2 = 0; e2 < 2; ++e2) {
      const double pe = e2 ? m.charge_prob : 1.0 - m.charge_prob;
      const double w = pu * pe;
      row[sp.index({u2, e2, b_success})] += w * g;
      row[sp.index({u2, e2, b_fail})] += w * (1.0 - g);
    }
  }
}

void check_row(const SensingModel& m, std::size_t s, Action a, std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0 + kRowTol))
      throw ModelError("kernel entry outside [0,1] at " + describe(m.space.state(s), a));
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowTol)
    throw ModelError("kernel row not stochastic at " + describe(m.space.state(s), a));
}

}  // namespace

StateSpace::StateSpace(int num_activities, int battery_capacity)
    : activities_(num_activities), capacity_(battery_capacity) {
  if (num_activities <= 0) throw ModelError("num_activities must be positive", "activities");
  if (battery_capacity < 0) throw ModelError("battery_capacity must be nonnegative", "battery_capacity");
}

State StateSpace::state(std::size_t index) const {
  const auto levels = static_cast<std::size_t>(capacity_ + 1);
  State s;
  s.b = static_cast<int>(index % levels);
  index /= levels;
  s.e = static_cast<int>(index % 2);
  s.u = static_cast<int>(index / 2);
  return s;
}

int lindley_update(int b, int e, Action delta, int capacity) {
  return std::min(std::max(b - to_int(delta), 0) + e, capacity);
}

double SensingModel::detect_error(const State& s, Action a) const {
  if (a == Action::Sleep) return 1.0;
  if (s.b == 0 && detect_error_empty) return *detect_error_empty;
  return detect_error_active[static_cast<std::size_t>(s.u)];
}

double SensingModel::connectivity(const State& s, Action a) const {
  if (a == Action::Sleep) return 0.0;
  return connectivity_active[static_cast<std::size_t>(s.u)];
}

double SensingModel::data_usage(const State& s, Action a) const {
  if (a == Action::Sleep || s.b == 0) return 0.0;
  return data_usage_active[static_cast<std::size_t>(s.u)];
}

void SensingModel::validate() const {
  const auto n = static_cast<std::size_t>(num_activities());
  if (!activity_names.empty() && activity_names.size() != n)
    throw ModelError("activity names must match the number of activities", "activities");
  if (user_transition.size() != n * n)
    throw ModelError("user_transition must be |U| x |U|", "user_transition");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = user_transition[i * n + j];
      if (!in_unit(p)) throw ModelError("user_transition entry outside [0,1]", "user_transition");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ModelError("user_transition row " + std::to_string(i) + " does not sum to 1", "user_transition");
  }
  if (!in_unit(charge_prob)) throw ModelError("charge_prob outside [0,1]", "charge_prob");
  if (detect_error_active.size() != n)
    throw ModelError("detect_error_active needs one value per activity", "detect_error_active");
  if (connectivity_active.size() != n)
    throw ModelError("connectivity_active needs one value per activity", "connectivity_active");
  if (data_usage_active.size() != n)
    throw ModelError("data_usage_active needs one value per activity", "data_usage_active");
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_unit(detect_error_active[i]))
      throw ModelError("detect_error_active outside [0,1]", "detect_error_active");
    if (!in_unit(connectivity_active[i]))
      throw ModelError("connectivity_active outside [0,1]", "connectivity_active");
    if (!std::isfinite(data_usage_active[i]) || data_usage_active[i] < 0.0)
      throw ModelError("data_usage_active must be nonnegative", "data_usage_active");
  }
  if (detect_error_empty && !in_unit(*detect_error_empty)) throw ModelError("detect_error_empty outside [0,1]", "detect_error_empty");
  if (!(std::isfinite(budget) && budget > 0.0)) throw ModelError("data_budget must be positive", "data_budget");
  if (!(discount >= 0.0 && discount < 1.0)) throw ModelError("discount must lie in [0,1)", "discount");
}

SensingModel default_model() {
  SensingModel m;
  m.space = StateSpace(6, 20);
  m.activity_names = {"grooming", "spare_time_tv", "leaving", "sleeping", "toileting_showering", "eating"};
  // Activities: 0 grooming, 1 spare time/TV, 2 leaving, 3 sleeping,
  // 4 toileting/showering, 5 eating. Diagonal 0.6; each activity moves to two
  // follow-up activities with 0.2 each. The chain is irreducible.
  m.user_transition = {
      0.6, 0.2, 0.0, 0.2, 0.0, 0.0,  //
      0.2, 0.6, 0.0, 0.0, 0.0, 0.2,  //
      0.0, 0.2, 0.6, 0.2, 0.0, 0.0,  //
      0.0, 0.2, 0.0, 0.6, 0.2, 0.0,  //
      0.2, 0.0, 0.0, 0.2, 0.6, 0.0,  //
      0.2, 0.0, 0.2, 0.0, 0.0, 0.6,  //
  };
  m.charge_prob = 0.15;
  m.detect_error_active = {0.28, 0.25, 0.18, 0.12, 0.10, 0.08};
  m.connectivity_active = {0.50, 0.55, 0.60, 0.65, 0.68, 0.70};
  m.data_usage_active = std::vector<double>(6, 1.0);
  m.detect_error_empty = 1.0;
  m.budget = 0.25;
  m.discount = 0.99;
  return m;
}

double transition_prob(const SensingModel& m, const State& from, Action delta, const State& to) {
  const int cap = m.capacity();
  const double g = m.connectivity(from, delta);
  const int b_success = lindley_update(from.b, from.e, delta, cap);
  const int b_fail = std::min(from.b + from.e, cap);
  double battery = 0.0;
  if (to.b == b_success) battery += g;
  if (to.b == b_fail) battery += 1.0 - g;
  const double pe = to.e ? m.charge_prob : 1.0 - m.charge_prob;
  return m.user_prob(from.u, to.u) * pe * battery;
}

TransitionKernel::TransitionKernel(std::size_t num_states, std::vector<double> dense)
    : states_(num_states), dense_(std::move(dense)) {
  if (dense_.size() != states_ * kNumActions * states_)
    throw ModelError("kernel size does not match |S| x 2 x |S|");
  const std::size_t rows = states_ * kNumActions;
  offsets_.assign(rows + 1, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < states_; ++t) {
      const double p = dense_[r * states_ + t];
      if (p != 0.0) entries_.push_back({static_cast<std::uint32_t>(t), p});
    }
    offsets_[r + 1] = entries_.size();
  }
}

TransitionKernel build_kernel(const SensingModel& model) {
  model.validate();
  const std::size_t n = model.space.size();
  std::vector<double> dense(n * kNumActions * n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const State from = model.space.state(s);
    for (int a = 0; a < kNumActions; ++a) {
      fill_row(model, from, action_from(a), {dense.data() + (s * kNumActions + a) * n, n});
    }
  }
  for (std::size_t s = 0; s < n; ++s)
    for (int a = 0; a < kNumActions; ++a)
      check_row(model, s, action_from(a), {dense.data() + (s * kNumActions + a) * n, n});
  return TransitionKernel(n, std::move(dense));
}

namespace serial {

TransitionKernel build_kernel(const SensingModel& model) {
  model.validate();
  const std::size_t n = model.space.size();
  std::vector<double> dense(n * kNumActions * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const State from = model.space.state(s);
    for (int a = 0; a < kNumActions; ++a) {
      for (std::size_t t = 0; t < n; ++t)
        dense[(s * kNumActions + a) * n + t] = transition_prob(model, from, action_from(a), model.space.state(t));
      check_row(model, s, action_from(a), {dense.data() + (s * kNumActions + a) * n, n});
    }
  }
  return TransitionKernel(n, std::move(dense));
}

}  // namespace serial

double sensing_fraction(const SensingModel& model) {
  if (model.data_usage_active.empty()) throw ModelError("no active data usage", "data_usage_active");
  const double d = model.data_usage_active.front();
  for (double x : model.data_usage_active) {
    if (x != d) throw ModelError("sensing fraction needs a constant active data usage", "data_usage_active");
  }
  if (!(d > 0.0)) throw ModelError("sensing fraction needs a positive active data usage", "data_usage_active");
  return model.budget / d;
}

double TabularMdp::max_data() const {
  double m = 0.0;
  for (double d : data_table) m = std::max(m, d);
  return m;
}

void TabularMdp::validate() const {
  const std::size_t n = num_states();
  if (cost_table.size() != n * kNumActions || data_table.size() != n * kNumActions ||
      conn_table.size() != n * kNumActions)
    throw ModelError("cost/data/connectivity tables must have |S| x 2 entries");
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      double sum = 0.0;
      for (double p : kernel.row(s, action_from(a))) sum += p;
      if (std::abs(sum - 1.0) > kRowTol)
        throw ModelError("kernel row " + std::to_string(s) + "/" + std::to_string(a) + " not stochastic");
    }
  }
}

TabularMdp tabulate(const SensingModel& model) {
  TabularMdp mdp;
  mdp.kernel = build_kernel(model);
  const std::size_t n = model.space.size();
  mdp.cost_table.resize(n * kNumActions);
  mdp.data_table.resize(n * kNumActions);
  mdp.conn_table.resize(n * kNumActions);
  for (std::size_t s = 0; s < n; ++s) {
    const State st = model.space.state(s);
    for (int a = 0; a < kNumActions; ++a) {
      mdp.cost_table[s * kNumActions + a] = model.detect_error(st, action_from(a));
      mdp.data_table[s * kNumActions + a] = model.data_usage(st, action_from(a));
      mdp.conn_table[s * kNumActions + a] = model.connectivity(st, action_from(a));
    }
  }
  return mdp;
}

Problem::Problem(SensingModel model) : model_(std::move(model)), mdp_(tabulate(model_)) {}

}  // namespace actsense
