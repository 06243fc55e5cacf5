#include "actsense/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace actsense {

Environment::Environment(const SensingModel& model, std::uint64_t seed, State start)
    : model_(&model), rng_(seed), state_(start) {
  if (!model.space.contains(start)) throw std::invalid_argument("start state outside the state space");
}

Environment::Step Environment::step(Action a) {
  const SensingModel& m = *model_;
  const int cap = m.capacity();
  Step st{state_, a, false, false, {}};
  st.connected = rng_.bernoulli(m.connectivity(state_, a));

  const double r = rng_.uniform();
  int u2 = m.num_activities() - 1;
  double acc = 0.0;
  for (int u = 0; u < m.num_activities(); ++u) {
    acc += m.user_prob(state_.u, u);
    if (r < acc) {
      u2 = u;
      break;
    }
  }
  const int e2 = rng_.bernoulli(m.charge_prob) ? 1 : 0;

  const int drained = st.connected ? std::max(state_.b - to_int(a), 0) : state_.b;
  st.overflow = state_.e == 1 && drained == cap;
  const int b2 = st.connected ? lindley_update(state_.b, state_.e, a, cap) : std::min(state_.b + state_.e, cap);
  state_ = {u2, e2, b2};
  st.to = state_;
  return st;
}

namespace {

// Fixed-size batch means: per-batch averages, then the standard error of
// their mean.
class BatchMeans {
 public:
  BatchMeans(std::uint64_t total, std::uint64_t batches)
      : per_batch_(std::max<std::uint64_t>(total / std::max<std::uint64_t>(batches, 1), 1)) {}

  void add(double x) {
    sum_ += x;
    cur_ += x;
    if (++in_batch_ == per_batch_) {
      means_.push_back(cur_ / static_cast<double>(per_batch_));
      cur_ = 0.0;
      in_batch_ = 0;
    }
    ++count_;
  }

  Estimate estimate() const {
    Estimate e;
    if (count_ == 0) return e;
    e.mean = sum_ / static_cast<double>(count_);
    const auto k = static_cast<double>(means_.size());
    if (means_.size() < 2) return e;
    double avg = 0.0;
    for (double m : means_) avg += m;
    avg /= k;
    double ss = 0.0;
    for (double m : means_) ss += (m - avg) * (m - avg);
    e.se = std::sqrt(ss / (k - 1.0) / k);
    return e;
  }

 private:
  std::uint64_t per_batch_;
  std::uint64_t in_batch_ = 0;
  std::uint64_t count_ = 0;
  double sum_ = 0.0, cur_ = 0.0;
  std::vector<double> means_;
};

}  // namespace

TrajectoryStats simulate(const SensingModel& model, const Policy& policy, const SimOptions& options) {
  if (options.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  const std::size_t n = model.space.size();
  policy.validate(n);
  if (options.alt) options.alt->validate(n);

  Environment env(model, options.seed);
  const Policy* acting = &policy;
  if (options.alt && env.rng().bernoulli(options.alt_prob)) acting = &*options.alt;

  const int cap = model.capacity();
  std::array<BatchMeans, 6> acc{BatchMeans(options.epochs, options.batches), BatchMeans(options.epochs, options.batches),
                                BatchMeans(options.epochs, options.batches), BatchMeans(options.epochs, options.batches),
                                BatchMeans(options.epochs, options.batches), BatchMeans(options.epochs, options.batches)};
  for (std::uint64_t t = 0; t < options.warmup + options.epochs; ++t) {
    const std::size_t s = env.state_index();
    const Action a = env.rng().bernoulli(acting->active_prob[s]) ? Action::Active : Action::Sleep;
    const Environment::Step st = env.step(a);
    if (t < options.warmup) continue;
    const bool active = a == Action::Active;
    acc[0].add(model.detect_error(st.from, a));
    acc[1].add(model.data_usage(st.from, a));
    acc[2].add(active ? st.from.b : 0.0);
    acc[3].add(active && st.connected ? 1.0 : 0.0);
    acc[4].add(cap > 0 && st.from.e == 1 && st.from.b == cap - 1 && !(active && st.connected) ? 1.0 : 0.0);
    acc[5].add(st.overflow ? 1.0 : 0.0);
  }
  TrajectoryStats out;
  out.epochs = options.epochs;
  out.detect_error = acc[0].estimate();
  out.data_usage = acc[1].estimate();
  out.avg_battery = acc[2].estimate();
  out.sync_rate = acc[3].estimate();
  out.overflow = acc[4].estimate();
  out.energy_overflow = acc[5].estimate();
  return out;
}

}  // namespace actsense
