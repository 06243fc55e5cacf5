#pragma once

#include <cstdint>
#include <optional>

#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/rng.hpp"

namespace actsense {

/// Draws the chain one epoch at a time, branch by branch: connectivity,
/// activity, charge flag, then the battery update.
class Environment {
 public:
  struct Step {
    State from;
    Action action;
    bool connected;  // connectivity draw succeeded (always false when asleep)
    bool overflow;   // an arriving energy unit found the battery full
    State to;
  };

  Environment(const SensingModel& model, std::uint64_t seed, State start = {});

  const State& state() const { return state_; }
  std::size_t state_index() const { return model_->space.index(state_); }
  Step step(Action a);
  Rng& rng() { return rng_; }

 private:
  const SensingModel* model_;
  Rng rng_;
  State state_;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // batch-means standard error
};

struct TrajectoryStats {
  std::uint64_t epochs = 0;
  Estimate detect_error;
  Estimate data_usage;
  Estimate avg_battery;        // b 1{active}, as in the analytic form
  Estimate sync_rate;          // 1{active and connected}
  Estimate overflow;           // printed form: e=1, b=B-1, not (active and connected)
  Estimate energy_overflow;    // physical: arriving energy wasted
};

struct SimOptions {
  std::uint64_t epochs = 1000000;
  std::uint64_t warmup = 10000;
  std::uint64_t seed = 1;
  std::uint64_t batches = 100;
  /// One-shot mixing: with this probability the whole run follows `alt`,
  /// decided once before the first epoch.
  std::optional<Policy> alt;
  double alt_prob = 0.0;
};

TrajectoryStats simulate(const SensingModel& model, const Policy& policy, const SimOptions& options);

}  // namespace actsense
