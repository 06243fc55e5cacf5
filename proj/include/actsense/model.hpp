#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace actsense {

/// Sensing action: sleep (no sensing, no transmission) or active.
enum class Action : std::uint8_t { Sleep = 0, Active = 1 };

inline constexpr int kNumActions = 2;

inline constexpr int to_int(Action a) { return static_cast<int>(a); }
inline constexpr Action action_from(int a) { return a ? Action::Active : Action::Sleep; }

/// (activity, charge flag, battery level).
struct State {
  int u = 0;
  int e = 0;
  int b = 0;

  friend bool operator==(const State&, const State&) = default;
};

/// Raised for an invalid problem instance or malformed configuration.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  /// Offending configuration key, if the error came from one.
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Product space of activities x {0,1} x {0..B}. States are indexed
/// lexicographically in (u, e, b) with b varying fastest.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(int num_activities, int battery_capacity);

  int num_activities() const { return activities_; }
  int battery_capacity() const { return capacity_; }
  int battery_levels() const { return capacity_ + 1; }
  std::size_t size() const {
    return static_cast<std::size_t>(activities_) * 2 * static_cast<std::size_t>(capacity_ + 1);
  }

  std::size_t index(const State& s) const {
    return (static_cast<std::size_t>(s.u) * 2 + static_cast<std::size_t>(s.e)) *
               static_cast<std::size_t>(capacity_ + 1) +
           static_cast<std::size_t>(s.b);
  }
  State state(std::size_t index) const;
  bool contains(const State& s) const {
    return s.u >= 0 && s.u < activities_ && (s.e == 0 || s.e == 1) && s.b >= 0 && s.b <= capacity_;
  }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  int activities_ = 1;
  int capacity_ = 0;
};

/// Battery recursion: min([b - delta]^+ + e, B).
int lindley_update(int b, int e, Action delta, int capacity);

/// Problem instance. The per-(state, action) functions are derived from
/// per-activity parameters; see detect_error(), connectivity(), data_usage().
struct SensingModel {
  StateSpace space;
  std::vector<std::string> activity_names;  // optional labels, one per activity
  std::vector<double> user_transition;      // row-major |U| x |U|
  double charge_prob = 0.0;
  std::vector<double> detect_error_active;  // c(., active) per activity
  std::vector<double> connectivity_active;  // g(., active) per activity
  std::vector<double> data_usage_active;    // d(., active) per activity, for b > 0
  // c(., active) at b = 0; unset means the per-activity value applies there too.
  std::optional<double> detect_error_empty = 1.0;
  double budget = 0.25;
  double discount = 0.99;

  int num_activities() const { return space.num_activities(); }
  int capacity() const { return space.battery_capacity(); }

  double user_prob(int from, int to) const {
    return user_transition[static_cast<std::size_t>(from) * static_cast<std::size_t>(num_activities()) +
                           static_cast<std::size_t>(to)];
  }
  double detect_error(const State& s, Action a) const;
  double connectivity(const State& s, Action a) const;
  double data_usage(const State& s, Action a) const;
  /// c + lambda * d.
  double lagrangian_cost(const State& s, Action a, double lambda) const {
    return detect_error(s, a) + lambda * data_usage(s, a);
  }

  /// Throws ModelError naming the violated constraint.
  void validate() const;

  friend bool operator==(const SensingModel&, const SensingModel&) = default;
};

/// Six-activity home-routine instance with B = 20, D = 0.25, beta = 0.99.
SensingModel default_model();

/// One-step transition probability P(to | from, delta).
double transition_prob(const SensingModel& model, const State& from, Action delta, const State& to);

/// Dense |S| x 2 x |S| transition kernel plus a compressed row view used by
/// the iterative kernels.
class TransitionKernel {
 public:
  struct Entry {
    std::uint32_t to;
    double prob;
  };

  TransitionKernel() = default;
  TransitionKernel(std::size_t num_states, std::vector<double> dense);

  std::size_t num_states() const { return states_; }
  double operator()(std::size_t from, Action a, std::size_t to) const {
    return dense_[(from * kNumActions + static_cast<std::size_t>(a)) * states_ + to];
  }
  std::span<const double> row(std::size_t from, Action a) const {
    return {dense_.data() + (from * kNumActions + static_cast<std::size_t>(a)) * states_, states_};
  }
  /// Nonzero entries of row (from, a).
  std::span<const Entry> sparse_row(std::size_t from, Action a) const {
    const std::size_t r = from * kNumActions + static_cast<std::size_t>(a);
    return {entries_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  const std::vector<double>& dense() const { return dense_; }

 private:
  std::size_t states_ = 0;
  std::vector<double> dense_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

/// Materializes the kernel (OpenMP over source states). Throws ModelError
/// naming the offending (state, action) if a row is not stochastic.
TransitionKernel build_kernel(const SensingModel& model);

namespace serial {
TransitionKernel build_kernel(const SensingModel& model);
}

/// Fraction of epochs that may transmit: D / d(., active).
double sensing_fraction(const SensingModel& model);

/// Finite MDP with two actions, tabulated: kernel plus per-(state, action)
/// detection error, data usage and connectivity. Solvers operate on this.
struct TabularMdp {
  TransitionKernel kernel;
  std::vector<double> cost_table;   // |S| x 2
  std::vector<double> data_table;   // |S| x 2
  std::vector<double> conn_table;   // |S| x 2

  std::size_t num_states() const { return kernel.num_states(); }
  double cost(std::size_t s, Action a) const { return cost_table[s * kNumActions + to_int(a)]; }
  double data(std::size_t s, Action a) const { return data_table[s * kNumActions + to_int(a)]; }
  double connectivity(std::size_t s, Action a) const { return conn_table[s * kNumActions + to_int(a)]; }
  double lagrangian_cost(std::size_t s, Action a, double lambda) const {
    return cost(s, a) + lambda * data(s, a);
  }
  double max_data() const;

  /// Checks table shapes and row stochasticity.
  void validate() const;
};

TabularMdp tabulate(const SensingModel& model);

/// Model plus its tabulation. Immutable after construction, so safe to share
/// between threads.
class Problem {
 public:
  explicit Problem(SensingModel model);

  const SensingModel& model() const { return model_; }
  const StateSpace& space() const { return model_.space; }
  const TabularMdp& mdp() const { return mdp_; }
  std::size_t num_states() const { return mdp_.num_states(); }

 private:
  SensingModel model_;
  TabularMdp mdp_;
};

}  // namespace actsense
