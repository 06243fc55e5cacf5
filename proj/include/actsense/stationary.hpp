#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsense/model.hpp"
#include "actsense/policy.hpp"

namespace actsense {

class NotErgodic : public std::runtime_error {
 public:
  NotErgodic(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct StationaryOptions {
  double tol = 1e-12;            // L1 norm of mu P - mu
  std::size_t max_steps = 100000;
};

/// Power iteration on the lazy chain (I + P_pi)/2 from the uniform start;
/// returns phi(s,a) = mu(s) pi(a|s). Throws NotErgodic when the residual does
/// not reach tol within max_steps.
StationarySolution stationary_distribution(const TabularMdp& mdp, const Policy& policy,
                                           const StationaryOptions& options = {});

namespace serial {
StationarySolution stationary_distribution(const TabularMdp& mdp, const Policy& policy,
                                           const StationaryOptions& options = {});
}

/// sum b phi([u,e,b], active), unnormalized.
double avg_battery(const StateSpace& space, const std::vector<double>& phi);
/// avg_battery divided by the active mass (0 when never active).
double avg_battery_when_active(const StateSpace& space, const std::vector<double>& phi);

/// sum g phi(., active).
double sync_probability(const TabularMdp& mdp, const std::vector<double>& phi);
double sync_probability_when_active(const TabularMdp& mdp, const std::vector<double>& phi);

/// sum_u phi([u,1,B-1],active)(1-g) + phi([u,1,B-1],sleep). Zero when B = 0.
double overflow_probability(const SensingModel& model, const std::vector<double>& phi);

/// Probability that an arriving energy unit finds the battery already full
/// after this epoch's consumption: e = 1 and [b - delta]^+ = B on the branch
/// taken.
double energy_overflow_probability(const SensingModel& model, const std::vector<double>& phi);

double active_mass(const std::vector<double>& phi);

struct ActivityError {
  std::vector<double> raw;         // sum_{e,b,a} c phi restricted to u
  std::vector<double> normalized;  // raw / mu(u)
};

ActivityError per_activity_error(const SensingModel& model, const TabularMdp& mdp, const std::vector<double>& phi);

struct CupSolution {
  Policy policy;
  StationarySolution measure;  // the closed-form phi, not the chain's stationary law
};

/// Uniform activation with probability xi = D / d everywhere; phi is spread
/// evenly over |U| x (B+1) x 2.
CupSolution cup_policy(const SensingModel& model, const TabularMdp& mdp);

}  // namespace actsense
