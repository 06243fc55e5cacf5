#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "actsense/dp.hpp"
#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/stationary.hpp"
#include "actsense/structure.hpp"

namespace actsense {

class DegenerateMixture : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// gamma pi_plus + (1 - gamma) pi_minus, randomized per decision.
struct MixturePolicy {
  DeterministicPolicy pi_plus;   // solved at lambda_star + delta_lambda
  DeterministicPolicy pi_minus;  // solved at lambda_star - delta_lambda
  ThresholdTable cut_plus;
  ThresholdTable cut_minus;
  double gamma = 0.0;
  double delta_lambda = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double data_plus = 0.0;
  double data_minus = 0.0;
  bool gamma_clamped = false;  // raw gamma fell outside [0,1]
  bool slack = false;          // pi_minus already meets the budget; gamma forced to 0

  Policy as_policy() const;
};

/// gamma = (D_minus - D) / (D_minus - D_plus) clamped to [0,1]; returns 0
/// and sets `slack` when D_minus <= D. Throws DegenerateMixture when
/// D_minus == D_plus > D, NotThreshold if a component is not threshold.
double mixing_weight(double data_minus, double data_plus, double budget, bool* clamped = nullptr,
                     bool* slack = nullptr);

/// Requires delta_lambda > 0 and lambda_star - delta_lambda >= 0.
MixturePolicy build_mixture(const Problem& problem, double lambda_star, double delta_lambda, double beta,
                            const ViOptions& vi = {});

StationarySolution mixture_as_stationary(const Problem& problem, const MixturePolicy& mixture,
                                         const StationaryOptions& options = {});

/// CSV with header u,e,b_cut_minus,b_cut_plus,gamma.
void write_mixture_csv(const MixturePolicy& mixture, std::ostream& out);

}  // namespace actsense
