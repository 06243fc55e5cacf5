#include "actsense/mixture.hpp"

#include <algorithm>
#include <exception>
#include <ostream>

#include "actsense/csv.hpp"

namespace actsense {

Policy MixturePolicy::as_policy() const {
  Policy p = Policy::constant(pi_plus.size(), 0.0);
  for (std::size_t s = 0; s < pi_plus.size(); ++s) {
    p.active_prob[s] = gamma * (pi_plus[s] == Action::Active ? 1.0 : 0.0) +
                       (1.0 - gamma) * (pi_minus[s] == Action::Active ? 1.0 : 0.0);
  }
  return p;
}

double mixing_weight(double data_minus, double data_plus, double budget, bool* clamped, bool* slack) {
  if (clamped) *clamped = false;
  if (slack) *slack = false;
  if (data_minus <= budget) {
    if (slack) *slack = true;
    return 0.0;
  }
  if (data_minus == data_plus) throw DegenerateMixture("both mixture components use the same amount of data");
  const double raw = (data_minus - budget) / (data_minus - data_plus);
  const double g = std::clamp(raw, 0.0, 1.0);
  if (clamped && g != raw) *clamped = true;
  return g;
}

MixturePolicy build_mixture(const Problem& problem, double lambda_star, double delta_lambda, double beta,
                            const ViOptions& vi) {
  if (!(delta_lambda > 0.0)) throw std::invalid_argument("delta_lambda must be positive");
  if (lambda_star - delta_lambda < 0.0) throw std::invalid_argument("lambda_star - delta_lambda must be nonnegative");
  const TabularMdp& mdp = problem.mdp();
  MixturePolicy m;
  m.delta_lambda = delta_lambda;
  m.lambda_plus = lambda_star + delta_lambda;
  m.lambda_minus = lambda_star - delta_lambda;

  ViResult plus, minus;
  std::exception_ptr err_plus, err_minus;
#pragma omp parallel sections
  {
#pragma omp section
    try {
      plus = value_iteration(mdp, m.lambda_plus, beta, vi);
    } catch (...) {
      err_plus = std::current_exception();
    }
#pragma omp section
    try {
      minus = value_iteration(mdp, m.lambda_minus, beta, vi);
    } catch (...) {
      err_minus = std::current_exception();
    }
  }
  if (err_plus) std::rethrow_exception(err_plus);
  if (err_minus) std::rethrow_exception(err_minus);
  m.pi_plus = std::move(plus.policy);
  m.pi_minus = std::move(minus.policy);
  m.cut_plus = extract_threshold(m.pi_plus, problem.space());
  m.cut_minus = extract_threshold(m.pi_minus, problem.space());
  m.data_plus = stationary_distribution(mdp, Policy::from(m.pi_plus)).data_usage;
  m.data_minus = stationary_distribution(mdp, Policy::from(m.pi_minus)).data_usage;
  m.gamma = mixing_weight(m.data_minus, m.data_plus, problem.model().budget, &m.gamma_clamped, &m.slack);
  return m;
}

StationarySolution mixture_as_stationary(const Problem& problem, const MixturePolicy& mixture,
                                         const StationaryOptions& options) {
  return stationary_distribution(problem.mdp(), mixture.as_policy(), options);
}

void write_mixture_csv(const MixturePolicy& mixture, std::ostream& out) {
  CsvWriter w(out, {"u", "e", "b_cut_minus", "b_cut_plus", "gamma"});
  for (int u = 0; u < mixture.cut_minus.num_activities; ++u)
    for (int e = 0; e < 2; ++e) w.row(u, e, mixture.cut_minus(u, e), mixture.cut_plus(u, e), mixture.gamma);
}

}  // namespace actsense
