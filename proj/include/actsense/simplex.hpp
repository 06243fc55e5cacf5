#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace actsense {

/// minimize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd ineq;
  Eigen::VectorXd ineq_rhs;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  std::vector<std::string> var_names;  // optional; used by the text dump

  std::size_t num_vars() const { return static_cast<std::size_t>(objective.size()); }
  /// Throws std::invalid_argument on inconsistent dimensions or non-finite data.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, MaxPivots };

const char* to_string(LpStatus status);

class LpError : public std::runtime_error {
 public:
  LpError(LpStatus status, const std::string& what) : std::runtime_error(what), status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_pivots = 200000;
  /// Consecutive degenerate pivots before switching from largest-coefficient
  /// pricing to Bland's rule. Phase one on occupation-measure programs is
  /// degenerate for roughly one pivot per balance row, so this must exceed
  /// the row count.
  std::size_t degenerate_streak = 5000;
  /// Use Bland's rule from the first pivot.
  bool bland_only = false;
};

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
  /// Smallest reduced cost over nonbasic columns at termination; >= -tol
  /// certifies optimality.
  double min_reduced_cost = 0.0;
  /// Largest equality / inequality violation of x.
  double max_residual = 0.0;
  /// Constraint rows found linearly dependent and dropped.
  std::size_t redundant_rows = 0;
};

/// Dense two-phase tableau simplex. Throws LpError on infeasible, unbounded,
/// or pivot-limit outcomes.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

/// Writes the program in CPLEX LP text format. Variables are x0..x{n-1}
/// unless var_names is set.
void write_lp_format(const LinearProgram& lp, std::ostream& out);

}  // namespace actsense
