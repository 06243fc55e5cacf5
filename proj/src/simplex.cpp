#include "actsense/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace actsense {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::ptrdiff_t kNone = -1;

// Tableau over the standard-form columns [original | slacks | artificials].
// The last column holds the right-hand side.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    n_ = static_cast<std::ptrdiff_t>(lp.num_vars());
    const auto m_ub = lp.ineq.rows();
    const auto m_eq = lp.eq.rows();
    m_ = m_ub + m_eq;
    slack0_ = n_;
    art0_ = n_ + m_ub;

    std::vector<bool> needs_art(static_cast<std::size_t>(m_), false);
    std::ptrdiff_t num_art = 0;
    for (std::ptrdiff_t i = 0; i < m_ub; ++i)
      if (lp.ineq_rhs(i) < 0.0) needs_art[static_cast<std::size_t>(i)] = true, ++num_art;
    for (std::ptrdiff_t i = 0; i < m_eq; ++i) needs_art[static_cast<std::size_t>(m_ub + i)] = true, ++num_art;

    cols_ = art0_ + num_art;
    t_ = RowMatrix::Zero(m_, cols_ + 1);
    basis_.assign(static_cast<std::size_t>(m_), kNone);
    origin_.resize(static_cast<std::size_t>(m_));

    std::ptrdiff_t art = art0_;
    for (std::ptrdiff_t i = 0; i < m_; ++i) {
      origin_[static_cast<std::size_t>(i)] = i;
      const bool is_ub = i < m_ub;
      double sign = 1.0;
      if (is_ub) {
        if (lp.ineq_rhs(i) < 0.0) sign = -1.0;
        t_.row(i).head(n_) = sign * lp.ineq.row(i);
        t_(i, slack0_ + i) = sign;
        t_(i, cols_) = sign * lp.ineq_rhs(i);
      } else {
        const auto k = i - m_ub;
        if (lp.eq_rhs(k) < 0.0) sign = -1.0;
        t_.row(i).head(n_) = sign * lp.eq.row(k);
        t_(i, cols_) = sign * lp.eq_rhs(k);
      }
      if (needs_art[static_cast<std::size_t>(i)]) {
        t_(i, art) = 1.0;
        basis_[static_cast<std::size_t>(i)] = art++;
      } else {
        basis_[static_cast<std::size_t>(i)] = slack0_ + i;
      }
    }
  }

  std::ptrdiff_t rows() const { return m_; }
  std::size_t pivots() const { return pivots_; }
  std::size_t redundant() const { return redundant_; }
  const std::vector<std::ptrdiff_t>& basis() const { return basis_; }
  const std::vector<std::ptrdiff_t>& origin() const { return origin_; }
  double rhs(std::ptrdiff_t i) const { return t_(i, cols_); }

  /// Phase 1: minimize the sum of artificials. Returns the optimal sum.
  double phase_one() {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols_);
    for (std::ptrdiff_t j = art0_; j < cols_; ++j) cost(j) = 1.0;
    run(cost, cols_);
    double sum = 0.0;
    for (std::ptrdiff_t i = 0; i < m_; ++i)
      if (basis_[static_cast<std::size_t>(i)] >= art0_) sum += t_(i, cols_);
    return sum;
  }

  /// Pivots basic artificials out where possible, drops rows that turn out to
  /// be linearly dependent, then removes the artificial columns.
  void drop_artificials() {
    std::vector<std::ptrdiff_t> keep;
    for (std::ptrdiff_t i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < art0_) {
        keep.push_back(i);
        continue;
      }
      std::ptrdiff_t best = kNone;
      double best_abs = 1e-7;
      for (std::ptrdiff_t j = 0; j < art0_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best == kNone) {
        ++redundant_;
        continue;
      }
      pivot(i, best, nullptr);
      keep.push_back(i);
    }
    RowMatrix compact(static_cast<std::ptrdiff_t>(keep.size()), art0_ + 1);
    std::vector<std::ptrdiff_t> basis, origin;
    for (std::size_t r = 0; r < keep.size(); ++r) {
      const auto i = keep[r];
      compact.row(static_cast<std::ptrdiff_t>(r)).head(art0_) = t_.row(i).head(art0_);
      compact(static_cast<std::ptrdiff_t>(r), art0_) = t_(i, cols_);
      basis.push_back(basis_[static_cast<std::size_t>(i)]);
      origin.push_back(origin_[static_cast<std::size_t>(i)]);
    }
    t_ = std::move(compact);
    basis_ = std::move(basis);
    origin_ = std::move(origin);
    m_ = static_cast<std::ptrdiff_t>(keep.size());
    cols_ = art0_;
  }

  void phase_two(const Eigen::VectorXd& objective) {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols_);
    cost.head(n_) = objective;
    run(cost, cols_);
  }

 private:
  // Reduced costs c_j - c_B' T_j over the first `active` columns.
  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost, std::ptrdiff_t active) const {
    Eigen::VectorXd cb(m_);
    for (std::ptrdiff_t i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    Eigen::VectorXd r = cost.head(active);
    r.noalias() -= (cb.transpose() * t_.leftCols(active)).transpose();
    return r;
  }

  void run(const Eigen::VectorXd& cost, std::ptrdiff_t active) {
    Eigen::VectorXd r = reduced_costs(cost, active);
    bool bland = opt_.bland_only;
    std::size_t streak = 0;
    std::size_t since_refresh = 0;
    for (;;) {
      std::ptrdiff_t q = kNone;
      if (bland) {
        for (std::ptrdiff_t j = 0; j < active; ++j) {
          if (r(j) < -opt_.feasibility_tol) {
            q = j;
            break;
          }
        }
      } else {
        double most = -opt_.feasibility_tol;
        for (std::ptrdiff_t j = 0; j < active; ++j) {
          if (r(j) < most) {
            most = r(j);
            q = j;
          }
        }
      }
      if (q == kNone) {
        // Confirm against freshly computed reduced costs before stopping.
        if (since_refresh == 0) return;
        r = reduced_costs(cost, active);
        since_refresh = 0;
        continue;
      }

      const std::ptrdiff_t p = leaving_row(q, bland);
      if (p == kNone) throw LpError(LpStatus::Unbounded, "linear program is unbounded");
      if (pivots_ >= opt_.max_pivots) throw LpError(LpStatus::MaxPivots, "simplex pivot limit reached");

      const bool degenerate = t_(p, cols_) <= opt_.feasibility_tol;
      pivot(p, q, &r);
      ++since_refresh;
      if (degenerate) {
        if (++streak >= opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = opt_.bland_only;
      }
      if (since_refresh >= 200) {
        r = reduced_costs(cost, active);
        since_refresh = 0;
      }
    }
  }

  // Bland mode: exact minimum ratio, lowest basic index among ties.
  // Otherwise Harris's two-pass test: relax every ratio by the feasibility
  // tolerance, then take the largest pivot element under that bound.
  std::ptrdiff_t leaving_row(std::ptrdiff_t q, bool bland) const {
    double min_ratio = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t i = 0; i < m_; ++i) {
      const double a = t_(i, q);
      if (a <= opt_.pivot_tol) continue;
      const double rhs = std::max(t_(i, cols_), 0.0);
      min_ratio = std::min(min_ratio, rhs / a);
      bound = std::min(bound, (rhs + opt_.feasibility_tol) / a);
    }
    std::ptrdiff_t p = kNone;
    double best_a = 0.0;
    for (std::ptrdiff_t i = 0; i < m_; ++i) {
      const double a = t_(i, q);
      if (a <= opt_.pivot_tol) continue;
      const double ratio = std::max(t_(i, cols_), 0.0) / a;
      if (bland) {
        if (ratio <= min_ratio + 1e-12 &&
            (p == kNone || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(p)]))
          p = i;
      } else if (ratio <= bound && a > best_a) {
        best_a = a;
        p = i;
      }
    }
    return p;
  }

  void pivot(std::ptrdiff_t p, std::ptrdiff_t q, Eigen::VectorXd* reduced) {
    const double piv = t_(p, q);
    t_.row(p) /= piv;
    const Eigen::RowVectorXd prow = t_.row(p);
#pragma omp parallel for schedule(static) if (m_ > 128)
    for (std::ptrdiff_t i = 0; i < m_; ++i) {
      if (i == p) continue;
      const double f = t_(i, q);
      if (f != 0.0) {
        t_.row(i) -= f * prow;
        t_(i, q) = 0.0;
      }
    }
    if (reduced) {
      const double f = (*reduced)(q);
      reduced->noalias() -= f * prow.head(reduced->size()).transpose();
      (*reduced)(q) = 0.0;
    }
    basis_[static_cast<std::size_t>(p)] = q;
    ++pivots_;
  }

  SimplexOptions opt_;
  std::ptrdiff_t n_ = 0, m_ = 0, slack0_ = 0, art0_ = 0, cols_ = 0;
  RowMatrix t_;
  std::vector<std::ptrdiff_t> basis_;
  std::vector<std::ptrdiff_t> origin_;
  std::size_t pivots_ = 0;
  std::size_t redundant_ = 0;
};

}  // namespace

void LinearProgram::validate() const {
  const auto n = objective.size();
  if (ineq.rows() != ineq_rhs.size() || (ineq.rows() > 0 && ineq.cols() != n))
    throw std::invalid_argument("inequality block has inconsistent dimensions");
  if (eq.rows() != eq_rhs.size() || (eq.rows() > 0 && eq.cols() != n))
    throw std::invalid_argument("equality block has inconsistent dimensions");
  if (!var_names.empty() && static_cast<Eigen::Index>(var_names.size()) != n)
    throw std::invalid_argument("var_names must name every variable");
  if (!objective.allFinite() || !ineq.allFinite() || !ineq_rhs.allFinite() || !eq.allFinite() ||
      !eq_rhs.allFinite())
    throw std::invalid_argument("linear program has non-finite coefficients");
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::MaxPivots: return "MaxPivots";
  }
  return "Unknown";
}

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  const auto n = static_cast<std::ptrdiff_t>(lp.num_vars());
  const auto m_ub = lp.ineq.rows();

  Tableau tab(lp, options);
  const double infeas = tab.phase_one();
  if (infeas > 1e-8) throw LpError(LpStatus::Infeasible, "no feasible point (phase-one residual " +
                                                             std::to_string(infeas) + ")");
  tab.drop_artificials();
  tab.phase_two(lp.objective);

  // Re-solve the final basis against the original data so the reported point
  // and certificate carry no accumulated pivoting error.
  const auto m = tab.rows();
  const auto cols = n + m_ub;
  auto column = [&](std::ptrdiff_t j, std::ptrdiff_t orig_row) -> double {
    if (j < n) return orig_row < m_ub ? lp.ineq(orig_row, j) : lp.eq(orig_row - m_ub, j);
    return (j - n) == orig_row ? 1.0 : 0.0;
  };
  auto rhs_of = [&](std::ptrdiff_t orig_row) {
    return orig_row < m_ub ? lp.ineq_rhs(orig_row) : lp.eq_rhs(orig_row - m_ub);
  };
  Eigen::MatrixXd basis_mat(m, m);
  Eigen::VectorXd b(m), cb(m);
  for (std::ptrdiff_t r = 0; r < m; ++r) {
    const auto orig = tab.origin()[static_cast<std::size_t>(r)];
    b(r) = rhs_of(orig);
    for (std::ptrdiff_t k = 0; k < m; ++k) basis_mat(r, k) = column(tab.basis()[static_cast<std::size_t>(k)], orig);
  }
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const auto j = tab.basis()[static_cast<std::size_t>(k)];
    cb(k) = j < n ? lp.objective(j) : 0.0;
  }
  Eigen::VectorXd xb;
  Eigen::VectorXd y;
  if (m > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_mat);
    xb = lu.solve(b);
    y = lu.transpose().solve(cb);
  }

  LpResult res;
  res.pivots = tab.pivots();
  res.redundant_rows = tab.redundant();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(cols);
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const double v = xb(k);
    full(tab.basis()[static_cast<std::size_t>(k)]) = std::abs(v) < 1e-13 || v < 0.0 ? std::max(v, 0.0) : v;
  }
  res.x = full.head(n);
  res.objective = lp.objective.dot(res.x);

  // Reduced costs over all structural and slack columns.
  std::vector<bool> basic(static_cast<std::size_t>(cols), false);
  for (auto j : tab.basis()) basic[static_cast<std::size_t>(j)] = true;
  double min_rc = 0.0;
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    if (basic[static_cast<std::size_t>(j)]) continue;
    double rc = j < n ? lp.objective(j) : 0.0;
    for (std::ptrdiff_t r = 0; r < m; ++r) rc -= y(r) * column(j, tab.origin()[static_cast<std::size_t>(r)]);
    min_rc = std::min(min_rc, rc);
  }
  res.min_reduced_cost = min_rc;

  double resid = 0.0;
  if (lp.eq.rows() > 0) resid = std::max(resid, (lp.eq * res.x - lp.eq_rhs).cwiseAbs().maxCoeff());
  if (m_ub > 0) resid = std::max(resid, (lp.ineq * res.x - lp.ineq_rhs).maxCoeff());
  res.max_residual = std::max(resid, 0.0);
  return res;
}

void write_lp_format(const LinearProgram& lp, std::ostream& out) {
  lp.validate();
  const auto n = lp.objective.size();
  auto name = [&](Eigen::Index j) {
    return lp.var_names.empty() ? "x" + std::to_string(j) : lp.var_names[static_cast<std::size_t>(j)];
  };
  auto term_list = [&](const Eigen::RowVectorXd& row) {
    bool first = true;
    int on_line = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = row(j);
      if (c == 0.0) continue;
      out << (first ? (c < 0 ? "- " : "") : (c < 0 ? " - " : " + ")) << std::abs(c) << ' ' << name(j);
      first = false;
      if (++on_line % 8 == 0) out << "\n   ";
    }
    if (first) out << "0 " << name(0);
  };
  const auto old_prec = out.precision(17);
  out << "\\ dense LP export\nMinimize\n obj: ";
  term_list(lp.objective.transpose());
  out << "\nSubject To\n";
  for (Eigen::Index i = 0; i < lp.ineq.rows(); ++i) {
    out << " ub" << i << ": ";
    term_list(lp.ineq.row(i));
    out << " <= " << lp.ineq_rhs(i) << '\n';
  }
  for (Eigen::Index i = 0; i < lp.eq.rows(); ++i) {
    out << " eq" << i << ": ";
    term_list(lp.eq.row(i));
    out << " = " << lp.eq_rhs(i) << '\n';
  }
  out << "Bounds\n";
  for (Eigen::Index j = 0; j < n; ++j) out << ' ' << name(j) << " >= 0\n";
  out << "End\n";
  out.precision(old_prec);
}

}  // namespace actsense
