#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnst/lp.hpp"
#include "gnst/scalar.hpp"

namespace gnst {

/// Entering-column rule. Rational pivots under Dantzig pricing tend to grow
/// much longer numbers on the optimization LPs, so exact solves default to
/// Bland's rule.
enum class Pricing { automatic, bland, dantzig };

struct SolveOptions {
  Pricing pricing = Pricing::automatic;  // automatic: Bland if exact, Dantzig if float
  double pivot_tol = 1e-9;   // float: smallest admissible pivot element
  double harris_tol = 1e-9;  // float: primal infeasibility tolerated by the ratio test
  double feas_tol = 1e-9;    // float: primal feasibility
  double opt_tol = 1e-9;     // float: reduced-cost optimality
  double infeas_tol = 1e-7;  // float: phase-1 artificial level that proves infeasibility
  double drop_tol = 1e-13;   // float: entries below this are flushed to zero
  std::size_t stall_limit = 50;  // Dantzig: degenerate pivots before switching to Bland
  std::size_t max_pivots = 20'000'000;
};

namespace detail {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Rows with zero right-hand side whose remaining coefficients share one sign
/// force all their variables to zero. Repeated to a fixpoint.
template <Scalar T>
struct Presolve {
  struct Elimination {
    std::size_t row;
    int sign;
    std::vector<std::size_t> vars;
  };

  std::vector<char> fixed;
  std::vector<char> row_gone;
  std::vector<Elimination> eliminated;
  std::optional<std::size_t> infeasible_row;

  Presolve(const LinearProgram<T>& lp, const SolveOptions& opt)
      : fixed(lp.num_vars(), 0), row_gone(lp.num_rows(), 0) {
    bool changed = true;
    while (changed && !infeasible_row) {
      changed = false;
      for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        if (row_gone[i]) continue;
        const auto& row = lp.equalities()[i];
        bool pos = false, neg = false;
        std::vector<std::size_t> active;
        for (const auto& [j, a] : row.coeffs) {
          if (fixed[j]) continue;
          active.push_back(j);
          (a > 0 ? pos : neg) = true;
        }
        if (active.empty()) {
          bool nonzero;
          if constexpr (is_exact_v<T>) nonzero = row.rhs != 0;
          else nonzero = std::fabs(row.rhs) > opt.feas_tol;
          if (nonzero) {
            infeasible_row = i;
            return;
          }
          row_gone[i] = 1;
          changed = true;
        } else if (row.rhs == 0 && !(pos && neg)) {
          for (std::size_t j : active) fixed[j] = 1;
          row_gone[i] = 1;
          eliminated.push_back({i, pos ? 1 : -1, std::move(active)});
          changed = true;
        }
      }
    }
  }

  /// Assigns multipliers to eliminated rows so that every fixed variable
  /// satisfies (A^T y)_j >= c_j (dual) or (A^T y)_j <= 0 (Farkas). Rows are
  /// processed in reverse elimination order; a row never touches variables
  /// fixed after it.
  void complete_multipliers(const LinearProgram<T>& lp, std::vector<T>& y, bool farkas) const {
    auto aty = column_activity(lp, y);
    auto c = lp.objective_dense();
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) {
      const auto& row = lp.equalities()[it->row];
      T t = 0;
      bool first = true;
      for (const auto& [j, a] : row.coeffs) {
        if (std::find(it->vars.begin(), it->vars.end(), j) == it->vars.end()) continue;
        T mag = a * it->sign;
        T need = farkas ? T(-aty[j] / mag) : T((c[j] - aty[j]) / mag);
        if (first || (farkas ? need < t : need > t)) t = need;
        first = false;
      }
      if (farkas ? t > 0 : t < 0) t = 0;
      T yi = t * it->sign;
      y[it->row] = yi;
      for (const auto& [j, a] : row.coeffs) aty[j] += a * yi;
    }
  }
};

/// Dense two-phase tableau simplex on  max c^T x, A x = b, x >= 0.
/// Columns [0, n) are structural, [n, n + m) artificial, the last holds b.
template <Scalar T>
class Tableau {
 public:
  enum class Outcome { optimal, infeasible, unbounded, unstable };

  Tableau(std::size_t m, std::size_t n, const std::vector<SparseRow<T>>& rows, const std::vector<T>& b,
          const std::vector<T>& c, const SolveOptions& opt)
      : m_(m), n_(n), width_(n + m + 1), opt_(opt), rows_(rows), c_(c), sign_(m, 1),
        data_(m * (n + m + 1), T(0)), cost_(n + m, T(0)), basis_(m) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (b[i] < 0) sign_[i] = -1;
      for (const auto& [j, a] : rows[i]) at(i, j) = a * sign_[i];
      at(i, n_ + i) = 1;
      rhs(i) = b[i] * sign_[i];
      b_signed_.push_back(rhs(i));
      basis_[i] = n_ + i;
    }
  }

  Outcome solve() {
    // Phase 1: maximize -sum(artificials).
    for (std::size_t j = 0; j < n_; ++j) {
      T s = 0;
      for (std::size_t i = 0; i < m_; ++i) s += at(i, j);
      cost_[j] = s;
    }
    std::size_t unbounded_col = npos;
    if (run(unbounded_col) == Outcome::unstable) return Outcome::unstable;
    phase1_pivots_ = pivots_;

    // Float: residual artificial mass below infeas_tol is rounding noise; the
    // final refactorization re-checks primal feasibility of the basis.
    T infeas = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_ && rhs(i) > infeas) infeas = rhs(i);
    bool infeasible;
    if constexpr (is_exact_v<T>) infeasible = infeas > 0;
    else infeasible = infeas > opt_.infeas_tol;
    if (infeasible) {
      if constexpr (!is_exact_v<T>) message_ = "phase 1 residual " + std::to_string(infeas);
      farkas_.assign(m_, T(0));
      for (std::size_t i = 0; i < m_; ++i) farkas_[i] = T(1 + cost_[n_ + i]) * sign_[i];
      return Outcome::infeasible;
    }

    drive_out_artificials();

    // Phase 2.
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      T s = j < n_ ? c_[j] : T(0);
      for (std::size_t i = 0; i < m_; ++i) {
        std::size_t bj = basis_[i];
        if (bj < n_ && c_[bj] != 0) s -= c_[bj] * at(i, j);
      }
      cost_[j] = s;
    }
    auto out = run(unbounded_col);
    if (out == Outcome::unstable) return out;
    extract_primal();
    if (unbounded_col != npos) {
      ray_.assign(n_, T(0));
      ray_[unbounded_col] = 1;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] < n_) ray_[basis_[i]] = -at(i, unbounded_col);
      return Outcome::unbounded;
    }
    dual_.assign(m_, T(0));
    for (std::size_t i = 0; i < m_; ++i) dual_[i] = T(-cost_[n_ + i]) * sign_[i];
    if constexpr (!is_exact_v<T>) {
      if (!refine()) return Outcome::unstable;
    }
    return Outcome::optimal;
  }

  const std::vector<T>& primal() const { return x_; }
  const std::vector<T>& dual() const { return dual_; }
  const std::vector<T>& farkas() const { return farkas_; }
  const std::vector<T>& ray() const { return ray_; }
  std::size_t pivots() const { return pivots_; }
  std::size_t phase1_pivots() const { return phase1_pivots_; }
  const std::string& message() const { return message_; }

 private:
  T& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  T& rhs(std::size_t i) { return data_[i * width_ + width_ - 1]; }

  bool positive_cost(const T& d) const {
    if constexpr (is_exact_v<T>) return sgn(d) > 0;
    else return d > opt_.opt_tol;
  }
  bool admissible_pivot(const T& a) const {
    if constexpr (is_exact_v<T>) return sgn(a) > 0;
    else return a > opt_.pivot_tol;
  }

  Outcome run(std::size_t& unbounded_col) {
    // Under Dantzig pricing, Bland's rule takes over after a run of degenerate
    // pivots until the objective moves again. Bland cannot cycle inside a
    // degenerate run and every nondegenerate pivot strictly improves, so this
    // terminates.
    const bool always_bland =
        opt_.pricing == Pricing::bland || (opt_.pricing == Pricing::automatic && is_exact_v<T>);
    bool bland = always_bland;
    std::size_t stall = 0;
    for (;;) {
      if (pivots_ >= opt_.max_pivots) {
        message_ = "pivot limit reached";
        return Outcome::unstable;
      }
      std::size_t e = npos;
      if (bland) {
        for (std::size_t j = 0; j < n_; ++j)
          if (positive_cost(cost_[j])) {
            e = j;
            break;
          }
      } else {
        T best = 0;
        for (std::size_t j = 0; j < n_; ++j)
          if (positive_cost(cost_[j]) && (e == npos || cost_[j] > best)) {
            best = cost_[j];
            e = j;
          }
      }
      if (e == npos) return Outcome::optimal;

      std::size_t r = npos;
      T best_ratio = 0;
      if constexpr (is_exact_v<T>) {
        for (std::size_t i = 0; i < m_; ++i) {
          const T& a = at(i, e);
          if (sgn(a) <= 0) continue;
          T ratio = rhs(i) / a;
          if (r == npos || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[r])) {
            r = i;
            best_ratio = ratio;
          }
        }
      } else {
        // Harris two-pass ratio test: bound the step with a relaxed ratio, then
        // pick the largest pivot (or lowest basic index in Bland mode) under it.
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, e);
          if (a > opt_.pivot_tol) theta = std::min(theta, (std::max(rhs(i), 0.0) + opt_.harris_tol) / a);
        }
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, e);
          if (a <= opt_.pivot_tol) continue;
          const double ratio = std::max(rhs(i), 0.0) / a;
          if (ratio > theta) continue;
          bool better = r == npos || (bland ? basis_[i] < basis_[r] : a > at(r, e));
          if (better) {
            r = i;
            best_ratio = ratio;
          }
        }
      }
      if (r == npos) {
        unbounded_col = e;
        return Outcome::optimal;
      }
      bool degenerate;
      if constexpr (is_exact_v<T>) degenerate = sgn(best_ratio) == 0;
      else degenerate = best_ratio <= 1e-12;
      if (degenerate) {
        if (++stall > opt_.stall_limit) bland = true;
      } else {
        stall = 0;
        bland = always_bland;
      }
      pivot(r, e);
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    ++pivots_;
    const T piv = at(r, e);
    nz_.clear();
    for (std::size_t k = 0; k < width_; ++k) {
      T& x = at(r, k);
      if (x == 0) continue;
      if (k == e) continue;
      x /= piv;
      if constexpr (!is_exact_v<T>) {
        if (std::fabs(x) < opt_.drop_tol) {
          x = 0;
          continue;
        }
      }
      nz_.push_back(k);
    }
    at(r, e) = 1;
    if constexpr (!is_exact_v<T>) {
      if (rhs(r) < 0) rhs(r) = 0;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      T& fe = at(i, e);
      if (fe == 0) continue;
      const T f = fe;
      T* row = &data_[i * width_];
      const T* prow = &data_[r * width_];
      for (std::size_t k : nz_) {
        row[k] -= f * prow[k];
        if constexpr (!is_exact_v<T>) {
          if (std::fabs(row[k]) < opt_.drop_tol) row[k] = 0;
        }
      }
      fe = 0;
      if constexpr (!is_exact_v<T>) {
        T& b = rhs(i);
        if (b < 0) b = 0;
      }
    }
    if (cost_[e] != 0) {
      const T f = cost_[e];
      const T* prow = &data_[r * width_];
      for (std::size_t k : nz_)
        if (k < n_ + m_) cost_[k] -= f * prow[k];
      cost_[e] = 0;
    }
    basis_[r] = e;
  }

  /// Replaces zero-level basic artificials by structural columns. Rows with
  /// no structural entry are redundant; their artificial stays basic at 0
  /// and no later pivot touches them.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t best = npos;
      for (std::size_t j = 0; j < n_; ++j) {
        const T& a = at(i, j);
        if constexpr (is_exact_v<T>) {
          if (a != 0) {
            best = j;
            break;
          }
        } else {
          if (std::fabs(a) > opt_.pivot_tol && (best == npos || std::fabs(a) > std::fabs(at(i, best))))
            best = j;
        }
      }
      if (best != npos) pivot(i, best);
    }
  }

  void extract_primal() {
    x_.assign(n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x_[basis_[i]] = rhs(i);
  }

  /// Float only: recompute primal and dual values from a fresh LU of the
  /// final basis, then re-check feasibility and optimality.
  bool refine() {
    if (m_ == 0) return true;
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    std::vector<std::size_t> pos(n_, npos);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) pos[basis_[i]] = i;
    Mat B = Mat::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    Vec b(static_cast<Eigen::Index>(m_)), cb = Vec::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (const auto& [j, a] : rows_[i])
        if (pos[j] != npos) B(ii, static_cast<Eigen::Index>(pos[j])) = a * sign_[i];
      if (basis_[i] >= n_) B(static_cast<Eigen::Index>(basis_[i] - n_), ii) = 1;
      b(ii) = b_signed_[i];
      if (basis_[i] < n_) cb(ii) = c_[basis_[i]];
    }
    Eigen::PartialPivLU<Mat> lu(B);
    Vec xb = lu.solve(b);
    Vec w = lu.transpose().solve(cb);
    if (!xb.allFinite() || !w.allFinite()) {
      message_ = "basis refactorization failed";
      return false;
    }
    const double scale = 1.0 + xb.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < m_; ++i) {
      double xi = xb(static_cast<Eigen::Index>(i));
      if (xi < -opt_.feas_tol * scale) {
        message_ = "refined basis is primal infeasible";
        return false;
      }
      if (basis_[i] < n_) x_[basis_[i]] = std::max(0.0, xi);
    }
    std::vector<double> aty(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& [j, a] : rows_[i]) aty[j] += a * sign_[i] * w(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n_; ++j) {
      if (c_[j] - aty[j] > 10 * opt_.opt_tol) {
        message_ = "refined basis is not dual feasible";
        return false;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) dual_[i] = w(static_cast<Eigen::Index>(i)) * sign_[i];
    return true;
  }

 private:
  std::size_t m_, n_, width_;
  SolveOptions opt_;
  const std::vector<SparseRow<T>>& rows_;
  std::vector<T> c_;
  std::vector<int> sign_;
  std::vector<T> data_;
  std::vector<T> cost_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
  std::vector<T> b_signed_;
  std::vector<T> x_, dual_, farkas_, ray_;
  std::size_t pivots_ = 0;
  std::size_t phase1_pivots_ = 0;
  std::string message_;
};

}  // namespace detail

/// Two-phase dense tableau simplex. Exact problems pivot on rationals; float
/// problems use a Harris ratio test and finish with an LU refactorization of
/// the optimal basis. A float solve
/// that cannot certify its basis reports numerically_unstable.
template <Scalar T>
LpSolution<T> solve_lp(const LinearProgram<T>& lp, const SolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](LpSolution<T>& s) {
    s.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  const std::size_t n = lp.num_vars(), m = lp.num_rows();
  detail::Presolve<T> pre(lp, opt);
  LpSolution<T> sol;
  for (char f : pre.fixed) sol.stats.presolved_vars += static_cast<std::size_t>(f);
  for (char g : pre.row_gone) sol.stats.presolved_rows += static_cast<std::size_t>(g);

  if (pre.infeasible_row) {
    sol.status = LpStatus::infeasible;
    sol.farkas.assign(m, T(0));
    sol.farkas[*pre.infeasible_row] = lp.equalities()[*pre.infeasible_row].rhs > 0 ? T(1) : T(-1);
    pre.complete_multipliers(lp, sol.farkas, true);
    finish(sol);
    return sol;
  }

  std::vector<std::size_t> col_of(n, detail::npos), var_of, row_of;
  for (std::size_t j = 0; j < n; ++j)
    if (!pre.fixed[j]) {
      col_of[j] = var_of.size();
      var_of.push_back(j);
    }
  std::vector<SparseRow<T>> rows;
  std::vector<T> b;
  for (std::size_t i = 0; i < m; ++i) {
    if (pre.row_gone[i]) continue;
    row_of.push_back(i);
    SparseRow<T> r;
    for (const auto& [j, a] : lp.equalities()[i].coeffs)
      if (col_of[j] != detail::npos) r.emplace_back(col_of[j], a);
    rows.push_back(std::move(r));
    b.push_back(lp.equalities()[i].rhs);
  }
  std::vector<T> c(var_of.size(), T(0));
  for (const auto& [j, a] : lp.objective())
    if (col_of[j] != detail::npos) c[col_of[j]] = a;
  sol.stats.rows = rows.size();
  sol.stats.cols = var_of.size();

  detail::Tableau<T> tab(rows.size(), var_of.size(), rows, b, c, opt);
  auto outcome = tab.solve();
  sol.stats.pivots = tab.pivots();
  sol.stats.phase1_pivots = tab.phase1_pivots();
  sol.message = tab.message();

  auto expand_primal = [&](const std::vector<T>& xc) {
    std::vector<T> x(n, T(0));
    for (std::size_t k = 0; k < xc.size(); ++k) x[var_of[k]] = xc[k];
    return x;
  };
  auto expand_rows = [&](const std::vector<T>& yc) {
    std::vector<T> y(m, T(0));
    for (std::size_t k = 0; k < yc.size(); ++k) y[row_of[k]] = yc[k];
    return y;
  };

  using Outcome = typename detail::Tableau<T>::Outcome;
  switch (outcome) {
    case Outcome::unstable:
      sol.status = LpStatus::numerically_unstable;
      break;
    case Outcome::infeasible:
      sol.status = LpStatus::infeasible;
      sol.farkas = expand_rows(tab.farkas());
      pre.complete_multipliers(lp, sol.farkas, true);
      if constexpr (!is_exact_v<T>) {
        if (auto check = verify_certificate(lp, sol); !check) {
          sol.status = LpStatus::numerically_unstable;
          sol.message = "unverifiable Farkas ray: " + check.failure;
        }
      }
      break;
    case Outcome::unbounded:
      sol.status = LpStatus::unbounded;
      sol.primal = expand_primal(tab.primal());
      sol.ray = expand_primal(tab.ray());
      sol.objective_value = detail::dot(lp.objective(), sol.primal);
      break;
    case Outcome::optimal:
      sol.status = LpStatus::optimal;
      sol.primal = expand_primal(tab.primal());
      sol.objective_value = detail::dot(lp.objective(), sol.primal);
      sol.dual = expand_rows(tab.dual());
      pre.complete_multipliers(lp, sol.dual, false);
      break;
  }
  finish(sol);
  return sol;
}

}  // namespace gnst
