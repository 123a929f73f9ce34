#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gnst/scalar.hpp"

namespace gnst {

template <Scalar T>
using SparseRow = std::vector<std::pair<std::size_t, T>>;

/// maximize c^T x  subject to  A x = b,  x >= 0.
template <Scalar T>
class LinearProgram {
 public:
  struct Equality {
    SparseRow<T> coeffs;  // sorted by variable, no duplicates, no zeros
    T rhs{};
  };

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_vars) : num_vars_(num_vars) {}

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<Equality>& equalities() const { return rows_; }
  const SparseRow<T>& objective() const { return objective_; }

  /// Appends a new variable and returns its index.
  std::size_t add_variable() { return num_vars_++; }

  std::size_t add_equality(SparseRow<T> coeffs, T rhs) {
    rows_.push_back({normalize(std::move(coeffs)), std::move(rhs)});
    return rows_.size() - 1;
  }

  void set_objective(SparseRow<T> coeffs) { objective_ = normalize(std::move(coeffs)); }

  /// Dense objective vector of length num_vars.
  std::vector<T> objective_dense() const {
    std::vector<T> c(num_vars_, T(0));
    for (const auto& [j, a] : objective_) c[j] = a;
    return c;
  }

 private:
  SparseRow<T> normalize(SparseRow<T> coeffs) const {
    for (const auto& e : coeffs)
      if (e.first >= num_vars_) throw InputError("LP coefficient refers to variable " + std::to_string(e.first) +
                                                  " beyond num_vars " + std::to_string(num_vars_));
    std::sort(coeffs.begin(), coeffs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseRow<T> out;
    for (auto& e : coeffs) {
      if (!out.empty() && out.back().first == e.first) out.back().second += e.second;
      else out.push_back(std::move(e));
    }
    std::erase_if(out, [](const auto& e) { return e.second == 0; });
    return out;
  }

  std::size_t num_vars_ = 0;
  std::vector<Equality> rows_;
  SparseRow<T> objective_;
};

enum class LpStatus { optimal, infeasible, unbounded, numerically_unstable };

inline std::string_view status_name(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerically_unstable: return "numerically-unstable";
  }
  return "unknown";
}

struct SolverStats {
  std::size_t pivots = 0;
  std::size_t phase1_pivots = 0;
  std::size_t rows = 0;          // after presolve
  std::size_t cols = 0;          // after presolve
  std::size_t presolved_vars = 0;
  std::size_t presolved_rows = 0;
  double wall_ms = 0;
};

template <Scalar T>
struct LpSolution {
  LpStatus status = LpStatus::optimal;
  std::vector<T> primal;     // feasible point (optimal, unbounded)
  T objective_value{};
  std::vector<T> dual;       // one multiplier per equality (optimal)
  std::vector<T> farkas;     // y with y^T A <= 0, y^T b > 0 (infeasible)
  std::vector<T> ray;        // r >= 0, A r = 0, c^T r > 0 (unbounded)
  SolverStats stats;
  std::string message;
};

struct CertificateCheck {
  bool ok = true;
  std::string failure;

  explicit operator bool() const { return ok; }
};

/// Tolerances for float certificates. Exact certificates are checked exactly.
struct CertificateTolerance {
  double residual = 1e-9;
  double gap = 1e-8;
};

namespace detail {

template <Scalar T>
std::vector<T> row_activity(const LinearProgram<T>& lp, const std::vector<T>& x) {
  std::vector<T> ax(lp.num_rows(), T(0));
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    for (const auto& [j, a] : lp.equalities()[i].coeffs) ax[i] += a * x[j];
  return ax;
}

template <Scalar T>
std::vector<T> column_activity(const LinearProgram<T>& lp, const std::vector<T>& y) {
  std::vector<T> aty(lp.num_vars(), T(0));
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    for (const auto& [j, a] : lp.equalities()[i].coeffs) aty[j] += a * y[i];
  return aty;
}

template <Scalar T>
T dot(const SparseRow<T>& c, const std::vector<T>& x) {
  T s = 0;
  for (const auto& [j, a] : c) s += a * x[j];
  return s;
}

}  // namespace detail

/// c^T x - b^T y of an optimal solution.
template <Scalar T>
T duality_gap(const LinearProgram<T>& lp, const LpSolution<T>& sol) {
  T by = 0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) by += lp.equalities()[i].rhs * sol.dual[i];
  return T(detail::dot(lp.objective(), sol.primal) - by);
}

/// Re-checks a solution against the LP from scratch: primal feasibility,
/// objective value, dual feasibility, zero duality gap and complementary
/// slackness for optimal solutions; the Farkas conditions for infeasible
/// ones; a feasible point plus an improving ray for unbounded ones.
template <Scalar T>
CertificateCheck verify_certificate(const LinearProgram<T>& lp, const LpSolution<T>& sol,
                                    CertificateTolerance tol = {}) {
  constexpr bool exact = is_exact_v<T>;
  const T res_tol = exact ? T(0) : T(tol.residual);
  const T gap_tol = exact ? T(0) : T(tol.gap);
  auto fail = [](std::string why) { return CertificateCheck{false, std::move(why)}; };

  auto check_primal = [&](const std::vector<T>& x) -> CertificateCheck {
    if (x.size() != lp.num_vars()) return fail("primal has wrong length");
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] < -res_tol) return fail("primal variable " + std::to_string(j) + " negative");
    auto ax = detail::row_activity(lp, x);
    for (std::size_t i = 0; i < ax.size(); ++i)
      if (abs_value(T(ax[i] - lp.equalities()[i].rhs)) > res_tol)
        return fail("equality " + std::to_string(i) + " residual " +
                    std::to_string(to_double(abs_value(T(ax[i] - lp.equalities()[i].rhs)))));
    return {};
  };

  switch (sol.status) {
    case LpStatus::optimal: {
      if (auto c = check_primal(sol.primal); !c) return c;
      const T cx = detail::dot(lp.objective(), sol.primal);
      if (abs_value(T(cx - sol.objective_value)) > res_tol) return fail("objective value differs from c^T x");
      if (sol.dual.size() != lp.num_rows()) return fail("dual has wrong length");
      auto aty = detail::column_activity(lp, sol.dual);
      auto c = lp.objective_dense();
      for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        T slack = aty[j] - c[j];
        if (slack < -res_tol) return fail("dual infeasible at variable " + std::to_string(j));
        if (abs_value(T(slack * sol.primal[j])) > res_tol)
          return fail("complementary slackness fails at variable " + std::to_string(j));
      }
      T by = 0;
      for (std::size_t i = 0; i < lp.num_rows(); ++i) by += lp.equalities()[i].rhs * sol.dual[i];
      if (abs_value(T(cx - by)) > gap_tol)
        return fail("duality gap " + std::to_string(to_double(abs_value(T(cx - by)))));
      return {};
    }
    case LpStatus::infeasible: {
      if (sol.farkas.size() != lp.num_rows()) return fail("Farkas ray has wrong length");
      auto aty = detail::column_activity(lp, sol.farkas);
      for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (aty[j] > res_tol) return fail("Farkas ray has y^T A > 0 at variable " + std::to_string(j));
      T by = 0;
      for (std::size_t i = 0; i < lp.num_rows(); ++i) by += lp.equalities()[i].rhs * sol.farkas[i];
      if (!(by > res_tol)) return fail("Farkas ray has y^T b <= 0");
      return {};
    }
    case LpStatus::unbounded: {
      if (auto c = check_primal(sol.primal); !c) return c;
      if (sol.ray.size() != lp.num_vars()) return fail("ray has wrong length");
      for (const auto& r : sol.ray)
        if (r < -res_tol) return fail("ray has a negative component");
      auto ar = detail::row_activity(lp, sol.ray);
      for (const auto& a : ar)
        if (abs_value(a) > res_tol) return fail("ray leaves the equality set");
      if (!(detail::dot(lp.objective(), sol.ray) > res_tol)) return fail("ray does not improve the objective");
      return {};
    }
    case LpStatus::numerically_unstable:
      return fail("solver reported numerical breakdown");
  }
  return fail("unknown status");
}

}  // namespace gnst
