#pragma once

#include <chrono>
#include <optional>
#include <cstddef>
#include <string>
#include <vector>

#include "gnst/behavior.hpp"
#include "gnst/hardy.hpp"
#include "gnst/lp.hpp"
#include "gnst/simplex.hpp"
#include "gnst/symmetry.hpp"

namespace gnst {

/// The Hardy success-probability LP over the no-signaling polytope.
///
/// One variable per table cell that is not pinned to zero by the argument.
/// Rows: one normalization row per setting context, then one no-signaling row
/// per (party, settings of the others, outcomes of the others) equating the
/// party's two settings.
template <Scalar T>
struct GnstInstance {
  HardyArgument argument;
  LinearProgram<T> lp;
  std::vector<std::size_t> cell_of_var;
  std::vector<std::size_t> var_of_cell;  // detail::npos for pinned cells
  std::size_t normalization_rows = 0;
  std::size_t ns_rows = 0;

  std::size_t num_cells() const { return var_of_cell.size(); }
  std::size_t num_vars() const { return cell_of_var.size(); }
};

template <Scalar T>
GnstInstance<T> build_gnst_lp(const HardyArgument& arg) {
  check_argument(arg);
  const Scenario& sc = arg.scenario;
  const std::size_t cells = sc.cells_per_context();
  GnstInstance<T> inst;
  inst.argument = arg;
  inst.var_of_cell.assign(sc.table_size(), 0);
  for (const auto& e : arg.zero_events) inst.var_of_cell[e.index(sc)] = detail::npos;
  for (std::size_t k = 0; k < sc.table_size(); ++k) {
    if (inst.var_of_cell[k] == detail::npos) continue;
    inst.var_of_cell[k] = inst.cell_of_var.size();
    inst.cell_of_var.push_back(k);
  }
  inst.lp = LinearProgram<T>(inst.cell_of_var.size());

  auto term = [&](std::size_t cell, int coef, SparseRow<T>& row) {
    std::size_t var = inst.var_of_cell[cell];
    if (var != detail::npos) row.emplace_back(var, T(coef));
  };

  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    SparseRow<T> row;
    for (std::size_t k = 0; k < cells; ++k) term(c * cells + k, 1, row);
    inst.lp.add_equality(std::move(row), T(1));
    ++inst.normalization_rows;
  }

  for (int p = 0; p < sc.num_parties(); ++p) {
    const std::size_t bit = sc.context_bit(p);
    const std::size_t stride = sc.outcome_stride(p);
    const auto dp = static_cast<std::size_t>(sc.outcomes(p));
    for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
      if (c & bit) continue;
      for (std::size_t k = 0; k < cells; ++k) {
        if ((k / stride) % dp != 0) continue;
        SparseRow<T> row;
        for (std::size_t x = 0; x < dp; ++x) {
          term(c * cells + k + x * stride, 1, row);
          term((c | bit) * cells + k + x * stride, -1, row);
        }
        inst.lp.add_equality(std::move(row), T(0));
        ++inst.ns_rows;
      }
    }
  }

  std::size_t q_var = inst.var_of_cell[arg.positive_event.index(sc)];
  inst.lp.set_objective({{q_var, T(1)}});
  return inst;
}

/// Behavior table from an LP point, pinned cells reinstated as zero.
template <Scalar T>
Behavior<T> behavior_from_solution(const GnstInstance<T>& inst, const std::vector<T>& x) {
  std::vector<T> table(inst.num_cells(), T(0));
  for (std::size_t v = 0; v < inst.num_vars(); ++v) table[inst.cell_of_var[v]] = x[v];
  return Behavior<T>(inst.argument.scenario, std::move(table));
}

template <Scalar T>
struct OptimizationResult {
  T q_star{};
  Behavior<T> optimal_behavior;
  SolverStats stats;
  CertificateCheck certificate;
  T gap{};  // duality gap on the full LP
  double wall_ms = 0;
  std::string reduction;  // empty when the full LP was solved
};

inline std::string describe(const HardyArgument& arg) {
  std::string d;
  for (int x : arg.scenario.outcomes()) d += (d.empty() ? "" : ",") + std::to_string(x);
  return std::string(family_name(arg.family)) + " N=" + std::to_string(arg.scenario.num_parties()) + " d=(" + d +
         ") j=" + std::to_string(arg.fixed_j + 1);
}

/// Symmetries of the argument as permutations of the LP's variables.
template <Scalar T>
std::vector<std::vector<std::size_t>> variable_symmetries(const GnstInstance<T>& inst) {
  std::vector<std::vector<std::size_t>> maps;
  for (const auto& g : argument_symmetries(inst.argument)) {
    std::vector<std::size_t> m(inst.num_vars());
    for (std::size_t v = 0; v < inst.num_vars(); ++v) m[v] = inst.var_of_cell[g[inst.cell_of_var[v]]];
    maps.push_back(std::move(m));
  }
  return maps;
}

/// Maximizes the positive event's probability under normalization,
/// no-signaling and the argument's zero constraints. The optimal behavior is
/// rebuilt, revalidated and re-evaluated, and the LP certificate re-checked;
/// any failure throws SolverError.
///
/// With `use_symmetry`, the LP is first solved on orbits of the argument's
/// relabeling symmetries; the lifted primal and dual are then checked against
/// the full LP, and the full LP is solved directly if that check fails.
template <Scalar T>
OptimizationResult<T> optimize_success(const HardyArgument& arg, const SolveOptions& opt = {},
                                       bool use_symmetry = true) {
  const auto t0 = std::chrono::steady_clock::now();
  auto inst = build_gnst_lp<T>(arg);
  std::optional<LpSolution<T>> reduced;
  if (use_symmetry) {
    auto maps = variable_symmetries(inst);
    if (!maps.empty()) reduced = solve_reduced_by_symmetry(inst.lp, maps, opt);
    if (reduced && !verify_certificate(inst.lp, *reduced)) reduced.reset();
  }
  std::string reduction = reduced ? reduced->message : std::string();
  auto sol = reduced ? std::move(*reduced) : solve_lp(inst.lp, opt);
  if (sol.status != LpStatus::optimal)
    throw SolverError("GNST LP for " + describe(arg) + " ended with status " + std::string(status_name(sol.status)) +
                      (sol.message.empty() ? "" : " (" + sol.message + ")"));
  OptimizationResult<T> res;
  res.certificate = verify_certificate(inst.lp, sol);
  if (!res.certificate) throw SolverError("certificate check failed for " + describe(arg) + ": " + res.certificate.failure);
  res.q_star = sol.objective_value;
  res.gap = duality_gap(inst.lp, sol);
  res.optimal_behavior = behavior_from_solution(inst, sol.primal);
  res.stats = sol.stats;
  res.reduction = std::move(reduction);

  auto report = validate_behavior(res.optimal_behavior);
  if (!report.ok()) throw SolverError("optimal behavior fails validation for " + describe(arg));
  auto ev = evaluate_argument(arg, res.optimal_behavior);
  if (ev.q_value != res.q_star || !ev.zero_violations.empty())
    throw SolverError("optimal behavior does not reproduce q* for " + describe(arg));
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Exact arithmetic up to 1500 table cells, float above.
inline Arithmetic default_arithmetic(const Scenario& sc) {
  return sc.table_size() <= 1500 ? Arithmetic::exact : Arithmetic::floating;
}

/// A vertex of the Hardy-feasible region: maximizes `weights` (one per table
/// cell) over behaviors satisfying the argument's constraints with
/// P(positive event) >= q_min.
template <Scalar T>
Behavior<T> sample_hardy_behavior(const HardyArgument& arg, const std::vector<T>& weights, const T& q_min,
                                  const SolveOptions& opt = {}) {
  auto inst = build_gnst_lp<T>(arg);
  if (weights.size() != inst.num_cells()) throw InputError("one weight per table cell required");
  std::size_t q_var = inst.var_of_cell[arg.positive_event.index(arg.scenario)];
  std::size_t slack = inst.lp.add_variable();
  inst.lp.add_equality({{q_var, T(1)}, {slack, T(-1)}}, q_min);
  SparseRow<T> obj;
  for (std::size_t v = 0; v < inst.num_vars(); ++v) obj.emplace_back(v, weights[inst.cell_of_var[v]]);
  inst.lp.set_objective(std::move(obj));
  auto sol = solve_lp(inst.lp, opt);
  if (sol.status != LpStatus::optimal)
    throw SolverError("Hardy-feasible sampling LP ended with status " + std::string(status_name(sol.status)));
  if (auto c = verify_certificate(inst.lp, sol); !c) throw SolverError("sampling certificate failed: " + c.failure);
  sol.primal.pop_back();
  return behavior_from_solution(inst, sol.primal);
}

}  // namespace gnst
