#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gnst/behavior.hpp"
#include "gnst/hardy.hpp"
#include "gnst/lp.hpp"
#include "gnst/simplex.hpp"

namespace gnst {

// Hybrid-local membership for three parties.
//
// A bipartition here always has a single party on one side. A convex
// combination of Q (x) R, with R any single-party behavior, is the same set as
// the convex hull of Q (x) V with V deterministic, so the LP carries one
// free subnormalized two-party block per (singleton party, deterministic
// strategy) and no vertex enumeration of the two-party polytope is needed.

enum class LocalityNotion { ns2, svetlichny };

inline std::string_view notion_name(LocalityNotion n) { return n == LocalityNotion::ns2 ? "ns2" : "svetlichny"; }

struct Bipartition {
  std::vector<int> group;       // 0-based, ascending
  std::vector<int> complement;  // the singleton side

  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

/// Three-party bipartition with `singleton` alone on one side.
inline Bipartition singleton_cut(int singleton) {
  Bipartition b;
  for (int p = 0; p < 3; ++p)
    if (p != singleton) b.group.push_back(p);
  b.complement = {singleton};
  return b;
}

/// Deterministic single-party strategy: outcome under u and under v (1-based).
using LocalStrategy = std::array<int, 2>;

template <Scalar T>
struct DecompositionComponent {
  Bipartition cut;
  T weight{};
  Behavior<T> group_behavior;  // two-party table over cut.group, normalized
  LocalStrategy singleton_strategy{};
};

template <Scalar T>
struct Decomposition {
  std::vector<DecompositionComponent<T>> components;
};

/// Linear functional over table cells. `bound` is its maximum over the local
/// set; `value` its value on the tested behavior.
template <Scalar T>
struct Witness {
  std::vector<T> coefficients;
  T bound{};
  T value{};
};

enum class LocalityStatus { local, genuinely_nonlocal };

inline std::string_view locality_status_name(LocalityStatus s) {
  return s == LocalityStatus::local ? "local" : "genuinely_nonlocal";
}

template <Scalar T>
struct Verdict {
  LocalityNotion notion = LocalityNotion::ns2;
  LocalityStatus status = LocalityStatus::local;
  std::optional<Decomposition<T>> decomposition;
  std::optional<Witness<T>> witness;
  SolverStats stats;
};

namespace detail {

inline void require_tripartite(const Scenario& sc) {
  if (sc.num_parties() != 3)
    throw ScopeError(
        "hybrid-local membership is implemented for three parties only; with four or more parties "
        "some bipartitions have two parties on each side, whose no-signaling polytope vertices are not "
        "enumerated here, so no verdict is given");
}

/// Layout of the block variables: singleton p, strategy (ou, ov), then a
/// two-party cell indexed (s_a, s_b, o_a, o_b) with the lower party first.
class HybridLayout {
 public:
  explicit HybridLayout(const Scenario& sc) : sc_(sc) {
    std::size_t off = 0;
    for (int p = 0; p < 3; ++p) {
      auto [a, b] = pair_of(p);
      const auto dp = static_cast<std::size_t>(sc.outcomes(p));
      block_[p] = 4 * static_cast<std::size_t>(sc.outcomes(a) * sc.outcomes(b));
      offset_[p] = off;
      off += dp * dp * block_[p];
    }
    total_ = off;
  }

  static std::pair<int, int> pair_of(int p) {
    if (p == 0) return {1, 2};
    if (p == 1) return {0, 2};
    return {0, 1};
  }

  std::size_t num_vars() const { return total_; }
  std::size_t block_size(int p) const { return block_[p]; }
  std::size_t strategies(int p) const {
    auto d = static_cast<std::size_t>(sc_.outcomes(p));
    return d * d;
  }
  std::size_t block_start(int p, std::size_t strategy) const { return offset_[p] + strategy * block_[p]; }

  LocalStrategy strategy(int p, std::size_t idx) const {
    auto d = static_cast<std::size_t>(sc_.outcomes(p));
    return {static_cast<int>(idx / d) + 1, static_cast<int>(idx % d) + 1};
  }

  /// Offset of a two-party cell inside a block.
  std::size_t block_cell(int p, int sa, int sb, int oa, int ob) const {
    auto [a, b] = pair_of(p);
    const auto da = static_cast<std::size_t>(sc_.outcomes(a)), db = static_cast<std::size_t>(sc_.outcomes(b));
    return static_cast<std::size_t>(2 * sa + sb) * da * db + static_cast<std::size_t>(oa - 1) * db +
           static_cast<std::size_t>(ob - 1);
  }

  /// Every block variable that contributes to the given table cell.
  std::vector<std::size_t> vars_for_cell(std::size_t flat) const {
    const auto c = flat / sc_.cells_per_context(), k = flat % sc_.cells_per_context();
    auto s = sc_.settings_at(c).settings;
    auto o = sc_.outcomes_at(k).outcomes;
    std::vector<std::size_t> out;
    for (int p = 0; p < 3; ++p) {
      auto [a, b] = pair_of(p);
      const int dp = sc_.outcomes(p);
      const std::size_t cell = block_cell(p, s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)],
                                          o[static_cast<std::size_t>(a)], o[static_cast<std::size_t>(b)]);
      for (int w = 1; w <= dp; ++w) {
        int ou = s[static_cast<std::size_t>(p)] == 0 ? o[static_cast<std::size_t>(p)] : w;
        int ov = s[static_cast<std::size_t>(p)] == 1 ? o[static_cast<std::size_t>(p)] : w;
        std::size_t strat = static_cast<std::size_t>((ou - 1) * dp + (ov - 1));
        out.push_back(block_start(p, strat) + cell);
      }
    }
    return out;
  }

  const Scenario& scenario() const { return sc_; }

 private:
  Scenario sc_;
  std::array<std::size_t, 3> offset_{};
  std::array<std::size_t, 3> block_{};
  std::size_t total_ = 0;
};

/// Internal no-signaling rows of every block, then the total-mass row.
/// Returns the index of the mass row.
template <Scalar T>
std::size_t add_block_constraints(const HybridLayout& lay, LinearProgram<T>& lp) {
  const Scenario& sc = lay.scenario();
  for (int p = 0; p < 3; ++p) {
    auto [a, b] = HybridLayout::pair_of(p);
    const int da = sc.outcomes(a), db = sc.outcomes(b);
    for (std::size_t st = 0; st < lay.strategies(p); ++st) {
      const std::size_t base = lay.block_start(p, st);
      // a's marginal must not depend on s_b.
      for (int sa = 0; sa < 2; ++sa)
        for (int oa = 1; oa <= da; ++oa) {
          SparseRow<T> row;
          for (int ob = 1; ob <= db; ++ob) {
            row.emplace_back(base + lay.block_cell(p, sa, 0, oa, ob), T(1));
            row.emplace_back(base + lay.block_cell(p, sa, 1, oa, ob), T(-1));
          }
          lp.add_equality(std::move(row), T(0));
        }
      // b's marginal must not depend on s_a.
      for (int sb = 0; sb < 2; ++sb)
        for (int ob = 1; ob <= db; ++ob) {
          SparseRow<T> row;
          for (int oa = 1; oa <= da; ++oa) {
            row.emplace_back(base + lay.block_cell(p, 0, sb, oa, ob), T(1));
            row.emplace_back(base + lay.block_cell(p, 1, sb, oa, ob), T(-1));
          }
          lp.add_equality(std::move(row), T(0));
        }
    }
  }
  SparseRow<T> mass;
  for (int p = 0; p < 3; ++p) {
    auto [a, b] = HybridLayout::pair_of(p);
    const int da = sc.outcomes(a), db = sc.outcomes(b);
    for (std::size_t st = 0; st < lay.strategies(p); ++st)
      for (int oa = 1; oa <= da; ++oa)
        for (int ob = 1; ob <= db; ++ob) mass.emplace_back(lay.block_start(p, st) + lay.block_cell(p, 0, 0, oa, ob), T(1));
  }
  return lp.add_equality(std::move(mass), T(1));
}

/// Two-party table of the pair left over when `singleton` is removed,
/// given as a flat block (s_a, s_b, o_a, o_b).
template <Scalar T>
Behavior<T> pair_behavior(const Scenario& sc, int singleton, const std::vector<T>& block) {
  auto [a, b] = HybridLayout::pair_of(singleton);
  return Behavior<T>(Scenario({sc.outcomes(a), sc.outcomes(b)}), block);
}

template <Scalar T>
Witness<T> witness_from_farkas(const Behavior<T>& target, const std::vector<T>& farkas, std::size_t mass_row) {
  Witness<T> w;
  const std::size_t cells = target.scenario().table_size();
  w.coefficients.assign(farkas.begin(), farkas.begin() + static_cast<std::ptrdiff_t>(cells));
  w.bound = -farkas[mass_row];
  T v = 0;
  for (std::size_t k = 0; k < cells; ++k) v += w.coefficients[k] * target[k];
  w.value = v;
  return w;
}

template <Scalar T>
void require_no_signaling(const Behavior<T>& b) {
  auto rep = validate_behavior(b);
  if (!rep.ok())
    throw InputError("behavior is not a normalized no-signaling table (first violation: " +
                     rep.violations.front().constraint + ")");
}

}  // namespace detail

/// Q (x) V summed over components, as a full three-party table.
template <Scalar T>
Behavior<T> reconstruct(const Scenario& sc, const Decomposition<T>& dec) {
  std::vector<T> table(sc.table_size(), T(0));
  for (const auto& comp : dec.components) {
    const int p = comp.cut.complement.at(0);
    auto [a, b] = detail::HybridLayout::pair_of(p);
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
      auto s = sc.settings_at(flat / sc.cells_per_context()).settings;
      auto o = sc.outcomes_at(flat % sc.cells_per_context()).outcomes;
      const auto up = static_cast<std::size_t>(p);
      if (o[up] != comp.singleton_strategy[static_cast<std::size_t>(s[up])]) continue;
      const Scenario& gs = comp.group_behavior.scenario();
      SettingAssignment gs_s{{s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]}};
      OutcomeAssignment gs_o{{o[static_cast<std::size_t>(a)], o[static_cast<std::size_t>(b)]}};
      table[flat] += comp.weight * comp.group_behavior[event_index(gs, gs_s, gs_o)];
    }
  }
  return Behavior<T>(sc, std::move(table));
}

/// Re-checks a decomposition from scratch: weights nonnegative and summing
/// to one, each group table normalized (and no-signaling for NS2), and the
/// mixture reproducing the target cellwise (exactly, or within tol).
template <Scalar T>
CertificateCheck verify_decomposition(const Behavior<T>& target, const Decomposition<T>& dec, LocalityNotion notion,
                                      double tol = 1e-8) {
  auto fail = [](std::string why) { return CertificateCheck{false, std::move(why)}; };
  const Scenario& sc = target.scenario();
  if (sc.num_parties() != 3) return fail("decompositions are defined for three parties");
  T total = 0;
  for (const auto& comp : dec.components) {
    if (comp.weight < 0) return fail("negative component weight");
    total += comp.weight;
    if (comp.cut.complement.size() != 1 || comp.cut.group.size() != 2) return fail("bipartition is not 1 vs 2");
    const int p = comp.cut.complement[0];
    auto [a, b] = detail::HybridLayout::pair_of(p);
    if (comp.cut.group != std::vector<int>{a, b}) return fail("bipartition sides are inconsistent");
    if (!(comp.group_behavior.scenario() == Scenario({sc.outcomes(a), sc.outcomes(b)})))
      return fail("group behavior has the wrong scenario");
    for (int s = 0; s < 2; ++s)
      if (comp.singleton_strategy[static_cast<std::size_t>(s)] < 1 ||
          comp.singleton_strategy[static_cast<std::size_t>(s)] > sc.outcomes(p))
        return fail("singleton strategy out of range");
    auto rep = validate_behavior(comp.group_behavior, tol);
    if (!rep.nonneg_ok) return fail("group behavior has a negative entry");
    bool norm_ok, ns_ok;
    if constexpr (is_exact_v<T>) {
      norm_ok = rep.normalization_residual == 0;
      ns_ok = rep.ns_residual == 0;
    } else {
      norm_ok = rep.normalization_residual <= tol;
      ns_ok = rep.ns_residual <= tol;
    }
    if (!norm_ok) return fail("group behavior is not normalized");
    if (notion == LocalityNotion::ns2 && !ns_ok) return fail("group behavior signals");
  }
  auto close = [&](const T& x, const T& y) {
    if constexpr (is_exact_v<T>) return x == y;
    else return std::fabs(x - y) <= tol;
  };
  if (!close(total, T(1))) return fail("weights do not sum to one");
  auto rec = reconstruct(sc, dec);
  for (std::size_t k = 0; k < sc.table_size(); ++k)
    if (!close(rec[k], target[k])) return fail("reconstruction differs at cell " + std::to_string(k));
  return {};
}

/// NS2 (bipartite no-signaling hybrid) membership for three parties.
template <Scalar T>
Verdict<T> ns2_membership(const Behavior<T>& b, const SolveOptions& opt = {}) {
  const Scenario& sc = b.scenario();
  detail::require_tripartite(sc);
  detail::require_no_signaling(b);
  detail::HybridLayout lay(sc);
  LinearProgram<T> lp(lay.num_vars());
  for (std::size_t flat = 0; flat < sc.table_size(); ++flat) {
    SparseRow<T> row;
    for (std::size_t v : lay.vars_for_cell(flat)) row.emplace_back(v, T(1));
    lp.add_equality(std::move(row), b[flat]);
  }
  const std::size_t mass_row = detail::add_block_constraints(lay, lp);
  auto sol = solve_lp(lp, opt);

  Verdict<T> verdict;
  verdict.notion = LocalityNotion::ns2;
  verdict.stats = sol.stats;
  if (auto c = verify_certificate(lp, sol); !c)
    throw SolverError("NS2 membership LP certificate failed: " + c.failure);
  if (sol.status == LpStatus::infeasible) {
    verdict.status = LocalityStatus::genuinely_nonlocal;
    verdict.witness = detail::witness_from_farkas(b, sol.farkas, mass_row);
    return verdict;
  }
  if (sol.status != LpStatus::optimal)
    throw SolverError("NS2 membership LP ended with status " + std::string(status_name(sol.status)));

  Decomposition<T> dec;
  for (int p = 0; p < 3; ++p) {
    for (std::size_t st = 0; st < lay.strategies(p); ++st) {
      const std::size_t base = lay.block_start(p, st);
      std::vector<T> block(sol.primal.begin() + static_cast<std::ptrdiff_t>(base),
                           sol.primal.begin() + static_cast<std::ptrdiff_t>(base + lay.block_size(p)));
      const std::size_t per_ctx = lay.block_size(p) / 4;
      T w = 0;
      for (std::size_t k = 0; k < per_ctx; ++k) w += block[k];
      if constexpr (is_exact_v<T>) {
        if (w == 0) continue;
      } else {
        if (w <= 1e-12) continue;
      }
      for (auto& x : block) x /= w;
      dec.components.push_back({singleton_cut(p), w, detail::pair_behavior(sc, p, block), lay.strategy(p, st)});
    }
  }
  verdict.status = LocalityStatus::local;
  verdict.decomposition = std::move(dec);
  if (auto c = verify_decomposition(b, *verdict.decomposition, LocalityNotion::ns2); !c)
    throw SolverError("NS2 decomposition failed re-verification: " + c.failure);
  return verdict;
}

namespace detail {

inline void require_svetlichny_scope(const Scenario& sc) {
  require_tripartite(sc);
  if (!sc.all_outcomes_equal(2))
    throw ScopeError("Svetlichny membership is implemented for three parties with two outcomes each");
}

/// Deterministic two-party strategy g: joint outcome per joint setting,
/// packed as 4 base-4 digits (digit for context 2*s_a + s_b is 2*(o_a-1) + (o_b-1)).
inline std::array<int, 2> svetlichny_group_outcome(std::size_t g, int sa, int sb) {
  const std::size_t digit = (g >> (2 * static_cast<std::size_t>(2 * sa + sb))) & 3u;
  return {static_cast<int>(digit >> 1) + 1, static_cast<int>(digit & 1u) + 1};
}

/// Cell hit by generator (p, g, V) in context c.
inline std::size_t svetlichny_cell(const Scenario& sc, int p, std::size_t g, std::size_t strat, std::size_t c) {
  auto s = sc.settings_at(c).settings;
  auto [a, b] = HybridLayout::pair_of(p);
  auto og = svetlichny_group_outcome(g, s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
  std::vector<int> o(3);
  o[static_cast<std::size_t>(a)] = og[0];
  o[static_cast<std::size_t>(b)] = og[1];
  o[static_cast<std::size_t>(p)] = s[static_cast<std::size_t>(p)] == 0 ? static_cast<int>(strat / 2) + 1
                                                                        : static_cast<int>(strat % 2) + 1;
  return c * sc.cells_per_context() + sc.outcome_index(OutcomeAssignment{o});
}

inline constexpr std::size_t kSvetlichnyGroupStrategies = 256;

}  // namespace detail

/// Svetlichny (arbitrary-signaling hybrid) membership, three parties with two
/// outcomes each: convex weights over products of deterministic two-party
/// strategies and deterministic singleton strategies, across the three cuts.
template <Scalar T>
Verdict<T> svetlichny_membership(const Behavior<T>& b, const SolveOptions& opt = {}) {
  const Scenario& sc = b.scenario();
  detail::require_svetlichny_scope(sc);
  {
    auto rep = validate_behavior(b);
    if (!rep.nonneg_ok || rep.normalization_residual > (is_exact_v<T> ? 0.0 : 1e-9))
      throw InputError("behavior is not a normalized probability table");
  }
  const std::size_t per_cut = detail::kSvetlichnyGroupStrategies * 4;
  LinearProgram<T> lp(3 * per_cut);
  std::vector<SparseRow<T>> rows(sc.table_size());
  SparseRow<T> mass;
  for (int p = 0; p < 3; ++p)
    for (std::size_t g = 0; g < detail::kSvetlichnyGroupStrategies; ++g)
      for (std::size_t st = 0; st < 4; ++st) {
        const std::size_t var = static_cast<std::size_t>(p) * per_cut + g * 4 + st;
        for (std::size_t c = 0; c < sc.num_contexts(); ++c)
          rows[detail::svetlichny_cell(sc, p, g, st, c)].emplace_back(var, T(1));
        mass.emplace_back(var, T(1));
      }
  for (std::size_t k = 0; k < rows.size(); ++k) lp.add_equality(std::move(rows[k]), b[k]);
  const std::size_t mass_row = lp.add_equality(std::move(mass), T(1));
  // Wide and highly degenerate: Dantzig pricing needs far fewer pivots here.
  SolveOptions wide = opt;
  if (wide.pricing == Pricing::automatic) wide.pricing = Pricing::dantzig;
  auto sol = solve_lp(lp, wide);

  Verdict<T> verdict;
  verdict.notion = LocalityNotion::svetlichny;
  verdict.stats = sol.stats;
  if (auto c = verify_certificate(lp, sol); !c)
    throw SolverError("Svetlichny membership LP certificate failed: " + c.failure);
  if (sol.status == LpStatus::infeasible) {
    verdict.status = LocalityStatus::genuinely_nonlocal;
    verdict.witness = detail::witness_from_farkas(b, sol.farkas, mass_row);
    return verdict;
  }
  if (sol.status != LpStatus::optimal)
    throw SolverError("Svetlichny membership LP ended with status " + std::string(status_name(sol.status)));

  Decomposition<T> dec;
  for (std::size_t var = 0; var < lp.num_vars(); ++var) {
    const T& w = sol.primal[var];
    if constexpr (is_exact_v<T>) {
      if (w == 0) continue;
    } else {
      if (w <= 1e-12) continue;
    }
    const int p = static_cast<int>(var / per_cut);
    const std::size_t g = (var % per_cut) / 4, st = var % 4;
    std::vector<T> block(16, T(0));
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb) {
        auto og = detail::svetlichny_group_outcome(g, sa, sb);
        block[static_cast<std::size_t>(2 * sa + sb) * 4 + static_cast<std::size_t>((og[0] - 1) * 2 + (og[1] - 1))] = 1;
      }
    dec.components.push_back({singleton_cut(p), w, detail::pair_behavior(sc, p, block),
                              LocalStrategy{static_cast<int>(st / 2) + 1, static_cast<int>(st % 2) + 1}});
  }
  verdict.status = LocalityStatus::local;
  verdict.decomposition = std::move(dec);
  if (auto c = verify_decomposition(b, *verdict.decomposition, LocalityNotion::svetlichny); !c)
    throw SolverError("Svetlichny decomposition failed re-verification: " + c.failure);
  return verdict;
}

/// Checks that a witness separates: value > bound, and no generator of the
/// local set exceeds the bound. For NS2 the generator check solves, for every
/// cut and singleton strategy, the small LP maximizing the functional over
/// all normalized no-signaling two-party tables, and additionally evaluates
/// `samples` random deterministic two-party products. For Svetlichny all
/// 3072 deterministic generators are enumerated.
template <Scalar T>
CertificateCheck check_witness(const Behavior<T>& b, const Witness<T>& w, LocalityNotion notion,
                               std::size_t samples = 200, unsigned seed = 7) {
  auto fail = [](std::string why) { return CertificateCheck{false, std::move(why)}; };
  const Scenario& sc = b.scenario();
  if (w.coefficients.size() != sc.table_size()) return fail("witness has wrong length");
  T value = 0;
  for (std::size_t k = 0; k < sc.table_size(); ++k) value += w.coefficients[k] * b[k];
  if (value != w.value && abs_value(T(value - w.value)) > T(is_exact_v<T> ? 0.0 : 1e-9))
    return fail("witness value does not match the behavior");
  const T margin = is_exact_v<T> ? T(0) : T(1e-9);
  if (!(value > w.bound + margin)) return fail("witness does not separate: value <= bound");

  if (notion == LocalityNotion::svetlichny) {
    detail::require_svetlichny_scope(sc);
    for (int p = 0; p < 3; ++p)
      for (std::size_t g = 0; g < detail::kSvetlichnyGroupStrategies; ++g)
        for (std::size_t st = 0; st < 4; ++st) {
          T f = 0;
          for (std::size_t c = 0; c < sc.num_contexts(); ++c) f += w.coefficients[detail::svetlichny_cell(sc, p, g, st, c)];
          if (f > w.bound + margin) return fail("a Svetlichny generator exceeds the witness bound");
        }
    return {};
  }

  detail::require_tripartite(sc);
  detail::HybridLayout lay(sc);
  // Coefficient of each block cell for strategy st of singleton p.
  auto block_objective = [&](int p, std::size_t st) {
    std::vector<T> obj(lay.block_size(p), T(0));
    const std::size_t base = lay.block_start(p, st);
    for (std::size_t flat = 0; flat < sc.table_size(); ++flat)
      for (std::size_t v : lay.vars_for_cell(flat))
        if (v >= base && v < base + lay.block_size(p)) obj[v - base] += w.coefficients[flat];
    return obj;
  };

  std::mt19937 rng(seed);
  for (int p = 0; p < 3; ++p) {
    auto [a, bb] = detail::HybridLayout::pair_of(p);
    const int da = sc.outcomes(a), db = sc.outcomes(bb);
    for (std::size_t st = 0; st < lay.strategies(p); ++st) {
      auto obj = block_objective(p, st);
      // Exact maximum over normalized no-signaling two-party tables.
      Scenario pair({da, db});
      LinearProgram<T> lp(pair.table_size());
      SparseRow<T> objective;
      for (std::size_t k = 0; k < obj.size(); ++k) objective.emplace_back(k, obj[k]);
      lp.set_objective(std::move(objective));
      for (std::size_t c = 0; c < 4; ++c) {
        SparseRow<T> norm;
        for (std::size_t k = 0; k < pair.cells_per_context(); ++k) norm.emplace_back(c * pair.cells_per_context() + k, T(1));
        lp.add_equality(std::move(norm), T(1));
      }
      for (int side = 0; side < 2; ++side) {
        const std::size_t bit = pair.context_bit(side == 0 ? 1 : 0);
        const int keep = side;  // party whose marginal is fixed
        for (std::size_t c = 0; c < 4; ++c) {
          if (c & bit) continue;
          for (int ok = 1; ok <= pair.outcomes(keep); ++ok) {
            SparseRow<T> row;
            for (std::size_t k = 0; k < pair.cells_per_context(); ++k) {
              if (pair.outcomes_at(k).outcomes[static_cast<std::size_t>(keep)] != ok) continue;
              row.emplace_back(c * pair.cells_per_context() + k, T(1));
              row.emplace_back((c | bit) * pair.cells_per_context() + k, T(-1));
            }
            lp.add_equality(std::move(row), T(0));
          }
        }
      }
      auto sol = solve_lp(lp);
      if (sol.status != LpStatus::optimal || !verify_certificate(lp, sol))
        return fail("generator maximization LP failed");
      if (sol.objective_value > w.bound + margin)
        return fail("a no-signaling generator exceeds the witness bound (cut " + std::to_string(p + 1) + ")");

      // Random deterministic two-party products as a sampled cross-check.
      std::uniform_int_distribution<int> pa(1, da), pb(1, db);
      for (std::size_t t = 0; t < samples / lay.strategies(p) + 1; ++t) {
        std::array<int, 2> ra{pa(rng), pa(rng)}, rb{pb(rng), pb(rng)};
        T f = 0;
        for (int sa = 0; sa < 2; ++sa)
          for (int sb = 0; sb < 2; ++sb)
            f += obj[lay.block_cell(p, sa, sb, ra[static_cast<std::size_t>(sa)], rb[static_cast<std::size_t>(sb)])];
        if (f > w.bound + margin) return fail("a sampled deterministic generator exceeds the witness bound");
      }
    }
  }
  return {};
}

template <Scalar T>
struct ConstrainedMax {
  T q_max{};
  SolverStats stats;
  CertificateCheck certificate;
  T gap{};
};

/// Largest probability of the argument's positive event over NS2-local
/// three-party behaviors that satisfy all of its zero events.
template <Scalar T>
ConstrainedMax<T> constrained_ns2_max(const HardyArgument& arg, const SolveOptions& opt = {}) {
  const Scenario& sc = arg.scenario;
  detail::require_tripartite(sc);
  check_argument(arg);
  detail::HybridLayout lay(sc);
  LinearProgram<T> lp(lay.num_vars());
  detail::add_block_constraints(lay, lp);
  for (const auto& e : arg.zero_events) {
    SparseRow<T> row;
    for (std::size_t v : lay.vars_for_cell(e.index(sc))) row.emplace_back(v, T(1));
    lp.add_equality(std::move(row), T(0));
  }
  SparseRow<T> obj;
  for (std::size_t v : lay.vars_for_cell(arg.positive_event.index(sc))) obj.emplace_back(v, T(1));
  lp.set_objective(std::move(obj));
  auto sol = solve_lp(lp, opt);
  if (sol.status != LpStatus::optimal)
    throw SolverError("constrained NS2 LP ended with status " + std::string(status_name(sol.status)));
  ConstrainedMax<T> out;
  out.certificate = verify_certificate(lp, sol);
  if (!out.certificate) throw SolverError("constrained NS2 certificate failed: " + out.certificate.failure);
  out.q_max = sol.objective_value;
  out.gap = duality_gap(lp, sol);
  out.stats = sol.stats;
  return out;
}

}  // namespace gnst
