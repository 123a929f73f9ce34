#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <boost/pending/disjoint_sets.hpp>

#include "gnst/hardy.hpp"
#include "gnst/lp.hpp"
#include "gnst/simplex.hpp"

namespace gnst {

/// A relabeling of the table: parties permuted among equal outcome counts,
/// and outcomes permuted independently per party and setting. Every such
/// map sends normalized no-signaling tables to normalized no-signaling
/// tables. image[k] is where cell k goes.
using CellPermutation = std::vector<std::size_t>;

/// outcome_perm[p][s][o-1] is the new outcome (1-based) of party p under setting s.
inline CellPermutation relabel_cells(const Scenario& sc, const std::vector<int>& party_perm,
                                     const std::vector<std::array<std::vector<int>, 2>>& outcome_perm) {
  const auto n = static_cast<std::size_t>(sc.num_parties());
  CellPermutation image(sc.table_size());
  std::vector<int> s2(n), o2(n);
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto s = sc.settings_at(c).settings;
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) {
      auto o = sc.outcomes_at(k).outcomes;
      for (std::size_t p = 0; p < n; ++p) {
        const auto q = static_cast<std::size_t>(party_perm[p]);
        s2[q] = s[p];
        o2[q] = outcome_perm[p][static_cast<std::size_t>(s[p])][static_cast<std::size_t>(o[p] - 1)];
      }
      image[c * sc.cells_per_context() + k] = event_index(sc, SettingAssignment{s2}, OutcomeAssignment{o2});
    }
  }
  return image;
}

/// Transpositions (of equal-d parties, or of two outcomes of one party under
/// one setting) that fix the positive event and map the zero set onto itself.
inline std::vector<CellPermutation> argument_symmetries(const HardyArgument& arg) {
  const Scenario& sc = arg.scenario;
  const auto n = static_cast<std::size_t>(sc.num_parties());
  std::vector<std::array<std::vector<int>, 2>> ident(n);
  for (std::size_t p = 0; p < n; ++p)
    for (auto& v : ident[p]) {
      v.resize(static_cast<std::size_t>(sc.outcomes(static_cast<int>(p))));
      for (std::size_t o = 0; o < v.size(); ++o) v[o] = static_cast<int>(o) + 1;
    }
  std::vector<int> id_party(n);
  for (std::size_t p = 0; p < n; ++p) id_party[p] = static_cast<int>(p);

  std::set<std::size_t> zeros;
  for (const auto& e : arg.zero_events) zeros.insert(e.index(sc));
  const std::size_t pos = arg.positive_event.index(sc);
  auto preserves = [&](const CellPermutation& g) {
    if (g[pos] != pos) return false;
    for (std::size_t z : zeros)
      if (!zeros.count(g[z])) return false;
    return true;
  };

  std::vector<CellPermutation> out;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      if (sc.outcomes(static_cast<int>(p)) != sc.outcomes(static_cast<int>(q))) continue;
      auto perm = id_party;
      std::swap(perm[p], perm[q]);
      auto g = relabel_cells(sc, perm, ident);
      if (preserves(g)) out.push_back(std::move(g));
    }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t d = ident[p][s].size();
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a + 1; b < d; ++b) {
          auto op = ident;
          std::swap(op[p][s][a], op[p][s][b]);
          auto g = relabel_cells(sc, id_party, op);
          if (preserves(g)) out.push_back(std::move(g));
        }
    }
  return out;
}

namespace detail {

/// Union-find partition of 0..size-1 under a set of index maps; returns the
/// compact class id of every element and the number of classes.
inline std::pair<std::vector<std::size_t>, std::size_t> orbits(std::size_t size,
                                                               const std::vector<std::vector<std::size_t>>& maps) {
  std::vector<std::size_t> rank(size), parent(size);
  boost::disjoint_sets<std::size_t*, std::size_t*> ds(rank.data(), parent.data());
  for (std::size_t i = 0; i < size; ++i) ds.make_set(i);
  for (const auto& m : maps)
    for (std::size_t i = 0; i < size; ++i) ds.union_set(i, m[i]);
  std::vector<std::size_t> id(size), compact(size, npos);
  std::size_t count = 0;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = ds.find_set(i);
    if (compact[r] == npos) compact[r] = count++;
    id[i] = compact[r];
  }
  return {id, count};
}

}  // namespace detail

/// Solves a symmetric LP on orbit variables and lifts the result back.
///
/// `var_maps` are permutations of the LP's variables under which the
/// constraint system (as a set of rows) and the objective are invariant;
/// every coefficient and right-hand side must be an integer in {-1, 0, 1}.
/// Variables in one orbit share a value; rows in one orbit collapse to one.
/// The lifted primal is x_j = z_orbit(j) and the lifted dual spreads each
/// orbit multiplier evenly over the orbit's rows, which keeps it dual
/// feasible with the same objective. Returns nullopt when the reduction does
/// not apply or the reduced LP is not optimal; the caller must re-verify the
/// lifted certificate against the original LP.
template <Scalar T>
std::optional<LpSolution<T>> solve_reduced_by_symmetry(const LinearProgram<T>& lp,
                                                       const std::vector<std::vector<std::size_t>>& var_maps,
                                                       const SolveOptions& opt = {}) {
  using Key = std::pair<int, std::vector<std::pair<std::size_t, int>>>;
  auto small_int = [](const T& v, int& out) {
    for (int c : {-1, 0, 1})
      if (v == T(c)) {
        out = c;
        return true;
      }
    return false;
  };
  const auto& rows = lp.equalities();
  std::vector<Key> keys(rows.size());
  std::map<Key, std::vector<std::size_t>> by_key;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!small_int(rows[r].rhs, keys[r].first)) return std::nullopt;
    for (const auto& [j, a] : rows[r].coeffs) {
      int c;
      if (!small_int(a, c)) return std::nullopt;
      keys[r].second.emplace_back(j, c);
    }
    by_key[keys[r]].push_back(r);
  }
  // Position of each row among rows with an identical key, so duplicates map
  // one-to-one.
  std::vector<std::size_t> occurrence(rows.size());
  for (const auto& [k, list] : by_key)
    for (std::size_t i = 0; i < list.size(); ++i) occurrence[list[i]] = i;

  std::vector<std::vector<std::size_t>> row_maps;
  for (const auto& g : var_maps) {
    std::vector<std::size_t> rm(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Key img{keys[r].first, {}};
      for (const auto& [j, c] : keys[r].second) img.second.emplace_back(g[j], c);
      std::sort(img.second.begin(), img.second.end());
      auto it = by_key.find(img);
      if (it == by_key.end() || it->second.size() <= occurrence[r]) return std::nullopt;
      rm[r] = it->second[occurrence[r]];
    }
    row_maps.push_back(std::move(rm));
  }
  auto c = lp.objective_dense();
  for (const auto& g : var_maps)
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[g[j]] != c[j]) return std::nullopt;

  auto [var_orbit, nvo] = detail::orbits(lp.num_vars(), var_maps);
  auto [row_orbit, nro] = detail::orbits(rows.size(), row_maps);
  std::vector<std::size_t> row_rep(nro, detail::npos), row_size(nro, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (row_rep[row_orbit[r]] == detail::npos) row_rep[row_orbit[r]] = r;
    ++row_size[row_orbit[r]];
  }

  LinearProgram<T> red(nvo);
  for (std::size_t o = 0; o < nro; ++o) {
    SparseRow<T> row;
    for (const auto& [j, a] : rows[row_rep[o]].coeffs) row.emplace_back(var_orbit[j], a);
    red.add_equality(std::move(row), rows[row_rep[o]].rhs);
  }
  SparseRow<T> obj;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] != 0) obj.emplace_back(var_orbit[j], c[j]);
  red.set_objective(std::move(obj));

  auto rs = solve_lp(red, opt);
  if (rs.status != LpStatus::optimal) return std::nullopt;
  LpSolution<T> out;
  out.status = LpStatus::optimal;
  out.objective_value = rs.objective_value;
  out.primal.resize(lp.num_vars());
  for (std::size_t j = 0; j < lp.num_vars(); ++j) out.primal[j] = rs.primal[var_orbit[j]];
  out.dual.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.dual[r] = rs.dual[row_orbit[r]] / T(static_cast<long>(row_size[row_orbit[r]]));
  out.stats = rs.stats;
  out.message = "solved on " + std::to_string(nvo) + " variable orbits and " + std::to_string(nro) + " row orbits";
  return out;
}

}  // namespace gnst
