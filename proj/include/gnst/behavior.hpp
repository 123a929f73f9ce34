#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gnst/scalar.hpp"
#include "gnst/scenario.hpp"

namespace gnst {

/// Joint conditional probability table P(outcomes | settings).
///
/// Values are immutable after construction. Party indices in the C++ API are
/// 0-based; file formats and the CLI use 1-based parties and outcomes.
template <Scalar T>
class Behavior {
 public:
  using value_type = T;

  Behavior() = default;

  Behavior(Scenario scenario, std::vector<T> table)
      : scenario_(std::move(scenario)), table_(std::move(table)) {
    if (table_.size() != scenario_.table_size())
      throw InputError("table length mismatch: expected " + std::to_string(scenario_.table_size()) +
                       ", got " + std::to_string(table_.size()));
  }

  const Scenario& scenario() const { return scenario_; }
  const std::vector<T>& table() const { return table_; }
  static constexpr Arithmetic arithmetic() { return arithmetic_of<T>(); }

  const T& operator[](std::size_t flat) const { return table_[flat]; }
  const T& at(const SettingAssignment& s, const OutcomeAssignment& o) const {
    return table_[event_index(scenario_, s, o)];
  }

  friend bool operator==(const Behavior&, const Behavior&) = default;

 private:
  Scenario scenario_;
  std::vector<T> table_;
};

using ExactBehavior = Behavior<Rational>;
using FloatBehavior = Behavior<double>;

inline FloatBehavior to_float(const ExactBehavior& b) {
  std::vector<double> t;
  t.reserve(b.table().size());
  for (const auto& x : b.table()) t.push_back(x.get_d());
  return FloatBehavior(b.scenario(), std::move(t));
}

/// Every entry 1 / prod(d_i).
template <Scalar T>
Behavior<T> uniform_behavior(const Scenario& sc) {
  T p = from_ratio<T>(1, static_cast<long>(sc.cells_per_context()));
  return Behavior<T>(sc, std::vector<T>(sc.table_size(), p));
}

/// Product of single-party distributions: local[i][setting][outcome - 1].
template <Scalar T>
Behavior<T> product_behavior(const Scenario& sc,
                             const std::vector<std::vector<std::vector<T>>>& local) {
  const int n = sc.num_parties();
  if (static_cast<int>(local.size()) != n) throw InputError("need one local table per party");
  for (int i = 0; i < n; ++i) {
    const auto& li = local[static_cast<std::size_t>(i)];
    if (li.size() != 2) throw InputError("local table needs two settings");
    for (const auto& row : li)
      if (static_cast<int>(row.size()) != sc.outcomes(i))
        throw InputError("local table has wrong outcome count");
  }
  std::vector<T> table(sc.table_size());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto s = sc.settings_at(c);
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) {
      auto o = sc.outcomes_at(k);
      T p = 1;
      for (int i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        p *= local[ui][static_cast<std::size_t>(s.settings[ui])]
                  [static_cast<std::size_t>(o.outcomes[ui] - 1)];
      }
      table[c * sc.cells_per_context() + k] = p;
    }
  }
  return Behavior<T>(sc, std::move(table));
}

/// Deterministic behavior: party i answers strategy[i][setting] (1-based).
template <Scalar T>
Behavior<T> deterministic_behavior(const Scenario& sc,
                                   const std::vector<std::array<int, 2>>& strategy) {
  std::vector<std::vector<std::vector<T>>> local;
  for (int i = 0; i < sc.num_parties(); ++i) {
    std::vector<std::vector<T>> li(2, std::vector<T>(static_cast<std::size_t>(sc.outcomes(i)), T(0)));
    for (int s = 0; s < 2; ++s) {
      int o = strategy.at(static_cast<std::size_t>(i))[static_cast<std::size_t>(s)];
      if (o < 1 || o > sc.outcomes(i)) throw InputError("deterministic outcome out of range");
      li[static_cast<std::size_t>(s)][static_cast<std::size_t>(o - 1)] = 1;
    }
    local.push_back(std::move(li));
  }
  return product_behavior(sc, local);
}

/// Convex combination sum_k w_k b_k. Caller supplies weights summing to 1.
template <Scalar T>
Behavior<T> mix(const std::vector<T>& weights, const std::vector<Behavior<T>>& parts) {
  if (weights.size() != parts.size() || parts.empty()) throw InputError("mix needs matching weights");
  std::vector<T> table(parts[0].table().size(), T(0));
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!(parts[k].scenario() == parts[0].scenario())) throw InputError("mix scenario mismatch");
    for (std::size_t i = 0; i < table.size(); ++i) table[i] += weights[k] * parts[k][i];
  }
  return Behavior<T>(parts[0].scenario(), std::move(table));
}

struct Violation {
  std::string constraint;
  double magnitude = 0;
};

struct ValidationReport {
  bool nonneg_ok = true;
  double normalization_residual = 0;
  double ns_residual = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks nonnegativity, per-context normalization and no-signaling for every
/// single-party setting flip. Exact behaviors are compared exactly (tol = 0);
/// the `tol` argument only applies to float tables.
template <Scalar T>
ValidationReport validate_behavior(const Behavior<T>& b, double tol = 1e-9) {
  const Scenario& sc = b.scenario();
  const auto& t = b.table();
  const std::size_t cells = sc.cells_per_context();
  ValidationReport rep;

  auto exceeds = [&](const T& dev) {
    if constexpr (is_exact_v<T>) return dev != 0;
    else return dev > tol;
  };

  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0) {
      rep.nonneg_ok = false;
      rep.violations.push_back({"nonneg:cell" + std::to_string(i), to_double(abs_value(t[i]))});
    }
  }

  T worst_norm = 0;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    T sum = 0;
    for (std::size_t k = 0; k < cells; ++k) sum += t[c * cells + k];
    T dev = abs_value(T(sum - 1));
    if (dev > worst_norm) worst_norm = dev;
    if (exceeds(dev)) rep.violations.push_back({"norm:ctx" + std::to_string(c), to_double(dev)});
  }
  rep.normalization_residual = to_double(worst_norm);

  T worst_ns = 0;
  for (int p = 0; p < sc.num_parties(); ++p) {
    const std::size_t bit = sc.context_bit(p);
    const std::size_t stride = sc.outcome_stride(p);
    const auto dp = static_cast<std::size_t>(sc.outcomes(p));
    for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
      if (c & bit) continue;
      for (std::size_t k = 0; k < cells; ++k) {
        if ((k / stride) % dp != 0) continue;
        T s0 = 0, s1 = 0;
        for (std::size_t x = 0; x < dp; ++x) {
          s0 += t[c * cells + k + x * stride];
          s1 += t[(c | bit) * cells + k + x * stride];
        }
        T dev = abs_value(T(s0 - s1));
        if (dev > worst_ns) worst_ns = dev;
        if (exceeds(dev))
          rep.violations.push_back({"ns:party" + std::to_string(p + 1) + ":ctx" + std::to_string(c) +
                                        ":out" + std::to_string(k),
                                    to_double(dev)});
      }
    }
  }
  rep.ns_residual = to_double(worst_ns);
  return rep;
}

/// Signaling behavior asked for a marginal that depends on the complement's settings.
class IllDefinedMarginal : public InputError {
 public:
  using InputError::InputError;
};

/// Marginal over `parties` (0-based, any order) at settings `s_sub`. The result
/// is indexed mixed-radix over the listed parties, first listed most
/// significant. Throws IllDefinedMarginal if the complement's setting choice
/// changes the result by more than tol (exact tables: any change).
template <Scalar T>
std::vector<T> marginalize(const Behavior<T>& b, const std::vector<int>& parties,
                           const std::vector<int>& s_sub, double tol = 1e-9) {
  const Scenario& sc = b.scenario();
  const int n = sc.num_parties();
  if (parties.empty() || parties.size() != s_sub.size())
    throw InputError("marginal needs one setting per listed party");
  std::vector<bool> in_sub(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < parties.size(); ++k) {
    int p = parties[k];
    if (p < 0 || p >= n || in_sub[static_cast<std::size_t>(p)])
      throw InputError("invalid party list for marginal");
    if (s_sub[k] != 0 && s_sub[k] != 1) throw InputError("setting must be 0 or 1");
    in_sub[static_cast<std::size_t>(p)] = true;
  }
  std::size_t out_size = 1;
  for (int p : parties) out_size *= static_cast<std::size_t>(sc.outcomes(p));

  std::vector<T> first;
  T worst = 0;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto s = sc.settings_at(c);
    bool match = true;
    for (std::size_t k = 0; k < parties.size(); ++k)
      if (s.settings[static_cast<std::size_t>(parties[k])] != s_sub[k]) match = false;
    if (!match) continue;
    std::vector<T> m(out_size, T(0));
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) {
      auto o = sc.outcomes_at(k);
      std::size_t idx = 0;
      for (int p : parties)
        idx = idx * static_cast<std::size_t>(sc.outcomes(p)) +
              static_cast<std::size_t>(o.outcomes[static_cast<std::size_t>(p)] - 1);
      m[idx] += b[c * sc.cells_per_context() + k];
    }
    if (first.empty()) {
      first = std::move(m);
    } else {
      for (std::size_t i = 0; i < out_size; ++i) {
        T dev = abs_value(T(m[i] - first[i]));
        if (dev > worst) worst = dev;
      }
    }
  }
  bool bad;
  if constexpr (is_exact_v<T>) bad = worst != 0;
  else bad = worst > tol;
  if (bad)
    throw IllDefinedMarginal("marginal depends on the complement's settings (deviation " +
                             std::to_string(to_double(worst)) + ")");
  return first;
}

/// New party perm[i] is old party i; outcome counts move with their parties.
template <Scalar T>
Behavior<T> permute_parties(const Behavior<T>& b, const std::vector<int>& perm) {
  const Scenario& sc = b.scenario();
  const auto n = static_cast<std::size_t>(sc.num_parties());
  if (perm.size() != n) throw InputError("permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= n || seen[static_cast<std::size_t>(p)])
      throw InputError("not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) d[static_cast<std::size_t>(perm[i])] = sc.outcomes()[i];
  Scenario out(d);
  std::vector<T> table(sc.table_size());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto s = sc.settings_at(c);
    SettingAssignment s2{std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) s2.settings[static_cast<std::size_t>(perm[i])] = s.settings[i];
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) {
      auto o = sc.outcomes_at(k);
      OutcomeAssignment o2{std::vector<int>(n)};
      for (std::size_t i = 0; i < n; ++i) o2.outcomes[static_cast<std::size_t>(perm[i])] = o.outcomes[i];
      table[event_index(out, s2, o2)] = b[c * sc.cells_per_context() + k];
    }
  }
  return Behavior<T>(std::move(out), std::move(table));
}

/// Party relabeling within a fixed scenario: perm may only exchange parties
/// with equal outcome counts.
template <Scalar T>
Behavior<T> relabel_parties(const Behavior<T>& b, const std::vector<int>& perm) {
  const Scenario& sc = b.scenario();
  if (perm.size() != static_cast<std::size_t>(sc.num_parties()))
    throw InputError("permutation has wrong length");
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] < 0 || perm[i] >= sc.num_parties()) throw InputError("not a permutation");
    if (sc.outcomes(perm[i]) != sc.outcomes()[i])
      throw InputError("relabeling maps party " + std::to_string(i + 1) + " onto a party with a different outcome count");
  }
  return permute_parties(b, perm);
}

}  // namespace gnst
