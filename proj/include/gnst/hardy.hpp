#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gnst/behavior.hpp"
#include "gnst/scalar.hpp"
#include "gnst/scenario.hpp"

namespace gnst {

enum class HardyFamily { GeneralizedQudit, ChenQubit, Conventional };

inline std::string_view family_name(HardyFamily f) {
  switch (f) {
    case HardyFamily::GeneralizedQudit: return "general";
    case HardyFamily::ChenQubit: return "chen";
    case HardyFamily::Conventional: return "conventional";
  }
  return "general";
}

inline HardyFamily parse_family(std::string_view name) {
  if (name == "general") return HardyFamily::GeneralizedQudit;
  if (name == "chen") return HardyFamily::ChenQubit;
  if (name == "conventional") return HardyFamily::Conventional;
  throw InputError("unknown Hardy family '" + std::string(name) + "'");
}

/// A single cell of the behavior table: outcomes under a setting context.
struct JointEvent {
  SettingAssignment settings;
  OutcomeAssignment outcomes;

  std::size_t index(const Scenario& sc) const { return event_index(sc, settings, outcomes); }

  friend bool operator==(const JointEvent&, const JointEvent&) = default;
  friend auto operator<=>(const JointEvent&, const JointEvent&) = default;
};

inline std::string to_string(const JointEvent& e) {
  return "(" + to_string(e.outcomes) + "|" + to_string(e.settings) + ")";
}

/// One event that must have positive probability q and a list of events
/// that must have probability zero.
struct HardyArgument {
  Scenario scenario;
  HardyFamily family = HardyFamily::GeneralizedQudit;
  int fixed_j = 0;  // 0-based
  JointEvent positive_event;
  std::vector<JointEvent> zero_events;
};

class FamilyError : public InputError {
 public:
  using InputError::InputError;
};

namespace detail {

inline JointEvent event_with(int n, std::vector<std::pair<int, std::pair<int, int>>> overrides) {
  JointEvent e{SettingAssignment{std::vector<int>(static_cast<std::size_t>(n), u)},
               OutcomeAssignment{std::vector<int>(static_cast<std::size_t>(n), 1)}};
  for (auto& [party, so] : overrides) {
    e.settings.settings[static_cast<std::size_t>(party)] = so.first;
    e.outcomes.outcomes[static_cast<std::size_t>(party)] = so.second;
  }
  return e;
}

}  // namespace detail

/// Builds the Hardy constraint system of the given family.
///
/// Positive event: all outcomes 1 under all-u settings. Every family shares
/// the single-flip zeros: for each party r and each outcome c < d_r, the
/// event (1..1 c 1..1 | u..u v_r u..u). The generalized (and Chen) family
/// adds, for each i != j, the double-flip event with v at i and j and
/// outcomes d_i, d_j there. The conventional family instead adds the single
/// event (d_1..d_N | v..v).
///
/// `fixed_j` is 0-based; pass -1 for the default (last party).
inline HardyArgument build_argument(HardyFamily family, const Scenario& sc, int fixed_j = -1) {
  const int n = sc.num_parties();
  if (fixed_j == -1) fixed_j = n - 1;
  if (fixed_j < 0 || fixed_j >= n) throw InputError("fixed_j out of range");
  if (family == HardyFamily::ChenQubit && !sc.all_outcomes_equal(2))
    throw FamilyError("the Chen qubit family requires two outcomes for every party");

  HardyArgument arg;
  arg.scenario = sc;
  arg.family = family;
  arg.fixed_j = fixed_j;
  arg.positive_event = detail::event_with(n, {});

  for (int r = 0; r < n; ++r)
    for (int c = 1; c < sc.outcomes(r); ++c) arg.zero_events.push_back(detail::event_with(n, {{r, {v, c}}}));

  if (family == HardyFamily::Conventional) {
    std::vector<std::pair<int, std::pair<int, int>>> all_v;
    for (int r = 0; r < n; ++r) all_v.push_back({r, {v, sc.outcomes(r)}});
    arg.zero_events.push_back(detail::event_with(n, all_v));
  } else {
    for (int i = 0; i < n; ++i) {
      if (i == fixed_j) continue;
      arg.zero_events.push_back(
          detail::event_with(n, {{i, {v, sc.outcomes(i)}}, {fixed_j, {v, sc.outcomes(fixed_j)}}}));
    }
  }
  return arg;
}

/// Structural checks: events valid for the scenario, zero events distinct and
/// disjoint from the positive event.
inline void check_argument(const HardyArgument& arg) {
  const auto& sc = arg.scenario;
  std::set<std::size_t> cells;
  std::size_t pos = arg.positive_event.index(sc);
  for (const auto& e : arg.zero_events) {
    std::size_t idx = e.index(sc);
    if (idx == pos) throw InputError("zero event coincides with the positive event " + to_string(e));
    if (!cells.insert(idx).second) throw InputError("duplicate zero event " + to_string(e));
  }
}

template <Scalar T>
struct ArgumentEvaluation {
  T q_value{};
  std::vector<std::pair<JointEvent, T>> zero_violations;
  bool satisfied = false;
};

/// Reads the argument's events off a behavior. Zero events with probability
/// above `tol` are reported; satisfied iff q > tol and none are.
template <Scalar T>
ArgumentEvaluation<T> evaluate_argument(const HardyArgument& arg, const Behavior<T>& b, double tol = 1e-9) {
  if (!(arg.scenario == b.scenario())) throw InputError("argument and behavior scenarios differ");
  const T threshold = T(tol);
  ArgumentEvaluation<T> ev;
  ev.q_value = b[arg.positive_event.index(b.scenario())];
  for (const auto& e : arg.zero_events) {
    const T& p = b[e.index(b.scenario())];
    if (p > threshold) ev.zero_violations.emplace_back(e, p);
  }
  ev.satisfied = ev.q_value > threshold && ev.zero_violations.empty();
  return ev;
}

/// The argument with its parties relabeled: new party perm[i] is old party i.
inline HardyArgument permute_argument(const HardyArgument& arg, const std::vector<int>& perm) {
  const auto n = static_cast<std::size_t>(arg.scenario.num_parties());
  if (perm.size() != n) throw InputError("permutation has wrong length");
  auto move_event = [&](const JointEvent& e) {
    JointEvent out{SettingAssignment{std::vector<int>(n)}, OutcomeAssignment{std::vector<int>(n)}};
    for (std::size_t i = 0; i < n; ++i) {
      out.settings.settings[static_cast<std::size_t>(perm[i])] = e.settings.settings[i];
      out.outcomes.outcomes[static_cast<std::size_t>(perm[i])] = e.outcomes.outcomes[i];
    }
    return out;
  };
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) d[static_cast<std::size_t>(perm[i])] = arg.scenario.outcomes()[i];
  HardyArgument out;
  out.scenario = Scenario(d);
  out.family = arg.family;
  out.fixed_j = perm[static_cast<std::size_t>(arg.fixed_j)];
  out.positive_event = move_event(arg.positive_event);
  for (const auto& e : arg.zero_events) out.zero_events.push_back(move_event(e));
  return out;
}

}  // namespace gnst
