#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gnst/scalar.hpp"

namespace gnst {

/// Measurement setting labels. Every party chooses between two observables.
enum Setting : int { u = 0, v = 1 };

/// One setting per party, party 0 first.
struct SettingAssignment {
  std::vector<int> settings;

  friend bool operator==(const SettingAssignment&, const SettingAssignment&) = default;
  friend auto operator<=>(const SettingAssignment&, const SettingAssignment&) = default;
};

/// One outcome per party, 1-based (outcome_i in 1..d_i).
struct OutcomeAssignment {
  std::vector<int> outcomes;

  friend bool operator==(const OutcomeAssignment&, const OutcomeAssignment&) = default;
  friend auto operator<=>(const OutcomeAssignment&, const OutcomeAssignment&) = default;
};

/// N parties, two settings each, d_i outcomes for party i.
///
/// Table layout: a behavior is stored context-major. The context index reads
/// the settings as a binary number with party 0 most significant; the outcome
/// index reads the 0-based outcomes as a mixed-radix number, again party 0
/// most significant.
class Scenario {
 public:
  static constexpr std::size_t kMaxTableSize = std::size_t{1} << 40;

  Scenario() = default;

  explicit Scenario(std::vector<int> outcomes) : outcomes_(std::move(outcomes)) {
    if (outcomes_.size() < 2) throw InputError("scenario needs at least 2 parties");
    if (outcomes_.size() > 30) throw InputError("scenario has too many parties");
    std::size_t cells = 1;
    for (int d : outcomes_) {
      if (d < 2) throw InputError("every party needs at least 2 outcomes");
      if (cells > kMaxTableSize / static_cast<std::size_t>(d))
        throw InputError("scenario table size overflows");
      cells *= static_cast<std::size_t>(d);
    }
    cells_per_context_ = cells;
    num_contexts_ = std::size_t{1} << outcomes_.size();
    if (cells_per_context_ > kMaxTableSize / num_contexts_)
      throw InputError("scenario table size overflows");
  }

  /// N parties, all with d outcomes.
  static Scenario uniform(int parties, int d) {
    if (parties < 2) throw InputError("scenario needs at least 2 parties");
    return Scenario(std::vector<int>(static_cast<std::size_t>(parties), d));
  }

  int num_parties() const { return static_cast<int>(outcomes_.size()); }
  const std::vector<int>& outcomes() const { return outcomes_; }
  int outcomes(int party) const { return outcomes_.at(static_cast<std::size_t>(party)); }
  std::size_t num_contexts() const { return num_contexts_; }
  std::size_t cells_per_context() const { return cells_per_context_; }
  std::size_t table_size() const { return num_contexts_ * cells_per_context_; }

  bool all_outcomes_equal(int d) const {
    for (int x : outcomes_)
      if (x != d) return false;
    return true;
  }

  void check(const SettingAssignment& s) const {
    if (s.settings.size() != outcomes_.size())
      throw InputError("setting assignment has wrong length");
    for (int x : s.settings)
      if (x != 0 && x != 1) throw InputError("setting must be 0 (u) or 1 (v)");
  }

  void check(const OutcomeAssignment& o) const {
    if (o.outcomes.size() != outcomes_.size())
      throw InputError("outcome assignment has wrong length");
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
      if (o.outcomes[i] < 1 || o.outcomes[i] > outcomes_[i])
        throw InputError("outcome " + std::to_string(o.outcomes[i]) + " out of range for party " +
                         std::to_string(i + 1));
  }

  std::size_t context_index(const SettingAssignment& s) const {
    check(s);
    std::size_t idx = 0;
    for (int x : s.settings) idx = (idx << 1) | static_cast<std::size_t>(x);
    return idx;
  }

  std::size_t outcome_index(const OutcomeAssignment& o) const {
    check(o);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
      idx = idx * static_cast<std::size_t>(outcomes_[i]) + static_cast<std::size_t>(o.outcomes[i] - 1);
    return idx;
  }

  SettingAssignment settings_at(std::size_t context) const {
    SettingAssignment s{std::vector<int>(outcomes_.size())};
    for (std::size_t i = outcomes_.size(); i-- > 0;) {
      s.settings[i] = static_cast<int>(context & 1u);
      context >>= 1;
    }
    return s;
  }

  OutcomeAssignment outcomes_at(std::size_t outcome) const {
    OutcomeAssignment o{std::vector<int>(outcomes_.size())};
    for (std::size_t i = outcomes_.size(); i-- > 0;) {
      auto d = static_cast<std::size_t>(outcomes_[i]);
      o.outcomes[i] = static_cast<int>(outcome % d) + 1;
      outcome /= d;
    }
    return o;
  }

  /// Stride of party i inside the outcome index.
  std::size_t outcome_stride(int party) const {
    std::size_t stride = 1;
    for (std::size_t i = outcomes_.size(); i-- > static_cast<std::size_t>(party) + 1;)
      stride *= static_cast<std::size_t>(outcomes_[i]);
    return stride;
  }

  /// Bit of party i inside the context index.
  std::size_t context_bit(int party) const {
    return std::size_t{1} << (outcomes_.size() - 1 - static_cast<std::size_t>(party));
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  std::vector<int> outcomes_;
  std::size_t cells_per_context_ = 0;
  std::size_t num_contexts_ = 0;
};

/// Flat table index: context_index * prod(d_i) + outcome_index.
inline std::size_t event_index(const Scenario& sc, const SettingAssignment& s,
                               const OutcomeAssignment& o) {
  return sc.context_index(s) * sc.cells_per_context() + sc.outcome_index(o);
}

inline std::string to_string(const SettingAssignment& s) {
  std::string r;
  for (int x : s.settings) r += x == 0 ? 'u' : 'v';
  return r;
}

inline std::string to_string(const OutcomeAssignment& o) {
  std::string r;
  for (std::size_t i = 0; i < o.outcomes.size(); ++i) {
    if (i) r += ',';
    r += std::to_string(o.outcomes[i]);
  }
  return r;
}

}  // namespace gnst
