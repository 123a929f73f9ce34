#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnst/behavior.hpp"
#include "gnst/hardy.hpp"
#include "gnst/locality.hpp"
#include "gnst/optimize.hpp"
#include "gnst/quantum.hpp"

namespace gnst {

using json = nlohmann::ordered_json;

inline constexpr const char* kBehaviorFormat = "gnst-behavior/1";
inline constexpr const char* kArgumentFormat = "gnst-argument/1";
inline constexpr const char* kCertificateFormat = "gnst-certificate/1";
inline constexpr const char* kVerdictFormat = "gnst-verdict/1";
inline constexpr const char* kQuantumFormat = "gnst-quantum/1";

using AnyBehavior = std::variant<ExactBehavior, FloatBehavior>;

// ---------------------------------------------------------------------------
// Scalars

inline json scalar_to_json(const Rational& r) { return format_rational(r); }
inline json scalar_to_json(double d) { return d; }

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) { return base + "/" + key; }
inline std::string join_path(const std::string& base, std::size_t idx) { return base + "/" + std::to_string(idx); }

inline const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ParseError("expected an object", path.empty() ? "/" : path);
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + key + "'", path.empty() ? "/" : path);
  return *it;
}

inline int int_field(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number_integer()) throw ParseError("expected an integer", join_path(path, key));
  return v.get<int>();
}

inline std::string string_field(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_string()) throw ParseError("expected a string", join_path(path, key));
  return v.get<std::string>();
}

inline void expect_format(const json& j, const char* format, const std::string& path) {
  std::string f = string_field(j, "format", path);
  if (f != format) throw ParseError("unsupported format '" + f + "', expected '" + format + "'", join_path(path, "format"));
}

inline std::vector<int> int_list(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  const std::string p = join_path(path, key);
  if (!v.is_array()) throw ParseError("expected an array", p);
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw ParseError("expected an integer", join_path(p, i));
    out.push_back(v[i].get<int>());
  }
  return out;
}

template <Scalar T>
T scalar_from_json(const json& v, const std::string& path) {
  if constexpr (is_exact_v<T>) {
    if (v.is_string()) {
      try {
        return parse_rational(v.get<std::string>());
      } catch (const InputError& e) {
        throw ParseError(e.what(), path);
      }
    }
    if (v.is_number_integer()) return Rational(v.get<long>());
    throw ParseError("expected a rational string \"a/b\"", path);
  } else {
    if (!v.is_number()) throw ParseError("expected a number", path);
    return v.get<double>();
  }
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
}

inline Scenario scenario_from(const json& j, const std::string& path) {
  const int n = int_field(j, "parties", path);
  auto d = int_list(j, "outcomes", path);
  if (static_cast<int>(d.size()) != n) throw ParseError("outcome list length differs from parties", join_path(path, "outcomes"));
  try {
    return Scenario(d);
  } catch (const InputError& e) {
    throw ParseError(e.what(), join_path(path, "outcomes"));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Behavior documents

template <Scalar T>
json behavior_to_json(const Behavior<T>& b) {
  const Scenario& sc = b.scenario();
  json j;
  j["format"] = kBehaviorFormat;
  j["parties"] = sc.num_parties();
  j["outcomes"] = sc.outcomes();
  j["arithmetic"] = arithmetic_name(arithmetic_of<T>());
  json ctxs = json::array();
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    json row = json::array();
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) row.push_back(scalar_to_json(b[c * sc.cells_per_context() + k]));
    ctxs.push_back(std::move(row));
  }
  j["contexts"] = std::move(ctxs);
  return j;
}

template <Scalar T>
Behavior<T> behavior_from_json_as(const json& j, const std::string& path = "") {
  detail::expect_format(j, kBehaviorFormat, path);
  Scenario sc = detail::scenario_from(j, path);
  const json& ctxs = detail::member(j, "contexts", path);
  const std::string cp = detail::join_path(path, "contexts");
  if (!ctxs.is_array()) throw ParseError("expected an array", cp);
  std::size_t total = 0;
  for (const auto& row : ctxs) total += row.is_array() ? row.size() : 1;
  if (ctxs.size() != sc.num_contexts() || total != sc.table_size())
    throw ParseError("table length mismatch: expected " + std::to_string(sc.num_contexts()) + " contexts of " +
                         std::to_string(sc.cells_per_context()) + " entries",
                     cp);
  std::vector<T> table;
  table.reserve(sc.table_size());
  for (std::size_t c = 0; c < ctxs.size(); ++c) {
    const std::string rp = detail::join_path(cp, c);
    if (!ctxs[c].is_array() || ctxs[c].size() != sc.cells_per_context())
      throw ParseError("table length mismatch: context has the wrong number of entries", rp);
    for (std::size_t k = 0; k < ctxs[c].size(); ++k) {
      const std::string ep = detail::join_path(rp, k);
      T v = detail::scalar_from_json<T>(ctxs[c][k], ep);
      if (v < 0) throw ParseError("negative probability", ep);
      table.push_back(std::move(v));
    }
  }
  return Behavior<T>(sc, std::move(table));
}

/// Reads a behavior document in whichever arithmetic it declares.
inline AnyBehavior behavior_from_json(const json& j, const std::string& path = "") {
  std::string a = detail::string_field(j, "arithmetic", path);
  if (a == "exact") return behavior_from_json_as<Rational>(j, path);
  if (a == "float") return behavior_from_json_as<double>(j, path);
  throw ParseError("arithmetic must be \"exact\" or \"float\"", detail::join_path(path, "arithmetic"));
}

inline AnyBehavior parse_behavior(const std::string& text) { return behavior_from_json(detail::parse_text(text)); }

template <Scalar T>
std::string serialize_behavior(const Behavior<T>& b) {
  return behavior_to_json(b).dump(2);
}

// ---------------------------------------------------------------------------
// Argument documents. Events are regenerated from the family, never stored.

inline json argument_to_json(const HardyArgument& arg) {
  json j;
  j["format"] = kArgumentFormat;
  j["family"] = family_name(arg.family);
  j["parties"] = arg.scenario.num_parties();
  j["outcomes"] = arg.scenario.outcomes();
  j["fixed_j"] = arg.fixed_j + 1;
  return j;
}

inline HardyArgument argument_from_json(const json& j, const std::string& path = "") {
  detail::expect_format(j, kArgumentFormat, path);
  HardyFamily fam;
  try {
    fam = parse_family(detail::string_field(j, "family", path));
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(e.what(), detail::join_path(path, "family"));
  }
  Scenario sc = detail::scenario_from(j, path);
  int fixed_j = sc.num_parties();
  if (j.contains("fixed_j")) fixed_j = detail::int_field(j, "fixed_j", path);
  if (fixed_j < 1 || fixed_j > sc.num_parties()) throw ParseError("fixed_j out of range", detail::join_path(path, "fixed_j"));
  try {
    return build_argument(fam, sc, fixed_j - 1);
  } catch (const InputError& e) {
    throw ParseError(e.what(), path.empty() ? "/" : path);
  }
}

inline HardyArgument parse_argument(const std::string& text) { return argument_from_json(detail::parse_text(text)); }

/// Human-oriented listing of the generated events, for `argument show`.
inline json argument_events_json(const HardyArgument& arg) {
  auto ev = [](const JointEvent& e) {
    json o;
    std::vector<std::string> s;
    for (int x : e.settings.settings) s.push_back(x == 0 ? "u" : "v");
    o["settings"] = s;
    o["outcomes"] = e.outcomes.outcomes;
    return o;
  };
  json j = argument_to_json(arg);
  j["positive_event"] = ev(arg.positive_event);
  json zs = json::array();
  for (const auto& e : arg.zero_events) zs.push_back(ev(e));
  j["zero_events"] = std::move(zs);
  return j;
}

// ---------------------------------------------------------------------------
// Certificates

template <Scalar T>
json certificate_to_json(const HardyArgument& arg, const OptimizationResult<T>& res, bool with_timing = true) {
  json j;
  j["format"] = kCertificateFormat;
  j["argument"] = argument_to_json(arg);
  j["arithmetic"] = arithmetic_name(arithmetic_of<T>());
  j["q_star"] = scalar_to_json(res.q_star);
  j["behavior"] = behavior_to_json(res.optimal_behavior);
  j["verified"] = static_cast<bool>(res.certificate);
  j["solver"] = {{"rows", res.stats.rows},
                 {"cols", res.stats.cols},
                 {"pivots", res.stats.pivots},
                 {"phase1_pivots", res.stats.phase1_pivots},
                 {"presolved_vars", res.stats.presolved_vars},
                 {"reduction", res.reduction}};
  if (with_timing) j["wall_ms"] = res.wall_ms;
  else j["wall_ms"] = nullptr;
  return j;
}

/// Fields of a certificate needed to resume a sweep or re-check a result.
struct CertificateRecord {
  HardyArgument argument;
  Arithmetic arithmetic = Arithmetic::exact;
  std::string q_star;  // as written: "n/d" or a decimal
  double q_star_value = 0;
  AnyBehavior behavior;
  bool verified = false;
  double wall_ms = 0;
};

inline CertificateRecord certificate_from_json(const json& j) {
  detail::expect_format(j, kCertificateFormat, "");
  CertificateRecord r;
  r.argument = argument_from_json(detail::member(j, "argument", ""), "/argument");
  r.behavior = behavior_from_json(detail::member(j, "behavior", ""), "/behavior");
  r.arithmetic = std::holds_alternative<ExactBehavior>(r.behavior) ? Arithmetic::exact : Arithmetic::floating;
  const json& q = detail::member(j, "q_star", "");
  if (q.is_string()) {
    r.q_star = q.get<std::string>();
    r.q_star_value = to_double(detail::scalar_from_json<Rational>(q, "/q_star"));
  } else if (q.is_number()) {
    r.q_star_value = q.get<double>();
    r.q_star = q.dump();
  } else {
    throw ParseError("expected a probability", "/q_star");
  }
  const json& v = detail::member(j, "verified", "");
  if (!v.is_boolean()) throw ParseError("expected a boolean", "/verified");
  r.verified = v.get<bool>();
  if (auto it = j.find("wall_ms"); it != j.end() && it->is_number()) r.wall_ms = it->get<double>();
  return r;
}

// ---------------------------------------------------------------------------
// Verdicts

template <Scalar T>
json verdict_to_json(const Verdict<T>& v) {
  auto one_based = [](const std::vector<int>& xs) {
    std::vector<int> out;
    for (int x : xs) out.push_back(x + 1);
    return out;
  };
  json j;
  j["format"] = kVerdictFormat;
  j["notion"] = notion_name(v.notion);
  j["status"] = locality_status_name(v.status);
  j["arithmetic"] = arithmetic_name(arithmetic_of<T>());
  if (v.decomposition) {
    json comps = json::array();
    for (const auto& c : v.decomposition->components) {
      json o;
      o["group"] = one_based(c.cut.group);
      o["complement"] = one_based(c.cut.complement);
      o["weight"] = scalar_to_json(c.weight);
      o["group_behavior"] = behavior_to_json(c.group_behavior);
      o["singleton_strategy"] = std::vector<int>{c.singleton_strategy[0], c.singleton_strategy[1]};
      comps.push_back(std::move(o));
    }
    j["decomposition"] = std::move(comps);
  } else {
    j["decomposition"] = nullptr;
  }
  if (v.witness) {
    json w;
    json coeffs = json::array();
    for (const auto& x : v.witness->coefficients) coeffs.push_back(scalar_to_json(x));
    w["coefficients"] = std::move(coeffs);
    w["bound"] = scalar_to_json(v.witness->bound);
    w["value"] = scalar_to_json(v.witness->value);
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Quantum models

inline json quantum_to_json(const QuantumModel& m) {
  auto cx = [](const Complex& z) { return json::array({z.real(), z.imag()}); };
  json j;
  j["format"] = kQuantumFormat;
  j["outcomes"] = m.outcomes;
  json st = json::array();
  for (Eigen::Index k = 0; k < m.state.size(); ++k) st.push_back(cx(m.state(k)));
  j["state"] = std::move(st);
  json bases = json::array();
  for (const auto& party : m.bases) {
    json pj = json::array();
    for (const auto& b : party) {
      json sj = json::array();
      for (Eigen::Index col = 0; col < b.cols(); ++col) {
        json vec = json::array();
        for (Eigen::Index row = 0; row < b.rows(); ++row) vec.push_back(cx(b(row, col)));
        sj.push_back(std::move(vec));
      }
      pj.push_back(std::move(sj));
    }
    bases.push_back(std::move(pj));
  }
  j["bases"] = std::move(bases);
  return j;
}

inline QuantumModel quantum_from_json(const json& j) {
  using detail::join_path;
  detail::expect_format(j, kQuantumFormat, "");
  auto cx = [](const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ParseError("expected a complex number [re, im]", path);
    return Complex(v[0].get<double>(), v[1].get<double>());
  };
  QuantumModel m;
  m.outcomes = detail::int_list(j, "outcomes", "");
  Scenario sc;
  try {
    sc = Scenario(m.outcomes);
  } catch (const InputError& e) {
    throw ParseError(e.what(), "/outcomes");
  }
  const json& st = detail::member(j, "state", "");
  if (!st.is_array() || st.size() != sc.cells_per_context()) throw ParseError("state has the wrong dimension", "/state");
  m.state.resize(static_cast<Eigen::Index>(st.size()));
  for (std::size_t k = 0; k < st.size(); ++k) m.state(static_cast<Eigen::Index>(k)) = cx(st[k], join_path("/state", k));
  const json& bs = detail::member(j, "bases", "");
  if (!bs.is_array() || bs.size() != m.outcomes.size()) throw ParseError("need bases for every party", "/bases");
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const std::string pp = join_path("/bases", i);
    const int d = m.outcomes[i];
    if (!bs[i].is_array() || bs[i].size() != 2) throw ParseError("need two settings", pp);
    std::array<Eigen::MatrixXcd, 2> party;
    for (std::size_t s = 0; s < 2; ++s) {
      const std::string sp = join_path(pp, s);
      const json& sj = bs[i][s];
      if (!sj.is_array() || sj.size() != static_cast<std::size_t>(d)) throw ParseError("basis needs d vectors", sp);
      party[s].resize(d, d);
      for (std::size_t col = 0; col < sj.size(); ++col) {
        const std::string vp = join_path(sp, col);
        if (!sj[col].is_array() || sj[col].size() != static_cast<std::size_t>(d))
          throw ParseError("basis vector has the wrong dimension", vp);
        for (std::size_t row = 0; row < sj[col].size(); ++row)
          party[s](static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = cx(sj[col][row], join_path(vp, row));
      }
    }
    m.bases.push_back(std::move(party));
  }
  check_model(m);
  return m;
}

inline QuantumModel parse_quantum(const std::string& text) { return quantum_from_json(detail::parse_text(text)); }

}  // namespace gnst
