#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gnst/io.hpp"
#include "gnst/optimize.hpp"

namespace gnst {

struct SweepOptions {
  HardyFamily family = HardyFamily::GeneralizedQudit;
  std::optional<Arithmetic> arithmetic;  // unset: default_arithmetic per row
  std::size_t max_cells = 20000;         // cap on 2^N * prod(d_i)
  std::size_t jobs = 0;                  // 0: hardware concurrency
  std::string out_dir;                   // certificates and summary.csv; empty: none written
  bool use_symmetry = true;
  SolveOptions solve;
};

enum class RowStatus { solved, resumed, skipped, failed };

inline const char* row_status_name(RowStatus s) {
  switch (s) {
    case RowStatus::solved: return "solved";
    case RowStatus::resumed: return "resumed";
    case RowStatus::skipped: return "skipped";
    case RowStatus::failed: return "failed";
  }
  return "?";
}

struct SweepRow {
  std::vector<int> outcomes;
  HardyFamily family = HardyFamily::GeneralizedQudit;
  Arithmetic arithmetic = Arithmetic::exact;
  RowStatus status = RowStatus::skipped;
  std::string q_star;  // "n/d" in exact mode, shortest round-trip decimal in float mode
  double q_value = 0;
  double wall_ms = 0;
  std::string reason;       // skip or failure reason
  std::string certificate;  // path of the certificate file, if written
  SolverStats stats;

  int parties() const { return static_cast<int>(outcomes.size()); }
};

/// Uniform scenarios: every N in `parties` with every d in `outcomes`.
inline std::vector<std::vector<int>> sweep_grid(const std::vector<int>& parties, const std::vector<int>& outcomes) {
  std::vector<std::vector<int>> out;
  for (int n : parties)
    for (int d : outcomes) out.emplace_back(static_cast<std::size_t>(n), d);
  return out;
}

/// Rows sort by N, then by the outcome list.
inline bool row_before(const SweepRow& a, const SweepRow& b) {
  if (a.outcomes.size() != b.outcomes.size()) return a.outcomes.size() < b.outcomes.size();
  return a.outcomes < b.outcomes;
}

namespace detail {

inline std::string outcome_list(const std::vector<int>& d, char sep) {
  std::string s;
  for (int x : d) s += (s.empty() ? "" : std::string(1, sep)) + std::to_string(x);
  return s;
}

inline std::string certificate_name(HardyFamily fam, const std::vector<int>& d, Arithmetic a) {
  return "cert_" + std::string(family_name(fam)) + "_N" + std::to_string(d.size()) + "_d" + outcome_list(d, '-') + "_" +
         std::string(arithmetic_name(a)) + ".json";
}

inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw InputError("cannot write " + tmp.string());
    f << text;
    if (!f) throw InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_double(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

/// Reuses a certificate from an earlier run if it is for the same argument
/// and arithmetic and passed verification.
inline std::optional<SweepRow> resume_row(const std::filesystem::path& path, const HardyArgument& arg, Arithmetic a) {
  std::ifstream f(path);
  if (!f) return std::nullopt;
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    auto rec = certificate_from_json(parse_text(buf.str()));
    if (!rec.verified || rec.arithmetic != a || rec.argument.family != arg.family ||
        !(rec.argument.scenario == arg.scenario) || rec.argument.fixed_j != arg.fixed_j)
      return std::nullopt;
    SweepRow r;
    r.status = RowStatus::resumed;
    r.q_star = rec.q_star;
    r.q_value = rec.q_star_value;
    r.wall_ms = rec.wall_ms;
    return r;
  } catch (const InputError&) {
    return std::nullopt;
  }
}

template <Scalar T>
void solve_row(SweepRow& row, const HardyArgument& arg, const SweepOptions& opt) {
  auto res = optimize_success<T>(arg, opt.solve, opt.use_symmetry);
  row.status = RowStatus::solved;
  if constexpr (is_exact_v<T>) {
    row.q_star = format_rational(res.q_star);
    row.q_value = res.q_star.get_d();
  } else {
    row.q_star = format_double(res.q_star);
    row.q_value = res.q_star;
  }
  row.wall_ms = res.wall_ms;
  row.stats = res.stats;
  if (!opt.out_dir.empty()) {
    auto path = std::filesystem::path(opt.out_dir) / certificate_name(arg.family, row.outcomes, row.arithmetic);
    write_atomically(path, certificate_to_json(arg, res, true).dump(2) + "\n");
    row.certificate = path.string();
  }
}

}  // namespace detail

/// CSV summary: N, d list, family, arith, q_star, wall_ms. Skipped and failed
/// rows leave q_star and wall_ms empty.
inline std::string sweep_csv(std::vector<SweepRow> rows) {
  std::sort(rows.begin(), rows.end(), row_before);
  std::ostringstream s;
  s << "N,d list,family,arith,q_star,wall_ms\n";
  for (const auto& r : rows) {
    const bool has = r.status == RowStatus::solved || r.status == RowStatus::resumed;
    s << r.parties() << ",\"" << detail::outcome_list(r.outcomes, ',') << "\"," << family_name(r.family) << ','
      << arithmetic_name(r.arithmetic) << ',' << (has ? r.q_star : "") << ',';
    if (has) s << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat;
    s << '\n';
  }
  return s.str();
}

/// Solves the GNST optimization for every scenario, rows in parallel.
///
/// Instances whose table exceeds `max_cells` are skipped with a reason. With
/// an output directory, every solved row writes its certificate as soon as it
/// finishes and summary.csv is rewritten, so an interrupted sweep resumes by
/// reusing verified certificates. Rows come back sorted by (N, d).
inline std::vector<SweepRow> conjecture_sweep(const std::vector<std::vector<int>>& scenarios,
                                              const SweepOptions& opt = {}) {
  if (!opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir);
  std::vector<SweepRow> rows(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    rows[i].outcomes = scenarios[i];
    rows[i].family = opt.family;
  }
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      SweepRow& row = rows[i];
      try {
        Scenario sc(row.outcomes);
        row.arithmetic = opt.arithmetic.value_or(default_arithmetic(sc));
        if (sc.table_size() > opt.max_cells) {
          row.status = RowStatus::skipped;
          row.reason = "table has " + std::to_string(sc.table_size()) + " cells, cap is " + std::to_string(opt.max_cells);
          continue;
        }
        auto arg = build_argument(opt.family, sc);
        if (!opt.out_dir.empty()) {
          auto path = std::filesystem::path(opt.out_dir) / detail::certificate_name(opt.family, row.outcomes, row.arithmetic);
          if (auto old = detail::resume_row(path, arg, row.arithmetic)) {
            old->outcomes = row.outcomes;
            old->family = row.family;
            old->arithmetic = row.arithmetic;
            old->certificate = path.string();
            row = std::move(*old);
            continue;
          }
        }
        if (row.arithmetic == Arithmetic::exact) detail::solve_row<Rational>(row, arg, opt);
        else detail::solve_row<double>(row, arg, opt);
      } catch (const FamilyError& e) {
        row.status = RowStatus::skipped;
        row.reason = e.what();
      } catch (const std::exception& e) {
        row.status = RowStatus::failed;
        row.reason = e.what();
      }
      if (!opt.out_dir.empty()) {
        std::lock_guard lock(mu);
        detail::write_atomically(std::filesystem::path(opt.out_dir) / "summary.csv", sweep_csv(rows));
      }
    }
  };
  std::size_t jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(1, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < jobs; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (!opt.out_dir.empty()) detail::write_atomically(std::filesystem::path(opt.out_dir) / "summary.csv", sweep_csv(rows));
  std::sort(rows.begin(), rows.end(), row_before);
  return rows;
}

/// Sweep document for stdout. Timings are null in exact rows so that exact
/// sweeps print identical bytes run to run; the CSV and certificates keep them.
inline json sweep_to_json(const std::vector<SweepRow>& rows) {
  json j;
  j["format"] = "gnst-sweep/1";
  json arr = json::array();
  for (const auto& r : rows) {
    json o;
    o["parties"] = r.parties();
    o["outcomes"] = r.outcomes;
    o["family"] = family_name(r.family);
    o["arithmetic"] = arithmetic_name(r.arithmetic);
    o["status"] = row_status_name(r.status);
    const bool has = r.status == RowStatus::solved || r.status == RowStatus::resumed;
    if (!has) o["q_star"] = nullptr;
    else if (r.arithmetic == Arithmetic::exact) o["q_star"] = r.q_star;
    else o["q_star"] = r.q_value;
    if (has && r.arithmetic == Arithmetic::floating) o["wall_ms"] = r.wall_ms;
    else o["wall_ms"] = nullptr;
    o["reason"] = r.reason.empty() ? json(nullptr) : json(r.reason);
    o["certificate"] = r.certificate.empty() ? json(nullptr) : json(r.certificate);
    arr.push_back(std::move(o));
  }
  j["rows"] = std::move(arr);
  return j;
}

}  // namespace gnst
