#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnst/io.hpp"
#include "gnst/locality.hpp"
#include "gnst/optimize.hpp"
#include "gnst/quantum.hpp"
#include "gnst/sweep.hpp"

using namespace gnst;

namespace {

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kNonlocal = 3, kScope = 4 };

struct Flags {
  std::string family = "general";
  int parties = 0;
  std::string outcomes;
  int fixed_j = 0;  // 1-based; 0 means N
  std::string arith;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t max_cells = 20000;
  std::size_t jobs = 0;
  bool no_symmetry = false;
  std::vector<std::string> rows;
  std::string parties_list;  // sweep: "3,4" or "2-4"
  std::string file;
  std::string argument_file;
  std::size_t budget = 200000;
  std::size_t restarts = 8;
};

/// "2,3,4" or "2-5" or a mix such as "2,4-5".
std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError(flag + ": '" + s + "' is not an integer");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (auto dash = item.find('-'); dash != std::string::npos && dash > 0) {
      int lo = to_int(item.substr(0, dash)), hi = to_int(item.substr(dash + 1));
      if (hi < lo) throw InputError(flag + ": empty range '" + item + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(to_int(item));
    }
  }
  if (out.empty()) throw InputError(flag + " is empty");
  return out;
}

/// --outcomes with one value means that value for every party.
std::vector<int> outcome_vector(const Flags& f) {
  if (f.parties < 2) throw InputError("--parties must be at least 2");
  if (f.outcomes.empty()) throw InputError("--outcomes is required");
  auto d = parse_int_list(f.outcomes, "--outcomes");
  if (d.size() == 1) d.assign(static_cast<std::size_t>(f.parties), d[0]);
  if (static_cast<int>(d.size()) != f.parties) throw InputError("--outcomes lists " + std::to_string(d.size()) +
                                                                " values for " + std::to_string(f.parties) + " parties");
  return d;
}

HardyArgument argument_from_flags(const Flags& f) {
  Scenario sc(outcome_vector(f));
  int j = f.fixed_j == 0 ? sc.num_parties() : f.fixed_j;
  if (j < 1 || j > sc.num_parties()) throw InputError("--fixed-j must be between 1 and N");
  return build_argument(parse_family(f.family), sc, j - 1);
}

std::optional<Arithmetic> arith_flag(const Flags& f) {
  if (f.arith.empty()) return std::nullopt;
  if (f.arith == "exact") return Arithmetic::exact;
  if (f.arith == "float") return Arithmetic::floating;
  throw InputError("--arith must be exact or float");
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

SolveOptions solve_options(const Flags& f) {
  SolveOptions o;
  o.feas_tol = std::min(o.feas_tol, f.tol);
  return o;
}

// ---------------------------------------------------------------------------

int cmd_optimize(const Flags& f) {
  auto arg = argument_from_flags(f);
  Arithmetic a = arith_flag(f).value_or(default_arithmetic(arg.scenario));
  auto run = [&](auto tag) {
    using T = decltype(tag);
    auto res = optimize_success<T>(arg, solve_options(f), !f.no_symmetry);
    std::fprintf(stderr, "%s: q* = %s in %.1f ms%s%s\n", describe(arg).c_str(),
                 certificate_to_json(arg, res, false)["q_star"].dump().c_str(), res.wall_ms,
                 res.reduction.empty() ? "" : ", ", res.reduction.c_str());
    if (!f.out.empty()) write_file(f.out, certificate_to_json(arg, res, true).dump(2) + "\n");
    // Exact stdout stays byte-identical across runs, so no timing there.
    emit(certificate_to_json(arg, res, !is_exact_v<T>));
  };
  if (a == Arithmetic::exact) run(Rational{});
  else run(double{});
  return kOk;
}

int cmd_sweep(const Flags& f) {
  SweepOptions opt;
  opt.family = parse_family(f.family);
  opt.arithmetic = arith_flag(f);
  opt.max_cells = f.max_cells;
  opt.jobs = f.jobs;
  opt.out_dir = f.out;
  opt.use_symmetry = !f.no_symmetry;
  opt.solve = solve_options(f);
  std::vector<std::vector<int>> scenarios;
  if (!f.outcomes.empty() || !f.parties_list.empty()) {
    if (f.outcomes.empty() || f.parties_list.empty()) throw InputError("a sweep grid needs both --parties and --outcomes");
    scenarios = sweep_grid(parse_int_list(f.parties_list, "--parties"), parse_int_list(f.outcomes, "--outcomes"));
  }
  for (const auto& r : f.rows) scenarios.push_back(parse_int_list(r, "--row"));
  if (scenarios.empty()) throw InputError("sweep needs --parties/--outcomes or at least one --row");
  auto rows = conjecture_sweep(scenarios, opt);
  bool failed = false;
  for (const auto& r : rows) {
    std::fprintf(stderr, "N=%d d=%s %s %s %s%s%s\n", r.parties(), detail::outcome_list(r.outcomes, ',').c_str(),
                 arithmetic_name(r.arithmetic).data(), row_status_name(r.status), r.q_star.c_str(),
                 r.reason.empty() ? "" : " ", r.reason.c_str());
    failed = failed || r.status == RowStatus::failed;
  }
  emit(sweep_to_json(rows));
  return failed ? kInternal : kOk;
}

template <Scalar T>
json check_document(const Behavior<T>& b, const std::optional<HardyArgument>& arg, double tol, bool& valid) {
  auto rep = validate_behavior(b, tol);
  valid = rep.ok();
  json j;
  j["format"] = "gnst-check/1";
  j["arithmetic"] = arithmetic_name(arithmetic_of<T>());
  json v;
  v["ok"] = rep.ok();
  v["nonnegative"] = rep.nonneg_ok;
  v["normalization_residual"] = rep.normalization_residual;
  v["ns_residual"] = rep.ns_residual;
  json vs = json::array();
  for (const auto& x : rep.violations) vs.push_back({{"constraint", x.constraint}, {"magnitude", x.magnitude}});
  v["violations"] = std::move(vs);
  j["validation"] = std::move(v);
  if (arg) {
    auto ev = evaluate_argument(*arg, b, tol);
    json e;
    e["argument"] = argument_to_json(*arg);
    e["q_value"] = scalar_to_json(ev.q_value);
    e["satisfied"] = ev.satisfied;
    json zs = json::array();
    for (const auto& [event, p] : ev.zero_violations) zs.push_back({{"event", to_string(event)}, {"probability", scalar_to_json(p)}});
    e["zero_violations"] = std::move(zs);
    j["evaluation"] = std::move(e);
  } else {
    j["evaluation"] = nullptr;
  }
  return j;
}

int cmd_check(const Flags& f, bool family_given) {
  auto any = parse_behavior(read_file(f.file));
  std::optional<HardyArgument> arg;
  if (!f.argument_file.empty()) {
    arg = parse_argument(read_file(f.argument_file));
  } else if (family_given) {
    Flags g = f;
    std::visit(
        [&](const auto& b) {
          g.parties = b.scenario().num_parties();
          g.outcomes.clear();
          for (int d : b.scenario().outcomes()) g.outcomes += (g.outcomes.empty() ? "" : ",") + std::to_string(d);
        },
        any);
    arg = argument_from_flags(g);
  }
  bool valid = false;
  json doc = std::visit([&](const auto& b) { return check_document(b, arg, f.tol, valid); }, any);
  emit(doc);
  if (!valid) std::fprintf(stderr, "behavior fails normalization or no-signaling\n");
  return valid ? kOk : kInput;
}

int cmd_witness(const Flags& f, LocalityNotion notion) {
  auto any = parse_behavior(read_file(f.file));
  auto want = arith_flag(f);
  if (want == Arithmetic::floating && std::holds_alternative<ExactBehavior>(any))
    any = to_float(std::get<ExactBehavior>(any));
  else if (want == Arithmetic::exact && std::holds_alternative<FloatBehavior>(any))
    throw InputError("a float behavior cannot be checked in exact arithmetic");
  return std::visit(
      [&](const auto& b) {
        using T = typename std::decay_t<decltype(b)>::value_type;
        auto v = notion == LocalityNotion::ns2 ? ns2_membership<T>(b, solve_options(f))
                                               : svetlichny_membership<T>(b, solve_options(f));
        if (v.witness) {
          if (auto c = check_witness(b, *v.witness, notion); !c)
            throw SolverError("witness failed re-verification: " + c.failure);
        }
        std::fprintf(stderr, "%s: %s\n", notion_name(v.notion).data(), locality_status_name(v.status).data());
        emit(verdict_to_json(v));
        return v.status == LocalityStatus::local ? kOk : kNonlocal;
      },
      any);
}

int cmd_quantum_build(const Flags& f) {
  auto m = parse_quantum(read_file(f.file));
  emit(behavior_to_json(born_behavior(m)));
  return kOk;
}

int cmd_quantum_search(const Flags& f) {
  auto arg = argument_from_flags(f);
  SearchOptions opt;
  opt.seed = f.seed;
  opt.budget = f.budget;
  opt.restarts = f.restarts;
  opt.jobs = f.jobs;
  auto r = search_hardy_model(arg, opt);
  json j = quantum_to_json(r.model);
  json s;
  s["argument"] = argument_to_json(arg);
  s["seed"] = f.seed;
  s["restarts"] = f.restarts;
  s["budget"] = f.budget;
  s["best_restart"] = r.restart;
  s["q_value"] = r.evaluation.q_value;
  s["zero_mass"] = r.zero_mass;
  s["satisfied"] = r.evaluation.satisfied;
  j["search"] = std::move(s);
  std::fprintf(stderr, "%s: q = %.6f, zero mass %.3g, %s\n", describe(arg).c_str(), r.evaluation.q_value, r.zero_mass,
               r.evaluation.satisfied ? "satisfied" : "not satisfied");
  if (!f.out.empty()) write_file(f.out, j.dump(2) + "\n");
  emit(j);
  return kOk;
}

int cmd_argument_show(const Flags& f) {
  emit(argument_events_json(argument_from_flags(f)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardy-type arguments in generalized no-signaling theories"};
  app.require_subcommand(1);
  Flags f;

  auto add_argument_flags = [&](CLI::App* c) {
    c->add_option("--family", f.family, "general, chen or conventional")->check(CLI::IsMember({"general", "chen", "conventional"}));
    c->add_option("--parties", f.parties, "number of parties N");
    c->add_option("--outcomes", f.outcomes, "outcome counts d,d,... (one value: same for all)");
    c->add_option("--fixed-j", f.fixed_j, "party index j of the double-flip events (default N)");
  };

  auto* optimize = app.add_subcommand("optimize", "maximize the Hardy probability over no-signaling behaviors");
  add_argument_flags(optimize);
  optimize->add_option("--arith", f.arith, "exact or float (default by table size)");
  optimize->add_option("--tol", f.tol, "float tolerance");
  optimize->add_option("--out", f.out, "also write the certificate with timing to this path");
  optimize->add_flag("--no-symmetry", f.no_symmetry, "solve the full LP without symmetry reduction");

  auto* sweep = app.add_subcommand("sweep", "optimize over a grid of scenarios");
  sweep->add_option("--family", f.family)->check(CLI::IsMember({"general", "chen", "conventional"}));
  sweep->add_option("--parties", f.parties_list, "party counts, e.g. 3,4 or 2-4");
  sweep->add_option("--outcomes", f.outcomes, "outcome counts, e.g. 2-5");
  sweep->add_option("--row", f.rows, "explicit scenario d,d,... (repeatable)");
  sweep->add_option("--arith", f.arith, "exact or float (default per row)");
  sweep->add_option("--tol", f.tol);
  sweep->add_option("--max-cells", f.max_cells, "skip tables larger than this");
  sweep->add_option("--jobs", f.jobs, "parallel rows (default: all cores)");
  sweep->add_option("--out", f.out, "directory for certificates and summary.csv");
  sweep->add_flag("--no-symmetry", f.no_symmetry);

  auto* check = app.add_subcommand("check", "validate a behavior, optionally against a Hardy argument");
  check->add_option("behavior", f.file, "behavior file (- for stdin)")->required();
  check->add_option("--argument", f.argument_file, "argument file");
  auto* check_family = check->add_option("--family", f.family)->check(CLI::IsMember({"general", "chen", "conventional"}));
  check->add_option("--fixed-j", f.fixed_j);
  check->add_option("--tol", f.tol);

  auto* witness = app.add_subcommand("witness", "hybrid-local membership with decomposition or witness");
  witness->require_subcommand(1);
  auto* ns2 = witness->add_subcommand("ns2", "bipartite no-signaling hybrid model (N = 3)");
  auto* svet = witness->add_subcommand("svetlichny", "Svetlichny hybrid model (N = 3, d = 2)");
  for (auto* c : {ns2, svet}) {
    c->add_option("behavior", f.file, "behavior file (- for stdin)")->required();
    c->add_option("--arith", f.arith, "solve in this arithmetic (exact files may be solved in float)");
  }

  auto* quantum = app.add_subcommand("quantum", "quantum models");
  quantum->require_subcommand(1);
  auto* qbuild = quantum->add_subcommand("build", "Born-rule behavior of a model file");
  qbuild->add_option("model", f.file, "model file (- for stdin)")->required();
  auto* qsearch = quantum->add_subcommand("search", "randomized search for a model satisfying an argument");
  add_argument_flags(qsearch);
  qsearch->add_option("--seed", f.seed);
  qsearch->add_option("--budget", f.budget, "objective evaluations per restart");
  qsearch->add_option("--restarts", f.restarts);
  qsearch->add_option("--jobs", f.jobs);
  qsearch->add_option("--out", f.out, "also write the model to this path");

  auto* argument = app.add_subcommand("argument", "Hardy arguments");
  argument->require_subcommand(1);
  auto* show = argument->add_subcommand("show", "list the events of an argument");
  add_argument_flags(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cerr << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cerr << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kInput;
  }

  try {
    if (*optimize) return cmd_optimize(f);
    if (*sweep) return cmd_sweep(f);
    if (*check) return cmd_check(f, check_family->count() > 0);
    if (*ns2) return cmd_witness(f, LocalityNotion::ns2);
    if (*svet) return cmd_witness(f, LocalityNotion::svetlichny);
    if (*qbuild) return cmd_quantum_build(f);
    if (*qsearch) return cmd_quantum_search(f);
    if (*show) return cmd_argument_show(f);
  } catch (const ScopeError& e) {
    std::cerr << "out of scope: " << e.what() << '\n';
    return kScope;
  } catch (const InputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  std::cerr << app.help();
  return kInput;
}
