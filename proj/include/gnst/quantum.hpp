#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gnst/behavior.hpp"
#include "gnst/hardy.hpp"

namespace gnst {

using Complex = std::complex<double>;

/// Pure state plus, per party and setting, an orthonormal measurement basis.
/// Basis vectors are the columns of bases[party][setting]; column o-1 is the
/// vector for outcome o. State amplitudes are indexed like outcome_index.
struct QuantumModel {
  std::vector<int> outcomes;
  Eigen::VectorXcd state;
  std::vector<std::array<Eigen::MatrixXcd, 2>> bases;

  Scenario scenario() const { return Scenario(outcomes); }
};

inline constexpr double kQuantumTol = 1e-10;

/// Throws InputError unless the state has unit norm and every basis is
/// orthonormal within `tol`.
inline void check_model(const QuantumModel& m, double tol = kQuantumTol) {
  Scenario sc(m.outcomes);
  if (static_cast<std::size_t>(m.state.size()) != sc.cells_per_context())
    throw InputError("state dimension does not match the outcome counts");
  if (std::abs(m.state.norm() - 1.0) > tol) throw InputError("state is not normalized");
  if (m.bases.size() != m.outcomes.size()) throw InputError("need bases for every party");
  for (std::size_t i = 0; i < m.bases.size(); ++i)
    for (int s = 0; s < 2; ++s) {
      const auto& b = m.bases[i][static_cast<std::size_t>(s)];
      const int d = m.outcomes[i];
      if (b.rows() != d || b.cols() != d) throw InputError("basis of party " + std::to_string(i + 1) + " has wrong size");
      double dev = (b.adjoint() * b - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
      if (dev > tol)
        throw InputError("basis of party " + std::to_string(i + 1) + ", setting " + (s == 0 ? "u" : "v") +
                         " is not orthonormal");
    }
}

namespace detail {

/// Applies the adjoint of each party's chosen basis to the state, one tensor
/// mode at a time: the result holds the outcome amplitudes of one context.
inline Eigen::VectorXcd context_amplitudes(const QuantumModel& m, const std::vector<int>& settings) {
  Eigen::VectorXcd psi = m.state;
  std::size_t stride = static_cast<std::size_t>(psi.size());
  for (std::size_t i = 0; i < m.outcomes.size(); ++i) {
    const auto d = static_cast<std::size_t>(m.outcomes[i]);
    stride /= d;
    const Eigen::MatrixXcd badj = m.bases[i][static_cast<std::size_t>(settings[i])].adjoint();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    const std::size_t block = d * stride;
    for (std::size_t hi = 0; hi < static_cast<std::size_t>(psi.size()); hi += block)
      for (std::size_t lo = 0; lo < stride; ++lo)
        for (std::size_t o = 0; o < d; ++o) {
          Complex acc = 0;
          for (std::size_t x = 0; x < d; ++x)
            acc += badj(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(x)) *
                   psi(static_cast<Eigen::Index>(hi + x * stride + lo));
          out(static_cast<Eigen::Index>(hi + o * stride + lo)) = acc;
        }
    psi = std::move(out);
  }
  return psi;
}

/// Probability of a single joint event, without building the full table.
inline double event_probability(const QuantumModel& m, const JointEvent& e) {
  Complex amp = 0;
  const std::size_t n = m.outcomes.size();
  std::vector<std::size_t> x(n, 0);
  for (Eigen::Index k = 0; k < m.state.size(); ++k) {
    Complex term = m.state(k);
    for (std::size_t i = 0; i < n; ++i)
      term *= std::conj(m.bases[i][static_cast<std::size_t>(e.settings.settings[i])](
          static_cast<Eigen::Index>(x[i]), e.outcomes.outcomes[i] - 1));
    amp += term;
    for (std::size_t i = n; i-- > 0;) {
      if (++x[i] < static_cast<std::size_t>(m.outcomes[i])) break;
      x[i] = 0;
    }
  }
  return std::norm(amp);
}

}  // namespace detail

/// P(o|s) = |<(x)_i basis(i, s_i, o_i), state>|^2.
inline FloatBehavior born_behavior(const QuantumModel& m) {
  check_model(m);
  Scenario sc(m.outcomes);
  std::vector<double> table(sc.table_size());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto amp = detail::context_amplitudes(m, sc.settings_at(c).settings);
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k)
      table[c * sc.cells_per_context() + k] = std::norm(amp(static_cast<Eigen::Index>(k)));
  }
  FloatBehavior b(sc, std::move(table));
  if (auto rep = validate_behavior(b, kQuantumTol); !rep.ok())
    throw SolverError("Born behavior failed validation: " + rep.violations.front().constraint);
  return b;
}

inline ArgumentEvaluation<double> evaluate_quantum_hardy(const QuantumModel& m, const HardyArgument& arg,
                                                         double tol = 1e-9) {
  if (!(Scenario(m.outcomes) == arg.scenario)) throw InputError("model and argument scenarios differ");
  return evaluate_argument(arg, born_behavior(m), tol);
}

/// Orthonormal frame closest in spirit to `a`: the Q factor of its QR
/// decomposition.
inline Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
}

inline Eigen::MatrixXcd random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  return orthonormalize(a);
}

inline QuantumModel random_model(const std::vector<int>& outcomes, std::mt19937_64& rng) {
  Scenario sc(outcomes);
  std::normal_distribution<double> g;
  QuantumModel m;
  m.outcomes = outcomes;
  m.state.resize(static_cast<Eigen::Index>(sc.cells_per_context()));
  for (Eigen::Index k = 0; k < m.state.size(); ++k) m.state(k) = Complex(g(rng), g(rng));
  m.state.normalize();
  for (int d : outcomes) m.bases.push_back({random_unitary(d, rng), random_unitary(d, rng)});
  return m;
}

/// Every party measures the computational basis under both settings.
inline QuantumModel computational_model(const std::vector<int>& outcomes, Eigen::VectorXcd state) {
  QuantumModel m;
  m.outcomes = outcomes;
  m.state = std::move(state);
  for (int d : outcomes) m.bases.push_back({Eigen::MatrixXcd::Identity(d, d), Eigen::MatrixXcd::Identity(d, d)});
  return m;
}

struct SearchOptions {
  std::uint64_t seed = 1;
  std::size_t restarts = 8;
  std::size_t budget = 200000;  // objective evaluations per restart
  std::size_t jobs = 0;        // 0: hardware concurrency
};

struct SearchResult {
  QuantumModel model;
  ArgumentEvaluation<double> evaluation;
  double zero_mass = 0;  // sum of zero-event probabilities
  double objective = 0;
  std::size_t restart = 0;
};

namespace detail {

struct PenaltyValue {
  double q = 0, zeros = 0;
};

inline PenaltyValue penalty_terms(const QuantumModel& m, const HardyArgument& arg) {
  PenaltyValue v;
  v.q = event_probability(m, arg.positive_event);
  for (const auto& e : arg.zero_events) v.zeros += event_probability(m, e);
  return v;
}

/// One restart: random start, then a randomized pattern search on the state
/// and the basis frames, maximizing q - lambda * (zero mass) with lambda
/// ramped up in stages.
inline SearchResult search_restart(const HardyArgument& arg, std::uint64_t seed, std::size_t restart,
                                   std::size_t budget) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(restart)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> g;
  const auto& d = arg.scenario.outcomes();
  const std::size_t n = d.size();
  QuantumModel cur = random_model(d, rng);

  const std::vector<double> lambdas{10, 1e2, 1e3, 1e4, 1e5, 1e6};
  const std::size_t per_stage = std::max<std::size_t>(1, budget / lambdas.size());
  // Blocks: 0 is the state, 1 + 2i + s is party i's basis for setting s.
  std::uniform_int_distribution<std::size_t> pick(0, 2 * n);
  auto value = [&](const QuantumModel& m, double lambda) {
    auto t = penalty_terms(m, arg);
    return t.q - lambda * t.zeros;
  };

  for (double lambda : lambdas) {
    double best = value(cur, lambda);
    double step = 0.1;
    std::size_t fails = 0;
    for (std::size_t it = 0; it < per_stage && step > 1e-13; ++it) {
      QuantumModel cand = cur;
      const std::size_t blk = pick(rng);
      if (blk == 0) {
        for (Eigen::Index k = 0; k < cand.state.size(); ++k) cand.state(k) += step * Complex(g(rng), g(rng));
        cand.state.normalize();
      } else {
        auto& b = cand.bases[(blk - 1) / 2][(blk - 1) % 2];
        for (Eigen::Index i = 0; i < b.rows(); ++i)
          for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) += step * Complex(g(rng), g(rng));
        b = orthonormalize(b);
      }
      const double v = value(cand, lambda);
      if (v > best) {
        best = v;
        cur = std::move(cand);
        step *= 1.5;
        fails = 0;
      } else if (++fails >= 4 * (2 * n + 1)) {
        step *= 0.5;
        fails = 0;
      }
    }
  }
  SearchResult r;
  auto t = penalty_terms(cur, arg);
  r.zero_mass = t.zeros;
  r.objective = t.q - lambdas.back() * t.zeros;
  r.model = std::move(cur);
  r.evaluation = evaluate_quantum_hardy(r.model, arg);
  r.restart = restart;
  return r;
}

}  // namespace detail

/// Randomized search for a quantum model satisfying the argument. Restarts
/// run concurrently; the result depends only on the seed (ties go to the
/// lowest restart index). Returns the best model found, with no claim of
/// optimality.
inline SearchResult search_hardy_model(const HardyArgument& arg, const SearchOptions& opt = {}) {
  check_argument(arg);
  if (opt.budget == 0 || opt.restarts == 0) throw InputError("search budget must be positive");
  if (arg.scenario.cells_per_context() > 64)
    throw ScopeError("quantum search is limited to joint dimension 64");
  std::size_t jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SearchResult> results(opt.restarts);
  for (std::size_t start = 0; start < opt.restarts; start += jobs) {
    std::vector<std::future<SearchResult>> batch;
    for (std::size_t r = start; r < std::min(opt.restarts, start + jobs); ++r)
      batch.push_back(std::async(std::launch::async, detail::search_restart, std::cref(arg), opt.seed, r, opt.budget));
    for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].objective > results[best].objective) best = r;
  return results[best];
}

}  // namespace gnst
