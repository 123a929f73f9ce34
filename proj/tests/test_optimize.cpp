#include <random>

#include <gtest/gtest.h>

#include "gnst/optimize.hpp"

using namespace gnst;

namespace {

HardyArgument general(std::vector<int> d, int j = -1) {
  return build_argument(HardyFamily::GeneralizedQudit, Scenario(std::move(d)), j);
}

}  // namespace

TEST(BuildGnstLp, CountsMatchFormulas) {
  auto a = build_gnst_lp<Rational>(general({2, 2, 2}));
  EXPECT_EQ(a.num_cells(), 64u);
  EXPECT_EQ(a.num_vars(), 59u);
  EXPECT_EQ(a.normalization_rows, 8u);
  EXPECT_EQ(a.ns_rows, 48u);
  EXPECT_EQ(a.lp.num_rows(), 56u);

  auto b = build_gnst_lp<double>(general({5, 5, 5, 5}));
  EXPECT_EQ(b.num_cells(), 10000u);
  EXPECT_EQ(b.ns_rows, 4000u);
  EXPECT_EQ(b.normalization_rows, 16u);

  auto c = build_gnst_lp<Rational>(build_argument(HardyFamily::Conventional, Scenario::uniform(2, 2)));
  EXPECT_EQ(c.num_vars(), 13u);
  EXPECT_EQ(c.normalization_rows, 4u);
  EXPECT_EQ(c.ns_rows, 8u);
}

TEST(BuildGnstLp, VariableMapIsConsistent) {
  auto inst = build_gnst_lp<Rational>(general({2, 3, 2}));
  for (std::size_t v = 0; v < inst.num_vars(); ++v) EXPECT_EQ(inst.var_of_cell[inst.cell_of_var[v]], v);
  for (const auto& e : inst.argument.zero_events) EXPECT_EQ(inst.var_of_cell[e.index(inst.argument.scenario)], detail::npos);
}

TEST(OptimizeSuccess, ThreePartiesGiveOneThird) {
  for (int d : {2, 3}) {
    auto r = optimize_success<Rational>(general({d, d, d}));
    EXPECT_EQ(r.q_star, Rational(1, 3)) << "d=" << d;
    EXPECT_TRUE(r.certificate);
  }
}

TEST(OptimizeSuccess, ConventionalGivesOneHalf) {
  for (int d : {2, 3}) {
    auto r = optimize_success<Rational>(build_argument(HardyFamily::Conventional, Scenario::uniform(3, d)));
    EXPECT_EQ(r.q_star, Rational(1, 2)) << "d=" << d;
  }
}

TEST(OptimizeSuccess, BipartiteGivesOneHalf) {
  for (int d : {2, 3}) EXPECT_EQ(optimize_success<Rational>(general({d, d})).q_star, Rational(1, 2));
}

// Value cross-checked with an independent LP solver on the same constraint
// system; it does not follow the 1/3 pattern of three parties.
TEST(OptimizeSuccess, FourPartiesGiveOneQuarter) {
  EXPECT_EQ(optimize_success<Rational>(general({2, 2, 2, 2})).q_star, Rational(1, 4));
  EXPECT_EQ(optimize_success<Rational>(general({2, 2, 2, 2}), {}, false).q_star, Rational(1, 4));
}

TEST(OptimizeSuccess, SymmetryReductionMatchesFullSolve) {
  for (auto arg : {general({2, 2, 2}), general({3, 3, 3}), general({2, 3, 2}), general({2, 2, 2}, 0),
                   build_argument(HardyFamily::Conventional, Scenario::uniform(3, 2)),
                   build_argument(HardyFamily::Conventional, Scenario({2, 3}))}) {
    auto sym = optimize_success<Rational>(arg, {}, true);
    auto full = optimize_success<Rational>(arg, {}, false);
    EXPECT_EQ(sym.q_star, full.q_star) << describe(arg);
    EXPECT_TRUE(full.reduction.empty());
    EXPECT_TRUE(sym.certificate);
  }
  // The reduction kicks in where the argument has symmetries.
  EXPECT_FALSE(optimize_success<Rational>(general({3, 3, 3})).reduction.empty());
}

TEST(OptimizeSuccess, FloatAgreesWithExact) {
  for (auto arg : {general({2, 2, 2}), general({3, 3, 3}), general({2, 3, 2}), general({2, 2, 2, 2}),
                   build_argument(HardyFamily::Conventional, Scenario::uniform(3, 3))}) {
    auto e = optimize_success<Rational>(arg);
    auto f = optimize_success<double>(arg);
    auto f_full = optimize_success<double>(arg, {}, false);
    EXPECT_NEAR(f.q_star, e.q_star.get_d(), 1e-6) << describe(arg);
    EXPECT_NEAR(f_full.q_star, e.q_star.get_d(), 1e-6) << describe(arg);
  }
}

TEST(OptimizeSuccess, OptimalBehaviorRoundTrips) {
  auto arg = general({2, 3, 2});
  auto r = optimize_success<Rational>(arg);
  EXPECT_TRUE(validate_behavior(r.optimal_behavior).ok());
  auto ev = evaluate_argument(arg, r.optimal_behavior);
  EXPECT_EQ(ev.q_value, r.q_star);
  EXPECT_TRUE(ev.zero_violations.empty());
  auto inst = build_gnst_lp<Rational>(arg);
  std::vector<Rational> x;
  for (std::size_t cell : inst.cell_of_var) x.push_back(r.optimal_behavior[cell]);
  auto ax = detail::row_activity(inst.lp, x);
  for (std::size_t i = 0; i < ax.size(); ++i) EXPECT_EQ(ax[i], inst.lp.equalities()[i].rhs);
}

TEST(OptimizeSuccess, InvariantUnderFixedJ) {
  for (auto d : {std::vector<int>{2, 2, 2}, std::vector<int>{3, 3, 3}, std::vector<int>{2, 2, 2, 2}}) {
    const Rational ref = optimize_success<Rational>(general(d, 0)).q_star;
    for (int j = 1; j < static_cast<int>(d.size()); ++j)
      EXPECT_EQ(optimize_success<Rational>(general(d, j)).q_star, ref) << "j=" << j;
  }
}

TEST(OptimizeSuccess, InvariantUnderRelabeling) {
  auto arg = general({2, 3, 2});
  const Rational ref = optimize_success<Rational>(arg).q_star;
  for (auto perm : {std::vector<int>{1, 0, 2}, std::vector<int>{2, 0, 1}, std::vector<int>{0, 2, 1}}) {
    auto moved = permute_argument(arg, perm);
    EXPECT_EQ(optimize_success<Rational>(moved).q_star, ref);
    EXPECT_EQ(optimize_success<Rational>(moved, {}, false).q_star, ref);
  }
}

TEST(OptimizeSuccess, ExtraZerosNeverIncreaseQ) {
  auto arg = general({2, 2, 2});
  const Rational base = optimize_success<Rational>(arg).q_star;
  const Scenario& sc = arg.scenario;
  std::mt19937 rng(17);
  std::uniform_int_distribution<std::size_t> cell(0, sc.table_size() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto more = arg;
    std::size_t k = cell(rng);
    JointEvent e{sc.settings_at(k / sc.cells_per_context()), sc.outcomes_at(k % sc.cells_per_context())};
    if (e == arg.positive_event || std::find(arg.zero_events.begin(), arg.zero_events.end(), e) != arg.zero_events.end())
      continue;
    more.zero_events.push_back(e);
    EXPECT_LE(optimize_success<Rational>(more).q_star, base);
  }
}

TEST(OptimizeSuccess, InfeasibleArgumentIsReported) {
  // Pinning the all-u context onto the positive cell makes both u marginals
  // deterministic, and the bipartite zeros then contradict each other.
  auto arg = general({2, 2});
  const Scenario& sc = arg.scenario;
  for (std::size_t k = 1; k < sc.cells_per_context(); ++k)
    arg.zero_events.push_back({sc.settings_at(0), sc.outcomes_at(k)});
  EXPECT_THROW(optimize_success<Rational>(arg), SolverError);
  EXPECT_THROW(optimize_success<double>(arg), SolverError);
}

TEST(SampleHardyBehavior, MeetsQMinimumAndConstraints) {
  auto arg = general({2, 2, 2});
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> w(-3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Rational> weights(arg.scenario.table_size());
    for (auto& x : weights) x = w(rng);
    auto b = sample_hardy_behavior<Rational>(arg, weights, Rational(1, 100));
    EXPECT_TRUE(validate_behavior(b).ok());
    auto ev = evaluate_argument(arg, b);
    EXPECT_GE(ev.q_value, Rational(1, 100));
    EXPECT_TRUE(ev.zero_violations.empty());
  }
}

TEST(DefaultArithmetic, ExactUpTo1500Cells) {
  EXPECT_EQ(default_arithmetic(Scenario::uniform(3, 5)), Arithmetic::exact);  // 1000 cells
  EXPECT_EQ(default_arithmetic(Scenario::uniform(4, 3)), Arithmetic::exact);  // 1296 cells
  EXPECT_EQ(default_arithmetic(Scenario::uniform(4, 4)), Arithmetic::floating);
}
