// Maximizes the Hardy success probability over no-signaling behaviors for a
// few scenarios, then asks whether each optimum admits a bipartite hybrid
// model.
//
//   observation_demo            N = 2..4, d = 2..3
//   observation_demo 3 5        one scenario, exact arithmetic if small enough

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "gnst/locality.hpp"
#include "gnst/optimize.hpp"

using namespace gnst;

namespace {

void run(int n, int d) {
  auto arg = build_argument(HardyFamily::GeneralizedQudit, Scenario::uniform(n, d));
  if (default_arithmetic(arg.scenario) == Arithmetic::floating) {
    auto r = optimize_success<double>(arg);
    std::printf("N=%d d=%d  q* = %.10f  (float, %.1f ms)\n", n, d, r.q_star, r.wall_ms);
    return;
  }
  auto r = optimize_success<Rational>(arg);
  std::printf("N=%d d=%d  q* = %s  (exact, %.1f ms)", n, d, format_rational(r.q_star).c_str(), r.wall_ms);
  if (n == 3) {
    auto v = ns2_membership(r.optimal_behavior);
    std::printf("  optimum is %s", locality_status_name(v.status).data());
  }
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc == 3) {
      run(std::atoi(argv[1]), std::atoi(argv[2]));
      return 0;
    }
    for (int n = 2; n <= 4; ++n)
      for (int d = 2; d <= 3; ++d) run(n, d);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
