// Solves a small instance, perturbs the schedule and recovers it both ways.

#include <iostream>

#include "lexsched/lexsched.hpp"

using namespace lexsched;

int main() {
  auto inst = Instance::from_times(4, {12, 2, 2, 2, 2, 2, 2});
  auto lexopt = solve_lexopt(inst);
  std::cout << "LexOpt vector " << lexopt.vector << " after " << lexopt.nodes << " nodes\n";
  std::cout << "weighting     " << weighting_method(inst).vector << "\n";

  auto sc = apply_perturbations(lexopt.schedule, {Perturbation::cancel("j1"), Perturbation::arrive("x1", 5)});
  const Time opt = optimal_makespan(*sc.next()).value;
  auto binding = binding_recovery(sc);
  auto flexible = flexible_recovery(sc, 2);
  std::cout << "optimum " << opt << ", binding " << makespan(binding) << ", flexible(g=2) "
            << makespan(flexible.schedule) << " with " << flexible.migrations << " migrations\n";

  auto check = verify_guarantee(sc, binding, opt, Rational(2));
  std::cout << "ratio " << check.ratio << " <= " << check.bound << ": " << (check.holds ? "yes" : "no") << "\n";
}
