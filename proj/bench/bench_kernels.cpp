// Serial vs OpenMP timings for the parallel kernels.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "actsense/cmdp_lp.hpp"
#include "actsense/dp.hpp"
#include "actsense/stationary.hpp"

using namespace actsense;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s serial %9.3f ms  openmp %9.3f ms  speedup %5.2fx\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int capacity = argc > 1 ? std::atoi(argv[1]) : 60;
  SensingModel m = default_model();
  m.space = StateSpace(m.num_activities(), capacity);
  const Problem p(m);
  std::printf("%zu states, %d threads\n", p.num_states(), omp_get_max_threads());

  report("build_kernel", best_of(5, [&] { serial::build_kernel(m); }), best_of(5, [&] { build_kernel(m); }));
  report("value_iteration", best_of(3, [&] { serial::value_iteration(p.mdp(), 0.3, 0.99); }),
         best_of(3, [&] { value_iteration(p.mdp(), 0.3, 0.99); }));
  const Policy pi = Policy::constant(p.num_states(), 0.3);
  report("stationary_distribution", best_of(3, [&] { serial::stationary_distribution(p.mdp(), pi); }),
         best_of(3, [&] { stationary_distribution(p.mdp(), pi); }));
  return 0;
}
