// Compares the OpenMP kernels against their serial reference implementations
// on the workloads that dominate runtime: utility evaluation over a coupled
// repressilator, the Monte Carlo oracle, and a bistability scan.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rosdyn/analysis.hpp"
#include "rosdyn/builders.hpp"
#include "rosdyn/dynamics.hpp"
#include "rosdyn/utility.hpp"

using namespace rosdyn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double time_it(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return seconds_since(t0);
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n", name, serial,
              parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run the serial kernel\n");
#endif

  const auto inst = coupling_preset('A', 7);
  const UtilityEngine engine(inst);
  std::vector<double> m(inst.n_bidders(), 1.5);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] += 0.03 * double(i);

  {
    constexpr int reps = 400;
    double sink = 0.0;
    const double ts = time_it([&] {
      for (int r = 0; r < reps; ++r) sink += engine.utilities_serial(m)[0];
    });
    const double tp = time_it([&] {
      for (int r = 0; r < reps; ++r) sink += engine.utilities(m)[0];
    });
    if (sink == 12345.0) std::printf(" ");  // keep the loops observable
    report("utilities (coupled 3x3)", ts, tp);
    const auto a = engine.utilities_serial(m);
    const auto b = engine.utilities(m);
    if (a != b) std::printf("  MISMATCH between serial and parallel utilities!\n");
  }

  {
    const auto item = inst.items.front();
    constexpr std::uint64_t n = 4'000'000;
    McResult rs, rp;
    const double ts =
        time_it([&] { rs = mc_utility_serial(item, inst.bidder_names, m, 1.0, n, 7); });
    const double tp = time_it([&] { rp = mc_utility(item, inst.bidder_names, m, 1.0, n, 7); });
    report("monte carlo oracle (4M)", ts, tp);
    if (rs.estimate != rp.estimate) std::printf("  MISMATCH between MC kernels!\n");
  }

  {
    const auto cycle = build_cycle(4, 7);
    IntegrateOptions opt;
    opt.horizon = 30.0;
    opt.sample_every = 0.1;
    analysis::BistabilityScan scan;
    const double tp =
        time_it([&] { scan = analysis::bistability_scan(cycle, 8, 1.1, 3.0, 5, opt); });
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double ts =
        time_it([&] { scan = analysis::bistability_scan(cycle, 8, 1.1, 3.0, 5, opt); });
    omp_set_num_threads(saved);
#else
    const double ts = tp;
#endif
    report("bistability scan (8 runs)", ts, tp);
  }
  return 0;
}
