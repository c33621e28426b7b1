// Times the serial reference kernels against the OpenMP ones and checks that
// both produce bit-identical grids.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seqepi/estimator.hpp"
#include "seqepi/grid.hpp"
#include "seqepi/prior.hpp"

namespace {

using namespace seqepi;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void bench_size(int cells, int reps) {
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0);

  JointGrid serial_grid = JointGrid::uniform(kDefaultSupportLo, kDefaultR0SupportHi,
                                             cells, kDefaultSupportLo,
                                             kDefaultGammaSupportHi, cells);
  JointGrid parallel_grid = serial_grid;

  auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) detail::fill_prior_cells_serial(serial_grid, spec);
  const double fill_serial = seconds_since(t0) / reps;

  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) detail::fill_prior_cells_parallel(parallel_grid, spec);
  const double fill_parallel = seconds_since(t0) / reps;

  const bool fill_match = same_bits(serial_grid.mass, parallel_grid.mass);

  serial_grid.normalize();
  parallel_grid.normalize();

  const ObservedPair pair{120, 300};
  const std::span<const ObservedPair> pairs(&pair, 1);

  JointGrid su = serial_grid;
  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) {
    su = serial_grid;
    detail::apply_loglik_terms_serial(su, pairs, 1.0);
  }
  const double update_serial = seconds_since(t0) / reps;

  JointGrid pu = parallel_grid;
  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) {
    pu = parallel_grid;
    detail::apply_loglik_terms_parallel(pu, pairs, 1.0);
  }
  const double update_parallel = seconds_since(t0) / reps;

  const bool update_match = same_bits(su.mass, pu.mass);

  std::printf("%6dx%-6d fill %8.3f ms | %8.3f ms | %5.2fx | %s\n", cells, cells,
              fill_serial * 1e3, fill_parallel * 1e3, fill_serial / fill_parallel,
              fill_match ? "bit-identical" : "MISMATCH");
  std::printf("%6dx%-6d update %6.3f ms | %8.3f ms | %5.2fx | %s\n", cells, cells,
              update_serial * 1e3, update_parallel * 1e3,
              update_serial / update_parallel,
              update_match ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; parallel kernels run serially\n");
#endif
  std::printf("%-13s %6s %11s | %11s | %6s |\n", "grid", "kernel", "serial",
              "parallel", "speedup");

  bench_size(200, reps);
  bench_size(400, reps);
  bench_size(800, reps);
  return 0;
}
