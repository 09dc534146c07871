// Serial vs OpenMP kernels: mode Gram accumulation and polynomial filtering.
// Usage: bench_kernels [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "prodgraph/graphs.hpp"
#include "prodgraph/kernels.hpp"

using namespace prodgraph;

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;

  const Index T = 10000;
  const std::vector<Index> extents{10, 15};  // Q fastest, then P
  Matrix X(150, T);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
  const Matrix W = graphs::erdos_renyi(150, 0.3, 11).weights();
  const std::vector<double> h{1.0, 0.5};

  std::printf("threads %d, N=150, T=%ld\n", kernels::max_threads(), static_cast<long>(T));
  std::printf("%-22s %12s %12s %8s %10s\n", "kernel", "serial_s", "openmp_s", "speedup", "max_diff");
  for (Index axis = 0; axis < 2; ++axis) {
    Matrix a, b;
    const double ts = best_of(reps, [&] { a = kernels::mode_gram_serial(X, extents, axis); });
    const double tp = best_of(reps, [&] { b = kernels::mode_gram_parallel(X, extents, axis); });
    std::printf("mode_gram axis %-8ld %12.4f %12.4f %8.2f %10.2e\n", static_cast<long>(axis), ts, tp, ts / tp,
                (a - b).cwiseAbs().maxCoeff());
  }
  Matrix a, b;
  const double ts = best_of(reps, [&] { a = kernels::filter_serial(W, h, X); });
  const double tp = best_of(reps, [&] { b = kernels::filter_parallel(W, h, X); });
  std::printf("%-22s %12.4f %12.4f %8.2f %10.2e\n", "filter L=2", ts, tp, ts / tp, (a - b).cwiseAbs().maxCoeff());
}
