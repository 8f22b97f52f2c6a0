// Timing comparison of the serial reference kernels against the OpenMP path,
// on raw scans and on a realistic envelope workload. Prints one table row per
// case; no pass/fail, the correctness equivalence lives in the test suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "varcvx/gallery.hpp"
#include "varcvx/kernels.hpp"
#include "varcvx/moreau.hpp"

namespace {

using varcvx::kernels::Exec;

double time_of(const std::function<void()>& body, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
         reps;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.4f ms %10.4f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
              parallel > 0.0 ? serial / parallel : 0.0);
}

}  // namespace

int main() {
  const std::ptrdiff_t n = 4'000'000;
  auto value = [](std::ptrdiff_t i) {
    const double x = static_cast<double>(i) * 1e-6 - 2.0;
    return std::cos(3.0 * x) + 0.1 * x * x;
  };
  auto pred = [&](std::ptrdiff_t i) { return value(i) < -0.985; };

  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  double s = time_of([&] { varcvx::kernels::argmin(n, value, Exec::Serial); }, 3);
  double p = time_of([&] { varcvx::kernels::argmin(n, value, Exec::Parallel); }, 3);
  row("argmin 4e6", s, p);

  s = time_of([&] { varcvx::kernels::first_true(n, pred, Exec::Serial); }, 3);
  p = time_of([&] { varcvx::kernels::first_true(n, pred, Exec::Parallel); }, 3);
  row("first_true 4e6", s, p);

  std::vector<double> out(static_cast<std::size_t>(n));
  s = time_of([&] { varcvx::kernels::map_values(n, value, out.data(), Exec::Serial); }, 3);
  p = time_of([&] { varcvx::kernels::map_values(n, value, out.data(), Exec::Parallel); }, 3);
  row("map_values 4e6", s, p);

  // envelope of the sawtooth counterexample: grid prox per query, no
  // analytic shortcut, so the argmin kernel dominates
  const varcvx::gallery::GalleryEntry dl = varcvx::gallery::get("dl-counterexample");
  varcvx::EnvelopeOptions eo;
  eo.points_per_axis = 2001;
  const varcvx::EnvelopeHandle h = varcvx::make_envelope(dl.fn, 0.25, eo);
  varcvx::Vec q(1);
  q[0] = 0.3;
  s = time_of([&] { varcvx::envelope(h, q, Exec::Serial); }, 3);
  p = time_of([&] { varcvx::envelope(h, q, Exec::Parallel); }, 3);
  row("envelope grid 2001x4", s, p);

  return 0;
}
