#include "varcvx/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#ifdef VARCVX_HAVE_OPENMP
#include <omp.h>
#endif

namespace varcvx::kernels {

namespace {

Exec g_default =
#ifdef VARCVX_HAVE_OPENMP
    Exec::Parallel;
#else
    Exec::Serial;
#endif

bool better(double v, std::ptrdiff_t i, double best_v, std::ptrdiff_t best_i) {
  return v < best_v || (v == best_v && i < best_i);
}

}  // namespace

Exec default_exec() { return g_default; }

void set_default_exec(Exec e) {
#ifndef VARCVX_HAVE_OPENMP
  e = Exec::Serial;
#endif
  g_default = e;
}

std::optional<MinResult> argmin(std::ptrdiff_t n,
                                const std::function<double(std::ptrdiff_t)>& value,
                                Exec exec) {
  if (n <= 0) return std::nullopt;
  double best_v = std::numeric_limits<double>::infinity();
  std::ptrdiff_t best_i = n;
#ifdef VARCVX_HAVE_OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      double loc_v = std::numeric_limits<double>::infinity();
      std::ptrdiff_t loc_i = n;
#pragma omp for nowait
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double v = value(i);
        if (std::isfinite(v) && better(v, i, loc_v, loc_i)) {
          loc_v = v;
          loc_i = i;
        }
      }
#pragma omp critical(varcvx_argmin)
      {
        if (loc_i < n && better(loc_v, loc_i, best_v, best_i)) {
          best_v = loc_v;
          best_i = loc_i;
        }
      }
    }
    if (best_i == n) return std::nullopt;
    return MinResult{best_i, best_v};
  }
#else
  (void)exec;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double v = value(i);
    if (std::isfinite(v) && better(v, i, best_v, best_i)) {
      best_v = v;
      best_i = i;
    }
  }
  if (best_i == n) return std::nullopt;
  return MinResult{best_i, best_v};
}

std::optional<std::ptrdiff_t> first_true(std::ptrdiff_t n,
                                         const std::function<bool(std::ptrdiff_t)>& pred,
                                         Exec exec) {
  if (n <= 0) return std::nullopt;
#ifdef VARCVX_HAVE_OPENMP
  if (exec == Exec::Parallel) {
    std::atomic<std::ptrdiff_t> best(n);
    constexpr std::ptrdiff_t kBlock = 2048;
    const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::ptrdiff_t lo = b * kBlock;
      if (lo >= best.load(std::memory_order_relaxed)) continue;
      const std::ptrdiff_t hi = std::min(n, lo + kBlock);
      for (std::ptrdiff_t i = lo; i < hi; ++i) {
        if (i >= best.load(std::memory_order_relaxed)) break;
        if (pred(i)) {
          std::ptrdiff_t cur = best.load(std::memory_order_relaxed);
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
          break;
        }
      }
    }
    const std::ptrdiff_t r = best.load();
    if (r == n) return std::nullopt;
    return r;
  }
#else
  (void)exec;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (pred(i)) return i;
  return std::nullopt;
}

void map_values(std::ptrdiff_t n, const std::function<double(std::ptrdiff_t)>& value,
                double* out, Exec exec) {
#ifdef VARCVX_HAVE_OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = value(i);
    return;
  }
#else
  (void)exec;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = value(i);
}

}  // namespace varcvx::kernels
