#pragma once

// Data-parallel scan kernels used by the grid solver and the sampled checkers.
// Every kernel has a serial reference path and an OpenMP path; both reduce by
// (value, index) or by minimum index, so results are identical regardless of
// thread count and the serial path stays the testing reference.

#include <cstddef>
#include <functional>
#include <optional>

namespace varcvx::kernels {

enum class Exec { Serial, Parallel };

// Parallel when built with OpenMP, Serial otherwise; settable for benchmarks
// and for forcing reproducibility experiments from the CLI.
Exec default_exec();
void set_default_exec(Exec e);

struct MinResult {
  std::ptrdiff_t index = -1;
  double value = 0.0;
};

// Index of the smallest finite value; ties break to the smallest index.
// Returns nullopt when every value is +inf or NaN-free input is empty.
std::optional<MinResult> argmin(std::ptrdiff_t n,
                                const std::function<double(std::ptrdiff_t)>& value,
                                Exec exec);

// Smallest index where pred is true, nullopt when none. The parallel path
// scans in blocks and prunes blocks past the best hit.
std::optional<std::ptrdiff_t> first_true(std::ptrdiff_t n,
                                         const std::function<bool(std::ptrdiff_t)>& pred,
                                         Exec exec);

// Elementwise fill out[i] = value(i) for batch evaluations (envelope scans).
void map_values(std::ptrdiff_t n, const std::function<double(std::ptrdiff_t)>& value,
                double* out, Exec exec);

}  // namespace varcvx::kernels
