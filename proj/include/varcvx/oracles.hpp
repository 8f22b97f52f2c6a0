#pragma once

// Independent numerical oracles: refining grid minimization, finite-difference
// gradients, symmetric eigenvalue reports, and the sampled strong-convexity
// inequality. Everything downstream is validated against these.

#include "varcvx/core.hpp"
#include "varcvx/kernels.hpp"

namespace varcvx {

// Refining box grid. Each round recenters at the incumbent argmin and shrinks
// the half-widths by refine_shrink, clamped to the original box. The incumbent
// is carried across rounds so the value is non-increasing by construction.
struct GridSpec {
  Vec lower;
  Vec upper;
  int points_per_axis = 401;  // >= 3, odd keeps the round center on the grid
  int refine_rounds = 3;
  double refine_shrink = 0.2;   // in (0,1)
  long max_nodes = 100000000;  // per-round budget, GridBudgetExceeded beyond
};

struct GridArgminResult {
  Vec point;
  double value = 0.0;
  long evals = 0;
  bool on_boundary = false;  // argmin within one spacing of the original box edge
};

// Global minimum of h over the box by exhaustive scan plus refinement.
// Ties break to the lexicographically smallest grid point. Errors:
// AllInfinite when the first round sees no finite value, GridBudgetExceeded.
GridArgminResult grid_argmin(const std::function<ExtValue(const Vec&)>& h, const GridSpec& spec,
                             kernels::Exec exec = kernels::default_exec());

// Central-difference gradient. Errors: StencilLeavesDomain when a stencil
// point evaluates to +inf.
Vec fd_gradient(const std::function<ExtValue(const Vec&)>& f, const Vec& x, double h = 1e-5);

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefinite,
  Indefinite,
  NegativeDefinite,
  NegativeSemidefinite,
};

std::string to_string(Definiteness d);

struct EigenReport {
  Vec eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  Definiteness definiteness = Definiteness::Indefinite;
};

// Eigenvalues of the symmetrized matrix (M + M^T)/2 with classification at
// tolerance 1e-10 relative to the largest eigenvalue magnitude. Errors:
// NonSquare.
EigenReport symmetric_eigen(const Mat& M);

// Checks f((1-t)x + t y) <= (1-t)f(x) + t f(y) - (modulus/2) t(1-t)|x-y|^2
// on sampled pairs from region with t in {0.1,...,0.9}, up to triple_budget
// triples in deterministic order. Pairs with an infinite endpoint satisfy the
// inequality trivially and are skipped; an infinite midpoint against a finite
// right-hand side is a violation. Holds means no violation at the stated
// sampling. The witness on failure replays: (x, y, t, lhs, rhs).
Verdict sampled_convexity(const std::function<ExtValue(const Vec&)>& f,
                          const NeighborhoodSpec& region, double modulus,
                          long triple_budget = 20000,
                          kernels::Exec exec = kernels::default_exec());

}  // namespace varcvx
