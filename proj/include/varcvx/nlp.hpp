#pragma once

// Nonlinear programs with s smooth inequalities and m - s smooth equalities:
// explicit KKT machinery, constraint qualifications, critical subspaces, the
// pointbased strong-sufficiency test with its modulus/Lipschitz pairing, the
// sampled neighborhood sufficiency check, and a tilt-response probe that
// localizes argmin shifts under small linear perturbations.

#include "varcvx/composite.hpp"
#include "varcvx/core.hpp"
#include "varcvx/oracles.hpp"

#include <cstdint>

namespace varcvx {

struct NlpSmooth {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

// phi[0] is the objective; phi[1..m] the constraint functions, inequalities
// phi_i <= 0 for i in [1, s], equalities phi_i = 0 for i in (s, m].
struct NlpProblem {
  int n = 1;
  int s = 0;
  int m = 0;
  std::vector<NlpSmooth> phi;  // size m + 1
  std::string name;
};

void validate_problem(const NlpProblem& p);

Vec constraint_values(const NlpProblem& p, const Vec& x);
Mat constraint_jacobian(const NlpProblem& p, const Vec& x);  // m x n
Mat lagrangian_hessian(const NlpProblem& p, const Vec& x, const Vec& y);
Vec lagrangian_gradient(const NlpProblem& p, const Vec& x, const Vec& y);

struct ActiveSets {
  std::vector<int> active;       // 0-based inequality constraint ids with phi_i(x) ~ 0
  std::vector<int> active_plus;  // subset of active with y_i > 1e-9
  std::vector<int> equalities;   // always s..m-1
};

// Requires x feasible within the activity band; raises Infeasible otherwise.
ActiveSets active_sets(const NlpProblem& p, const Vec& x, const Vec& y);

struct CriticalSubspace {
  Mat basis;                   // n x k, orthonormal; k = 0 means the subspace is {0}
  std::vector<int> rows_used;  // constraint ids whose gradients were annihilated
};

// Null space of the gradients indexed by active_plus and the equalities.
CriticalSubspace critical_subspace(const NlpProblem& p, const Vec& x, const Vec& y);

// Linear independence of the gradients of active and equality constraints,
// decided by the singular value ratio of the stacked gradient matrix.
Verdict check_licq(const NlpProblem& p, const Vec& x);

// Positive linear independence: no nonzero combination with nonnegative
// coefficients on active inequalities vanishes. Decided by convex-position
// analysis of the gradients projected off the equality span.
Verdict check_plicq(const NlpProblem& p, const Vec& x);

struct KktPoint {
  Vec x;
  Vec y;  // size m
  double residual = 0.0;
};

// Multiplier recovery for v in grad phi0(x) + grad g(x)^T N(g(x)): active-set
// least squares. Errors: Infeasible (x infeasible, stationarity residual above
// 1e-6, or a negative inequality multiplier), NonUnique (LICQ fails at x).
KktPoint kkt_solve(const NlpProblem& p, const Vec& x, const Vec& v);

struct SuffReport {
  Verdict verdict;
  double sigma = 0.0;  // certified curvature on the critical subspace
  double kappa = 0.0;  // reciprocal Lipschitz estimate, kappa * sigma = 1
};

// Reduced Lagrangian Hessian on the critical subspace at (x, y): positive
// definite (min eigenvalue above 1e-8) iff the strong condition holds for
// some modulus. A zero-dimensional subspace is vacuous: sigma = +inf is
// reported as sigma = infinity sentinel via metrics, kappa = 0.
SuffReport pointbased_strong_sufficiency(const NlpProblem& p, const KktPoint& k);

struct NbhdConfig {
  double x_radius = 0.1;
  double v_radius = 0.1;
  int x_samples = 64;
  int y_levels = 3;
  std::uint64_t seed = 11;
  double margin = 0.01;  // relative slack under the modulus before flagging
  long max_combos = 20000;
};

// Samples stationarity-graph points near (xbar, 0): feasible x, nonnegative
// multiplier grids on active slots, v = lagrangian gradient kept within the
// v window. Each kept point must satisfy the reduced-Hessian bound.
Verdict neighborhood_sufficiency(const NlpProblem& p, const KktPoint& ref, double modulus,
                                 const NbhdConfig& cfg = {});

struct TiltConfig {
  double gamma = 0.25;        // localization radius for the argmin
  double tilt_radius = 0.05;  // magnitude of sampled tilt vectors
  int tilt_samples = 12;
  int points_per_axis = 401;
  int refine_rounds = 5;
  std::uint64_t seed = 3;
  double factor = 1.5;  // acceptance band around the predicted Lipschitz rate
};

// Minimizes phi0 - <v, .> over the feasible set intersected with a ball at
// xbar for sampled tilts v, then compares the observed argmin displacement
// rate against the pointbased prediction kappa.
Verdict tilt_stability_probe(const NlpProblem& p, const KktPoint& k,
                             const TiltConfig& cfg = {},
                             kernels::Exec exec = kernels::default_exec());

// Bridges to the composite machinery: constraints become the inner map, the
// constraint cone becomes the polyhedral psi. Requires m >= 1.
CompositeProblem nlp_to_composite(const NlpProblem& p);

// Inverse bridge for problems whose psi carries a polyhedral signature.
NlpProblem composite_to_nlp(const CompositeProblem& cp);

}  // namespace varcvx
