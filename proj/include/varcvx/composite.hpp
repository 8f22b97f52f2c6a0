#pragma once

// Composite-format problems phi = phi0 + psi(g(x)) with a smooth outer map
// and an oracle-described convex piece: multiplier solving, the first- and
// second-order qualification conditions, and the full-rank sufficiency check.

#include "varcvx/core.hpp"
#include "varcvx/polyhedral.hpp"

#include <cstdint>

namespace varcvx {

struct SmoothMap {
  int n = 1;
  int m = 1;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;                // m x n
  std::function<Mat(const Vec&, int)> component_hessian;  // n x n for component i
};

// Membership-style description of psi. The structural solvers (qualification
// conditions, sufficiency sweep) need the polyhedral signature; the generic
// membership functions support sampled necessary checks only.
struct PsiOracle {
  int m = 1;
  std::function<ExtValue(const Vec&)> eval;
  std::function<bool(const Vec& z, const Vec& y)> subgrad;
  std::function<bool(const Vec& z, const Vec& u)> singular_subgrad;
  std::function<bool(const Vec& z, const Vec& y, const Vec& v, const Vec& u)> second_order;
  // Extreme perturbations u admissible at (z, y, v), always including 0,
  // with magnitudes capped at cap.
  std::function<std::vector<Vec>(const Vec& z, const Vec& y, const Vec& v, double cap)>
      extreme_u;
  std::optional<PolyhedralSignature> polyhedral;
};

PsiOracle make_polyhedral_psi(const PolyhedralSignature& sig);

struct CompositeProblem {
  ExtendedFn phi0;  // smooth_order 2
  SmoothMap g;
  PsiOracle psi;
};

// sigma_min(grad g) > 1e-8 sigma_max and m <= n; the witness on failure is a
// kernel direction of the transposed Jacobian.
Verdict jacobian_full_rank(const CompositeProblem& cp, const Vec& x);

struct MultiplierSet {
  Vec x;
  Vec v;
  Vec y;          // representative multiplier
  bool unique = true;
  Mat nullspace;  // m x k, columns span the ambiguity when not unique
  double residual = 0.0;
};

// Solves grad g(x)^T y = v - grad phi0(x) and checks y against the psi
// subgradient oracle at g(x). Polyhedral signatures are solved on the active
// slots with inactive components pinned to zero. Errors: Infeasible (residual
// above 1e-6 or membership fails), NonUniqueWithoutFullRank (when
// require_unique and the solution set is affine).
MultiplierSet solve_multipliers(const CompositeProblem& cp, const Vec& x, const Vec& v,
                                bool require_unique = true);

// First-order qualification: no nonzero singular subgradient of psi at g(x)
// lies in ker grad g(x)^T. Exact for polyhedral psi, sampled otherwise.
Verdict foqc_check(const CompositeProblem& cp, const Vec& x);

// Second-order qualification: no nonzero u in the zero-direction graphical
// derivative at (g(x), y) lies in ker grad g(x)^T. Exact for polyhedral psi.
Verdict soqc_check(const CompositeProblem& cp, const Vec& x, const Vec& y);

enum class SuffMode { Pointbased, Neighborhood };

struct SuffConfig {
  SuffMode mode = SuffMode::Pointbased;
  double x_radius = 0.1;
  double v_radius = 0.1;
  int x_samples = 64;
  int w_samples = 64;
  double u_budget = 10.0;
  std::uint64_t seed = 7;
  double stationarity_tol = 1e-8;
};

// Curvature condition <H(x,y) w, w> + <u, grad g(x) w> >= modulus |w|^2 over
// admissible (w, u). Pointbased evaluates at xbar with the multiplier from
// v = 0; neighborhood samples the stationarity graph (polyhedral psi only).
Verdict full_rank_sufficiency(const CompositeProblem& cp, const Vec& xbar, double modulus,
                              const SuffConfig& cfg = {});

}  // namespace varcvx
