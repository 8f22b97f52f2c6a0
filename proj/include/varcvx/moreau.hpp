#pragma once

// Proximal mapping, Moreau envelope, envelope gradients, prox-boundedness
// probing, prox-regularity measurement, and the quadratic-shift envelope
// identities.

#include "varcvx/core.hpp"
#include "varcvx/kernels.hpp"
#include "varcvx/oracles.hpp"

namespace varcvx {

struct EnvelopeOptions {
  // Analytic proximal mapping for the handle's scale; validated against the
  // grid solver at construction when present.
  std::function<Vec(const Vec&)> analytic_prox;
  double box_halfwidth = 2.0;  // grid box around the query point
  int points_per_axis = 401;   // odd, so the query point is a node
  int refine_rounds = 4;
  double refine_shrink = 0.2;
  int max_expansions = 6;  // box doublings when the argmin sits on the edge
  bool validate_analytic = true;
  long max_nodes = 100000000;
};

struct EnvelopeHandle {
  ExtendedFn base;
  double lambda = 0.5;
  EnvelopeOptions opts;
};

// Validates lambda > 0 and, when an analytic prox is supplied, that it matches
// the grid solver within 1e-5 on axis probe points. Errors: InvalidSpec,
// AnalyticProxMismatch.
EnvelopeHandle make_envelope(ExtendedFn base, double lambda, EnvelopeOptions opts = {});

struct ProxResult {
  Vec point;
  double base_value = 0.0;      // phi at the prox point
  double envelope_value = 0.0;  // phi(point) + |point - x|^2 / (2 lambda)
};

// Proximal point of the handle's base at x. The grid path doubles the box
// while the argmin clings to the edge. Errors: AllInfinite, UnboundedBelow.
ProxResult prox(const EnvelopeHandle& h, const Vec& x,
                kernels::Exec exec = kernels::default_exec());

double envelope(const EnvelopeHandle& h, const Vec& x,
                kernels::Exec exec = kernels::default_exec());

// (x - prox(x)) / lambda. Multivaluedness is probed by re-solving from
// jittered grids (or jittered queries on the analytic path); disagreement
// beyond 1e-4 raises ProxMultivalued.
Vec envelope_gradient(const EnvelopeHandle& h, const Vec& x,
                      kernels::Exec exec = kernels::default_exec());

// Looks for evidence that phi(y) + |y - center|^2/(2 lambda) is unbounded
// below along expanding boxes. Fails is certified by the witness ray of
// strictly decreasing values; holds only means no evidence was found.
Verdict is_prox_bounded(const ExtendedFn& f, double lambda, const NeighborhoodSpec& probe);

struct ShiftedFn {
  ExtendedFn fn;  // base - (sigma/2)|x - center|^2, oracles rewrapped exactly
  double sigma = 0.0;
  Vec center;
};

ShiftedFn quadratic_shift(const ExtendedFn& f, double sigma, const Vec& center);

struct ShiftResidual {
  double forward = 0.0;  // envelope of the shift vs rescaled base envelope
  double inverse = 0.0;  // base envelope vs rescaled shift envelope
};

// Max absolute residual of both shift-envelope identities over test_points.
// Requires 0 < gamma < 1/|sigma| (any gamma > 0 when sigma == 0); outside
// that range raises GammaOutOfRange.
ShiftResidual shift_envelope_residual(const ExtendedFn& f, double sigma, const Vec& center,
                                      double gamma, const std::vector<Vec>& test_points,
                                      const EnvelopeOptions& opts = {},
                                      kernels::Exec exec = kernels::default_exec());

struct ProxRegularityConfig {
  int x_samples = 201;
  double bisect_tol = 1e-3;
  double value_tol = 1e-9;
};

// Smallest r in [0, r_max] such that
//   phi(x) >= phi(u) + <v, x-u> - (r/2)|x-u|^2
// over sampled x in B_eps(xbar) and the supplied graph triples; located by
// bisection to bisect_tol. Fails when even r_max leaves a violating triple.
// The graph's own u points are reused as test x points. Errors:
// EmptyGraphSample.
struct GraphTriple {
  Vec x;
  Vec v;
  double fx = 0.0;
};

struct SubgradGraphSample {
  std::vector<GraphTriple> points;
  RefPair ref;
  double x_radius = 0.5;
  double v_radius = 0.5;
  double epsilon = 0.5;
};

Verdict check_prox_regularity(const ExtendedFn& f, const RefPair& p, double eps, double r_max,
                              const SubgradGraphSample& graph,
                              const ProxRegularityConfig& cfg = {});

// Strong convexity of the envelope on a region around xbar + lambda vbar,
// delegated to the sampled interpolation inequality. region.sample_count <= 0
// selects the default region (radius 0.4 lambda, 13 grid points per axis).
Verdict check_envelope_local_convexity(const EnvelopeHandle& h, const RefPair& p, double modulus,
                                       NeighborhoodSpec region = {},
                                       long triple_budget = 20000,
                                       kernels::Exec exec = kernels::default_exec());

}  // namespace varcvx
