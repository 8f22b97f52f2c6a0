#include "varcvx/moreau.hpp"

#include <algorithm>
#include <cmath>

namespace varcvx {

namespace {

std::function<ExtValue(const Vec&)> prox_objective(const ExtendedFn& base, double lambda,
                                                   const Vec& x) {
  return [&base, lambda, x](const Vec& y) {
    return base.eval(y) + ExtValue::finite((y - x).squaredNorm() / (2.0 * lambda));
  };
}

GridSpec grid_around(const Vec& x, double halfwidth, const EnvelopeOptions& o) {
  GridSpec g;
  g.lower = x.array() - halfwidth;
  g.upper = x.array() + halfwidth;
  g.points_per_axis = o.points_per_axis;
  g.refine_rounds = o.refine_rounds;
  g.refine_shrink = o.refine_shrink;
  g.max_nodes = o.max_nodes;
  return g;
}

// Grid prox with box doubling while the argmin clings to the edge. A run of
// strictly decreasing edge minima is the unboundedness certificate.
GridArgminResult grid_prox(const EnvelopeHandle& h, const Vec& x, kernels::Exec exec,
                           double box_shift = 0.0) {
  auto obj = prox_objective(h.base, h.lambda, x);
  double w = h.opts.box_halfwidth;
  GridArgminResult r;
  double prev = std::numeric_limits<double>::infinity();
  int decreasing = 0;
  for (int k = 0;; ++k) {
    GridSpec g = grid_around(x, w, h.opts);
    if (box_shift != 0.0) {
      g.lower.array() += box_shift;
      g.upper.array() += box_shift;
    }
    r = grid_argmin(obj, g, exec);
    if (!r.on_boundary) return r;
    if (r.value < prev - 1e-9 * (1.0 + std::abs(prev))) ++decreasing;
    prev = r.value;
    if (k == h.opts.max_expansions) break;
    w *= 2.0;
  }
  if (decreasing >= h.opts.max_expansions)
    raise_error("UnboundedBelow", "prox objective keeps decreasing beyond every box");
  return r;  // boundary argmin with stalled value, accept as the minimizer
}

}  // namespace

EnvelopeHandle make_envelope(ExtendedFn base, double lambda, EnvelopeOptions opts) {
  if (!(lambda > 0.0)) raise_error("InvalidSpec", "lambda must be positive");
  if (opts.points_per_axis < 3 || opts.points_per_axis % 2 == 0)
    raise_error("InvalidSpec", "points_per_axis must be odd and at least 3");
  EnvelopeHandle h{std::move(base), lambda, std::move(opts)};
  if (h.opts.analytic_prox && h.opts.validate_analytic) {
    EnvelopeHandle probe = h;
    probe.opts.analytic_prox = nullptr;
    probe.opts.refine_rounds = std::max(probe.opts.refine_rounds, 6);
    const double w = h.opts.box_halfwidth;
    std::vector<Vec> pts{Vec::Zero(h.base.dim)};
    for (int a = 0; a < h.base.dim; ++a) {
      for (double t : {-0.9 * w, -0.45 * w, 0.45 * w, 0.9 * w}) {
        Vec p = Vec::Zero(h.base.dim);
        p[a] = t;
        pts.push_back(p);
      }
    }
    for (const auto& x : pts) {
      const Vec pa = h.opts.analytic_prox(x);
      const GridArgminResult pg = grid_prox(probe, x, kernels::default_exec());
      // Compare envelope values, and points only away from ties: at a tie the
      // two branches have equal objective and either point is a valid prox.
      const double ea =
          h.base.eval(pa).finite_value() + (pa - x).squaredNorm() / (2.0 * lambda);
      if (std::abs(ea - pg.value) > 1e-5 * (1.0 + std::abs(pg.value)) ||
          ((pa - pg.point).lpNorm<Eigen::Infinity>() > 1e-5 &&
           std::abs(ea - pg.value) > 2e-6 * (1.0 + std::abs(pg.value))))
        raise_error("AnalyticProxMismatch",
                    "analytic prox disagrees with the grid solver at a probe point");
    }
  }
  return h;
}

ProxResult prox(const EnvelopeHandle& h, const Vec& x, kernels::Exec exec) {
  if (x.size() != h.base.dim) raise_error("DimensionMismatch", "prox query dimension");
  ProxResult out;
  if (h.opts.analytic_prox) {
    out.point = h.opts.analytic_prox(x);
    out.base_value = h.base.eval(out.point).finite_value();
  } else {
    const GridArgminResult r = grid_prox(h, x, exec);
    out.point = r.point;
    out.base_value = h.base.eval(r.point).finite_value();
  }
  out.envelope_value =
      out.base_value + (out.point - x).squaredNorm() / (2.0 * h.lambda);
  return out;
}

double envelope(const EnvelopeHandle& h, const Vec& x, kernels::Exec exec) {
  return prox(h, x, exec).envelope_value;
}

Vec envelope_gradient(const EnvelopeHandle& h, const Vec& x, kernels::Exec exec) {
  Vec p;
  if (h.opts.analytic_prox) {
    p = h.opts.analytic_prox(x);
    const double dq = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
    const Vec ones = Vec::Ones(x.size());
    const Vec pp = h.opts.analytic_prox(x + dq * ones);
    const Vec pm = h.opts.analytic_prox(x - dq * ones);
    if ((pp - pm).lpNorm<Eigen::Infinity>() > 1e-4 + 100.0 * dq)
      raise_error("ProxMultivalued", "prox jumps across the query point");
  } else {
    const double spacing =
        2.0 * h.opts.box_halfwidth / (h.opts.points_per_axis - 1);
    const GridArgminResult r1 = grid_prox(h, x, exec, spacing / 3.0);
    const GridArgminResult r2 = grid_prox(h, x, exec, -spacing / 3.0);
    if ((r1.point - r2.point).lpNorm<Eigen::Infinity>() > 1e-4)
      raise_error("ProxMultivalued", "jittered grids disagree on the prox point");
    p = r1.value <= r2.value ? r1.point : r2.point;
  }
  return (x - p) / h.lambda;
}

Verdict is_prox_bounded(const ExtendedFn& f, double lambda, const NeighborhoodSpec& probe) {
  if (!(lambda > 0.0)) raise_error("InvalidSpec", "lambda must be positive");
  auto obj = prox_objective(f, lambda, probe.center);
  std::vector<double> mins;
  std::vector<Vec> args;
  for (int k = 0; k < 8; ++k) {
    NeighborhoodSpec box = probe;
    box.radius = probe.radius * static_cast<double>(1 << k);
    box.scheme = SampleScheme::UniformGrid;
    box.sample_count = std::max(probe.sample_count, 65);
    double m = std::numeric_limits<double>::infinity();
    Vec a;
    for (const auto& y : sample_neighborhood(box)) {
      const ExtValue v = obj(y);
      if (v.is_finite() && v.finite_value() < m) {
        m = v.finite_value();
        a = y;
      }
    }
    if (!std::isfinite(m)) break;
    mins.push_back(m);
    args.push_back(a);
  }
  Verdict out;
  out.theorem_tag = "prox-boundedness-probe";
  out.samples_used = static_cast<long>(mins.size());
  bool diverging = mins.size() >= 4;
  for (std::size_t i = 1; i < mins.size(); ++i)
    diverging = diverging && mins[i] < mins[i - 1] - 1e-6 * (1.0 + std::abs(mins[i - 1]));
  if (diverging && mins.back() < mins.front() - (1.0 + std::abs(mins.front()))) {
    out.status = Status::Fails;
    for (std::size_t i = 0; i < args.size(); ++i) {
      out.witness.add("ray_point_" + std::to_string(i), args[i]);
      out.witness.add("ray_value_" + std::to_string(i), mins[i]);
    }
    out.note = "objective decreases strictly along every box expansion";
  } else {
    out.status = Status::Holds;
    out.note = "no unboundedness evidence; holds is sound only for failure";
  }
  return out;
}

ShiftedFn quadratic_shift(const ExtendedFn& f, double sigma, const Vec& center) {
  if (center.size() != f.dim) raise_error("DimensionMismatch", "shift center dimension");
  ShiftedFn s;
  s.sigma = sigma;
  s.center = center;
  ExtendedFn& g = s.fn;
  g.dim = f.dim;
  g.smooth_order = f.smooth_order;
  g.lsc_assumed = f.lsc_assumed;
  auto base_eval = f.eval;
  g.eval = [base_eval, sigma, center](const Vec& x) {
    return base_eval(x) + ExtValue::finite(-0.5 * sigma * (x - center).squaredNorm());
  };
  if (f.gradient) {
    auto bg = f.gradient;
    g.gradient = [bg, sigma, center](const Vec& x) { return Vec(bg(x) - sigma * (x - center)); };
  }
  if (f.hessian) {
    auto bh = f.hessian;
    const int d = f.dim;
    g.hessian = [bh, sigma, d](const Vec& x) {
      return Mat(bh(x) - sigma * Mat::Identity(d, d));
    };
  }
  if (f.subgrad_graph) {
    auto bgraph = f.subgrad_graph;
    g.subgrad_graph = [bgraph, sigma, center](const GraphWindow& w) {
      // The base v-window must cover v + sigma(x - center) for all x in the
      // window; enlarge and let the consumer re-filter.
      GraphWindow bw = w;
      bw.v_radius +=
          std::abs(sigma) * ((w.x_center - center).norm() + w.x_radius);
      bw.v_center = w.v_center + sigma * (w.x_center - center);
      bw.epsilon = std::numeric_limits<double>::infinity();
      auto pts = bgraph(bw);
      for (auto& gp : pts) gp.v -= sigma * (gp.x - center);
      return pts;
    };
  }
  return s;
}

ShiftResidual shift_envelope_residual(const ExtendedFn& f, double sigma, const Vec& center,
                                      double gamma, const std::vector<Vec>& test_points,
                                      const EnvelopeOptions& opts, kernels::Exec exec) {
  if (!(gamma > 0.0) || (sigma != 0.0 && gamma >= 1.0 / std::abs(sigma)))
    raise_error("GammaOutOfRange", "need 0 < gamma < 1/|sigma|");
  const ShiftedFn shifted = quadratic_shift(f, sigma, center);
  EnvelopeOptions plain = opts;
  plain.analytic_prox = nullptr;  // scale changes below invalidate a fixed-scale prox

  const EnvelopeHandle env_shift = make_envelope(shifted.fn, gamma, plain);
  const EnvelopeHandle env_base_fwd = make_envelope(f, gamma / (1.0 - sigma * gamma), plain);
  const EnvelopeHandle env_base_gamma = make_envelope(f, gamma, plain);
  const EnvelopeHandle env_shift_inv =
      make_envelope(shifted.fn, gamma / (1.0 + sigma * gamma), plain);

  ShiftResidual res;
  for (const auto& x : test_points) {
    const double d2 = (x - center).squaredNorm();
    {
      const double lhs = envelope(env_shift, x, exec);
      const Vec xs = (x - sigma * gamma * center) / (1.0 - sigma * gamma);
      const double rhs =
          envelope(env_base_fwd, xs, exec) - 0.5 * sigma / (1.0 - sigma * gamma) * d2;
      res.forward = std::max(res.forward, std::abs(lhs - rhs));
    }
    {
      const double lhs = envelope(env_base_gamma, x, exec);
      const Vec xs = (x + sigma * gamma * center) / (1.0 + sigma * gamma);
      const double rhs =
          envelope(env_shift_inv, xs, exec) + 0.5 * sigma / (1.0 + sigma * gamma) * d2;
      res.inverse = std::max(res.inverse, std::abs(lhs - rhs));
    }
  }
  return res;
}

Verdict check_prox_regularity(const ExtendedFn& f, const RefPair& p, double eps, double r_max,
                              const SubgradGraphSample& graph, const ProxRegularityConfig& cfg) {
  if (graph.points.empty()) raise_error("EmptyGraphSample", "no graph triples in the window");
  if (!(r_max > 0.0)) raise_error("InvalidSpec", "r_max must be positive");

  NeighborhoodSpec ns;
  ns.center = p.x;
  ns.radius = eps;
  ns.sample_count = cfg.x_samples;
  std::vector<Vec> xs = sample_neighborhood(ns);
  for (const auto& t : graph.points) xs.push_back(t.x);

  struct Quotient {
    double needed_r;
    std::size_t xi, gi;
  };
  Quotient worst{0.0, 0, 0};
  long used = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ExtValue fx = f.eval(xs[i]);
    if (!fx.is_finite()) continue;  // +inf satisfies the inequality for every r
    for (std::size_t j = 0; j < graph.points.size(); ++j) {
      const auto& t = graph.points[j];
      const double d2 = (xs[i] - t.x).squaredNorm();
      ++used;
      if (d2 < 1e-20) continue;
      const double gap = t.fx + t.v.dot(xs[i] - t.x) - fx.finite_value();
      const double r = 2.0 * gap / d2;
      if (r > worst.needed_r) worst = {r, i, j};
    }
  }

  // The violation predicate is monotone in r, so bisection pins the smallest
  // admissible r to bisect_tol; the cached worst quotient drives it.
  Verdict out;
  out.theorem_tag = "prox-regularity";
  out.samples_used = used;
  out.tolerances["bisect_tol"] = cfg.bisect_tol;
  out.tolerances["value_tol"] = cfg.value_tol;
  auto admissible = [&](double r) { return worst.needed_r <= r + cfg.value_tol; };
  if (!admissible(r_max)) {
    const auto& t = graph.points[worst.gi];
    out.status = Status::Fails;
    out.witness.add("x", xs[worst.xi]);
    out.witness.add("u", t.x);
    out.witness.add("v", t.v);
    out.witness.add("needed_r", worst.needed_r);
    out.metrics["r_required"] = worst.needed_r;
    out.note = "no r up to r_max satisfies the lower quadratic estimate";
    return out;
  }
  double lo = 0.0, hi = r_max;
  if (admissible(0.0)) {
    hi = 0.0;
  } else {
    while (hi - lo > cfg.bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      (admissible(mid) ? hi : lo) = mid;
    }
  }
  out.status = Status::Holds;
  out.metrics["r_star"] = hi;
  return out;
}

Verdict check_envelope_local_convexity(const EnvelopeHandle& h, const RefPair& p, double modulus,
                                       NeighborhoodSpec region, long triple_budget,
                                       kernels::Exec exec) {
  if (region.sample_count <= 0 || region.center.size() == 0) {
    region.center = p.x + h.lambda * p.v;
    region.radius = 0.4 * h.lambda;
    region.sample_count = region.center.size() == 1 ? 13 : 25;
    region.scheme = SampleScheme::Auto;
  }
  auto env_fn = [&](const Vec& x) { return ExtValue::finite(envelope(h, x, exec)); };
  Verdict v = sampled_convexity(env_fn, region, modulus, triple_budget, exec);
  v.theorem_tag = "envelope-convexity";
  v.metrics["lambda"] = h.lambda;
  v.metrics["modulus"] = modulus;
  return v;
}

}  // namespace varcvx
