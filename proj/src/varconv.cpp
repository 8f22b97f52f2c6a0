#include "varcvx/varconv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace varcvx {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

SubgradGraphSample enumerate_graph(const ExtendedFn& f, const RefPair& p, double x_radius,
                                   double v_radius, double eps, int density) {
  if (density < 2) raise_error("InvalidSpec", "density must be at least 2");
  std::vector<GraphPoint> raw;
  if (f.subgrad_graph) {
    GraphWindow w;
    w.x_center = p.x;
    w.v_center = p.v;
    w.x_radius = x_radius;
    w.v_radius = v_radius;
    w.epsilon = eps;
    w.density = density;
    raw = f.subgrad_graph(w);
  } else if (f.smooth_order >= 1 && f.gradient) {
    NeighborhoodSpec ns;
    ns.center = p.x;
    ns.radius = x_radius;
    ns.sample_count = f.dim == 1 ? density : std::min(441, density * density);
    for (auto& x : sample_neighborhood(ns)) raw.push_back({x, f.gradient(x)});
    raw.push_back({p.x, f.gradient(p.x)});
  } else {
    raise_error("NoEnumerator", "no subgradient-graph enumerator and no smooth data");
  }
  SubgradGraphSample out;
  out.ref = p;
  out.x_radius = x_radius;
  out.v_radius = v_radius;
  out.epsilon = eps;
  const double cut = p.fx + eps;
  for (auto& g : raw) {
    if ((g.x - p.x).norm() > x_radius + 1e-12) continue;
    if ((g.v - p.v).norm() > v_radius + 1e-12) continue;
    const ExtValue fx = f.eval(g.x);
    if (!fx.is_finite()) continue;
    if (!(fx.finite_value() < cut)) continue;  // the value cut is strict
    out.points.push_back({g.x, g.v, fx.finite_value()});
  }
  return out;
}

Verdict check_monotone(const SubgradGraphSample& graph, double modulus, kernels::Exec exec) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(graph.points.size());
  const std::ptrdiff_t npairs = n * (n - 1) / 2;
  auto pair_of = [n](std::ptrdiff_t pidx) {
    std::ptrdiff_t i = 0, before = 0;
    while (before + (n - 1 - i) <= pidx) before += n - 1 - i++;
    return std::pair<std::ptrdiff_t, std::ptrdiff_t>{i, i + 1 + (pidx - before)};
  };
  auto violates = [&](std::ptrdiff_t pidx) {
    const auto [i, j] = pair_of(pidx);
    const auto& a = graph.points[i];
    const auto& b = graph.points[j];
    const double lhs = (a.v - b.v).dot(a.x - b.x);
    const double d2 = (a.x - b.x).squaredNorm();
    const double tol = 1e-9 * (1.0 + std::abs(lhs) + d2);
    return lhs < modulus * d2 - tol;
  };
  Verdict out;
  out.theorem_tag = "graph-monotonicity";
  out.tolerances["rel_tol"] = 1e-9;
  out.metrics["modulus"] = modulus;
  out.samples_used = npairs;
  auto hit = kernels::first_true(npairs, violates, exec);
  if (hit) {
    const auto [i, j] = pair_of(*hit);
    out.status = Status::Fails;
    out.witness.add("x1", graph.points[i].x);
    out.witness.add("v1", graph.points[i].v);
    out.witness.add("x2", graph.points[j].x);
    out.witness.add("v2", graph.points[j].v);
  } else {
    out.status = Status::Holds;
  }
  return out;
}

Verdict check_subgrad_inequality(const ExtendedFn& f, const SubgradGraphSample& graph,
                                 const std::vector<Vec>& test_points, double modulus,
                                 kernels::Exec exec) {
  const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(test_points.size());
  const std::ptrdiff_t ng = static_cast<std::ptrdiff_t>(graph.points.size());
  std::vector<double> fx(test_points.size());
  std::vector<char> fin(test_points.size());
  for (std::ptrdiff_t i = 0; i < nx; ++i) {
    const ExtValue v = f.eval(test_points[i]);
    fin[i] = v.is_finite();
    fx[i] = v.raw();
  }
  auto violates = [&](std::ptrdiff_t flat) {
    const std::ptrdiff_t i = flat / ng, j = flat % ng;
    if (!fin[i]) return false;  // +inf dominates every minorant
    const auto& g = graph.points[j];
    const Vec d = test_points[i] - g.x;
    const double rhs = g.fx + g.v.dot(d) + 0.5 * modulus * d.squaredNorm();
    const double tol = 1e-9 * (1.0 + std::abs(fx[i]) + std::abs(rhs));
    return fx[i] < rhs - tol;
  };
  Verdict out;
  out.theorem_tag = "subgradient-inequality";
  out.tolerances["rel_tol"] = 1e-9;
  out.metrics["modulus"] = modulus;
  out.samples_used = nx * ng;
  auto hit = kernels::first_true(nx * ng, violates, exec);
  if (hit) {
    const std::ptrdiff_t i = *hit / ng, j = *hit % ng;
    out.status = Status::Fails;
    out.witness.add("x", test_points[i]);
    out.witness.add("u", graph.points[j].x);
    out.witness.add("v", graph.points[j].v);
    out.witness.add("phi_x", fx[i]);
    out.witness.add("phi_u", graph.points[j].fx);
  } else {
    out.status = Status::Holds;
  }
  return out;
}

namespace {

Status combine(std::initializer_list<Status> parts) {
  bool all_hold = true;
  for (Status s : parts) {
    if (s == Status::Fails) return Status::Fails;
    all_hold = all_hold && s == Status::Holds;
  }
  return all_hold ? Status::Holds : Status::Inconclusive;
}

struct ScaleRun {
  Verdict verdict;  // combined verdict at one window scale
};

ScaleRun run_at_scale(const ExtendedFn& f, const RefPair& p, double modulus, const VcConfig& cfg,
                      double scale, kernels::Exec exec) {
  Verdict out;
  out.theorem_tag = modulus > 0.0 ? "variational-strong-convexity" : "variational-convexity";
  out.metrics["modulus"] = modulus;
  out.metrics["window_scale"] = scale;

  std::optional<SubgradGraphSample> graph;
  try {
    graph = enumerate_graph(f, p, cfg.x_radius * scale, cfg.v_radius * scale,
                            cfg.epsilon * scale, cfg.density);
  } catch (const CheckError& e) {
    if (std::string(e.code()) != "NoEnumerator") throw;
  }

  Status gate = Status::Inconclusive;
  Status mono = Status::Inconclusive;
  Status ineq = Status::Inconclusive;
  const Witness* fail_witness = nullptr;

  if (graph && !graph->points.empty()) {
    ProxRegularityConfig prc;
    prc.x_samples = cfg.x_samples;
    Verdict g = check_prox_regularity(f, p, cfg.epsilon * scale, cfg.r_max, *graph, prc);
    gate = g.status;
    out.details.push_back({"prox-regularity", std::move(g)});

    Verdict m = check_monotone(*graph, modulus, exec);
    mono = m.status;
    out.details.push_back({"graph-monotonicity", std::move(m)});

    NeighborhoodSpec ns;
    ns.center = p.x;
    ns.radius = cfg.x_radius * scale;
    ns.sample_count = cfg.x_samples;
    auto pts = sample_neighborhood(ns);
    for (const auto& t : graph->points) pts.push_back(t.x);
    Verdict q = check_subgrad_inequality(f, *graph, pts, modulus, exec);
    ineq = q.status;
    out.details.push_back({"subgradient-inequality", std::move(q)});
  } else {
    Verdict g;
    g.status = Status::Inconclusive;
    g.note = graph ? "graph sample is empty in this window" : "no graph enumerator";
    out.details.push_back({"prox-regularity", g});
  }

  // Envelope route only makes sense past the prox-regularity gate; when the
  // gate failed the envelope shape is not evidence either way.
  std::vector<Status> env_small;
  if (gate != Status::Fails) {
    std::vector<double> lambdas = cfg.lambdas;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    for (double lam : lambdas) {
      Verdict sub;
      try {
        EnvelopeOptions opts = cfg.envelope;
        if (cfg.analytic_prox) {
          auto ap = cfg.analytic_prox;
          opts.analytic_prox = [ap, lam](const Vec& x) { return ap(x, lam); };
        }
        EnvelopeHandle h = make_envelope(f, lam, opts);
        NeighborhoodSpec region;
        region.center = p.x + lam * p.v;
        region.radius = cfg.envelope_radius_factor * lam * scale;
        region.sample_count = f.dim == 1 ? 13 : 25;
        const double env_mod = modulus / (1.0 + modulus * lam);
        sub = check_envelope_local_convexity(h, p, env_mod, region, cfg.triple_budget, exec);
      } catch (const CheckError& e) {
        sub.status = Status::Inconclusive;
        sub.theorem_tag = "envelope-convexity";
        sub.note = e.what();
      }
      sub.metrics["lambda"] = lam;
      const bool small = lam <= lambdas[lambdas.size() > 2 ? lambdas.size() - 2 : 0];
      if (small) env_small.push_back(sub.status);
      out.details.push_back({"envelope-convexity lambda=" + fmt(lam), std::move(sub)});
    }
  }
  Status env = Status::Inconclusive;
  if (!env_small.empty()) {
    env = Status::Holds;
    for (Status s : env_small) {
      if (s == Status::Fails) env = Status::Fails;
      if (s == Status::Inconclusive && env != Status::Fails) env = Status::Inconclusive;
    }
  }

  out.status = combine({gate, env, mono, ineq});
  if (out.status == Status::Fails) {
    for (const auto& [label, d] : out.details) {
      if (d.fails() && !d.witness.empty()) {
        fail_witness = &d.witness;
        out.note = "first failing route: " + label;
        break;
      }
    }
    if (fail_witness) out.witness = *fail_witness;
  }
  long used = 0;
  for (const auto& [label, d] : out.details) used += d.samples_used;
  out.samples_used = used;
  return ScaleRun{std::move(out)};
}

}  // namespace

Verdict check_variational_convexity(const ExtendedFn& f, const RefPair& p, double modulus,
                                    const VcConfig& cfg, kernels::Exec exec) {
  if (modulus < 0.0) raise_error("InvalidSpec", "modulus must be nonnegative");
  Verdict final_v;
  std::vector<std::pair<std::string, Verdict>> scale_details;
  for (std::size_t k = 0; k < cfg.escalation.size(); ++k) {
    const double scale = cfg.escalation[k];
    ScaleRun run = run_at_scale(f, p, modulus, cfg, scale, exec);
    const bool last = k + 1 == cfg.escalation.size();
    const Status s = run.verdict.status;
    scale_details.push_back({"window_scale=" + fmt(scale), std::move(run.verdict)});
    if (s != Status::Fails || last) break;
  }
  final_v = scale_details.back().second;
  Verdict out = std::move(final_v);
  // Keep the escalation history visible when the first window was not final.
  if (scale_details.size() > 1) {
    for (std::size_t k = 0; k + 1 < scale_details.size(); ++k)
      out.details.push_back(scale_details[k]);
  }
  return out;
}

Verdict shift_reduction_crosscheck(const ExtendedFn& f, const RefPair& p, double sigma,
                                   const VcConfig& cfg, kernels::Exec exec) {
  Verdict a = check_variational_convexity(f, p, sigma, cfg, exec);
  const ShiftedFn shifted = quadratic_shift(f, sigma, p.x);
  VcConfig shifted_cfg = cfg;
  shifted_cfg.analytic_prox = nullptr;  // the shift invalidates a base-scale prox
  RefPair sp{p.x, p.v, p.fx};           // the shift is flat at its center
  Verdict b = check_variational_convexity(shifted.fn, sp, 0.0, shifted_cfg, exec);

  Verdict out;
  out.theorem_tag = "shift-reduction";
  out.metrics["sigma"] = sigma;
  if (a.status == Status::Inconclusive || b.status == Status::Inconclusive) {
    out.status = Status::Inconclusive;
    out.note = "a sub-check was inconclusive";
  } else if (a.status == b.status) {
    out.status = Status::Holds;
    out.note = "agree-" + to_string(a.status);
  } else {
    out.status = Status::Fails;
    out.note = "strong check says " + to_string(a.status) + ", shifted plain check says " +
               to_string(b.status);
    out.witness = a.fails() ? a.witness : b.witness;
  }
  out.details.push_back({"strong", std::move(a)});
  out.details.push_back({"shifted-plain", std::move(b)});
  return out;
}

}  // namespace varcvx
