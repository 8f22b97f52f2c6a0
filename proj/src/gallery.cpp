#include "varcvx/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "varcvx/oracles.hpp"

namespace varcvx::gallery {

namespace {

Vec vec1(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

void require_1d(const Vec& x, const char* id) {
  if (x.size() != 1) raise_error("InvalidSpec", std::string(id) + " is one-dimensional");
}

KnownFact fact1(std::string check, double x, double v, double modulus, Status expected,
                std::string note = "") {
  KnownFact f;
  f.check = std::move(check);
  f.ref_x = vec1(x);
  f.ref_v = vec1(v);
  f.modulus = modulus;
  f.expected = expected;
  f.note = std::move(note);
  return f;
}

KnownFact fact_error(std::string check, double x, double v, std::string code) {
  KnownFact f;
  f.check = std::move(check);
  f.ref_x = vec1(x);
  f.ref_v = vec1(v);
  f.expect_error = true;
  f.error_code = std::move(code);
  return f;
}

// Per-axis (x, v) candidates of a separable subdifferential; the Cartesian
// product forms the joint graph. Window filters and the value cut run later
// in enumerate_graph, so mild over-generation here is harmless.
using AxisPoints = std::vector<std::pair<double, double>>;
using AxisFn = AxisPoints (*)(double, double, double, double, int);

int per_axis_density(int n, int density) {
  if (n <= 1) return std::max(3, density);
  if (n == 2) return std::min(std::max(3, density), 7);
  return std::min(std::max(3, density), 5);
}

std::vector<GraphPoint> product_graph(const GraphWindow& w, AxisFn axis) {
  const int n = static_cast<int>(w.x_center.size());
  const int k = per_axis_density(n, w.density);
  std::vector<AxisPoints> axes;
  axes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    axes.push_back(axis(w.x_center[i], w.v_center[i], w.x_radius, w.v_radius, k));
    if (axes.back().empty()) return {};
  }
  std::vector<GraphPoint> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    GraphPoint g;
    g.x = Vec(n);
    g.v = Vec(n);
    for (int i = 0; i < n; ++i) {
      g.x[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]].first;
      g.v[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]].second;
    }
    out.push_back(std::move(g));
    int j = n - 1;
    while (j >= 0 &&
           ++idx[static_cast<std::size_t>(j)] == axes[static_cast<std::size_t>(j)].size()) {
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

void push_segment(AxisPoints& out, double x, double lo, double hi, int k) {
  if (lo > hi) return;
  for (int j = 0; j < k; ++j) out.push_back({x, lo + (hi - lo) * j / (k - 1)});
}

AxisPoints abs_axis(double xc, double vc, double xr, double vr, int k) {
  AxisPoints out;
  for (int j = 0; j < k; ++j) {
    const double x = xc - xr + 2.0 * xr * j / (k - 1);
    if (x != 0.0) out.push_back({x, x > 0.0 ? 1.0 : -1.0});
  }
  if (std::abs(xc) <= xr)
    push_segment(out, 0.0, std::max(-1.0, vc - vr), std::min(1.0, vc + vr), k);
  return out;
}

AxisPoints l0_axis(double xc, double vc, double xr, double vr, int k) {
  AxisPoints out;
  for (int j = 0; j < k; ++j) {
    const double x = xc - xr + 2.0 * xr * j / (k - 1);
    if (x != 0.0) out.push_back({x, 0.0});
  }
  // the subdifferential at 0 is the whole line; span the v window
  if (std::abs(xc) <= xr) push_segment(out, 0.0, vc - vr, vc + vr, k);
  return out;
}

AxisPoints logsum_axis(double xc, double vc, double xr, double vr, int k) {
  AxisPoints out;
  for (int j = 0; j < k; ++j) {
    const double x = xc - xr + 2.0 * xr * j / (k - 1);
    if (x > 0.0)
      out.push_back({x, 1.0 / (1.0 + x)});
    else if (x < 0.0)
      out.push_back({x, 1.0 / (x - 1.0)});
  }
  if (std::abs(xc) <= xr)
    push_segment(out, 0.0, std::max(-1.0, vc - vr), std::min(1.0, vc + vr), k);
  return out;
}

std::vector<GraphPoint> step_graph(const GraphWindow& w) {
  const double xc = w.x_center[0], vc = w.v_center[0];
  const double xr = w.x_radius, vr = w.v_radius;
  const int k = per_axis_density(1, w.density);
  std::vector<GraphPoint> out;
  for (int j = 0; j < k; ++j) {
    const double x = xc - xr + 2.0 * xr * j / (k - 1);
    if (x != 0.0) out.push_back({vec1(x), vec1(0.0)});
  }
  if (std::abs(xc) <= xr) {
    const double lo = std::max(0.0, vc - vr), hi = vc + vr;
    if (lo <= hi)
      for (int j = 0; j < k; ++j)
        out.push_back({vec1(0.0), vec1(lo + (hi - lo) * j / (k - 1))});
  }
  return out;
}

// Kink ladder of the sawtooth counterexample: at u_n = 1/(n+1) the function
// turns from flat (cap of the inner cell) to slope 1 + 1/n, so the regular
// subdifferential there is the full interval [0, 1 + 1/n]; the origin keeps
// [-1, 1]. The concave cap kinks contribute nothing a checker needs.
std::vector<GraphPoint> dl_graph(const GraphWindow& w) {
  const double xc = w.x_center[0], vc = w.v_center[0];
  const double xr = w.x_radius, vr = w.v_radius;
  const int k = per_axis_density(1, w.density);
  std::vector<GraphPoint> out;
  if (std::abs(xc) <= xr) {
    const double lo = std::max(-1.0, vc - vr), hi = std::min(1.0, vc + vr);
    if (lo <= hi)
      for (int j = 0; j < k; ++j)
        out.push_back({vec1(0.0), vec1(lo + (hi - lo) * j / (k - 1))});
  }
  // n = 300 already forces a prox-regularity constant near 2e5; deeper kinks
  // only bloat the pair scans
  for (long n = 2; n <= 300; ++n) {
    const double u = 1.0 / static_cast<double>(n + 1);
    const double top = 1.0 + 1.0 / static_cast<double>(n);
    for (double s : {1.0, -1.0}) {
      const double x = s * u;
      if (std::abs(x - xc) > xr) continue;
      for (double t : {0.0, 0.5, 1.0}) {
        const double v = s * t * top;
        if (std::abs(v - vc) <= vr) out.push_back({vec1(x), vec1(v)});
      }
    }
  }
  return out;
}

double dl_value(double x) {
  const double t = std::abs(x);
  if (t == 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t < 1e-9) return t;  // deeper cells differ from t by under t/n <= 1e-18
  long n = static_cast<long>(std::floor(1.0 / t));
  while (n > 1 && static_cast<double>(n) * t > 1.0) --n;
  while (static_cast<double>(n + 1) * t < 1.0) ++n;
  const double nn = static_cast<double>(n);
  const double line = (1.0 + 1.0 / nn) * t - 1.0 / (nn * (nn + 1.0));
  return std::min(line, 1.0 / nn);
}

NlpSmooth smooth1(std::function<double(double)> v, std::function<double(double)> g,
                  std::function<double(double)> h) {
  NlpSmooth s;
  s.value = [v](const Vec& x) { return v(x[0]); };
  s.grad = [g](const Vec& x) { return vec1(g(x[0])); };
  s.hess = [h](const Vec& x) {
    Mat m(1, 1);
    m(0, 0) = h(x[0]);
    return m;
  };
  return s;
}

GalleryEntry abs_entry() {
  GalleryEntry e;
  e.id = "abs";
  e.summary = "l1 norm; prox is componentwise soft thresholding";
  e.fn.eval = [](const Vec& x) { return ExtValue::finite(x.cwiseAbs().sum()); };
  e.fn.subgrad_graph = [](const GraphWindow& w) { return product_graph(w, &abs_axis); };
  e.analytic_prox = [](const Vec& x, double lam) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out[i] = x[i] > lam ? x[i] - lam : (x[i] < -lam ? x[i] + lam : 0.0);
    return out;
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("svc", 0.0, 0.0, 1.0, Status::Holds,
                         "the graph window around (0,0) pins x = 0")};
  return e;
}

GalleryEntry quad_entry(double sigma) {
  if (!(sigma > 0.0)) raise_error("InvalidSpec", "quad(sigma) needs sigma > 0");
  GalleryEntry e;
  e.id = "quad(" + [sigma] {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", sigma);
    return std::string(buf);
  }() + ")";
  e.summary = "(sigma/2)|x|^2; the envelope modulus transform is exact here";
  e.fn.smooth_order = 2;
  e.fn.eval = [sigma](const Vec& x) { return ExtValue::finite(0.5 * sigma * x.squaredNorm()); };
  e.fn.gradient = [sigma](const Vec& x) { return Vec(sigma * x); };
  e.fn.hessian = [sigma](const Vec& x) {
    return Mat(sigma * Mat::Identity(x.size(), x.size()));
  };
  e.analytic_prox = [sigma](const Vec& x, double lam) { return Vec(x / (1.0 + sigma * lam)); };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("svc", 0.0, 0.0, sigma, Status::Holds),
                   fact1("svc", 0.0, 0.0, sigma + 0.5, Status::Fails,
                         "curvature is exactly sigma, so any larger modulus fails")};
  return e;
}

GalleryEntry neg_quad_entry() {
  GalleryEntry e;
  e.id = "neg-quad";
  e.summary = "-|x|^2; prox-bounded only for lambda < 1/2";
  e.fn.smooth_order = 2;
  e.fn.eval = [](const Vec& x) { return ExtValue::finite(-x.squaredNorm()); };
  e.fn.gradient = [](const Vec& x) { return Vec(-2.0 * x); };
  e.fn.hessian = [](const Vec& x) { return Mat(-2.0 * Mat::Identity(x.size(), x.size())); };
  e.analytic_prox = [](const Vec& x, double lam) {
    if (lam >= 0.5) raise_error("InvalidSpec", "neg-quad is not prox-bounded at this lambda");
    return Vec(x / (1.0 - 2.0 * lam));
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Fails)};
  return e;
}

GalleryEntry huber_entry() {
  GalleryEntry e;
  e.id = "huber-target";
  e.summary = "componentwise Huber with unit knee; C1 but not C2";
  e.fn.smooth_order = 1;
  e.fn.eval = [](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = std::abs(x[i]);
      s += t <= 1.0 ? 0.5 * t * t : t - 0.5;
    }
    return ExtValue::finite(s);
  };
  e.fn.gradient = [](const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = std::clamp(x[i], -1.0, 1.0);
    return g;
  };
  e.analytic_prox = [](const Vec& x, double lam) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out[i] = std::abs(x[i]) <= 1.0 + lam ? x[i] / (1.0 + lam)
                                           : x[i] - lam * (x[i] > 0.0 ? 1.0 : -1.0);
    return out;
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Holds)};
  return e;
}

GalleryEntry l0_entry() {
  GalleryEntry e;
  e.id = "l0";
  e.summary = "number of nonzero components; prox is hard thresholding";
  e.fn.eval = [](const Vec& x) {
    return ExtValue::finite(static_cast<double>((x.array() != 0.0).count()));
  };
  e.fn.subgrad_graph = [](const GraphWindow& w) {
    if (w.x_center.size() > 3)
      raise_error("DimTooHigh", "l0 graph enumeration is restricted to n <= 3");
    return product_graph(w, &l0_axis);
  };
  e.analytic_prox = [](const Vec& x, double lam) {
    const double thr = std::sqrt(2.0 * lam);
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // the tie at +thr goes to 0, at -thr stays put: smaller point wins
      if (x[i] <= thr && x[i] > -thr)
        out[i] = 0.0;
      else
        out[i] = x[i];
    }
    return out;
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("vc", 0.0, 0.5, 0.0, Status::Holds),
                   fact1("vc", 0.0, -0.5, 0.0, Status::Holds),
                   fact1("local-convexity", 0.0, 0.0, 0.0, Status::Fails,
                         "midpoints of 0 and a nonzero point overshoot")};
  return e;
}

// Componentwise prox of log(1 + |t|): stationary points on the |t| branch
// solve y^2 + (1 - t)y + (lambda - t) = 0; compare against staying at 0.
double logsum_prox_1d(double x, double lam) {
  const double t = std::abs(x);
  double best = 0.0;
  double best_val = std::log1p(0.0) + t * t / (2.0 * lam);
  const double b = 1.0 - t, c = lam - t;
  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    for (double y : {(-b + r) / 2.0, (-b - r) / 2.0}) {
      if (y <= 0.0) continue;
      const double val = std::log1p(y) + (y - t) * (y - t) / (2.0 * lam);
      if (val < best_val - 1e-15 || (std::abs(val - best_val) <= 1e-15 && y < best)) {
        best = y;
        best_val = val;
      }
    }
  }
  return x < 0.0 ? -best : best;
}

GalleryEntry logsum_entry() {
  GalleryEntry e;
  e.id = "logsum";
  e.summary = "sum of log(1 + |x_i|); concave in |x_i| yet variationally convex at 0";
  e.fn.eval = [](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::log1p(std::abs(x[i]));
    return ExtValue::finite(s);
  };
  e.fn.subgrad_graph = [](const GraphWindow& w) { return product_graph(w, &logsum_axis); };
  e.analytic_prox = [](const Vec& x, double lam) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = logsum_prox_1d(x[i], lam);
    return out;
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("svc", 0.0, 0.0, 1.0, Status::Holds),
                   fact1("vc", 0.0, 0.5, 0.0, Status::Holds,
                         "holds only after the window shrinks below the branch values")};
  return e;
}

GalleryEntry step_entry() {
  GalleryEntry e;
  e.id = "step";
  e.summary = "0/1 step; the value cut separates the two monotonicity verdicts";
  e.fn.eval = [](const Vec& x) {
    require_1d(x, "step");
    return ExtValue::finite(x[0] <= 0.0 ? 0.0 : 1.0);
  };
  e.fn.subgrad_graph = [](const GraphWindow& w) { return step_graph(w); };
  e.analytic_prox = [](const Vec& x, double lam) {
    require_1d(x, "step");
    Vec out = x;
    if (x[0] > 0.0) {
      const double jump = x[0] * x[0] / (2.0 * lam);  // cost of moving to 0
      out[0] = jump <= 1.0 ? 0.0 : x[0];              // tie takes the smaller point
    }
    return out;
  };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("svc", 0.0, 0.0, 0.5, Status::Fails,
                         "the flat negative branch kills every positive modulus"),
                   fact1("monotone-cut", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("monotone-nocut", 0.0, 0.0, 0.0, Status::Fails,
                         "without the cut the high branch re-enters the window")};
  return e;
}

GalleryEntry dl_entry() {
  GalleryEntry e;
  e.id = "dl-counterexample";
  e.summary = "sawtooth with kinks at 1/(n+1); local minimizer at 0, nowhere prox-regular there";
  e.fn.eval = [](const Vec& x) {
    require_1d(x, "dl-counterexample");
    return ExtValue::finite(dl_value(x[0]));
  };
  e.fn.subgrad_graph = [](const GraphWindow& w) { return dl_graph(w); };
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("vc", 0.0, 0.0, 0.0, Status::Fails),
                   fact1("prox-regularity", 0.0, 0.0, 0.0, Status::Fails,
                         "kink pairs force the quadratic constant beyond any bound"),
                   fact1("local-min-grid", 0.0, 0.0, 0.0, Status::Holds)};
  return e;
}

GalleryEntry nlp_quad_ineq_entry() {
  GalleryEntry e;
  e.id = "nlp-quad-ineq";
  e.summary = "min x^2 subject to x <= 0; weakly active constraint at 0";
  e.is_nlp = true;
  e.nlp.n = 1;
  e.nlp.s = 1;
  e.nlp.m = 1;
  e.nlp.name = e.id;
  e.nlp.phi = {smooth1([](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                       [](double) { return 2.0; }),
               smooth1([](double x) { return x; }, [](double) { return 1.0; },
                       [](double) { return 0.0; })};
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("licq", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("plicq", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("pointbased", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("neighborhood", 0.0, 0.0, 2.0, Status::Holds),
                   fact1("tilt", 0.0, 0.0, 0.0, Status::Holds)};
  return e;
}

GalleryEntry nlp_linear_ineq_entry() {
  GalleryEntry e;
  e.id = "nlp-linear-ineq";
  e.summary = "min -x subject to x <= 0; strictly active constraint, vacuous subspace";
  e.is_nlp = true;
  e.nlp.n = 1;
  e.nlp.s = 1;
  e.nlp.m = 1;
  e.nlp.name = e.id;
  e.nlp.phi = {smooth1([](double x) { return -x; }, [](double) { return -1.0; },
                       [](double) { return 0.0; }),
               smooth1([](double x) { return x; }, [](double) { return 1.0; },
                       [](double) { return 0.0; })};
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("licq", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("pointbased", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("neighborhood", 0.0, 0.0, 1.0, Status::Holds)};
  return e;
}

GalleryEntry nlp_indefinite_entry() {
  GalleryEntry e;
  e.id = "nlp-indefinite";
  e.summary = "min -x^2 subject to x <= 0; negative curvature on the critical subspace";
  e.is_nlp = true;
  e.nlp.n = 1;
  e.nlp.s = 1;
  e.nlp.m = 1;
  e.nlp.name = e.id;
  e.nlp.phi = {smooth1([](double x) { return -x * x; }, [](double x) { return -2.0 * x; },
                       [](double) { return -2.0; }),
               smooth1([](double x) { return x; }, [](double) { return 1.0; },
                       [](double) { return 0.0; })};
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("licq", 0.0, 0.0, 0.0, Status::Holds),
                   fact1("pointbased", 0.0, 0.0, 0.0, Status::Fails),
                   fact1("neighborhood", 0.0, 0.0, 0.5, Status::Fails)};
  return e;
}

GalleryEntry nlp_degenerate_entry() {
  GalleryEntry e;
  e.id = "nlp-degenerate-licq";
  e.summary = "min x^2 with x <= 0 duplicated; LICQ fails, PLICQ survives";
  e.is_nlp = true;
  e.nlp.n = 1;
  e.nlp.s = 2;
  e.nlp.m = 2;
  e.nlp.name = e.id;
  e.nlp.phi = {smooth1([](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                       [](double) { return 2.0; }),
               smooth1([](double x) { return x; }, [](double) { return 1.0; },
                       [](double) { return 0.0; }),
               smooth1([](double x) { return 2.0 * x; }, [](double) { return 2.0; },
                       [](double) { return 0.0; })};
  e.ref_x = vec1(0.0);
  e.ref_v = vec1(0.0);
  e.known_facts = {fact1("licq", 0.0, 0.0, 0.0, Status::Fails),
                   fact1("plicq", 0.0, 0.0, 0.0, Status::Holds,
                         "parallel gradients cannot positively combine to zero"),
                   fact_error("pointbased", 0.0, 0.0, "NonUnique")};
  return e;
}

}  // namespace

std::vector<std::string> gallery_ids() {
  return {"abs",          "quad(2)",        "neg-quad",       "huber-target",
          "l0",           "logsum",         "step",           "dl-counterexample",
          "nlp-quad-ineq", "nlp-linear-ineq", "nlp-indefinite", "nlp-degenerate-licq"};
}

GalleryEntry get(const std::string& id) {
  if (id.rfind("quad(", 0) == 0 && id.size() > 6 && id.back() == ')') {
    const std::string inner = id.substr(5, id.size() - 6);
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(inner, &used);
    } catch (const std::exception&) {
      raise_error("UnknownId", id);
    }
    if (used != inner.size()) raise_error("UnknownId", id);
    return quad_entry(sigma);
  }
  if (id == "abs") return abs_entry();
  if (id == "neg-quad") return neg_quad_entry();
  if (id == "huber-target") return huber_entry();
  if (id == "l0") return l0_entry();
  if (id == "logsum") return logsum_entry();
  if (id == "step") return step_entry();
  if (id == "dl-counterexample") return dl_entry();
  if (id == "nlp-quad-ineq") return nlp_quad_ineq_entry();
  if (id == "nlp-linear-ineq") return nlp_linear_ineq_entry();
  if (id == "nlp-indefinite") return nlp_indefinite_entry();
  if (id == "nlp-degenerate-licq") return nlp_degenerate_entry();
  raise_error("UnknownId", id);
}

SubgradGraphSample analytic_graph(const std::string& id, const GraphWindow& window,
                                  int density) {
  GalleryEntry e = get(id);
  if (e.is_nlp || !e.fn.subgrad_graph) raise_error("NoAnalyticGraph", id);
  ExtendedFn fn = e.fn;
  fn.dim = static_cast<int>(window.x_center.size());
  const RefPair p = make_refpair(fn, window.x_center, window.v_center);
  const int d = density > 0 ? density : window.density;
  return enumerate_graph(fn, p, window.x_radius, window.v_radius, window.epsilon, d);
}

FactOutcome run_known_fact(const GalleryEntry& entry, const KnownFact& fact,
                           std::uint64_t seed) {
  FactOutcome out;
  try {
    if (entry.is_nlp) {
      const NlpProblem& p = entry.nlp;
      if (fact.check == "licq") {
        out.verdict = check_licq(p, fact.ref_x);
      } else if (fact.check == "plicq") {
        out.verdict = check_plicq(p, fact.ref_x);
      } else if (fact.check == "pointbased") {
        const KktPoint k = kkt_solve(p, fact.ref_x, fact.ref_v);
        out.verdict = pointbased_strong_sufficiency(p, k).verdict;
      } else if (fact.check == "neighborhood") {
        const KktPoint k = kkt_solve(p, fact.ref_x, fact.ref_v);
        NbhdConfig cfg;
        if (seed != 0) cfg.seed = seed;
        out.verdict = neighborhood_sufficiency(p, k, fact.modulus, cfg);
      } else if (fact.check == "tilt") {
        const KktPoint k = kkt_solve(p, fact.ref_x, fact.ref_v);
        TiltConfig cfg;
        if (seed != 0) cfg.seed = seed;
        out.verdict = tilt_stability_probe(p, k, cfg);
      } else {
        raise_error("UnknownCheck", fact.check);
      }
      return out;
    }

    ExtendedFn fn = entry.fn;
    fn.dim = static_cast<int>(fact.ref_x.size());
    if (fact.check == "local-convexity") {
      NeighborhoodSpec region;
      region.center = fact.ref_x;
      region.radius = 1.0;
      region.sample_count = 41;  // odd keeps the reference point on the grid
      if (seed != 0) region.seed = seed;
      out.verdict = sampled_convexity(fn.eval, region, fact.modulus);
      return out;
    }
    if (fact.check == "local-min-grid") {
      GridSpec gs;
      gs.lower = (fact.ref_x.array() - 0.25).matrix();
      gs.upper = (fact.ref_x.array() + 0.25).matrix();
      gs.refine_rounds = 5;
      const GridArgminResult r = grid_argmin(fn.eval, gs);
      const double spacing = 0.5 / (gs.points_per_axis - 1) *
                             std::pow(gs.refine_shrink, gs.refine_rounds - 1);
      const double tol =
          std::max(1e-6, 2.0 * spacing * std::sqrt(static_cast<double>(fn.dim)));
      Verdict v;
      v.theorem_tag = "grid-local-min";
      v.tolerances["location_tol"] = tol;
      v.metrics["argmin_value"] = r.value;
      v.samples_used = r.evals;
      if ((r.point - fact.ref_x).norm() <= tol) {
        v.status = Status::Holds;
      } else {
        v.status = Status::Fails;
        v.witness.add("argmin", r.point);
        v.witness.add("value", r.value);
      }
      out.verdict = std::move(v);
      return out;
    }

    const RefPair p = make_refpair(fn, fact.ref_x, fact.ref_v);
    VcConfig cfg;
    cfg.analytic_prox = entry.analytic_prox;
    if (fact.check == "vc" || fact.check == "svc") {
      out.verdict = check_variational_convexity(fn, p, fact.modulus, cfg);
    } else if (fact.check == "monotone-cut") {
      const auto g = enumerate_graph(fn, p, cfg.x_radius, cfg.v_radius, cfg.epsilon, cfg.density);
      out.verdict = check_monotone(g, fact.modulus);
    } else if (fact.check == "monotone-nocut") {
      const auto g = enumerate_graph(fn, p, cfg.x_radius, cfg.v_radius,
                                     std::numeric_limits<double>::infinity(), cfg.density);
      out.verdict = check_monotone(g, fact.modulus);
    } else if (fact.check == "prox-regularity") {
      const auto g = enumerate_graph(fn, p, cfg.x_radius, cfg.v_radius, cfg.epsilon, cfg.density);
      out.verdict = check_prox_regularity(fn, p, cfg.epsilon, cfg.r_max, g);
    } else {
      raise_error("UnknownCheck", fact.check);
    }
  } catch (const CheckError& err) {
    out.errored = true;
    out.error_code = err.code();
    out.verdict.status = Status::Inconclusive;
    out.verdict.theorem_tag = fact.check;
    out.verdict.note = err.what();
  }
  return out;
}

}  // namespace varcvx::gallery
