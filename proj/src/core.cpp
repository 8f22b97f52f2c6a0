#include "varcvx/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace varcvx {

void raise_error(const std::string& code, const std::string& detail) {
  throw CheckError(code, detail);
}

ExtValue ExtValue::finite(double v) {
  if (!std::isfinite(v)) raise_error("NotANumber", "expected a finite value");
  ExtValue e;
  e.v_ = v;
  return e;
}

ExtValue ExtValue::of(double v) {
  if (std::isnan(v)) raise_error("NotANumber", "NaN is not an extended real");
  if (v == -std::numeric_limits<double>::infinity())
    raise_error("NotANumber", "-inf is not representable, functions are proper");
  ExtValue e;
  e.v_ = v;
  return e;
}

double ExtValue::finite_value() const {
  if (!is_finite()) raise_error("NotFinite", "value is +inf");
  return v_;
}

RefPair make_refpair(const ExtendedFn& f, Vec x, Vec v) {
  if (x.size() != f.dim || v.size() != f.dim)
    raise_error("DimensionMismatch", "reference pair does not match function dimension");
  ExtValue fx = f.eval(x);
  if (!fx.is_finite())
    raise_error("InfiniteAtReference", "function value at the reference point must be finite");
  return RefPair{std::move(x), std::move(v), fx.finite_value()};
}

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double scale = inv;
  double r = 0.0;
  while (i > 0) {
    r += static_cast<double>(i % base) * scale;
    i /= base;
    scale *= inv;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

std::vector<Vec> grid_samples(const NeighborhoodSpec& s) {
  const int d = static_cast<int>(s.center.size());
  // Inscribed cube keeps every node inside the Euclidean ball.
  const double half = s.radius / std::sqrt(static_cast<double>(d));
  int k = std::max(1, static_cast<int>(std::ceil(std::pow(
                          static_cast<double>(s.sample_count), 1.0 / d))));
  while (std::pow(static_cast<double>(k), d) < s.sample_count) ++k;
  std::vector<Vec> out;
  out.reserve(s.sample_count);
  std::vector<int> idx(d, 0);
  while (static_cast<int>(out.size()) < s.sample_count) {
    Vec p(d);
    for (int a = 0; a < d; ++a) {
      double t = (k == 1) ? 0.5 : static_cast<double>(idx[a]) / (k - 1);
      p[a] = s.center[a] - half + 2.0 * half * t;
    }
    out.push_back(std::move(p));
    // Lexicographic increment, axis 0 most significant.
    int a = d - 1;
    while (a >= 0 && ++idx[a] == k) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

bool in_ball(const Vec& p, const Vec& c, double r) { return (p - c).norm() <= r; }

std::vector<Vec> halton_samples(const NeighborhoodSpec& s) {
  const int d = static_cast<int>(s.center.size());
  std::vector<Vec> out;
  out.reserve(s.sample_count);
  std::uint64_t i = 1;  // skip the origin-heavy index 0
  while (static_cast<int>(out.size()) < s.sample_count) {
    Vec p(d);
    for (int a = 0; a < d; ++a)
      p[a] = s.center[a] + s.radius * (2.0 * radical_inverse(i, kPrimes[a % 10]) - 1.0);
    ++i;
    if (in_ball(p, s.center, s.radius)) out.push_back(std::move(p));
    if (i > 1000ull * static_cast<std::uint64_t>(s.sample_count) + 1000ull) break;
  }
  return out;
}

std::vector<Vec> random_samples(const NeighborhoodSpec& s) {
  const int d = static_cast<int>(s.center.size());
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> out;
  out.reserve(s.sample_count);
  while (static_cast<int>(out.size()) < s.sample_count) {
    Vec p(d);
    for (int a = 0; a < d; ++a) p[a] = s.center[a] + s.radius * u(rng);
    if (in_ball(p, s.center, s.radius)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<Vec> sample_neighborhood(const NeighborhoodSpec& spec) {
  if (spec.center.size() == 0) raise_error("DimensionMismatch", "empty center");
  if (spec.radius <= 0.0) raise_error("InvalidSpec", "radius must be positive");
  if (spec.sample_count <= 0) raise_error("InvalidSpec", "sample_count must be positive");
  SampleScheme scheme = spec.scheme;
  if (scheme == SampleScheme::Auto)
    scheme = spec.center.size() == 1 ? SampleScheme::UniformGrid : SampleScheme::LowDiscrepancy;
  switch (scheme) {
    case SampleScheme::UniformGrid:
      return grid_samples(spec);
    case SampleScheme::LowDiscrepancy:
      return halton_samples(spec);
    case SampleScheme::RandomSeeded:
      return random_samples(spec);
    default:
      raise_error("InvalidSpec", "unresolved sampling scheme");
  }
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Holds:
      return "holds";
    case Status::Fails:
      return "fails";
    default:
      return "inconclusive";
  }
}

std::optional<std::vector<double>> Witness::get(const std::string& name) const {
  for (const auto& [k, v] : items)
    if (k == name) return v;
  return std::nullopt;
}

double Witness::get_scalar(const std::string& name) const {
  auto v = get(name);
  if (!v || v->size() != 1) raise_error("WitnessMissing", "scalar " + name);
  return (*v)[0];
}

Vec Witness::get_vec(const std::string& name) const {
  auto v = get(name);
  if (!v) raise_error("WitnessMissing", "vector " + name);
  return Eigen::Map<const Vec>(v->data(), static_cast<Eigen::Index>(v->size()));
}

Verdict make_holds(std::string tag) {
  Verdict v;
  v.status = Status::Holds;
  v.theorem_tag = std::move(tag);
  return v;
}

Verdict make_fails(std::string tag, Witness w) {
  Verdict v;
  v.status = Status::Fails;
  v.theorem_tag = std::move(tag);
  v.witness = std::move(w);
  return v;
}

namespace {

// Difference-quotient screen at shrinking radii. The quotient of a valid
// reference subgradient tends to a nonnegative liminf, so a violation must
// either clear on its own or keep a stable negative floor.
struct QuotientScreen {
  bool violation_stable = false;
  Vec witness_x;
  double witness_q = 0.0;
  std::vector<double> mins;
};

QuotientScreen run_quotient_screen(const ExtendedFn& f, const RefPair& p, double tol,
                                   const std::optional<Vec>& hint_dir) {
  QuotientScreen out;
  const double r0 = 0.1 * (1.0 + p.x.norm());
  Vec last_arg;
  for (int k = 0; k < 4; ++k) {
    const double r = r0 / static_cast<double>(1 << k);
    NeighborhoodSpec ns;
    ns.center = p.x;
    ns.radius = r;
    ns.sample_count = 64;
    auto pts = sample_neighborhood(ns);
    for (int a = 0; a < f.dim; ++a) {
      Vec e = Vec::Zero(f.dim);
      e[a] = r;
      pts.push_back(p.x + e);
      pts.push_back(p.x - e);
    }
    if (hint_dir && hint_dir->norm() > 0) pts.push_back(p.x + r * hint_dir->normalized());
    double qmin = std::numeric_limits<double>::infinity();
    Vec qarg;
    for (const auto& x : pts) {
      const double dist = (x - p.x).norm();
      if (dist < 1e-14) continue;
      ExtValue fx = f.eval(x);
      if (!fx.is_finite()) continue;  // +inf satisfies the inequality
      const double q = (fx.finite_value() - p.fx - p.v.dot(x - p.x)) / dist;
      if (q < qmin) {
        qmin = q;
        qarg = x;
      }
    }
    if (!std::isfinite(qmin)) continue;
    out.mins.push_back(qmin);
    last_arg = qarg;
  }
  if (out.mins.empty()) return out;
  // A valid pair has liminf quotient >= 0: sampled minima either stay above
  // -tol or decay geometrically with the radius (radii shrink 8x overall).
  // A stable negative floor at the smallest radius certifies a violation.
  const double first = out.mins.front();
  const double last = out.mins.back();
  const bool vanishing = last >= -tol || std::abs(last) <= 0.25 * std::abs(first) + tol;
  if (!vanishing) {
    out.violation_stable = true;
    out.witness_x = last_arg;
    out.witness_q = last;
  }
  return out;
}

}  // namespace

Verdict validate_refpair(const ExtendedFn& f, const RefPair& p, double tol) {
  const double scale = 1.0 + p.x.norm() + p.v.norm();
  if (f.subgrad_graph) {
    GraphWindow w;
    w.x_center = p.x;
    w.v_center = p.v;
    w.x_radius = 1e-3 * scale;
    w.v_radius = 1e-3 * scale;
    w.epsilon = std::numeric_limits<double>::infinity();
    w.density = 41;
    const double graph_tol = 1e-8 * scale;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : f.subgrad_graph(w)) {
      const double d =
          std::max((g.x - p.x).lpNorm<Eigen::Infinity>(), (g.v - p.v).lpNorm<Eigen::Infinity>());
      best = std::min(best, d);
    }
    if (best <= graph_tol) {
      Verdict v = make_holds("graph-membership");
      v.tolerances["graph_tol"] = graph_tol;
      return v;
    }
    auto screen = run_quotient_screen(f, p, tol, std::nullopt);
    if (screen.violation_stable) {
      Witness wit;
      wit.add("x", screen.witness_x);
      wit.add("quotient", screen.witness_q);
      Verdict v = make_fails("graph-membership", std::move(wit));
      v.tolerances["tol"] = tol;
      v.note = "graph denies membership and the difference quotient keeps a negative floor";
      return v;
    }
    Verdict v;
    v.status = Status::Inconclusive;
    v.theorem_tag = "graph-membership";
    v.note = "graph denies membership but no replayable sampled violation was found";
    return v;
  }
  if (f.smooth_order >= 1 && f.gradient) {
    const Vec g = f.gradient(p.x);
    const double mismatch = (g - p.v).norm();
    if (mismatch <= tol * (1.0 + g.norm())) {
      Verdict v = make_holds("smooth-gradient-match");
      v.tolerances["tol"] = tol;
      return v;
    }
    Vec dir = -(g - p.v);
    auto screen = run_quotient_screen(f, p, tol, dir);
    if (screen.violation_stable) {
      Witness wit;
      wit.add("x", screen.witness_x);
      wit.add("quotient", screen.witness_q);
      Verdict v = make_fails("smooth-gradient-match", std::move(wit));
      v.tolerances["tol"] = tol;
      return v;
    }
    Verdict v;
    v.status = Status::Inconclusive;
    v.theorem_tag = "smooth-gradient-match";
    v.note = "gradient mismatch below certification threshold";
    return v;
  }
  raise_error("NoGraphAndNonsmooth",
              "function has neither smooth data nor a subgradient-graph enumerator");
}

}  // namespace varcvx
