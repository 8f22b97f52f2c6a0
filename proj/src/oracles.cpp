#include "varcvx/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace varcvx {

namespace {

void check_grid_spec(const GridSpec& s) {
  if (s.lower.size() == 0 || s.lower.size() != s.upper.size())
    raise_error("InvalidSpec", "grid bounds must be nonempty and of equal dimension");
  for (Eigen::Index i = 0; i < s.lower.size(); ++i)
    if (!(s.lower[i] < s.upper[i])) raise_error("InvalidSpec", "grid requires lower < upper");
  if (s.points_per_axis < 3) raise_error("InvalidSpec", "points_per_axis must be at least 3");
  if (!(s.refine_shrink > 0.0 && s.refine_shrink < 1.0))
    raise_error("InvalidSpec", "refine_shrink must lie in (0,1)");
  if (s.refine_rounds < 0) raise_error("InvalidSpec", "refine_rounds must be nonnegative");
}

// Node of the lexicographic grid; axis 0 is the most significant digit so the
// linear index order equals lexicographic point order (ties in argmin then
// resolve to the lexicographically smallest point).
Vec grid_node(std::ptrdiff_t idx, const Vec& lo, const Vec& hi, int k) {
  const int d = static_cast<int>(lo.size());
  Vec p(d);
  for (int a = d - 1; a >= 0; --a) {
    const int c = static_cast<int>(idx % k);
    idx /= k;
    p[a] = lo[a] + (hi[a] - lo[a]) * static_cast<double>(c) / (k - 1);
  }
  return p;
}

}  // namespace

GridArgminResult grid_argmin(const std::function<ExtValue(const Vec&)>& h, const GridSpec& spec,
                             kernels::Exec exec) {
  check_grid_spec(spec);
  const int d = static_cast<int>(spec.lower.size());
  const int k = spec.points_per_axis;
  double nodes_d = std::pow(static_cast<double>(k), d);
  if (nodes_d > static_cast<double>(spec.max_nodes))
    raise_error("GridBudgetExceeded", "grid has more nodes than max_nodes allows");
  const std::ptrdiff_t nodes = static_cast<std::ptrdiff_t>(nodes_d);

  Vec lo = spec.lower, hi = spec.upper;
  bool have_best = false;
  Vec best_point;
  double best_value = std::numeric_limits<double>::infinity();
  long evals = 0;

  for (int round = 0; round <= spec.refine_rounds; ++round) {
    auto value = [&](std::ptrdiff_t i) { return h(grid_node(i, lo, hi, k)).raw(); };
    auto r = kernels::argmin(nodes, value, exec);
    evals += nodes;
    if (!r) {
      if (round == 0) raise_error("AllInfinite", "objective is +inf on every grid node");
      break;  // shrunken box may drift into an infinite region, keep incumbent
    }
    const Vec pt = grid_node(r->index, lo, hi, k);
    // Carrying the incumbent across rounds makes the value non-increasing even
    // when the shrunken box loses the previous argmin node.
    if (!have_best || r->value < best_value ||
        (r->value == best_value &&
         std::lexicographical_compare(pt.data(), pt.data() + d, best_point.data(),
                                      best_point.data() + d))) {
      best_value = r->value;
      best_point = pt;
      have_best = true;
    }
    if (round == spec.refine_rounds) break;
    const Vec half = 0.5 * spec.refine_shrink * (hi - lo);
    Vec nlo = best_point - half, nhi = best_point + half;
    for (int a = 0; a < d; ++a) {
      nlo[a] = std::max(nlo[a], spec.lower[a]);
      nhi[a] = std::min(nhi[a], spec.upper[a]);
      if (!(nlo[a] < nhi[a])) {  // degenerate after clamping, nudge inside
        nlo[a] = std::max(spec.lower[a], best_point[a] - half[a]);
        nhi[a] = std::min(spec.upper[a], best_point[a] + half[a]);
      }
    }
    lo = nlo;
    hi = nhi;
  }

  GridArgminResult out;
  out.point = best_point;
  out.value = best_value;
  out.evals = evals;
  const Vec spacing0 = (spec.upper - spec.lower) / static_cast<double>(k - 1);
  for (int a = 0; a < d; ++a) {
    if (best_point[a] <= spec.lower[a] + spacing0[a] || best_point[a] >= spec.upper[a] - spacing0[a])
      out.on_boundary = true;
  }
  return out;
}

Vec fd_gradient(const std::function<ExtValue(const Vec&)>& f, const Vec& x, double h) {
  if (h <= 0.0) raise_error("InvalidSpec", "fd step must be positive");
  const int d = static_cast<int>(x.size());
  Vec g(d);
  for (int a = 0; a < d; ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    ExtValue fp = f(xp), fm = f(xm);
    if (!fp.is_finite() || !fm.is_finite())
      raise_error("StencilLeavesDomain", "finite-difference stencil hit +inf");
    g[a] = (fp.finite_value() - fm.finite_value()) / (2.0 * h);
  }
  return g;
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite:
      return "positive-definite";
    case Definiteness::PositiveSemidefinite:
      return "positive-semidefinite";
    case Definiteness::NegativeDefinite:
      return "negative-definite";
    case Definiteness::NegativeSemidefinite:
      return "negative-semidefinite";
    default:
      return "indefinite";
  }
}

EigenReport symmetric_eigen(const Mat& M) {
  if (M.rows() != M.cols()) raise_error("NonSquare", "eigen report needs a square matrix");
  const Mat S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.info() != Eigen::Success) raise_error("EigenFailed", "eigensolver did not converge");
  EigenReport r;
  r.eigenvalues = es.eigenvalues();
  r.min_eigenvalue = r.eigenvalues.minCoeff();
  r.max_eigenvalue = r.eigenvalues.maxCoeff();
  const double max_abs = r.eigenvalues.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * max_abs;
  if (r.min_eigenvalue > tol)
    r.definiteness = Definiteness::PositiveDefinite;
  else if (r.min_eigenvalue >= -tol)
    r.definiteness = Definiteness::PositiveSemidefinite;
  else if (r.max_eigenvalue < -tol)
    r.definiteness = Definiteness::NegativeDefinite;
  else if (r.max_eigenvalue <= tol)
    r.definiteness = Definiteness::NegativeSemidefinite;
  else
    r.definiteness = Definiteness::Indefinite;
  return r;
}

Verdict sampled_convexity(const std::function<ExtValue(const Vec&)>& f,
                          const NeighborhoodSpec& region, double modulus, long triple_budget,
                          kernels::Exec exec) {
  const auto pts = sample_neighborhood(region);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pts.size());
  static constexpr double kT[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  constexpr std::ptrdiff_t nt = 9;

  std::vector<double> fv(pts.size());
  std::vector<char> fin(pts.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ExtValue v = f(pts[i]);
    fin[i] = v.is_finite();
    fv[i] = v.raw();
  }

  // Flattened deterministic order: pairs (i<j) lexicographic, t innermost.
  const std::ptrdiff_t npairs = n * (n - 1) / 2;
  const std::ptrdiff_t total = std::min<std::ptrdiff_t>(npairs * nt, triple_budget);

  auto pair_of = [&](std::ptrdiff_t p) {
    std::ptrdiff_t i = 0, before = 0;
    while (before + (n - 1 - i) <= p) before += n - 1 - i++;
    return std::pair<std::ptrdiff_t, std::ptrdiff_t>{i, i + 1 + (p - before)};
  };

  struct Triple {
    Vec x, y;
    double t, lhs, rhs;
  };
  auto eval_triple = [&](std::ptrdiff_t flat, Triple* out) -> bool {  // true = violation
    const auto [i, j] = pair_of(flat / nt);
    if (!fin[i] || !fin[j]) return false;
    const double t = kT[flat % nt];
    const Vec mid = (1.0 - t) * pts[i] + t * pts[j];
    const ExtValue fm = f(mid);
    const double d2 = (pts[i] - pts[j]).squaredNorm();
    const double rhs = (1.0 - t) * fv[i] + t * fv[j] - 0.5 * modulus * t * (1.0 - t) * d2;
    const double tol = 1e-9 * (1.0 + std::abs(fv[i]) + std::abs(fv[j]) + std::abs(rhs));
    if (!fm.is_finite()) {
      if (out) *out = {pts[i], pts[j], t, fm.raw(), rhs};
      return true;
    }
    if (fm.finite_value() > rhs + tol) {
      if (out) *out = {pts[i], pts[j], t, fm.finite_value(), rhs};
      return true;
    }
    return false;
  };

  auto hit = kernels::first_true(
      total, [&](std::ptrdiff_t flat) { return eval_triple(flat, nullptr); }, exec);

  Verdict v;
  v.theorem_tag = "interpolation-inequality";
  v.tolerances["rel_tol"] = 1e-9;
  v.metrics["modulus"] = modulus;
  v.samples_used = total;
  if (hit) {
    Triple w;
    eval_triple(*hit, &w);
    v.status = Status::Fails;
    v.witness.add("x", w.x);
    v.witness.add("y", w.y);
    v.witness.add("t", w.t);
    v.witness.add("lhs", w.lhs);
    v.witness.add("rhs", w.rhs);
  } else {
    v.status = Status::Holds;
  }
  return v;
}

}  // namespace varcvx
