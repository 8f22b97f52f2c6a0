#include "varcvx/nlp.hpp"

#include "varcvx/polyhedral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace varcvx {
namespace {

constexpr double kRankTol = 1e-8;
constexpr double kPosTol = 1e-9;

Mat kernel_of(const Mat& M, int dim) {
  if (M.rows() == 0) return Mat::Identity(dim, dim);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double thresh = std::max(kRankTol * smax, 1e-14);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return svd.matrixV().rightCols(dim - rank);
}

Mat stack_rows(const NlpProblem& p, const Vec& x, const std::vector<int>& ids) {
  Mat M(static_cast<Eigen::Index>(ids.size()), p.n);
  for (size_t j = 0; j < ids.size(); ++j)
    M.row(static_cast<Eigen::Index>(j)) = p.phi[static_cast<size_t>(ids[j]) + 1].grad(x).transpose();
  return M;
}

// Least squares with the minimum-norm solution.
Vec lsq(const Mat& A, const Vec& b) {
  if (A.cols() == 0) return Vec::Zero(0);
  return A.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

std::string index_note(const char* what, int i) {
  std::ostringstream os;
  os << what << " " << i;
  return os.str();
}

}  // namespace

void validate_problem(const NlpProblem& p) {
  if (p.n < 1) raise_error("InvalidSpec", "dimension must be positive");
  if (p.s < 0 || p.s > p.m || p.m < 0) raise_error("InvalidSpec", "need 0 <= s <= m");
  if (p.phi.size() != static_cast<size_t>(p.m) + 1)
    raise_error("InvalidSpec", "phi must hold the objective and m constraints");
  for (const auto& f : p.phi)
    if (!f.value || !f.grad || !f.hess)
      raise_error("InvalidSpec", "every function needs value, grad, and hess");
}

Vec constraint_values(const NlpProblem& p, const Vec& x) {
  Vec z(p.m);
  for (int i = 0; i < p.m; ++i) z[i] = p.phi[static_cast<size_t>(i) + 1].value(x);
  return z;
}

Mat constraint_jacobian(const NlpProblem& p, const Vec& x) {
  Mat J(p.m, p.n);
  for (int i = 0; i < p.m; ++i)
    J.row(i) = p.phi[static_cast<size_t>(i) + 1].grad(x).transpose();
  return J;
}

Mat lagrangian_hessian(const NlpProblem& p, const Vec& x, const Vec& y) {
  if (y.size() != p.m) raise_error("DimensionMismatch", "multiplier size");
  Mat H = p.phi[0].hess(x);
  for (int i = 0; i < p.m; ++i)
    if (y[i] != 0.0) H += y[i] * p.phi[static_cast<size_t>(i) + 1].hess(x);
  return H;
}

Vec lagrangian_gradient(const NlpProblem& p, const Vec& x, const Vec& y) {
  if (y.size() != p.m) raise_error("DimensionMismatch", "multiplier size");
  Vec g = p.phi[0].grad(x);
  for (int i = 0; i < p.m; ++i)
    if (y[i] != 0.0) g += y[i] * p.phi[static_cast<size_t>(i) + 1].grad(x);
  return g;
}

ActiveSets active_sets(const NlpProblem& p, const Vec& x, const Vec& y) {
  validate_problem(p);
  if (y.size() != p.m) raise_error("DimensionMismatch", "multiplier size");
  const Vec z = constraint_values(p, x);
  const double band = activity_band(z);
  ActiveSets as;
  for (int i = 0; i < p.m; ++i) {
    if (i < p.s) {
      if (z[i] > band) raise_error("Infeasible", index_note("inequality violated at constraint", i));
      if (std::abs(z[i]) <= band) {
        as.active.push_back(i);
        if (y[i] > kPosTol) as.active_plus.push_back(i);
      }
    } else {
      if (std::abs(z[i]) > band)
        raise_error("Infeasible", index_note("equality violated at constraint", i));
      as.equalities.push_back(i);
    }
  }
  return as;
}

CriticalSubspace critical_subspace(const NlpProblem& p, const Vec& x, const Vec& y) {
  const ActiveSets as = active_sets(p, x, y);
  CriticalSubspace cs;
  cs.rows_used = as.active_plus;
  cs.rows_used.insert(cs.rows_used.end(), as.equalities.begin(), as.equalities.end());
  cs.basis = kernel_of(stack_rows(p, x, cs.rows_used), p.n);
  return cs;
}

Verdict check_licq(const NlpProblem& p, const Vec& x) {
  validate_problem(p);
  const Vec z = constraint_values(p, x);
  const double band = activity_band(z);
  std::vector<int> rows;
  for (int i = 0; i < p.m; ++i)
    if (i >= p.s || std::abs(z[i]) <= band) rows.push_back(i);

  Verdict out;
  out.theorem_tag = "licq";
  out.tolerances["sv_ratio"] = kRankTol;
  out.metrics["active_rows"] = static_cast<double>(rows.size());
  if (rows.empty()) {
    out.status = Status::Holds;
    out.note = "no active constraints";
    return out;
  }
  const Mat M = stack_rows(p, x, rows);
  for (size_t j = 0; j < rows.size(); ++j) {
    if (M.row(static_cast<Eigen::Index>(j)).norm() <= 1e-14) {
      out.status = Status::Fails;
      out.note = index_note("zero gradient at constraint", rows[j]);
      return out;
    }
  }
  Mat Mn = M;
  for (Eigen::Index r = 0; r < Mn.rows(); ++r) Mn.row(r).normalize();
  Eigen::JacobiSVD<Mat> svd(Mn, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  const double ratio = sv(sv.size() - 1) / std::max(sv(0), 1e-300);
  out.metrics["sv_ratio"] = ratio;
  // More rows than dimensions forces dependence even when every listed
  // singular value is healthy; the trailing left vector still certifies it.
  if (static_cast<int>(rows.size()) <= p.n && ratio > kRankTol) {
    out.status = Status::Holds;
    return out;
  }
  out.status = Status::Fails;
  out.witness.add("dependence", Vec(svd.matrixU().col(svd.matrixU().cols() - 1)));
  out.note = static_cast<int>(rows.size()) > p.n ? "more active gradients than dimensions"
                                                 : "active gradients are linearly dependent";
  return out;
}

Verdict check_plicq(const NlpProblem& p, const Vec& x) {
  validate_problem(p);
  const Vec z = constraint_values(p, x);
  const double band = activity_band(z);
  std::vector<int> act, eqs;
  for (int i = 0; i < p.s; ++i)
    if (std::abs(z[i]) <= band) act.push_back(i);
  for (int i = p.s; i < p.m; ++i) eqs.push_back(i);

  Verdict out;
  out.theorem_tag = "plicq";
  out.tolerances["sv_ratio"] = kRankTol;
  out.metrics["active_inequalities"] = static_cast<double>(act.size());

  // Equality gradients must be independent on their own.
  Mat E = stack_rows(p, x, eqs);
  for (size_t j = 0; j < eqs.size(); ++j) {
    if (E.row(static_cast<Eigen::Index>(j)).norm() <= 1e-14) {
      out.status = Status::Fails;
      out.note = index_note("zero gradient at constraint", eqs[j]);
      return out;
    }
    E.row(static_cast<Eigen::Index>(j)).normalize();
  }
  if (!eqs.empty()) {
    Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullU);
    const Vec sv = svd.singularValues();
    if (static_cast<int>(eqs.size()) > p.n || sv(sv.size() - 1) <= kRankTol * sv(0)) {
      out.status = Status::Fails;
      out.witness.add("dependence", Vec(svd.matrixU().col(svd.matrixU().cols() - 1)));
      out.note = "equality gradients are linearly dependent";
      return out;
    }
  }

  if (act.empty()) {
    out.status = Status::Holds;
    out.note = eqs.empty() ? "no active constraints" : "no active inequalities";
    return out;
  }

  // Orthonormal row-space basis of the equalities for projection.
  Mat Q(static_cast<Eigen::Index>(0), p.n);
  if (!eqs.empty()) {
    Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kRankTol * sv(0)) ++rank;
    Q = svd.matrixV().leftCols(rank).transpose();
  }

  // Projections of the active inequality gradients off the equality span.
  const Mat A = stack_rows(p, x, act);
  std::vector<Vec> bhat;
  std::vector<double> bnorm;
  for (size_t j = 0; j < act.size(); ++j) {
    Vec a = A.row(static_cast<Eigen::Index>(j)).transpose();
    Vec b = a - Q.transpose() * (Q * a);
    if (b.norm() <= 1e-9 * (1.0 + a.norm())) {
      out.status = Status::Fails;
      Vec u = Vec::Zero(p.m);
      u[act[j]] = 1.0;
      const Vec d = lsq(E.transpose(), Vec(-a));
      for (size_t e = 0; e < eqs.size(); ++e) u[eqs[e]] = d[static_cast<Eigen::Index>(e)];
      out.witness.add("combination", u);
      out.note = index_note("inequality gradient lies in the equality span at constraint", act[j]);
      return out;
    }
    bnorm.push_back(b.norm());
    bhat.push_back(Vec(b / b.norm()));
  }

  // Positive dependence exists iff 0 is a convex combination of the projected
  // unit gradients.
  const int k = static_cast<int>(bhat.size());
  std::vector<double> theta;  // barycentric certificate when found
  std::vector<int> sel;       // which active gradients carry it
  auto try_pair = [&](int i, int j) {
    if ((bhat[static_cast<size_t>(i)] + bhat[static_cast<size_t>(j)]).norm() <= 1e-8) {
      theta = {0.5, 0.5};
      sel = {i, j};
      return true;
    }
    return false;
  };
  bool contains_zero = false;
  for (int i = 0; i < k && !contains_zero; ++i)
    for (int j = i + 1; j < k && !contains_zero; ++j) contains_zero = try_pair(i, j);
  if (!contains_zero && k >= 3) {
    if (k <= 3) {
      Mat S(p.n + 1, k);
      for (int j = 0; j < k; ++j) {
        S.col(j).head(p.n) = bhat[static_cast<size_t>(j)];
        S(p.n, j) = 1.0;
      }
      Vec rhs = Vec::Zero(p.n + 1);
      rhs[p.n] = 1.0;
      Vec th = lsq(S, rhs);
      double resid = (S * th - rhs).norm();
      if (resid <= 1e-8) {
        double tmin = th.minCoeff();
        if (tmin < -kPosTol) {
          // Walk the one-dimensional solution line looking for a nonnegative point.
          const Mat N = kernel_of(S, k);
          if (N.cols() == 1) {
            const Vec dir = N.col(0);
            double lo = -std::numeric_limits<double>::infinity();
            double hi = std::numeric_limits<double>::infinity();
            bool empty = false;
            for (int j = 0; j < k; ++j) {
              if (std::abs(dir[j]) <= 1e-14) {
                if (th[j] < -kPosTol) empty = true;
              } else if (dir[j] > 0.0) {
                lo = std::max(lo, -th[j] / dir[j]);
              } else {
                hi = std::min(hi, -th[j] / dir[j]);
              }
            }
            if (!empty && lo <= hi) {
              const double t = std::min(std::max(0.0, lo), hi);
              th += t * dir;
              tmin = th.minCoeff();
            }
          }
        }
        if (tmin >= -kPosTol) {
          contains_zero = true;
          theta.assign(th.data(), th.data() + k);
          sel.resize(static_cast<size_t>(k));
          for (int j = 0; j < k; ++j) sel[static_cast<size_t>(j)] = j;
        }
      }
    } else {
      // Projected gradient on the simplex for min |B theta|^2.
      Mat B(p.n, k);
      for (int j = 0; j < k; ++j) B.col(j) = bhat[static_cast<size_t>(j)];
      Vec th = Vec::Constant(k, 1.0 / k);
      const double step = 0.5 / std::max(symmetric_eigen(B.transpose() * B).max_eigenvalue, 1e-12);
      for (int it = 0; it < 2000; ++it) {
        const Vec cand = th - step * (B.transpose() * (B * th));
        // Euclidean projection onto the simplex: largest prefix with positive
        // shifted entries fixes the threshold.
        Vec srt = cand;
        std::sort(srt.data(), srt.data() + k, std::greater<double>());
        double csum = 0.0, tau = srt[0] - 1.0;
        for (int j = 0; j < k; ++j) {
          csum += srt[j];
          const double t = (csum - 1.0) / (j + 1);
          if (srt[j] - t > 0.0) tau = t;
        }
        for (int j = 0; j < k; ++j) th[j] = std::max(cand[j] - tau, 0.0);
      }
      if ((B * th).norm() <= 1e-7) {
        contains_zero = true;
        theta.assign(th.data(), th.data() + k);
        sel.resize(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) sel[static_cast<size_t>(j)] = j;
        out.note = "iterative simplex search";
      }
    }
  }

  if (!contains_zero) {
    out.status = Status::Holds;
    return out;
  }
  out.status = Status::Fails;
  Vec u = Vec::Zero(p.m);
  Vec combo = Vec::Zero(p.n);
  for (size_t j = 0; j < sel.size(); ++j) {
    const double c = theta[j] / bnorm[static_cast<size_t>(sel[j])];
    u[act[static_cast<size_t>(sel[j])]] = c;
    combo += c * Vec(A.row(sel[j]).transpose());
  }
  const Vec d = lsq(E.transpose(), Vec(-combo));
  for (size_t e = 0; e < eqs.size(); ++e) u[eqs[e]] = d[static_cast<Eigen::Index>(e)];
  out.witness.add("combination", u);
  if (out.note.empty()) out.note = "nonnegative dependence among active gradients";
  return out;
}

KktPoint kkt_solve(const NlpProblem& p, const Vec& x, const Vec& v) {
  validate_problem(p);
  const Vec z = constraint_values(p, x);
  const double band = activity_band(z);
  std::vector<int> rows;
  for (int i = 0; i < p.m; ++i) {
    if (i < p.s) {
      if (z[i] > band) raise_error("Infeasible", index_note("inequality violated at constraint", i));
      if (std::abs(z[i]) <= band) rows.push_back(i);
    } else {
      if (std::abs(z[i]) > band)
        raise_error("Infeasible", index_note("equality violated at constraint", i));
      rows.push_back(i);
    }
  }
  if (!check_licq(p, x).holds())
    raise_error("NonUnique", "active gradients are dependent, multiplier is not unique");

  const Vec b = v - p.phi[0].grad(x);
  const Mat A = stack_rows(p, x, rows).transpose();  // n x r
  const Vec yr = lsq(A, b);
  const double residual = rows.empty() ? b.norm() : (A * yr - b).norm();
  if (residual > 1e-6 * (1.0 + b.norm()))
    raise_error("Infeasible", "target vector is not attainable as a subgradient here");

  KktPoint k;
  k.x = x;
  k.y = Vec::Zero(p.m);
  k.residual = residual;
  const double ytol = rows.empty() ? 0.0 : 1e-9 * (1.0 + yr.cwiseAbs().maxCoeff());
  for (size_t j = 0; j < rows.size(); ++j) {
    double yi = yr[static_cast<Eigen::Index>(j)];
    if (rows[j] < p.s) {
      if (yi < -ytol)
        raise_error("Infeasible", index_note("negative multiplier at constraint", rows[j]));
      yi = std::max(yi, 0.0);
    }
    k.y[rows[j]] = yi;
  }
  return k;
}

SuffReport pointbased_strong_sufficiency(const NlpProblem& p, const KktPoint& k) {
  validate_problem(p);
  SuffReport rep;
  Verdict& out = rep.verdict;
  out.theorem_tag = "pointbased-strong-sufficiency";
  out.tolerances["eig"] = 1e-8;

  const ActiveSets as = active_sets(p, k.x, k.y);
  for (int i = 0; i < p.s; ++i) {
    const bool active = std::find(as.active.begin(), as.active.end(), i) != as.active.end();
    if (!active && std::abs(k.y[i]) > kPosTol)
      raise_error("Infeasible", index_note("multiplier on an inactive constraint", i));
    if (k.y[i] < -kPosTol)
      raise_error("Infeasible", index_note("negative multiplier at constraint", i));
  }

  const CriticalSubspace cs = critical_subspace(p, k.x, k.y);
  out.metrics["critical_dim"] = static_cast<double>(cs.basis.cols());
  if (cs.basis.cols() == 0) {
    out.status = Status::Holds;
    out.note = "critical subspace is trivial";
    rep.sigma = std::numeric_limits<double>::infinity();
    rep.kappa = 0.0;
    out.metrics["kappa"] = 0.0;
    return rep;
  }

  const Mat H = lagrangian_hessian(p, k.x, k.y);
  const Mat R = cs.basis.transpose() * H * cs.basis;
  const EigenReport er = symmetric_eigen(R);
  rep.sigma = er.min_eigenvalue;
  out.metrics["sigma"] = rep.sigma;
  if (er.min_eigenvalue > 1e-8) {
    out.status = Status::Holds;
    rep.kappa = 1.0 / rep.sigma;
    out.metrics["kappa"] = rep.kappa;
    return rep;
  }
  out.status = Status::Fails;
  rep.kappa = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat((R + R.transpose()) / 2.0));
  out.witness.add("direction", Vec(cs.basis * es.eigenvectors().col(0)));
  out.witness.add("curvature", er.min_eigenvalue);
  out.note = "reduced Lagrangian Hessian is not positive definite";
  return rep;
}

Verdict neighborhood_sufficiency(const NlpProblem& p, const KktPoint& ref, double modulus,
                                 const NbhdConfig& cfg) {
  validate_problem(p);
  if (!(modulus >= 0.0)) raise_error("InvalidSpec", "modulus must be nonnegative");

  Verdict out;
  out.theorem_tag = "neighborhood-sufficiency";
  out.tolerances["margin"] = cfg.margin;
  out.metrics["modulus"] = modulus;

  NeighborhoodSpec spec;
  spec.center = ref.x;
  spec.radius = cfg.x_radius;
  spec.sample_count = cfg.x_samples;
  spec.scheme = SampleScheme::RandomSeeded;
  spec.seed = cfg.seed;
  std::vector<Vec> xs = sample_neighborhood(spec);
  xs.insert(xs.begin(), ref.x);

  const double threshold = modulus - std::max(cfg.margin * modulus, 1e-9);
  long skipped_infeasible = 0, skipped_window = 0, evaluated = 0;

  for (const Vec& x : xs) {
    const Vec z = constraint_values(p, x);
    const double band = activity_band(z);
    bool feasible = true;
    std::vector<int> act;
    for (int i = 0; i < p.m && feasible; ++i) {
      if (i < p.s) {
        if (z[i] > band) feasible = false;
        else if (std::abs(z[i]) <= band) act.push_back(i);
      } else if (std::abs(z[i]) > band) {
        feasible = false;
      }
    }
    if (!feasible) {
      ++skipped_infeasible;
      continue;
    }
    std::vector<int> slots = act;
    for (int i = p.s; i < p.m; ++i) slots.push_back(i);

    const Vec g0 = p.phi[0].grad(x);
    const Mat A = stack_rows(p, x, slots).transpose();  // n x r
    Vec ybase = lsq(A, Vec(-g0));
    for (size_t j = 0; j < slots.size(); ++j)
      if (slots[j] < p.s) ybase[static_cast<Eigen::Index>(j)] = std::max(ybase[static_cast<Eigen::Index>(j)], 0.0);

    const int r = static_cast<int>(slots.size());
    const double h = cfg.v_radius / 2.0;
    long combos = 1;
    for (int j = 0; j < r && combos <= cfg.max_combos; ++j) combos *= 3;
    combos = std::min(combos, cfg.max_combos);

    for (long c = 0; c < std::max<long>(combos, 1); ++c) {
      Vec y = Vec::Zero(p.m);
      long code = c;
      bool admissible = true;
      for (int j = 0; j < r; ++j) {
        const int digit = static_cast<int>(code % 3);
        code /= 3;
        const double off = digit == 0 ? 0.0 : (digit == 1 ? h : -h);
        double yi = ybase[j] + off;
        if (slots[static_cast<size_t>(j)] < p.s && yi < 0.0) {
          if (yi < -1e-12) {
            admissible = false;
            break;
          }
          yi = 0.0;
        }
        y[slots[static_cast<size_t>(j)]] = yi;
      }
      if (!admissible) continue;
      const Vec v = lagrangian_gradient(p, x, y);
      if (v.norm() > cfg.v_radius) {
        ++skipped_window;
        continue;
      }
      ++evaluated;
      const CriticalSubspace cs = critical_subspace(p, x, y);
      if (cs.basis.cols() == 0) continue;
      const Mat R = cs.basis.transpose() * lagrangian_hessian(p, x, y) * cs.basis;
      const EigenReport er = symmetric_eigen(R);
      if (er.min_eigenvalue < threshold) {
        out.status = Status::Fails;
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat((R + R.transpose()) / 2.0));
        out.witness.add("x", x);
        out.witness.add("y", y);
        out.witness.add("v", v);
        out.witness.add("direction", Vec(cs.basis * es.eigenvectors().col(0)));
        out.witness.add("curvature", er.min_eigenvalue);
        out.metrics["evaluated"] = static_cast<double>(evaluated);
        out.note = "curvature drops below the modulus on the sampled graph";
        return out;
      }
    }
  }

  out.metrics["evaluated"] = static_cast<double>(evaluated);
  out.metrics["skipped_infeasible"] = static_cast<double>(skipped_infeasible);
  out.metrics["skipped_window"] = static_cast<double>(skipped_window);
  out.samples_used = evaluated;
  if (evaluated == 0) {
    out.status = Status::Inconclusive;
    out.note = "every sampled point left the window or the feasible set";
    return out;
  }
  out.status = Status::Holds;
  return out;
}

Verdict tilt_stability_probe(const NlpProblem& p, const KktPoint& k, const TiltConfig& cfg,
                             kernels::Exec exec) {
  validate_problem(p);
  Verdict out;
  out.theorem_tag = "tilt-stability-probe";
  out.tolerances["factor"] = cfg.factor;

  const SuffReport rep = pointbased_strong_sufficiency(p, k);
  const bool predicted_stable = rep.verdict.holds();
  const double kappa = rep.kappa;
  out.metrics["kappa_pointbased"] = kappa;

  GridSpec gs;
  gs.lower = (k.x.array() - cfg.gamma).matrix();
  gs.upper = (k.x.array() + cfg.gamma).matrix();
  gs.points_per_axis = cfg.points_per_axis;
  gs.refine_rounds = cfg.refine_rounds;
  const double spacing0 = 2.0 * cfg.gamma / (cfg.points_per_axis - 1);
  const double spacing_final =
      spacing0 * std::pow(gs.refine_shrink, std::max(gs.refine_rounds - 1, 0));
  const double tol_loc = std::max(1e-6, 3.0 * spacing_final * std::sqrt(double(p.n)));

  auto localized = [&](const Vec& v) {
    return [&, v](const Vec& x) -> ExtValue {
      const Vec z = constraint_values(p, x);
      const double band = activity_band(z);
      for (int i = 0; i < p.m; ++i) {
        if (i < p.s && z[i] > band) return ExtValue::infinity();
        if (i >= p.s && std::abs(z[i]) > band) return ExtValue::infinity();
      }
      return ExtValue::finite(p.phi[0].value(x) - v.dot(x));
    };
  };

  std::vector<Vec> tilts;
  tilts.push_back(Vec::Zero(p.n));
  NeighborhoodSpec spec;
  spec.center = Vec::Zero(p.n);
  spec.radius = cfg.tilt_radius;
  spec.sample_count = cfg.tilt_samples;
  spec.scheme = SampleScheme::RandomSeeded;
  spec.seed = cfg.seed;
  for (const Vec& v : sample_neighborhood(spec)) tilts.push_back(v);

  std::vector<Vec> argmins;
  bool boundary_hit = false;
  for (const Vec& v : tilts) {
    GridArgminResult res;
    try {
      res = grid_argmin(localized(v), gs, exec);
    } catch (const CheckError& e) {
      out.status = Status::Inconclusive;
      out.note = std::string("grid minimization failed: ") + e.what();
      return out;
    }
    boundary_hit = boundary_hit || res.on_boundary;
    argmins.push_back(res.point);
  }

  const double jump = (argmins[0] - k.x).norm();
  out.metrics["reference_jump"] = jump;
  if (jump > tol_loc) {
    out.status = Status::Fails;
    out.witness.add("argmin_at_zero_tilt", argmins[0]);
    out.note = "untilted argmin leaves the reference point";
    return out;
  }

  double lip = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < tilts.size(); ++i) {
    for (size_t j = i + 1; j < tilts.size(); ++j) {
      const double dv = (tilts[i] - tilts[j]).norm();
      if (dv < cfg.tilt_radius / 10.0) continue;
      lip = std::max(lip, (argmins[i] - argmins[j]).norm() / dv);
      ++pairs;
    }
  }
  out.metrics["lipschitz_estimate"] = lip;
  out.metrics["pairs_used"] = static_cast<double>(pairs);
  const double slack = 20.0 * spacing_final * std::sqrt(double(p.n)) / cfg.tilt_radius;

  if (predicted_stable && boundary_hit) {
    out.status = Status::Inconclusive;
    out.note = "a tilted argmin reached the localization boundary";
    return out;
  }
  if (!predicted_stable) {
    out.status = Status::Inconclusive;
    out.note = "pointbased test is negative but the localized argmin did not move";
    return out;
  }
  if (kappa == 0.0) {
    // Trivial critical subspace: the argmin should barely respond.
    if (lip <= std::max(0.05, slack)) {
      out.status = Status::Holds;
      return out;
    }
    out.status = Status::Fails;
    out.note = "argmin responds although the predicted rate is zero";
    return out;
  }
  if (lip <= cfg.factor * kappa + slack && lip >= kappa / cfg.factor - slack) {
    out.status = Status::Holds;
    return out;
  }
  out.status = Status::Fails;
  out.note = "observed rate leaves the predicted band";
  return out;
}

CompositeProblem nlp_to_composite(const NlpProblem& p) {
  validate_problem(p);
  if (p.m < 1) raise_error("InvalidSpec", "composite form needs at least one constraint");
  CompositeProblem cp;
  cp.phi0.dim = p.n;
  cp.phi0.smooth_order = 2;
  const NlpSmooth f0 = p.phi[0];
  cp.phi0.eval = [f0](const Vec& x) { return ExtValue::finite(f0.value(x)); };
  cp.phi0.gradient = f0.grad;
  cp.phi0.hessian = f0.hess;

  std::vector<NlpSmooth> cons(p.phi.begin() + 1, p.phi.end());
  cp.g.n = p.n;
  cp.g.m = p.m;
  cp.g.eval = [cons](const Vec& x) {
    Vec z(static_cast<Eigen::Index>(cons.size()));
    for (size_t i = 0; i < cons.size(); ++i) z[static_cast<Eigen::Index>(i)] = cons[i].value(x);
    return z;
  };
  cp.g.jacobian = [cons, n = p.n](const Vec& x) {
    Mat J(static_cast<Eigen::Index>(cons.size()), n);
    for (size_t i = 0; i < cons.size(); ++i)
      J.row(static_cast<Eigen::Index>(i)) = cons[i].grad(x).transpose();
    return J;
  };
  cp.g.component_hessian = [cons](const Vec& x, int i) {
    return cons[static_cast<size_t>(i)].hess(x);
  };
  PolyhedralSignature sig;
  sig.s = p.s;
  sig.m = p.m;
  cp.psi = make_polyhedral_psi(sig);
  return cp;
}

NlpProblem composite_to_nlp(const CompositeProblem& cp) {
  if (!cp.psi.polyhedral) raise_error("InvalidSpec", "conversion needs a polyhedral signature");
  if (!cp.phi0.eval || !cp.phi0.gradient || !cp.phi0.hessian)
    raise_error("InvalidSpec", "phi0 needs value, gradient, and hessian");
  if (!cp.g.component_hessian) raise_error("InvalidSpec", "inner map needs component hessians");
  NlpProblem p;
  p.n = cp.g.n;
  p.s = cp.psi.polyhedral->s;
  p.m = cp.psi.polyhedral->m;
  NlpSmooth f0;
  const ExtendedFn phi0 = cp.phi0;
  f0.value = [phi0](const Vec& x) { return phi0.eval(x).finite_value(); };
  f0.grad = phi0.gradient;
  f0.hess = phi0.hessian;
  p.phi.push_back(f0);
  const SmoothMap g = cp.g;
  for (int i = 0; i < p.m; ++i) {
    NlpSmooth fi;
    fi.value = [g, i](const Vec& x) { return g.eval(x)[i]; };
    fi.grad = [g, i](const Vec& x) { return Vec(g.jacobian(x).row(i).transpose()); };
    fi.hess = [g, i](const Vec& x) { return g.component_hessian(x, i); };
    p.phi.push_back(fi);
  }
  return p;
}

}  // namespace varcvx
