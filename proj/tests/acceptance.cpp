// Acceptance gates for the toolkit. Each criterion prints one PASS/FAIL line
// with the measured quantity; the exit status is nonzero when any line fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "varcvx/composite.hpp"
#include "varcvx/gallery.hpp"
#include "varcvx/moreau.hpp"
#include "varcvx/nlp.hpp"
#include "varcvx/oracles.hpp"
#include "varcvx/polyhedral.hpp"
#include "varcvx/varconv.hpp"

using namespace varcvx;

namespace {

int g_failed = 0;

void line(int idx, const char* what, bool pass, const std::string& metric) {
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, what, metric.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

template <class F>
void guarded(int idx, const char* what, F&& body) {
  try {
    const std::pair<bool, std::string> r = body();
    line(idx, what, r.first, r.second);
  } catch (const CheckError& e) {
    line(idx, what, false, std::string("unexpected error ") + e.what());
  } catch (const std::exception& e) {
    line(idx, what, false, std::string("exception: ") + e.what());
  }
}

Vec vec1(double t) {
  Vec v(1);
  v[0] = t;
  return v;
}

std::string num(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kFnIds = {"abs",    "quad(2)", "neg-quad", "huber-target",
                                         "l0",     "logsum",  "step",     "dl-counterexample"};

// --- criterion 1: grid envelope of |x| against the Huber closed form -------

std::pair<bool, std::string> c1_huber() {
  ExtendedFn f = gallery::get("abs").fn;
  f.dim = 1;
  EnvelopeOptions opts;
  opts.refine_rounds = 7;
  const double lam = 0.5;
  const EnvelopeHandle h = make_envelope(f, lam, opts);
  const auto t0 = std::chrono::steady_clock::now();
  double max_err = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / 400.0;
    const double closed = std::abs(x) <= lam ? x * x / (2.0 * lam) : std::abs(x) - lam / 2.0;
    max_err = std::max(max_err, std::abs(envelope(h, vec1(x)) - closed));
  }
  const double el = seconds_since(t0);
  return {max_err <= 1e-6 && el < 1.0,
          "max err " + num(max_err) + " on 401 points, " + num(el) + " s"};
}

// --- criterion 2: envelope gradients against central differences -----------

std::pair<bool, std::string> c2_gradients() {
  double worst = 0.0;
  bool counts_ok = true;
  std::vector<std::string> skipped;
  for (const std::string& id : kFnIds) {
    const gallery::GalleryEntry entry = gallery::get(id);
    for (double lam : {0.5, 0.25, 0.1}) {
      ExtendedFn f = entry.fn;
      f.dim = 1;
      EnvelopeOptions eo;
      double hs = 1e-6;
      if (entry.analytic_prox) {
        auto ap = entry.analytic_prox;
        eo.analytic_prox = [ap, lam](const Vec& x) { return ap(x, lam); };
        // The gradient-vs-difference comparison below is itself the
        // consistency check, so the construction-time grid probe is off.
        eo.validate_analytic = false;
      } else {
        eo.refine_rounds = 10;
        hs = 1e-3;
      }
      EnvelopeHandle h;
      try {
        h = make_envelope(f, lam, eo);
        (void)prox(h, vec1(0.7));
      } catch (const CheckError&) {
        skipped.push_back(id + "@" + num(lam));
        continue;
      }
      int clean = 0;
      for (int i = 0; i < 120 && clean < 50; ++i) {
        const double x = -1.5 + 3.0 * static_cast<double>(i) / 119.0;
        Vec g;
        try {
          g = envelope_gradient(h, vec1(x));
        } catch (const CheckError&) {
          continue;  // prox is multivalued here, the gradient does not exist
        }
        const ProxResult pp = prox(h, vec1(x + hs));
        const ProxResult pm = prox(h, vec1(x - hs));
        const ProxResult p0 = prox(h, vec1(x));
        // The stencil must sit on one smooth prox branch or the difference
        // quotient straddles an envelope kink and measures nothing.
        const double swing = std::abs(pp.point[0] - pm.point[0]);
        const double bend = std::abs(pp.point[0] - 2.0 * p0.point[0] + pm.point[0]);
        if (swing > 10.0 * hs + 1e-9 || bend > 1e-5) continue;
        const double fd = (pp.envelope_value - pm.envelope_value) / (2.0 * hs);
        worst = std::max(worst, std::abs(g[0] - fd));
        ++clean;
      }
      if (clean != 50) counts_ok = false;
    }
  }
  const bool skips_ok = skipped.size() == 1 && skipped[0] == "neg-quad@0.5";
  std::string note = "max |grad-fd| " + num(worst) + " over 23 combos x 50 points";
  if (!skips_ok) {
    note += ", unexpected skips:";
    for (const auto& s : skipped) note += " " + s;
  } else {
    note += ", skipped neg-quad@0.5 (envelope undefined there)";
  }
  return {worst <= 1e-4 && counts_ok && skips_ok, note};
}

// --- criterion 3: quadratic-shift envelope identities -----------------------

std::pair<bool, std::string> c3_shift_identities() {
  EnvelopeOptions eo;
  eo.refine_rounds = 8;
  const std::vector<Vec> pts = {vec1(-0.7931), vec1(0.3137), vec1(1.0807)};
  double worst = 0.0;
  for (const std::string& id : kFnIds) {
    ExtendedFn f = gallery::get(id).fn;
    f.dim = 1;
    for (double sigma : {-1.0, -0.5, 0.5, 1.0}) {
      for (double gamma : {0.1, 0.25}) {
        const ShiftResidual r = shift_envelope_residual(f, sigma, vec1(0.0), gamma, pts, eo);
        worst = std::max({worst, r.forward, r.inverse});
      }
    }
  }
  return {worst <= 1e-5, "max residual " + num(worst) + " over 8 functions x 8 (sigma,gamma)"};
}

// --- criterion 4: modulus transport through the envelope --------------------

std::pair<bool, std::string> c4_modulus_transport() {
  ExtendedFn f;
  f.dim = 1;
  f.smooth_order = 2;
  f.eval = [](const Vec& x) { return ExtValue::finite(x.squaredNorm()); };
  f.gradient = [](const Vec& x) { return Vec(2.0 * x); };
  f.hessian = [](const Vec& x) { return Mat(2.0 * Mat::Identity(x.size(), x.size())); };
  EnvelopeOptions opts;
  opts.analytic_prox = [](const Vec& x) { return Vec(x / 2.0); };
  const EnvelopeHandle h = make_envelope(f, 0.5, opts);

  double dev = 0.0;
  for (double step : {0.1, 0.01, 1e-3}) {
    for (double x : {-0.4, -0.1, 0.2, 0.5}) {
      const double m2 = (envelope(h, vec1(x + step)) - 2.0 * envelope(h, vec1(x)) +
                         envelope(h, vec1(x - step))) /
                        (step * step);
      dev = std::max(dev, std::abs(m2 - 1.0));
    }
  }

  auto env_eval = [&h](const Vec& z) { return ExtValue::finite(envelope(h, z)); };
  NeighborhoodSpec region;
  region.center = vec1(0.0);
  region.radius = 0.5;
  region.sample_count = 41;
  const Verdict at_one = sampled_convexity(env_eval, region, 1.0);
  const Verdict at_more = sampled_convexity(env_eval, region, 1.1);
  return {dev <= 1e-8 && at_one.holds() && at_more.fails(),
          "curvature dev " + num(dev) + ", modulus 1.0 " + to_string(at_one.status) +
              ", 1.1 " + to_string(at_more.status)};
}

// --- criterion 5: l0 is variationally convex but not locally convex ---------

std::pair<bool, std::string> c5_l0_variational() {
  const gallery::GalleryEntry entry = gallery::get("l0");
  ExtendedFn f = entry.fn;
  f.dim = 1;
  VcConfig cfg;
  cfg.analytic_prox = entry.analytic_prox;

  bool holds_all = true, routes_all = true;
  for (double vb : {0.0, 0.5, -0.5}) {
    const RefPair p = make_refpair(f, vec1(0.0), vec1(vb));
    const Verdict v = check_variational_convexity(f, p, 0.0, cfg);
    holds_all = holds_all && v.holds();
    bool gate = false, mono = false, ineq = false, env = false;
    for (const auto& [label, d] : v.details) {
      if (label == "prox-regularity") gate = d.holds();
      if (label == "graph-monotonicity") mono = d.holds();
      if (label == "subgradient-inequality") ineq = d.holds();
      if (label.rfind("envelope-convexity", 0) == 0 && d.holds()) env = true;
    }
    routes_all = routes_all && gate && mono && ineq && env;
  }

  NeighborhoodSpec region;
  region.center = vec1(0.0);
  region.radius = 1.0;
  region.sample_count = 41;
  const Verdict plain = sampled_convexity([&f](const Vec& z) { return f.eval(z); }, region, 0.0);
  bool witness_ok = plain.fails();
  if (witness_ok) {
    const double wx = plain.witness.get_vec("x")[0];
    const double wy = plain.witness.get_vec("y")[0];
    const double wt = plain.witness.get_scalar("t");
    const double lhs = plain.witness.get_scalar("lhs");
    const double rhs = plain.witness.get_scalar("rhs");
    const double mid = f.eval(vec1(wt * wx + (1.0 - wt) * wy)).finite_value();
    witness_ok = std::abs(mid - lhs) <= 1e-12 && lhs > rhs + 1e-12;
  }

  GraphWindow w;
  w.x_center = vec1(0.0);
  w.v_center = vec1(0.0);
  w.epsilon = 0.5;
  const SubgradGraphSample g = gallery::analytic_graph("l0", w);
  bool graph_ok = !g.points.empty();
  for (const auto& pt : g.points) graph_ok = graph_ok && pt.x[0] == 0.0;

  return {holds_all && routes_all && witness_ok && graph_ok,
          std::string("vc holds at v in {0,0.5,-0.5} via all routes: ") +
              (holds_all && routes_all ? "yes" : "no") +
              ", plain convexity " + to_string(plain.status) + " with replayed witness, " +
              num(static_cast<double>(g.points.size())) + " graph points all at x=0"};
}

// --- criterion 6: the value cut decides step-function monotonicity ----------

std::pair<bool, std::string> c6_step_cut() {
  GraphWindow w;
  w.x_center = vec1(0.0);
  w.v_center = vec1(0.0);
  w.epsilon = 0.5;
  const Verdict with_cut = check_monotone(gallery::analytic_graph("step", w), 0.0);

  GraphWindow wn = w;
  wn.epsilon = 1e9;  // effectively no cut
  const Verdict no_cut = check_monotone(gallery::analytic_graph("step", wn), 0.0);

  bool witness_ok = no_cut.fails();
  if (witness_ok) {
    const double x1 = no_cut.witness.get_vec("x1")[0];
    const double v1 = no_cut.witness.get_vec("v1")[0];
    const double x2 = no_cut.witness.get_vec("x2")[0];
    const double v2 = no_cut.witness.get_vec("v2")[0];
    const bool shape_a = x1 == 0.0 && v1 > 0.0 && x2 > 0.0 && v2 == 0.0;
    const bool shape_b = x2 == 0.0 && v2 > 0.0 && x1 > 0.0 && v1 == 0.0;
    witness_ok = (shape_a || shape_b) && (v1 - v2) * (x1 - x2) < 0.0;
  }
  return {with_cut.holds() && no_cut.fails() && witness_ok,
          "with cut " + to_string(with_cut.status) + ", without " + to_string(no_cut.status) +
              ", witness pairs the vertical segment against the high branch"};
}

// --- criterion 7: staircase defeats prox-regularity up to r = 1e3 -----------

std::pair<bool, std::string> c7_staircase() {
  const gallery::GalleryEntry entry = gallery::get("dl-counterexample");
  ExtendedFn f = entry.fn;
  f.dim = 1;
  const RefPair p = make_refpair(f, vec1(0.0), vec1(0.0));
  const SubgradGraphSample graph = enumerate_graph(f, p, 0.5, 0.5, 0.5);
  const Verdict v = check_prox_regularity(f, p, 0.5, 1e3, graph);

  bool triple_ok = v.fails();
  double needed = 0.0;
  if (triple_ok) {
    needed = v.witness.get_scalar("needed_r");
    const double wx = v.witness.get_vec("x")[0];
    const double wu = v.witness.get_vec("u")[0];
    const double wv = v.witness.get_vec("v")[0];
    const double lhs = f.eval(vec1(wx)).finite_value();
    const double rhs = f.eval(vec1(wu)).finite_value() + wv * (wx - wu) -
                       (1e3 / 2.0) * (wx - wu) * (wx - wu);
    triple_ok = needed > 1e3 && lhs < rhs - 1e-12;
  }

  GridSpec gs;
  gs.lower = vec1(-0.25);
  gs.upper = vec1(0.25);
  gs.points_per_axis = 401;
  gs.refine_rounds = 0;
  const GridArgminResult r = grid_argmin([&f](const Vec& z) { return f.eval(z); }, gs);
  const bool grid_ok = std::abs(r.point[0]) <= 2e-3 && r.value <= 2.2e-3 && r.value >= 0.0;

  bool fact_ok = false;
  for (const auto& fact : entry.known_facts)
    if (fact.check == "local-min-grid")
      fact_ok = gallery::run_known_fact(entry, fact).verdict.holds();

  return {triple_ok && grid_ok && fact_ok,
          "violating triple at r=1e3 with needed r " + num(needed) + ", grid argmin " +
              num(r.point[0]) + " value " + num(r.value)};
}

// --- criterion 8: cell membership against the componentwise table -----------

// Independent restatement of the componentwise table; draws keep every
// coordinate either exactly 0 or at least 0.05 in magnitude so the band
// semantics of the implementation coincide with exact comparisons.
bool cell_table(int s, const Vec& z, const Vec& y, const Vec& v, const Vec& u) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (i < s) {
      if (z[i] > 0.0) return false;
      if (z[i] < 0.0) {
        if (y[i] != 0.0 || u[i] != 0.0) return false;
      } else if (y[i] < 0.0) {
        return false;
      } else if (y[i] > 0.0) {
        if (v[i] != 0.0) return false;
      } else if (!((u[i] >= 0.0 && v[i] >= 0.0) || v[i] == 0.0 || u[i] == 0.0)) {
        return false;
      }
    } else {
      if (z[i] != 0.0 || v[i] != 0.0) return false;
    }
  }
  return true;
}

std::pair<bool, std::string> c8_cell_membership() {
  long total = 0, disagreements = 0;
  for (int m = 1; m <= 3; ++m) {
    for (int s = 0; s <= m; ++s) {
      const PolyhedralSignature sig{s, m};
      std::mt19937_64 rng(1000 + 10 * static_cast<unsigned>(s) + static_cast<unsigned>(m));
      std::uniform_real_distribution<double> pick(0.0, 1.0);
      std::uniform_real_distribution<double> mag(0.05, 1.0);
      auto draw = [&]() {
        Vec r(m);
        for (int i = 0; i < m; ++i) {
          const double c = pick(rng);
          r[i] = c < 1.0 / 3.0 ? 0.0 : (c < 2.0 / 3.0 ? mag(rng) : -mag(rng));
        }
        return r;
      };
      for (int it = 0; it < 10000; ++it) {
        const Vec z = draw(), y = draw(), v = draw(), u = draw();
        ++total;
        if (second_order_membership(sig, z, y, v, u) != cell_table(s, z, y, v, u))
          ++disagreements;
      }
    }
  }
  return {disagreements == 0, std::to_string(total) + " draws over 9 signatures, " +
                                  std::to_string(disagreements) + " disagreements"};
}

// --- criterion 9: NLP sufficiency against hand-derived reduced Hessians -----

std::pair<bool, std::string> c9_nlp_gallery() {
  const gallery::GalleryEntry quad = gallery::get("nlp-quad-ineq");
  const gallery::GalleryEntry lin = gallery::get("nlp-linear-ineq");
  const gallery::GalleryEntry indef = gallery::get("nlp-indefinite");
  const gallery::GalleryEntry degen = gallery::get("nlp-degenerate-licq");

  // Reduced Hessians by hand: quad has curvature 2 on a free critical line,
  // lin pins the critical subspace to {0}, indef has curvature -2.
  const KktPoint kq = kkt_solve(quad.nlp, quad.ref_x, quad.ref_v);
  const SuffReport rq = pointbased_strong_sufficiency(quad.nlp, kq);
  bool ok = rq.verdict.holds() && rq.sigma == 2.0 && rq.kappa == 0.5 &&
            rq.kappa * rq.sigma == 1.0;

  const KktPoint kl = kkt_solve(lin.nlp, lin.ref_x, lin.ref_v);
  const SuffReport rl = pointbased_strong_sufficiency(lin.nlp, kl);
  ok = ok && rl.verdict.holds() && rl.kappa == 0.0 && std::isinf(rl.sigma);

  const KktPoint ki = kkt_solve(indef.nlp, indef.ref_x, indef.ref_v);
  const SuffReport ri = pointbased_strong_sufficiency(indef.nlp, ki);
  ok = ok && ri.verdict.fails() && ri.sigma == -2.0;

  bool degen_ok = false;
  try {
    (void)kkt_solve(degen.nlp, degen.ref_x, degen.ref_v);
  } catch (const CheckError& e) {
    degen_ok = e.code() == "NonUnique";
  }
  ok = ok && degen_ok;

  // Constant-Hessian instances: the radius-0.1 neighborhood check must agree
  // with the pointbased verdict.
  const bool nb_agree = neighborhood_sufficiency(quad.nlp, kq, 2.0).holds() ==
                            rq.verdict.holds() &&
                        neighborhood_sufficiency(lin.nlp, kl, 1.0).holds() ==
                            rl.verdict.holds() &&
                        neighborhood_sufficiency(indef.nlp, ki, 0.5).holds() ==
                            ri.verdict.holds();

  const Verdict tilt = tilt_stability_probe(quad.nlp, kq);
  const double lip = tilt.metrics.count("lipschitz_estimate")
                         ? tilt.metrics.at("lipschitz_estimate")
                         : -1.0;
  const bool tilt_ok = tilt.holds() && lip >= 0.5 / 1.5 - 1e-3 && lip <= 0.5 * 1.5 + 1e-3;

  return {ok && nb_agree && tilt_ok,
          "sigma {2, inf, -2} kappa*sigma=1, degenerate multipliers NonUnique, "
          "neighborhood agrees, tilt rate " +
              num(lip) + " vs kappa 0.5"};
}

// --- criterion 10: constraint qualification equivalences --------------------

std::pair<bool, std::string> c10_cq_equivalences() {
  std::mt19937_64 rng(515);
  int licq_held = 0, plicq_held = 0;
  bool agree = true, implication = true;
  for (int it = 0; it < 100; ++it) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    const int s = static_cast<int>(rng() % static_cast<unsigned>(m + 1));
    NlpProblem p;
    p.n = n;
    p.s = s;
    p.m = m;
    p.name = "random-cq";
    NlpSmooth obj;
    obj.value = [](const Vec& x) { return x.squaredNorm(); };
    obj.grad = [](const Vec& x) { return Vec(2.0 * x); };
    obj.hess = [](const Vec& x) { return Mat(2.0 * Mat::Identity(x.size(), x.size())); };
    p.phi.push_back(obj);
    for (int i = 0; i < m; ++i) {
      Vec a(n);
      for (int j = 0; j < n; ++j) a[j] = static_cast<double>(static_cast<int>(rng() % 3) - 1);
      const double c = (i < s && (rng() & 1u)) ? -1.0 : 0.0;  // equalities stay active
      NlpSmooth g;
      g.value = [a, c](const Vec& x) { return a.dot(x) + c; };
      g.grad = [a](const Vec&) { return a; };
      g.hess = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
      p.phi.push_back(g);
    }
    const Vec x0 = Vec::Zero(n);
    const bool licq = check_licq(p, x0).holds();
    const bool plicq = check_plicq(p, x0).holds();
    const CompositeProblem cp = nlp_to_composite(p);
    const bool soqc = soqc_check(cp, x0, Vec::Zero(m)).holds();
    const bool foqc = foqc_check(cp, x0).holds();
    agree = agree && licq == soqc && plicq == foqc;
    implication = implication && (!soqc || foqc);
    licq_held += licq ? 1 : 0;
    plicq_held += plicq ? 1 : 0;
  }
  return {agree && implication, "100 instances, LICQ held " + std::to_string(licq_held) +
                                    ", PLICQ held " + std::to_string(plicq_held) +
                                    ", equivalences and implication intact"};
}

// --- criterion 11: seeded CLI runs are byte-identical ------------------------

int run_cli(const std::string& args, std::string& out) {
  namespace fs = std::filesystem;
  static int counter = 0;
  const fs::path cap = fs::temp_directory_path() /
                       ("varcvx-acc-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter++) + ".out");
  const std::string cmd =
      std::string("\"") + VARCVX_CLI_PATH + "\" " + args + " > " + cap.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(cap);
  std::stringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  fs::remove(cap);
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::pair<bool, std::string> c11_cli_determinism(const std::chrono::steady_clock::time_point& t0) {
  std::string out1, out2;
  const int rc1 = run_cli("gallery --seed 7", out1);
  const int rc2 = run_cli("gallery --seed 7", out2);
  if (rc1 != 0 || rc2 != 0)
    return {false, "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2)};
  nlohmann::json j1 = nlohmann::json::parse(out1);
  nlohmann::json j2 = nlohmann::json::parse(out2);
  j1.erase("wall_time_seconds");
  j2.erase("wall_time_seconds");
  const std::string d1 = j1.dump();
  const bool identical = d1 == j2.dump() && !d1.empty();
  const std::size_t facts = j1.contains("facts") ? j1["facts"].size() : 0;
  const double el = seconds_since(t0);
  return {identical && el < 60.0, std::to_string(facts) + " facts, reports byte-identical " +
                                      "after dropping wall time, suite " + num(el) + " s"};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  guarded(1, "grid envelope of |x| at lambda 0.5 matches the Huber form", c1_huber);
  guarded(2, "envelope gradients match central differences across the gallery", c2_gradients);
  guarded(3, "quadratic-shift envelope identities close at sampled points", c3_shift_identities);
  guarded(4, "envelope of x^2 carries modulus sigma/(1+sigma*lambda) = 1", c4_modulus_transport);
  guarded(5, "l0 is variationally convex at (0,v) yet not locally convex", c5_l0_variational);
  guarded(6, "step-function monotonicity needs the function-value cut", c6_step_cut);
  guarded(7, "staircase witness defeats prox-regularity for every r <= 1e3", c7_staircase);
  guarded(8, "cell membership matches brute-force sign-pattern enumeration", c8_cell_membership);
  guarded(9, "NLP sufficiency verdicts match hand-derived reduced Hessians", c9_nlp_gallery);
  guarded(10, "LICQ<=>SOQC and PLICQ<=>FOQC on random small instances", c10_cq_equivalences);
  guarded(11, "seeded CLI gallery runs are byte-identical and fast",
          [&t0]() { return c11_cli_determinism(t0); });
  std::printf("%d/11 criteria passed\n", 11 - g_failed);
  return g_failed == 0 ? 0 : 1;
}
