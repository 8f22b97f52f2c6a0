#include "varcvx/cli.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "varcvx/gallery.hpp"
#include "varcvx/polynomial.hpp"
#include "varcvx/report.hpp"

namespace varcvx::cli {

namespace {

using nlohmann::json;

struct SpecCheck {
  std::string name;
  double modulus = 0.0;
  std::vector<double> lambdas;
  double window = 0.0;  // 0 keeps each checker's default
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  int points = 0;
};

struct ProblemSpec {
  std::string kind;
  std::string gallery_id;
  std::vector<Polynomial> polys;
  int s = 0;
  int m = 0;
  Vec ref_point;
  Vec ref_subgradient;
  SpecCheck check;
  json raw;  // echoed into the report
};

Vec parse_vec(const json& a, const char* what) {
  if (!a.is_array() || a.empty()) raise_error("SpecInvalid", std::string(what) + " must be a nonempty array");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) raise_error("SpecInvalid", std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

Polynomial parse_polynomial(const json& terms, int dim, const char* what) {
  if (!terms.is_array()) raise_error("SpecInvalid", std::string(what) + " must be an array of terms");
  Polynomial p;
  p.dim = dim;
  for (const json& t : terms) {
    if (!t.is_object() || !t.contains("coeff") || !t.contains("exponents"))
      raise_error("SpecInvalid", "each term needs coeff and exponents");
    PolyTerm pt;
    pt.coeff = t.at("coeff").get<double>();
    for (const json& e : t.at("exponents")) {
      if (!e.is_number_integer()) raise_error("SpecInvalid", "exponents must be integers");
      pt.exponents.push_back(e.get<int>());
    }
    p.terms.push_back(std::move(pt));
  }
  validate_polynomial(p);
  return p;
}

ProblemSpec parse_spec(const json& j) {
  if (!j.is_object()) raise_error("SpecInvalid", "spec must be a JSON object");
  if (j.value("schema", 0) != 1) raise_error("SpecInvalid", "unsupported or missing schema (want 1)");
  ProblemSpec s;
  s.raw = j;
  s.kind = j.value("kind", "");
  if (s.kind != "function" && s.kind != "nlp")
    raise_error("SpecInvalid", "kind must be \"function\" or \"nlp\"");
  if (!j.contains("ref_point")) raise_error("SpecInvalid", "ref_point is required");
  s.ref_point = parse_vec(j.at("ref_point"), "ref_point");
  s.ref_subgradient = j.contains("ref_subgradient")
                          ? parse_vec(j.at("ref_subgradient"), "ref_subgradient")
                          : Vec(Vec::Zero(s.ref_point.size()));
  if (s.ref_subgradient.size() != s.ref_point.size())
    raise_error("SpecInvalid", "ref_subgradient size differs from ref_point");
  s.gallery_id = j.value("gallery_id", "");
  const int n = static_cast<int>(s.ref_point.size());
  if (j.contains("polynomial_terms")) {
    if (!s.gallery_id.empty())
      raise_error("SpecInvalid", "give gallery_id or polynomial_terms, not both");
    for (const json& lst : j.at("polynomial_terms"))
      s.polys.push_back(parse_polynomial(lst, n, "polynomial_terms"));
  }
  if (s.gallery_id.empty() && s.polys.empty())
    raise_error("SpecInvalid", "one of gallery_id or polynomial_terms is required");
  s.s = j.value("s", 0);
  s.m = j.value("m", 0);
  if (j.contains("check")) {
    const json& c = j.at("check");
    if (!c.is_object()) raise_error("SpecInvalid", "check must be an object");
    s.check.name = c.value("name", "");
    s.check.modulus = c.value("modulus", 0.0);
    if (c.contains("lambda_list"))
      for (const json& l : c.at("lambda_list")) s.check.lambdas.push_back(l.get<double>());
    s.check.window = c.value("window", 0.0);
    s.check.seed = c.value("seed", std::uint64_t{0});
    s.check.points = c.value("points", 0);
    if (c.contains("tolerances"))
      for (auto it = c.at("tolerances").begin(); it != c.at("tolerances").end(); ++it)
        s.check.tolerances[it.key()] = it.value().get<double>();
  }
  return s;
}

json load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise_error("SpecInvalid", "cannot read spec file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    raise_error("SpecInvalid", std::string("spec is not valid JSON: ") + e.what());
  }
}

struct FunctionProblem {
  ExtendedFn fn;
  std::function<Vec(const Vec&, double)> analytic_prox;
};

FunctionProblem build_function(const ProblemSpec& s) {
  if (s.kind != "function") raise_error("SpecInvalid", "this command needs kind = function");
  FunctionProblem fp;
  if (!s.gallery_id.empty()) {
    gallery::GalleryEntry e = gallery::get(s.gallery_id);
    if (e.is_nlp) raise_error("SpecInvalid", s.gallery_id + " is an NLP instance");
    fp.fn = e.fn;
    fp.analytic_prox = e.analytic_prox;
  } else {
    if (s.polys.size() != 1)
      raise_error("SpecInvalid", "kind = function takes exactly one polynomial");
    fp.fn = to_extended_fn(s.polys[0]);
  }
  fp.fn.dim = static_cast<int>(s.ref_point.size());
  return fp;
}

NlpProblem build_nlp(const ProblemSpec& s) {
  if (s.kind != "nlp") raise_error("SpecInvalid", "this command needs kind = nlp");
  if (!s.gallery_id.empty()) {
    gallery::GalleryEntry e = gallery::get(s.gallery_id);
    if (!e.is_nlp) raise_error("SpecInvalid", s.gallery_id + " is not an NLP instance");
    return e.nlp;
  }
  NlpProblem p;
  p.n = static_cast<int>(s.ref_point.size());
  p.s = s.s;
  p.m = s.m;
  p.name = "spec-nlp";
  if (static_cast<int>(s.polys.size()) != s.m + 1)
    raise_error("SpecInvalid", "polynomial_terms needs m + 1 entries (objective first)");
  for (const Polynomial& poly : s.polys) p.phi.push_back(to_nlp_smooth(poly));
  validate_problem(p);
  return p;
}

struct Options {
  std::string spec_path;
  std::string out_path;
  std::string csv_path;
  std::string id_filter;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int exit_code_of(Status s) {
  switch (s) {
    case Status::Holds: return 0;
    case Status::Fails: return 1;
    default: return 2;
  }
}

int emit(report::RunReport& r, const Options& opt, int code,
         const std::chrono::steady_clock::time_point& t0) {
  r.wall_time_seconds = seconds_since(t0);
  const std::string text = report::report_to_string(r);
  std::cout << text;
  if (!opt.out_path.empty()) report::write_text_file(opt.out_path, text);
  return code;
}

std::uint64_t effective_seed(const Options& opt, const ProblemSpec& spec) {
  return opt.seed_set ? opt.seed : spec.check.seed;
}

int cmd_check_vc(const ProblemSpec& spec, bool require_strong, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const FunctionProblem fp = build_function(spec);
  const double modulus = spec.check.modulus;
  if (require_strong && !(modulus > 0.0))
    raise_error("SpecInvalid", "check-svc needs check.modulus > 0");
  const RefPair p = make_refpair(fp.fn, spec.ref_point, spec.ref_subgradient);
  VcConfig cfg;
  cfg.analytic_prox = fp.analytic_prox;
  if (spec.check.window > 0.0) {
    cfg.x_radius = spec.check.window;
    cfg.v_radius = spec.check.window;
    cfg.epsilon = spec.check.window;
  }
  if (!spec.check.lambdas.empty()) cfg.lambdas = spec.check.lambdas;
  if (auto it = spec.check.tolerances.find("r_max"); it != spec.check.tolerances.end())
    cfg.r_max = it->second;
  Verdict v = check_variational_convexity(fp.fn, p, modulus, cfg);
  report::RunReport r;
  r.command = require_strong ? "check-svc" : "check-vc";
  r.config = spec.raw;
  const int code = exit_code_of(v.status);
  r.verdicts.push_back({"variational-convexity", std::move(v)});
  return emit(r, opt, code, t0);
}

int cmd_check_nlp(const ProblemSpec& spec, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const NlpProblem p = build_nlp(spec);
  report::RunReport r;
  r.command = "check-nlp";
  r.config = spec.raw;
  r.extra = json::object();

  Verdict licq = check_licq(p, spec.ref_point);
  Verdict plicq = check_plicq(p, spec.ref_point);
  const bool licq_ok = licq.holds();
  r.verdicts.push_back({"licq", std::move(licq)});
  r.verdicts.push_back({"plicq", std::move(plicq)});
  if (!licq_ok) {
    r.extra["error"] = {{"code", "LicqFailed"},
                        {"detail", "active gradients are dependent; multipliers are not unique"}};
    return emit(r, opt, 3, t0);
  }

  const KktPoint k = kkt_solve(p, spec.ref_point, spec.ref_subgradient);
  r.extra["kkt"] = {{"x", std::vector<double>(k.x.data(), k.x.data() + k.x.size())},
                    {"y", std::vector<double>(k.y.data(), k.y.data() + k.y.size())},
                    {"residual", report::json_double(k.residual)}};

  SuffReport sr = pointbased_strong_sufficiency(p, k);
  r.extra["sigma"] = report::json_double(sr.sigma);
  r.extra["kappa"] = report::json_double(sr.kappa);

  const std::string name = spec.check.name.empty() ? "pointbased" : spec.check.name;
  Verdict main;
  if (name == "pointbased") {
    main = sr.verdict;
  } else if (name == "neighborhood") {
    NbhdConfig cfg;
    if (const std::uint64_t sd = effective_seed(opt, spec)) cfg.seed = sd;
    if (spec.check.window > 0.0) {
      cfg.x_radius = spec.check.window;
      cfg.v_radius = spec.check.window;
    }
    main = neighborhood_sufficiency(p, k, spec.check.modulus, cfg);
  } else if (name == "tilt") {
    TiltConfig cfg;
    if (const std::uint64_t sd = effective_seed(opt, spec)) cfg.seed = sd;
    main = tilt_stability_probe(p, k, cfg);
  } else {
    raise_error("SpecInvalid", "check.name must be pointbased, neighborhood, or tilt");
  }
  r.verdicts.push_back({"pointbased", sr.verdict});
  const int code = exit_code_of(main.status);
  if (name != "pointbased") r.verdicts.push_back({name, std::move(main)});
  return emit(r, opt, code, t0);
}

int cmd_envelope_scan(const ProblemSpec& spec, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const FunctionProblem fp = build_function(spec);
  const int dim = fp.fn.dim;
  if (dim > 2) raise_error("DimTooHigh", "envelope-scan handles 1-D and 2-D only");
  std::vector<double> lambdas = spec.check.lambdas;
  if (lambdas.empty()) lambdas = {0.5};
  const double half = spec.check.window > 0.0 ? spec.check.window : 2.0;
  const int pts = spec.check.points > 0 ? spec.check.points : (dim == 1 ? 401 : 41);
  if (pts < 3) raise_error("SpecInvalid", "points must be at least 3");

  std::vector<std::string> header{"lambda"};
  for (int a = 0; a < dim; ++a) header.push_back("x" + std::to_string(a));
  header.push_back("envelope");
  for (int a = 0; a < dim; ++a) header.push_back("grad" + std::to_string(a));
  header.push_back("curvature");

  std::vector<std::vector<double>> rows;
  const long nodes_total = dim == 1 ? pts : static_cast<long>(pts) * pts;
  for (double lam : lambdas) {
    EnvelopeOptions eo;
    if (fp.analytic_prox) {
      auto ap = fp.analytic_prox;
      eo.analytic_prox = [ap, lam](const Vec& x) { return ap(x, lam); };
    }
    const EnvelopeHandle h = make_envelope(fp.fn, lam, eo);
    const double spacing = 2.0 * half / (pts - 1);
    std::vector<double> env(static_cast<std::size_t>(nodes_total));
    std::vector<Vec> grads(static_cast<std::size_t>(nodes_total));
    std::vector<Vec> xs(static_cast<std::size_t>(nodes_total));
    for (long idx = 0; idx < nodes_total; ++idx) {
      Vec x(dim);
      if (dim == 1) {
        x[0] = spec.ref_point[0] - half + spacing * static_cast<double>(idx);
      } else {
        x[0] = spec.ref_point[0] - half + spacing * static_cast<double>(idx / pts);
        x[1] = spec.ref_point[1] - half + spacing * static_cast<double>(idx % pts);
      }
      xs[static_cast<std::size_t>(idx)] = x;
      env[static_cast<std::size_t>(idx)] = envelope(h, x);
      Vec g(dim);
      try {
        g = envelope_gradient(h, x);
      } catch (const CheckError&) {
        g.setConstant(std::numeric_limits<double>::quiet_NaN());  // multivalued node
      }
      grads[static_cast<std::size_t>(idx)] = g;
    }
    auto second_diff = [&](long idx, int axis) {
      const long stride = (dim == 1 || axis == 1) ? 1 : pts;
      const long per = pts;
      const long coord = dim == 1 ? idx : (axis == 0 ? idx / pts : idx % pts);
      long c = std::clamp(coord, 1L, per - 2L);
      const long base = idx + (c - coord) * stride;
      return (env[static_cast<std::size_t>(base + stride)] -
              2.0 * env[static_cast<std::size_t>(base)] +
              env[static_cast<std::size_t>(base - stride)]) /
             (spacing * spacing);
    };
    for (long idx = 0; idx < nodes_total; ++idx) {
      double curv = second_diff(idx, 0);
      if (dim == 2) curv = std::min(curv, second_diff(idx, 1));
      std::vector<double> row{lam};
      for (int a = 0; a < dim; ++a) row.push_back(xs[static_cast<std::size_t>(idx)][a]);
      row.push_back(env[static_cast<std::size_t>(idx)]);
      for (int a = 0; a < dim; ++a) row.push_back(grads[static_cast<std::size_t>(idx)][a]);
      row.push_back(curv);
      rows.push_back(std::move(row));
    }
  }
  report::write_text_file(opt.csv_path, report::csv_from_rows(header, rows));
  report::RunReport r;
  r.command = "envelope-scan";
  r.config = spec.raw;
  r.extra = {{"csv", opt.csv_path}, {"rows", static_cast<long>(rows.size())}};
  return emit(r, opt, 0, t0);
}

int cmd_gallery(const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> ids =
      opt.id_filter.empty() ? gallery::gallery_ids() : std::vector<std::string>{opt.id_filter};
  report::RunReport r;
  r.command = "gallery";
  r.config = {{"id", opt.id_filter.empty() ? "all" : opt.id_filter}, {"seed", opt.seed}};
  json facts = json::array();
  bool all_ok = true;
  for (const std::string& id : ids) {
    const gallery::GalleryEntry entry = gallery::get(id);
    for (std::size_t i = 0; i < entry.known_facts.size(); ++i) {
      const gallery::KnownFact& fact = entry.known_facts[i];
      const gallery::FactOutcome outcome = gallery::run_known_fact(entry, fact, opt.seed);
      const bool reproduced =
          fact.expect_error ? (outcome.errored && outcome.error_code == fact.error_code)
                            : (!outcome.errored && outcome.verdict.status == fact.expected);
      all_ok = all_ok && reproduced;
      const std::string label = id + ":" + fact.check + ":" + std::to_string(i);
      facts.push_back({{"label", label},
                       {"id", id},
                       {"check", fact.check},
                       {"expected", fact.expect_error ? "error:" + fact.error_code
                                                      : to_string(fact.expected)},
                       {"observed", outcome.errored ? "error:" + outcome.error_code
                                                    : to_string(outcome.verdict.status)},
                       {"reproduced", reproduced}});
      r.verdicts.push_back({label, outcome.verdict});
    }
  }
  r.extra = {{"facts", std::move(facts)}};
  return emit(r, opt, all_ok ? 0 : 1, t0);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"numerical checks for variational convexity and sufficiency"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sc, bool need_spec) {
    auto* sp = sc->add_option("--spec", opt.spec_path, "JSON problem spec file");
    if (need_spec) sp->required();
    sc->add_option("--seed", opt.seed, "seed for sampled checks");
    sc->add_option("--out", opt.out_path, "write the JSON report to this file");
    return sc;
  };

  CLI::App* vc = add_common(app.add_subcommand("check-vc", "variational convexity at a reference pair"), true);
  CLI::App* svc = add_common(app.add_subcommand("check-svc", "variational strong convexity (modulus > 0)"), true);
  CLI::App* nlp = add_common(app.add_subcommand("check-nlp", "sufficiency checks for an NLP instance"), true);
  CLI::App* scan = add_common(app.add_subcommand("envelope-scan", "CSV scan of the Moreau envelope"), true);
  scan->add_option("--csv", opt.csv_path, "write the CSV scan to this file")->required();
  CLI::App* gal = add_common(app.add_subcommand("gallery", "re-run every stored gallery expectation"), false);
  gal->add_option("--id", opt.id_filter, "restrict to one gallery id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    for (CLI::App* sc : {vc, svc, nlp, scan}) opt.seed_set = opt.seed_set || sc->count("--seed") > 0;
    opt.seed_set = opt.seed_set || gal->count("--seed") > 0;
    if (gal->parsed()) return cmd_gallery(opt);
    const ProblemSpec spec = parse_spec(load_spec_file(opt.spec_path));
    if (vc->parsed()) return cmd_check_vc(spec, false, opt);
    if (svc->parsed()) return cmd_check_vc(spec, true, opt);
    if (nlp->parsed()) return cmd_check_nlp(spec, opt);
    if (scan->parsed()) return cmd_envelope_scan(spec, opt);
  } catch (const CheckError& e) {
    json err{{"error", {{"code", e.code()}, {"detail", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    if (!opt.out_path.empty()) {
      try {
        report::write_text_file(opt.out_path, err.dump(2) + "\n");
      } catch (const CheckError&) {
        // the primary failure is already on stdout
      }
    }
    return 3;
  }
  return 3;  // unreachable with require_subcommand(1)
}

}  // namespace varcvx::cli
