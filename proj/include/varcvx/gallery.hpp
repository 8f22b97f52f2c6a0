#pragma once

// Built-in example functions and NLP instances with closed-form proximal
// mappings, analytic subdifferential graphs, and stored expected outcomes.
// The registry backs both the CLI and the end-to-end tests.

#include <string>
#include <vector>

#include "varcvx/nlp.hpp"
#include "varcvx/varconv.hpp"

namespace varcvx::gallery {

// One stored expectation: which check, at which reference pair, with which
// modulus, and the status (or error code) the checkers must reproduce.
struct KnownFact {
  std::string check;  // vc | svc | local-convexity | prox-regularity |
                      // monotone-cut | monotone-nocut | local-min-grid |
                      // licq | plicq | pointbased | neighborhood | tilt
  Vec ref_x;
  Vec ref_v;
  double modulus = 0.0;
  Status expected = Status::Holds;
  bool expect_error = false;
  std::string error_code;
  std::string note;
};

struct GalleryEntry {
  std::string id;
  std::string summary;
  bool is_nlp = false;
  ExtendedFn fn;                                         // when !is_nlp
  std::function<Vec(const Vec&, double)> analytic_prox;  // (x, lambda), optional
  NlpProblem nlp;                                        // when is_nlp
  Vec ref_x;
  Vec ref_v;
  std::vector<KnownFact> known_facts;
};

std::vector<std::string> gallery_ids();

// Errors: UnknownId. quad(<sigma>) takes a positive numeric parameter, e.g.
// "quad(2)"; all other ids are fixed strings.
GalleryEntry get(const std::string& id);

// Discretizes the entry's closed-form subdifferential graph inside the
// window; density <= 0 takes window.density. Errors: UnknownId,
// NoAnalyticGraph, DimTooHigh (l0 above n = 3).
SubgradGraphSample analytic_graph(const std::string& id, const GraphWindow& window,
                                  int density = 0);

struct FactOutcome {
  Verdict verdict;
  bool errored = false;
  std::string error_code;
};

// Runs one stored expectation through the public checkers. seed = 0 keeps
// each checker's default; the CLI passes --seed through here so reports and
// tests share a single code path. Checker errors are captured, not thrown.
FactOutcome run_known_fact(const GalleryEntry& entry, const KnownFact& fact,
                           std::uint64_t seed = 0);

}  // namespace varcvx::gallery
