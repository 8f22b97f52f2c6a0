#pragma once

// Exact multivariate polynomials, the only expression format the problem-spec
// files accept. Values, gradients, and Hessians come from termwise calculus,
// so problems built from them carry exact second-order data.

#include <vector>

#include "varcvx/nlp.hpp"

namespace varcvx {

struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> exponents;  // one entry per variable, each >= 0
};

struct Polynomial {
  int dim = 1;
  std::vector<PolyTerm> terms;
};

// Errors: InvalidSpec (bad dim, exponent arity mismatch, negative exponent,
// non-finite coefficient).
void validate_polynomial(const Polynomial& p);

double poly_value(const Polynomial& p, const Vec& x);
Vec poly_gradient(const Polynomial& p, const Vec& x);
Mat poly_hessian(const Polynomial& p, const Vec& x);

NlpSmooth to_nlp_smooth(const Polynomial& p);
ExtendedFn to_extended_fn(const Polynomial& p);  // smooth_order 2

}  // namespace varcvx
