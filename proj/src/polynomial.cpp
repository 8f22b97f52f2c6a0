#include "varcvx/polynomial.hpp"

#include <cmath>

namespace varcvx {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

// d/dx (x^e) evaluated as e * x^(e-1); zero for e == 0 regardless of x.
double dpow(double base, int e) { return e == 0 ? 0.0 : e * ipow(base, e - 1); }

double ddpow(double base, int e) {
  return e < 2 ? 0.0 : static_cast<double>(e) * (e - 1) * ipow(base, e - 2);
}

}  // namespace

void validate_polynomial(const Polynomial& p) {
  if (p.dim < 1) raise_error("InvalidSpec", "polynomial dimension must be positive");
  for (const PolyTerm& t : p.terms) {
    if (!std::isfinite(t.coeff)) raise_error("InvalidSpec", "non-finite coefficient");
    if (static_cast<int>(t.exponents.size()) != p.dim)
      raise_error("InvalidSpec", "exponent list does not match the dimension");
    for (int e : t.exponents)
      if (e < 0) raise_error("InvalidSpec", "negative exponent");
  }
}

double poly_value(const Polynomial& p, const Vec& x) {
  double s = 0.0;
  for (const PolyTerm& t : p.terms) {
    double m = t.coeff;
    for (int i = 0; i < p.dim; ++i) m *= ipow(x[i], t.exponents[static_cast<std::size_t>(i)]);
    s += m;
  }
  return s;
}

Vec poly_gradient(const Polynomial& p, const Vec& x) {
  Vec g = Vec::Zero(p.dim);
  for (const PolyTerm& t : p.terms) {
    for (int j = 0; j < p.dim; ++j) {
      double m = t.coeff;
      for (int i = 0; i < p.dim; ++i) {
        const int e = t.exponents[static_cast<std::size_t>(i)];
        m *= i == j ? dpow(x[i], e) : ipow(x[i], e);
      }
      g[j] += m;
    }
  }
  return g;
}

Mat poly_hessian(const Polynomial& p, const Vec& x) {
  Mat h = Mat::Zero(p.dim, p.dim);
  for (const PolyTerm& t : p.terms) {
    for (int j = 0; j < p.dim; ++j) {
      for (int k = j; k < p.dim; ++k) {
        double m = t.coeff;
        for (int i = 0; i < p.dim; ++i) {
          const int e = t.exponents[static_cast<std::size_t>(i)];
          if (j == k)
            m *= i == j ? ddpow(x[i], e) : ipow(x[i], e);
          else
            m *= (i == j || i == k) ? dpow(x[i], e) : ipow(x[i], e);
        }
        h(j, k) += m;
        if (j != k) h(k, j) += m;
      }
    }
  }
  return h;
}

NlpSmooth to_nlp_smooth(const Polynomial& p) {
  validate_polynomial(p);
  NlpSmooth s;
  s.value = [p](const Vec& x) { return poly_value(p, x); };
  s.grad = [p](const Vec& x) { return poly_gradient(p, x); };
  s.hess = [p](const Vec& x) { return poly_hessian(p, x); };
  return s;
}

ExtendedFn to_extended_fn(const Polynomial& p) {
  validate_polynomial(p);
  ExtendedFn f;
  f.dim = p.dim;
  f.smooth_order = 2;
  f.eval = [p](const Vec& x) { return ExtValue::finite(poly_value(p, x)); };
  f.gradient = [p](const Vec& x) { return poly_gradient(p, x); };
  f.hessian = [p](const Vec& x) { return poly_hessian(p, x); };
  return f;
}

}  // namespace varcvx
