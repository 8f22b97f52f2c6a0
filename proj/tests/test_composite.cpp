#include "doctest.h"

#include "varcvx/composite.hpp"
#include "varcvx/nlp.hpp"

#include <cmath>

using namespace varcvx;

namespace {

Vec vec1(double t) {
  Vec x(1);
  x[0] = t;
  return x;
}

Vec vec2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

NlpSmooth smooth1(std::function<double(double)> v, std::function<double(double)> g,
                  std::function<double(double)> h) {
  NlpSmooth s;
  s.value = [v](const Vec& x) { return v(x[0]); };
  s.grad = [g](const Vec& x) { return Vec::Constant(1, g(x[0])); };
  s.hess = [h](const Vec& x) { return Mat::Constant(1, 1, h(x[0])); };
  return s;
}

// min x^2 subject to x <= 0.
NlpProblem quad_ineq() {
  NlpProblem p;
  p.n = 1;
  p.s = 1;
  p.m = 1;
  p.phi.push_back(smooth1([](double t) { return t * t; }, [](double t) { return 2.0 * t; },
                          [](double) { return 2.0; }));
  p.phi.push_back(smooth1([](double t) { return t; }, [](double) { return 1.0; },
                          [](double) { return 0.0; }));
  return p;
}

// min x^2 subject to x <= 0 stated twice; LICQ fails at the origin.
NlpProblem duplicated() {
  NlpProblem p = quad_ineq();
  p.s = 2;
  p.m = 2;
  p.phi.push_back(p.phi[1]);
  return p;
}

// min x subject to x <= 0 and -x <= 0; opposite gradients kill PLICQ.
NlpProblem opposite() {
  NlpProblem p;
  p.n = 1;
  p.s = 2;
  p.m = 2;
  p.phi.push_back(smooth1([](double t) { return t; }, [](double) { return 1.0; },
                          [](double) { return 0.0; }));
  p.phi.push_back(smooth1([](double t) { return t; }, [](double) { return 1.0; },
                          [](double) { return 0.0; }));
  p.phi.push_back(smooth1([](double t) { return -t; }, [](double) { return -1.0; },
                          [](double) { return 0.0; }));
  return p;
}

NlpProblem indefinite() {
  NlpProblem p;
  p.n = 1;
  p.s = 1;
  p.m = 1;
  p.phi.push_back(smooth1([](double t) { return -t * t; }, [](double t) { return -2.0 * t; },
                          [](double) { return -2.0; }));
  p.phi.push_back(smooth1([](double t) { return t; }, [](double) { return 1.0; },
                          [](double) { return 0.0; }));
  return p;
}

}  // namespace

TEST_CASE("polyhedral psi oracle mirrors the membership functions") {
  PolyhedralSignature sig{1, 2};
  PsiOracle psi = make_polyhedral_psi(sig);
  CHECK(psi.m == 2);
  CHECK(psi.eval(vec2(-0.5, 0.0)).finite_value() == 0.0);
  CHECK(!psi.eval(vec2(0.5, 0.0)).is_finite());
  CHECK(!psi.eval(vec2(-0.5, 0.3)).is_finite());

  CHECK(psi.subgrad(vec2(0.0, 0.0), vec2(0.4, -3.0)));
  CHECK(!psi.subgrad(vec2(0.0, 0.0), vec2(-0.4, 0.0)));
  CHECK(psi.singular_subgrad(vec2(-1.0, 0.0), vec2(0.0, 1.0)));
  CHECK(!psi.singular_subgrad(vec2(-1.0, 0.0), vec2(0.3, 0.0)));

  Vec z = vec2(0.0, 0.0), y = vec2(0.0, 1.0), v = vec2(0.2, 0.0);
  CHECK(psi.second_order(z, y, v, vec2(0.7, -1.0)) ==
        second_order_membership(sig, z, y, v, vec2(0.7, -1.0)));
  auto us = psi.extreme_u(z, y, v, 2.0);
  REQUIRE(!us.empty());
  bool has_zero = false;
  for (const auto& u : us) {
    CHECK(psi.second_order(z, y, v, u));
    CHECK(u.lpNorm<Eigen::Infinity>() <= 2.0 + 1e-12);
    has_zero |= u.norm() == 0.0;
  }
  CHECK(has_zero);
  REQUIRE(psi.polyhedral.has_value());
  CHECK(psi.polyhedral->s == 1);
}

TEST_CASE("jacobian rank check certifies failure with a kernel direction") {
  CompositeProblem ok = nlp_to_composite(quad_ineq());
  CHECK(jacobian_full_rank(ok, vec1(0.0)).holds());

  CompositeProblem bad = nlp_to_composite(duplicated());
  auto v = jacobian_full_rank(bad, vec1(0.0));
  REQUIRE(v.fails());
  Vec u = v.witness.get_vec("dependence");
  Mat J = bad.g.jacobian(vec1(0.0));
  CHECK(u.norm() == doctest::Approx(1.0));
  CHECK((J.transpose() * u).norm() < 1e-9);
}

TEST_CASE("multiplier solving enforces sign, uniqueness, and stationarity") {
  CompositeProblem cp = nlp_to_composite(quad_ineq());
  auto ms = solve_multipliers(cp, vec1(0.0), vec1(0.5));
  CHECK(ms.unique);
  CHECK(ms.y[0] == doctest::Approx(0.5));
  CHECK(ms.residual < 1e-10);

  try {
    solve_multipliers(cp, vec1(0.0), vec1(-1.0));
    CHECK(false);
  } catch (const CheckError& e) {
    CHECK(e.code() == "Infeasible");
  }

  CompositeProblem dup = nlp_to_composite(duplicated());
  try {
    solve_multipliers(dup, vec1(0.0), vec1(0.5));
    CHECK(false);
  } catch (const CheckError& e) {
    CHECK(e.code() == "NonUniqueWithoutFullRank");
  }
  auto loose = solve_multipliers(dup, vec1(0.0), vec1(0.5), false);
  CHECK(!loose.unique);
  CHECK(loose.nullspace.cols() >= 1);
  CHECK(loose.residual < 1e-9);
  CHECK(loose.y.sum() == doctest::Approx(0.5));
}

TEST_CASE("qualification conditions distinguish the degenerate geometries") {
  // Duplicated constraint: no nonzero nonnegative kernel combination exists,
  // but the zero-multiplier second-order cell leaves signed directions free.
  CompositeProblem dup = nlp_to_composite(duplicated());
  CHECK(foqc_check(dup, vec1(0.0)).holds());
  auto so = soqc_check(dup, vec1(0.0), vec2(0.0, 0.0));
  REQUIRE(so.fails());
  Vec u = so.witness.get_vec("second_order_direction");
  Mat J = dup.g.jacobian(vec1(0.0));
  CHECK((J.transpose() * u).norm() < 1e-9);
  CHECK(u.norm() > 0.5);

  // Opposite gradients admit the nonnegative combination (1, 1).
  CompositeProblem opp = nlp_to_composite(opposite());
  auto fo = foqc_check(opp, vec1(0.0));
  REQUIRE(fo.fails());
  Vec s = fo.witness.get_vec("singular_direction");
  CHECK(s.minCoeff() >= -1e-12);
  CHECK((opp.g.jacobian(vec1(0.0)).transpose() * s).norm() < 1e-9);

  CompositeProblem ok = nlp_to_composite(quad_ineq());
  CHECK(foqc_check(ok, vec1(0.0)).holds());
  CHECK(soqc_check(ok, vec1(0.0), vec1(0.0)).holds());
}

TEST_CASE("full-rank sufficiency reads the reduced curvature") {
  CompositeProblem cp = nlp_to_composite(quad_ineq());
  CHECK(full_rank_sufficiency(cp, vec1(0.0), 1.9).holds());
  auto bad = full_rank_sufficiency(cp, vec1(0.0), 2.5);
  REQUIRE(bad.fails());
  CHECK(bad.witness.get_scalar("curvature") == doctest::Approx(2.0));
  CHECK(bad.witness.get_vec("direction").norm() > 0.0);

  CompositeProblem ind = nlp_to_composite(indefinite());
  CHECK(full_rank_sufficiency(ind, vec1(0.0), 0.0).fails());

  SuffConfig nbhd;
  nbhd.mode = SuffMode::Neighborhood;
  auto nv = full_rank_sufficiency(cp, vec1(0.0), 1.5, nbhd);
  CHECK(nv.holds());
  CHECK(nv.theorem_tag == "full-rank-sufficiency");

  CompositeProblem dup = nlp_to_composite(duplicated());
  try {
    full_rank_sufficiency(dup, vec1(0.0), 1.0);
    CHECK(false);
  } catch (const CheckError& e) {
    CHECK(e.code() == "JacobianRankDeficient");
  }
}

TEST_CASE("the composite bridge round-trips problem data") {
  NlpProblem p = quad_ineq();
  CompositeProblem cp = nlp_to_composite(p);
  CHECK(cp.phi0.eval(vec1(1.5)).finite_value() == doctest::Approx(2.25));
  CHECK(cp.g.eval(vec1(1.5))[0] == doctest::Approx(1.5));
  CHECK(cp.g.jacobian(vec1(1.5))(0, 0) == doctest::Approx(1.0));

  NlpProblem back = composite_to_nlp(cp);
  CHECK(back.n == p.n);
  CHECK(back.s == p.s);
  CHECK(back.m == p.m);
  for (double t : {-0.7, 0.0, 1.2}) {
    CHECK(back.phi[0].value(vec1(t)) == doctest::Approx(p.phi[0].value(vec1(t))));
    CHECK(back.phi[1].value(vec1(t)) == doctest::Approx(p.phi[1].value(vec1(t))));
  }
}
