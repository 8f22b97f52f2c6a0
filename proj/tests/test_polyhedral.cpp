#include "doctest.h"

#include "varcvx/polyhedral.hpp"

#include <cmath>
#include <random>

using namespace varcvx;

namespace {

Vec mkvec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double t : vals) v[i++] = t;
  return v;
}

// Independent restatement of the documented componentwise cell table. Sampled
// coordinates are either exactly zero or at least 0.05 in magnitude, so the
// activity bands of the implementation and the exact comparisons here agree.
bool cell_table(const PolyhedralSignature& sig, const Vec& z, const Vec& y, const Vec& v,
                const Vec& u) {
  for (int i = 0; i < sig.m; ++i) {
    const bool z0 = z[i] == 0.0;
    if (i < sig.s) {
      if (!z0 && z[i] > 0.0) return false;
      if (z0 && y[i] > 0.0) {
        if (v[i] != 0.0) return false;
      } else if (z0 && y[i] == 0.0) {
        bool ok = (u[i] >= 0.0 && v[i] >= 0.0) || v[i] == 0.0 || u[i] == 0.0;
        if (!ok) return false;
      } else if (!z0 && y[i] == 0.0) {
        if (u[i] != 0.0) return false;
      } else {
        return false;  // z < 0 with y > 0, or y < 0: off the graph
      }
    } else {
      if (!z0) return false;
      if (v[i] != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("signature validation enforces 0 <= s <= m and m >= 1") {
  CHECK_THROWS_AS(validate_signature({-1, 2}), CheckError);
  CHECK_THROWS_AS(validate_signature({3, 2}), CheckError);
  CHECK_THROWS_AS(validate_signature({0, 0}), CheckError);
  validate_signature({0, 1});
  validate_signature({2, 2});
}

TEST_CASE("polyhedron membership splits inequality and equality slots") {
  PolyhedralSignature sig{1, 2};
  CHECK(in_omega(sig, mkvec({-1.0, 0.0})));
  CHECK(in_omega(sig, mkvec({0.0, 0.0})));
  CHECK(!in_omega(sig, mkvec({0.5, 0.0})));
  CHECK(!in_omega(sig, mkvec({-1.0, 0.2})));
  CHECK_THROWS_AS(in_omega(sig, mkvec({0.0})), CheckError);
}

TEST_CASE("normal cone membership follows the complementarity pattern") {
  PolyhedralSignature sig{1, 2};
  CHECK(normal_cone_membership(sig, mkvec({0.0, 0.0}), mkvec({0.3, -7.0})));
  CHECK(!normal_cone_membership(sig, mkvec({0.0, 0.0}), mkvec({-0.1, 0.0})));
  CHECK(normal_cone_membership(sig, mkvec({-1.0, 0.0}), mkvec({0.0, 2.0})));
  CHECK(!normal_cone_membership(sig, mkvec({-1.0, 0.0}), mkvec({0.2, 0.0})));
  CHECK(!normal_cone_membership(sig, mkvec({0.3, 0.0}), mkvec({0.0, 0.0})));
}

TEST_CASE("second-order cells behave per slot kind") {
  PolyhedralSignature ineq{1, 1};
  const Vec z0 = mkvec({0.0}), zneg = mkvec({-1.0});
  const Vec y0 = mkvec({0.0}), y1 = mkvec({1.0});

  // Corner: union of the product quadrant and the two axes.
  CHECK(second_order_membership(ineq, z0, y0, mkvec({0.5}), mkvec({0.7})));
  CHECK(second_order_membership(ineq, z0, y0, mkvec({-0.5}), mkvec({0.0})));
  CHECK(second_order_membership(ineq, z0, y0, mkvec({0.0}), mkvec({-0.9})));
  CHECK(!second_order_membership(ineq, z0, y0, mkvec({-0.5}), mkvec({0.7})));
  CHECK(!second_order_membership(ineq, z0, y0, mkvec({0.6}), mkvec({-0.2})));

  // Strictly active inequality pins v.
  CHECK(second_order_membership(ineq, z0, y1, mkvec({0.0}), mkvec({-3.0})));
  CHECK(!second_order_membership(ineq, z0, y1, mkvec({0.1}), mkvec({0.0})));

  // Inactive inequality pins u.
  CHECK(second_order_membership(ineq, zneg, y0, mkvec({0.4}), mkvec({0.0})));
  CHECK(!second_order_membership(ineq, zneg, y0, mkvec({0.0}), mkvec({0.1})));
  CHECK(!second_order_membership(ineq, zneg, y1, mkvec({0.0}), mkvec({0.0})));

  // Negative multiplier is off the graph entirely.
  CHECK(!second_order_membership(ineq, z0, mkvec({-1.0}), mkvec({0.0}), mkvec({0.0})));

  PolyhedralSignature eq{0, 1};
  CHECK(second_order_membership(eq, z0, mkvec({5.0}), mkvec({0.0}), mkvec({2.0})));
  CHECK(!second_order_membership(eq, z0, mkvec({5.0}), mkvec({0.2}), mkvec({2.0})));
  CHECK(!second_order_membership(eq, mkvec({0.3}), y0, mkvec({0.0}), mkvec({0.0})));
}

TEST_CASE("second-order membership agrees with the table on random draws") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mag(0.05, 1.0);
  auto draw = [&](double zero_prob) {
    if (std::generate_canonical<double, 32>(rng) < zero_prob) return 0.0;
    double s = std::generate_canonical<double, 32>(rng) < 0.5 ? -1.0 : 1.0;
    return s * mag(rng);
  };
  for (int m = 1; m <= 3; ++m) {
    for (int s = 0; s <= m; ++s) {
      PolyhedralSignature sig{s, m};
      for (int rep = 0; rep < 10000; ++rep) {
        Vec z(m), y(m), v(m), u(m);
        for (int i = 0; i < m; ++i) {
          z[i] = draw(0.5);
          y[i] = draw(0.5);
          v[i] = draw(0.35);
          u[i] = draw(0.35);
        }
        bool got = second_order_membership(sig, z, y, v, u);
        bool want = cell_table(sig, z, y, v, u);
        REQUIRE(got == want);
      }
    }
  }
}

TEST_CASE("constraint-data membership matches the explicit cell test") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  const int n = 2;
  for (int m = 1; m <= 3; ++m) {
    for (int s = 0; s <= m; ++s) {
      PolyhedralSignature sig{s, m};
      for (int rep = 0; rep < 600; ++rep) {
        Mat G(m, n);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) G(i, j) = un(rng);
        Vec w(n), u(m), z(m), y(m);
        const bool zero_w = rep % 3 == 0;
        for (int j = 0; j < n; ++j) w[j] = zero_w ? 0.0 : un(rng);
        std::vector<int> active, plus;
        for (int i = 0; i < m; ++i) {
          u[i] = rep % 5 == 1 ? 0.0 : un(rng);
          if (i < s) {
            bool act = (rng() & 1u) != 0;
            z[i] = act ? 0.0 : -0.25 - 0.5 * std::generate_canonical<double, 32>(rng);
            y[i] = 0.0;
            if (act) {
              active.push_back(i);
              if ((rng() & 1u) != 0) {
                plus.push_back(i);
                y[i] = 0.7;
              }
            }
          } else {
            z[i] = 0.0;
            y[i] = un(rng);
          }
        }
        bool via_data = nlp_membership_condition(sig, active, plus, G, w, u);
        bool via_cells = second_order_membership(sig, z, y, Vec(G * w), u);
        REQUIRE(via_data == via_cells);
      }
    }
  }
}
