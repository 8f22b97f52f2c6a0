#pragma once

// Membership tests for the model polyhedron
//   Omega = { z : z_i <= 0 for i < s, z_i = 0 for s <= i < m }
// and for the graphical derivative cells of its indicator's subdifferential.
// All tests are componentwise with activity band |z_i| <= 1e-9 (1 + |z|) and
// strict-positivity threshold y_i > 1e-9.

#include "varcvx/core.hpp"

namespace varcvx {

struct PolyhedralSignature {
  int s = 0;  // number of inequality components, first s slots
  int m = 1;  // total components
};

void validate_signature(const PolyhedralSignature& sig);

double activity_band(const Vec& z);

bool in_omega(const PolyhedralSignature& sig, const Vec& z);

// y in N_Omega(z): componentwise
//   i < s: y_i >= 0 when z_i = 0, y_i = 0 when z_i < 0;
//   i >= s: z_i = 0, y_i free.
// False (not an error) when z is outside Omega.
bool normal_cone_membership(const PolyhedralSignature& sig, const Vec& z, const Vec& y);

// (u, v) cell test: u in D(z, y)(v) for the subdifferential of the indicator,
// componentwise on (z_i, y_i):
//   inequality slot, z_i = 0, y_i = 0: (u_i >= 0 and v_i >= 0) or v_i = 0 or u_i = 0;
//   inequality slot, z_i = 0, y_i > 0: v_i = 0, u_i free;
//   inequality slot, z_i < 0, y_i = 0: u_i = 0, v_i free;
//   equality slot,   z_i = 0:          v_i = 0, u_i free;
//   anything else: empty cell.
bool second_order_membership(const PolyhedralSignature& sig, const Vec& z, const Vec& y,
                             const Vec& v, const Vec& u);

// The same condition phrased on constraint data: active set I (inequality
// indices with z_i = 0), strictly active I_plus (y_i > 0), gradient rows G
// (m x n), direction w, multiplier perturbation u. Evaluates
//   u in D(g(x), y)(G w)
// through the activity classification instead of z. Must agree with
// second_order_membership when fed v = G w and the matching z.
bool nlp_membership_condition(const PolyhedralSignature& sig, const std::vector<int>& active,
                              const std::vector<int>& active_plus, const Mat& G, const Vec& w,
                              const Vec& u);

}  // namespace varcvx
