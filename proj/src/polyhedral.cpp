#include "varcvx/polyhedral.hpp"

#include <algorithm>
#include <cmath>

namespace varcvx {

void validate_signature(const PolyhedralSignature& sig) {
  if (sig.m < 1 || sig.s < 0 || sig.s > sig.m)
    raise_error("InvalidSpec", "signature requires 0 <= s <= m and m >= 1");
}

double activity_band(const Vec& z) { return 1e-9 * (1.0 + z.norm()); }

namespace {

constexpr double kPosTol = 1e-9;

enum class Slot { IneqFree, IneqBoundary, EqBoundary, Outside };

Slot classify(const PolyhedralSignature& sig, double zi, int i, double band) {
  if (i < sig.s) {
    if (std::abs(zi) <= band) return Slot::IneqBoundary;
    if (zi < 0.0) return Slot::IneqFree;
    return Slot::Outside;
  }
  return std::abs(zi) <= band ? Slot::EqBoundary : Slot::Outside;
}

bool zeroish(double t, double band) { return std::abs(t) <= band; }

// Cell of the subdifferential graph's normal cone at one inequality slot with
// z_i = 0, y_i = 0: union of the corner product, the horizontal line, and the
// vertical line, taken on pairs (u_i, -v_i).
bool corner_cell(double ui, double vi, double band) {
  if (ui >= -band && vi >= -band) return true;  // u_i >= 0, v_i >= 0
  if (zeroish(vi, band)) return true;           // v_i = 0, u_i free
  if (zeroish(ui, band)) return true;           // u_i = 0, v_i free
  return false;
}

}  // namespace

bool in_omega(const PolyhedralSignature& sig, const Vec& z) {
  validate_signature(sig);
  if (z.size() != sig.m) raise_error("DimensionMismatch", "z does not match the signature");
  const double band = activity_band(z);
  for (int i = 0; i < sig.m; ++i) {
    if (classify(sig, z[i], i, band) == Slot::Outside) return false;
  }
  return true;
}

bool normal_cone_membership(const PolyhedralSignature& sig, const Vec& z, const Vec& y) {
  validate_signature(sig);
  if (z.size() != sig.m || y.size() != sig.m)
    raise_error("DimensionMismatch", "z or y does not match the signature");
  if (!in_omega(sig, z)) return false;
  const double band = activity_band(z);
  for (int i = 0; i < sig.m; ++i) {
    switch (classify(sig, z[i], i, band)) {
      case Slot::IneqBoundary:
        if (y[i] < -kPosTol) return false;
        break;
      case Slot::IneqFree:
        if (!zeroish(y[i], kPosTol)) return false;
        break;
      case Slot::EqBoundary:
        break;  // y_i free
      case Slot::Outside:
        return false;
    }
  }
  return true;
}

bool second_order_membership(const PolyhedralSignature& sig, const Vec& z, const Vec& y,
                             const Vec& v, const Vec& u) {
  validate_signature(sig);
  if (z.size() != sig.m || y.size() != sig.m || v.size() != sig.m || u.size() != sig.m)
    raise_error("DimensionMismatch", "argument does not match the signature");
  const double band = activity_band(z);
  const double vband = 1e-9 * (1.0 + v.norm());
  const double uband = 1e-9 * (1.0 + u.norm());
  for (int i = 0; i < sig.m; ++i) {
    const Slot slot = classify(sig, z[i], i, band);
    if (slot == Slot::Outside) return false;
    if (slot == Slot::IneqFree) {
      if (!zeroish(y[i], kPosTol)) return false;  // empty cell off the graph
      if (!zeroish(u[i], uband)) return false;
      continue;
    }
    if (slot == Slot::EqBoundary) {
      if (!zeroish(v[i], vband)) return false;
      continue;
    }
    // Inequality boundary: split on y_i.
    if (y[i] > kPosTol) {
      if (!zeroish(v[i], vband)) return false;
    } else if (y[i] < -kPosTol) {
      return false;  // not a point of the subdifferential graph
    } else {
      if (!corner_cell(u[i], v[i], std::max(uband, vband))) return false;
    }
  }
  return true;
}

bool nlp_membership_condition(const PolyhedralSignature& sig, const std::vector<int>& active,
                              const std::vector<int>& active_plus, const Mat& G, const Vec& w,
                              const Vec& u) {
  validate_signature(sig);
  if (G.rows() != sig.m || G.cols() != w.size() || u.size() != sig.m)
    raise_error("DimensionMismatch", "gradient rows or u do not match the signature");
  std::vector<char> is_active(sig.m, 0), is_plus(sig.m, 0);
  for (int i : active) is_active[i] = 1;
  for (int i : active_plus) is_plus[i] = 1;
  const Vec v = G * w;
  const double vband = 1e-9 * (1.0 + v.norm());
  const double uband = 1e-9 * (1.0 + u.norm());
  for (int i = 0; i < sig.m; ++i) {
    if (i < sig.s && !is_active[i]) {
      if (!zeroish(u[i], uband)) return false;  // inactive inequality pins u_i = 0
      continue;
    }
    if (i >= sig.s || is_plus[i]) {
      if (!zeroish(v[i], vband)) return false;  // equality or strictly active: <grad, w> = 0
      continue;
    }
    // Active inequality with zero multiplier: the corner union cell.
    if (!corner_cell(u[i], v[i], std::max(uband, vband))) return false;
  }
  return true;
}

}  // namespace varcvx
