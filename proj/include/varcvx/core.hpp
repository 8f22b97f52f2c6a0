#pragma once

// Shared vocabulary types: extended-real values, extended-real-valued function
// handles with optional smooth and subgradient-graph oracles, reference pairs,
// neighborhood sampling, and the Verdict record returned by every checker.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace varcvx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error with a stable machine-readable code; what() carries code and detail.
class CheckError : public std::runtime_error {
 public:
  CheckError(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] void raise_error(const std::string& code, const std::string& detail);

// Extended real: a finite double or +infinity. NaN is rejected at construction,
// -infinity is not representable (functions are assumed proper).
class ExtValue {
 public:
  ExtValue() : v_(0.0) {}
  static ExtValue finite(double v);
  static ExtValue infinity() {
    ExtValue e;
    e.v_ = std::numeric_limits<double>::infinity();
    return e;
  }
  // Accepts finite or +inf, rejects NaN and -inf.
  static ExtValue of(double v);

  bool is_finite() const { return v_ != std::numeric_limits<double>::infinity(); }
  // Raw value; +inf when infinite.
  double raw() const { return v_; }
  // Finite value; throws NotFinite when infinite.
  double finite_value() const;

  friend ExtValue operator+(ExtValue a, ExtValue b) {
    ExtValue e;
    e.v_ = a.v_ + b.v_;
    return e;
  }
  friend bool operator<(ExtValue a, ExtValue b) { return a.v_ < b.v_; }
  friend bool operator<=(ExtValue a, ExtValue b) { return a.v_ <= b.v_; }
  friend bool operator==(ExtValue a, ExtValue b) { return a.v_ == b.v_; }

 private:
  double v_;
};

// Request window for subgradient-graph enumeration. epsilon bounds the
// function-value cut phi(x) < phi(x_center) + epsilon applied by consumers;
// enumerators may use it to prune but the consumer re-filters.
struct GraphWindow {
  Vec x_center;
  Vec v_center;
  double x_radius = 0.5;
  double v_radius = 0.5;
  double epsilon = 0.5;
  int density = 21;
};

struct GraphPoint {
  Vec x;
  Vec v;
};

// Extended-real-valued function with optional analytic oracles.
// smooth_order 0: eval only; 1: gradient available; 2: gradient and hessian.
// subgrad_graph enumerates (x, v) pairs with v a subgradient at x inside the
// requested window; vertical segments are discretized at window.density.
struct ExtendedFn {
  int dim = 1;
  std::function<ExtValue(const Vec&)> eval;
  int smooth_order = 0;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  std::function<std::vector<GraphPoint>(const GraphWindow&)> subgrad_graph;
  bool lsc_assumed = true;
};

// Reference pair (xbar, vbar) with the cached finite value phi(xbar).
struct RefPair {
  Vec x;
  Vec v;
  double fx = 0.0;
};

// Evaluates f at x and requires a finite value; throws InfiniteAtReference.
RefPair make_refpair(const ExtendedFn& f, Vec x, Vec v);

enum class SampleScheme { Auto, UniformGrid, LowDiscrepancy, RandomSeeded };

// Deterministic sampling of the closed ball B(center, radius).
// Auto resolves to UniformGrid in dimension 1 and LowDiscrepancy otherwise.
struct NeighborhoodSpec {
  Vec center;
  double radius = 0.5;
  int sample_count = 64;
  SampleScheme scheme = SampleScheme::Auto;
  double epsilon_attentive = 0.5;
  std::uint64_t seed = 0;
};

std::vector<Vec> sample_neighborhood(const NeighborhoodSpec& spec);

enum class Status { Holds, Fails, Inconclusive };

std::string to_string(Status s);

// Named numeric payload attached to failing verdicts; insertion order is
// preserved so serialized output is reproducible.
struct Witness {
  std::vector<std::pair<std::string, std::vector<double>>> items;

  void add(const std::string& name, double v) { items.push_back({name, {v}}); }
  void add(const std::string& name, const Vec& v) {
    items.push_back({name, std::vector<double>(v.data(), v.data() + v.size())});
  }
  bool empty() const { return items.empty(); }
  std::optional<std::vector<double>> get(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  Vec get_vec(const std::string& name) const;
};

// Outcome of a check. Holds is supported by the stated sampling, Fails is
// certified by the witness, Inconclusive means the check could not run to a
// decision (the reason is in note).
struct Verdict {
  Status status = Status::Inconclusive;
  std::string theorem_tag;
  Witness witness;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> metrics;
  long samples_used = 0;
  std::string note;
  std::vector<std::pair<std::string, Verdict>> details;

  bool holds() const { return status == Status::Holds; }
  bool fails() const { return status == Status::Fails; }
};

Verdict make_holds(std::string tag);
Verdict make_fails(std::string tag, Witness w);

// Checks that vbar is acceptable as a reference subgradient of f at xbar.
// A graph enumerator, when present, is authoritative for membership; otherwise
// smooth data is compared directly and a shrinking-radius difference-quotient
// screen hunts for a certified violation. Errors: NoGraphAndNonsmooth.
Verdict validate_refpair(const ExtendedFn& f, const RefPair& p, double tol = 1e-6);

}  // namespace varcvx
