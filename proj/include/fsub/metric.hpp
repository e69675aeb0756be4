#pragma once

// Core domain types: chart boxes, evaluation sites, metric fields and the
// error taxonomy shared by every module.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsub/jets.hpp"

namespace finsub {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct NotAdmissible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateVertical : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateFlag : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LeftAdmissibleCone : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LeftChartDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FixtureInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Box {
  std::vector<std::array<double, 2>> range;

  int dim() const { return static_cast<int>(range.size()); }
  bool contains(const Vec& x, double margin = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < range[i][0] + margin || x[i] > range[i][1] - margin)
        return false;
    return true;
  }
  static Box cube(int n, double lo, double hi) {
    Box b;
    b.range.assign(n, {lo, hi});
    return b;
  }
};

struct PointDirection {
  Vec x, v;
};

// L(x, v) evaluable on jets; x and v carry one jet per coordinate, all in a
// common layout chosen by the caller.
using MetricEval = std::function<Jet(const JetVec& x, const JetVec& v)>;
using AdmissiblePred = std::function<bool(const Vec& x, const Vec& v)>;

struct MetricField {
  int dim = 0;
  std::string label;
  MetricEval eval;
  AdmissiblePred admissible;  // conic in v; defaults to v != 0 when empty
  Box chart_domain;

  bool is_admissible(const Vec& x, const Vec& v) const {
    if (v.norm() < 1e-14) return false;
    return admissible ? admissible(x, v) : true;
  }
  double value(const Vec& x, const Vec& v) const;
};

// One knob per tolerance class; the finite-difference profile widens every
// class because jets built from difference stencils carry O(h^2) noise.
struct ToleranceProfile {
  std::string name;
  double exact;
  double standard;
  double loose;

  static const ToleranceProfile& ad() {
    static const ToleranceProfile p{"ad", 1e-9, 1e-7, 1e-4};
    return p;
  }
  static const ToleranceProfile& fd() {
    static const ToleranceProfile p{"fd", 1e-4, 1e-4, 1e-2};
    return p;
  }
};

// Shared numeric policy (one place, used by every module).
namespace tol {
inline constexpr double kDegenerateDet = 1e-10;   // |det g| < this * scale^n
inline constexpr double kSignature = 1e-10;       // eigenvalue sign threshold
inline constexpr double kVerticalGram = 1e-6;     // sample rejection threshold
inline constexpr double kFlagDenominator = 1e-10; // DegenerateFlag threshold
inline constexpr double kNewton = 1e-12;          // nonlinear solve target
inline constexpr int kNewtonMaxIter = 50;
inline constexpr int kNewtonMaxHalvings = 30;
}  // namespace tol

inline JetVec constant_jets(const Vec& v, int nvars, int order) {
  JetVec out;
  out.reserve(v.size());
  for (int i = 0; i < v.size(); ++i)
    out.push_back(Jet::constant(nvars, order, v[i]));
  return out;
}

inline Vec values_of(const JetVec& v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

// Wraps a plain-number Lagrangian as a jet-evaluable one via finite
// differences; this is the "fd" evaluation mode.
MetricEval fd_metric_eval(std::function<double(const Vec&, const Vec&)> plain,
                          int dim, double step = 1e-2);

}  // namespace finsub
