#pragma once

// Geodesic integration: solves xdd^i = -2 G^i(x, xd) with an embedded
// Dormand-Prince 5(4) pair, PI step-size control and quintic Hermite dense
// output.  Horizontal lifting of base arcs and horizontality diagnostics are
// declared here and implemented on top of the submersion machinery.

#include <optional>

#include "fsub/chart_jets.hpp"

namespace finsub {

struct SubmersionChart;

struct IntegratorStats {
  int steps = 0;
  int rejected = 0;
  double max_error_estimate = 0.0;
};

struct GeodesicArc {
  std::string metric_label;
  std::vector<double> times;
  std::vector<Vec> x, v, a;  // states and accelerations at accepted nodes
  IntegratorStats stats;
  bool complete = true;
  std::string stop_reason;  // "left_chart_domain" / "left_admissible_cone"

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  Vec x_at(double t) const;
  Vec v_at(double t) const;
  // Throws the matching error when the arc stopped early.
  void require_complete() const;
  // Max |L(x,v) - L(x0,v0)| / max(|L0|, 1e-12) along the nodes.
  double energy_drift(const MetricField& m) const;
  void write_csv(const std::string& path) const;
};

struct IntegrateOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 0.25;
  int max_steps = 200000;
};

GeodesicArc integrate_geodesic(const MetricField& m, const Vec& x0,
                               const Vec& v0, double t0, double t1,
                               const IntegrateOptions& opts = {});

// Horizontal lift of a base geodesic arc through the total point p0.  The
// base arc and the lifted curve are integrated as one coupled system, so no
// interpolation error enters the comparison.
GeodesicArc lift_geodesic(const SubmersionChart& S, const GeodesicArc& base_arc,
                          const Vec& p0, const IntegrateOptions& opts = {});

// Max horizontality residual of a total-space arc over `samples` nodes.
double horizontality_persistence(const SubmersionChart& S,
                                 const GeodesicArc& total_arc,
                                 int samples = 33);

// Generic adaptive RK 5(4) driver, exposed for curve transport.
using OdeRhs = std::function<Vec(double, const Vec&)>;
using OdeGuard = std::function<std::optional<std::string>(double, const Vec&)>;

struct OdeSolution {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> derivs;
  IntegratorStats stats;
  bool complete = true;
  std::string stop_reason;
  Vec state_at(double t) const;
};

OdeSolution rk45(const OdeRhs& f, Vec y0, double t0, double t1,
                 const IntegrateOptions& opts, const OdeGuard& guard = {});

}  // namespace finsub
