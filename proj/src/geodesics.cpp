#include "fsub/geodesics.hpp"

#include <cmath>
#include <fstream>

#include "fsub/submersion.hpp"

namespace finsub {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct RhsFailure {};

Vec spray_accel(const MetricField& m, const Vec& x, const Vec& v) {
  ChartJets cj(m, x, v, 3);
  Vec a(m.dim);
  for (int i = 0; i < m.dim; ++i) a[i] = -2.0 * cj.spray(i).value();
  return a;
}

// quintic two-point Hermite basis on [0,1]
void quintic_weights(double s, double w[6]) {
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  w[0] = 1 - 10 * s3 + 15 * s4 - 6 * s5;             // x0
  w[1] = s - 6 * s3 + 8 * s4 - 3 * s5;               // v0 (x h)
  w[2] = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;  // a0 (x h^2)
  w[3] = 10 * s3 - 15 * s4 + 6 * s5;                 // x1
  w[4] = -4 * s3 + 7 * s4 - 3 * s5;                  // v1 (x h)
  w[5] = 0.5 * s3 - s4 + 0.5 * s5;                   // a1 (x h^2)
}

void quintic_dweights(double s, double w[6]) {
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  w[0] = -30 * s2 + 60 * s3 - 30 * s4;
  w[1] = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  w[2] = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
  w[3] = 30 * s2 - 60 * s3 + 30 * s4;
  w[4] = -12 * s2 + 28 * s3 - 15 * s4;
  w[5] = 1.5 * s2 - 4 * s3 + 2.5 * s4;
}

}  // namespace

OdeSolution rk45(const OdeRhs& f, Vec y0, double t0, double t1,
                 const IntegrateOptions& opts, const OdeGuard& guard) {
  OdeSolution sol;
  double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  Vec y = std::move(y0);
  Vec k1 = f(t, y);  // initial failure propagates to the caller
  sol.times.push_back(t);
  sol.states.push_back(y);
  sol.derivs.push_back(k1);

  auto try_rhs = [&](double tt, const Vec& yy) -> Vec {
    try {
      return f(tt, yy);
    } catch (const NotAdmissible&) {
      throw RhsFailure{};
    } catch (const DegenerateMetric&) {
      throw RhsFailure{};
    } catch (const JetDomainError&) {
      throw RhsFailure{};
    }
  };

  double h = std::min(opts.initial_step, opts.max_step) * dir;
  double err_prev = 1.0;
  while (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
    if (std::abs(h) > opts.max_step) h = opts.max_step * dir;
    if (dir * (t + h - t1) > 0) h = t1 - t;
    if (sol.stats.steps + sol.stats.rejected > opts.max_steps)
      throw NoConvergence("rk45: step budget exhausted");

    bool failed = false;
    Vec k2, k3, k4, k5, k6, k7, y5;
    double err = 0.0;
    try {
      k2 = try_rhs(t + c2 * h, y + h * (a21 * k1));
      k3 = try_rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      k4 = try_rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = try_rhs(t + c5 * h,
                   y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = try_rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                   a65 * k5));
      y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = try_rhs(t + h, y5);
      Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double acc = 0.0;
      for (int i = 0; i < y.size(); ++i) {
        double sc = opts.abs_tol +
                    opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        acc += (ev[i] / sc) * (ev[i] / sc);
      }
      err = std::sqrt(acc / y.size());
    } catch (const RhsFailure&) {
      failed = true;
    }

    if (failed || err > 1.0) {
      ++sol.stats.rejected;
      double fac = failed ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= std::min(fac, 0.9);
      if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
        sol.complete = false;
        sol.stop_reason = "step underflow";
        return sol;
      }
      continue;
    }

    t += h;
    y = y5;
    k1 = k7;  // first-same-as-last
    ++sol.stats.steps;
    sol.stats.max_error_estimate = std::max(sol.stats.max_error_estimate, err);
    if (guard) {
      if (auto reason = guard(t, y)) {
        sol.complete = false;
        sol.stop_reason = *reason;
        return sol;
      }
    }
    sol.times.push_back(t);
    sol.states.push_back(y);
    sol.derivs.push_back(k1);

    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                 std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
    h *= std::clamp(fac, 0.2, 5.0);
    err_prev = std::max(err, 1e-10);
  }
  return sol;
}

Vec OdeSolution::state_at(double t) const {
  if (times.size() == 1) return states.front();
  auto it = std::upper_bound(times.begin(), times.end() - 1, t);
  size_t i = std::max<ptrdiff_t>(1, it - times.begin());
  double h = times[i] - times[i - 1];
  double s = std::clamp((t - times[i - 1]) / h, 0.0, 1.0);
  // cubic Hermite
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  return h00 * states[i - 1] + h10 * h * derivs[i - 1] + h01 * states[i] +
         h11 * h * derivs[i];
}

Vec GeodesicArc::x_at(double t) const {
  if (times.size() == 1) return x.front();
  auto it = std::upper_bound(times.begin(), times.end() - 1, t);
  size_t i = std::max<ptrdiff_t>(1, it - times.begin());
  double h = times[i] - times[i - 1];
  double s = std::clamp((t - times[i - 1]) / h, 0.0, 1.0);
  double w[6];
  quintic_weights(s, w);
  return w[0] * x[i - 1] + w[1] * h * v[i - 1] + w[2] * h * h * a[i - 1] +
         w[3] * x[i] + w[4] * h * v[i] + w[5] * h * h * a[i];
}

Vec GeodesicArc::v_at(double t) const {
  if (times.size() == 1) return v.front();
  auto it = std::upper_bound(times.begin(), times.end() - 1, t);
  size_t i = std::max<ptrdiff_t>(1, it - times.begin());
  double h = times[i] - times[i - 1];
  double s = std::clamp((t - times[i - 1]) / h, 0.0, 1.0);
  double w[6];
  quintic_dweights(s, w);
  return (w[0] * x[i - 1] + w[3] * x[i]) / h + w[1] * v[i - 1] + w[4] * v[i] +
         w[2] * h * a[i - 1] + w[5] * h * a[i];
}

void GeodesicArc::require_complete() const {
  if (complete) return;
  if (stop_reason == "left_chart_domain")
    throw LeftChartDomain("geodesic left the chart domain");
  if (stop_reason == "left_admissible_cone")
    throw LeftAdmissibleCone("geodesic left the admissible cone");
  throw NoConvergence("geodesic integration stopped: " + stop_reason);
}

double GeodesicArc::energy_drift(const MetricField& m) const {
  double L0 = m.value(x.front(), v.front());
  double worst = 0.0;
  for (size_t i = 0; i < times.size(); ++i)
    worst = std::max(worst, std::abs(m.value(x[i], v[i]) - L0));
  return worst / std::max(std::abs(L0), 1e-12);
}

void GeodesicArc::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  int n = x.front().size();
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i + 1;
  for (int i = 0; i < n; ++i) out << ",v" << i + 1;
  out << "\n";
  out.precision(17);
  for (size_t k = 0; k < times.size(); ++k) {
    out << times[k];
    for (int i = 0; i < n; ++i) out << "," << x[k][i];
    for (int i = 0; i < n; ++i) out << "," << v[k][i];
    out << "\n";
  }
}

GeodesicArc integrate_geodesic(const MetricField& m, const Vec& x0,
                               const Vec& v0, double t0, double t1,
                               const IntegrateOptions& opts) {
  if (!m.is_admissible(x0, v0))
    throw NotAdmissible("integrate_geodesic: initial direction not admissible");
  int n = m.dim;
  OdeRhs rhs = [&m, n](double, const Vec& y) {
    Vec x = y.head(n), v = y.tail(n);
    Vec dy(2 * n);
    dy.head(n) = v;
    dy.tail(n) = spray_accel(m, x, v);
    return dy;
  };
  OdeGuard guard = [&m, n](double, const Vec& y) -> std::optional<std::string> {
    Vec x = y.head(n), v = y.tail(n);
    if (!m.chart_domain.contains(x)) return "left_chart_domain";
    if (!m.is_admissible(x, v)) return "left_admissible_cone";
    return std::nullopt;
  };
  Vec y0(2 * n);
  y0 << x0, v0;
  OdeSolution sol = rk45(rhs, y0, t0, t1, opts, guard);

  GeodesicArc arc;
  arc.metric_label = m.label;
  arc.times = sol.times;
  arc.stats = sol.stats;
  arc.complete = sol.complete;
  arc.stop_reason = sol.stop_reason;
  for (size_t k = 0; k < sol.times.size(); ++k) {
    arc.x.push_back(sol.states[k].head(n));
    arc.v.push_back(sol.states[k].tail(n));
    arc.a.push_back(sol.derivs[k].tail(n));
  }
  return arc;
}

GeodesicArc lift_geodesic(const SubmersionChart& S, const GeodesicArc& base_arc,
                          const Vec& p0, const IntegrateOptions& opts) {
  int n = S.total_dim(), m = S.base_dim();
  if ((S.project(p0) - base_arc.x.front()).norm() > 1e-8)
    throw NoConvergence("lift_geodesic: p0 does not sit over the arc start");

  // Couple the base geodesic with its lift so both run on one clock.
  Vec w_warm;
  bool have_warm = false;
  OdeRhs rhs = [&](double, const Vec& y) {
    Vec xb = y.head(m), vb = y.segment(m, m), w = y.tail(n);
    Vec dy(2 * m + n);
    dy.head(m) = vb;
    ChartJets bj(S.base, xb, vb, 3);
    for (int i = 0; i < m; ++i) dy[m + i] = -2.0 * bj.spray(i).value();
    std::optional<Vec> guess;
    if (have_warm) guess = w_warm;
    LiftResult lift = horizontal_lift_vector(S, w, vb, guess);
    w_warm = lift.v;
    have_warm = true;
    dy.tail(n) = lift.v;
    return dy;
  };
  OdeGuard guard = [&](double, const Vec& y) -> std::optional<std::string> {
    Vec w = y.tail(n);
    if (!S.total.chart_domain.contains(w)) return "left_chart_domain";
    return std::nullopt;
  };

  Vec y0(2 * m + n);
  y0 << base_arc.x.front(), base_arc.v.front(), p0;
  OdeSolution sol =
      rk45(rhs, y0, base_arc.t_begin(), base_arc.t_end(), opts, guard);
  if (!sol.complete)
    throw NoConvergence("lift_geodesic stopped: " + sol.stop_reason);

  GeodesicArc arc;
  arc.metric_label = S.total.label;
  arc.times = sol.times;
  arc.stats = sol.stats;
  for (size_t k = 0; k < sol.times.size(); ++k) {
    Vec w = sol.states[k].tail(n);
    Vec wd = sol.derivs[k].tail(n);
    arc.x.push_back(w);
    arc.v.push_back(wd);
    arc.a.push_back(spray_accel(S.total, w, wd));
  }
  return arc;
}

double horizontality_persistence(const SubmersionChart& S,
                                 const GeodesicArc& total_arc, int samples) {
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    double t = total_arc.t_begin() +
               (total_arc.t_end() - total_arc.t_begin()) * k / (samples - 1.0);
    PointDirection s{total_arc.x_at(t), total_arc.v_at(t)};
    worst = std::max(worst, is_horizontal(S, s).residual);
  }
  return worst;
}

}  // namespace finsub
