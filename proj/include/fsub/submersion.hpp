#pragma once

// Submersion geometry: vertical/horizontal splittings, lifts, induced base
// metric, the configuration tensors T and A, the Cartan correction tensors
// Qhat and Qtilde, split curvature operators, fiber geometry, holonomy
// transport and the totally-geodesic / horizontal-regularity diagnostics.
//
// Splitting conventions at a site (x0, v0):
//   vertical space   = ker dsigma at x0 (jet-valued basis u_a(x)),
//   e = top(e) + bot(e) with top vertical and bot g_v-orthogonal to it,
//   chi^v_b e        = (nabla_b E_bot)^top + (nabla_b E_top)^bot,
//   T^v_b e          = chi^v_{top(b)} e,   A^v_b e = chi^v_{bot(b)} e,
// with frozen-coordinate extensions; the anisotropic dependence of the
// splitting is carried by the jets themselves.

#include "fsub/finsler.hpp"
#include "fsub/geodesics.hpp"

namespace finsub {

using SigmaFn = std::function<JetVec(const JetVec& x)>;

struct SubmersionChart {
  MetricField total;  // dim n
  MetricField base;   // dim m <= n
  SigmaFn sigma;
  Mat sigma_lin;       // m x n; every supported projection is linear
  bool sigma_linear = true;
  Vec fiber_section;   // anchor point for induced-metric sections
  std::string label;

  int total_dim() const { return total.dim; }
  int base_dim() const { return base.dim; }
  int fiber_dim() const { return total.dim - base.dim; }
  Vec project(const Vec& x) const { return sigma_lin * x; }
  Vec push(const Vec& v) const { return sigma_lin * v; }
};

struct Splitting {
  Vec top, bot;
  Mat frame;                  // orthonormal vertical frame, r columns
  std::vector<double> signs;  // frame signs under g_v
};

struct LiftResult {
  Vec v;
  int iterations = 0;
  bool unique_warning = false;  // two seeds converged to different lifts
};

enum class TAKind { kT, kA, kSum };

class SubJets {
 public:
  SubJets(const SubmersionChart& S, Vec x0, Vec v0,
          int order = kDefaultOrder);

  const SubmersionChart& chart() const { return *S_; }
  ChartJets& total() { return tot_; }
  int n() const { return tot_.dim(); }
  int m() const { return S_->base_dim(); }
  int r() const { return n() - m(); }
  const Vec& x0() const { return tot_.x0(); }
  const Vec& v0() const { return tot_.v0(); }

  const JetVec& sigma_jets();
  const std::vector<Jet>& jacobian();  // m*n jets, row-major
  Mat jacobian_value();

  // Vertical frame data (jets in x only).
  const std::vector<JetVec>& vertical_basis();
  Mat vertical_basis_value();
  const std::vector<JetVec>& vertical_onb();
  const std::vector<double>& vertical_signs();
  double vertical_gram_det();  // |det| of the raw-basis Gram matrix under g_v

  // Splitting projector and parts.
  const Jet& proj_top(int i, int j);
  JetVec top(const JetVec& e);
  JetVec bot(const JetVec& e);
  Vec top_value(const Vec& e);
  Vec bot_value(const Vec& e);

  double horizontality_residual();  // of v0
  double verticality_residual();    // |dsigma(v0)| / (1 + |v0|)

  // O'Neill tensors as component jets and applications.
  const Jet& chi_comp(int i, int j, int k);  // direction j, argument k
  JetVec chi(const JetVec& b, const JetVec& e);
  JetVec ta_apply(TAKind kind, const JetVec& b, const JetVec& e);
  Vec ta_value(TAKind kind, const Vec& b, const Vec& e);

  JetVec qhat(const JetVec& b, const JetVec& e);
  JetVec qtilde(const JetVec& b, const JetVec& e);

  // Covariant derivative of T/A/(T+A) with frozen-coordinate arguments:
  // (nabla_e TA)^v(h, b).
  Vec nabla_ta_value(TAKind kind, const Vec& e, const Vec& h, const Vec& b);
  // Covariant derivative of Qtilde likewise, and its fiber derivative.
  Vec nabla_qtilde_value(const Vec& e, const Vec& h, const Vec& b);
  Vec dot_qtilde_value(const Vec& h, const Vec& b, const Vec& dir);

  // Split curvature operators; the `_def` forms evaluate the nested
  // anisotropic definition directly, the plain forms the computable
  // expansion with a frozen-coordinate reference extension.  Both routes are
  // kept so they can certify each other.
  Vec r_top(const Vec& b, const Vec& e, const Vec& w);  // w vertical
  Vec r_bot(const Vec& b, const Vec& e, const Vec& h);  // any h
  Vec r_top_def(const Vec& b, const Vec& e, const Vec& h);
  Vec r_bot_def(const Vec& b, const Vec& e, const Vec& h);

  // Base-side jets at (sigma(x0), dsigma(v0)); requires an admissible
  // projected direction (horizontal v0 in practice).
  ChartJets& base();
  // g_v-horizontal lift of a base vector (linear solve at the site).
  JetVec base_lift(const JetVec& btilde);
  Vec base_lift_value(const Vec& btilde);

  // Fiber-side jets: fiber chart x = x0 + U xhat (linear sigma only).
  ChartJets& fiber();
  const Mat& fiber_frame();
  Vec to_fiber(const Vec& vertical_vec);
  Vec from_fiber(const Vec& fiber_vec);
  // Fiber-intrinsic derivative (direction u vertical, total coords) of a
  // scalar jet: u-directional along the fiber with the fiber nonlinear
  // connection shifting the direction slot.
  Jet fiber_dir_derivative(const Jet& f, const Vec& u_total);
  // Fiber Christoffel contraction pushed to total coordinates.
  Vec fiber_gamma_value(const Vec& u_total, const Vec& w_total);

  // Horizontal-lift field over a constant base target, as order-1 jets in
  // this context (Newton solve on jets in an augmented context).
  JetVec newton_lift_field(const Vec& base_target);
  // Same with a jet-valued target (components in this context).
  JetVec newton_lift_field(const JetVec& base_target, int field_order);

  // g_V-horizontal lift field of a constant base vector with respect to a
  // jet-valued reference direction field V (order-1 jets).
  JetVec gv_lift_field(const Vec& base_target, const JetVec& Vfield);

 private:
  void build_frame();
  void build_chi();

  const SubmersionChart* S_;
  ChartJets tot_;
  std::optional<JetVec> sigma_;
  std::optional<std::vector<Jet>> jac_;
  std::optional<std::vector<JetVec>> u_, onb_;
  std::vector<double> signs_;
  double gram_det_ = 0.0;
  std::optional<std::vector<Jet>> proj_top_;
  std::optional<std::vector<Jet>> chi_;
  std::optional<ChartJets> base_, fiber_;
  std::optional<MetricField> fiber_metric_;  // owns what fiber_ points into
  std::optional<Mat> fiber_frame_;
};

// ---- public operations ----

Mat vertical_basis(const SubmersionChart& S, const Vec& p);
Splitting split(const SubmersionChart& S, const PointDirection& s, const Vec& e);

struct HorizontalityCheck {
  bool horizontal;
  double residual;
};
HorizontalityCheck is_horizontal(const SubmersionChart& S,
                                 const PointDirection& s,
                                 double tolerance = 1e-9);

LiftResult horizontal_lift_vector(const SubmersionChart& S, const Vec& p,
                                  const Vec& vtilde,
                                  std::optional<Vec> guess = {},
                                  const NewtonOptions& opts = {});

// Base Lagrangian induced by lifting: Ltilde(xt, vt) = L(section(xt), lift).
MetricField induce_base_metric(const MetricField& total, const Mat& sigma_lin,
                               const Vec& section_point, Box base_box,
                               std::string label);

Vec oneill_T(const SubmersionChart& S, const PointDirection& s, const Vec& b,
             const Vec& e);
Vec oneill_A(const SubmersionChart& S, const PointDirection& s, const Vec& b,
             const Vec& e);
Vec q_hat(const SubmersionChart& S, const PointDirection& s, const Vec& u,
          const Vec& w);
Vec q_tilde(const SubmersionChart& S, const PointDirection& s, const Vec& x,
            const Vec& y);

// Fiber restriction through the site's fiber chart.
MetricField fiber_metric(const SubmersionChart& S, const Vec& p, Mat* frame_out);

// Finite-difference second fundamental form of the horizontal set at v,
// evaluated on g_v-horizontal x, y (central step; loose tolerance class).
Vec second_fundamental_form_H(const SubmersionChart& S, const PointDirection& s,
                              const Vec& x, const Vec& y, double step = 1e-4);

double totally_geodesic_residual(const SubmersionChart& S,
                                 const PointDirection& s);
double horizontal_regularity_residual(const SubmersionChart& S,
                                      const PointDirection& s,
                                      const Vec& base_target);

struct TransportResult {
  Vec endpoint;
  OdeSolution path;
  double projection_drift = 0.0;  // max |sigma(w(t)) - curve(t)|
};

using CurveFn = std::function<Vec(double)>;

TransportResult holonomy_transport(const SubmersionChart& S,
                                   const CurveFn& curve,
                                   const CurveFn& curve_dot, double t0,
                                   double t1, const Vec& p0,
                                   const IntegrateOptions& opts = {});

}  // namespace finsub
