#pragma once

// Per-site evaluation cache.  One ChartJets instance fixes a metric, a chart
// point x0 and a direction v0, seeds a single jet context with n position
// variables (xi, vars [0,n)) and n direction variables (eta, vars [n,2n)),
// evaluates L once, and lazily derives every chart-level tensor from that
// jet.  Anisotropic calculus then reduces to directional xi/eta extractions:
// the xi-dependence of any derived jet is its genuine position dependence and
// the eta-dependence its direction (fiber) dependence.
//
// Conventions:
//   g_ij        = 1/2 d^2 L / dv_i dv_j
//   C_ijk       = 1/2 d g_ij / dv_k                   (totally symmetric)
//   Csharp^i_jk = g^im C_mjk
//   G^i         = 1/4 g^il ( d^2L/dv_l dx_k v^k - dL/dx_l )
//   N^i_j       = dG^i/dv_j
//   Gamma^i_jk  = 1/2 g^il ( delta_j g_lk + delta_k g_lj - delta_l g_jk ),
//                 delta_k = d/dx_k - N^m_k d/dv_m
//   P^i_jkl     = dGamma^i_jk / dv_l
//   R^i_l,jk    = delta_j Gamma^i_kl - delta_k Gamma^i_jl
//                 + Gamma^i_jm Gamma^m_kl - Gamma^i_km Gamma^m_jl
//   R(e,h)b^i   = R^i_l,jk e^j h^k b^l

#include <memory>
#include <optional>

#include "fsub/linalg.hpp"
#include "fsub/metric.hpp"

namespace finsub {

inline constexpr int kDefaultOrder = 5;

class ChartJets {
 public:
  ChartJets(const MetricField& m, Vec x0, Vec v0, int order = kDefaultOrder,
            bool check_admissible = true);

  int dim() const { return n_; }
  int order() const { return order_; }
  int nvars() const { return 2 * n_; }
  const MetricField& metric() const { return *m_; }
  const Vec& x0() const { return x0_; }
  const Vec& v0() const { return v0_; }

  const JetVec& seed_x() const { return sx_; }
  const JetVec& seed_v() const { return sv_; }
  // constants are scalar-backed; arithmetic promotes them on demand
  Jet cjet(double v) const { return Jet(v); }
  JetVec cvec(const Vec& v) const { return constant_jets(v, 0, 0); }

  const Jet& L() const;
  double Lval() const { return L().value(); }

  const Jet& g(int i, int j) const;
  const Jet& ginv(int i, int j) const;
  const Jet& cartan(int i, int j, int k) const;
  const Jet& spray(int i) const;
  const Jet& nonlinear(int i, int j) const;
  const Jet& gamma(int i, int j, int k) const;
  const Jet& curvature(int i, int l, int j, int k) const;  // R^i_l,jk

  Mat g_mat() const;
  Mat ginv_mat() const;
  double g_scale() const;  // max |g_ij| at the site
  std::pair<int, int> signature() const;

  // Directional derivatives of a jet living in this context.
  Jet dx(const Jet& f, const Vec& dir) const;
  Jet dv(const Jet& f, const Vec& dir) const;
  Jet dx(const Jet& f, const JetVec& dir) const;
  Jet dv(const Jet& f, const JetVec& dir) const;

  // Bilinear/trilinear applications (jet arguments, jet results).
  Jet g_apply(const JetVec& a, const JetVec& b) const;
  Jet cartan_apply(const JetVec& a, const JetVec& b, const JetVec& c) const;
  JetVec csharp(const JetVec& a, const JetVec& b) const;
  JetVec gamma_apply(const JetVec& a, const JetVec& b) const;
  JetVec nonlinear_apply(const JetVec& a) const;  // N a
  JetVec ginv_apply(const JetVec& covec) const;   // raise an index

  // P_v(e, h, b)^i = dGamma^i_jk/dv_l e^j h^k b^l.
  JetVec p_apply(const JetVec& e, const JetVec& h, const JetVec& b) const;

  // R_v(e, h) b.
  JetVec curvature_apply(const JetVec& e, const JetVec& h, const JetVec& b) const;
  Vec curvature_value(const Vec& e, const Vec& h, const Vec& b) const;

  // Covariant derivative of an anisotropic vector field given by component
  // jets F (functions of (x, v) through this context) in direction h:
  //   (nabla_h F)^i = h^j dF^i/dx_j + Gamma^i_jk h^j F^k - dF^i/dv_m (N h)^m.
  // Classical (direction-independent) fields are the special case of
  // eta-free component jets.
  JetVec nabla_aniso(const JetVec& h, const JetVec& F) const;
  JetVec nabla_aniso(const Vec& h, const JetVec& F) const;

  // Legendre covector omega_i = g_ij v^j at the site.
  Vec legendre_value() const;

  double flag_curvature(const Vec& e) const;

  // Max |entry| helper for normalized residuals.
  static double vnorm(const Vec& v) { return v.norm(); }

 private:
  void require_nondegenerate() const;
  int sym2(int i, int j) const;
  int sym3(int i, int j, int k) const;

  const MetricField* m_;
  Vec x0_, v0_;
  int n_, order_;
  JetVec sx_, sv_;

  mutable std::optional<Jet> L_;
  mutable std::vector<Jet> g_, ginv_, C_, G_, N_, Gamma_, R_;
  mutable bool have_g_ = false, have_ginv_ = false, have_C_ = false,
               have_G_ = false, have_N_ = false, have_Gamma_ = false,
               have_R_ = false;
};

}  // namespace finsub
