#pragma once

// Chart realization of the torsion-free metric-compatible anisotropic
// connection: spray and nonlinear connection coefficients, Christoffel
// symbols, covariant derivatives of functions / vector fields / anisotropic
// tensors, the fiber derivative P of the connection, curvature and flag
// curvature, and the covariant derivative along curves.

#include "fsub/chart_jets.hpp"

namespace finsub {

struct ChristoffelSample {
  int n = 0;
  Vec spray;                  // G^i
  Mat nonlinear;              // N^i_j
  std::vector<double> gamma;  // Gamma^i_jk, n^3 row-major
  double gamma_at(int i, int j, int k) const {
    return gamma[(i * n + j) * n + k];
  }
};

ChristoffelSample christoffels(const MetricField& m, const PointDirection& s);

// Classical vector field on the chart, evaluable on position jets.
using VectorFieldFn = std::function<JetVec(const JetVec& x)>;

Vec nabla_vector(const MetricField& m, const PointDirection& s, const Vec& e,
                 const VectorFieldFn& H);

// How the admissible reference direction is extended off the site when a
// derivative formula needs it.  Both must agree on every covariant
// derivative; the equality is exercised by tests and the verifier.
enum class ExtensionPolicy { kCoordinateConstant, kParallel };

// Scalar function on the admissible cone, evaluated through the site jets.
using AnisoScalarFn = std::function<Jet(const ChartJets&)>;

double nabla_function(const MetricField& m, const PointDirection& s,
                      const Vec& e, const AnisoScalarFn& f,
                      ExtensionPolicy policy = ExtensionPolicy::kCoordinateConstant);

// (0, s)-type anisotropic tensor with optional covector slots, evaluated with
// frozen-coordinate arguments through the site jets.
struct AnisotropicField {
  int covector_arity = 0;
  int vector_arity = 0;
  std::function<Jet(const ChartJets&, std::span<const Vec> covecs,
                    std::span<const Vec> vecs)>
      eval;
};

double nabla_tensor(const MetricField& m, const PointDirection& s, const Vec& e,
                    const AnisotropicField& T, std::span<const Vec> covecs,
                    std::span<const Vec> vecs,
                    ExtensionPolicy policy = ExtensionPolicy::kCoordinateConstant);

Vec p_tensor(const MetricField& m, const PointDirection& s, const Vec& e,
             const Vec& h, const Vec& b);

Vec curvature(const MetricField& m, const PointDirection& s, const Vec& e,
              const Vec& h, const Vec& b);

double flag_curvature(const MetricField& m, const PointDirection& s,
                      const Vec& e);

// Curve data for covariant differentiation along a curve: the curve, its
// velocity, the admissible reference field W and the field X to be
// differentiated (with its time derivative).
struct CurveField {
  std::function<Vec(double)> gamma;
  std::function<Vec(double)> gamma_dot;
  std::function<Vec(double)> W;
  std::function<Vec(double)> X;
  std::function<Vec(double)> X_dot;
};

Vec covariant_derivative_along_curve(const MetricField& m, const CurveField& c,
                                     double t);

// Residual diagnostics used by tests and the identity suite.

// Nine-term derivation identity for the connection with frozen-coordinate
// extensions (all Lie brackets vanish):
//   2 g_v(nabla_e H, B) = e(g(B,H)) + h(g(E,B)) - b(g(E,H))
//                         - 2C(b,h,Ne) - 2C(e,b,Nh) + 2C(e,h,Nb).
double koszul_residual(ChartJets& cj, const Vec& e, const Vec& h, const Vec& b);

// Metric derivation identity:
//   e(g(H,B)) = g(nabla_e H, B) + g(H, nabla_e B) + 2C(h, b, Ne).
double metric_compat_residual(ChartJets& cj, const Vec& e, const Vec& h,
                              const Vec& b);

// Cross-check of the curvature against the affine-connection route:
//   R(e,h)b = R^V(e,h)b - P(h,b,Ne) + P(e,b,Nh), V frozen in coordinates.
double curvature_affine_residual(ChartJets& cj, const Vec& e, const Vec& h,
                                 const Vec& b);

// Fiber derivative of a covariant derivative of an anisotropic vector field:
//   (dv (nabla_e X))(h) = P(e, X, h) + (nabla_e (dv X))(h) - (dv X)(P(e,v,h)).
double dot_nabla_exchange_residual(ChartJets& cj, const Vec& e, const Vec& h,
                                   const std::function<JetVec(const ChartJets&)>& field);

}  // namespace finsub
