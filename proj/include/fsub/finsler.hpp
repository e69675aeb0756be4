#pragma once

// Pseudo-Finsler metric evaluation: fundamental tensor, Cartan tensor and its
// musical raise, Legendre map and its local Newton inversion.

#include "fsub/chart_jets.hpp"

namespace finsub {

struct FundamentalTensor {
  Mat g;
  int positive = 0, negative = 0;  // eigenvalue signature
};

// Dense symmetric 3-tensor, small n.
struct Tensor3 {
  int n = 0;
  std::vector<double> c;  // n^3 row-major
  double operator()(int i, int j, int k) const { return c[(i * n + j) * n + k]; }
  double max_abs() const {
    double m = 0;
    for (double x : c) m = std::max(m, std::abs(x));
    return m;
  }
};

FundamentalTensor fundamental_tensor(const MetricField& m,
                                     const PointDirection& s);
Tensor3 cartan_tensor(const MetricField& m, const PointDirection& s);
Vec cartan_sharp(const MetricField& m, const PointDirection& s, const Vec& e,
                 const Vec& h);
Vec legendre(const MetricField& m, const PointDirection& s);

struct NewtonOptions {
  double tolerance = tol::kNewton;
  int max_iter = tol::kNewtonMaxIter;
  int max_halvings = tol::kNewtonMaxHalvings;
};

// Local inversion of v -> g_v(v, .) by damped Newton steps; the Jacobian of
// the Legendre map is g_v itself (a homogeneity identity, cross-checked in
// the tests rather than assumed blindly).
Vec legendre_invert(const MetricField& m, const Vec& x, const Vec& omega,
                    const Vec& v0, const NewtonOptions& opts = {});

// Convenience builders used by fixtures, tests and the spec-file loader.

// Quadratic Lagrangian L = a_ij(x) v^i v^j with jet-evaluable coefficients.
using MatrixFieldFn = std::function<std::vector<Jet>(const JetVec& x)>;  // n*n
using OneFormFieldFn = std::function<JetVec(const JetVec& x)>;

MetricField make_quadratic_metric(int dim, std::string label, MatrixFieldFn a,
                                  Box domain);
// Randers-type L = ( sqrt(a_ij v^i v^j) + beta_i v^i )^2.
MetricField make_randers_metric(int dim, std::string label, MatrixFieldFn a,
                                OneFormFieldFn beta, Box domain);

}  // namespace finsub
