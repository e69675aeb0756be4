#include "fsub/finsler.hpp"

#include <cmath>

namespace finsub {

FundamentalTensor fundamental_tensor(const MetricField& m,
                                     const PointDirection& s) {
  ChartJets cj(m, s.x, s.v, 2);
  FundamentalTensor out;
  out.g = cj.g_mat();
  auto sig = cj.signature();
  out.positive = sig.first;
  out.negative = sig.second;
  return out;
}

Tensor3 cartan_tensor(const MetricField& m, const PointDirection& s) {
  ChartJets cj(m, s.x, s.v, 3);
  int n = m.dim;
  Tensor3 t;
  t.n = n;
  t.c.resize(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        t.c[(i * n + j) * n + k] = cj.cartan(i, j, k).value();
  return t;
}

Vec cartan_sharp(const MetricField& m, const PointDirection& s, const Vec& e,
                 const Vec& h) {
  ChartJets cj(m, s.x, s.v, 3);
  return values_of(cj.csharp(cj.cvec(e), cj.cvec(h)));
}

Vec legendre(const MetricField& m, const PointDirection& s) {
  ChartJets cj(m, s.x, s.v, 2);
  return cj.legendre_value();
}

Vec legendre_invert(const MetricField& m, const Vec& x, const Vec& omega,
                    const Vec& v0, const NewtonOptions& opts) {
  if (!m.is_admissible(x, v0))
    throw NotAdmissible("legendre_invert: inadmissible initial guess");
  Vec v = v0;
  for (int it = 0; it < opts.max_iter; ++it) {
    ChartJets cj(m, x, v, 2);
    Vec res = omega - cj.legendre_value();
    if (res.norm() <= opts.tolerance) return v;
    Vec step = cj.g_mat().fullPivLu().solve(res);
    Vec next = v + step;
    int halvings = 0;
    while (!m.is_admissible(x, next)) {
      if (++halvings > opts.max_halvings)
        throw LeftAdmissibleCone(
            "legendre_invert: Newton iterate left the admissible cone");
      step *= 0.5;
      next = v + step;
    }
    v = next;
  }
  ChartJets cj(m, x, v, 2);
  if ((omega - cj.legendre_value()).norm() <= opts.tolerance) return v;
  throw NoConvergence("legendre_invert: no convergence after " +
                      std::to_string(opts.max_iter) + " iterations");
}

MetricField make_quadratic_metric(int dim, std::string label, MatrixFieldFn a,
                                  Box domain) {
  MetricField m;
  m.dim = dim;
  m.label = std::move(label);
  m.chart_domain = std::move(domain);
  m.eval = [a, dim](const JetVec& x, const JetVec& v) -> Jet {
    std::vector<Jet> A = a(x);
    Jet s = A[0] * v[0] * v[0];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        if (i == 0 && j == 0) continue;
        s += A[i * dim + j] * v[i] * v[j];
      }
    return s;
  };
  m.admissible = [](const Vec&, const Vec& v) { return v.norm() > 1e-12; };
  return m;
}

MetricField make_randers_metric(int dim, std::string label, MatrixFieldFn a,
                                OneFormFieldFn beta, Box domain) {
  MetricField m;
  m.dim = dim;
  m.label = std::move(label);
  m.chart_domain = std::move(domain);
  m.eval = [a, beta, dim](const JetVec& x, const JetVec& v) -> Jet {
    std::vector<Jet> A = a(x);
    JetVec B = beta(x);
    Jet q = A[0] * v[0] * v[0];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        if (i == 0 && j == 0) continue;
        q += A[i * dim + j] * v[i] * v[j];
      }
    Jet f = sqrt(q) + B[0] * v[0];
    for (int i = 1; i < dim; ++i) f += B[i] * v[i];
    return f * f;
  };
  m.admissible = [](const Vec&, const Vec& v) { return v.norm() > 1e-12; };
  return m;
}

}  // namespace finsub
