#include "fsub/chern.hpp"

#include <cmath>

namespace finsub {

namespace {

// Direction transported into the fiber slot by the chosen extension of the
// reference direction: N e for the frozen-coordinate extension, Gamma(e, v)
// for the first-order parallel one.  The two agree exactly when the computed
// nonlinear connection satisfies N^i_j = Gamma^i_jk v^k.
JetVec eta_shift(const ChartJets& cj, const Vec& e, ExtensionPolicy policy) {
  if (policy == ExtensionPolicy::kCoordinateConstant)
    return cj.nonlinear_apply(cj.cvec(e));
  return cj.gamma_apply(cj.cvec(e), cj.cvec(cj.v0()));
}

double normalized(double res, std::initializer_list<double> terms) {
  double m = 0;
  for (double t : terms) m = std::max(m, std::abs(t));
  return std::abs(res) / (1.0 + m);
}

double normalized_vec(const Vec& res, std::initializer_list<Vec> terms) {
  double m = 0;
  for (const Vec& t : terms) m = std::max(m, t.norm());
  return res.norm() / (1.0 + m);
}

}  // namespace

ChristoffelSample christoffels(const MetricField& m, const PointDirection& s) {
  ChartJets cj(m, s.x, s.v, 4);
  int n = m.dim;
  ChristoffelSample out;
  out.n = n;
  out.spray.resize(n);
  out.nonlinear.resize(n, n);
  out.gamma.resize(n * n * n);
  for (int i = 0; i < n; ++i) {
    out.spray[i] = cj.spray(i).value();
    for (int j = 0; j < n; ++j) {
      out.nonlinear(i, j) = cj.nonlinear(i, j).value();
      for (int k = 0; k < n; ++k)
        out.gamma[(i * n + j) * n + k] = cj.gamma(i, j, k).value();
    }
  }
  return out;
}

Vec nabla_vector(const MetricField& m, const PointDirection& s, const Vec& e,
                 const VectorFieldFn& H) {
  ChartJets cj(m, s.x, s.v, 4);
  JetVec Hj = H(cj.seed_x());
  return values_of(cj.nabla_aniso(e, Hj));
}

double nabla_function(const MetricField& m, const PointDirection& s,
                      const Vec& e, const AnisoScalarFn& f,
                      ExtensionPolicy policy) {
  ChartJets cj(m, s.x, s.v, kDefaultOrder);
  Jet fj = f(cj);
  Jet along = cj.dx(fj, e);
  JetVec w = eta_shift(cj, e, policy);
  return along.value() - cj.dv(fj, w).value();
}

double nabla_tensor(const MetricField& m, const PointDirection& s, const Vec& e,
                    const AnisotropicField& T, std::span<const Vec> covecs,
                    std::span<const Vec> vecs, ExtensionPolicy policy) {
  ChartJets cj(m, s.x, s.v, kDefaultOrder);
  Jet Tj = T.eval(cj, covecs, vecs);
  JetVec w = eta_shift(cj, e, policy);
  double out = cj.dx(Tj, e).value() - cj.dv(Tj, w).value();
  // product-rule corrections with frozen-coordinate argument extensions
  std::vector<Vec> cv(covecs.begin(), covecs.end());
  std::vector<Vec> vv(vecs.begin(), vecs.end());
  int n = m.dim;
  for (size_t a = 0; a < cv.size(); ++a) {
    Vec dth = Vec::Zero(n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int mm = 0; mm < n; ++mm)
          dth[k] -= cj.gamma(mm, j, k).value() * e[j] * cv[a][mm];
    auto tmp = cv[a];
    cv[a] = dth;
    out -= T.eval(cj, cv, vv).value();
    cv[a] = tmp;
  }
  for (size_t b = 0; b < vv.size(); ++b) {
    Vec dX = values_of(cj.gamma_apply(cj.cvec(e), cj.cvec(vv[b])));
    auto tmp = vv[b];
    vv[b] = dX;
    out -= T.eval(cj, cv, vv).value();
    vv[b] = tmp;
  }
  return out;
}

Vec p_tensor(const MetricField& m, const PointDirection& s, const Vec& e,
             const Vec& h, const Vec& b) {
  ChartJets cj(m, s.x, s.v, kDefaultOrder);
  return values_of(cj.p_apply(cj.cvec(e), cj.cvec(h), cj.cvec(b)));
}

Vec curvature(const MetricField& m, const PointDirection& s, const Vec& e,
              const Vec& h, const Vec& b) {
  ChartJets cj(m, s.x, s.v, kDefaultOrder);
  return cj.curvature_value(e, h, b);
}

double flag_curvature(const MetricField& m, const PointDirection& s,
                      const Vec& e) {
  ChartJets cj(m, s.x, s.v, kDefaultOrder);
  return cj.flag_curvature(e);
}

Vec covariant_derivative_along_curve(const MetricField& m, const CurveField& c,
                                     double t) {
  Vec x = c.gamma(t);
  Vec w = c.W(t);
  if (!m.is_admissible(x, w))
    throw NotAdmissible("reference field left the admissible cone along curve");
  ChartJets cj(m, x, w, 4);
  Vec xd = c.gamma_dot(t);
  Vec X = c.X(t);
  return c.X_dot(t) + values_of(cj.gamma_apply(cj.cvec(xd), cj.cvec(X)));
}

double koszul_residual(ChartJets& cj, const Vec& e, const Vec& h, const Vec& b) {
  JetVec ej = cj.cvec(e), hj = cj.cvec(h), bj = cj.cvec(b);
  double lhs = 2.0 * cj.g_apply(cj.gamma_apply(ej, hj), bj).value();
  Jet gBH = cj.g_apply(bj, hj);
  Jet gEB = cj.g_apply(ej, bj);
  Jet gEH = cj.g_apply(ej, hj);
  double t1 = cj.dx(gBH, e).value();
  double t2 = cj.dx(gEB, h).value();
  double t3 = cj.dx(gEH, b).value();
  JetVec Ne = cj.nonlinear_apply(ej);
  JetVec Nh = cj.nonlinear_apply(hj);
  JetVec Nb = cj.nonlinear_apply(bj);
  double c1 = 2.0 * cj.cartan_apply(bj, hj, Ne).value();
  double c2 = 2.0 * cj.cartan_apply(ej, bj, Nh).value();
  double c3 = 2.0 * cj.cartan_apply(ej, hj, Nb).value();
  double rhs = t1 + t2 - t3 - c1 - c2 + c3;
  return normalized(lhs - rhs, {lhs, t1, t2, t3, c1, c2, c3});
}

double metric_compat_residual(ChartJets& cj, const Vec& e, const Vec& h,
                              const Vec& b) {
  JetVec ej = cj.cvec(e), hj = cj.cvec(h), bj = cj.cvec(b);
  double lhs = cj.dx(cj.g_apply(hj, bj), e).value();
  double t1 = cj.g_apply(cj.gamma_apply(ej, hj), bj).value();
  double t2 = cj.g_apply(hj, cj.gamma_apply(ej, bj)).value();
  double t3 = 2.0 * cj.cartan_apply(hj, bj, cj.nonlinear_apply(ej)).value();
  return normalized(lhs - (t1 + t2 + t3), {lhs, t1, t2, t3});
}

double curvature_affine_residual(ChartJets& cj, const Vec& e, const Vec& h,
                                 const Vec& b) {
  int n = cj.dim();
  Vec lhs = cj.curvature_value(e, h, b);
  // affine curvature of the connection with coefficients frozen at v0
  Vec rv = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double term = derivative(cj.gamma(i, k, l), j).value() -
                        derivative(cj.gamma(i, j, l), k).value();
          for (int mm = 0; mm < n; ++mm)
            term += cj.gamma(i, j, mm).value() * cj.gamma(mm, k, l).value() -
                    cj.gamma(i, k, mm).value() * cj.gamma(mm, j, l).value();
          rv[i] += term * e[j] * h[k] * b[l];
        }
  JetVec ej = cj.cvec(e), hj = cj.cvec(h), bj = cj.cvec(b);
  Vec Ne = values_of(cj.nonlinear_apply(ej));
  Vec Nh = values_of(cj.nonlinear_apply(hj));
  Vec p1 = values_of(cj.p_apply(hj, bj, cj.cvec(Ne)));
  Vec p2 = values_of(cj.p_apply(ej, bj, cj.cvec(Nh)));
  Vec rhs = rv - p1 + p2;
  return normalized_vec(lhs - rhs, {lhs, rv, p1, p2});
}

double dot_nabla_exchange_residual(
    ChartJets& cj, const Vec& e, const Vec& h,
    const std::function<JetVec(const ChartJets&)>& field) {
  int n = cj.dim();
  JetVec F = field(cj);
  JetVec nablaF = cj.nabla_aniso(e, F);
  Vec lhs(n);
  for (int i = 0; i < n; ++i) lhs[i] = cj.dv(nablaF[i], h).value();

  Vec Fv = values_of(F);
  Vec t1 = values_of(cj.p_apply(cj.cvec(e), cj.cvec(Fv), cj.cvec(h)));
  JetVec dotF(n, cj.cjet(0.0));
  for (int i = 0; i < n; ++i) dotF[i] = cj.dv(F[i], h);
  // tensor derivative of the fiber derivative: product rule removes the
  // contribution of the frozen-coordinate extension of h
  Vec geh = values_of(cj.gamma_apply(cj.cvec(e), cj.cvec(h)));
  Vec t2 = values_of(cj.nabla_aniso(e, dotF));
  for (int i = 0; i < n; ++i) t2[i] -= cj.dv(F[i], geh).value();
  Vec pvh = values_of(cj.p_apply(cj.cvec(e), cj.cvec(cj.v0()), cj.cvec(h)));
  Vec t3(n);
  for (int i = 0; i < n; ++i) t3[i] = cj.dv(F[i], pvh).value();
  Vec rhs = t1 + t2 - t3;
  return normalized_vec(lhs - rhs, {lhs, t1, t2, t3});
}

}  // namespace finsub
