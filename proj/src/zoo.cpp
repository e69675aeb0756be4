#include "fsub/zoo.hpp"

#include <cmath>

#include "fsub/finsler.hpp"

namespace finsub {

namespace {

Mat coordinate_projection(int m, int n) {
  Mat J = Mat::Zero(m, n);
  for (int a = 0; a < m; ++a) J(a, a) = 1.0;
  return J;
}

SigmaFn linear_sigma(const Mat& J) {
  return [J](const JetVec& x) -> JetVec {
    JetVec out;
    for (int a = 0; a < J.rows(); ++a) {
      Jet acc = x[0] * J(a, 0);
      for (int i = 1; i < J.cols(); ++i) acc += J(a, i) * x[i];
      out.push_back(acc);
    }
    return out;
  };
}

MetricField euclidean_metric(int n, std::string label, Box box) {
  return make_quadratic_metric(
      n, std::move(label),
      [n](const JetVec&) {
        std::vector<Jet> a(n * n, Jet(0.0));
        for (int i = 0; i < n; ++i) a[i * n + i] = Jet(1.0);
        return a;
      },
      std::move(box));
}

}  // namespace

Fixture riemannian_product() {
  Fixture f;
  f.chart.total = euclidean_metric(4, "riemannian_product", Box::cube(4, -1, 1));
  f.chart.base = euclidean_metric(2, "riemannian_product-base", Box::cube(2, -1, 1));
  f.chart.sigma_lin = coordinate_projection(2, 4);
  f.chart.sigma = linear_sigma(f.chart.sigma_lin);
  f.chart.fiber_section = Vec::Zero(4);
  f.chart.label = "riemannian_product";
  f.flags = {true, true, true, true};
  f.notes = "flat product; every configuration tensor vanishes";
  return f;
}

Fixture hopf() {
  Fixture f;
  MetricField total;
  total.dim = 3;
  total.label = "hopf";
  total.chart_domain =
      Box{{{0.35, M_PI - 0.35}, {-6.5, 6.5}, {-13.0, 13.0}}};
  total.eval = [](const JetVec& x, const JetVec& v) -> Jet {
    Jet c = cos(x[0]);
    return 0.25 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] +
                   2.0 * c * v[1] * v[2]);
  };
  total.admissible = [](const Vec&, const Vec& v) { return v.norm() > 1e-12; };

  MetricField base;
  base.dim = 2;
  base.label = "hopf-base";
  base.chart_domain = Box{{{0.35, M_PI - 0.35}, {-6.5, 6.5}}};
  base.eval = [](const JetVec& x, const JetVec& v) -> Jet {
    Jet s = sin(x[0]);
    return 0.25 * (v[0] * v[0] + s * s * v[1] * v[1]);
  };
  base.admissible = [](const Vec&, const Vec& v) { return v.norm() > 1e-12; };

  f.chart.total = std::move(total);
  f.chart.base = std::move(base);
  f.chart.sigma_lin = coordinate_projection(2, 3);
  f.chart.sigma = linear_sigma(f.chart.sigma_lin);
  f.chart.fiber_section = Vec::Zero(3);
  f.chart.label = "hopf";
  f.flags = {true, true, true, false};
  f.notes =
      "round 3-sphere over the half-radius 2-sphere; base curvature 4, "
      "|A_x v|^2 = 1 on unit orthonormal horizontal pairs, fiber great "
      "circles; half-radius base reproduces the classical numbers";
  return f;
}

Fixture minkowski_randers() {
  Fixture f;
  Vec beta(3);
  beta << 0.0, 0.24, 0.32;  // |beta| = 0.4 with a vertical component
  MetricField total = make_randers_metric(
      3, "minkowski_randers",
      [](const JetVec&) {
        std::vector<Jet> a(9, Jet(0.0));
        for (int i = 0; i < 3; ++i) a[i * 3 + i] = Jet(1.0);
        return a;
      },
      [beta](const JetVec&) {
        JetVec b;
        for (int i = 0; i < 3; ++i) b.push_back(Jet(beta[i]));
        return b;
      },
      Box::cube(3, -1, 1));

  Mat J = coordinate_projection(2, 3);
  f.chart.total = total;
  f.chart.base = induce_base_metric(total, J, Vec::Zero(3), Box::cube(2, -1, 1),
                                    "minkowski_randers-base");
  f.chart.sigma_lin = J;
  f.chart.sigma = linear_sigma(J);
  f.chart.fiber_section = Vec::Zero(3);
  f.chart.label = "minkowski_randers";
  f.base_induced = true;
  f.flags = {false, true, true, true};
  f.notes =
      "flat Randers with drift (0, 0.24, 0.32); nonzero Cartan tensor, "
      "vanishing connection coefficients, base induced by lifting";
  return f;
}

Fixture varying_randers() {
  Fixture f;
  // Coefficients depend on the base coordinates only, so lifted lengths are
  // constant along fibers and the induced base Lagrangian is well defined.
  MatrixFieldFn a = [](const JetVec& x) {
    std::vector<Jet> A(9, Jet(0.0));
    A[0] = 1.0 + 0.15 * sin(x[0]);
    A[4] = 1.0 + 0.15 * cos(x[1]);
    A[8] = 1.0 + 0.10 * sin(x[0] + x[1]);
    A[1] = A[3] = 0.08 * sin(x[1]);
    A[2] = A[6] = 0.05 * cos(x[0]);
    A[5] = A[7] = 0.06 * sin(x[0]) * cos(x[1]);
    return A;
  };
  OneFormFieldFn beta = [](const JetVec& x) {
    JetVec b;
    b.push_back(0.10 * sin(x[1]));
    b.push_back(0.08 * cos(x[0]));
    b.push_back(0.15 + 0.05 * sin(x[0]));
    return b;
  };
  MetricField total = make_randers_metric(3, "varying_randers", a, beta,
                                          Box::cube(3, -0.8, 0.8));
  Mat J = coordinate_projection(2, 3);
  f.chart.total = total;
  f.chart.base = induce_base_metric(total, J, Vec::Zero(3),
                                    Box::cube(2, -0.8, 0.8),
                                    "varying_randers-base");
  f.chart.sigma_lin = J;
  f.chart.sigma = linear_sigma(J);
  f.chart.fiber_section = Vec::Zero(3);
  f.chart.label = "varying_randers";
  f.base_induced = true;
  f.flags = {false, false, false, false};
  f.notes =
      "generic position-dependent Randers fixture; T, A, Qhat, Qtilde and "
      "both split curvature operators are all nonzero";
  return f;
}

Fixture warped_product() {
  Fixture f;
  MetricField total;
  total.dim = 3;
  total.label = "warped_product";
  total.chart_domain = Box::cube(3, -1, 1);
  total.eval = [](const JetVec& x, const JetVec& v) -> Jet {
    Jet warp = 1.0 + 0.2 * sin(x[0]);
    return v[0] * v[0] + v[1] * v[1] + warp * warp * v[2] * v[2];
  };
  total.admissible = [](const Vec&, const Vec& v) { return v.norm() > 1e-12; };

  f.chart.total = std::move(total);
  f.chart.base = euclidean_metric(2, "warped_product-base", Box::cube(2, -1, 1));
  f.chart.sigma_lin = coordinate_projection(2, 3);
  f.chart.sigma = linear_sigma(f.chart.sigma_lin);
  f.chart.fiber_section = Vec::Zero(3);
  f.chart.label = "warped_product";
  f.flags = {true, false, true, false};
  f.notes =
      "warped product with f = 1 + 0.2 sin(x1); T is nonzero (fiber second "
      "fundamental form -(f f') w^2 along x1), A vanishes, holonomy is not "
      "an isometry";
  return f;
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{
      "riemannian_product", "hopf", "minkowski_randers", "varying_randers",
      "warped_product"};
  return names;
}

Fixture fixture_by_name(const std::string& name) {
  if (name == "riemannian_product") return riemannian_product();
  if (name == "hopf") return hopf();
  if (name == "minkowski_randers") return minkowski_randers();
  if (name == "varying_randers") return varying_randers();
  if (name == "warped_product") return warped_product();
  throw std::invalid_argument("unknown fixture: " + name);
}

namespace warped_oracle {

double t_vv_norm(const Vec& x, double w) {
  double fx = 1.0 + 0.2 * std::sin(x[0]);
  double fp = 0.2 * std::cos(x[0]);
  // nabla_{v}v for v = w d3 has the single component -f f' w^2 along x1
  return std::abs(fx * fp) * w * w;
}

}  // namespace warped_oracle

}  // namespace finsub
