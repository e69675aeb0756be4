#include "fsub/chart_jets.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace finsub {

double MetricField::value(const Vec& x, const Vec& v) const {
  JetVec xj = constant_jets(x, 0, 0);
  JetVec vj = constant_jets(v, 0, 0);
  return eval(xj, vj).value();
}

MetricEval fd_metric_eval(std::function<double(const Vec&, const Vec&)> plain,
                          int dim, double step) {
  return [plain, dim, step](const JetVec& x, const JetVec& v) -> Jet {
    std::vector<double> at(2 * dim);
    for (int i = 0; i < dim; ++i) at[i] = x[i].value();
    for (int i = 0; i < dim; ++i) at[dim + i] = v[i].value();
    int ord = 0;
    for (const Jet& j : x) ord = std::max(ord, j.order());
    for (const Jet& j : v) ord = std::max(ord, j.order());
    PlainFn f = [plain, dim](std::span<const double> a) {
      Vec xx(dim), vv(dim);
      for (int i = 0; i < dim; ++i) xx[i] = a[i];
      for (int i = 0; i < dim; ++i) vv[i] = a[dim + i];
      return plain(xx, vv);
    };
    Jet F = fd_jet(f, at, ord, step);
    // Compose with the deviations of the incoming jets from the base point.
    JetVec dev;
    dev.reserve(2 * dim);
    for (int i = 0; i < dim; ++i) dev.push_back(x[i] - at[i]);
    for (int i = 0; i < dim; ++i) dev.push_back(v[i] - at[dim + i]);
    return compose(F, dev);
  };
}

ChartJets::ChartJets(const MetricField& m, Vec x0, Vec v0, int order,
                     bool check_admissible)
    : m_(&m), x0_(std::move(x0)), v0_(std::move(v0)), n_(m.dim), order_(order) {
  if (check_admissible && !m.is_admissible(x0_, v0_))
    throw NotAdmissible("direction outside the admissible cone of " + m.label);
  sx_.reserve(n_);
  sv_.reserve(n_);
  for (int i = 0; i < n_; ++i)
    sx_.push_back(Jet::variable(2 * n_, order_, i, x0_[i]));
  for (int i = 0; i < n_; ++i)
    sv_.push_back(Jet::variable(2 * n_, order_, n_ + i, v0_[i]));
}

int ChartJets::sym2(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * n_ - i * (i - 1) / 2 + (j - i);
}

int ChartJets::sym3(int i, int j, int k) const {
  int a = i, b = j, c = k;
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  // rank of the sorted triple among all sorted triples of {0..n-1}
  auto t2 = [&](int x) { return x * (x + 1) / 2; };
  auto t3 = [&](int x) { return x * (x + 1) * (x + 2) / 6; };
  return (t3(n_) - t3(n_ - a)) + (t2(n_ - a) - t2(n_ - b)) + (c - b);
}

const Jet& ChartJets::L() const {
  if (!L_) L_ = m_->eval(sx_, sv_);
  return *L_;
}

const Jet& ChartJets::g(int i, int j) const {
  if (!have_g_) {
    g_.reserve(n_ * (n_ + 1) / 2);
    for (int a = 0; a < n_; ++a)
      for (int b = a; b < n_; ++b)
        g_.push_back(0.5 * derivative(derivative(L(), n_ + a), n_ + b));
    have_g_ = true;
    require_nondegenerate();
  }
  return g_[sym2(i, j)];
}

void ChartJets::require_nondegenerate() const {
  Mat gm(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) gm(i, j) = g_[sym2(i, j)].value();
  double scale = gm.cwiseAbs().maxCoeff();
  double det = gm.determinant();
  if (std::abs(det) < tol::kDegenerateDet * std::pow(std::max(scale, 1e-300), n_))
    throw DegenerateMetric("fundamental tensor numerically degenerate for " +
                           m_->label);
}

const Jet& ChartJets::ginv(int i, int j) const {
  if (!have_ginv_) {
    g(0, 0);
    std::vector<Jet> A(n_ * n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) A[a * n_ + b] = g_[sym2(a, b)];
    try {
      ginv_ = matrix_inverse(A, n_, cjet(1.0), cjet(0.0), tol::kDegenerateDet);
    } catch (const SingularMatrix&) {
      throw DegenerateMetric("fundamental tensor not invertible for " +
                             m_->label);
    }
    have_ginv_ = true;
  }
  return ginv_[i * n_ + j];
}

const Jet& ChartJets::cartan(int i, int j, int k) const {
  if (!have_C_) {
    g(0, 0);
    C_.reserve((n_ * (n_ + 1) * (n_ + 2)) / 6);
    for (int a = 0; a < n_; ++a)
      for (int b = a; b < n_; ++b)
        for (int c = b; c < n_; ++c)
          C_.push_back(0.5 * derivative(g_[sym2(a, b)], n_ + c));
    have_C_ = true;
  }
  return C_[sym3(i, j, k)];
}

const Jet& ChartJets::spray(int i) const {
  if (!have_G_) {
    G_.resize(n_);
    // A_l = d^2L/dv_l dx_k v^k - dL/dx_l
    std::vector<Jet> A(n_);
    for (int l = 0; l < n_; ++l) {
      Jet dLdvl = derivative(L(), n_ + l);
      Jet acc = Jet::constant(2 * n_, order_ - 2, 0.0);
      for (int k = 0; k < n_; ++k) acc += derivative(dLdvl, k) * sv_[k];
      A[l] = acc - derivative(L(), l);
    }
    for (int a = 0; a < n_; ++a) {
      Jet acc = cjet(0.0);
      for (int l = 0; l < n_; ++l) acc += ginv(a, l) * A[l];
      G_[a] = 0.25 * acc;
    }
    have_G_ = true;
  }
  return G_[i];
}

const Jet& ChartJets::nonlinear(int i, int j) const {
  if (!have_N_) {
    N_.resize(n_ * n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) N_[a * n_ + b] = derivative(spray(a), n_ + b);
    have_N_ = true;
  }
  return N_[i * n_ + j];
}

const Jet& ChartJets::gamma(int i, int j, int k) const {
  if (!have_Gamma_) {
    nonlinear(0, 0);
    auto delta = [&](const Jet& f, int kk) {
      Jet r = derivative(f, kk);
      for (int mm = 0; mm < n_; ++mm)
        r -= N_[mm * n_ + kk] * derivative(f, n_ + mm);
      return r;
    };
    const int s2 = n_ * (n_ + 1) / 2;
    std::vector<Jet> dg(n_ * s2);  // delta_k g_ab
    for (int kk = 0; kk < n_; ++kk)
      for (int a = 0; a < n_; ++a)
        for (int b = a; b < n_; ++b)
          dg[kk * s2 + sym2(a, b)] = delta(g_[sym2(a, b)], kk);
    auto dgat = [&](int kk, int a, int b) -> const Jet& {
      return dg[kk * s2 + sym2(a, b)];
    };
    Gamma_.resize(n_ * s2);
    for (int a = 0; a < n_; ++a)
      for (int jj = 0; jj < n_; ++jj)
        for (int kk = jj; kk < n_; ++kk) {
          Jet acc = Jet::constant(2 * n_, order_ - 3, 0.0);
          for (int l = 0; l < n_; ++l)
            acc += ginv(a, l) *
                   (dgat(jj, l, kk) + dgat(kk, l, jj) - dgat(l, jj, kk));
          Gamma_[a * s2 + sym2(jj, kk)] = 0.5 * acc;
        }
    have_Gamma_ = true;
  }
  return Gamma_[i * (n_ * (n_ + 1) / 2) + sym2(j, k)];
}

const Jet& ChartJets::curvature(int i, int l, int j, int k) const {
  if (!have_R_) {
    gamma(0, 0, 0);
    auto delta = [&](const Jet& f, int kk) {
      Jet r = derivative(f, kk);
      for (int mm = 0; mm < n_; ++mm)
        r -= N_[mm * n_ + kk] * derivative(f, n_ + mm);
      return r;
    };
    R_.assign(n_ * n_ * n_ * n_,
              Jet::constant(2 * n_, std::max(order_ - 4, 0), 0.0));
    auto at = [&](int a, int b, int c, int d) -> Jet& {
      return R_[((a * n_ + b) * n_ + c) * n_ + d];
    };
    for (int a = 0; a < n_; ++a)
      for (int ll = 0; ll < n_; ++ll)
        for (int jj = 0; jj < n_; ++jj)
          for (int kk = jj + 1; kk < n_; ++kk) {
            Jet acc = delta(gamma(a, kk, ll), jj) - delta(gamma(a, jj, ll), kk);
            for (int mm = 0; mm < n_; ++mm)
              acc += gamma(a, jj, mm) * gamma(mm, kk, ll) -
                     gamma(a, kk, mm) * gamma(mm, jj, ll);
            at(a, ll, jj, kk) = acc;
            at(a, ll, kk, jj) = -acc;
          }
    have_R_ = true;
  }
  return R_[((i * n_ + l) * n_ + j) * n_ + k];
}

Mat ChartJets::g_mat() const {
  Mat gm(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) gm(i, j) = g(i, j).value();
  return gm;
}

Mat ChartJets::ginv_mat() const {
  Mat gm(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) gm(i, j) = ginv(i, j).value();
  return gm;
}

double ChartJets::g_scale() const { return g_mat().cwiseAbs().maxCoeff(); }

std::pair<int, int> ChartJets::signature() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(g_mat());
  int pos = 0, neg = 0;
  double scale = std::max(g_scale(), 1e-300);
  for (int i = 0; i < n_; ++i) {
    double ev = es.eigenvalues()[i];
    if (ev > tol::kSignature * scale)
      ++pos;
    else if (ev < -tol::kSignature * scale)
      ++neg;
  }
  return {pos, neg};
}

Jet ChartJets::dx(const Jet& f, const Vec& dir) const {
  Jet r = derivative(f, 0) * dir[0];
  for (int i = 1; i < n_; ++i) r += derivative(f, i) * dir[i];
  return r;
}

Jet ChartJets::dv(const Jet& f, const Vec& dir) const {
  Jet r = derivative(f, n_) * dir[0];
  for (int i = 1; i < n_; ++i) r += derivative(f, n_ + i) * dir[i];
  return r;
}

Jet ChartJets::dx(const Jet& f, const JetVec& dir) const {
  Jet r = derivative(f, 0) * dir[0];
  for (int i = 1; i < n_; ++i) r += derivative(f, i) * dir[i];
  return r;
}

Jet ChartJets::dv(const Jet& f, const JetVec& dir) const {
  Jet r = derivative(f, n_) * dir[0];
  for (int i = 1; i < n_; ++i) r += derivative(f, n_ + i) * dir[i];
  return r;
}

Jet ChartJets::g_apply(const JetVec& a, const JetVec& b) const {
  Jet r = cjet(0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) madd(r, g(i, j), a[i] * b[j]);
  return r;
}

Jet ChartJets::cartan_apply(const JetVec& a, const JetVec& b,
                            const JetVec& c) const {
  Jet r = cjet(0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Jet ab = a[i] * b[j];
      for (int k = 0; k < n_; ++k) madd(r, cartan(i, j, k), ab * c[k]);
    }
  return r;
}

JetVec ChartJets::csharp(const JetVec& a, const JetVec& b) const {
  JetVec lower(n_, cjet(0.0));
  for (int m = 0; m < n_; ++m) {
    Jet acc = cjet(0.0);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) madd(acc, cartan(m, j, k), a[j] * b[k]);
    lower[m] = acc;
  }
  return ginv_apply(lower);
}

JetVec ChartJets::ginv_apply(const JetVec& covec) const {
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = cjet(0.0);
    for (int m = 0; m < n_; ++m) madd(acc, ginv(i, m), covec[m]);
    out[i] = acc;
  }
  return out;
}

JetVec ChartJets::gamma_apply(const JetVec& a, const JetVec& b) const {
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = cjet(0.0);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) madd(acc, gamma(i, j, k), a[j] * b[k]);
    out[i] = acc;
  }
  return out;
}

JetVec ChartJets::nonlinear_apply(const JetVec& a) const {
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = cjet(0.0);
    for (int j = 0; j < n_; ++j) madd(acc, nonlinear(i, j), a[j]);
    out[i] = acc;
  }
  return out;
}

JetVec ChartJets::p_apply(const JetVec& e, const JetVec& h,
                          const JetVec& b) const {
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = Jet::constant(2 * n_, std::max(order_ - 4, 0), 0.0);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        Jet eh = e[j] * h[k];
        for (int l = 0; l < n_; ++l)
          madd(acc, derivative(gamma(i, j, k), n_ + l), eh * b[l]);
      }
    out[i] = acc;
  }
  return out;
}

JetVec ChartJets::curvature_apply(const JetVec& e, const JetVec& h,
                                  const JetVec& b) const {
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = Jet::constant(2 * n_, std::max(order_ - 4, 0), 0.0);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        Jet ehf = e[j] * h[k];
        for (int l = 0; l < n_; ++l) madd(acc, curvature(i, l, j, k), ehf * b[l]);
      }
    out[i] = acc;
  }
  return out;
}

Vec ChartJets::curvature_value(const Vec& e, const Vec& h, const Vec& b) const {
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          out[i] += curvature(i, l, j, k).value() * e[j] * h[k] * b[l];
  return out;
}

JetVec ChartJets::nabla_aniso(const JetVec& h, const JetVec& F) const {
  JetVec nh = nonlinear_apply(h);
  JetVec out(n_, cjet(0.0));
  for (int i = 0; i < n_; ++i) {
    Jet acc = dx(F[i], h);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) madd(acc, gamma(i, j, k), h[j] * F[k]);
    acc -= dv(F[i], nh);
    out[i] = acc;
  }
  return out;
}

JetVec ChartJets::nabla_aniso(const Vec& h, const JetVec& F) const {
  return nabla_aniso(cvec(h), F);
}

Vec ChartJets::legendre_value() const { return g_mat() * v0_; }

double ChartJets::flag_curvature(const Vec& e) const {
  Vec num = curvature_value(v0_, e, e);
  Mat gm = g_mat();
  double gee = e.dot(gm * e);
  double gve = v0_.dot(gm * e);
  double denom = Lval() * gee - gve * gve;
  double scale = std::max(g_scale(), 1e-300);
  if (std::abs(denom) < tol::kFlagDenominator * scale * scale *
                            std::max(1.0, e.squaredNorm()) *
                            std::max(1.0, v0_.squaredNorm()))
    throw DegenerateFlag("flag plane numerically degenerate");
  return num.dot(gm * v0_) / denom;
}

}  // namespace finsub
