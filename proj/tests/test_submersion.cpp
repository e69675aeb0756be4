#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fsub/finsler.hpp"
#include "fsub/chern.hpp"
#include "fsub/zoo.hpp"

using namespace finsub;

namespace {

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

// 1-D fiber minimization oracle for flat positive-definite fixtures: the
// horizontal lift minimizes L along the affine fiber, located by a coarse
// grid plus golden-section refinement.
double fiber_minimizer(const MetricField& m, const Vec& x, const Vec& vt) {
  auto val = [&](double s) { return m.value(x, vec3(vt[0], vt[1], s)); };
  double best = -3.0, bestv = val(best);
  for (double s = -3.0; s <= 3.0; s += 1e-3) {
    double f = val(s);
    if (f < bestv) {
      bestv = f;
      best = s;
    }
  }
  double lo = best - 2e-3, hi = best + 2e-3;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 80; ++it) {
    if (val(c) < val(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  return 0.5 * (lo + hi);
}

std::mt19937_64 make_rng(unsigned s) { return std::mt19937_64(s); }

}  // namespace

TEST_CASE("vertical basis spans the kernel") {
  Fixture rp = riemannian_product();
  Mat U = vertical_basis(rp.chart, Vec::Zero(4));
  CHECK(U.cols() == 2);
  CHECK((rp.chart.sigma_lin * U).norm() < 1e-14);

  Fixture hf = hopf();
  Mat Uh = vertical_basis(hf.chart, vec3(1.2, 0.3, -0.5));
  CHECK(Uh.cols() == 1);
  CHECK((hf.chart.sigma_lin * Uh).norm() < 1e-14);
  // kernel of the Euler-angle projection is the fiber direction
  CHECK(std::abs(Uh(0, 0)) < 1e-14);
  CHECK(std::abs(Uh(1, 0)) < 1e-14);
  CHECK(std::abs(std::abs(Uh(2, 0)) - 1.0) < 1e-12);

  // random full-rank linear surjection
  std::mt19937_64 rng = make_rng(17);
  std::uniform_real_distribution<double> ud(-1, 1);
  SubmersionChart S;
  S.total = riemannian_product().chart.total;
  S.base = riemannian_product().chart.base;
  Mat J(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) J(i, j) = ud(rng) + (i == j ? 1.5 : 0.0);
  S.sigma_lin = J;
  S.sigma = [J](const JetVec& x) {
    JetVec out;
    for (int a = 0; a < 2; ++a) {
      Jet acc = x[0] * J(a, 0);
      for (int i = 1; i < 4; ++i) acc += J(a, i) * x[i];
      out.push_back(acc);
    }
    return out;
  };
  Mat Ur = vertical_basis(S, Vec::Zero(4));
  CHECK((J * Ur).norm() < 1e-12);
}

TEST_CASE("splitting: product metric gives euclidean projections") {
  Fixture rp = riemannian_product();
  PointDirection s{vec4(0.1, -0.2, 0.3, 0.4), vec4(1.0, 0.5, -0.7, 0.2)};
  Vec e = vec4(0.3, 0.9, -0.4, 0.6);
  Splitting sp = split(rp.chart, s, e);
  CHECK((sp.top - vec4(0, 0, -0.4, 0.6)).norm() < 1e-13);
  CHECK((sp.bot - vec4(0.3, 0.9, 0, 0)).norm() < 1e-13);
  CHECK((sp.top + sp.bot - e).norm() < 1e-14);
}

TEST_CASE("splitting idempotence and orthogonality on a randers fixture") {
  Fixture vr = varying_randers();
  std::mt19937_64 rng = make_rng(5);
  std::uniform_real_distribution<double> ud(-0.6, 0.6);
  for (int rep = 0; rep < 15; ++rep) {
    PointDirection s{vec3(ud(rng), ud(rng), ud(rng)),
                     vec3(ud(rng) + 1.2, ud(rng), ud(rng))};
    Vec e = vec3(ud(rng), ud(rng), ud(rng) + 0.8);
    Splitting sp = split(vr.chart, s, e);
    CHECK((sp.top + sp.bot - e).norm() < 1e-12);
    // top is vertical
    CHECK((vr.chart.sigma_lin * sp.top).norm() < 1e-11);
    // bot is g_v-orthogonal to the vertical space
    auto g = fundamental_tensor(vr.chart.total, s).g;
    Mat U = vertical_basis(vr.chart, s.x);
    CHECK((U.transpose() * g * sp.bot).norm() < 1e-11);

    // cross-check against a direct linear solve of the orthogonality system
    Mat gram = U.transpose() * g * U;
    Vec c = gram.fullPivLu().solve(U.transpose() * g * e);
    CHECK((sp.top - U * c).norm() < 1e-11);

    // idempotence
    Splitting spv = split(vr.chart, s, Vec(sp.top));
    CHECK((spv.top - sp.top).norm() < 1e-11);
    CHECK(spv.bot.norm() < 1e-11);
    Splitting sph = split(vr.chart, s, Vec(sp.bot));
    CHECK(sph.top.norm() < 1e-11);
  }
}

TEST_CASE("horizontality checks") {
  Fixture rp = riemannian_product();
  CHECK(is_horizontal(rp.chart, {Vec::Zero(4), vec4(1, 2, 0, 0)}).horizontal);
  CHECK(!is_horizontal(rp.chart, {Vec::Zero(4), vec4(0, 0, 1, 0)}).horizontal);

  // the euclidean-orthogonal lift is NOT horizontal when the drift one-form
  // has a vertical component
  Fixture mr = minkowski_randers();
  auto chk = is_horizontal(mr.chart, {Vec::Zero(3), vec3(1.0, 0.5, 0.0)});
  CHECK(!chk.horizontal);
  CHECK(chk.residual > 0.01);
}

TEST_CASE("horizontal lift: euclidean product is the zero-padded lift") {
  Fixture rp = riemannian_product();
  LiftResult l = horizontal_lift_vector(rp.chart, Vec::Zero(4), vec2(0.7, -0.4));
  CHECK((l.v - vec4(0.7, -0.4, 0, 0)).norm() < 1e-11);
  CHECK(!l.unique_warning);
}

TEST_CASE("horizontal lift matches the fiber minimization oracle") {
  Fixture mr = minkowski_randers();
  std::mt19937_64 rng = make_rng(23);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int rep = 0; rep < 5; ++rep) {
    Vec vt = vec2(ud(rng) + 1.3, ud(rng));
    LiftResult l = horizontal_lift_vector(mr.chart, Vec::Zero(3), vt);
    double s_star = fiber_minimizer(mr.chart.total, Vec::Zero(3), vt);
    CHECK(std::abs(l.v[2] - s_star) < 1e-6);
    CHECK((mr.chart.sigma_lin * l.v - vt).norm() < 1e-11);
    // the lift differs from the euclidean-orthogonal one
    CHECK(std::abs(l.v[2]) > 0.05);
  }
}

TEST_CASE("induced base metric") {
  Fixture rp = riemannian_product();
  MetricField ind = induce_base_metric(rp.chart.total, rp.chart.sigma_lin,
                                       Vec::Zero(4), Box::cube(2, -1, 1),
                                       "product-induced");
  std::mt19937_64 rng = make_rng(31);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int rep = 0; rep < 5; ++rep) {
    Vec xt = vec2(ud(rng), ud(rng)), vt = vec2(ud(rng) + 1.1, ud(rng));
    CHECK(ind.value(xt, vt) ==
          doctest::Approx(vt.squaredNorm()).epsilon(1e-12));
  }

  // flat randers: induced value equals the fiber minimum of L
  Fixture mr = minkowski_randers();
  for (int rep = 0; rep < 5; ++rep) {
    Vec vt = vec2(ud(rng) + 1.2, ud(rng));
    double s_star = fiber_minimizer(mr.chart.total, Vec::Zero(3), vt);
    double want = mr.chart.total.value(Vec::Zero(3), vec3(vt[0], vt[1], s_star));
    CHECK(mr.chart.base.value(vec2(0, 0), vt) ==
          doctest::Approx(want).epsilon(1e-8));
  }

  // length preservation at horizontal samples, by construction
  Fixture vr = varying_randers();
  for (int rep = 0; rep < 5; ++rep) {
    Vec p = vec3(0.3 * ud(rng), 0.3 * ud(rng), 0.3 * ud(rng));
    Vec vt = vec2(ud(rng) + 1.2, ud(rng));
    LiftResult l = horizontal_lift_vector(vr.chart, p, vt);
    double Lv = vr.chart.total.value(p, l.v);
    double Lb = vr.chart.base.value(vr.chart.project(p), vt);
    CHECK(std::abs(Lv - Lb) < 1e-10 * (1.0 + std::abs(Lv)));
  }

  // induced base is jet-evaluable
  PointDirection sb{vec2(0.1, -0.2), vec2(1.0, 0.4)};
  auto ft = fundamental_tensor(vr.chart.base, sb);
  CHECK(ft.positive == 2);
  CHECK((ft.g - ft.g.transpose()).norm() < 1e-12);
}

TEST_CASE("configuration tensors vanish on the riemannian product") {
  Fixture rp = riemannian_product();
  std::mt19937_64 rng = make_rng(7);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int rep = 0; rep < 5; ++rep) {
    PointDirection s{Vec::Zero(4),
                     vec4(ud(rng) + 1.2, ud(rng), ud(rng), ud(rng))};
    Vec b = vec4(ud(rng), ud(rng), ud(rng), ud(rng));
    Vec e = vec4(ud(rng), ud(rng), ud(rng), ud(rng));
    CHECK(oneill_T(rp.chart, s, b, e).norm() < 1e-12);
    CHECK(oneill_A(rp.chart, s, b, e).norm() < 1e-12);
    CHECK(q_hat(rp.chart, s, b, e).norm() < 1e-12);
    CHECK(q_tilde(rp.chart, s, b, e).norm() < 1e-12);
  }
}

TEST_CASE("hopf A-tensor reproduces the classical unit norm") {
  Fixture hf = hopf();
  double theta = 1.1, phi = 0.4, psi = -0.7;
  Vec p = vec3(theta, phi, psi);
  // unit horizontal pair: 2 d_theta and (2/sin)(d_phi - cos d_psi)
  Vec v = vec3(2.0, 0.0, 0.0);
  Vec x = vec3(0.0, 2.0 / std::sin(theta), -2.0 * std::cos(theta) / std::sin(theta));
  PointDirection s{p, v};
  CHECK(is_horizontal(hf.chart, s).horizontal);
  auto g = fundamental_tensor(hf.chart.total, s).g;
  CHECK(v.dot(g * v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x.dot(g * x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(v.dot(g * x)) < 1e-12);

  Vec Axv = oneill_A(hf.chart, s, x, v);
  CHECK(Axv.dot(g * Axv) == doctest::Approx(1.0).epsilon(1e-9));
  // A swaps the pair up to sign and kills the reference direction
  Vec Avx = oneill_A(hf.chart, s, v, x);
  CHECK((Axv + Avx).norm() < 1e-9);
  CHECK(oneill_A(hf.chart, s, v, v).norm() < 1e-10);

  // fibers are totally geodesic
  PointDirection sv{p, vec3(0, 0, 1.0)};
  CHECK(totally_geodesic_residual(hf.chart, sv) < 1e-11);
}

TEST_CASE("skew-symmetry and exchange of the configuration tensors") {
  Fixture vr = varying_randers();
  std::mt19937_64 rng = make_rng(41);
  std::uniform_real_distribution<double> ud(-0.6, 0.6);
  for (int rep = 0; rep < 10; ++rep) {
    PointDirection s{vec3(ud(rng), ud(rng), ud(rng)),
                     vec3(ud(rng) + 1.2, ud(rng), ud(rng))};
    auto g = fundamental_tensor(vr.chart.total, s).g;
    Vec b = vec3(ud(rng), ud(rng), ud(rng));
    Vec e = vec3(ud(rng), ud(rng), ud(rng));
    Vec h = vec3(ud(rng), ud(rng), ud(rng));
    for (bool useT : {true, false}) {
      auto TA = [&](const Vec& bb, const Vec& ee) {
        return useT ? oneill_T(vr.chart, s, bb, ee)
                    : oneill_A(vr.chart, s, bb, ee);
      };
      double skew = TA(b, e).dot(g * h) + e.dot(g * TA(b, h));
      CHECK(std::abs(skew) < 1e-9 * (1.0 + g.norm()));
    }
    // exchange: images of verticals are g_v-horizontal and vice versa
    Splitting sp = split(vr.chart, s, e);
    Mat U = vertical_basis(vr.chart, s.x);
    Vec Tv = oneill_T(vr.chart, s, b, sp.top);
    CHECK((U.transpose() * g * Tv).norm() < 1e-9);
    Vec Th = oneill_T(vr.chart, s, b, sp.bot);
    CHECK((vr.chart.sigma_lin * Th).norm() < 1e-9);
  }
}

TEST_CASE("q tensors: structural zeros and the horizontal pairing") {
  Fixture mr = minkowski_randers();
  PointDirection s{Vec::Zero(3), vec3(1.1, 0.4, -0.2)};
  Vec a = vec3(0.3, 0.7, -0.5), b = vec3(-0.4, 0.2, 0.9);
  CHECK(q_hat(mr.chart, s, a, b).norm() < 1e-11);
  CHECK(q_tilde(mr.chart, s, a, b).norm() < 1e-11);

  // generic fixture: Qtilde output pairs to zero with a horizontal flagpole
  Fixture vr = varying_randers();
  Vec p = vec3(0.2, -0.3, 0.1);
  LiftResult l = horizontal_lift_vector(vr.chart, p, vec2(1.0, 0.4));
  PointDirection sh{p, l.v};
  auto g = fundamental_tensor(vr.chart.total, sh).g;
  Splitting sx = split(vr.chart, sh, vec3(0.5, -0.2, 0.8));
  Splitting sy = split(vr.chart, sh, vec3(-0.1, 0.9, 0.3));
  Vec qt = q_tilde(vr.chart, sh, Vec(sx.bot), Vec(sy.bot));
  CHECK(qt.norm() > 1e-8);  // genuinely nonzero here
  CHECK(std::abs(qt.dot(g * l.v)) < 1e-9 * (1.0 + qt.norm()));
}

TEST_CASE("fiber metric restricts the total lagrangian") {
  Fixture rp = riemannian_product();
  Mat frame;
  MetricField fm = fiber_metric(rp.chart, vec4(0.1, 0.2, 0.0, 0.0), &frame);
  CHECK(fm.dim == 2);
  PointDirection fs{vec2(0.1, -0.1), vec2(0.8, 0.5)};
  auto cs = christoffels(fm, fs);
  for (double gx : cs.gamma) CHECK(std::abs(gx) < 1e-13);
  CHECK(std::abs(flag_curvature(fm, fs, vec2(-0.5, 0.8)) - 0.0) < 1e-10);

  Fixture mr = minkowski_randers();
  Mat fr2;
  MetricField fm2 = fiber_metric(mr.chart, Vec::Zero(3), &fr2);
  CHECK(fm2.dim == 1);
  Vec z1 = Vec::Zero(1), o1 = Vec::Ones(1);
  auto cs2 = christoffels(fm2, {z1, o1});
  CHECK(std::abs(cs2.gamma_at(0, 0, 0)) < 1e-13);
}

TEST_CASE("split curvature operators: zeros, pairings and route agreement") {
  Fixture rp = riemannian_product();
  {
    PointDirection s{Vec::Zero(4), vec4(1.0, 0.3, 0.4, -0.2)};
    SubJets sj(rp.chart, s.x, s.v);
    Vec b = vec4(1, 0, 0.5, 0), e = vec4(0, 1, 0, 0.3), h = vec4(0.2, 0.4, 1, 0);
    CHECK(sj.r_top_def(b, e, h).norm() < 1e-12);
    CHECK(sj.r_bot_def(b, e, h).norm() < 1e-12);
  }

  Fixture vr = varying_randers();
  std::mt19937_64 rng = make_rng(3);
  std::uniform_real_distribution<double> ud(-0.5, 0.5);
  for (int rep = 0; rep < 6; ++rep) {
    Vec p = vec3(ud(rng), ud(rng), ud(rng));
    Vec v = vec3(ud(rng) + 1.2, ud(rng), ud(rng));
    SubJets sj(vr.chart, p, v);
    Vec b = vec3(ud(rng), ud(rng), ud(rng));
    Vec e = vec3(ud(rng), ud(rng), ud(rng));
    Vec w = sj.top_value(vec3(ud(rng), ud(rng), ud(rng) + 0.4));
    Vec x = sj.bot_value(vec3(ud(rng) + 0.5, ud(rng), ud(rng)));

    // vertical-argument route agreement
    Vec prop = sj.r_top(b, e, w);
    Vec defn = sj.r_top_def(b, e, w);
    CHECK((prop - defn).norm() < 1e-7 * (1.0 + prop.norm()));

    Vec proph = sj.r_bot(b, e, x);
    Vec defh = sj.r_bot_def(b, e, x);
    CHECK((proph - defh).norm() < 1e-7 * (1.0 + proph.norm()));

    // horizontal curvature annihilates vertical arguments
    CHECK(sj.r_bot_def(b, e, w).norm() < 1e-9);

    // vertical curvature of a horizontal argument pairs into the Cartan raise
    Vec lhs = sj.r_top_def(b, e, x);
    Vec rv = sj.total().curvature_value(b, e, v);
    Vec rhs = -2.0 * sj.top_value(values_of(sj.total().csharp(
                        sj.total().cvec(rv), sj.total().cvec(x))));
    CHECK((lhs - rhs).norm() < 1e-7 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("second fundamental form of the horizontal set") {
  Fixture rp = riemannian_product();
  PointDirection s{Vec::Zero(4), vec4(1.0, 0.4, 0, 0)};
  Vec x = vec4(0.0, 1.0, 0, 0), y = vec4(1.0, -0.3, 0, 0);
  CHECK(second_fundamental_form_H(rp.chart, s, x, y).norm() < 1e-10);

  Fixture mr = minkowski_randers();
  Vec p = Vec::Zero(3);
  LiftResult l = horizontal_lift_vector(mr.chart, p, vec2(1.0, 0.3));
  PointDirection sh{p, l.v};
  SubJets sj(mr.chart, sh.x, sh.v);
  Vec xr = sj.bot_value(vec3(0.2, 1.0, 0.1));
  Vec yr = sj.bot_value(vec3(1.0, -0.4, 0.3));
  Vec II = second_fundamental_form_H(mr.chart, sh, xr, yr);
  Vec II2 = second_fundamental_form_H(mr.chart, sh, yr, xr);
  CHECK((II - II2).norm() < 1e-4 * (1.0 + II.norm()));

  // Cartan defect: C(x,y,e) - Cbase(dx,dy,de) = -1/2 g(II(x,y), e)
  auto C = cartan_tensor(mr.chart.total, sh);
  Vec xt = mr.chart.push(xr), yt = mr.chart.push(yr);
  PointDirection sb{mr.chart.project(p), mr.chart.push(l.v)};
  auto Cb = cartan_tensor(mr.chart.base, sb);
  auto g = fundamental_tensor(mr.chart.total, sh).g;
  for (int k = 0; k < 3; ++k) {
    Vec e = Vec::Unit(3, k);
    Vec et = mr.chart.push(e);
    double lhs = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int kk = 0; kk < 3; ++kk)
          lhs += C(i, j, kk) * xr[i] * yr[j] * e[kk];
    double base = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int kk = 0; kk < 2; ++kk)
          base += Cb(i, j, kk) * xt[i] * yt[j] * et[kk];
    double rhs = base - 0.5 * e.dot(g * II);
    CHECK(std::abs(lhs - rhs) < 1e-3 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("totally geodesic residual: zoo flags and the warped oracle") {
  Fixture rp = riemannian_product();
  CHECK(totally_geodesic_residual(rp.chart, {Vec::Zero(4), vec4(0, 0, 1, 0.4)}) <
        1e-12);

  Fixture wp = warped_product();
  std::mt19937_64 rng = make_rng(11);
  std::uniform_real_distribution<double> ud(-0.8, 0.8);
  for (int rep = 0; rep < 5; ++rep) {
    Vec p = vec3(ud(rng), ud(rng), ud(rng));
    double w = ud(rng) + 1.3;
    double res = totally_geodesic_residual(wp.chart, {p, vec3(0, 0, w)});
    CHECK(res == doctest::Approx(warped_oracle::t_vv_norm(p, w)).epsilon(1e-8));
    CHECK(res > 1e-3);
  }
}

TEST_CASE("horizontal regularity residuals") {
  Fixture rp = riemannian_product();
  CHECK(horizontal_regularity_residual(rp.chart,
                                       {Vec::Zero(4), vec4(0, 0, 1.0, 0.3)},
                                       vec2(1.0, 0.2)) < 1e-11);

  Fixture hf = hopf();
  Vec p = vec3(1.2, 0.5, -0.3);
  double res = horizontal_regularity_residual(hf.chart, {p, vec3(0, 0, 1.0)},
                                              vec2(0.8, 0.4));
  CHECK(res < 1e-9);

  Fixture vr = varying_randers();
  double resv = horizontal_regularity_residual(
      vr.chart, {vec3(0.1, 0.2, -0.1), vec3(0, 0, 1.0)}, vec2(1.0, -0.3));
  CHECK(std::isfinite(resv));
}

TEST_CASE("holonomy transport") {
  // product: the fiber factor never moves
  Fixture rp = riemannian_product();
  CurveFn curve = [](double t) {
    return vec2(0.4 * std::sin(2 * M_PI * t), 0.4 * std::cos(2 * M_PI * t) - 0.4);
  };
  CurveFn curve_dot = [](double t) {
    return vec2(0.8 * M_PI * std::cos(2 * M_PI * t),
                -0.8 * M_PI * std::sin(2 * M_PI * t));
  };
  Vec p0 = vec4(0.0, 0.0, 0.31, -0.12);
  TransportResult tr = holonomy_transport(rp.chart, curve, curve_dot, 0, 1, p0);
  CHECK((tr.endpoint - p0).norm() < 1e-9);
  CHECK(tr.projection_drift < 1e-8);

  // hopf: fiber displacement of a full latitude loop matches the closed form
  Fixture hf = hopf();
  double theta0 = 1.05, psi0 = 0.2;
  CurveFn hcurve = [theta0](double t) { return vec2(theta0, 2 * M_PI * t); };
  CurveFn hdot = [](double) { return vec2(0.0, 2 * M_PI); };
  Vec hp0 = vec3(theta0, 0.0, psi0);
  TransportResult th = holonomy_transport(hf.chart, hcurve, hdot, 0, 1, hp0);
  CHECK(th.projection_drift < 1e-8);
  double dpsi = th.endpoint[2] - psi0;
  CHECK(std::abs(dpsi - hopf_oracle::psi_shift(theta0)) < 1e-5);
  // rotation angle of the fiber circle equals twice the enclosed cap area
  double angle = std::fmod(0.5 * dpsi + M_PI + 4 * M_PI, 2 * M_PI);
  CHECK(std::abs(angle - hopf_oracle::rotation_angle(theta0)) < 1e-5);

  // reverse curve gives the inverse map
  CurveFn rcurve = [hcurve](double t) { return hcurve(1.0 - t); };
  CurveFn rdot = [hdot](double t) { return Vec(-hdot(1.0 - t)); };
  TransportResult back =
      holonomy_transport(hf.chart, rcurve, rdot, 0, 1, th.endpoint);
  CHECK((back.endpoint - hp0).norm() < 1e-8);
}
