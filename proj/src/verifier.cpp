#include "fsub/verifier.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <cmath>
#include <json.hpp>
#include <thread>

namespace finsub {

using ordered_json = nlohmann::ordered_json;

double norm_residual(double diff, std::initializer_list<double> terms) {
  double m = 0;
  for (double t : terms) m = std::max(m, std::abs(t));
  return std::abs(diff) / (1.0 + m);
}

double norm_residual(const Vec& diff, std::initializer_list<Vec> terms) {
  double m = 0;
  for (const Vec& t : terms) m = std::max(m, t.norm());
  return diff.norm() / (1.0 + m);
}

std::string corruption_name(Corruption c) {
  switch (c) {
    case Corruption::kNone: return "none";
    case Corruption::kBaseRescale: return "base-rescale";
    case Corruption::kFlipASign: return "flip-a-sign";
    case Corruption::kDropQtildeTerm: return "drop-qtilde-term";
  }
  return "none";
}

Corruption corruption_from_name(const std::string& s) {
  if (s == "none") return Corruption::kNone;
  if (s == "base-rescale") return Corruption::kBaseRescale;
  if (s == "flip-a-sign") return Corruption::kFlipASign;
  if (s == "drop-qtilde-term") return Corruption::kDropQtildeTerm;
  throw std::invalid_argument("unknown corruption: " + s);
}

// ---- VerifyCtx ----

VerifyCtx::VerifyCtx(const Fixture& f, Corruption corruption, Vec x, Vec v)
    : f_(&f), corruption_(corruption), sj_(f.chart, std::move(x), std::move(v)),
      rng_(0) {}

void VerifyCtx::reseed(uint64_t stream) { rng_.seed(stream); }

double VerifyCtx::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng_);
}

Vec VerifyCtx::rand_vec(double scale) {
  Vec out(sj_.n());
  for (int i = 0; i < sj_.n(); ++i) out[i] = uniform(-1, 1) * scale;
  if (out.norm() < 1e-3) out[0] += 0.5 * scale;
  return out;
}

Vec VerifyCtx::rand_vertical(double scale) {
  Mat U = sj_.vertical_basis_value();
  Vec c(U.cols());
  for (int i = 0; i < c.size(); ++i) c[i] = uniform(-1, 1) * scale;
  if (c.norm() < 1e-3) c[0] += 0.5 * scale;
  return U * c;
}

Vec VerifyCtx::rand_ghorizontal(double scale) {
  Vec e = rand_vec(scale);
  Vec h = sj_.bot_value(e);
  if (h.norm() < 1e-3 * scale) {
    e[0] += scale;
    h = sj_.bot_value(e);
  }
  return h;
}

Vec VerifyCtx::ta(TAKind kind, const Vec& b, const Vec& e) {
  if (corruption_ == Corruption::kFlipASign) {
    if (kind == TAKind::kA) return -sj_.ta_value(TAKind::kA, b, e);
    if (kind == TAKind::kSum)
      return sj_.ta_value(TAKind::kT, b, e) - sj_.ta_value(TAKind::kA, b, e);
  }
  return sj_.ta_value(kind, b, e);
}

Vec VerifyCtx::nabla_ta(TAKind kind, const Vec& e, const Vec& h, const Vec& b) {
  if (corruption_ == Corruption::kFlipASign) {
    if (kind == TAKind::kA) return -sj_.nabla_ta_value(TAKind::kA, e, h, b);
    if (kind == TAKind::kSum)
      return sj_.nabla_ta_value(TAKind::kT, e, h, b) -
             sj_.nabla_ta_value(TAKind::kA, e, h, b);
  }
  return sj_.nabla_ta_value(kind, e, h, b);
}

Vec VerifyCtx::qhat(const Vec& u, const Vec& w) {
  return values_of(sj_.qhat(tot().cvec(u), tot().cvec(w)));
}

namespace {

// Qtilde with its middle Cartan-raise term removed; only used to fake a
// defective implementation for the negative controls.
JetVec qtilde_dropped(SubJets& sj, const JetVec& b, const JetVec& e) {
  ChartJets& tot = sj.total();
  const JetVec& vj = tot.seed_v();
  JetVec x = sj.bot(b), y = sj.bot(e);
  JetVec cxy = tot.csharp(x, y);
  JetVec t1 = sj.ta_apply(TAKind::kA, vj, cxy);
  JetVec t3 = tot.csharp(x, sj.ta_apply(TAKind::kA, vj, y));
  return sj.bot(t1 + t3);
}

}  // namespace

Vec VerifyCtx::qtilde(const Vec& x, const Vec& y) {
  if (corruption_ == Corruption::kDropQtildeTerm)
    return values_of(qtilde_dropped(sj_, tot().cvec(x), tot().cvec(y)));
  return values_of(sj_.qtilde(tot().cvec(x), tot().cvec(y)));
}

Vec VerifyCtx::nabla_qtilde(const Vec& e, const Vec& h, const Vec& b) {
  if (corruption_ != Corruption::kDropQtildeTerm)
    return sj_.nabla_qtilde_value(e, h, b);
  ChartJets& t = tot();
  JetVec F = qtilde_dropped(sj_, t.cvec(h), t.cvec(b));
  Vec out = values_of(t.nabla_aniso(e, F));
  Vec geh = values_of(t.gamma_apply(t.cvec(e), t.cvec(h)));
  Vec geb = values_of(t.gamma_apply(t.cvec(e), t.cvec(b)));
  out -= values_of(qtilde_dropped(sj_, t.cvec(geh), t.cvec(b)));
  out -= values_of(qtilde_dropped(sj_, t.cvec(h), t.cvec(geb)));
  return out;
}

Vec VerifyCtx::dot_qtilde(const Vec& h, const Vec& b, const Vec& dir) {
  if (corruption_ != Corruption::kDropQtildeTerm)
    return sj_.dot_qtilde_value(h, b, dir);
  ChartJets& t = tot();
  JetVec F = qtilde_dropped(sj_, t.cvec(h), t.cvec(b));
  Vec out(sj_.n());
  for (int i = 0; i < sj_.n(); ++i) out[i] = t.dv(F[i], dir).value();
  return out;
}

double VerifyCtx::gv(const Vec& a, const Vec& b) {
  return a.dot(tot().g_mat() * b);
}

Vec VerifyCtx::csharp(const Vec& a, const Vec& b) {
  return values_of(tot().csharp(tot().cvec(a), tot().cvec(b)));
}

double VerifyCtx::flag_denominator(const Vec& w) {
  double D = tot().Lval() * gv(w, w) - gv(v(), w) * gv(v(), w);
  double scale = std::max(tot().g_scale(), 1e-300);
  double floor = tol::kFlagDenominator * scale * scale *
                 std::max(1.0, w.squaredNorm()) *
                 std::max(1.0, v().squaredNorm());
  if (std::abs(D) < floor) throw DegenerateFlag("flag plane degenerate");
  return D;
}

// ---- identity implementations ----

namespace {

using Res = std::optional<double>;

// Right side of the vertical split-curvature relation on fiber data
// (including the fiber curvature term).
Vec rtop_fiber_rhs(VerifyCtx& c, const Vec& u, const Vec& w, const Vec& s) {
  SubJets& sj = c.sj();
  ChartJets& tot = c.tot();
  ChartJets& fib = sj.fiber();
  Vec uh = sj.to_fiber(u), wh = sj.to_fiber(w), shh = sj.to_fiber(s);
  Vec Rhat = sj.from_fiber(fib.curvature_value(uh, wh, shh));

  auto qhat_jets = [&](const Vec& a, const Vec& b) {
    return sj.qhat(tot.cvec(a), tot.cvec(b));
  };
  auto fiber_cov = [&](const Vec& dir, const Vec& h, const Vec& b) {
    JetVec F = qhat_jets(h, b);
    Vec out(sj.n());
    for (int i = 0; i < sj.n(); ++i)
      out[i] = sj.fiber_dir_derivative(F[i], dir).value();
    out += sj.fiber_gamma_value(dir, values_of(F));  // output-slot connection
    out -= c.qhat(sj.fiber_gamma_value(dir, h), b);
    out -= c.qhat(h, sj.fiber_gamma_value(dir, b));
    return out;
  };
  Vec dQ1 = fiber_cov(u, w, s);
  Vec dQ2 = fiber_cov(w, u, s);
  Vec QQ = c.qhat(u, c.qhat(w, s)) - c.qhat(w, c.qhat(u, s));
  Vec zu = c.qhat(u, c.v()) + c.ta(TAKind::kT, u, c.v());
  Vec zw = c.qhat(w, c.v()) + c.ta(TAKind::kT, w, c.v());
  Vec P1 = c.top(values_of(
      tot.p_apply(tot.cvec(w), tot.cvec(s), tot.cvec(zu))));
  Vec P2 = c.top(values_of(
      tot.p_apply(tot.cvec(u), tot.cvec(s), tot.cvec(zw))));
  Vec C1 = c.top(c.csharp(c.ta(TAKind::kT, w, s), zu));
  Vec C2 = c.top(c.csharp(c.ta(TAKind::kT, u, s), zw));
  return Rhat + dQ1 - dQ2 + QQ - P1 + P2 - 2.0 * C1 + 2.0 * C2;
}

// Right side of the horizontal split-curvature relation on base data
// (including the lifted base curvature term).
Vec rbot_base_rhs(VerifyCtx& c, const Vec& x, const Vec& y, const Vec& z) {
  SubJets& sj = c.sj();
  ChartJets& tot = c.tot();
  ChartJets& base = sj.base();
  Mat J = c.fixture().chart.sigma_lin;
  Vec xt = J * x, yt = J * y, zt = J * z;
  Vec Rb = base.curvature_value(xt, yt, zt);
  Vec Rlift = sj.base_lift_value(Rb);

  Vec Axv = c.ta(TAKind::kA, x, c.v());
  Vec Ayv = c.ta(TAKind::kA, y, c.v());
  Vec t1 = c.ta(TAKind::kA, z, c.ta(TAKind::kA, y, x)) -
           c.ta(TAKind::kA, z, c.ta(TAKind::kA, x, y));
  Vec dq = c.bot(c.nabla_qtilde(x, y, z) - c.nabla_qtilde(y, x, z));
  Vec qq = c.qtilde(y, c.qtilde(x, z)) - c.qtilde(x, c.qtilde(y, z));
  Vec c1 = 2.0 * c.ta(TAKind::kA, z, c.top(c.csharp(y, Axv)));
  Vec c2 = 2.0 * c.ta(TAKind::kA, y, c.top(c.csharp(z, Axv)));
  Vec c3 = 2.0 * c.ta(TAKind::kA, z, c.top(c.csharp(x, Ayv)));
  Vec c4 = 2.0 * c.ta(TAKind::kA, x, c.top(c.csharp(z, Ayv)));
  Vec p1 = c.bot(values_of(
      tot.p_apply(tot.cvec(y), tot.cvec(z), tot.cvec(Axv))));
  Vec p2 = c.bot(values_of(
      tot.p_apply(tot.cvec(x), tot.cvec(z), tot.cvec(Ayv))));
  Vec dq1 = c.bot(c.dot_qtilde(y, z, Axv));
  Vec dq2 = c.bot(c.dot_qtilde(x, z, Ayv));
  return Rlift + t1 + dq + qq + c1 + c2 - c3 - c4 - p1 + p2 + dq1 - dq2;
}

std::vector<IdentityCheck> build_catalogue() {
  std::vector<IdentityCheck> cat;
  auto add = [&](IdentityCheck ic) { cat.push_back(std::move(ic)); };

  add({"definition-invariants",
       "differential rank, fiber nondegeneracy, horizontal length match",
       SampleKind::kHorizontal, ToleranceClass::kExact, false, 1, false, false,
       0, [](VerifyCtx& c) -> Res {
         Mat J = c.sj().jacobian_value();
         Eigen::FullPivLU<Mat> lu(J);
         if (lu.rank() < J.rows()) return 1.0;
         double gram = c.sj().vertical_gram_det();
         if (gram < 1e-12) return 1.0;
         double L = c.tot().Lval();
         double Lb = c.fixture().chart.base.value(
             c.fixture().chart.project(c.x()), c.fixture().chart.push(c.v()));
         return norm_residual(L - Lb, {L, Lb});
       }});

  add({"lemma1-gv1", "projected scalar product matches on horizontal pairs",
       SampleKind::kHorizontal, ToleranceClass::kExact, false, 1, false, false,
       0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal();
         Mat J = c.fixture().chart.sigma_lin;
         double lhs = c.gv(x, y);
         Mat gb = c.sj().base().g_mat();
         double rhs = (J * x).dot(gb * (J * y));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"lemma1-gv2", "projected scalar product with one arbitrary slot",
       SampleKind::kHorizontal, ToleranceClass::kExact, false, 1, false, false,
       0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), e = c.rand_vec();
         Mat J = c.fixture().chart.sigma_lin;
         double lhs = c.gv(x, e);
         Mat gb = c.sj().base().g_mat();
         double rhs = (J * x).dot(gb * (J * e));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"cartan-IIH",
       "Cartan defect against the second fundamental form of the horizontal set",
       SampleKind::kHorizontal, ToleranceClass::kLoose, false, 1, false, false,
       25, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             e = c.rand_vec();
         Vec II = second_fundamental_form_H(c.fixture().chart,
                                            {c.x(), c.v()}, x, y);
         Mat J = c.fixture().chart.sigma_lin;
         double lhs = 0;
         ChartJets& t = c.tot();
         lhs = t.cartan_apply(t.cvec(x), t.cvec(y), t.cvec(e)).value();
         ChartJets& b = c.sj().base();
         double cb = b.cartan_apply(b.cvec(J * x), b.cvec(J * y),
                                    b.cvec(J * e)).value();
         double rhs = cb - 0.5 * c.gv(II, e);
         return norm_residual(lhs - rhs, {lhs, cb, 0.5 * c.gv(II, e)});
       }});

  add({"dot-top", "fiber derivative of the vertical part",
       SampleKind::kAny, ToleranceClass::kExact, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         Vec e = c.rand_vec(), h = c.rand_vec();
         SubJets& sj = c.sj();
         JetVec te = sj.top(c.tot().cvec(e));
         Vec lhs(sj.n());
         for (int i = 0; i < sj.n(); ++i) lhs[i] = c.tot().dv(te[i], h).value();
         Vec rhs = 2.0 * c.top(c.csharp(c.bot(e), h));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"dot-bot", "fiber derivative of the horizontal part",
       SampleKind::kAny, ToleranceClass::kExact, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         Vec e = c.rand_vec(), h = c.rand_vec();
         SubJets& sj = c.sj();
         JetVec be = sj.bot(c.tot().cvec(e));
         Vec lhs(sj.n());
         for (int i = 0; i < sj.n(); ++i) lhs[i] = c.tot().dv(be[i], h).value();
         Vec rhs = -2.0 * c.top(c.csharp(c.bot(e), h));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"lemma3-UTA", "vertical-field derivative decomposition",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         ChartJets& t = c.tot();
         Vec w = c.rand_vertical(), xh = c.rand_ghorizontal();
         Vec coef(sj.r());
         for (int i = 0; i < sj.r(); ++i) coef[i] = c.uniform(-1, 1);
         const auto& ub = sj.vertical_basis();
         JetVec U(sj.n(), t.cjet(0.0));
         for (int a = 0; a < sj.r(); ++a)
           for (int i = 0; i < sj.n(); ++i) U[i] += coef[a] * ub[a][i];
         Vec u = values_of(U);
         auto check = [&](const Vec& dir) {
           JetVec nu = t.nabla_aniso(dir, U);
           Vec horiz = c.bot(values_of(nu));
           Vec want = c.ta(TAKind::kSum, dir, u);
           return norm_residual(horiz - want, {horiz, want});
         };
         return std::max(check(w), check(xh));
       }});

  add({"lemma3-YTA", "horizontal-field derivative decomposition",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         ChartJets& t = c.tot();
         Mat J = c.fixture().chart.sigma_lin;
         Vec yt = J * c.rand_vec();
         if (yt.norm() < 1e-3) yt[0] += 0.7;
         JetVec V = constant_jets(c.v(), 2 * sj.n(), 1);
         JetVec Y = sj.gv_lift_field(yt, V);
         Vec y = values_of(Y);
         auto check = [&](const Vec& dir) {
           JetVec ny = t.nabla_aniso(dir, Y);
           Vec vert = c.top(values_of(ny));
           Vec Nw = values_of(t.nonlinear_apply(t.cvec(dir)));
           Vec want = c.top(c.ta(TAKind::kSum, dir, y)) -
                      2.0 * c.top(c.csharp(y, Nw));
           return norm_residual(vert - want, {vert, want});
         };
         Vec w = c.rand_vertical(), xh = c.rand_ghorizontal();
         return std::max(check(w), check(xh));
       }});

  add({"lemma3-lieconv",
       "vertical derivative of a projectable horizontal field",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         ChartJets& t = c.tot();
         Mat J = c.fixture().chart.sigma_lin;
         Vec yt = J * c.rand_vec();
         if (yt.norm() < 1e-3) yt[0] += 0.7;
         JetVec V = constant_jets(c.v(), 2 * sj.n(), 1);
         JetVec Y = sj.gv_lift_field(yt, V);
         Vec y = values_of(Y);
         Vec w = c.rand_vertical();
         JetVec ny = t.nabla_aniso(w, Y);
         Vec lhs = c.bot(values_of(ny));
         Vec rhs = c.ta(TAKind::kA, y, w);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"TA-skew", "skew-symmetry and subspace exchange of T and A",
       SampleKind::kAny, ToleranceClass::kExact, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         Vec b = c.rand_vec(), e = c.rand_vec(), h = c.rand_vec();
         double worst = 0;
         for (TAKind k : {TAKind::kT, TAKind::kA}) {
           double skew = c.gv(c.ta(k, b, e), h) + c.gv(e, c.ta(k, b, h));
           worst = std::max(worst,
                            norm_residual(skew, {c.gv(c.ta(k, b, e), h)}));
           Vec img_v = c.ta(k, b, c.top(e));
           worst = std::max(worst, norm_residual(c.top(img_v),
                                                 {img_v}));
           Vec img_h = c.ta(k, b, c.bot(e));
           worst = std::max(worst, norm_residual(c.bot(img_h), {img_h}));
         }
         return worst;
       }});

  add({"T-sym-vert", "symmetry of T on verticals at a vertical flagpole",
       SampleKind::kVertical, ToleranceClass::kExact, false, 1, false, false,
       0, [](VerifyCtx& c) -> Res {
         Vec u = c.rand_vertical(), w = c.rand_vertical();
         Vec a = c.ta(TAKind::kT, u, w), b = c.ta(TAKind::kT, w, u);
         return norm_residual(a - b, {a, b});
       }});

  add({"A-antisym-hor", "antisymmetry of A against a horizontal flagpole",
       SampleKind::kHorizontal, ToleranceClass::kExact, false, 1, false, false,
       0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal();
         Vec a = c.ta(TAKind::kA, x, c.v());
         Vec b = c.ta(TAKind::kA, c.v(), x);
         double r1 = norm_residual(a + b, {a, b});
         Vec z = c.ta(TAKind::kA, c.v(), c.v());
         return std::max(r1, norm_residual(z, {a}));
       }});

  add({"gauss-vert", "vertical derivative vs fiber connection plus Qhat",
       SampleKind::kVertical, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec u = c.rand_vertical(), w = c.rand_vertical();
         Vec lhs = c.top(values_of(
             c.tot().gamma_apply(c.tot().cvec(u), c.tot().cvec(w))));
         Vec rhs = sj.fiber_gamma_value(u, w) + c.qhat(u, w);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"gauss-dual", "horizontal derivative vs lifted base connection plus Qtilde",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Mat J = c.fixture().chart.sigma_lin;
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal();
         Vec lhs = c.bot(values_of(
             c.tot().gamma_apply(c.tot().cvec(x), c.tot().cvec(y))));
         ChartJets& b = sj.base();
         Vec gb = values_of(b.gamma_apply(b.cvec(J * x), b.cvec(J * y)));
         Vec rhs = sj.base_lift_value(gb) + c.qtilde(x, y);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"gauss-dual-extended",
       "horizontal derivative of projectable fields, arbitrary slots",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Mat J = c.fixture().chart.sigma_lin;
         Vec e = c.rand_vec(), h = c.rand_vec();
         Vec lhs = c.bot(values_of(
             c.tot().gamma_apply(c.tot().cvec(e), c.tot().cvec(h))));
         ChartJets& b = sj.base();
         Vec gb = values_of(b.gamma_apply(b.cvec(J * e), b.cvec(J * h)));
         Vec corr = c.ta(TAKind::kT, e, h) + c.ta(TAKind::kA, e, h) +
                    c.ta(TAKind::kA, h, e);
         Vec rhs = sj.base_lift_value(gb) + c.qtilde(e, h) + c.bot(corr);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  // bracket-based characterizations with constructed projectable fields
  auto bracket_fields = [](VerifyCtx& c, JetVec& V, JetVec& X, JetVec& Y,
                           Vec& x, Vec& y) {
    SubJets& sj = c.sj();
    Mat J = c.fixture().chart.sigma_lin;
    ChartJets& b = sj.base();
    Vec vt = J * c.v();
    // projected reference field parallel at the base point to first order
    JetVec sig = sj.sigma_jets();
    JetVec Vt;
    int nv = 2 * sj.n();
    int mdim = sj.m();
    for (int a = 0; a < mdim; ++a) {
      Jet acc = Jet::constant(nv, 1, vt[a]);
      for (int bb = 0; bb < mdim; ++bb)
        for (int cc = 0; cc < mdim; ++cc)
          acc -= b.gamma(a, bb, cc).value() *
                 (sig[bb].truncated(1) - sig[bb].value()) * vt[cc];
      Vt.push_back(acc);
    }
    V = sj.newton_lift_field(Vt, 1);
    x = c.rand_ghorizontal();
    y = c.rand_ghorizontal();
    X = sj.gv_lift_field(J * x, V);
    Y = sj.gv_lift_field(J * y, V);
  };
  auto bracket_of = [](VerifyCtx& c, const JetVec& A, const JetVec& B) {
    int n = c.sj().n();
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[i] += A[j].value() * derivative(B[i], j).value() -
                  B[j].value() * derivative(A[i], j).value();
    return out;
  };

  add({"A-bracket", "A against the vertical part of the field bracket",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 40, [bracket_fields, bracket_of](VerifyCtx& c) -> Res {
         JetVec V, X, Y;
         Vec x, y;
         bracket_fields(c, V, X, Y, x, y);
         Vec lie = bracket_of(c, X, Y);
         Vec cs = c.csharp(x, y);
         Vec lhs = c.ta(TAKind::kA, x, y);
         Vec rhs = 0.5 * c.top(lie) + c.ta(TAKind::kSum, cs, c.v()) +
                   c.top(c.csharp(c.ta(TAKind::kA, x, c.v()), y)) -
                   c.top(c.csharp(x, c.ta(TAKind::kA, y, c.v())));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"A-xv-bracket", "A paired with the reference direction via the bracket",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 40, [bracket_fields, bracket_of](VerifyCtx& c) -> Res {
         JetVec V, X, Y;
         Vec x, y;
         bracket_fields(c, V, X, Y, x, y);
         Vec lie = bracket_of(c, X, V);
         Vec lhs = c.ta(TAKind::kA, x, c.v());
         Vec rhs = 0.5 * c.top(lie);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"A-almost-antisym", "almost-antisymmetry of A on horizontal pairs",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal();
         Vec lhs = c.ta(TAKind::kA, x, y) + c.ta(TAKind::kA, y, x);
         Vec rhs = 2.0 * c.ta(TAKind::kSum, c.csharp(x, y), c.v());
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  auto lemma4 = [](VerifyCtx& c, TAKind kind, bool vertical_dir) -> Res {
    Vec h = vertical_dir ? c.rand_vertical() : c.rand_ghorizontal();
    Vec arg = kind == TAKind::kA ? c.rand_vertical() : c.rand_ghorizontal();
    Vec e = c.rand_vec();
    Vec lhs = c.nabla_ta(kind, h, arg, e);
    Vec rhs = -c.ta(kind, c.ta(TAKind::kSum, h, arg), e);
    return norm_residual(lhs - rhs, {lhs, rhs});
  };
  add({"lemma4-A-vert", "derivative of A along verticals is algebraic",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma4](VerifyCtx& c) { return lemma4(c, TAKind::kA, true); }});
  add({"lemma4-A-hor", "derivative of A along horizontals is algebraic",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma4](VerifyCtx& c) { return lemma4(c, TAKind::kA, false); }});
  add({"lemma4-T-vert", "derivative of T along verticals is algebraic",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma4](VerifyCtx& c) { return lemma4(c, TAKind::kT, true); }});
  add({"lemma4-T-hor", "derivative of T along horizontals is algebraic",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma4](VerifyCtx& c) { return lemma4(c, TAKind::kT, false); }});

  auto lemma5 = [](VerifyCtx& c, bool vertical_arg) -> Res {
    Vec e = c.rand_vec(), h = c.rand_vec();
    Vec arg = vertical_arg ? c.rand_vertical() : c.rand_ghorizontal();
    Vec lhs = c.nabla_ta(TAKind::kSum, e, h, arg);
    lhs = vertical_arg ? c.top(lhs) : c.bot(lhs);
    Vec rhs = c.ta(TAKind::kSum, e, c.ta(TAKind::kSum, h, arg)) -
              c.ta(TAKind::kSum, h, c.ta(TAKind::kSum, e, arg));
    return norm_residual(lhs - rhs, {lhs, rhs});
  };
  add({"lemma5-vert", "projected derivative of the configuration map, vertical",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma5](VerifyCtx& c) { return lemma5(c, true); }});
  add({"lemma5-hor", "projected derivative of the configuration map, horizontal",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [lemma5](VerifyCtx& c) { return lemma5(c, false); }});

  add({"rtop-rbot-def-consistency",
       "nested definition agrees with the computable expansion",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec b = c.rand_vec(), e = c.rand_vec();
         Vec w = c.rand_vertical(), x = c.rand_ghorizontal();
         Vec rt1 = sj.r_top(b, e, w), rt2 = sj.r_top_def(b, e, w);
         Vec rb1 = sj.r_bot(b, e, x), rb2 = sj.r_bot_def(b, e, x);
         return std::max(norm_residual(rt1 - rt2, {rt1, rt2}),
                         norm_residual(rb1 - rb2, {rb1, rb2}));
       }});

  add({"rtop-horizontal",
       "vertical curvature of horizontal arguments pairs into the Cartan raise",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec e = c.rand_vec(), h = c.rand_vec();
         Vec x = c.rand_ghorizontal();
         Vec lhs = sj.r_top_def(e, h, x);
         Vec rv = c.tot().curvature_value(e, h, c.v());
         Vec rhs = -2.0 * c.top(c.csharp(rv, x));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"rbot-vertical", "horizontal curvature annihilates vertical arguments",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec e = c.rand_vec(), h = c.rand_vec(), w = c.rand_vertical();
         Vec lhs = sj.r_bot_def(e, h, w);
         return norm_residual(lhs, {w});
       }});

  add({"rtop-fiber", "vertical curvature vs fiber curvature with corrections",
       SampleKind::kVertical, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec u = c.rand_vertical(), w = c.rand_vertical(),
             s = c.rand_vertical();
         Vec lhs = sj.r_top(u, w, s);
         Vec rhs = rtop_fiber_rhs(c, u, w, s);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"rbot-base", "horizontal curvature vs lifted base curvature",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             z = c.rand_ghorizontal();
         Vec lhs = sj.r_bot(x, y, z);
         Vec rhs = rbot_base_rhs(c, x, y, z);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"unified", "curvature decomposition into split and configuration parts",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec e = c.rand_vec(), h = c.rand_vec(), b = c.rand_vec();
         Vec lhs = c.tot().curvature_value(e, h, b);
         Vec rhs = sj.r_top_def(e, h, b) + sj.r_bot_def(e, h, b) +
                   c.nabla_ta(TAKind::kSum, e, h, b) -
                   c.nabla_ta(TAKind::kSum, h, e, b) +
                   c.ta(TAKind::kSum, h, c.ta(TAKind::kSum, e, b)) -
                   c.ta(TAKind::kSum, e, c.ta(TAKind::kSum, h, b));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  // paired-curvature scalar identities on split argument slots
  auto gR = [](VerifyCtx& c, const Vec& a, const Vec& b, const Vec& cc,
               const Vec& d) {
    return c.gv(c.tot().curvature_value(a, b, cc), d);
  };
  add({"fund-0", "vertical 4-slot curvature pairing",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec w = c.rand_vertical(), u = c.rand_vertical(),
             s = c.rand_vertical(), sp = c.rand_vertical();
         double lhs = gR(c, w, u, s, sp);
         double rhs = c.gv(c.sj().r_top(w, u, s), sp) +
                      c.gv(c.ta(TAKind::kT, w, s), c.ta(TAKind::kT, u, sp)) -
                      c.gv(c.ta(TAKind::kT, u, s), c.ta(TAKind::kT, w, sp));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-1", "three vertical slots against a horizontal one",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec w = c.rand_vertical(), u = c.rand_vertical(),
             s = c.rand_vertical(), z = c.rand_ghorizontal();
         double lhs = gR(c, w, u, s, z);
         double rhs = c.gv(c.nabla_ta(TAKind::kT, w, u, s), z) -
                      c.gv(c.nabla_ta(TAKind::kT, u, w, s), z);
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-1p", "mixed curvature slots, vertical output",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), u = c.rand_vertical(),
             s = c.rand_vertical(), w = c.rand_vertical();
         double lhs = gR(c, x, u, s, w);
         double rhs = c.gv(c.sj().r_top(x, u, s), w) +
                      c.gv(c.ta(TAKind::kT, u, s), c.ta(TAKind::kA, x, w)) -
                      c.gv(c.ta(TAKind::kA, x, s), c.ta(TAKind::kT, u, w));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-2", "mixed curvature slots, horizontal output",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), u = c.rand_vertical(),
             s = c.rand_vertical(), z = c.rand_ghorizontal();
         double lhs = gR(c, x, u, s, z);
         double rhs = c.gv(c.nabla_ta(TAKind::kT, x, u, s), z) -
                      c.gv(c.nabla_ta(TAKind::kA, u, x, s), z) -
                      c.gv(c.ta(TAKind::kA, c.ta(TAKind::kA, x, u), s), z) -
                      c.gv(c.ta(TAKind::kT, u, x), c.ta(TAKind::kT, s, z));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-2p", "horizontal pair against a vertical pair",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             s = c.rand_vertical(), w = c.rand_vertical();
         double lhs = gR(c, x, y, s, w);
         double rhs = c.gv(c.sj().r_top(x, y, s), w) +
                      c.gv(c.ta(TAKind::kA, y, s), c.ta(TAKind::kA, x, w)) -
                      c.gv(c.ta(TAKind::kA, x, s), c.ta(TAKind::kA, y, w));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-3", "three horizontal slots against a vertical one",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             s = c.rand_vertical(), z = c.rand_ghorizontal();
         double lhs = gR(c, x, y, s, z);
         // pairing-term signs follow the curvature decomposition and the
         // skew-symmetry of T, which swaps the displayed order
         double rhs = c.gv(c.nabla_ta(TAKind::kA, x, y, s), z) -
                      c.gv(c.nabla_ta(TAKind::kA, y, x, s), z) +
                      c.gv(c.ta(TAKind::kA, x, y), c.ta(TAKind::kT, s, z)) -
                      c.gv(c.ta(TAKind::kA, y, x), c.ta(TAKind::kT, s, z));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});
  add({"fund-4", "horizontal 4-slot curvature pairing",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [gR](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             z = c.rand_ghorizontal(), zp = c.rand_ghorizontal();
         double lhs = gR(c, x, y, z, zp);
         double rhs = c.gv(c.sj().r_bot(x, y, z), zp) +
                      c.gv(c.ta(TAKind::kA, x, z), c.ta(TAKind::kA, y, zp)) -
                      c.gv(c.ta(TAKind::kA, y, z), c.ta(TAKind::kA, x, zp));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"fund-0p", "generalized fiber-side curvature identity",
       SampleKind::kVertical, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec w = c.rand_vertical(), u = c.rand_vertical(),
             s = c.rand_vertical();
         Vec lhs = c.top(c.tot().curvature_value(w, u, s));
         Vec rhs = rtop_fiber_rhs(c, w, u, s) +
                   c.ta(TAKind::kT, w, c.ta(TAKind::kT, u, s)) -
                   c.ta(TAKind::kT, u, c.ta(TAKind::kT, w, s));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"fund-4p", "generalized base-side curvature identity",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal(), y = c.rand_ghorizontal(),
             z = c.rand_ghorizontal();
         Vec lhs = c.bot(c.tot().curvature_value(x, y, z));
         Vec rhs = rbot_base_rhs(c, x, y, z) +
                   c.ta(TAKind::kA, x, c.ta(TAKind::kA, y, z)) -
                   c.ta(TAKind::kA, y, c.ta(TAKind::kA, x, z));
         return norm_residual(lhs - rhs, {lhs, rhs});
       }});

  add({"flag-general-vert", "flag curvature of a vertical flag, any flagpole",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         Vec w = c.rand_vertical();
         double D;
         try {
           D = c.flag_denominator(w);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         double K = c.gv(c.tot().curvature_value(c.v(), w, w), c.v()) / D;
         double Ktop = c.gv(c.sj().r_top(c.v(), w, w), c.v()) / D;
         Vec TAvw = c.ta(TAKind::kSum, c.v(), w);
         double extra =
             (c.gv(c.nabla_ta(TAKind::kT, c.v(), w, w) -
                       c.nabla_ta(TAKind::kSum, w, c.v(), w),
                   c.v()) -
              c.gv(c.ta(TAKind::kA, TAvw, w), c.v()) +
              c.gv(c.ta(TAKind::kT, w, w), c.ta(TAKind::kSum, c.v(), c.v())) -
              c.gv(TAvw, c.ta(TAKind::kT, w, c.v()))) /
             D;
         return norm_residual(K - Ktop - extra, {K, Ktop, extra});
       }});

  add({"flag-general-hor", "flag curvature of a horizontal flag, any flagpole",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, false, false, 0,
       [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal();
         double D;
         try {
           D = c.flag_denominator(x);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         double K = c.gv(c.tot().curvature_value(c.v(), x, x), c.v()) / D;
         double Ktop = c.gv(c.sj().r_top_def(c.v(), x, x), c.v()) / D;
         double Kbot = c.gv(c.sj().r_bot(c.v(), x, x), c.v()) / D;
         Vec TAvx = c.ta(TAKind::kSum, c.v(), x);
         double extra =
             (c.gv(c.nabla_ta(TAKind::kA, c.v(), x, x) -
                       c.nabla_ta(TAKind::kSum, x, c.v(), x),
                   c.v()) -
              c.gv(c.ta(TAKind::kT, TAvx, x), c.v()) +
              c.gv(c.ta(TAKind::kA, x, x), c.ta(TAKind::kSum, c.v(), c.v())) -
              c.gv(TAvx, c.ta(TAKind::kA, x, c.v()))) /
             D;
         return norm_residual(K - Ktop - Kbot - extra, {K, Ktop, Kbot, extra});
       }});

  add({"flag-vert-pole", "vertical flagpole vs fiber flag curvature",
       SampleKind::kVertical, ToleranceClass::kStandard, false, 2, false,
       false, 0, [](VerifyCtx& c) -> Res {
         SubJets& sj = c.sj();
         Vec w = c.rand_vertical();
         double D;
         try {
           D = c.flag_denominator(w);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         double K = c.gv(c.tot().curvature_value(c.v(), w, w), c.v()) / D;
         ChartJets& fib = sj.fiber();
         double Khat;
         try {
           Khat = fib.flag_curvature(sj.to_fiber(w));
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         Vec Tvv = c.ta(TAKind::kT, c.v(), c.v());
         Vec Tvw = c.ta(TAKind::kT, c.v(), w);
         double t1 = (c.gv(c.ta(TAKind::kT, w, w), Tvv) - c.gv(Tvw, Tvw)) / D;
         // fiber-side derivative of Qhat in the flag slots
         ChartJets& tot = c.tot();
         auto qhat_jets = [&](const Vec& a, const Vec& b) {
           return sj.qhat(tot.cvec(a), tot.cvec(b));
         };
         JetVec F = qhat_jets(w, w);
         Vec dQ(sj.n());
         for (int i = 0; i < sj.n(); ++i)
           dQ[i] = sj.fiber_dir_derivative(F[i], c.v()).value();
         dQ += sj.fiber_gamma_value(c.v(), values_of(F));
         dQ -= c.qhat(sj.fiber_gamma_value(c.v(), w), w);
         dQ -= c.qhat(w, sj.fiber_gamma_value(c.v(), w));
         Vec Pw = values_of(
             tot.p_apply(tot.cvec(w), tot.cvec(w), tot.cvec(Tvv)));
         double t2 = (c.gv(Pw - dQ, c.v()) +
                      tot.cartan_apply(tot.cvec(w),
                                       tot.cvec(c.qhat(c.v(), w)),
                                       tot.cvec(Tvv)).value()) /
                     D;
         return norm_residual(K - (Khat - t1 - t2), {K, Khat, t1, t2});
       }});

  add({"flag-hor-pole-w", "vertical flag at a horizontal flagpole",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec w = c.rand_vertical();
         double D;
         try {
           D = c.flag_denominator(w);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         double K = c.gv(c.tot().curvature_value(c.v(), w, w), c.v()) / D;
         Vec Avw = c.ta(TAKind::kA, c.v(), w);
         Vec Twv = c.ta(TAKind::kT, w, c.v());
         double rhs = (c.gv(c.nabla_ta(TAKind::kT, c.v(), w, w), c.v()) +
                       c.gv(Avw, Avw) - c.gv(Twv, Twv)) /
                      D;
         return norm_residual(K - rhs, {K, rhs});
       }});

  add({"flag-hor-pole-x", "horizontal flag vs base flag curvature",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec x = c.rand_ghorizontal();
         double D;
         try {
           D = c.flag_denominator(x);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         double K = c.gv(c.tot().curvature_value(c.v(), x, x), c.v()) / D;
         Mat J = c.fixture().chart.sigma_lin;
         double Kb;
         try {
           Kb = c.sj().base().flag_curvature(J * x);
         } catch (const DegenerateFlag&) {
           return std::nullopt;
         }
         Vec Axv = c.ta(TAKind::kA, x, c.v());
         double rhs = Kb - 3.0 * c.gv(Axv, Axv) / D;
         return norm_residual(K - rhs, {K, Kb, 3.0 * c.gv(Axv, Axv) / D});
       }});

  add({"geodesic-lift", "lifted base geodesics are total geodesics",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 2, [](VerifyCtx& c) -> Res {
         const SubmersionChart& S = c.fixture().chart;
         Vec vt = S.push(c.v());
         IntegrateOptions opts;
         opts.abs_tol = opts.rel_tol = 1e-11;
         GeodesicArc base;
         try {
           base = integrate_geodesic(S.base, S.project(c.x()), vt, 0, 0.4, opts);
           if (!base.complete) return std::nullopt;
           GeodesicArc lifted = lift_geodesic(S, base, c.x(), opts);
           GeodesicArc direct =
               integrate_geodesic(S.total, c.x(), c.v(), 0, 0.4, opts);
           if (!direct.complete) return std::nullopt;
           double sup = 0;
           for (int k = 0; k <= 10; ++k) {
             double t = 0.4 * k / 10.0;
             sup = std::max(sup, (lifted.x_at(t) - direct.x_at(t)).norm());
           }
           return sup / (1.0 + c.x().norm());
         } catch (const std::runtime_error&) {
           return std::nullopt;
         }
       }});

  add({"horizontality-persistence",
       "geodesics horizontal once stay horizontal",
       SampleKind::kHorizontal, ToleranceClass::kStandard, false, 1, false,
       false, 2, [](VerifyCtx& c) -> Res {
         const SubmersionChart& S = c.fixture().chart;
         IntegrateOptions opts;
         opts.abs_tol = opts.rel_tol = 1e-11;
         try {
           GeodesicArc arc =
               integrate_geodesic(S.total, c.x(), c.v(), 0, 0.4, opts);
           if (!arc.complete) return std::nullopt;
           return horizontality_persistence(S, arc, 17);
         } catch (const std::runtime_error&) {
           return std::nullopt;
         }
       }});

  add({"totally-geodesic", "norm of the fiber shape tensor on the diagonal",
       SampleKind::kVertical, ToleranceClass::kStandard, true, 1, false,
       false, 0, [](VerifyCtx& c) -> Res {
         Vec t = c.ta(TAKind::kT, c.v(), c.v());
         return t.norm();
       }});

  add({"horizontal-regularity", "vertical derivative of lifted field tops",
       SampleKind::kVertical, ToleranceClass::kStandard, true, 1, false,
       false, 10, [](VerifyCtx& c) -> Res {
         Mat J = c.fixture().chart.sigma_lin;
         Vec bt = J * c.rand_vec();
         if (bt.norm() < 1e-3) bt[0] += 0.7;
         try {
           return horizontal_regularity_residual(c.fixture().chart,
                                                 {c.x(), c.v()}, bt);
         } catch (const std::runtime_error&) {
           return std::nullopt;
         }
       }});

  add({"holonomy-isometry",
       "transported vertical curves keep their length",
       SampleKind::kAny, ToleranceClass::kStandard, false, 1, true, true, 1,
       [](VerifyCtx& c) -> Res {
         const SubmersionChart& S = c.fixture().chart;
         int r = S.fiber_dim();
         Mat U = vertical_basis(S, c.x());
         Vec cdir(r);
         for (int i = 0; i < r; ++i) cdir[i] = c.uniform(-1, 1);
         if (cdir.norm() < 1e-3) cdir[0] = 1.0;
         cdir.normalize();
         Vec d1(S.base_dim()), d2(S.base_dim());
         for (int i = 0; i < S.base_dim(); ++i) {
           d1[i] = c.uniform(-1, 1);
           d2[i] = c.uniform(-1, 1);
         }
         d1.normalize();
         d2.normalize();
         Vec xt0 = S.project(c.x());
         CurveFn curve = [xt0, d1, d2](double t) {
           return Vec(xt0 + 0.2 * t * d1 + 0.12 * std::sin(M_PI * t) * d2);
         };
         CurveFn curve_dot = [d1, d2](double t) {
           return Vec(0.2 * d1 + 0.12 * M_PI * std::cos(M_PI * t) * d2);
         };
         auto alpha0 = [&](double s) {
           return Vec(c.x() + U * (0.18 * (s - 0.5) * cdir));
         };
         auto alpha0_dot = [&](double) { return Vec(U * (0.18 * cdir)); };

         IntegrateOptions opts;
         opts.abs_tol = opts.rel_tol = 1e-11;
         auto transport = [&](const Vec& p) {
           return holonomy_transport(S, curve, curve_dot, 0, 1, p, opts)
               .endpoint;
         };
         // 8-point Gauss-Legendre on [0,1]
         static const double gx[] = {0.1834346424956498, 0.5255324099163290,
                                     0.7966664774136267, 0.9602898564975363};
         static const double gw[] = {0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
         double len0 = 0, len1 = 0;
         const double delta = 1e-4;
         try {
           for (int k = 0; k < 8; ++k) {
             double node = k < 4 ? 0.5 * (1.0 - gx[k]) : 0.5 * (1.0 + gx[k - 4]);
             double weight = 0.5 * gw[k < 4 ? k : k - 4];
             Vec a0 = alpha0(node);
             Vec a0d = alpha0_dot(node);
             len0 += weight * std::sqrt(S.total.value(a0, a0d));
             Vec p = transport(a0);
             Vec pp = transport(alpha0(node + delta));
             Vec pm = transport(alpha0(node - delta));
             Vec vel = (pp - pm) / (2.0 * delta);
             len1 += weight * std::sqrt(S.total.value(p, vel));
           }
         } catch (const std::runtime_error&) {
           return std::nullopt;
         }
         return std::abs(len1 - len0) / (1.0 + len0);
       }});

  // magnitude probes (diagnostics; flat/zero flags are asserted elsewhere)
  auto mag = [](const char* id, const char* note,
                std::function<double(VerifyCtx&)> f) {
    IdentityCheck ic;
    ic.id = id;
    ic.note = note;
    ic.kind = SampleKind::kAny;
    ic.cls = ToleranceClass::kExact;
    ic.diagnostic = true;
    ic.residual = [f](VerifyCtx& c) -> Res { return f(c); };
    return ic;
  };
  add(mag("mag-T", "max norm probe of T", [](VerifyCtx& c) {
    return c.ta(TAKind::kT, c.rand_vec(), c.rand_vec()).norm();
  }));
  add(mag("mag-A", "max norm probe of A", [](VerifyCtx& c) {
    return c.ta(TAKind::kA, c.rand_vec(), c.rand_vec()).norm();
  }));
  add(mag("mag-Qhat", "max norm probe of Qhat", [](VerifyCtx& c) {
    return c.qhat(c.rand_vec(), c.rand_vec()).norm();
  }));
  add(mag("mag-Qtilde", "max norm probe of Qtilde", [](VerifyCtx& c) {
    return c.qtilde(c.rand_vec(), c.rand_vec()).norm();
  }));
  add(mag("mag-R", "max norm probe of the curvature", [](VerifyCtx& c) {
    return c.tot().curvature_value(c.rand_vec(), c.rand_vec(), c.rand_vec())
        .norm();
  }));
  add(mag("mag-Rtop", "max norm probe of the vertical curvature",
          [](VerifyCtx& c) {
            return c.sj()
                .r_top_def(c.rand_vec(), c.rand_vec(), c.rand_vec())
                .norm();
          }));
  add(mag("mag-Rbot", "max norm probe of the horizontal curvature",
          [](VerifyCtx& c) {
            return c.sj()
                .r_bot_def(c.rand_vec(), c.rand_vec(), c.rand_vec())
                .norm();
          }));

  return cat;
}

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

struct SampleSite {
  bool valid = false;
  Vec x;
  std::optional<Vec> v_any, v_vert, v_hor;
};

}  // namespace

const std::vector<IdentityCheck>& identity_catalogue() {
  static const std::vector<IdentityCheck> cat = build_catalogue();
  return cat;
}

// ---- fixture validation ----

void validate_fixture(const Fixture& f, int samples, uint64_t seed) {
  const SubmersionChart& S = f.chart;
  std::mt19937_64 rng(mix(seed, 0xF1));
  int checked = 0, tries = 0;
  while (checked < samples && tries < samples * 100) {
    ++tries;
    Vec x(S.total_dim());
    for (int i = 0; i < S.total_dim(); ++i) {
      auto [lo, hi] = S.total.chart_domain.range[i];
      std::uniform_real_distribution<double> d(lo, hi);
      x[i] = d(rng);
    }
    Vec dir(S.total_dim());
    std::normal_distribution<double> nd;
    for (int i = 0; i < S.total_dim(); ++i) dir[i] = nd(rng);
    dir.normalize();
    std::uniform_real_distribution<double> sc(0.5, 2.0);
    Vec v = sc(rng) * dir;
    if (!S.total.is_admissible(x, v)) continue;

    Mat J(S.base_dim(), S.total_dim());
    try {
      SubJets sj(S, x, v, 2);
      J = sj.jacobian_value();
      Eigen::FullPivLU<Mat> lu(J);
      if (lu.rank() < S.base_dim())
        throw FixtureInvalid("differential rank invariant failed for " +
                             S.label);
      // fiber nondegeneracy under g_v
      sj.vertical_onb();

      // horizontal length preservation
      LiftResult l = horizontal_lift_vector(S, x, Vec(J * v));
      double L = S.total.value(x, l.v);
      double Lb = S.base.value(S.project(x), S.push(l.v));
      if (std::abs(L - Lb) > 1e-8 * (1.0 + std::abs(L)))
        throw FixtureInvalid(
            "horizontal length preservation invariant failed for " + S.label +
            " (|L - Lbase| = " + std::to_string(std::abs(L - Lb)) + ")");
    } catch (const DegenerateVertical&) {
      throw FixtureInvalid("fiber nondegeneracy invariant failed for " +
                           S.label);
    } catch (const DegenerateMetric& e) {
      throw FixtureInvalid(std::string("non-degeneracy invariant failed: ") +
                           e.what());
    } catch (const RankDeficient& e) {
      throw FixtureInvalid(std::string("differential rank invariant failed: ") +
                           e.what());
    } catch (const NoConvergence&) {
      continue;  // lift basin issue at this draw; try another site
    }
    ++checked;
  }
  if (checked < samples)
    throw FixtureInvalid("could not draw enough admissible samples for " +
                         S.label);
}

// ---- suite driver ----

namespace {

SampleSite draw_sample(const Fixture& f, uint64_t seed, int idx,
                       int* rejected, int* degenerate) {
  const SubmersionChart& S = f.chart;
  std::mt19937_64 rng(mix(seed, 1000 + idx));
  std::normal_distribution<double> nd;
  SampleSite site;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec x(S.total_dim());
    for (int i = 0; i < S.total_dim(); ++i) {
      auto [lo, hi] = S.total.chart_domain.range[i];
      double margin = 0.05 * (hi - lo);
      std::uniform_real_distribution<double> d(lo + margin, hi - margin);
      x[i] = d(rng);
    }
    Vec dir(S.total_dim());
    for (int i = 0; i < S.total_dim(); ++i) dir[i] = nd(rng);
    if (dir.norm() < 1e-6) continue;
    dir.normalize();
    std::uniform_real_distribution<double> sc(0.5, 2.0);
    Vec v = sc(rng) * dir;
    if (!S.total.is_admissible(x, v)) {
      ++*rejected;
      continue;
    }
    try {
      SubJets sj(S, x, v, 2);
      double scale = std::max(1.0, sj.total().g_scale());
      if (sj.vertical_gram_det() <
          tol::kVerticalGram * std::pow(scale, S.fiber_dim())) {
        ++*degenerate;
        continue;
      }
    } catch (const std::runtime_error&) {
      ++*rejected;
      continue;
    }
    site.valid = true;
    site.x = x;
    site.v_any = v;

    // vertical companion
    Mat U = vertical_basis(S, x);
    for (int attempt2 = 0; attempt2 < 20; ++attempt2) {
      Vec cvt(U.cols());
      for (int i = 0; i < U.cols(); ++i) cvt[i] = nd(rng);
      if (cvt.norm() < 1e-6) continue;
      cvt *= sc(rng) / cvt.norm();
      Vec vv = U * cvt;
      if (S.total.is_admissible(x, vv)) {
        site.v_vert = vv;
        break;
      }
    }
    // horizontal companion
    try {
      LiftResult l = horizontal_lift_vector(S, x, Vec(S.sigma_lin * v), v);
      if (S.total.is_admissible(x, l.v)) site.v_hor = l.v;
    } catch (const std::runtime_error&) {
    }
    return site;
  }
  return site;
}

Fixture apply_corruption(Fixture f, Corruption c) {
  if (c == Corruption::kBaseRescale) {
    MetricEval inner = f.chart.base.eval;
    f.chart.base.eval = [inner](const JetVec& x, const JetVec& v) {
      return 1.01 * inner(x, v);
    };
  }
  return f;
}

}  // namespace

VerificationReport run_suite(const Fixture& fixture, const SuiteOptions& opts) {
  auto t_start = std::chrono::steady_clock::now();
  Fixture f = apply_corruption(fixture, opts.corruption);
  if (opts.corruption == Corruption::kNone)
    validate_fixture(f, std::min(opts.n_samples, 25), opts.seed);

  const auto& cat = identity_catalogue();
  std::vector<int> active;
  for (size_t i = 0; i < cat.size(); ++i) {
    if (!opts.identity_filter.empty()) {
      bool found = false;
      for (const auto& id : opts.identity_filter)
        if (id == cat[i].id) found = true;
      if (!found) continue;
    }
    active.push_back(static_cast<int>(i));
  }

  VerificationReport rep;
  rep.fixture = f.chart.label;
  rep.seed = opts.seed;
  rep.n_samples = opts.n_samples;
  rep.profile = opts.profile.name;
  rep.corruption = corruption_name(opts.corruption);

  // sequential, deterministic sampling
  std::vector<SampleSite> sites(opts.n_samples);
  for (int i = 0; i < opts.n_samples; ++i)
    sites[i] = draw_sample(f, opts.seed, i, &rep.rejected_samples,
                           &rep.degenerate_rejections);

  // residual matrix: sample-major evaluation, mergeable across threads
  struct Cell {
    double value = 0.0;
    int state = 0;  // 0 unused, 1 value, 2 skipped
  };
  std::vector<std::vector<Cell>> cells(
      opts.n_samples, std::vector<Cell>(active.size()));

  auto eval_sample = [&](int si) {
    const SampleSite& site = sites[si];
    if (!site.valid) return;
    std::optional<VerifyCtx> ctx_any, ctx_hor, ctx_vert;
    auto ctx_for = [&](SampleKind k) -> VerifyCtx* {
      std::optional<Vec> v = site.v_any;
      std::optional<VerifyCtx>* slot = &ctx_any;
      if (k == SampleKind::kHorizontal) {
        v = site.v_hor;
        slot = &ctx_hor;
      } else if (k == SampleKind::kVertical) {
        v = site.v_vert;
        slot = &ctx_vert;
      }
      if (!v) return nullptr;
      if (!slot->has_value()) {
        try {
          slot->emplace(f, opts.corruption, site.x, *v);
        } catch (const std::runtime_error&) {
          return nullptr;
        }
      }
      return &slot->value();
    };
    for (size_t ai = 0; ai < active.size(); ++ai) {
      const IdentityCheck& ic = cat[active[ai]];
      if (ic.max_samples > 0 && si >= ic.max_samples) continue;
      if (ic.min_fiber_dim > f.chart.fiber_dim()) continue;
      if (ic.needs_totally_geodesic && !f.flags.totally_geodesic) continue;
      if (ic.needs_horizontally_regular && !f.flags.horizontally_regular)
        continue;
      VerifyCtx* ctx = ctx_for(ic.kind);
      Cell& cell = cells[si][ai];
      if (!ctx) {
        cell.state = 2;
        continue;
      }
      ctx->reseed(mix(mix(opts.seed, 7777 + si), active[ai]));
      try {
        Res r = ic.residual(*ctx);
        if (r) {
          cell.value = *r;
          cell.state = 1;
        } else {
          cell.state = 2;
        }
      } catch (const DegenerateFlag&) {
        cell.state = 2;
      } catch (const DegenerateVertical&) {
        cell.state = 2;
      } catch (const NoConvergence&) {
        cell.state = 2;
      }
    }
  };

  int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int i = 0; i < opts.n_samples; ++i) eval_sample(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= opts.n_samples) return;
          eval_sample(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  // deterministic reduction in sample order
  for (size_t ai = 0; ai < active.size(); ++ai) {
    const IdentityCheck& ic = cat[active[ai]];
    IdentityStats st;
    st.id = ic.id;
    st.note = ic.note;
    st.cls = ic.cls == ToleranceClass::kExact
                 ? "exact"
                 : ic.cls == ToleranceClass::kStandard ? "standard" : "loose";
    st.tolerance = ic.cls == ToleranceClass::kExact
                       ? opts.profile.exact
                       : ic.cls == ToleranceClass::kStandard
                             ? opts.profile.standard
                             : opts.profile.loose;
    st.diagnostic = ic.diagnostic;
    st.applicable = ic.min_fiber_dim <= f.chart.fiber_dim() &&
                    (!ic.needs_totally_geodesic || f.flags.totally_geodesic) &&
                    (!ic.needs_horizontally_regular ||
                     f.flags.horizontally_regular);
    double sum = 0;
    int worst_idx = -1;
    for (int si = 0; si < opts.n_samples; ++si) {
      const Cell& cell = cells[si][ai];
      if (cell.state == 1) {
        ++st.count;
        sum += cell.value;
        if (cell.value >= st.max) {
          st.max = cell.value;
          worst_idx = si;
        }
      } else if (cell.state == 2) {
        ++st.skipped;
      }
    }
    st.mean = st.count ? sum / st.count : 0.0;
    if (worst_idx >= 0) {
      const SampleSite& ws = sites[worst_idx];
      st.worst_x.assign(ws.x.data(), ws.x.data() + ws.x.size());
      const std::optional<Vec>& wv =
          ic.kind == SampleKind::kHorizontal
              ? ws.v_hor
              : ic.kind == SampleKind::kVertical ? ws.v_vert : ws.v_any;
      if (wv) st.worst_v.assign(wv->data(), wv->data() + wv->size());
    }
    if (!st.diagnostic && st.applicable && st.count > 0)
      st.pass = st.max <= st.tolerance;
    rep.identities.push_back(std::move(st));
  }

  if (!opts.per_sample_csv.empty()) {
    std::ofstream csv(opts.per_sample_csv);
    if (!csv) throw std::runtime_error("cannot open " + opts.per_sample_csv);
    csv << "sample,identity,residual,state\n";
    csv.precision(17);
    for (int si = 0; si < opts.n_samples; ++si)
      for (size_t ai = 0; ai < active.size(); ++ai) {
        const Cell& cell = cells[si][ai];
        if (cell.state == 0) continue;
        csv << si << ',' << cat[active[ai]].id << ','
            << (cell.state == 1 ? cell.value : 0.0) << ','
            << (cell.state == 1 ? "ok" : "skipped") << "\n";
      }
  }

  rep.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
  return rep;
}

bool VerificationReport::all_passed() const {
  for (const auto& st : identities)
    if (!st.diagnostic && st.applicable && !st.pass) return false;
  return true;
}

std::string VerificationReport::to_json(bool include_timing) const {
  ordered_json j;
  j["schema"] = schema;
  j["fixture"] = fixture;
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  j["profile"] = profile;
  j["corruption"] = corruption;
  j["rejected_samples"] = rejected_samples;
  j["degenerate_rejections"] = degenerate_rejections;
  if (include_timing) j["wall_time_ms"] = wall_time_ms;
  j["identities"] = ordered_json::array();
  for (const auto& st : identities) {
    ordered_json e;
    e["id"] = st.id;
    e["note"] = st.note;
    e["class"] = st.cls;
    e["tolerance"] = st.tolerance;
    e["diagnostic"] = st.diagnostic;
    e["applicable"] = st.applicable;
    e["count"] = st.count;
    e["skipped"] = st.skipped;
    e["max"] = st.max;
    e["mean"] = st.mean;
    e["worst_x"] = st.worst_x;
    e["worst_v"] = st.worst_v;
    e["pass"] = st.pass;
    j["identities"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

VerificationReport VerificationReport::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  VerificationReport rep;
  rep.schema = j.at("schema").get<std::string>();
  rep.fixture = j.at("fixture").get<std::string>();
  rep.seed = j.at("seed").get<uint64_t>();
  rep.n_samples = j.at("n_samples").get<int>();
  rep.profile = j.at("profile").get<std::string>();
  rep.corruption = j.at("corruption").get<std::string>();
  rep.rejected_samples = j.at("rejected_samples").get<int>();
  rep.degenerate_rejections = j.at("degenerate_rejections").get<int>();
  if (j.contains("wall_time_ms"))
    rep.wall_time_ms = j.at("wall_time_ms").get<int64_t>();
  for (const auto& e : j.at("identities")) {
    IdentityStats st;
    st.id = e.at("id").get<std::string>();
    st.note = e.at("note").get<std::string>();
    st.cls = e.at("class").get<std::string>();
    st.tolerance = e.at("tolerance").get<double>();
    st.diagnostic = e.at("diagnostic").get<bool>();
    st.applicable = e.at("applicable").get<bool>();
    st.count = e.at("count").get<int>();
    st.skipped = e.at("skipped").get<int>();
    st.max = e.at("max").get<double>();
    st.mean = e.at("mean").get<double>();
    st.worst_x = e.at("worst_x").get<std::vector<double>>();
    st.worst_v = e.at("worst_v").get<std::vector<double>>();
    st.pass = e.at("pass").get<bool>();
    rep.identities.push_back(std::move(st));
  }
  return rep;
}

}  // namespace finsub
