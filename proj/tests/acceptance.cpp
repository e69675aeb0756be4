// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "fsub/specfile.hpp"
#include "fsub/verifier.hpp"

using namespace finsub;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

const IdentityStats* find_stat(const VerificationReport& r,
                               const std::string& id) {
  for (const auto& st : r.identities)
    if (st.id == id) return &st;
  return nullptr;
}

// criterion 1: the product fixture vanishes identically
void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  SuiteOptions opts;
  opts.n_samples = 100;
  opts.seed = 20240811;
  opts.jobs = 4;
  VerificationReport rep = run_suite(riemannian_product(), opts);
  bool ok = rep.all_passed();
  double worst = 0;
  for (const auto& st : rep.identities) {
    if (st.diagnostic || !st.applicable || st.count == 0) continue;
    worst = std::max(worst, st.max);
    if (st.max > 1e-9) ok = false;
  }
  double mags = 0;
  for (const char* id : {"mag-T", "mag-A", "mag-Qhat", "mag-Qtilde", "mag-R",
                         "mag-Rtop", "mag-Rbot"}) {
    const auto* st = find_stat(rep, id);
    if (!st) { ok = false; continue; }
    mags = std::max(mags, st->max);
    if (st->max > 1e-10) ok = false;
  }
  double dt = seconds_since(t0);
  if (dt > 5.0) ok = false;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "product sanity: worst residual %.2e (<=1e-9), tensor "
                "magnitudes %.2e (<=1e-10), %.1f s (<=5 s)",
                worst, mags, dt);
  report(1, ok, buf);
}

// criterion 2: classical numbers on the round-sphere fibration
void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  Fixture f = hopf();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> th(0.6, M_PI - 0.6);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  bool ok = true;
  double worst_base = 0, worst_a = 0, worst_flag = 0, worst_cons = 0,
         worst_vert = 0;
  for (int rep = 0; rep < 20; ++rep) {
    double theta = th(rng), phi = ud(rng), psi = ud(rng);
    Vec p(3);
    p << theta, phi, psi;
    // unit orthonormal horizontal pair
    Vec v(3), x(3);
    v << 2.0, 0.0, 0.0;
    x << 0.0, 2.0 / std::sin(theta), -2.0 * std::cos(theta) / std::sin(theta);
    // mix the pair by a random rotation to vary the flags
    double a = ud(rng) * M_PI;
    Vec vr = std::cos(a) * v + std::sin(a) * x;
    Vec xr = -std::sin(a) * v + std::cos(a) * x;

    SubJets sj(f.chart, p, vr);
    ChartJets& base = sj.base();
    double kb = base.flag_curvature(f.chart.push(xr));
    worst_base = std::max(worst_base, std::abs(kb - 4.0));

    Vec Axv = sj.ta_value(TAKind::kA, xr, vr);
    Mat g = sj.total().g_mat();
    double an = Axv.dot(g * Axv);
    worst_a = std::max(worst_a, std::abs(an - 1.0));

    double kt = sj.total().flag_curvature(xr);
    worst_flag = std::max(worst_flag, std::abs(kt - 1.0));

    // corollary right side with a horizontal flagpole and horizontal flag
    double D = sj.total().Lval() * xr.dot(g * xr) -
               std::pow(vr.dot(g * xr), 2);
    double rhs = kb - 3.0 * an / D;
    worst_cons = std::max(worst_cons, std::abs(kt - rhs));

    // vertical flag at the same flagpole: direct vs the T/A formula
    Vec w(3);
    w << 0, 0, 1.0;
    double Dw = sj.total().Lval() * w.dot(g * w) - std::pow(vr.dot(g * w), 2);
    double kw =
        vr.dot(g * sj.total().curvature_value(vr, w, w)) / Dw;
    Vec Avw = sj.ta_value(TAKind::kA, vr, w);
    Vec Twv = sj.ta_value(TAKind::kT, w, vr);
    double kw_formula =
        (vr.dot(g * sj.nabla_ta_value(TAKind::kT, vr, w, w)) +
         Avw.dot(g * Avw) - Twv.dot(g * Twv)) /
        Dw;
    worst_vert = std::max(worst_vert, std::abs(kw - kw_formula));
  }
  if (worst_base > 1e-8 || worst_a > 1e-6 || worst_flag > 1e-6 ||
      worst_cons > 1e-6 || worst_vert > 1e-6)
    ok = false;
  double dt = seconds_since(t0);
  if (dt > 30.0) ok = false;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "classical fibration numbers: |Kbase-4| %.2e (<=1e-8), "
                "||A|^2-1| %.2e (<=1e-6), |K-1| %.2e (<=1e-6), formula match "
                "%.2e (<=1e-6), vertical-flag match %.2e (<=1e-6), %.1f s "
                "(<=30 s)",
                worst_base, worst_a, worst_flag, worst_cons, worst_vert, dt);
  report(2, ok, buf);
}

// criterion 3: the paired curvature identities on the generic fixture
void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  Fixture f = varying_randers();
  std::vector<std::string> ids{"fund-0",  "fund-1",  "fund-1p", "fund-2",
                               "fund-2p", "fund-3",  "fund-4",  "fund-0p",
                               "fund-4p", "unified"};
  SuiteOptions opts;
  opts.n_samples = 50;
  opts.seed = 314159;
  opts.jobs = 4;
  opts.identity_filter = ids;
  VerificationReport rep = run_suite(f, opts);
  bool ok = true;
  double worst = 0;
  for (const auto& st : rep.identities) {
    worst = std::max(worst, st.max);
    if (st.max > 1e-7 || st.count < 50) ok = false;
  }

  // difference-fallback spot check at reduced count
  SuiteOptions fopts = opts;
  fopts.n_samples = 3;
  fopts.profile = ToleranceProfile::fd();
  VerificationReport frep = run_suite(fixture_fd_variant(f), fopts);
  double fworst = 0;
  for (const auto& st : frep.identities) {
    fworst = std::max(fworst, st.max);
    if (st.max > 1e-4) ok = false;
  }
  double dt = seconds_since(t0);
  if (dt > 60.0) ok = false;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "paired curvature identities: exact-jet worst %.2e (<=1e-7) "
                "at 50 samples, difference-mode worst %.2e (<=1e-4), %.1f s "
                "(<=60 s)",
                worst, fworst, dt);
  report(3, ok, buf);
}

// criterion 4: structural identities on every fixture plus negative controls
void criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> ids{
      "lemma1-gv1",  "lemma1-gv2",    "lemma3-UTA",       "lemma3-YTA",
      "lemma3-lieconv", "lemma4-A-vert", "lemma4-A-hor",  "lemma4-T-vert",
      "lemma4-T-hor", "lemma5-vert",  "lemma5-hor",       "TA-skew",
      "T-sym-vert",  "A-antisym-hor", "A-bracket",        "A-xv-bracket",
      "A-almost-antisym", "dot-top",  "dot-bot",          "gauss-vert",
      "gauss-dual",  "gauss-dual-extended", "rtop-horizontal", "rbot-vertical",
      "rtop-rbot-def-consistency"};
  bool ok = true;
  std::string detail;
  for (const auto& name : fixture_names()) {
    SuiteOptions opts;
    opts.n_samples = 30;
    opts.seed = 555;
    opts.jobs = 4;
    opts.identity_filter = ids;
    VerificationReport rep = run_suite(fixture_by_name(name), opts);
    for (const auto& st : rep.identities) {
      if (!st.applicable || st.diagnostic) continue;
      if (!st.pass) {
        ok = false;
        detail += " " + std::string(name) + "/" + st.id;
      }
    }
  }

  // each documented corruption must be caught by a factor >= 10
  struct Control {
    Corruption corr;
    const char* fixture;
    const char* id;
  };
  Control controls[] = {
      {Corruption::kBaseRescale, "riemannian_product", "lemma1-gv1"},
      {Corruption::kFlipASign, "hopf", "lemma3-lieconv"},
      {Corruption::kDropQtildeTerm, "varying_randers", "gauss-dual"},
  };
  for (const auto& ctl : controls) {
    SuiteOptions opts;
    opts.n_samples = 10;
    opts.seed = 808;
    opts.jobs = 4;
    opts.corruption = ctl.corr;
    VerificationReport rep = run_suite(fixture_by_name(ctl.fixture), opts);
    const auto* st = find_stat(rep, ctl.id);
    if (!st || st->max <= 10.0 * st->tolerance) {
      ok = false;
      detail += std::string(" uncaught:") + corruption_name(ctl.corr);
    }
  }
  double dt = seconds_since(t0);
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "structural identities on all fixtures and three negative "
                "controls caught at 10x%s, %.1f s",
                detail.empty() ? "" : ("; failures:" + detail).c_str(), dt);
  report(4, ok, buf);
}

// criterion 5: geodesic lift equivalence over unit time
void criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_dev = 0, worst_pers = 0;
  struct Case {
    const char* fixture;
    double x0[3];
    double vt[2];
  };
  Case cases[] = {
      {"hopf", {1.2, 0.3, -0.4}, {0.5, 0.6}},
      {"varying_randers", {0.10, -0.05, 0.15}, {0.5, -0.3}},
  };
  for (const auto& cs : cases) {
    Fixture f = fixture_by_name(cs.fixture);
    Vec p0(3), vt(2);
    p0 << cs.x0[0], cs.x0[1], cs.x0[2];
    vt << cs.vt[0], cs.vt[1];
    IntegrateOptions opts;
    opts.abs_tol = opts.rel_tol = 1e-11;
    GeodesicArc base =
        integrate_geodesic(f.chart.base, f.chart.project(p0), vt, 0, 1, opts);
    base.require_complete();
    GeodesicArc lifted = lift_geodesic(f.chart, base, p0, opts);
    LiftResult l0 = horizontal_lift_vector(f.chart, p0, vt);
    GeodesicArc direct =
        integrate_geodesic(f.chart.total, p0, l0.v, 0, 1, opts);
    direct.require_complete();
    for (int k = 0; k <= 50; ++k) {
      double t = k / 50.0;
      worst_dev = std::max(worst_dev,
                           (lifted.x_at(t) - direct.x_at(t)).norm());
    }
    worst_pers =
        std::max(worst_pers, horizontality_persistence(f.chart, direct, 33));
  }
  if (worst_dev > 1e-6 || worst_pers > 1e-7) ok = false;
  double dt = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "geodesic lift equivalence: sup deviation %.2e (<=1e-6), "
                "horizontality persistence %.2e (<=1e-7), %.1f s",
                worst_dev, worst_pers, dt);
  report(5, ok, buf);
}

// criterion 6: holonomy isometry and the closed-form fiber rotation
void criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;

  SuiteOptions opts;
  opts.n_samples = 2;
  opts.seed = 99;
  opts.identity_filter = {"holonomy-isometry"};
  VerificationReport rep = run_suite(hopf(), opts);
  const auto* iso = find_stat(rep, "holonomy-isometry");
  double len_res = iso && iso->count > 0 ? iso->max : 1.0;
  if (!iso || iso->count == 0 || iso->max > 1e-6) ok = false;

  // fiber rotation against the closed-form area relation
  Fixture f = hopf();
  double theta0 = 1.05, psi0 = 0.2;
  Vec p0(3);
  p0 << theta0, 0.0, psi0;
  CurveFn curve = [theta0](double t) {
    Vec c(2);
    c << theta0, 2 * M_PI * t;
    return c;
  };
  CurveFn curve_dot = [](double) {
    Vec c(2);
    c << 0.0, 2 * M_PI;
    return c;
  };
  IntegrateOptions iopts;
  iopts.abs_tol = iopts.rel_tol = 1e-11;
  TransportResult tr =
      holonomy_transport(f.chart, curve, curve_dot, 0, 1, p0, iopts);
  double angle =
      std::fmod(0.5 * (tr.endpoint[2] - psi0) + M_PI + 4 * M_PI, 2 * M_PI);
  double angle_err = std::abs(angle - hopf_oracle::rotation_angle(theta0));
  if (angle_err > 1e-5) ok = false;

  // the warped fixture must skip the isometry check by flag
  VerificationReport wrep = run_suite(warped_product(), opts);
  const auto* wiso = find_stat(wrep, "holonomy-isometry");
  bool skipped = wiso && !wiso->applicable && wiso->count == 0;
  if (!skipped) ok = false;

  double dt = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "holonomy: transported length defect %.2e (<=1e-6), rotation "
                "vs area %.2e (<=1e-5), warped fixture correctly skipped: %s, "
                "%.1f s",
                len_res, angle_err, skipped ? "yes" : "no", dt);
  report(6, ok, buf);
}

// criterion 7: byte-identical reports for identical configurations
void criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  SuiteOptions opts;
  opts.n_samples = 10;
  opts.seed = 1234;
  VerificationReport r1 = run_suite(varying_randers(), opts);
  opts.jobs = 4;
  VerificationReport r2 = run_suite(varying_randers(), opts);
  bool ok = r1.to_json() == r2.to_json();
  double dt = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "deterministic reports: byte-identical %s, %.1f s",
                ok ? "yes" : "NO", dt);
  report(7, ok, buf);
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  double dt = seconds_since(t0);
  std::printf("acceptance total: %.1f s (budget 180 s)%s\n", dt,
              dt <= 180.0 ? "" : " OVER BUDGET");
  if (dt > 180.0) ++failures;
  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS"
                                    : "ACCEPTANCE FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}
