#include "fsub/submersion.hpp"

#include <cmath>

namespace finsub {

namespace {

// Shared double-level Newton solve for the horizontal lift:
//   J w = target,  g_w(w, u_a) = 0,
// where J is the (linear) projection and the columns of U span its kernel.
// The Jacobian rows of the orthogonality block are g_w(., u_a) because the
// fiber derivative of g contracted with w dies by homogeneity.
Vec lift_newton(const MetricField& total, const Mat& J, const Mat& U,
                const Vec& x, const Vec& target, Vec guess,
                const NewtonOptions& opts, int* iters_out = nullptr) {
  int n = total.dim;
  int mm = J.rows(), r = U.cols();
  if (!total.is_admissible(x, guess))
    throw NotAdmissible("horizontal lift: initial guess not admissible");
  Vec w = std::move(guess);
  for (int it = 0; it < opts.max_iter; ++it) {
    ChartJets cj(total, x, w, 2);
    Mat g = cj.g_mat();
    Vec F(n);
    F.head(mm) = J * w - target;
    for (int a = 0; a < r; ++a) F[mm + a] = w.dot(g * U.col(a));
    if (F.norm() <= std::max(opts.tolerance, 1e-11)) {
      if (iters_out) *iters_out = it;
      return w;
    }
    Mat JF(n, n);
    JF.topRows(mm) = J;
    for (int a = 0; a < r; ++a) JF.row(mm + a) = (g * U.col(a)).transpose();
    Vec step = JF.fullPivLu().solve(-F);
    Vec next = w + step;
    int halvings = 0;
    while (!total.is_admissible(x, next)) {
      if (++halvings > opts.max_halvings)
        throw LeftAdmissibleCone("horizontal lift: iterate left the cone");
      step *= 0.5;
      next = w + step;
    }
    w = next;
  }
  throw NoConvergence("horizontal lift: Newton did not converge");
}

Mat kernel_of(const Mat& J) {
  Eigen::FullPivLU<Mat> lu(J);
  if (lu.rank() < J.rows())
    throw RankDeficient("projection differential is rank deficient");
  return lu.kernel();
}

}  // namespace

SubJets::SubJets(const SubmersionChart& S, Vec x0, Vec v0, int order)
    : S_(&S), tot_(S.total, std::move(x0), std::move(v0), order) {}

const JetVec& SubJets::sigma_jets() {
  if (!sigma_) sigma_ = S_->sigma(tot_.seed_x());
  return *sigma_;
}

const std::vector<Jet>& SubJets::jacobian() {
  if (!jac_) {
    const JetVec& s = sigma_jets();
    std::vector<Jet> J;
    J.reserve(m() * n());
    for (int a = 0; a < m(); ++a)
      for (int i = 0; i < n(); ++i) J.push_back(derivative(s[a], i));
    jac_ = std::move(J);
  }
  return *jac_;
}

Mat SubJets::jacobian_value() {
  const auto& J = jacobian();
  Mat out(m(), n());
  for (int a = 0; a < m(); ++a)
    for (int i = 0; i < n(); ++i) out(a, i) = J[a * n() + i].value();
  return out;
}

const std::vector<JetVec>& SubJets::vertical_basis() {
  if (!u_) {
    try {
      u_ = kernel_basis(jacobian(), m(), n(), tot_.cjet(1.0), tot_.cjet(0.0));
    } catch (const SingularMatrix&) {
      throw RankDeficient("projection differential is rank deficient at site");
    }
  }
  return *u_;
}

Mat SubJets::vertical_basis_value() {
  const auto& u = vertical_basis();
  Mat out(n(), r());
  for (int a = 0; a < r(); ++a)
    for (int i = 0; i < n(); ++i) out(i, a) = u[a][i].value();
  return out;
}

void SubJets::build_frame() {
  if (onb_) return;
  const auto& u = vertical_basis();
  double scale = std::max(tot_.g_scale(), 1e-300);

  // Gram determinant of the raw basis, for degeneracy reporting.
  Mat gram(r(), r());
  for (int a = 0; a < r(); ++a)
    for (int b = 0; b < r(); ++b)
      gram(a, b) = tot_.g_apply(u[a], u[b]).value();
  gram_det_ = std::abs(gram.determinant());

  std::vector<JetVec> onb;
  std::vector<double> signs;
  for (int a = 0; a < r(); ++a) {
    JetVec q = u[a];
    for (int b = 0; b < a; ++b) {
      Jet coef = tot_.g_apply(q, onb[b]) * signs[b];
      for (int i = 0; i < n(); ++i) q[i] -= coef * onb[b][i];
    }
    Jet s = tot_.g_apply(q, q);
    double sval = s.value();
    if (std::abs(sval) < tol::kVerticalGram * scale)
      throw DegenerateVertical(
          "vertical space degenerate under g_v at the sampled direction");
    double sign = sval > 0 ? 1.0 : -1.0;
    Jet inv_norm = 1.0 / sqrt(sign * s);
    for (int i = 0; i < n(); ++i) q[i] = q[i] * inv_norm;
    onb.push_back(std::move(q));
    signs.push_back(sign);
  }
  onb_ = std::move(onb);
  signs_ = std::move(signs);
}

const std::vector<JetVec>& SubJets::vertical_onb() {
  build_frame();
  return *onb_;
}

const std::vector<double>& SubJets::vertical_signs() {
  build_frame();
  return signs_;
}

double SubJets::vertical_gram_det() {
  build_frame();
  return gram_det_;
}

const Jet& SubJets::proj_top(int i, int j) {
  if (!proj_top_) {
    build_frame();
    std::vector<Jet> P(n() * n(), tot_.cjet(0.0));
    for (int a = 0; a < r(); ++a) {
      const JetVec& e = (*onb_)[a];
      JetVec ge(n(), tot_.cjet(0.0));
      for (int jj = 0; jj < n(); ++jj) {
        Jet acc = tot_.cjet(0.0);
        for (int k = 0; k < n(); ++k) madd(acc, tot_.g(jj, k), e[k]);
        ge[jj] = signs_[a] * acc;
      }
      for (int ii = 0; ii < n(); ++ii)
        for (int jj = 0; jj < n(); ++jj)
          madd(P[ii * n() + jj], e[ii], ge[jj]);
    }
    proj_top_ = std::move(P);
  }
  return (*proj_top_)[i * n() + j];
}

JetVec SubJets::top(const JetVec& e) {
  JetVec out(n(), tot_.cjet(0.0));
  for (int i = 0; i < n(); ++i) {
    Jet acc = tot_.cjet(0.0);
    for (int j = 0; j < n(); ++j) madd(acc, proj_top(i, j), e[j]);
    out[i] = acc;
  }
  return out;
}

JetVec SubJets::bot(const JetVec& e) {
  JetVec t = top(e);
  JetVec out = e;
  for (int i = 0; i < n(); ++i) out[i] -= t[i];
  return out;
}

Vec SubJets::top_value(const Vec& e) { return values_of(top(tot_.cvec(e))); }
Vec SubJets::bot_value(const Vec& e) { return e - top_value(e); }

double SubJets::horizontality_residual() {
  build_frame();
  double worst = 0.0;
  JetVec vj = tot_.cvec(v0());
  for (int a = 0; a < r(); ++a)
    worst = std::max(worst, std::abs(tot_.g_apply(vj, (*onb_)[a]).value()));
  return worst / (1.0 + std::sqrt(std::abs(tot_.Lval())));
}

double SubJets::verticality_residual() {
  Vec s = jacobian_value() * v0();
  return s.norm() / (1.0 + v0().norm());
}

const Jet& SubJets::chi_comp(int i, int j, int k) {
  build_chi();
  return (*chi_)[(i * n() + j) * n() + k];
}

void SubJets::build_chi() {
  if (chi_) return;
  proj_top(0, 0);
  int nn = n();
  // fields F_top_k = projector column k, F_bot_k = complement
  std::vector<JetVec> ftop(nn), fbot(nn);
  for (int k = 0; k < nn; ++k) {
    JetVec t(nn, tot_.cjet(0.0)), b(nn, tot_.cjet(0.0));
    for (int i = 0; i < nn; ++i) {
      t[i] = proj_top(i, k);
      b[i] = (i == k ? tot_.cjet(1.0) : tot_.cjet(0.0)) - t[i];
    }
    ftop[k] = std::move(t);
    fbot[k] = std::move(b);
  }
  std::vector<Jet> chi(nn * nn * nn, tot_.cjet(0.0));
  for (int j = 0; j < nn; ++j) {
    Vec dir = Vec::Unit(nn, j);
    for (int k = 0; k < nn; ++k) {
      JetVec nb = tot_.nabla_aniso(dir, fbot[k]);
      JetVec nt = tot_.nabla_aniso(dir, ftop[k]);
      JetVec tn = top(nb);
      JetVec bn = nt;
      JetVec tnt = top(nt);
      for (int i = 0; i < nn; ++i)
        chi[(i * nn + j) * nn + k] = tn[i] + (bn[i] - tnt[i]);
    }
  }
  chi_ = std::move(chi);
}

JetVec SubJets::chi(const JetVec& b, const JetVec& e) {
  build_chi();
  int nn = n();
  JetVec out(nn, tot_.cjet(0.0));
  for (int i = 0; i < nn; ++i) {
    Jet acc = tot_.cjet(0.0);
    for (int j = 0; j < nn; ++j)
      for (int k = 0; k < nn; ++k)
        madd(acc, (*chi_)[(i * nn + j) * nn + k], b[j] * e[k]);
    out[i] = acc;
  }
  return out;
}

JetVec SubJets::ta_apply(TAKind kind, const JetVec& b, const JetVec& e) {
  switch (kind) {
    case TAKind::kT:
      return chi(top(b), e);
    case TAKind::kA:
      return chi(bot(b), e);
    default:
      return chi(b, e);
  }
}

Vec SubJets::ta_value(TAKind kind, const Vec& b, const Vec& e) {
  return values_of(ta_apply(kind, tot_.cvec(b), tot_.cvec(e)));
}

JetVec SubJets::qhat(const JetVec& b, const JetVec& e) {
  const JetVec& vj = tot_.seed_v();
  JetVec u = top(b), w = top(e);
  JetVec cuw = tot_.csharp(u, w);
  JetVec tvv = ta_apply(TAKind::kT, vj, vj);
  JetVec t1 = ta_apply(TAKind::kT, vj, cuw);
  JetVec t2 = tot_.csharp(ta_apply(TAKind::kT, vj, u), w);
  JetVec t3 = tot_.csharp(u, ta_apply(TAKind::kT, vj, w));
  JetVec t4 = tot_.csharp(top(cuw), tvv);
  JetVec t5 = tot_.csharp(top(tot_.csharp(u, tvv)), w);
  JetVec t6 = tot_.csharp(u, top(tot_.csharp(w, tvv)));
  JetVec sum = t1 + t2 + t3 + t4 - t5 - t6;
  return -top(sum);
}

JetVec SubJets::qtilde(const JetVec& b, const JetVec& e) {
  const JetVec& vj = tot_.seed_v();
  JetVec x = bot(b), y = bot(e);
  JetVec cxy = tot_.csharp(x, y);
  JetVec t1 = ta_apply(TAKind::kA, vj, cxy);
  JetVec t2 = tot_.csharp(ta_apply(TAKind::kA, vj, x), y);
  JetVec t3 = tot_.csharp(x, ta_apply(TAKind::kA, vj, y));
  return bot(t1 + t2 + t3);
}

Vec SubJets::nabla_ta_value(TAKind kind, const Vec& e, const Vec& h,
                            const Vec& b) {
  // vector-valued tensor: the leading term is the covariant derivative of
  // the anisotropic field, not just its derivation
  JetVec F = ta_apply(kind, tot_.cvec(h), tot_.cvec(b));
  Vec out = values_of(tot_.nabla_aniso(e, F));
  Vec geh = values_of(tot_.gamma_apply(tot_.cvec(e), tot_.cvec(h)));
  Vec geb = values_of(tot_.gamma_apply(tot_.cvec(e), tot_.cvec(b)));
  out -= ta_value(kind, geh, b);
  out -= ta_value(kind, h, geb);
  return out;
}

Vec SubJets::nabla_qtilde_value(const Vec& e, const Vec& h, const Vec& b) {
  JetVec F = qtilde(tot_.cvec(h), tot_.cvec(b));
  Vec out = values_of(tot_.nabla_aniso(e, F));
  Vec geh = values_of(tot_.gamma_apply(tot_.cvec(e), tot_.cvec(h)));
  Vec geb = values_of(tot_.gamma_apply(tot_.cvec(e), tot_.cvec(b)));
  out -= values_of(qtilde(tot_.cvec(geh), tot_.cvec(b)));
  out -= values_of(qtilde(tot_.cvec(h), tot_.cvec(geb)));
  return out;
}

Vec SubJets::dot_qtilde_value(const Vec& h, const Vec& b, const Vec& dir) {
  JetVec F = qtilde(tot_.cvec(h), tot_.cvec(b));
  Vec out(n());
  for (int i = 0; i < n(); ++i) out[i] = tot_.dv(F[i], dir).value();
  return out;
}

Vec SubJets::r_top(const Vec& b, const Vec& e, const Vec& w) {
  build_frame();
  // vertical extension of w through the jet-valued kernel basis
  Mat U = vertical_basis_value();
  Vec c = U.colPivHouseholderQr().solve(w);
  if ((U * c - w).norm() > 1e-8 * (1.0 + w.norm()))
    throw DegenerateVertical("r_top: third argument is not vertical");
  JetVec W(n(), tot_.cjet(0.0));
  for (int a = 0; a < r(); ++a)
    for (int i = 0; i < n(); ++i) W[i] += c[a] * (*u_)[a][i];

  auto field_for = [&](const Vec& dir) {
    // (nabla_dir W)^top with the direction slot frozen at v0
    JetVec nv(n(), tot_.cjet(0.0));
    for (int i = 0; i < n(); ++i) nv[i] = tot_.dx(W[i], dir);
    nv = nv + tot_.gamma_apply(tot_.cvec(dir), W);
    JetVec pr = top(nv);
    for (int i = 0; i < n(); ++i) pr[i] = pr[i].frozen(n(), 2 * n());
    return pr;
  };
  JetVec FE = field_for(e), FB = field_for(b);
  JetVec diff = tot_.nabla_aniso(b, FE) - tot_.nabla_aniso(e, FB);
  Vec out = top_value(values_of(diff));

  Vec Nb = values_of(tot_.nonlinear_apply(tot_.cvec(b)));
  Vec Ne = values_of(tot_.nonlinear_apply(tot_.cvec(e)));
  // horizontal part of nabla_e W is the full configuration image of w; the
  // T-part alone only covers vertical differentiation directions
  Vec tew = ta_value(TAKind::kSum, e, w);
  Vec tbw = ta_value(TAKind::kSum, b, w);
  out -= 2.0 * top_value(values_of(tot_.csharp(tot_.cvec(tew), tot_.cvec(Nb))));
  out += 2.0 * top_value(values_of(tot_.csharp(tot_.cvec(tbw), tot_.cvec(Ne))));
  out -= top_value(
      values_of(tot_.p_apply(tot_.cvec(e), tot_.cvec(w), tot_.cvec(Nb))));
  out += top_value(
      values_of(tot_.p_apply(tot_.cvec(b), tot_.cvec(w), tot_.cvec(Ne))));
  return out;
}

Vec SubJets::r_bot(const Vec& b, const Vec& e, const Vec& h) {
  JetVec hb = bot(tot_.cvec(h));
  JetVec hbf = hb;
  for (int i = 0; i < n(); ++i) hbf[i] = hbf[i].frozen(n(), 2 * n());

  auto field_for = [&](const Vec& dir) {
    JetVec nv(n(), tot_.cjet(0.0));
    for (int i = 0; i < n(); ++i) nv[i] = tot_.dx(hbf[i], dir);
    nv = nv + tot_.gamma_apply(tot_.cvec(dir), hbf);
    JetVec pr = bot(nv);
    for (int i = 0; i < n(); ++i) pr[i] = pr[i].frozen(n(), 2 * n());
    return pr;
  };
  JetVec GE = field_for(e), GB = field_for(b);
  JetVec diff = tot_.nabla_aniso(b, GE) - tot_.nabla_aniso(e, GB);
  Vec out = bot_value(values_of(diff));

  Vec Nb = values_of(tot_.nonlinear_apply(tot_.cvec(b)));
  Vec Ne = values_of(tot_.nonlinear_apply(tot_.cvec(e)));
  Vec hbv = values_of(hb);
  out -= bot_value(
      values_of(tot_.p_apply(tot_.cvec(e), tot_.cvec(hbv), tot_.cvec(Nb))));
  out += bot_value(
      values_of(tot_.p_apply(tot_.cvec(b), tot_.cvec(hbv), tot_.cvec(Ne))));
  Vec c1 = top_value(values_of(tot_.csharp(tot_.cvec(hbv), tot_.cvec(Nb))));
  Vec c2 = top_value(values_of(tot_.csharp(tot_.cvec(hbv), tot_.cvec(Ne))));
  out += 2.0 * ta_value(TAKind::kSum, e, c1);
  out -= 2.0 * ta_value(TAKind::kSum, b, c2);
  return out;
}

Vec SubJets::r_top_def(const Vec& b, const Vec& e, const Vec& h) {
  JetVec ht = top(tot_.cvec(h));
  JetVec GE = top(tot_.nabla_aniso(e, ht));
  JetVec GB = top(tot_.nabla_aniso(b, ht));
  JetVec diff = tot_.nabla_aniso(b, GE) - tot_.nabla_aniso(e, GB);
  return top_value(values_of(diff));
}

Vec SubJets::r_bot_def(const Vec& b, const Vec& e, const Vec& h) {
  JetVec hb = bot(tot_.cvec(h));
  JetVec GE = bot(tot_.nabla_aniso(e, hb));
  JetVec GB = bot(tot_.nabla_aniso(b, hb));
  JetVec diff = tot_.nabla_aniso(b, GE) - tot_.nabla_aniso(e, GB);
  return bot_value(values_of(diff));
}

ChartJets& SubJets::base() {
  if (!base_) {
    Vec xb = S_->project(x0());
    Vec vb = S_->push(v0());
    base_.emplace(S_->base, xb, vb, std::min(tot_.order(), 4));
  }
  return *base_;
}

JetVec SubJets::base_lift(const JetVec& btilde) {
  build_frame();
  int nn = n();
  std::vector<Jet> A(nn * nn, tot_.cjet(0.0));
  const auto& J = jacobian();
  for (int a = 0; a < m(); ++a)
    for (int i = 0; i < nn; ++i) A[a * nn + i] = J[a * nn + i];
  for (int a = 0; a < r(); ++a)
    for (int i = 0; i < nn; ++i) {
      Jet acc = tot_.cjet(0.0);
      for (int k = 0; k < nn; ++k) madd(acc, tot_.g(i, k), (*u_)[a][k]);
      A[(m() + a) * nn + i] = acc;
    }
  std::vector<Jet> rhs(nn, tot_.cjet(0.0));
  for (int a = 0; a < m(); ++a) rhs[a] = btilde[a];
  try {
    gauss_solve(A, rhs, nn, 1);
  } catch (const SingularMatrix&) {
    throw DegenerateVertical("horizontal lift system is singular");
  }
  return rhs;
}

Vec SubJets::base_lift_value(const Vec& btilde) {
  return values_of(base_lift(constant_jets(btilde, 2 * n(), tot_.order())));
}

ChartJets& SubJets::fiber() {
  if (!fiber_) {
    fiber_frame();
    Vec vhat = to_fiber(v0());
    fiber_metric_ = fiber_metric(*S_, x0(), nullptr);
    fiber_.emplace(*fiber_metric_, Vec::Zero(r()), vhat,
                   std::min(tot_.order(), 5));
  }
  return *fiber_;
}

const Mat& SubJets::fiber_frame() {
  if (!fiber_frame_) fiber_frame_ = vertical_basis_value();
  return *fiber_frame_;
}

Vec SubJets::to_fiber(const Vec& vertical_vec) {
  const Mat& U = fiber_frame();
  Vec vh = U.colPivHouseholderQr().solve(vertical_vec);
  if ((U * vh - vertical_vec).norm() > 1e-8 * (1.0 + vertical_vec.norm()))
    throw DegenerateVertical("to_fiber: vector is not vertical");
  return vh;
}

Vec SubJets::from_fiber(const Vec& fiber_vec) {
  return fiber_frame() * fiber_vec;
}

Jet SubJets::fiber_dir_derivative(const Jet& f, const Vec& u_total) {
  Vec uh = to_fiber(u_total);
  ChartJets& fj = fiber();
  Vec nshift(r());
  for (int i = 0; i < r(); ++i) {
    nshift[i] = 0.0;
    for (int j = 0; j < r(); ++j)
      nshift[i] += fj.nonlinear(i, j).value() * uh[j];
  }
  Vec eta = from_fiber(nshift);
  return tot_.dx(f, u_total) - tot_.dv(f, eta);
}

Vec SubJets::fiber_gamma_value(const Vec& u_total, const Vec& w_total) {
  Vec uh = to_fiber(u_total), wh = to_fiber(w_total);
  ChartJets& fj = fiber();
  Vec out(r());
  for (int i = 0; i < r(); ++i) {
    out[i] = 0.0;
    for (int j = 0; j < r(); ++j)
      for (int k = 0; k < r(); ++k)
        out[i] += fj.gamma(i, j, k).value() * uh[j] * wh[k];
  }
  return from_fiber(out);
}

JetVec SubJets::newton_lift_field(const Vec& base_target) {
  return newton_lift_field(tot_.cvec(base_target), 1);
}

JetVec SubJets::newton_lift_field(const JetVec& base_target, int field_order) {
  if (!S_->sigma_linear)
    throw std::logic_error("newton_lift_field requires a linear projection");
  build_frame();
  int nn = n();
  int base_vars = 2 * nn;
  int aug_order = field_order + 2;
  int aug_vars = base_vars + nn;
  const Mat& J = S_->sigma_lin;

  // order-0 solve
  Mat U0 = vertical_basis_value();
  Vec target0 = values_of(base_target);
  Vec guess = J.colPivHouseholderQr().solve(target0);
  if (!S_->total.is_admissible(x0(), guess)) guess = v0();
  Vec w0 = lift_newton(S_->total, J, U0, x0(), target0, guess, {});

  // embed chart seeds and iterate on jets
  JetVec xU;
  for (int i = 0; i < nn; ++i)
    xU.push_back(tot_.seed_x()[i].promoted(nn, aug_order));
  JetVec tgt;
  for (int a = 0; a < m(); ++a)
    tgt.push_back(base_target[a].truncated(
        std::min(field_order, base_target[a].order())));

  JetVec w = constant_jets(w0, base_vars, field_order);
  std::vector<int> alpha1(nn, 0), alpha2(nn, 0);
  for (int it = 0; it < 6; ++it) {
    JetVec wU;
    for (int i = 0; i < nn; ++i)
      wU.push_back(w[i].promoted(nn, aug_order) +
                   Jet::variable(aug_vars, aug_order, base_vars + i, 0.0));
    Jet LU = S_->total.eval(xU, wU);
    // dL/dv_j and the v-Hessian, restricted back to the chart context
    JetVec dL(nn, Jet(0.0));
    for (int j = 0; j < nn; ++j) {
      std::fill(alpha1.begin(), alpha1.end(), 0);
      alpha1[j] = 1;
      dL[j] = LU.subjet(base_vars, alpha1, field_order + 1);
    }
    std::vector<Jet> F(nn, Jet(0.0));
    for (int a = 0; a < m(); ++a) {
      Jet acc = Jet::constant(base_vars, field_order, 0.0);
      for (int i = 0; i < nn; ++i) acc += J(a, i) * w[i];
      F[a] = acc - tgt[a];
    }
    for (int a = 0; a < r(); ++a) {
      Jet acc = Jet::constant(base_vars, field_order, 0.0);
      for (int j = 0; j < nn; ++j)
        acc += 0.5 * (*u_)[a][j].truncated(field_order) * dL[j];
      F[m() + a] = acc;
    }
    double fmax = 0.0;
    for (const Jet& f : F)
      for (double cc : f.coeffs()) fmax = std::max(fmax, std::abs(cc));

    std::vector<Jet> JF(nn * nn, Jet::constant(base_vars, field_order, 0.0));
    for (int a = 0; a < m(); ++a)
      for (int i = 0; i < nn; ++i)
        JF[a * nn + i] = Jet::constant(base_vars, field_order, J(a, i));
    for (int a = 0; a < r(); ++a)
      for (int k = 0; k < nn; ++k) {
        Jet acc = Jet::constant(base_vars, field_order, 0.0);
        for (int j = 0; j < nn; ++j) {
          std::fill(alpha2.begin(), alpha2.end(), 0);
          alpha2[j] += 1;
          alpha2[k] += 1;
          Jet g2 = 0.5 * LU.subjet(base_vars, alpha2, field_order);
          acc += (*u_)[a][j].truncated(field_order) * g2;
        }
        JF[(m() + a) * nn + k] = acc;
      }
    gauss_solve(JF, F, nn, 1);
    for (int i = 0; i < nn; ++i) w[i] -= F[i];
    if (fmax < 1e-13) break;
  }
  return w;
}

JetVec SubJets::gv_lift_field(const Vec& base_target, const JetVec& Vfield) {
  if (!S_->sigma_linear)
    throw std::logic_error("gv_lift_field requires a linear projection");
  build_frame();
  int nn = n();
  int base_vars = 2 * nn;
  int field_order = 1;
  int aug_order = field_order + 2;
  int aug_vars = base_vars + nn;
  const Mat& J = S_->sigma_lin;

  JetVec xU;
  for (int i = 0; i < nn; ++i)
    xU.push_back(tot_.seed_x()[i].promoted(nn, aug_order));
  JetVec VU;
  for (int i = 0; i < nn; ++i)
    VU.push_back(Vfield[i].promoted(nn, aug_order) +
                 Jet::variable(aug_vars, aug_order, base_vars + i, 0.0));
  Jet LU = S_->total.eval(xU, VU);

  std::vector<int> alpha(nn, 0);
  std::vector<Jet> A(nn * nn, Jet::constant(base_vars, field_order, 0.0));
  for (int a = 0; a < m(); ++a)
    for (int i = 0; i < nn; ++i)
      A[a * nn + i] = Jet::constant(base_vars, field_order, J(a, i));
  for (int a = 0; a < r(); ++a)
    for (int k = 0; k < nn; ++k) {
      Jet acc = Jet::constant(base_vars, field_order, 0.0);
      for (int j = 0; j < nn; ++j) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[j] += 1;
        alpha[k] += 1;
        Jet g2 = 0.5 * LU.subjet(base_vars, alpha, field_order);
        acc += (*u_)[a][j].truncated(field_order) * g2;
      }
      A[(m() + a) * nn + k] = acc;
    }
  std::vector<Jet> rhs(nn, Jet::constant(base_vars, field_order, 0.0));
  for (int a = 0; a < m(); ++a)
    rhs[a] = Jet::constant(base_vars, field_order, base_target[a]);
  try {
    gauss_solve(A, rhs, nn, 1);
  } catch (const SingularMatrix&) {
    throw DegenerateVertical("g_V-horizontal lift system is singular");
  }
  return rhs;
}

// ---- public operations ----

Mat vertical_basis(const SubmersionChart& S, const Vec& p) {
  // kernel of the differential; no metric data involved
  int n = S.total_dim(), m = S.base_dim();
  JetVec xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(n, 1, i, p[i]));
  JetVec s = S.sigma(xs);
  std::vector<Jet> J;
  J.reserve(m * n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) J.push_back(derivative(s[a], i));
  std::vector<std::vector<Jet>> ker;
  try {
    ker = kernel_basis(J, m, n, Jet(1.0), Jet(0.0));
  } catch (const SingularMatrix&) {
    throw RankDeficient("projection differential is rank deficient");
  }
  Mat out(n, n - m);
  for (int a = 0; a < n - m; ++a)
    for (int i = 0; i < n; ++i) out(i, a) = ker[a][i].value();
  return out;
}

Splitting split(const SubmersionChart& S, const PointDirection& s,
                const Vec& e) {
  SubJets sj(S, s.x, s.v, 2);
  Splitting out;
  out.top = sj.top_value(e);
  out.bot = e - out.top;
  const auto& onb = sj.vertical_onb();
  out.frame.resize(S.total_dim(), S.fiber_dim());
  for (int a = 0; a < S.fiber_dim(); ++a)
    for (int i = 0; i < S.total_dim(); ++i)
      out.frame(i, a) = onb[a][i].value();
  out.signs = sj.vertical_signs();
  return out;
}

HorizontalityCheck is_horizontal(const SubmersionChart& S,
                                 const PointDirection& s, double tolerance) {
  SubJets sj(S, s.x, s.v, 2);
  double res = sj.horizontality_residual();
  return {res <= tolerance, res};
}

LiftResult horizontal_lift_vector(const SubmersionChart& S, const Vec& p,
                                  const Vec& vtilde, std::optional<Vec> guess,
                                  const NewtonOptions& opts) {
  Mat J = S.sigma_lin;
  Mat U = kernel_of(J);
  Vec g0 = guess.value_or(Vec(J.colPivHouseholderQr().solve(vtilde)));
  if (!S.total.is_admissible(p, g0))
    g0 = J.colPivHouseholderQr().solve(vtilde);
  LiftResult out;
  int iters = 0;
  out.v = lift_newton(S.total, J, U, p, vtilde, g0, opts, &iters);
  out.iterations = iters;
  if (!guess) {
    // probe local uniqueness from a displaced seed
    Vec g1 = g0 + 0.35 * g0.norm() * Vec::Ones(g0.size()).normalized();
    try {
      Vec w1 = lift_newton(S.total, J, U, p, vtilde, g1, opts);
      if ((w1 - out.v).norm() > 1e-6 * (1.0 + out.v.norm()))
        out.unique_warning = true;
    } catch (const std::runtime_error&) {
      // secondary seed failing to converge is not a uniqueness violation
    }
  }
  return out;
}

MetricField induce_base_metric(const MetricField& total, const Mat& sigma_lin,
                               const Vec& section_point, Box base_box,
                               std::string label) {
  int n = total.dim;
  int m = static_cast<int>(sigma_lin.rows());
  Mat U = kernel_of(sigma_lin);
  Mat P = sigma_lin.completeOrthogonalDecomposition().pseudoInverse();
  Vec sec = section_point;
  Vec sec_base = sigma_lin * sec;

  MetricField out;
  out.dim = m;
  out.label = std::move(label);
  out.chart_domain = std::move(base_box);

  auto lift_jets = [total, sigma_lin, U, P, sec, sec_base, n,
                    m](const JetVec& xt, const JetVec& vt) -> std::pair<JetVec, JetVec> {
    int base_vars = xt[0].nvars();
    int order = xt[0].order();
    for (const Jet& j : vt) order = std::max(order, j.order());
    // section through the anchor fiber point
    JetVec x;
    for (int i = 0; i < n; ++i) {
      Jet acc = Jet::constant(base_vars, order, sec[i]);
      for (int a = 0; a < m; ++a) acc += P(i, a) * (xt[a] - sec_base[a]);
      x.push_back(acc);
    }
    // order-0 lift
    Vec x0(n), t0(m);
    for (int i = 0; i < n; ++i) x0[i] = x[i].value();
    for (int a = 0; a < m; ++a) t0[a] = vt[a].value();
    Vec guess = P * t0;
    Vec w0 = lift_newton(total, sigma_lin, U, x0, t0, guess, {});

    int aug_order = order + 2;
    int aug_vars = base_vars + n;
    JetVec xU;
    for (int i = 0; i < n; ++i) xU.push_back(x[i].promoted(n, aug_order));
    JetVec w = constant_jets(w0, base_vars, order);
    std::vector<int> alpha(n, 0);
    for (int it = 0; it < 7; ++it) {
      JetVec wU;
      for (int i = 0; i < n; ++i)
        wU.push_back(w[i].promoted(n, aug_order) +
                     Jet::variable(aug_vars, aug_order, base_vars + i, 0.0));
      Jet LU = total.eval(xU, wU);
      JetVec dL(n, Jet(0.0));
      for (int j = 0; j < n; ++j) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[j] = 1;
        dL[j] = LU.subjet(base_vars, alpha, order + 1);
      }
      std::vector<Jet> F(n, Jet::constant(base_vars, order, 0.0));
      for (int a = 0; a < m; ++a) {
        Jet acc = Jet::constant(base_vars, order, 0.0);
        for (int i = 0; i < n; ++i) acc += sigma_lin(a, i) * w[i];
        F[a] = acc - vt[a];
      }
      for (int a = 0; a < n - m; ++a) {
        Jet acc = Jet::constant(base_vars, order, 0.0);
        for (int j = 0; j < n; ++j) acc += 0.5 * U(j, a) * dL[j];
        F[m + a] = acc;
      }
      double fmax = 0.0;
      for (const Jet& f : F)
        for (double cc : f.coeffs()) fmax = std::max(fmax, std::abs(cc));
      std::vector<Jet> JF(n * n, Jet::constant(base_vars, order, 0.0));
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < n; ++i)
          JF[a * n + i] = Jet::constant(base_vars, order, sigma_lin(a, i));
      for (int a = 0; a < n - m; ++a)
        for (int k = 0; k < n; ++k) {
          Jet acc = Jet::constant(base_vars, order, 0.0);
          for (int j = 0; j < n; ++j) {
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[j] += 1;
            alpha[k] += 1;
            acc += U(j, a) * 0.5 * LU.subjet(base_vars, alpha, order);
          }
          JF[(m + a) * n + k] = acc;
        }
      gauss_solve(JF, F, n, 1);
      for (int i = 0; i < n; ++i) w[i] -= F[i];
      if (fmax < 1e-13) break;
    }
    return {x, w};
  };

  out.eval = [lift_jets, total](const JetVec& xt, const JetVec& vt) -> Jet {
    auto [x, w] = lift_jets(xt, vt);
    return total.eval(x, w);
  };
  out.admissible = [total, sigma_lin, U, P, sec, sec_base, n, m](
                       const Vec& xt, const Vec& vt) -> bool {
    Vec x = sec + P * (xt - sec_base);
    try {
      Vec guess = P * vt;
      Vec w = lift_newton(total, sigma_lin, U, x, vt, guess, {});
      return total.is_admissible(x, w);
    } catch (const std::runtime_error&) {
      return false;
    }
  };
  return out;
}

Vec oneill_T(const SubmersionChart& S, const PointDirection& s, const Vec& b,
             const Vec& e) {
  SubJets sj(S, s.x, s.v);
  return sj.ta_value(TAKind::kT, b, e);
}

Vec oneill_A(const SubmersionChart& S, const PointDirection& s, const Vec& b,
             const Vec& e) {
  SubJets sj(S, s.x, s.v);
  return sj.ta_value(TAKind::kA, b, e);
}

Vec q_hat(const SubmersionChart& S, const PointDirection& s, const Vec& u,
          const Vec& w) {
  SubJets sj(S, s.x, s.v);
  return values_of(sj.qhat(sj.total().cvec(u), sj.total().cvec(w)));
}

Vec q_tilde(const SubmersionChart& S, const PointDirection& s, const Vec& x,
            const Vec& y) {
  SubJets sj(S, s.x, s.v);
  return values_of(sj.qtilde(sj.total().cvec(x), sj.total().cvec(y)));
}

MetricField fiber_metric(const SubmersionChart& S, const Vec& p,
                         Mat* frame_out) {
  if (!S.sigma_linear)
    throw std::logic_error("fiber_metric requires a linear projection");
  Mat U = kernel_of(S.sigma_lin);
  if (frame_out) *frame_out = U;
  int n = S.total_dim(), r = S.fiber_dim();
  MetricField total = S.total;
  Vec p0 = p;
  MetricField out;
  out.dim = r;
  out.label = S.total.label + "#fiber";
  out.chart_domain = Box::cube(r, -0.5, 0.5);
  out.eval = [total, U, p0, n, r](const JetVec& xh, const JetVec& vh) -> Jet {
    int nv = xh[0].nvars();
    int ord = xh[0].order();
    for (const Jet& j : vh) ord = std::max(ord, j.order());
    JetVec x, v;
    for (int i = 0; i < n; ++i) {
      Jet ax = Jet::constant(nv, ord, p0[i]);
      Jet av = Jet::constant(nv, ord, 0.0);
      for (int a = 0; a < r; ++a) {
        ax += U(i, a) * xh[a];
        av += U(i, a) * vh[a];
      }
      x.push_back(ax);
      v.push_back(av);
    }
    return total.eval(x, v);
  };
  out.admissible = [total, U, p0](const Vec& xh, const Vec& vh) -> bool {
    return total.is_admissible(p0 + U * xh, U * vh);
  };
  return out;
}

Vec second_fundamental_form_H(const SubmersionChart& S, const PointDirection& s,
                              const Vec& x, const Vec& y, double step) {
  SubJets sj(S, s.x, s.v, 2);
  Mat U = sj.vertical_basis_value();
  int r = S.fiber_dim();

  // Newton projection of v + t x onto the horizontal set at the fixed point,
  // moving vertically only; the Jacobian is the vertical Gram matrix.
  auto project = [&](double t) -> Vec {
    Vec w = s.v + t * x;
    for (int it = 0; it < 40; ++it) {
      ChartJets cj(S.total, s.x, w, 2);
      Mat g = cj.g_mat();
      Vec F(r);
      for (int a = 0; a < r; ++a) F[a] = w.dot(g * U.col(a));
      if (F.norm() < 1e-13 * (1.0 + w.norm())) return w;
      Mat gram(r, r);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) gram(a, b) = U.col(b).dot(g * U.col(a));
      Vec c = gram.fullPivLu().solve(-F);
      w += U * c;
    }
    throw NoConvergence("projection onto the horizontal set did not converge");
  };

  auto carried = [&](double t) -> Vec {
    Vec vt = project(t);
    ChartJets cj(S.total, s.x, vt, 2);
    Mat g = cj.g_mat();
    Mat gram(r, r);
    Vec rhs(r);
    for (int a = 0; a < r; ++a) {
      for (int b = 0; b < r; ++b) gram(a, b) = U.col(b).dot(g * U.col(a));
      rhs[a] = -y.dot(g * U.col(a));
    }
    Vec d = gram.fullPivLu().solve(rhs);
    return y + U * d;  // the g_{v(t)}-horizontal part of y along the curve
  };

  Vec dY = (carried(step) - carried(-step)) / (2.0 * step);
  return sj.top_value(dY);
}

double totally_geodesic_residual(const SubmersionChart& S,
                                 const PointDirection& s) {
  SubJets sj(S, s.x, s.v, 4);
  if (sj.verticality_residual() > 1e-9)
    throw DegenerateVertical("totally_geodesic_residual expects a vertical direction");
  return sj.ta_value(TAKind::kT, s.v, s.v).norm();
}

double horizontal_regularity_residual(const SubmersionChart& S,
                                      const PointDirection& s,
                                      const Vec& base_target) {
  SubJets sj(S, s.x, s.v);
  JetVec X = sj.newton_lift_field(base_target);
  // projectability sanity: the projection of the lift field is constant
  Vec proj = S.sigma_lin * values_of(X);
  if ((proj - base_target).norm() > 1e-7 * (1.0 + base_target.norm()))
    throw NoConvergence("lift field does not project onto its target");
  JetVec Xtop = sj.top(X);
  Vec res = sj.top_value(values_of(sj.total().nabla_aniso(s.v, Xtop)));
  return res.norm() / (1.0 + values_of(X).norm());
}

TransportResult holonomy_transport(const SubmersionChart& S,
                                   const CurveFn& curve,
                                   const CurveFn& curve_dot, double t0,
                                   double t1, const Vec& p0,
                                   const IntegrateOptions& opts) {
  int n = S.total_dim();
  if ((S.project(p0) - curve(t0)).norm() > 1e-8)
    throw NoConvergence("holonomy_transport: p0 is not over the curve start");
  Vec warm;
  bool have_warm = false;
  OdeRhs rhs = [&](double t, const Vec& w) {
    std::optional<Vec> guess;
    if (have_warm) guess = warm;
    LiftResult lift = horizontal_lift_vector(S, w, curve_dot(t), guess);
    warm = lift.v;
    have_warm = true;
    return lift.v;
  };
  OdeGuard guard = [&](double, const Vec& w) -> std::optional<std::string> {
    if (!S.total.chart_domain.contains(w)) return "left_chart_domain";
    return std::nullopt;
  };
  OdeSolution sol = rk45(rhs, p0, t0, t1, opts, guard);
  if (!sol.complete) {
    if (sol.stop_reason == "left_chart_domain")
      throw LeftChartDomain("holonomy transport left the chart domain");
    throw NoConvergence("holonomy transport stopped: " + sol.stop_reason);
  }
  TransportResult out;
  out.endpoint = sol.states.back();
  for (size_t k = 0; k < sol.times.size(); ++k) {
    double drift = (S.project(sol.states[k]) - curve(sol.times[k])).norm();
    out.projection_drift = std::max(out.projection_drift, drift);
  }
  out.path = std::move(sol);
  return out;
}

}  // namespace finsub
