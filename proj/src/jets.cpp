#include "fsub/jets.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace finsub {

namespace {

// 4 bits per exponent: up to 16 variables of degree <= 15
uint64_t pack_alpha(std::span<const int> alpha) {
  uint64_t key = 0;
  for (size_t i = 0; i < alpha.size(); ++i)
    key |= static_cast<uint64_t>(alpha[i] & 0xf) << (4 * i);
  return key;
}

uint64_t pack_alpha8(std::span<const uint8_t> alpha) {
  uint64_t key = 0;
  for (size_t i = 0; i < alpha.size(); ++i)
    key |= static_cast<uint64_t>(alpha[i] & 0xf) << (4 * i);
  return key;
}

// Enumerates monomials of ℕ^nvars graded by total degree, lex within a layer.
void enumerate(int nvars, int order, std::vector<uint8_t>& out,
               std::vector<int>& degree_start) {
  degree_start.assign(order + 2, 0);
  std::vector<uint8_t> alpha(nvars, 0);
  for (int deg = 0; deg <= order; ++deg) {
    degree_start[deg] = static_cast<int>(out.size()) / std::max(nvars, 1);
    // all alpha with |alpha| == deg, lexicographic
    std::function<void(int, int)> rec = [&](int var, int rem) {
      if (var == nvars - 1 || nvars == 0) {
        if (nvars > 0) alpha[var] = static_cast<uint8_t>(rem);
        if (nvars > 0 || rem == 0)
          out.insert(out.end(), alpha.begin(), alpha.end());
        return;
      }
      for (int e = rem; e >= 0; --e) {
        alpha[var] = static_cast<uint8_t>(e);
        rec(var + 1, rem - e);
      }
    };
    if (nvars == 0) {
      if (deg == 0) degree_start[0] = 0;
    } else {
      rec(0, deg);
    }
  }
  degree_start[order + 1] = nvars == 0 ? 1 : static_cast<int>(out.size()) / nvars;
}

}  // namespace

void JetLayout::build() {
  enumerate(nvars, order, exponents, degree_start);
  count = nvars == 0 ? 1 : static_cast<int>(exponents.size()) / nvars;
  if (nvars == 0) exponents.clear();

  factorial.resize(count);
  for (int i = 0; i < count; ++i) {
    double f = 1.0;
    for (int v = 0; v < nvars; ++v) {
      int e = exponents[static_cast<size_t>(i) * nvars + v];
      for (int k = 2; k <= e; ++k) f *= k;
    }
    factorial[i] = f;
  }

  lookup_.reserve(static_cast<size_t>(count) * 2);
  for (int i = 0; i < count; ++i) lookup_[pack_alpha8(alpha(i))] = i;

  auto deg_of = [&](int i) {
    int d = 0;
    for (int v = 0; v < nvars; ++v) d += exponents[static_cast<size_t>(i) * nvars + v];
    return d;
  };

  std::vector<int> degs(count);
  for (int i = 0; i < count; ++i) degs[i] = deg_of(i);

  std::vector<int> sum(std::max(nvars, 1));
  for (int a = 0; a < count; ++a) {
    for (int b = 0; b < count; ++b) {
      if (degs[a] + degs[b] > order) continue;
      for (int v = 0; v < nvars; ++v)
        sum[v] = exponents[static_cast<size_t>(a) * nvars + v] +
                 exponents[static_cast<size_t>(b) * nvars + v];
      int dst = nvars == 0 ? 0 : index_of(std::span<const int>(sum.data(), nvars));
      mul.push_back({a, b, dst});
    }
  }

  deriv.resize(nvars);
  if (order >= 1) {
    int lower_count = degree_start[order];  // monomials with degree <= order-1
    for (int v = 0; v < nvars; ++v) {
      deriv[v].resize(lower_count);
      for (int t = 0; t < lower_count; ++t) {
        for (int u = 0; u < nvars; ++u)
          sum[u] = exponents[static_cast<size_t>(t) * nvars + u] + (u == v ? 1 : 0);
        int src = index_of(std::span<const int>(sum.data(), nvars));
        deriv[v][t] = {src, double(exponents[static_cast<size_t>(t) * nvars + v] + 1)};
      }
    }
  }
}

int JetLayout::index_of(std::span<const int> alpha) const {
  auto it = lookup_.find(pack_alpha(alpha));
  return it == lookup_.end() ? -1 : it->second;
}

const JetLayout& layout(int nvars, int order) {
  if (nvars < 0 || nvars > kMaxJetVars || order < 0 || order > kMaxJetOrder)
    throw UnsupportedOrder("jet layout out of range: nvars=" + std::to_string(nvars) +
                           " order=" + std::to_string(order));
  static std::atomic<const JetLayout*>
      slots[kMaxJetVars + 1][kMaxJetOrder + 1] = {};
  auto& slot = slots[nvars][order];
  const JetLayout* p = slot.load(std::memory_order_acquire);
  if (p) return *p;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  p = slot.load(std::memory_order_relaxed);
  if (!p) {
    auto lay = new JetLayout();
    lay->nvars = nvars;
    lay->order = order;
    lay->build();
    slot.store(lay, std::memory_order_release);
    p = lay;
  }
  return *p;
}

Jet Jet::constant(int nvars, int order, double v) {
  Jet j = zero_like(&layout(nvars, order));
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double base) {
  if (order < 1) throw UnsupportedOrder("seeding a variable needs order >= 1");
  if (var < 0 || var >= nvars) throw UnsupportedOrder("seed variable out of range");
  Jet j = zero_like(&layout(nvars, order));
  j.c_[0] = base;
  j.c_[1 + var] = 1.0;  // degree-1 layer is lex ordered: x_0, x_1, ...
  return j;
}

Jet Jet::from_coeffs(int nvars, int order, std::vector<double> c) {
  const JetLayout& lay = layout(nvars, order);
  if (static_cast<int>(c.size()) != lay.count)
    throw UnsupportedOrder("coefficient vector size mismatch");
  return Jet(&lay, std::move(c));
}

double Jet::coeff(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != nvars())
    throw UnsupportedOrder("multi-index arity mismatch");
  int total = 0;
  for (int a : alpha) total += a;
  if (total > order()) throw UnsupportedOrder("multi-index exceeds jet order");
  int idx = lay_->index_of(alpha);
  return idx < 0 ? 0.0 : c_[idx];
}

double Jet::partial(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != nvars())
    throw UnsupportedOrder("multi-index arity mismatch");
  int total = 0;
  for (int a : alpha) total += a;
  if (total > order()) throw UnsupportedOrder("multi-index exceeds jet order");
  int idx = lay_->index_of(alpha);
  return idx < 0 ? 0.0 : c_[idx] * lay_->factorial[idx];
}

Jet Jet::truncated(int new_order) const {
  if (new_order >= order()) return *this;
  const JetLayout& lay = layout(nvars(), new_order);
  std::vector<double> c(c_.begin(), c_.begin() + lay.count);
  return Jet(&lay, std::move(c));
}

void Jet::align(const Jet*& a, const Jet*& b, Jet& sa, Jet& sb) {
  if (a->lay_ == b->lay_) return;
  if (a->is_scalar()) {
    sa = constant(b->nvars(), b->order(), a->value());
    a = &sa;
    return;
  }
  if (b->is_scalar()) {
    sb = constant(a->nvars(), a->order(), b->value());
    b = &sb;
    return;
  }
  if (a->nvars() != b->nvars())
    throw UnsupportedOrder("jet variable-count mismatch");
  if (a->order() > b->order()) {
    sa = a->truncated(b->order());
    a = &sa;
  } else {
    sb = b->truncated(a->order());
    b = &sb;
  }
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& x : r.c_) x = -x;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.is_scalar()) {
    c_[0] += o.c_[0];
    return *this;
  }
  if (is_scalar()) {
    double v = c_[0];
    *this = o;
    c_[0] += v;
    return *this;
  }
  if (nvars() != o.nvars())
    throw UnsupportedOrder("jet variable-count mismatch");
  if (o.order() < order()) {
    lay_ = o.lay_;
    c_.resize(lay_->count);  // graded layout: truncation is a prefix
  }
  for (int i = 0; i < lay_->count; ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.is_scalar()) {
    c_[0] -= o.c_[0];
    return *this;
  }
  if (is_scalar()) {
    double v = c_[0];
    *this = -o;
    c_[0] += v;
    return *this;
  }
  if (nvars() != o.nvars())
    throw UnsupportedOrder("jet variable-count mismatch");
  if (o.order() < order()) {
    lay_ = o.lay_;
    c_.resize(lay_->count);
  }
  for (int i = 0; i < lay_->count; ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_scalar()) {
    Jet r = b;
    r *= a.c_[0];
    return r;
  }
  if (b.is_scalar()) {
    Jet r = a;
    r *= b.c_[0];
    return r;
  }
  if (a.nvars() != b.nvars())
    throw UnsupportedOrder("jet variable-count mismatch");
  // thanks to the graded prefix layout the product can read straight from
  // both operands' coefficient arrays at the common order
  const JetLayout& lay = layout(a.nvars(), std::min(a.order(), b.order()));
  Jet r = Jet::zero_like(&lay);
  const double* ac = a.c_.data();
  const double* bc = b.c_.data();
  double* rc = r.c_.data();
  for (const auto& e : lay.mul) rc[e.dst] += ac[e.a] * bc[e.b];
  return r;
}

void madd(Jet& acc, const Jet& a, const Jet& b) {
  // scaled accumulate without a table pass
  auto scaled = [](Jet& dst, const Jet& x, double w) {
    if (w == 0.0) return;
    if (x.is_scalar()) {
      dst += w * x.value();
      return;
    }
    if (dst.is_scalar()) {
      double v = dst.value();
      dst = x;
      dst *= w;
      dst += v;
      return;
    }
    if (dst.nvars() != x.nvars())
      throw UnsupportedOrder("jet variable-count mismatch");
    if (dst.order() > x.order()) {
      dst.lay_ = x.lay_;
      dst.c_.resize(dst.lay_->count);
    }
    const double* xc = x.c_.data();
    double* dc = dst.c_.data();
    for (int i = 0; i < dst.lay_->count; ++i) dc[i] += w * xc[i];
  };
  if (a.is_scalar() && b.is_scalar()) {
    acc += a.value() * b.value();
    return;
  }
  if (b.is_scalar()) {
    scaled(acc, a, b.value());
    return;
  }
  if (a.is_scalar()) {
    scaled(acc, b, a.value());
    return;
  }
  if (a.nvars() != b.nvars())
    throw UnsupportedOrder("jet variable-count mismatch");
  int r = std::min(a.order(), b.order());
  if (acc.is_scalar()) {
    double v = acc.value();
    acc = Jet::constant(a.nvars(), r, v);
  } else {
    if (acc.nvars() != a.nvars())
      throw UnsupportedOrder("jet variable-count mismatch");
    r = std::min(r, acc.order());
    if (acc.order() > r) {
      acc.lay_ = &layout(acc.nvars(), r);
      acc.c_.resize(acc.lay_->count);
    }
  }
  const JetLayout& lay = layout(a.nvars(), r);
  const double* ac = a.c_.data();
  const double* bc = b.c_.data();
  double* rc = acc.c_.data();
  for (const auto& e : lay.mul) rc[e.dst] += ac[e.a] * bc[e.b];
}

Jet Jet::series(std::span<const double> coeffs) const {
  // Horner on the nilpotent part e = u - u0.
  Jet e = *this;
  e.c_[0] = 0.0;
  int K = order();
  Jet r = constant(nvars(), K, coeffs[K]);
  for (int k = K - 1; k >= 0; --k) {
    r = r * e;
    r += coeffs[k];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  double b0 = b.value();
  if (b0 == 0.0) throw JetDomainError("jet division by zero value");
  int K = b.order();
  std::vector<double> inv(K + 1);
  double p = 1.0 / b0;
  for (int k = 0; k <= K; ++k) {
    inv[k] = p;                     // (1/u) series: (-1)^k / u0^{k+1}
    p *= -1.0 / b0;
  }
  return a * b.series(inv);
}

Jet operator/(double s, const Jet& a) { return Jet(s) / a; }

Jet derivative(const Jet& j, int var) {
  if (j.is_scalar()) return Jet(0.0);  // constants differentiate to zero
  if (j.order() < 1)
    throw UnsupportedOrder("derivative of an order-0 jet");
  if (var < 0 || var >= j.nvars())
    throw UnsupportedOrder("derivative variable out of range");
  const JetLayout& lower = layout(j.nvars(), j.order() - 1);
  std::vector<double> c(lower.count);
  const auto& tab = j.lay_->deriv[var];
  for (int t = 0; t < lower.count; ++t) c[t] = j.c_[tab[t].src] * tab[t].factor;
  return Jet(&lower, std::move(c));
}

Jet sqrt(const Jet& j) {
  double u0 = j.value();
  if (u0 <= 0.0) throw JetDomainError("jet sqrt of non-positive value");
  int K = j.order();
  std::vector<double> s(K + 1);
  s[0] = std::sqrt(u0);
  for (int k = 1; k <= K; ++k) s[k] = s[k - 1] * (1.5 / k - 1.0) / u0;
  return j.series(s);
}

Jet exp(const Jet& j) {
  int K = j.order();
  std::vector<double> s(K + 1);
  s[0] = std::exp(j.value());
  for (int k = 1; k <= K; ++k) s[k] = s[k - 1] / k;
  return j.series(s);
}

Jet log(const Jet& j) {
  double u0 = j.value();
  if (u0 <= 0.0) throw JetDomainError("jet log of non-positive value");
  int K = j.order();
  std::vector<double> s(K + 1);
  s[0] = std::log(u0);
  double p = 1.0 / u0;
  for (int k = 1; k <= K; ++k) {
    s[k] = p / k * ((k % 2) ? 1.0 : -1.0);
    p /= u0;
  }
  return j.series(s);
}

Jet sin(const Jet& j) {
  int K = j.order();
  double sv = std::sin(j.value()), cv = std::cos(j.value());
  std::vector<double> s(K + 1);
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    double d = (k % 4 == 0) ? sv : (k % 4 == 1) ? cv : (k % 4 == 2) ? -sv : -cv;
    s[k] = d / fact;
  }
  return j.series(s);
}

Jet cos(const Jet& j) {
  int K = j.order();
  double sv = std::sin(j.value()), cv = std::cos(j.value());
  std::vector<double> s(K + 1);
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    double d = (k % 4 == 0) ? cv : (k % 4 == 1) ? -sv : (k % 4 == 2) ? -cv : sv;
    s[k] = d / fact;
  }
  return j.series(s);
}

Jet pow(const Jet& j, int n) {
  if (n < 0) return 1.0 / pow(j, -n);
  Jet r = Jet::constant(j.nvars(), j.order(), 1.0);
  Jet base = j;
  int e = n;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

Jet pow(const Jet& j, double r) {
  double u0 = j.value();
  if (u0 <= 0.0) throw JetDomainError("jet pow of non-positive value");
  int K = j.order();
  std::vector<double> s(K + 1);
  s[0] = std::pow(u0, r);
  for (int k = 1; k <= K; ++k) s[k] = s[k - 1] * ((r - (k - 1)) / k) / u0;
  return j.series(s);
}

Jet compose(const Jet& f, std::span<const Jet> args) {
  if (static_cast<int>(args.size()) != f.nvars())
    throw UnsupportedOrder("compose arity mismatch");
  if (f.nvars() == 0) return args.empty() ? f : Jet(f.value());
  // Precompute argument powers up to the order of f.
  const Jet& proto = args[0];
  int K = f.order();
  std::vector<std::vector<Jet>> pw(args.size());
  for (size_t v = 0; v < args.size(); ++v) {
    pw[v].reserve(K + 1);
    pw[v].push_back(Jet::constant(proto.nvars(), proto.order(), 1.0));
    for (int k = 1; k <= K; ++k) pw[v].push_back(pw[v].back() * args[v]);
  }
  Jet r = Jet::constant(proto.nvars(), proto.order(), 0.0);
  const JetLayout& lay = layout(f.nvars(), f.order());
  for (int i = 0; i < lay.count; ++i) {
    double c = f.coeffs()[i];
    if (c == 0.0) continue;
    auto a = lay.alpha(i);
    Jet term = Jet::constant(proto.nvars(), proto.order(), c);
    for (int v = 0; v < f.nvars(); ++v)
      if (a[v] > 0) term = term * pw[v][a[v]];
    r += term;
  }
  return r;
}

Jet Jet::frozen(int first, int last) const {
  Jet r = *this;
  for (int i = 0; i < lay_->count; ++i) {
    auto a = lay_->alpha(i);
    for (int v = first; v < last; ++v)
      if (a[v] > 0) {
        r.c_[i] = 0.0;
        break;
      }
  }
  return r;
}

Jet Jet::promoted(int extra_vars, int new_order) const {
  const JetLayout& big = layout(nvars() + extra_vars, new_order);
  std::vector<double> c(big.count, 0.0);
  std::vector<int> a(big.nvars, 0);
  int copy_order = std::min(order(), new_order);
  int n_copy = layout(nvars(), copy_order).count;
  for (int i = 0; i < n_copy; ++i) {
    auto src = lay_->alpha(i);
    for (int v = 0; v < nvars(); ++v) a[v] = src[v];
    c[big.index_of(a)] = c_[i];
  }
  return Jet(&big, std::move(c));
}

Jet Jet::subjet(int keep_vars, std::span<const int> alpha, int new_order) const {
  if (keep_vars + static_cast<int>(alpha.size()) != nvars())
    throw UnsupportedOrder("subjet arity mismatch");
  int adeg = 0;
  for (int x : alpha) adeg += x;
  const JetLayout& small = layout(keep_vars, new_order);
  std::vector<double> c(small.count, 0.0);
  std::vector<int> full(nvars());
  double afact = 1.0;
  for (int x : alpha)
    for (int k = 2; k <= x; ++k) afact *= k;
  for (int i = 0; i < small.count; ++i) {
    auto head = small.alpha(i);
    int hdeg = 0;
    for (int v = 0; v < keep_vars; ++v) {
      full[v] = head[v];
      hdeg += head[v];
    }
    if (hdeg + adeg > order()) continue;
    for (size_t v = 0; v < alpha.size(); ++v) full[keep_vars + v] = alpha[v];
    int src = lay_->index_of(full);
    if (src >= 0) c[i] = c_[src] * afact;
  }
  return Jet(&small, std::move(c));
}

namespace {

struct LatticeKey {
  std::vector<int> z;
  bool operator==(const LatticeKey& o) const { return z == o.z; }
};

struct LatticeHash {
  size_t operator()(const LatticeKey& k) const {
    size_t h = 1469598103934665603ull;
    for (int v : k.z) {
      h ^= static_cast<size_t>(v + 64);
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

Jet fd_jet(const PlainFn& f, std::span<const double> at, int order, double step) {
  int n = static_cast<int>(at.size());
  const JetLayout& lay = layout(n, order);
  std::unordered_map<LatticeKey, double, LatticeHash> memo;
  std::vector<double> x(at.begin(), at.end());
  std::vector<double> scale(n);
  for (int v = 0; v < n; ++v) scale[v] = step * std::max(1.0, std::abs(at[v]));

  // Evaluation on the half-step lattice: offsets are integer multiples of h/2.
  auto eval = [&](const std::vector<int>& z) {
    LatticeKey key{z};
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    for (int v = 0; v < n; ++v) x[v] = at[v] + 0.5 * scale[v] * z[v];
    double val = f(x);
    memo.emplace(std::move(key), val);
    return val;
  };

  std::vector<double> c(lay.count);
  std::vector<int> z(n, 0);
  std::vector<long long> binom_row;
  for (int i = 0; i < lay.count; ++i) {
    auto a = lay.alpha(i);
    // Tensor product of central differences: D^alpha f ~ prod_v delta_v^{a_v} / h_v^{a_v}.
    std::vector<std::pair<std::vector<int>, double>> stencil{{z, 1.0}};
    for (int v = 0; v < n; ++v) {
      int k = a[v];
      if (k == 0) continue;
      binom_row.assign(k + 1, 1);
      for (int r = 1; r <= k; ++r)
        binom_row[r] = binom_row[r - 1] * (k - r + 1) / r;
      std::vector<std::pair<std::vector<int>, double>> next;
      next.reserve(stencil.size() * (k + 1));
      for (const auto& [zz, w] : stencil) {
        for (int jj = 0; jj <= k; ++jj) {
          auto z2 = zz;
          z2[v] += k - 2 * jj;  // offsets k/2 - j in h units = (k - 2j) half-steps
          double sgn = (jj % 2) ? -1.0 : 1.0;
          next.emplace_back(std::move(z2), w * sgn * double(binom_row[jj]));
        }
      }
      stencil = std::move(next);
    }
    double acc = 0.0;
    for (const auto& [zz, w] : stencil) acc += w * eval(zz);
    double hpow = 1.0;
    for (int v = 0; v < n; ++v)
      for (int e = 0; e < a[v]; ++e) hpow *= scale[v];
    c[i] = acc / hpow / lay.factorial[i];  // store Taylor coefficient
  }
  return Jet::from_coeffs(n, order, std::move(c));
}

}  // namespace finsub
