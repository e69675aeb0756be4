#pragma once

// Truncated multivariate Taylor arithmetic (forward jets).
//
// A Jet holds the Taylor coefficients of a scalar function of `nvars`
// perturbation variables, truncated at total degree `order`.  Coefficients
// are stored densely in graded-lexicographic monomial order, so the first
// count(nvars, k) entries of an order-K jet are exactly its order-k
// truncation.  Storage is the Taylor coefficient c_alpha = D^alpha f / alpha!;
// `partial` applies the factorial so it returns the mixed derivative itself.
//
// References: Neidinger, "Directions for computing truncated multivariate
// Taylor series"; Griewank & Walther, "Evaluating Derivatives", ch. 13.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace finsub {

struct UnsupportedOrder : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JetDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxJetVars = 16;
inline constexpr int kMaxJetOrder = 8;

// Monomial enumeration and precomputed tables for one (nvars, order) pair.
// Layouts are built once and cached for the lifetime of the process; all
// members are immutable after construction, so concurrent reads are safe.
struct JetLayout {
  int nvars = 0;
  int order = 0;
  int count = 1;                      // number of monomials with |alpha| <= order
  std::vector<int> degree_start;      // first index of each total degree layer
  std::vector<uint8_t> exponents;     // count * nvars exponent table
  std::vector<double> factorial;      // alpha! per monomial

  struct MulEntry {
    int32_t a, b, dst;
  };
  std::vector<MulEntry> mul;          // all (a,b) with deg(a)+deg(b) <= order

  struct DerivEntry {
    int32_t src;
    double factor;                    // alpha_var + 1
  };
  std::vector<std::vector<DerivEntry>> deriv;  // per var, indexed by target monomial

  int index_of(std::span<const int> alpha) const;  // -1 if absent
  std::span<const uint8_t> alpha(int idx) const {
    return {exponents.data() + static_cast<size_t>(idx) * nvars,
            static_cast<size_t>(nvars)};
  }

 private:
  friend const JetLayout& layout(int nvars, int order);
  std::unordered_map<uint64_t, int32_t> lookup_;
  void build();
};

const JetLayout& layout(int nvars, int order);

class Jet {
 public:
  Jet() : Jet(0.0) {}
  explicit Jet(double v) : lay_(&layout(0, 0)), c_(1, v) {}

  static Jet constant(int nvars, int order, double v);
  // Seed variable `var`: base value plus a unit first-order perturbation.
  static Jet variable(int nvars, int order, int var, double base);
  // Low-level: adopts a raw coefficient vector (graded-lex order).
  static Jet from_coeffs(int nvars, int order, std::vector<double> c);

  int nvars() const { return lay_->nvars; }
  int order() const { return lay_->order; }
  bool is_scalar() const { return lay_->nvars == 0; }
  double value() const { return c_[0]; }
  const std::vector<double>& coeffs() const { return c_; }

  double coeff(std::span<const int> alpha) const;    // raw Taylor coefficient
  double partial(std::span<const int> alpha) const;  // mixed derivative

  Jet truncated(int new_order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return (*this) *= (1.0 / s); }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
  friend Jet operator/(double s, const Jet& a);

  // d/dx_var, one order lower.
  friend Jet derivative(const Jet& j, int var);

  friend Jet sqrt(const Jet& j);
  friend Jet exp(const Jet& j);
  friend Jet log(const Jet& j);
  friend Jet sin(const Jet& j);
  friend Jet cos(const Jet& j);
  friend Jet pow(const Jet& j, int n);       // exact for polynomials
  friend Jet pow(const Jet& j, double r);

  // Evaluates the truncated polynomial at jet arguments (one per variable).
  friend Jet compose(const Jet& f, std::span<const Jet> args);

  // Fused accumulate: acc = acc + a * b, truncated to the common order,
  // without intermediate allocations.  The workhorse of all contractions.
  friend void madd(Jet& acc, const Jet& a, const Jet& b);

  // Zeroes every coefficient whose monomial touches vars in [first, last).
  // The result represents the same function with those variables frozen at
  // their base value.
  Jet frozen(int first, int last) const;

  // Re-expresses the jet in a layout with `extra` trailing variables.
  Jet promoted(int extra_vars, int new_order) const;

  // Taylor sub-jet: derivative w.r.t. a trailing-variable multi-index, with
  // those variables then frozen and dropped.  `alpha` indexes vars
  // [keep_vars, nvars); the result lives in layout(keep_vars, new_order).
  Jet subjet(int keep_vars, std::span<const int> alpha, int new_order) const;

 private:
  Jet(const JetLayout* lay, std::vector<double> c) : lay_(lay), c_(std::move(c)) {}
  static Jet zero_like(const JetLayout* lay) {
    return Jet(lay, std::vector<double>(lay->count, 0.0));
  }
  // Composes with a power series around value(): series[k] = f^(k)(u0)/k!.
  Jet series(std::span<const double> coeffs) const;
  static void align(const Jet*& a, const Jet*& b, Jet& sa, Jet& sb);

  const JetLayout* lay_;
  std::vector<double> c_;
};

using JetVec = std::vector<Jet>;

// Plain real function of a flat coordinate vector.
using PlainFn = std::function<double(std::span<const double>)>;

// Builds the jet of `f` at `at` by nested central differences on a half-step
// lattice (memoized).  Used as the fallback for metrics that are only
// available as plain-number callables; accuracy is O(h^2) per coefficient,
// so downstream tolerances must be widened accordingly.
Jet fd_jet(const PlainFn& f, std::span<const double> at, int order,
           double step = 1e-2);

}  // namespace finsub
