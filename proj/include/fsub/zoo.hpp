#pragma once

// Built-in submersion fixtures with their known flags and reference values.

#include "fsub/submersion.hpp"

namespace finsub {

struct FixtureFlags {
  bool riemannian = false;
  bool totally_geodesic = false;
  bool horizontally_regular = false;
  bool flat = false;
};

struct Fixture {
  SubmersionChart chart;
  FixtureFlags flags;
  bool base_induced = false;
  std::string notes;
};

// Flat R^4 -> R^2 orthogonal projection; everything vanishes.
Fixture riemannian_product();

// Round 3-sphere fibered over the half-radius 2-sphere in Euler-angle
// coordinates (theta, phi, psi) -> (theta, phi):
//   L     = 1/4 (vth^2 + vph^2 + vps^2 + 2 cos(theta) vph vps),
//   Lbase = 1/4 (vth^2 + sin(theta)^2 vph^2).
// Base flag curvature 4, total flag curvature 1, |A_x v| = 1 on unit
// orthonormal horizontal pairs; fibers are great circles.
Fixture hopf();

// Flat Randers metric on R^3 with a drift one-form of norm 0.4 that has a
// vertical component; base metric induced by lifting.
Fixture minkowski_randers();

// Position-dependent Randers metric on R^3 (coefficients constant along the
// fibers so the induced base Lagrangian is well defined); the generic fixture
// where T, A, Qhat, Qtilde and both split curvatures are all nonzero.
Fixture varying_randers();

// Riemannian warped product R^2 x_f R with f = 1 + 0.2 sin(x1); fibers are
// not totally geodesic (T != 0) while the horizontal distribution is
// integrable (A = 0).
Fixture warped_product();

const std::vector<std::string>& fixture_names();
Fixture fixture_by_name(const std::string& name);

// Closed-form helpers used as oracles by tests and the acceptance suite.
namespace hopf_oracle {
// Fiber displacement in psi for the horizontal lift of the full
// constant-colatitude circle, and the corresponding cap area on the base.
inline double psi_shift(double theta) { return -2.0 * M_PI * std::cos(theta); }
inline double cap_area(double theta) {
  return 0.5 * M_PI * (1.0 - std::cos(theta));
}
// Holonomy rotation angle of the fiber circle in arc length, mod 2 pi.
inline double rotation_angle(double theta) {
  double a = 2.0 * cap_area(theta);
  return std::fmod(a + 2.0 * M_PI, 2.0 * M_PI);
}
}  // namespace hopf_oracle

namespace warped_oracle {
// |T^v_v v| for a vertical v = (0,0,w) at x, under L = |vt|^2 + f(x1)^2 w^2:
// the fiber second fundamental form is -(f f') w^2 in the x1 slot.
double t_vv_norm(const Vec& x, double w);
}  // namespace warped_oracle

}  // namespace finsub
