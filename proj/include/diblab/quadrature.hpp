#pragma once

#include "diblab/family.hpp"
#include "diblab/types.hpp"

namespace diblab {

// Nodes and positive weights for one fiber.  Interior rules integrate
// against Lebesgue measure; boundary rules carry the surface measure dS
// (the 1/|grad rho| factor is left to the caller).
struct QuadratureRule {
  enum class Kind { interior, boundary };
  Kind kind = Kind::interior;
  VectorXcd t;
  std::vector<VectorXcd> nodes;
  VectorXd weights;
  int angular = 0;
  int radial = 0;

  int size() const { return static_cast<int>(nodes.size()); }
};

struct QuadratureOptions {
  int angular = 256;  // equispaced angles per torus factor
  int radial = 64;    // Gauss-Legendre nodes per ray
  int psi = 32;       // profile-angle nodes (m = 2 only)
  double root_tol = 1e-13;
  int scan_steps = 64;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int k, VectorXd& x, VectorXd& w);

// Derivative of a smooth 2*pi-periodic function from equispaced samples,
// computed through its discrete Fourier series.
VectorXd spectral_derivative_periodic(const VectorXd& samples);

// First sign change of g along (scan_start, r_max], located by scan plus
// bisection; |g| at the returned radius is below root_tol.  Requires
// g(scan_start or 0+) < 0.
double path_boundary_radius(const std::function<double(double)>& g, double scan_start,
                            double r_max, const QuadratureOptions& opts);

// First boundary crossing of the ray r -> center + r e^{i theta} (m = 1).
double ray_boundary_radius(const FamilySpec& fam, const VectorXcd& t, Complex center,
                           double theta, double scan_start, double r_max,
                           const QuadratureOptions& opts);

// Inner and outer crossings for ring fibers (m = 1, annular).
std::pair<double, double> ray_ring_radii(const FamilySpec& fam, const VectorXcd& t,
                                         Complex center, double theta,
                                         const QuadratureOptions& opts);

// Builds fiber rules.  m = 1 handles star-shaped and declared ring fibers;
// m = 2 requires reinhardt fibers (nested polar rule over (|z1|, |z2|)).
QuadratureRule interior_rule(const FamilySpec& fam, const VectorXcd& t,
                             const QuadratureOptions& opts = {});
QuadratureRule boundary_rule(const FamilySpec& fam, const VectorXcd& t,
                             const QuadratureOptions& opts = {});

// Tree-summed integral of f over the rule's nodes.
Complex integrate(const QuadratureRule& rule,
                  const std::function<Complex(const VectorXcd&)>& f);

}  // namespace diblab
