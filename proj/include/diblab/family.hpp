#pragma once

#include <optional>

#include "diblab/jet.hpp"
#include "diblab/types.hpp"

namespace diblab {

// A holomorphic family of bounded fibers { rho(t, .) < 0 } over a ball
// |t| < t_radius in C^n.  rho must be real-valued, strictly plurisubharmonic
// on each fiber closure, with nonvanishing fiber gradient on the boundary.
struct FamilySpec {
  std::string name;
  int n = 1;
  int m = 1;
  ScalarField rho;
  std::function<VectorXcd(const VectorXcd&)> star_center;  // t -> point in C^m
  double bounding_radius = 1.0;  // fiber contained in ball about star_center
  double t_radius = 1.0;

  // Fibers invariant under independent rotation of each z_p.  Required for
  // the m = 2 quadrature route and for exactness of monomial projections.
  bool reinhardt = false;

  // m = 1 Reinhardt ring fibers (two boundary circles).  The generic ray
  // route requires star-shaped fibers and rejects these.
  bool annular = false;

  // First radius probed when scanning rays; nonzero for fibers whose
  // defining function is singular at the star center (ring fibers).
  double ray_scan_start = 0.0;

  VectorXcd center_at(const VectorXcd& t) const {
    return star_center ? star_center(t) : VectorXcd::Zero(m);
  }
};

// Pointwise derived geometry of the family at one point of the total space.
// Index conventions: fiber_hessian(p,q) = rho_{p qbar}, inv_hessian is its
// matrix inverse, rho_up[p] = sum_q inv_hessian(p,q) rho_q, and
// nu(j,p) is the coefficient of d/dz_p in the horizontal lift V_j.
struct GeometryFields {
  int n = 0;
  int m = 0;
  Point point;
  ScalarJet3 jet;

  double rho = 0.0;
  VectorXcd rho_t;          // rho_j
  VectorXcd rho_z;          // rho_p
  MatrixXcd rho_tt;         // n x n, rho_{j kbar}
  MatrixXcd rho_tz;         // n x m, rho_{j qbar}
  MatrixXcd fiber_hessian;  // m x m
  MatrixXcd inv_hessian;    // m x m
  VectorXcd rho_up;         // rho^p
  VectorXcd a_t;            // rho_j - sum_s rho_{j sbar} rho^s
  double del_rho2 = 0.0;    // |d_z rho|^2 = rho_z^* inv_hessian rho_z
  double grad_fiber = 0.0;  // real fiber gradient norm, 2 sqrt(sum |rho_p|^2)
  double denom = 0.0;       // rho - del_rho2, negative on the closed fiber

  MatrixXcd nu;                // n x m
  std::vector<MatrixXcd> dnu;  // one n x m block per flat direction index

  const MatrixXcd& dnu_dir(Dir d) const { return dnu[d.flat(n + m)]; }
};

// Assembles all fields from a third-order jet of rho.  Throws NumericalError
// when the fiber Hessian is numerically singular or the denominator
// rho - |d rho|^2 is not safely negative.
GeometryFields geometry_fields(const FamilySpec& fam, const Point& p,
                               const FdOptions& opts = {});

// Same, from a caller-provided jet (used by tests to inject corrupted data).
GeometryFields geometry_fields_from_jet(const FamilySpec& fam, const Point& p,
                                        const ScalarJet3& jet);

// Boundary Hessian of rho along horizontal directions, n x n Hermitian:
// H(rho) = H0(rho) + a a^* / |d rho|^2.  Only meaningful where rho = 0.
MatrixXcd h_rho(const GeometryFields& g);

// Interior form: the t-t block of the full Hessian reduced by the fiber
// block, positive semidefinite for plurisubharmonic rho.
MatrixXcd h0_rho(const GeometryFields& g);

// Alternate boundary evaluation of H(rho) through nu; agrees with h_rho on
// the fiber boundary and provides a cross-check of the nu assembly.
MatrixXcd h_rho_via_nu(const GeometryFields& g);

// V_j(rho) where V_j = d/dt_j + sum_p nu_j^p d/dz_p; vanishes on the fiber
// boundary.  Also satisfies V_j(rho) = rho * a_j / denom everywhere.
Complex v_field_rho(const GeometryFields& g, int j);

// Vbar_k(V_j(rho)); vanishes on the fiber boundary.
Complex vbar_v_rho(const GeometryFields& g, int j, int k);

struct ValidationOptions {
  int t_samples = 5;
  int rays = 24;
  int ray_steps = 48;
  unsigned seed = 20240801;
  bool strict = false;  // additionally require the full Hessian pd
  FdOptions fd;
};

struct FamilyCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct FamilyReport {
  bool valid = false;
  std::vector<FamilyCheck> checks;
};

// Sampled structural validation: realness of rho, interior star center,
// fiber Hessian positivity, boundary gradient, denominator sign, ray
// monotonicity (star-shapedness), bounding radius, and in strict mode
// positivity of the full Hessian on fiber closures.
FamilyReport validate_family(const FamilySpec& fam, const ValidationOptions& opts = {});

}  // namespace diblab
