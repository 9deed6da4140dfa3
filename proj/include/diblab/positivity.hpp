#pragma once

#include "diblab/bergman.hpp"
#include "diblab/curvature.hpp"
#include "diblab/metric.hpp"

namespace diblab {

// Eigenvalues in [-zero_tol, zero_tol] count as zero (quadrature and FD
// noise); anything below -zero_tol is a hard failure.
enum class Definiteness { positive, semidefinite, indefinite };

Definiteness classify_min_eig(double min_eig, double zero_tol = 1e-10);

const char* to_string(Definiteness d);

// Two-by-two block operator on U + V with U orthogonal to V.  The assembled
// matrix is Hermitian when t1, t4 are Hermitian and t3 = t2 adjoint.
struct BlockForm {
  MatrixXcd t1, t2, t3, t4;

  MatrixXcd assemble() const;
};

struct SchurResult {
  MatrixXcd s;  // t4 - t3 t1^{-1} t2
  double min_eig = 0.0;
  Definiteness verdict = Definiteness::indefinite;
};

// Reduction of the V-block by an invertible U-block.  For Hermitian pd input
// the result is pd; more generally (t1 pd) the verdict matches the verdict
// of the assembled matrix.
SchurResult schur_complement(const BlockForm& bf);

// Fiber-fiber block of the pointwise bundle curvature in the pairing index
// convention: view[(p,lambda),(q,mu)] = A_{z_p z_q}(lambda, mu).
MatrixXcd fiber_curvature_view(const MetricFields& mf);

// Inverse tensor of the fiber curvature block: b solves
//   sum_{q,mu} a[(p,lambda),(q,mu)] b[(s,alpha),(q,mu)] = delta_ps delta_la,
// i.e. b = conj(a^{-1}) for Hermitian a.  Requires a strictly positive;
// residual is the max-norm defect of the contraction identity.
struct BTensor {
  int m = 0, r = 1;
  MatrixXcd b;
  double residual = 0.0;
};

BTensor solve_B(const MatrixXcd& a_fiber, int m, int r);

// Interior inequality: for any section tuple u, the interior part of the
// curvature pairing (volume + lift + shear terms) dominates the integral of
// the fiber-reduced coefficient
//
//   S_jk = A_{t_j t_k} - C_j A_fiber^{-1} C_k^*,   C_j = A_{t_j z_.} blocks.
//
// margin(u) = LHS(u) - RHS(u) is expected nonnegative up to quadrature noise
// whenever the metric is Nakano strictly positive on the fiber closure.
struct InteriorBound {
  SectionBasis basis;
  int n = 1;
  MatrixXcd interior_lhs;  // t1 + t2 + t3 of the curvature operator
  MatrixXcd schur_rhs;     // integrated S_jk in the same frame
  MatrixXcd gram;

  double margin(const VectorXcd& coeffs) const;

  // min eigenvalue of the pencil (lhs - rhs, I kron G): one number bounding
  // the margin over every tuple in the truncated span.
  double min_margin_eig() const;
};

InteriorBound interior_bound_check(const FamilySpec& fam, const MatrixField& metric,
                                   const SectionBasis& basis, const VectorXcd& t,
                                   const CurvatureOptions& opts = {});

// Minimum eigenvalue of the pencil (pairings, I_n kron gram); positive
// exactly when the truncated bundle is Nakano strictly positive at t.
double nakano_min_eig(const MatrixXcd& pairings, const MatrixXcd& gram, int n);

// Smallest Rayleigh quotient (boundary surface norm) / (interior volume
// norm) over the truncated holomorphic span, unweighted.  Nonincreasing in
// the truncation degree; upper-bounds the domain trace constant.
double trace_constant(const FamilySpec& fam, const VectorXcd& t, int degree,
                      const QuadratureOptions& quad = {});

// Certified-style chain of the boundary positivity estimate:
//   delta1 = min over boundary samples of min-eig(H0(rho)) / |grad_z rho|,
//   delta2 = delta1 * (min boundary eigenvalue of the bundle metric),
//   delta3 = trace constant at the basis degree,
//   bound  = delta2 * delta3 * min-gen-eig(unweighted Gram, weighted Gram).
// Sampled at quadrature nodes, not interval-certified.
struct StrictBound {
  double delta1 = 0.0;
  double min_boundary_metric = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double gram_ratio = 0.0;
  double bound = 0.0;
  double lambda_min = 0.0;  // Nakano pencil eigenvalue of the same operator
  bool bound_below_lambda = false;
};

StrictBound strict_lower_bound(const FamilySpec& fam, const MatrixField& metric,
                               const SectionBasis& basis, const VectorXcd& t,
                               const CurvatureOptions& opts = {});

}  // namespace diblab
