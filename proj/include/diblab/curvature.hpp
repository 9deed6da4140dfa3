#pragma once

#include "diblab/bergman.hpp"
#include "diblab/metric.hpp"

namespace diblab {

struct CurvatureOptions {
  QuadratureOptions quad;
  double cond_cap = 1e12;
  // Validation hook: scales the boundary term so the cross-check tests can
  // prove they detect a corrupted ingredient.  1.0 in real runs.
  double boundary_term_scale = 1.0;
  // Assembled blocks must be Hermitian to this residual before symmetrizing.
  double herm_tol = 1e-8;
};

// Frame-matrix form of the curvature pairing at one base point.  Rows and
// columns run over (direction, basis index) pairs, direction-major; entry
// ((j,i),(k,l)) is the pairing of basis section i against basis section l in
// the (j,k) curvature block.  The four contributions are kept separately:
//   t1  horizontal fiber-metric curvature over the fiber
//   t2  projection defect of the lifted derivative (negative semidefinite)
//   t3  antiholomorphic shear of the horizontal lift
//   t4  boundary term weighted by the reduced Hessian over |grad rho|
struct CurvatureOperator {
  int n = 1;
  SectionBasis basis;
  BergmanData data;
  MatrixXcd t1, t2, t3, t4;
  MatrixXcd total;
  double herm_residual = 0.0;

  MatrixXcd block(const MatrixXcd& term, int j, int k) const {
    const int R = basis.size();
    return term.block(static_cast<Eigen::Index>(j) * R,
                      static_cast<Eigen::Index>(k) * R, R, R);
  }
  Complex pairing(int j, int k, const VectorXcd& cu, const VectorXcd& cv) const {
    return (cu.transpose() * block(total, j, k) * cv.conjugate()).value();
  }
  double max_abs_pairing() const { return total.cwiseAbs().maxCoeff(); }
  // Minimum eigenvalue of the pencil (total, I_n (x) G): the smallest
  // curvature Rayleigh quotient over unit-norm frame tensors.
  double nakano_min_eig() const;
};

CurvatureOperator curvature_operator(const FamilySpec& fam, const MatrixField& metric,
                                     const SectionBasis& basis, const VectorXcd& t,
                                     const CurvatureOptions& opts = {});

struct FdCurvatureOptions {
  QuadratureOptions quad;
  double base_step = 1e-3;  // scaled by 1 + |t_coord| per direction
  bool richardson = true;
};

// Independent oracle: curvature blocks from base-differentiated Gram
// matrices, Theta_{jk} = -d_{tbar_k}[(d_{t_j} G) G^{-1}] by central
// differences (one Richardson level by default).  op holds the blocks
// Theta_{jk} G in the same layout as CurvatureOperator::total, so entries of
// the two matrices are directly comparable.
struct FdCurvature {
  int n = 1;
  SectionBasis basis;
  VectorXcd t;
  MatrixXcd gram;
  std::vector<MatrixXcd> theta;  // n*n blocks, theta[j*n + k]
  MatrixXcd op;
  int gram_evals = 0;

  Complex pairing(int j, int k, const VectorXcd& cu, const VectorXcd& cv) const {
    const int R = basis.size();
    return (cu.transpose() * op.block(static_cast<Eigen::Index>(j) * R,
                                      static_cast<Eigen::Index>(k) * R, R, R) *
            cv.conjugate())
        .value();
  }
  double nakano_min_eig() const;
};

FdCurvature curvature_matrix_fd(const FamilySpec& fam, const MatrixField& metric,
                                const SectionBasis& basis, const VectorXcd& t,
                                const FdCurvatureOptions& opts = {});

// Entrywise cross-validation: pass iff |formula - fd| <= max(atol, rtol |fd|)
// everywhere.
struct EngineComparison {
  double max_abs_diff = 0.0;
  double tol_at_worst = 0.0;
  Eigen::Index worst_row = 0, worst_col = 0;
  bool pass = false;
};

EngineComparison compare_operators(const CurvatureOperator& formula,
                                   const FdCurvature& fd, double atol = 1e-5,
                                   double rtol = 1e-4);

// Per-(j,k) text table of both engines: max-abs of each term block, the
// assembled total, the oracle, and their absolute/relative gap.
std::string comparison_table(const CurvatureOperator& formula,
                             const FdCurvature& fd);

// Shared pencil helper: min generalized eigenvalue of (a, I_n (x) gram).
double pencil_min_eig(const MatrixXcd& a, const MatrixXcd& gram, int n);

}  // namespace diblab
