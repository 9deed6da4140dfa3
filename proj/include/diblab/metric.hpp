#pragma once

#include "diblab/family.hpp"
#include "diblab/jet.hpp"

namespace diblab {

// Pointwise curvature data of a Hermitian metric h on the trivial rank-r
// bundle over the total space.  Directions J, K index the packed coordinate
// layout (n base, then m fiber); the lowered curvature block of the Chern
// connection is
//
//   A_{J K} = -d_J d_Kbar h + (d_J h) h^{-1} (d_Kbar h),
//
// an r x r matrix per direction pair, and the assembled (n+m)r square matrix
// with block (J, K) is exactly Hermitian for Hermitian h.
struct MetricFields {
  int n = 0, m = 0, r = 1;
  Point point;
  MatrixJet2 jet;  // Hermitian-symmetrized input jet
  MatrixXcd h;
  MatrixXcd h_inv;
  std::vector<MatrixXcd> gamma;  // connection (d_J h) h^{-1}, unbarred J
  MatrixXcd curv;                // (n+m)r square, block (J, K) = A_{J K}

  MatrixXcd a_block(int J, int K) const {
    return curv.block(static_cast<Eigen::Index>(J) * r,
                      static_cast<Eigen::Index>(K) * r, r, r);
  }
};

MetricFields metric_fields_from_jet(int n, int m, const Point& p, const MatrixJet2& jet);
MetricFields metric_fields(const MatrixField& metric, const Point& p,
                           const FdOptions& opts = {});

// Curvature of the metric contracted through the horizontal lift, the n*r
// square boundary form with block
//
//   (j, k) = A_{t_j t_k} + nu_{j p} A_{z_p t_k} + conj(nu_{k q}) A_{t_j z_q}
//            + nu_{j p} conj(nu_{k q}) A_{z_p z_q}   (sums over p, q).
MatrixXcd horizontal_curvature(const GeometryFields& g, const MetricFields& mf);

// Minimum eigenvalue of the full curvature block matrix; positive exactly
// when the metric is Nakano positive at the point.
double nakano_min_eig_pointwise(const MetricFields& mf);

}  // namespace diblab
