#include "diblab/metric.hpp"

#include <sstream>

namespace diblab {

MetricFields metric_fields_from_jet(int n, int m, const Point& p,
                                    const MatrixJet2& jet_in) {
  if (p.n() != n || p.m() != m) throw ConfigError("point/metric dimension mismatch");
  if (jet_in.ncoord() != n + m)
    throw ConfigError("metric jet has wrong coordinate count");

  MetricFields mf;
  mf.n = n;
  mf.m = m;
  mf.r = jet_in.rank();
  mf.point = p;
  mf.jet = jet_in;
  const double sym = symmetrize_hermitian(mf.jet);
  if (sym > 1e-6) {
    std::ostringstream os;
    os << "metric jet violates Hermitian symmetry by " << sym;
    throw NumericalError(os.str());
  }

  mf.h = mf.jet.value;
  Eigen::LLT<MatrixXcd> llt(mf.h);
  if (llt.info() != Eigen::Success)
    throw NumericalError("fiber metric not positive definite at the sample point");
  mf.h_inv = llt.solve(MatrixXcd::Identity(mf.r, mf.r));

  const int ncoord = n + m;
  mf.gamma.resize(static_cast<std::size_t>(ncoord));
  for (int J = 0; J < ncoord; ++J)
    mf.gamma[static_cast<std::size_t>(J)] = mf.jet.d(Dir{J, false}) * mf.h_inv;

  mf.curv.resize(static_cast<Eigen::Index>(ncoord) * mf.r,
                 static_cast<Eigen::Index>(ncoord) * mf.r);
  for (int J = 0; J < ncoord; ++J)
    for (int K = 0; K < ncoord; ++K) {
      const MatrixXcd& dJ = mf.jet.d(Dir{J, false});
      const MatrixXcd& dKbar = mf.jet.d(Dir{K, true});
      mf.curv.block(static_cast<Eigen::Index>(J) * mf.r,
                    static_cast<Eigen::Index>(K) * mf.r, mf.r, mf.r) =
          -mf.jet.d(Dir{J, false}, Dir{K, true}) + dJ * mf.h_inv * dKbar;
    }
  return mf;
}

MetricFields metric_fields(const MatrixField& metric, const Point& p,
                           const FdOptions& opts) {
  return metric_fields_from_jet(p.n(), p.m(), p, matrix_jet(metric, p, opts));
}

MatrixXcd horizontal_curvature(const GeometryFields& g, const MetricFields& mf) {
  if (g.n != mf.n || g.m != mf.m)
    throw ConfigError("geometry/metric dimension mismatch");
  const int n = g.n, m = g.m, r = mf.r;
  MatrixXcd out(static_cast<Eigen::Index>(n) * r, static_cast<Eigen::Index>(n) * r);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      MatrixXcd blk = mf.a_block(j, k);
      for (int p = 0; p < m; ++p) blk += g.nu(j, p) * mf.a_block(n + p, k);
      for (int q = 0; q < m; ++q) blk += std::conj(g.nu(k, q)) * mf.a_block(j, n + q);
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          blk += g.nu(j, p) * std::conj(g.nu(k, q)) * mf.a_block(n + p, n + q);
      out.block(static_cast<Eigen::Index>(j) * r, static_cast<Eigen::Index>(k) * r, r,
                r) = blk;
    }
  return out;
}

double nakano_min_eig_pointwise(const MetricFields& mf) {
  return min_hermitian_eig(mf.curv);
}

}  // namespace diblab
