#include "diblab/curvature.hpp"

#include <cstring>
#include <map>
#include <sstream>

namespace diblab {

namespace {

// dst (R x R, flat (a,l)) += w * outerA(a,b) * hr(l,u)
void add_kron(MatrixXcd& dst, const MatrixXcd& outer_a, const MatrixXcd& hr,
              Complex w) {
  const int A = static_cast<int>(outer_a.rows());
  const int r = static_cast<int>(hr.rows());
  if (r == 1) {
    dst.noalias() += (w * hr(0, 0)) * outer_a;
    return;
  }
  for (int a = 0; a < A; ++a)
    for (int b = 0; b < A; ++b)
      dst.block(static_cast<Eigen::Index>(a) * r, static_cast<Eigen::Index>(b) * r, r,
                r) += (w * outer_a(a, b)) * hr;
}

}  // namespace

double pencil_min_eig(const MatrixXcd& a, const MatrixXcd& gram, int n) {
  const Eigen::Index R = gram.rows();
  MatrixXcd b = MatrixXcd::Zero(static_cast<Eigen::Index>(n) * R,
                                static_cast<Eigen::Index>(n) * R);
  for (int j = 0; j < n; ++j)
    b.block(static_cast<Eigen::Index>(j) * R, static_cast<Eigen::Index>(j) * R, R, R) =
        gram;
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a + a.adjoint()), b);
  if (es.info() != Eigen::Success)
    throw NumericalError("generalized eigensolver failed on the curvature pencil");
  return es.eigenvalues().minCoeff();
}

double CurvatureOperator::nakano_min_eig() const {
  return pencil_min_eig(total, data.gram, n);
}

double FdCurvature::nakano_min_eig() const { return pencil_min_eig(op, gram, n); }

CurvatureOperator curvature_operator(const FamilySpec& fam, const MatrixField& metric,
                                     const SectionBasis& basis, const VectorXcd& t,
                                     const CurvatureOptions& opts) {
  const int n = fam.n, m = fam.m, r = basis.r, A = basis.mono_count();
  const int R = basis.size();
  if (basis.m != m) throw ConfigError("basis fiber dimension mismatch");
  if (metric.rank != r) throw ConfigError("metric rank does not match basis rank");

  CurvatureOperator out;
  out.n = n;
  out.basis = basis;
  {
    BergmanOptions bopts;
    bopts.quad = opts.quad;
    bopts.cond_cap = opts.cond_cap;
    out.data = bergman_data(fam, metric, basis, t, bopts);
  }
  const BergmanData& data = out.data;
  const MatrixXcd gram_inv_conj = data.gram_inv.conjugate();

  std::vector<MatrixXcd> t1blk(static_cast<std::size_t>(n) * n, MatrixXcd::Zero(R, R));
  std::vector<MatrixXcd> t3blk(static_cast<std::size_t>(n) * n, MatrixXcd::Zero(R, R));
  // <L_j e_i, L_k e_l> and the basis pairings of every L_j e_i.
  std::vector<MatrixXcd> lu_gram(static_cast<std::size_t>(n) * n,
                                 MatrixXcd::Zero(R, R));
  std::vector<MatrixXcd> lu_rhs(static_cast<std::size_t>(n), MatrixXcd::Zero(R, R));

  Point p;
  p.t = t;
  for (std::size_t i = 0; i < data.rule.nodes.size(); ++i) {
    p.z = data.rule.nodes[i];
    const double w = data.rule.weights[static_cast<Eigen::Index>(i)];
    const GeometryFields g = geometry_fields(fam, p);
    const MetricFields mf = metric_fields(metric, p);
    const MatrixXcd hc = horizontal_curvature(g, mf);
    const MatrixXcd& H = data.h_at_nodes[i];

    const VectorXcd mono = basis.monomials(p.z);
    const MatrixXcd outer = mono * mono.adjoint();
    std::vector<VectorXcd> dmono(static_cast<std::size_t>(m));
    for (int q = 0; q < m; ++q)
      dmono[static_cast<std::size_t>(q)] = basis.monomial_derivs(p.z, q);

    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        add_kron(t1blk[static_cast<std::size_t>(j) * n + k], outer,
                 hc.block(static_cast<Eigen::Index>(j) * r,
                          static_cast<Eigen::Index>(k) * r, r, r),
                 Complex(w));
        Complex tau(0.0);
        for (int pp = 0; pp < m; ++pp)
          for (int q = 0; q < m; ++q)
            tau += g.dnu_dir(dir_zbar(q, n))(j, pp) *
                   std::conj(g.dnu_dir(dir_zbar(pp, n))(k, q));
        if (tau != Complex(0.0))
          add_kron(t3blk[static_cast<std::size_t>(j) * n + k], outer, H, w * tau);
      }

    // Lifted derivative of every basis section at this node, as an r x R
    // matrix per direction: column (a, u) holds L_j (z^alpha_a e_u).
    std::vector<MatrixXcd> lmat(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      Complex divnu(0.0);
      for (int q = 0; q < m; ++q) divnu += g.dnu_dir(dir_z(q, n))(j, q);
      MatrixXcd pre = mf.gamma[static_cast<std::size_t>(j)].transpose() +
                      divnu * MatrixXcd::Identity(r, r);
      for (int q = 0; q < m; ++q)
        pre += g.nu(j, q) * mf.gamma[static_cast<std::size_t>(n + q)].transpose();

      MatrixXcd lm(r, R);
      for (int a = 0; a < A; ++a) {
        Complex nd(0.0);
        for (int q = 0; q < m; ++q) nd += g.nu(j, q) * dmono[static_cast<std::size_t>(q)][a];
        lm.block(0, static_cast<Eigen::Index>(a) * r, r, r) =
            mono[a] * pre + nd * MatrixXcd::Identity(r, r);
      }
      lmat[static_cast<std::size_t>(j)] = std::move(lm);
    }

    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k)
        lu_gram[static_cast<std::size_t>(j) * n + k].noalias() +=
            w * (lmat[static_cast<std::size_t>(j)].transpose() * H *
                 lmat[static_cast<std::size_t>(k)].conjugate());
      // b rows: <L_j e_col, basis_(b,u)> = sum_i w conj(mono_b) (H^T L_j e_col)_u
      const MatrixXcd hb = H.transpose() * lmat[static_cast<std::size_t>(j)];
      for (int b = 0; b < A; ++b)
        lu_rhs[static_cast<std::size_t>(j)].middleRows(static_cast<Eigen::Index>(b) * r,
                                                       r) +=
            (w * std::conj(mono[b])) * hb;
    }
  }

  // Boundary term.
  std::vector<MatrixXcd> t4blk(static_cast<std::size_t>(n) * n, MatrixXcd::Zero(R, R));
  {
    const QuadratureRule brule = boundary_rule(fam, t, opts.quad);
    const auto h_bd = metric_at_nodes(metric, brule);
    for (std::size_t i = 0; i < brule.nodes.size(); ++i) {
      p.z = brule.nodes[i];
      const GeometryFields g = geometry_fields(fam, p);
      const MatrixXcd hr = h_rho(g);
      const VectorXcd mono = basis.monomials(p.z);
      const MatrixXcd outer = mono * mono.adjoint();
      const double w = brule.weights[static_cast<Eigen::Index>(i)] / g.grad_fiber;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          add_kron(t4blk[static_cast<std::size_t>(j) * n + k], outer, h_bd[i],
                   w * hr(j, k));
    }
  }

  const Eigen::Index NR = static_cast<Eigen::Index>(n) * R;
  out.t1.setZero(NR, NR);
  out.t2.setZero(NR, NR);
  out.t3.setZero(NR, NR);
  out.t4.setZero(NR, NR);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Eigen::Index rj = static_cast<Eigen::Index>(j) * R;
      const Eigen::Index ck = static_cast<Eigen::Index>(k) * R;
      out.t1.block(rj, ck, R, R) = t1blk[static_cast<std::size_t>(j) * n + k];
      out.t3.block(rj, ck, R, R) = t3blk[static_cast<std::size_t>(j) * n + k];
      out.t4.block(rj, ck, R, R) =
          opts.boundary_term_scale * t4blk[static_cast<std::size_t>(j) * n + k];
      out.t2.block(rj, ck, R, R) =
          -lu_gram[static_cast<std::size_t>(j) * n + k] +
          lu_rhs[static_cast<std::size_t>(j)].transpose() * gram_inv_conj *
              lu_rhs[static_cast<std::size_t>(k)].conjugate();
    }

  out.total = out.t1 + out.t2 + out.t3 + out.t4;
  const double scale = std::max(1.0, out.total.cwiseAbs().maxCoeff());
  out.herm_residual = (out.total - out.total.adjoint()).cwiseAbs().maxCoeff() / scale;
  if (out.herm_residual > opts.herm_tol) {
    std::ostringstream os;
    os << "curvature blocks lost Hermitian symmetry (residual " << out.herm_residual
       << ")";
    throw NumericalError(os.str());
  }
  out.total = 0.5 * (out.total + out.total.adjoint()).eval();
  return out;
}

namespace {

class GramCache {
 public:
  GramCache(const FamilySpec& fam, const MatrixField& metric,
            const SectionBasis& basis, const QuadratureOptions& quad)
      : fam_(fam), metric_(metric), basis_(basis), quad_(quad) {}

  const MatrixXcd& at(const VectorXcd& t) {
    std::string key(reinterpret_cast<const char*>(t.data()),
                    static_cast<std::size_t>(t.size()) * sizeof(Complex));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const QuadratureRule rule = interior_rule(fam_, t, quad_);
    MatrixXcd g = gram_matrix(basis_, rule, metric_at_nodes(metric_, rule));
    ++evals_;
    return cache_.emplace(std::move(key), std::move(g)).first->second;
  }

  int evals() const { return evals_; }

 private:
  const FamilySpec& fam_;
  const MatrixField& metric_;
  const SectionBasis& basis_;
  QuadratureOptions quad_;
  std::map<std::string, MatrixXcd> cache_;
  int evals_ = 0;
};

}  // namespace

FdCurvature curvature_matrix_fd(const FamilySpec& fam, const MatrixField& metric,
                                const SectionBasis& basis, const VectorXcd& t,
                                const FdCurvatureOptions& opts) {
  const int n = fam.n;
  const int R = basis.size();
  FdCurvature out;
  out.n = n;
  out.basis = basis;
  out.t = t;

  GramCache cache(fam, metric, basis, opts.quad);
  out.gram = cache.at(t);
  {
    Eigen::LLT<MatrixXcd> llt(out.gram);
    if (llt.info() != Eigen::Success)
      throw NumericalError("Gram matrix not positive definite at the base point");
  }

  auto shifted = [&](const VectorXcd& tc, int coord, Complex dw) {
    VectorXcd ts = tc;
    ts[coord] += dw;
    return ts;
  };

  // dG/dt_j at tc by central Wirtinger differences with step h.
  auto d_gram = [&](const VectorXcd& tc, int j, double h) -> MatrixXcd {
    const MatrixXcd gx =
        (cache.at(shifted(tc, j, {h, 0.0})) - cache.at(shifted(tc, j, {-h, 0.0}))) /
        (2.0 * h);
    const MatrixXcd gy =
        (cache.at(shifted(tc, j, {0.0, h})) - cache.at(shifted(tc, j, {0.0, -h}))) /
        (2.0 * h);
    return 0.5 * (gx - I * gy);
  };

  auto connection = [&](const VectorXcd& tc, int j, double h) -> MatrixXcd {
    Eigen::LLT<MatrixXcd> llt(cache.at(tc));
    if (llt.info() != Eigen::Success)
      throw NumericalError("Gram matrix not positive definite at a stencil point");
    // (dG) G^{-1} computed as solve on the right: X = dG G^{-1}.
    return llt.solve(d_gram(tc, j, h).adjoint()).adjoint();
  };

  auto theta_step = [&](int j, int k, double scale) -> MatrixXcd {
    const double hj = opts.base_step * (1.0 + std::abs(t[j])) * scale;
    const double hk = opts.base_step * (1.0 + std::abs(t[k])) * scale;
    const MatrixXcd px = (connection(shifted(t, k, {hk, 0.0}), j, hj) -
                          connection(shifted(t, k, {-hk, 0.0}), j, hj)) /
                         (2.0 * hk);
    const MatrixXcd py = (connection(shifted(t, k, {0.0, hk}), j, hj) -
                          connection(shifted(t, k, {0.0, -hk}), j, hj)) /
                         (2.0 * hk);
    return -0.5 * (px + I * py);
  };

  out.theta.resize(static_cast<std::size_t>(n) * n);
  out.op.setZero(static_cast<Eigen::Index>(n) * R, static_cast<Eigen::Index>(n) * R);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      MatrixXcd th = theta_step(j, k, 1.0);
      if (opts.richardson) th = (4.0 * theta_step(j, k, 0.5) - th) / 3.0;
      out.theta[static_cast<std::size_t>(j) * n + k] = th;
      out.op.block(static_cast<Eigen::Index>(j) * R, static_cast<Eigen::Index>(k) * R,
                   R, R) = th * out.gram;
    }
  out.gram_evals = cache.evals();
  return out;
}

EngineComparison compare_operators(const CurvatureOperator& formula,
                                   const FdCurvature& fd, double atol, double rtol) {
  if (formula.total.rows() != fd.op.rows())
    throw ConfigError("operator size mismatch in engine comparison");
  EngineComparison cmp;
  cmp.pass = true;
  double worst_margin = -1e300;
  for (Eigen::Index i = 0; i < formula.total.rows(); ++i)
    for (Eigen::Index j = 0; j < formula.total.cols(); ++j) {
      const double diff = std::abs(formula.total(i, j) - fd.op(i, j));
      const double tol = std::max(atol, rtol * std::abs(fd.op(i, j)));
      if (diff > tol) cmp.pass = false;
      const double margin = diff - tol;
      if (margin > worst_margin) {
        worst_margin = margin;
        cmp.max_abs_diff = diff;
        cmp.tol_at_worst = tol;
        cmp.worst_row = i;
        cmp.worst_col = j;
      }
    }
  return cmp;
}

std::string comparison_table(const CurvatureOperator& formula, const FdCurvature& fd) {
  if (formula.total.rows() != fd.op.rows())
    throw ConfigError("operator size mismatch in engine comparison");
  const int R = formula.basis.size();
  std::ostringstream os;
  os << "jk\tT1\tT2\tT3\tT4\ttotal\tfd\tabs_err\trel_err\n";
  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "\t%.6e", v);
    os << buf;
  };
  for (int j = 0; j < formula.n; ++j)
    for (int k = 0; k < formula.n; ++k) {
      const MatrixXcd fd_blk = fd.op.block(static_cast<Eigen::Index>(j) * R,
                                           static_cast<Eigen::Index>(k) * R, R, R);
      const double total_max = formula.block(formula.total, j, k).cwiseAbs().maxCoeff();
      const double fd_max = fd_blk.cwiseAbs().maxCoeff();
      const double abs_err =
          (formula.block(formula.total, j, k) - fd_blk).cwiseAbs().maxCoeff();
      os << j << k;
      put(formula.block(formula.t1, j, k).cwiseAbs().maxCoeff());
      put(formula.block(formula.t2, j, k).cwiseAbs().maxCoeff());
      put(formula.block(formula.t3, j, k).cwiseAbs().maxCoeff());
      put(formula.block(formula.t4, j, k).cwiseAbs().maxCoeff());
      put(total_max);
      put(fd_max);
      put(abs_err);
      put(abs_err / std::max(fd_max, 1e-300));
      os << "\n";
    }
  return os.str();
}

}  // namespace diblab
