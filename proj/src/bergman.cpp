#include "diblab/bergman.hpp"

#include <sstream>

namespace diblab {

namespace {

void enumerate_alphas(int m, int degree, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out, int remaining) {
  if (static_cast<int>(cur.size()) == m) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur.push_back(k);
    enumerate_alphas(m, degree, cur, out, remaining - k);
    cur.pop_back();
  }
}

}  // namespace

SectionBasis SectionBasis::make(int m, int r, int degree) {
  if (m < 1 || r < 1 || degree < 0) throw ConfigError("bad basis parameters");
  SectionBasis b;
  b.m = m;
  b.r = r;
  b.degree = degree;
  for (int total = 0; total <= degree; ++total) {
    std::vector<int> cur;
    enumerate_alphas(m, degree, cur, b.alphas, total);
  }
  return b;
}

Complex SectionBasis::monomial(int a_idx, const VectorXcd& z) const {
  Complex v = 1.0;
  for (int p = 0; p < m; ++p)
    for (int k = 0; k < alphas[static_cast<std::size_t>(a_idx)][static_cast<std::size_t>(p)]; ++k)
      v *= z[p];
  return v;
}

VectorXcd SectionBasis::monomials(const VectorXcd& z) const {
  // Powers per coordinate up to the basis degree, then products per index.
  std::vector<std::vector<Complex>> pw(static_cast<std::size_t>(m));
  for (int p = 0; p < m; ++p) {
    pw[static_cast<std::size_t>(p)].resize(static_cast<std::size_t>(degree) + 1);
    pw[static_cast<std::size_t>(p)][0] = 1.0;
    for (int k = 1; k <= degree; ++k)
      pw[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] =
          pw[static_cast<std::size_t>(p)][static_cast<std::size_t>(k - 1)] * z[p];
  }
  VectorXcd out(mono_count());
  for (int a = 0; a < mono_count(); ++a) {
    Complex v = 1.0;
    for (int p = 0; p < m; ++p)
      v *= pw[static_cast<std::size_t>(p)]
             [static_cast<std::size_t>(alphas[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)])];
    out[a] = v;
  }
  return out;
}

VectorXcd SectionBasis::monomial_derivs(const VectorXcd& z, int p) const {
  VectorXcd out = VectorXcd::Zero(mono_count());
  for (int a = 0; a < mono_count(); ++a) {
    const auto& alpha = alphas[static_cast<std::size_t>(a)];
    const int k = alpha[static_cast<std::size_t>(p)];
    if (k == 0) continue;
    Complex v(static_cast<double>(k));
    for (int q = 0; q < m; ++q) {
      const int e = alpha[static_cast<std::size_t>(q)] - (q == p ? 1 : 0);
      for (int it = 0; it < e; ++it) v *= z[q];
    }
    out[a] = v;
  }
  return out;
}

SectionFn section_from_coeffs(const SectionBasis& basis, const VectorXcd& coeffs) {
  if (coeffs.size() != basis.size()) throw ConfigError("coefficient size mismatch");
  return [basis, coeffs](const VectorXcd& z) {
    const VectorXcd mono = basis.monomials(z);
    VectorXcd g = VectorXcd::Zero(basis.r);
    for (int a = 0; a < basis.mono_count(); ++a)
      for (int l = 0; l < basis.r; ++l) g[l] += coeffs[basis.flat(a, l)] * mono[a];
    return g;
  };
}

std::vector<MatrixXcd> metric_at_nodes(const MatrixField& metric,
                                       const QuadratureRule& rule) {
  std::vector<MatrixXcd> h;
  h.reserve(rule.nodes.size());
  Point p;
  p.t = rule.t;
  for (const auto& z : rule.nodes) {
    p.z = z;
    h.push_back(metric.eval(p));
  }
  return h;
}

MatrixXcd gram_matrix(const SectionBasis& basis, const QuadratureRule& rule,
                      const std::vector<MatrixXcd>& h_at_nodes,
                      const VectorXd* extra_weight) {
  if (h_at_nodes.size() != rule.nodes.size())
    throw ConfigError("metric samples do not match the rule");
  const int A = basis.mono_count(), r = basis.r;
  MatrixXcd G = MatrixXcd::Zero(basis.size(), basis.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[static_cast<Eigen::Index>(i)] *
                     (extra_weight ? (*extra_weight)[static_cast<Eigen::Index>(i)] : 1.0);
    const VectorXcd mono = basis.monomials(rule.nodes[i]);
    const MatrixXcd& H = h_at_nodes[i];
    if (r == 1) {
      G.noalias() += (w * H(0, 0)) * (mono * mono.adjoint());
    } else {
      for (int a = 0; a < A; ++a)
        for (int b = 0; b < A; ++b)
          G.block(static_cast<Eigen::Index>(a) * r, static_cast<Eigen::Index>(b) * r,
                  r, r) += (w * mono[a] * std::conj(mono[b])) * H;
    }
  }
  return G;
}

BergmanData bergman_data(const FamilySpec& fam, const MatrixField& metric,
                         const SectionBasis& basis, const VectorXcd& t,
                         const BergmanOptions& opts) {
  if (basis.m != fam.m) throw ConfigError("basis fiber dimension mismatch");
  BergmanData data;
  data.basis = basis;
  data.t = t;
  data.rule = interior_rule(fam, t, opts.quad);
  data.h_at_nodes = metric_at_nodes(metric, data.rule);
  data.gram = gram_matrix(basis, data.rule, data.h_at_nodes);

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(data.gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "Gram matrix not positive definite (min eigenvalue " << lo << ")";
    throw NumericalError(os.str());
  }
  data.cond = hi / lo;
  if (data.cond > opts.cond_cap) {
    std::ostringstream os;
    os << "Gram condition " << data.cond << " exceeds cap " << opts.cond_cap;
    throw NumericalError(os.str());
  }
  data.gram_inv = es.eigenvectors() *
                  es.eigenvalues().cwiseInverse().asDiagonal() *
                  es.eigenvectors().adjoint();
  return data;
}

Complex fiber_pairing(const BergmanData& data, const SectionFn& g1,
                      const SectionFn& g2) {
  std::vector<Complex> terms(data.rule.nodes.size());
  for (std::size_t i = 0; i < data.rule.nodes.size(); ++i) {
    const VectorXcd a = g1(data.rule.nodes[i]);
    const VectorXcd b = g2(data.rule.nodes[i]);
    terms[i] = data.rule.weights[static_cast<Eigen::Index>(i)] *
               (a.transpose() * data.h_at_nodes[i] * b.conjugate()).value();
  }
  return pairwise_sum(std::span<Complex>(terms));
}

VectorXcd basis_pairings(const BergmanData& data, const SectionFn& g) {
  const int A = data.basis.mono_count(), r = data.basis.r;
  const std::size_t nn = data.rule.nodes.size();
  // Per-node contributions kept whole so each component is pairwise-summed in
  // the same fixed tree order as scalar integrals.
  MatrixXcd terms(static_cast<Eigen::Index>(nn), data.basis.size());
  for (std::size_t i = 0; i < nn; ++i) {
    const double w = data.rule.weights[static_cast<Eigen::Index>(i)];
    const VectorXcd mono = data.basis.monomials(data.rule.nodes[i]);
    const VectorXcd v = data.h_at_nodes[i].transpose() * g(data.rule.nodes[i]);
    for (int a = 0; a < A; ++a)
      for (int l = 0; l < r; ++l)
        terms(static_cast<Eigen::Index>(i), data.basis.flat(a, l)) =
            w * std::conj(mono[a]) * v[l];
  }
  VectorXcd out(data.basis.size());
  std::vector<Complex> col(nn);
  for (int j = 0; j < data.basis.size(); ++j) {
    for (std::size_t i = 0; i < nn; ++i) col[i] = terms(static_cast<Eigen::Index>(i), j);
    out[j] = pairwise_sum(std::span<Complex>(col));
  }
  return out;
}

VectorXcd project_coeffs(const BergmanData& data, const SectionFn& g) {
  return data.gram_inv.conjugate() * basis_pairings(data, g);
}

Complex perp_pairing(const BergmanData& data, const SectionFn& g1,
                     const SectionFn& g2) {
  const VectorXcd b1 = basis_pairings(data, g1);
  const VectorXcd b2 = basis_pairings(data, g2);
  return fiber_pairing(data, g1, g2) -
         (b1.transpose() * data.gram_inv.conjugate() * b2.conjugate()).value();
}

double kernel_diag(const BergmanData& data, const VectorXcd& z) {
  if (data.basis.r != 1)
    throw ConfigError("kernel diagonal implemented for rank 1 only");
  const VectorXcd mono = data.basis.monomials(z);
  return (mono.transpose() * data.gram_inv.transpose() * mono.conjugate())
      .value()
      .real();
}

MatrixXcd kernel_log_hessian(const BergmanData& data, const VectorXcd& z,
                             const FdOptions& opts) {
  const int m = data.basis.m;
  const int n = static_cast<int>(data.t.size());
  auto f = [&](const Point& p) { return Complex(std::log(kernel_diag(data, p.z))); };
  Point p;
  p.t = data.t;
  p.z = z;
  MatrixXcd hess(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const std::array<Dir, 2> dirs{dir_z(a, n), dir_zbar(b, n)};
      hess(a, b) = wirtinger_fd(f, p, dirs, opts);
    }
  return 0.5 * (hess + hess.adjoint());
}

}  // namespace diblab
