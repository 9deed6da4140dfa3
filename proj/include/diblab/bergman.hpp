#pragma once

#include "diblab/family.hpp"
#include "diblab/quadrature.hpp"

namespace diblab {

// Monomial section basis z^alpha e_lambda with |alpha| <= degree, flattened
// alpha-major (flat = alpha_index * r + lambda).  Multi-indices are listed by
// total degree, lexicographically within a degree.
struct SectionBasis {
  int m = 1, r = 1, degree = 0;
  std::vector<std::vector<int>> alphas;

  static SectionBasis make(int m, int r, int degree);

  int mono_count() const { return static_cast<int>(alphas.size()); }
  int size() const { return mono_count() * r; }
  int flat(int a_idx, int lambda) const { return a_idx * r + lambda; }

  Complex monomial(int a_idx, const VectorXcd& z) const;
  VectorXcd monomials(const VectorXcd& z) const;
  // Values of d z^alpha / d z_p for every alpha.
  VectorXcd monomial_derivs(const VectorXcd& z, int p) const;
};

// A section of the trivial rank-r bundle over one fiber, sampled pointwise.
using SectionFn = std::function<VectorXcd(const VectorXcd&)>;

SectionFn section_from_coeffs(const SectionBasis& basis, const VectorXcd& coeffs);

// Pointwise metric values along a rule; Points are formed from rule.t.
std::vector<MatrixXcd> metric_at_nodes(const MatrixField& metric,
                                       const QuadratureRule& rule);

// Gram matrix G[(a,l)][(b,u)] = sum_i w_i z_i^{alpha_a} conj(z_i^{alpha_b})
// H_i(l, u), optionally with an extra per-node scalar weight.  Hermitian by
// construction; accumulation order is fixed, so entries are reproducible.
MatrixXcd gram_matrix(const SectionBasis& basis, const QuadratureRule& rule,
                      const std::vector<MatrixXcd>& h_at_nodes,
                      const VectorXd* extra_weight = nullptr);

struct BergmanOptions {
  QuadratureOptions quad;
  double cond_cap = 1e12;
};

// Interior Gram data of the truncated space at one base point, with the node
// data retained so that projections reuse the same rule.
struct BergmanData {
  SectionBasis basis;
  VectorXcd t;
  QuadratureRule rule;
  std::vector<MatrixXcd> h_at_nodes;
  MatrixXcd gram;
  MatrixXcd gram_inv;
  double cond = 0.0;
};

BergmanData bergman_data(const FamilySpec& fam, const MatrixField& metric,
                         const SectionBasis& basis, const VectorXcd& t,
                         const BergmanOptions& opts = {});

// Fiberwise L^2 pairing <g1, g2> = int h(g1, g2).
Complex fiber_pairing(const BergmanData& data, const SectionFn& g1, const SectionFn& g2);

// Pairings of g against every basis section: b_j = <g, basis_j>.
VectorXcd basis_pairings(const BergmanData& data, const SectionFn& g);

// Coefficients of the orthogonal projection of g onto the truncated span,
// c = conj(G^{-1}) b.
VectorXcd project_coeffs(const BergmanData& data, const SectionFn& g);

// <pi_perp g1, pi_perp g2> = <g1, g2> - b1^T conj(G^{-1}) conj(b2).
Complex perp_pairing(const BergmanData& data, const SectionFn& g1, const SectionFn& g2);

// Diagonal of the reproducing kernel of the truncated space (rank 1 only):
// K(z, z) = m(z)^T G^{-T} conj(m(z)).
double kernel_diag(const BergmanData& data, const VectorXcd& z);

// Complex Hessian d_z d_zbar log K(z, z) via central differences.
MatrixXcd kernel_log_hessian(const BergmanData& data, const VectorXcd& z,
                             const FdOptions& opts = {});

}  // namespace diblab
