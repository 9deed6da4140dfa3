#include "diblab/positivity.hpp"

#include <Eigen/Eigenvalues>

#include "diblab/quadrature.hpp"

namespace diblab {

Definiteness classify_min_eig(double min_eig, double zero_tol) {
  if (min_eig > zero_tol) return Definiteness::positive;
  if (min_eig >= -zero_tol) return Definiteness::semidefinite;
  return Definiteness::indefinite;
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive: return "positive";
    case Definiteness::semidefinite: return "semidefinite";
    default: return "indefinite";
  }
}

MatrixXcd BlockForm::assemble() const {
  const Eigen::Index u = t1.rows(), v = t4.rows();
  if (t1.cols() != u || t4.cols() != v || t2.rows() != u || t2.cols() != v ||
      t3.rows() != v || t3.cols() != u)
    throw ConfigError("block form shapes are inconsistent");
  MatrixXcd out(u + v, u + v);
  out.topLeftCorner(u, u) = t1;
  out.topRightCorner(u, v) = t2;
  out.bottomLeftCorner(v, u) = t3;
  out.bottomRightCorner(v, v) = t4;
  return out;
}

SchurResult schur_complement(const BlockForm& bf) {
  bf.assemble();  // shape validation
  Eigen::FullPivLU<MatrixXcd> lu(bf.t1);
  if (!lu.isInvertible())
    throw NumericalError("leading block is singular; Schur reduction undefined");
  SchurResult out;
  out.s = bf.t4 - bf.t3 * lu.solve(bf.t2);
  out.min_eig = min_hermitian_eig(out.s);
  out.verdict = classify_min_eig(out.min_eig);
  return out;
}

MatrixXcd fiber_curvature_view(const MetricFields& mf) {
  const Eigen::Index mr = static_cast<Eigen::Index>(mf.m) * mf.r;
  return mf.curv.bottomRightCorner(mr, mr);
}

BTensor solve_B(const MatrixXcd& a_fiber, int m, int r) {
  const Eigen::Index mr = static_cast<Eigen::Index>(m) * r;
  if (a_fiber.rows() != mr || a_fiber.cols() != mr)
    throw ConfigError("fiber curvature view must be (m r) square");
  const double lam = min_hermitian_eig(a_fiber);
  if (!(lam > 0.0))
    throw NumericalError(
        "fiber curvature block is not strictly positive (min eig " +
        std::to_string(lam) + "); the interior estimate hypothesis fails");
  BTensor out;
  out.m = m;
  out.r = r;
  const MatrixXcd id = MatrixXcd::Identity(mr, mr);
  const Eigen::LLT<MatrixXcd> llt(a_fiber);
  if (llt.info() != Eigen::Success)
    throw NumericalError("fiber curvature block factorization failed");
  MatrixXcd inv = llt.solve(id);
  inv += inv * (id - a_fiber * inv);  // one refinement step for ill-conditioned a
  out.b = inv.conjugate();
  out.residual =
      (a_fiber * out.b.transpose() - MatrixXcd::Identity(mr, mr))
          .cwiseAbs()
          .maxCoeff();
  return out;
}

namespace {

// acc[(j,k) blocks] += w * kron(outer, blk) in the (direction, basis) frame
void add_kron(MatrixXcd& acc, int j, int k, int R, int r, double w,
              const MatrixXcd& outer, const MatrixXcd& blk) {
  for (Eigen::Index a = 0; a < outer.rows(); ++a)
    for (Eigen::Index b = 0; b < outer.cols(); ++b)
      acc.block(j * R + a * r, k * R + b * r, r, r) += w * outer(a, b) * blk;
}

}  // namespace

double InteriorBound::margin(const VectorXcd& coeffs) const {
  const Eigen::Index nr = static_cast<Eigen::Index>(n) * basis.size();
  if (coeffs.size() != nr)
    throw ConfigError("tuple coefficient vector has wrong length");
  const Complex v =
      (coeffs.transpose() * (interior_lhs - schur_rhs) * coeffs.conjugate())
          .value();
  return v.real();
}

double InteriorBound::min_margin_eig() const {
  return pencil_min_eig(interior_lhs - schur_rhs, gram, n);
}

InteriorBound interior_bound_check(const FamilySpec& fam, const MatrixField& metric,
                                   const SectionBasis& basis, const VectorXcd& t,
                                   const CurvatureOptions& opts) {
  const CurvatureOperator op = curvature_operator(fam, metric, basis, t, opts);
  const int n = fam.n, m = fam.m, r = basis.r;
  const int R = basis.size();

  InteriorBound out;
  out.basis = basis;
  out.n = n;
  out.gram = op.data.gram;
  out.interior_lhs = op.t1 + op.t2 + op.t3;
  out.schur_rhs = MatrixXcd::Zero(n * R, n * R);

  const QuadratureRule& rule = op.data.rule;
  Point p;
  p.t = t;
  for (int i = 0; i < rule.size(); ++i) {
    p.z = rule.nodes[static_cast<std::size_t>(i)];
    const MetricFields mf = metric_fields(metric, p);
    const BTensor bt = solve_B(fiber_curvature_view(mf), m, r);
    const Eigen::Index nr = static_cast<Eigen::Index>(n) * r;
    const Eigen::Index mr = static_cast<Eigen::Index>(m) * r;
    const MatrixXcd base = mf.curv.topLeftCorner(nr, nr);
    const MatrixXcd mixed = mf.curv.topRightCorner(nr, mr);
    const MatrixXcd reduced =
        base - mixed * bt.b.conjugate() * mixed.adjoint();

    const VectorXcd mono = basis.monomials(p.z);
    const MatrixXcd outer = mono * mono.adjoint();
    const double w = rule.weights[i];
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        add_kron(out.schur_rhs, j, k, R, r, w, outer,
                 reduced.block(static_cast<Eigen::Index>(j) * r,
                               static_cast<Eigen::Index>(k) * r, r, r));
  }
  return out;
}

double nakano_min_eig(const MatrixXcd& pairings, const MatrixXcd& gram, int n) {
  return pencil_min_eig(pairings, gram, n);
}

double trace_constant(const FamilySpec& fam, const VectorXcd& t, int degree,
                      const QuadratureOptions& quad) {
  const SectionBasis basis = SectionBasis::make(fam.m, 1, degree);
  const QuadratureRule irule = interior_rule(fam, t, quad);
  const QuadratureRule brule = boundary_rule(fam, t, quad);
  const std::vector<MatrixXcd> hi(static_cast<std::size_t>(irule.size()),
                                  MatrixXcd::Identity(1, 1));
  const std::vector<MatrixXcd> hb(static_cast<std::size_t>(brule.size()),
                                  MatrixXcd::Identity(1, 1));
  const MatrixXcd gi = gram_matrix(basis, irule, hi);
  const MatrixXcd gb = gram_matrix(basis, brule, hb);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> ges(gb, gi);
  if (ges.info() != Eigen::Success)
    throw NumericalError("trace constant eigensolve failed");
  return ges.eigenvalues().minCoeff();
}

StrictBound strict_lower_bound(const FamilySpec& fam, const MatrixField& metric,
                               const SectionBasis& basis, const VectorXcd& t,
                               const CurvatureOptions& opts) {
  ValidationOptions vopts;
  vopts.strict = true;
  const FamilyReport rep = validate_family(fam, vopts);
  if (!rep.valid) {
    std::string which = "strict family validation failed";
    for (const FamilyCheck& c : rep.checks)
      if (!c.pass) {
        which += ": " + c.name;
        break;
      }
    throw NumericalError(which);
  }

  const CurvatureOperator op = curvature_operator(fam, metric, basis, t, opts);

  StrictBound out;
  out.lambda_min = op.nakano_min_eig();

  const QuadratureRule brule = boundary_rule(fam, t, opts.quad);
  double d1 = std::numeric_limits<double>::infinity();
  double mh = std::numeric_limits<double>::infinity();
  Point p;
  p.t = t;
  for (int i = 0; i < brule.size(); ++i) {
    p.z = brule.nodes[static_cast<std::size_t>(i)];
    const GeometryFields g = geometry_fields(fam, p);
    d1 = std::min(d1, min_hermitian_eig(h0_rho(g)) / g.grad_fiber);
    const MetricFields mf = metric_fields(metric, p);
    mh = std::min(mh, min_hermitian_eig(mf.h));
  }
  out.delta1 = d1;
  out.min_boundary_metric = mh;
  out.delta2 = d1 * mh;
  out.delta3 = trace_constant(fam, t, basis.degree, opts.quad);

  const std::vector<MatrixXcd> h0(
      static_cast<std::size_t>(op.data.rule.size()),
      MatrixXcd::Identity(basis.r, basis.r));
  const MatrixXcd g0 = gram_matrix(basis, op.data.rule, h0);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> ges(g0, op.data.gram);
  if (ges.info() != Eigen::Success)
    throw NumericalError("Gram ratio eigensolve failed");
  out.gram_ratio = ges.eigenvalues().minCoeff();

  out.bound = out.delta2 * out.delta3 * out.gram_ratio;
  out.bound_below_lambda = out.bound <= out.lambda_min;
  return out;
}

}  // namespace diblab
