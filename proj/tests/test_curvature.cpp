#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diblab/curvature.hpp"
#include "diblab/models.hpp"

using namespace diblab;

namespace {

VectorXcd t1v(Complex v) {
  VectorXcd t(1);
  t[0] = v;
  return t;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("disk-in-ball family with flat weight: boundary term carries all") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  const MatrixField flat = make_metric("flat", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 3);

  for (Complex t : {Complex(0.0), Complex(0.3, 0.2), Complex(0.5)}) {
    const CurvatureOperator op = curvature_operator(fam, flat, basis, t1v(t));
    const double u = 1.0 - std::norm(t);
    CAPTURE(t.real());
    CAPTURE(t.imag());

    CHECK(op.t1.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(op.t3.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(op.t2.cwiseAbs().maxCoeff() < 1e-11);  // lift lands inside the span
    for (int a = 0; a <= 3; ++a) {
      const double expect = M_PI * std::pow(u, a - 1);
      CHECK(std::abs(op.total(a, a) - Complex(expect)) < 1e-10);
      for (int b = 0; b < a; ++b) CHECK(std::abs(op.total(a, b)) < 1e-10);
    }
    CHECK(op.herm_residual < 1e-12);

    const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t1v(t));
    for (int a = 0; a <= 3; ++a) {
      CHECK(std::abs(fd.theta[0](a, a) - Complex((a + 1) / (u * u))) <
            1e-6 * (a + 1) / (u * u));
      // oracle noise floor: Gram entries are smooth to ~5e-14, double
      // differencing at h = 1e-3 amplifies that to ~1e-7
      CHECK(std::abs(fd.op(a, a) - Complex(M_PI * std::pow(u, a - 1))) < 5e-7);
    }
    CHECK(compare_operators(curvature_operator(fam, flat, basis, t1v(t)), fd).pass);
  }
}

TEST_CASE("two base directions: mixed blocks match the rank-one closed form") {
  const FamilySpec fam = make_family("hartogs_ball", 2, 1);
  const MatrixField flat = make_metric("flat", 2, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 2);
  VectorXcd t(2);
  t << Complex(0.3, 0.1), Complex(-0.2, 0.25);
  const double u = 1.0 - t.squaredNorm();
  const int R = basis.size();

  const CurvatureOperator op = curvature_operator(fam, flat, basis, t);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b) {
          const Complex expect =
              (a == b) ? M_PI * std::pow(u, a - 1) *
                             ((j == k ? u : 0.0) + std::conj(t[j]) * t[k])
                       : Complex(0.0);
          CHECK(std::abs(op.total(j * R + a, k * R + b) - expect) < 1e-9);
        }

  const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t);
  CHECK(compare_operators(op, fd, 1e-6, 1e-5).pass);
}

TEST_CASE("product family with flat weight is curvature flat on both engines") {
  const FamilySpec fam = make_family("product_disk", 1, 1);
  const MatrixField flat = make_metric("flat", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 3);

  for (Complex t : {Complex(0.0), Complex(0.4, -0.3)}) {
    const CurvatureOperator op = curvature_operator(fam, flat, basis, t1v(t));
    CHECK(op.max_abs_pairing() < 1e-12);
    const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t1v(t));
    CHECK(fd.op.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("product family with gaussian weight: curvature equals the Gram") {
  // G(t) = e^{-|t|^2} G0, so Theta = identity and the pairing matrix is G.
  const FamilySpec fam = make_family("product_disk", 1, 1);
  const MatrixField met = make_metric("gaussian_weight", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 3);
  const VectorXcd t = t1v({0.35, -0.2});

  const CurvatureOperator op = curvature_operator(fam, met, basis, t);
  CHECK((op.total - op.data.gram).cwiseAbs().maxCoeff() < 1e-10);
  // and the split: interior metric curvature carries everything
  CHECK((op.t1 - op.data.gram).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(op.t2.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(op.t4.cwiseAbs().maxCoeff() < 1e-13);

  const FdCurvature fd = curvature_matrix_fd(fam, met, basis, t);
  CHECK((fd.theta[0] - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(compare_operators(op, fd).pass);
}

TEST_CASE("weighted families agree with the differentiated-Gram oracle") {
  SUBCASE("gaussian weight on the shrinking disk, no shear") {
    const FamilySpec fam = make_family("hartogs_ball", 1, 1);
    const MatrixField met = make_metric("gaussian_weight", 1, 1, 1);
    const SectionBasis basis = SectionBasis::make(1, 1, 4);
    const VectorXcd t = t1v({0.3, 0.2});
    const CurvatureOperator op = curvature_operator(fam, met, basis, t);
    CHECK(op.t3.cwiseAbs().maxCoeff() < 1e-13);  // nu is zbar-free here
    CHECK(op.t1.cwiseAbs().maxCoeff() > 1e-3);
    CHECK(op.t2.cwiseAbs().maxCoeff() > 1e-6);
    const FdCurvature fd = curvature_matrix_fd(fam, met, basis, t);
    const EngineComparison cmp = compare_operators(op, fd);
    CAPTURE(cmp.max_abs_diff);
    CHECK(cmp.pass);
  }

  SUBCASE("egg family engages the antiholomorphic shear term") {
    const FamilySpec fam = make_family("egg", 1, 1);
    const MatrixField met = make_metric("gaussian_weight", 1, 1, 1);
    const SectionBasis basis = SectionBasis::make(1, 1, 3);
    const VectorXcd t = t1v({0.25, -0.15});
    const CurvatureOperator op = curvature_operator(fam, met, basis, t);
    CHECK(op.t3.cwiseAbs().maxCoeff() > 1e-6);
    const FdCurvature fd = curvature_matrix_fd(fam, met, basis, t);
    const EngineComparison cmp = compare_operators(op, fd);
    CAPTURE(cmp.max_abs_diff);
    CAPTURE(cmp.tol_at_worst);
    CHECK(cmp.pass);
  }

  SUBCASE("rank-two graded weights") {
    const FamilySpec fam = make_family("hartogs_ball", 1, 1);
    const MatrixField met = make_metric("diag_weights", 1, 1, 2);
    const SectionBasis basis = SectionBasis::make(1, 2, 2);
    const VectorXcd t = t1v({0.2, -0.1});
    const CurvatureOperator op = curvature_operator(fam, met, basis, t);
    const FdCurvature fd = curvature_matrix_fd(fam, met, basis, t);
    const EngineComparison cmp = compare_operators(op, fd);
    CAPTURE(cmp.max_abs_diff);
    CHECK(cmp.pass);
  }
}

TEST_CASE("two-fiber ball with flat weight matches factorial closed forms") {
  QuadratureOptions q;
  q.angular = 8;
  q.radial = 16;
  q.psi = 16;
  CurvatureOptions copts;
  copts.quad = q;
  const FamilySpec fam = make_family("hartogs_ball", 1, 2);
  const MatrixField flat = make_metric("flat", 1, 2, 1);
  const SectionBasis basis = SectionBasis::make(2, 1, 2);
  const Complex t(0.3, -0.2);
  const double R2 = 1.0 - std::norm(t);

  const CurvatureOperator op = curvature_operator(fam, flat, basis, t1v(t), copts);
  for (int i = 0; i < basis.mono_count(); ++i) {
    const int a = basis.alphas[static_cast<std::size_t>(i)][0];
    const int b = basis.alphas[static_cast<std::size_t>(i)][1];
    const double expect = M_PI * M_PI * factorial(a) * factorial(b) *
                          std::pow(R2, a + b) / factorial(a + b + 1);
    CHECK(std::abs(op.total(i, i) - Complex(expect)) < 1e-7);
    for (int l = 0; l < i; ++l) CHECK(std::abs(op.total(i, l)) < 1e-8);
  }

  FdCurvatureOptions fopts;
  fopts.quad = q;
  const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t1v(t), fopts);
  const EngineComparison cmp = compare_operators(op, fd, 2e-5, 1e-4);
  CAPTURE(cmp.max_abs_diff);
  CHECK(cmp.pass);
}

TEST_CASE("cross-check detects a corrupted boundary ingredient") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  const MatrixField flat = make_metric("flat", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 2);
  const VectorXcd t = t1v({0.3, 0.2});

  CurvatureOptions copts;
  copts.boundary_term_scale = 1.01;
  const CurvatureOperator bad = curvature_operator(fam, flat, basis, t, copts);
  const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t);
  CHECK_FALSE(compare_operators(bad, fd).pass);
}

TEST_CASE("section-tuple pairings are linear in the operator matrix") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  const MatrixField met = make_metric("gaussian_weight", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 4);
  const VectorXcd t = t1v({0.3, 0.2});
  const CurvatureOperator op = curvature_operator(fam, met, basis, t);
  const FdCurvature fd = curvature_matrix_fd(fam, met, basis, t);

  Rng rng(99);
  for (int seed = 0; seed < 3; ++seed) {
    const VectorXcd cu = rng.cnormal_vector(basis.size());
    const VectorXcd cv = rng.cnormal_vector(basis.size());
    const Complex a = op.pairing(0, 0, cu, cv);
    const Complex b = fd.pairing(0, 0, cu, cv);
    CHECK(std::abs(a - b) <= std::max(1e-5, 1e-4 * std::abs(b)) * 10.0);
    // Hermitian symmetry of the pairing under swapping the tuple
    CHECK(std::abs(op.pairing(0, 0, cv, cu) - std::conj(a)) < 1e-12);
  }
}

TEST_CASE("frame pencil eigenvalue at the symmetric point") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  const MatrixField flat = make_metric("flat", 1, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 3);
  const CurvatureOperator op = curvature_operator(fam, flat, basis, t1v({0.0, 0.0}));
  // pairings pi vs norms pi/(a+1): Rayleigh quotients are a+1, min 1.
  CHECK(op.nakano_min_eig() == doctest::Approx(1.0).epsilon(1e-8));
  const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t1v({0.0, 0.0}));
  CHECK(fd.nakano_min_eig() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("curvature error paths") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  SUBCASE("basis/metric rank mismatch") {
    CHECK_THROWS_AS(curvature_operator(fam, make_metric("flat", 1, 1, 2),
                                       SectionBasis::make(1, 1, 2), t1v({0.0, 0.0})),
                    ConfigError);
  }
  SUBCASE("fiber dimension mismatch") {
    CHECK_THROWS_AS(curvature_operator(fam, make_metric("flat", 1, 2, 1),
                                       SectionBasis::make(2, 1, 2), t1v({0.0, 0.0})),
                    ConfigError);
  }
  SUBCASE("comparison size mismatch") {
    const MatrixField flat = make_metric("flat", 1, 1, 1);
    const CurvatureOperator op =
        curvature_operator(fam, flat, SectionBasis::make(1, 1, 2), t1v({0.0, 0.0}));
    const FdCurvature fd =
        curvature_matrix_fd(fam, flat, SectionBasis::make(1, 1, 3), t1v({0.0, 0.0}));
    CHECK_THROWS_AS(compare_operators(op, fd), ConfigError);
  }
}

TEST_CASE("comparison table lists every block with both engines") {
  const FamilySpec fam = make_family("hartogs_ball", 2, 1);
  const MatrixField flat = make_metric("flat", 2, 1, 1);
  const SectionBasis basis = SectionBasis::make(1, 1, 2);
  VectorXcd t(2);
  t << Complex(0.2, 0.1), Complex(-0.1, 0.15);
  const CurvatureOperator op = curvature_operator(fam, flat, basis, t);
  const FdCurvature fd = curvature_matrix_fd(fam, flat, basis, t);
  const std::string table = comparison_table(op, fd);
  CHECK(table.rfind("jk\tT1\tT2\tT3\tT4\ttotal\tfd\tabs_err\trel_err\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 4);  // header + n^2
  // the flat family has tiny interior terms and an O(1) boundary term
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string jk;
    double v1, v2, v3, v4, total, fdv, abs_err, rel_err;
    row >> jk >> v1 >> v2 >> v3 >> v4 >> total >> fdv >> abs_err >> rel_err;
    CHECK(v1 < 1e-10);
    CHECK(v3 < 1e-10);
    CHECK(abs_err < 1e-5);
    CHECK(abs_err == doctest::Approx(rel_err * fdv).epsilon(1e-6));
  }
}
