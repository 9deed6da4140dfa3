#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diblab/metric.hpp"
#include "diblab/models.hpp"

using namespace diblab;

namespace {

Point make_point(std::initializer_list<Complex> t, std::initializer_list<Complex> z) {
  Point p;
  p.t.resize(static_cast<Eigen::Index>(t.size()));
  p.z.resize(static_cast<Eigen::Index>(z.size()));
  Eigen::Index i = 0;
  for (Complex v : t) p.t[i++] = v;
  i = 0;
  for (Complex v : z) p.z[i++] = v;
  return p;
}

const Point kP = make_point({Complex(0.3, 0.1)}, {Complex(0.4, -0.2)});

}  // namespace

TEST_CASE("gaussian weight curvature is e^{-phi} times the identity") {
  const MetricFields mf = metric_fields(make_metric("gaussian_weight", 1, 1, 1), kP);
  const double phi = 0.1 + 0.2;
  const double w = std::exp(-phi);

  CHECK((mf.curv - w * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(nakano_min_eig_pointwise(mf) == doctest::Approx(w).epsilon(1e-13));

  // Connection (d_J h) h^{-1} = -phi_J = -conj(w_J) for a scalar weight.
  CHECK(std::abs(mf.gamma[0](0, 0) + std::conj(kP.t[0])) < 1e-14);
  CHECK(std::abs(mf.gamma[1](0, 0) + std::conj(kP.z[0])) < 1e-14);
}

TEST_CASE("reinhardt invariant weight has quartic fiber curvature") {
  const MetricFields mf =
      metric_fields(make_metric("reinhardt_invariant", 1, 1, 1), kP);
  const double zz = 0.2;
  const double phi = 0.1 + zz + 0.5 * zz * zz;
  const double w = std::exp(-phi);

  CHECK(std::abs(mf.curv(0, 0) - Complex(w)) < 1e-14);
  CHECK(std::abs(mf.curv(1, 1) - Complex((1.0 + 2.0 * zz) * w)) < 1e-14);
  CHECK(std::abs(mf.curv(0, 1)) < 1e-14);
  CHECK(std::abs(mf.curv(1, 0)) < 1e-14);
}

TEST_CASE("graded diagonal weights scale curvature per summand") {
  const int r = 3;
  const MetricFields mf = metric_fields(make_metric("diag_weights", 1, 1, r), kP);
  const double phi = 0.1 + 0.2;
  for (int J = 0; J < 2; ++J)
    for (int K = 0; K < 2; ++K) {
      const MatrixXcd blk = mf.a_block(J, K);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          const double expect =
              (J == K && a == b) ? (a + 1) * std::exp(-(a + 1) * phi) : 0.0;
          CHECK(std::abs(blk(a, b) - Complex(expect)) < 1e-13);
        }
    }
  CHECK(nakano_min_eig_pointwise(mf) ==
        doctest::Approx(std::exp(-phi)).epsilon(1e-12));
}

TEST_CASE("flat metric is curvature free") {
  const MetricFields mf = metric_fields(make_metric("flat", 1, 1, 2), kP);
  CHECK(mf.curv.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& gma : mf.gamma) CHECK(gma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(nakano_min_eig_pointwise(mf) == 0.0);
}

TEST_CASE("curvature blocks form an exactly Hermitian matrix") {
  for (const auto& name : metric_names()) {
    const int r = name == "diag_weights" ? 2 : 1;
    const MetricFields mf = metric_fields(make_metric(name, 2, 2, r),
                                          make_point({Complex(0.2, 0.1), Complex(-0.1, 0.3)},
                                                     {Complex(0.3, -0.2), Complex(0.15, 0.25)}));
    CAPTURE(name);
    CHECK((mf.curv - mf.curv.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("finite-difference jets reproduce the analytic curvature") {
  MatrixField met = make_metric("reinhardt_invariant", 1, 1, 1);
  const MetricFields exact = metric_fields(met, kP);
  met.jet = nullptr;  // force the finite-difference route
  const MetricFields fd = metric_fields(met, kP);
  CHECK((exact.curv - fd.curv).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((fd.curv - fd.curv.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("horizontal contraction matches the rank-one closed form") {
  SUBCASE("one base direction") {
    const FamilySpec fam = make_family("hartogs_ball", 1, 1);
    const Point p = make_point({Complex(0.5)}, {Complex(0.6)});
    const GeometryFields g = geometry_fields(fam, p);
    const MetricFields mf = metric_fields(make_metric("gaussian_weight", 1, 1, 1), p);
    const double w = std::exp(-(0.25 + 0.36));
    const MatrixXcd hc = horizontal_curvature(g, mf);
    // A = w * identity over directions, so the contraction is w (1 + |nu|^2).
    CHECK(std::abs(hc(0, 0) - Complex(w * (1.0 + 0.16))) < 1e-13);
  }

  SUBCASE("two base directions, two fibers") {
    const FamilySpec fam = make_family("hartogs_ball", 2, 2);
    const Point p = make_point({Complex(0.2, 0.1), Complex(-0.15, 0.05)},
                               {Complex(0.3, -0.2), Complex(0.1, 0.25)});
    const GeometryFields g = geometry_fields(fam, p);
    const MetricFields mf = metric_fields(make_metric("gaussian_weight", 2, 2, 1), p);
    const double w = std::exp(-(p.t.squaredNorm() + p.z.squaredNorm()));
    const MatrixXcd expect =
        w * (MatrixXcd::Identity(2, 2) + g.nu * g.nu.adjoint());
    const MatrixXcd hc = horizontal_curvature(g, mf);
    CHECK((hc - expect).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((hc - hc.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(min_hermitian_eig(hc) > 0.0);
  }
}

TEST_CASE("metric error paths") {
  SUBCASE("not positive definite") {
    MatrixJet2 jet(2, 1);
    jet.value(0, 0) = Complex(-1.0);
    CHECK_THROWS_AS(metric_fields_from_jet(1, 1, kP, jet), NumericalError);
  }
  SUBCASE("Hermitian violation") {
    MatrixJet2 jet(2, 2);
    jet.value << Complex(1.0), Complex(1e-3), Complex(0.0), Complex(1.0);
    CHECK_THROWS_AS(metric_fields_from_jet(1, 1, kP, jet), NumericalError);
  }
  SUBCASE("dimension mismatches") {
    MatrixJet2 jet(2, 1);
    jet.value(0, 0) = Complex(1.0);
    CHECK_THROWS_AS(metric_fields_from_jet(2, 1, kP, jet), ConfigError);

    const FamilySpec fam = make_family("hartogs_ball", 2, 1);
    const Point p2 = make_point({Complex(0.1), Complex(0.2)}, {Complex(0.3)});
    const GeometryFields g = geometry_fields(fam, p2);
    const MetricFields mf = metric_fields(make_metric("flat", 1, 1, 1), kP);
    CHECK_THROWS_AS(horizontal_curvature(g, mf), ConfigError);
  }
}
