#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diblab/jet.hpp"
#include "diblab/models.hpp"
#include "diblab/types.hpp"

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

double max_coord_mag(const Point& p) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < p.t.size(); ++i) m = std::max(m, std::abs(p.t[i]));
  for (Eigen::Index i = 0; i < p.z.size(); ++i) m = std::max(m, std::abs(p.z[i]));
  return m;
}

// Per-order differences between two jets.
std::array<double, 4> jet_diff_by_order(const ScalarJet3& a, const ScalarJet3& b) {
  std::array<double, 4> d{std::abs(a.value - b.value), 0.0, 0.0, 0.0};
  const int nd = a.ndir();
  for (int u = 0; u < nd; ++u) d[1] = std::max(d[1], std::abs(a.d1[u] - b.d1[u]));
  for (int u = 0; u < nd; ++u)
    for (int v = 0; v < nd; ++v) d[2] = std::max(d[2], std::abs(a.d2(u, v) - b.d2(u, v)));
  for (int u = 0; u < nd; ++u)
    for (int v = 0; v < nd; ++v)
      for (int w = 0; w < nd; ++w)
        d[3] = std::max(d[3], std::abs(a.at3(u, v, w) - b.at3(u, v, w)));
  return d;
}

void check_fd_matches_analytic(const ScalarField& f, const Point& p) {
  const FdOptions opts;
  const ScalarJet3 exact = f.jet(p);
  const ScalarJet3 fd = scalar_jet_fd(f.eval, p, 3, opts);
  const auto diff = jet_diff_by_order(exact, fd);
  const double mag = max_coord_mag(p);
  CHECK(diff[0] == 0.0);
  for (int k = 1; k <= 3; ++k) {
    const double h = fd_step(mag, k, opts);
    CHECK(diff[static_cast<std::size_t>(k)] < 10.0 * h * h);
  }
}

// Random polynomial in (w, wbar) with jets assembled from coordinate jets.
struct Poly {
  struct Term {
    Complex coeff;
    std::vector<int> pow;   // per coordinate
    std::vector<int> bpow;  // per conjugate coordinate
  };
  int ncoord = 0;
  std::vector<Term> terms;

  Complex eval(const Point& p) const {
    const VectorXcd w = p.packed();
    Complex s = 0.0;
    for (const auto& tm : terms) {
      Complex v = tm.coeff;
      for (int c = 0; c < ncoord; ++c) {
        for (int k = 0; k < tm.pow[static_cast<std::size_t>(c)]; ++k) v *= w[c];
        for (int k = 0; k < tm.bpow[static_cast<std::size_t>(c)]; ++k)
          v *= std::conj(w[c]);
      }
      s += v;
    }
    return s;
  }

  ScalarJet3 jet(const Point& p) const {
    const VectorXcd w = p.packed();
    ScalarJet3 s = jet_constant(ncoord, 0.0);
    for (const auto& tm : terms) {
      ScalarJet3 v = jet_constant(ncoord, tm.coeff);
      for (int c = 0; c < ncoord; ++c) {
        for (int k = 0; k < tm.pow[static_cast<std::size_t>(c)]; ++k)
          v = v * jet_coordinate(ncoord, c, false, w[c]);
        for (int k = 0; k < tm.bpow[static_cast<std::size_t>(c)]; ++k)
          v = v * jet_coordinate(ncoord, c, true, w[c]);
      }
      s = s + v;
    }
    return s;
  }

  static Poly random(Rng& rng, int ncoord, int nterms, int max_pow) {
    Poly p;
    p.ncoord = ncoord;
    for (int i = 0; i < nterms; ++i) {
      Term tm;
      tm.coeff = rng.cnormal();
      tm.pow.resize(static_cast<std::size_t>(ncoord));
      tm.bpow.resize(static_cast<std::size_t>(ncoord));
      for (int c = 0; c < ncoord; ++c) {
        tm.pow[static_cast<std::size_t>(c)] =
            static_cast<int>(rng.uniform() * (max_pow + 1));
        tm.bpow[static_cast<std::size_t>(c)] =
            static_cast<int>(rng.uniform() * (max_pow + 1));
      }
      p.terms.push_back(std::move(tm));
    }
    return p;
  }
};

}  // namespace

TEST_CASE("hartogs ball jet matches hand-derived derivatives") {
  const FamilySpec fam = make_family("hartogs_ball", 1, 1);
  const Point p = make_point({Complex(0.5, 0.0)}, {Complex(0.6, 0.0)});
  const ScalarJet3 j = fam.rho.jet(p);

  CHECK(std::abs(j.value - Complex(-0.39)) < 1e-15);
  CHECK(std::abs(j.d(dir_t(0)) - Complex(0.5)) < 1e-15);       // conj(t)
  CHECK(std::abs(j.d(dir_tbar(0)) - Complex(0.5)) < 1e-15);    // t
  CHECK(std::abs(j.d(dir_z(0, 1)) - Complex(0.6)) < 1e-15);    // conj(z)
  CHECK(std::abs(j.d(dir_z(0, 1), dir_zbar(0, 1)) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(j.d(dir_t(0), dir_tbar(0)) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(j.d(dir_t(0), dir_zbar(0, 1))) < 1e-15);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_z(0, 1))) < 1e-15);
  // All third derivatives vanish.
  double worst3 = 0.0;
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v)
      for (int w = 0; w < 4; ++w) worst3 = std::max(worst3, std::abs(j.at3(u, v, w)));
  CHECK(worst3 == 0.0);
}

TEST_CASE("egg jet matches hand-derived derivatives") {
  const FamilySpec fam = make_family("egg", 1, 1);
  const Complex z(0.6, 0.0);
  const Point p = make_point({Complex(0.3, 0.0)}, {z});
  const ScalarJet3 j = fam.rho.jet(p);
  const double s = std::norm(z);

  CHECK(std::abs(j.value - Complex(0.09 + s + s * s - 1.0)) < 1e-15);
  CHECK(std::abs(j.d(dir_z(0, 1)) - std::conj(z) * (1.0 + 2.0 * s)) < 1e-14);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_zbar(0, 1)) - Complex(1.0 + 4.0 * s)) < 1e-14);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_z(0, 1)) - 2.0 * std::conj(z) * std::conj(z)) <
        1e-14);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_z(0, 1), dir_zbar(0, 1)) - 4.0 * std::conj(z)) <
        1e-14);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_z(0, 1), dir_z(0, 1))) < 1e-14);
}

TEST_CASE("annulus jet matches logarithmic closed forms") {
  const FamilySpec fam = make_family("annulus_reinhardt", 1, 1);
  const Complex z(0.7, 0.1);
  const Point p = make_point({Complex(0.2, 0.0)}, {z});
  const ScalarJet3 j = fam.rho.jet(p);

  const double alpha = 2.0 * std::log(0.5), beta = 0.0;
  const double s = std::log(std::norm(z));
  CHECK(std::abs(j.value - Complex((s - alpha) * (s - beta) + 0.25 * 0.04)) < 1e-14);
  // rho_z = (2s - alpha - beta) / z, rho_{z zbar} = 2 / |z|^2.
  CHECK(std::abs(j.d(dir_z(0, 1)) - (2.0 * s - alpha - beta) / z) < 1e-13);
  CHECK(std::abs(j.d(dir_z(0, 1), dir_zbar(0, 1)) - Complex(2.0 / std::norm(z))) <
        1e-13);
  // rho_{z z zbar} = -2 / (z^2 zbar).
  CHECK(std::abs(j.d(dir_z(0, 1), dir_z(0, 1), dir_zbar(0, 1)) -
                 (-2.0 / (z * z * std::conj(z)))) < 1e-12);
}

TEST_CASE("finite-difference jets agree with analytic jets across the catalog") {
  for (const std::string& name : family_names()) {
    const bool ring = (name == "annulus_reinhardt");
    const FamilySpec fam = make_family(name, 1, 1);
    check_fd_matches_analytic(fam.rho,
                              make_point({Complex(0.25, -0.15)},
                                         {ring ? Complex(0.72, 0.05) : Complex(0.4, 0.3)}));
  }
  // Two-dimensional fiber and base.
  const FamilySpec fam22 = make_family("hartogs_ball", 2, 2);
  check_fd_matches_analytic(
      fam22.rho, make_point({Complex(0.2, 0.1), Complex(-0.1, 0.2)},
                            {Complex(0.3, -0.2), Complex(0.25, 0.15)}));
}

TEST_CASE("jets of real fields satisfy conjugation symmetry both routes") {
  const FamilySpec fam = make_family("egg", 1, 1);
  const Point p = make_point({Complex(0.2, 0.3)}, {Complex(0.5, -0.1)});
  CHECK(real_symmetry_residual(fam.rho.jet(p)) < 1e-13);
  // Mirror stencils differ geometrically, so the FD route is symmetric only
  // to truncation order.
  const double h3 = fd_step(max_coord_mag(p), 3, FdOptions{});
  CHECK(real_symmetry_residual(scalar_jet_fd(fam.rho.eval, p, 3)) < 10.0 * h3 * h3);
}

TEST_CASE("product and sum jets obey Leibniz and linearity against FD") {
  Rng rng(31415);
  for (int trial = 0; trial < 4; ++trial) {
    const int ncoord = 2;
    const Poly a = Poly::random(rng, ncoord, 3, 2);
    const Poly b = Poly::random(rng, ncoord, 3, 2);
    const Point p = make_point({Complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))},
                               {Complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))});

    const ScalarJet3 ja = a.jet(p), jb = b.jet(p);
    const ScalarJet3 product = ja * jb;
    const ScalarJet3 sum = ja + jb;

    const ScalarEval prod_eval = [&](const Point& q) { return a.eval(q) * b.eval(q); };
    const ScalarEval sum_eval = [&](const Point& q) { return a.eval(q) + b.eval(q); };

    const FdOptions opts;
    const auto dprod = jet_diff_by_order(product, scalar_jet_fd(prod_eval, p, 3, opts));
    const auto dsum = jet_diff_by_order(sum, scalar_jet_fd(sum_eval, p, 3, opts));
    const double scale =
        1.0 + std::abs(product.value) + product.d1.cwiseAbs().maxCoeff();
    for (int k = 1; k <= 3; ++k) {
      const double h = fd_step(max_coord_mag(p), k, opts);
      CHECK(dprod[static_cast<std::size_t>(k)] < 10.0 * h * h * scale);
      CHECK(dsum[static_cast<std::size_t>(k)] < 10.0 * h * h * scale);
    }
  }
}

TEST_CASE("composition jets: exp and log invert and match FD") {
  const int nc = 2;
  const Point p = make_point({Complex(0.3, 0.2)}, {Complex(0.4, -0.3)});
  const ScalarJet3 u = jet_abs2(nc, 1, p.z[0]) + Complex(0.7);

  const ScalarJet3 round_trip = jet_exp(jet_log(u));
  const auto d = jet_diff_by_order(u, round_trip);
  CHECK(d[0] < 1e-14);
  CHECK(d[1] < 1e-13);
  CHECK(d[2] < 1e-13);
  CHECK(d[3] < 1e-13);

  const ScalarEval expfn = [](const Point& q) { return std::exp(std::norm(q.z[0])); };
  const ScalarJet3 exact = jet_exp(jet_abs2(nc, 1, p.z[0]));
  const auto dfd = jet_diff_by_order(exact, scalar_jet_fd(expfn, p, 3));
  const FdOptions opts;
  for (int k = 1; k <= 3; ++k) {
    const double h = fd_step(max_coord_mag(p), k, opts);
    CHECK(dfd[static_cast<std::size_t>(k)] < 10.0 * h * h);
  }
}

TEST_CASE("fd_step enforces the per-order roundoff floor") {
  const FdOptions opts;
  CHECK(fd_step(0.0, 1, opts) == doctest::Approx(1e-4));
  CHECK(fd_step(0.0, 2, opts) > fd_step(0.0, 1, opts));
  CHECK(fd_step(0.0, 3, opts) > fd_step(0.0, 2, opts));
  CHECK(fd_step(1.0, 1, opts) == doctest::Approx(2e-4));
}

TEST_CASE("metric catalog jets match FD and stay Hermitian pd") {
  for (const std::string& name : metric_names()) {
    const int r = (name == "diag_weights") ? 2 : 1;
    const MatrixField h = make_metric(name, 1, 1, r);
    const Point p = make_point({Complex(0.2, 0.1)}, {Complex(0.4, -0.2)});

    const MatrixJet2 exact = h.jet(p);
    CHECK(hermitian_symmetry_residual(exact) < 1e-13);
    CHECK(min_hermitian_eig(exact.value) > 0.0);

    const MatrixJet2 fd = matrix_jet_fd(h.eval, r, p);
    const FdOptions opts;
    double d1 = 0.0, d2 = 0.0;
    for (int u = 0; u < 4; ++u) {
      d1 = std::max(d1, (exact.at1(u) - fd.at1(u)).cwiseAbs().maxCoeff());
      for (int v = 0; v < 4; ++v)
        d2 = std::max(d2, (exact.at2(u, v) - fd.at2(u, v)).cwiseAbs().maxCoeff());
    }
    const double h1 = fd_step(0.45, 1, opts), h2 = fd_step(0.45, 2, opts);
    CHECK(d1 < 10.0 * h1 * h1);
    CHECK(d2 < 10.0 * h2 * h2);
  }
}

TEST_CASE("jet error paths") {
  CHECK_THROWS_AS(scalar_jet(ScalarField{}, make_point({Complex(0.0)}, {Complex(0.0)})),
                  ConfigError);
  CHECK_THROWS_AS(jet_log(jet_constant(2, 0.0)), NumericalError);
  CHECK_THROWS_AS(make_family("no_such_family"), ConfigError);
  CHECK_THROWS_AS(make_metric("no_such_metric", 1, 1, 1), ConfigError);
}
