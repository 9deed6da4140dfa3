#include "diblab/models.hpp"

#include <cmath>

namespace diblab {

namespace {

// Annulus parameters: ring a < |z| < b at t = 0, shrinking with c|t|^2.
constexpr double kRingA = 0.5;
constexpr double kRingB = 1.0;
constexpr double kRingC = 0.25;

ScalarJet3 base_abs2_jet(const Point& p) {
  const int nc = p.n() + p.m();
  ScalarJet3 s = jet_constant(nc, 0.0);
  for (int j = 0; j < p.n(); ++j) s = s + jet_abs2(nc, j, p.t[j]);
  return s;
}

ScalarJet3 fiber_abs2_jet(const Point& p) {
  const int nc = p.n() + p.m();
  ScalarJet3 s = jet_constant(nc, 0.0);
  for (int q = 0; q < p.m(); ++q) s = s + jet_abs2(nc, p.n() + q, p.z[q]);
  return s;
}

FamilySpec base_spec(std::string name, int n, int m) {
  FamilySpec fam;
  fam.name = std::move(name);
  fam.n = n;
  fam.m = m;
  fam.star_center = [m](const VectorXcd&) { return VectorXcd::Zero(m).eval(); };
  return fam;
}

void check_dims(const std::string& name, int n, int m, int max_m = 2) {
  if (n < 1 || n > 2 || m < 1 || m > max_m)
    throw ConfigError("family " + name + " supports n in {1,2}, m in {1," +
                      std::to_string(max_m) + "}");
}

}  // namespace

FamilySpec make_family(const std::string& name, int n, int m) {
  if (name == "hartogs_ball") {
    check_dims(name, n, m);
    FamilySpec fam = base_spec(name, n, m);
    fam.reinhardt = true;
    fam.bounding_radius = 1.1;
    fam.t_radius = 0.9;
    fam.rho.eval = [](const Point& p) {
      return Complex(p.t.squaredNorm() + p.z.squaredNorm() - 1.0);
    };
    fam.rho.jet = [](const Point& p) {
      return base_abs2_jet(p) + fiber_abs2_jet(p) + Complex(-1.0);
    };
    return fam;
  }

  if (name == "product_disk") {
    check_dims(name, n, m);
    FamilySpec fam = base_spec(name, n, m);
    fam.reinhardt = true;
    fam.bounding_radius = 1.1;
    fam.t_radius = 1.0;
    fam.rho.eval = [](const Point& p) { return Complex(p.z.squaredNorm() - 1.0); };
    fam.rho.jet = [](const Point& p) { return fiber_abs2_jet(p) + Complex(-1.0); };
    return fam;
  }

  if (name == "egg") {
    check_dims(name, n, m);
    FamilySpec fam = base_spec(name, n, m);
    fam.reinhardt = true;
    fam.bounding_radius = 1.0;
    fam.t_radius = 0.9;
    fam.rho.eval = [](const Point& p) {
      const double s = p.z.squaredNorm();
      return Complex(p.t.squaredNorm() + s + s * s - 1.0);
    };
    fam.rho.jet = [](const Point& p) {
      const ScalarJet3 s = fiber_abs2_jet(p);
      return base_abs2_jet(p) + s + s * s + Complex(-1.0);
    };
    return fam;
  }

  if (name == "annulus_reinhardt") {
    check_dims(name, n, m, 1);
    FamilySpec fam = base_spec(name, n, m);
    fam.reinhardt = true;
    fam.annular = true;
    fam.ray_scan_start = 0.1;
    fam.bounding_radius = 1.1;
    fam.t_radius = 0.8;
    const double alpha = 2.0 * std::log(kRingA);
    const double beta = 2.0 * std::log(kRingB);
    fam.rho.eval = [alpha, beta](const Point& p) {
      const double u = std::norm(p.z[0]);
      if (u < 1e-300) return Complex(1e300);
      const double s = std::log(u);
      return Complex((s - alpha) * (s - beta) + kRingC * p.t.squaredNorm());
    };
    fam.rho.jet = [alpha, beta](const Point& p) {
      const int nc = p.n() + 1;
      const ScalarJet3 s = jet_log(jet_abs2(nc, p.n(), p.z[0]));
      return (s + Complex(-alpha)) * (s + Complex(-beta)) +
             base_abs2_jet(p) * Complex(kRingC);
    };
    return fam;
  }

  throw ConfigError("unknown family '" + name + "'");
}

std::vector<std::string> family_names() {
  return {"hartogs_ball", "product_disk", "egg", "annulus_reinhardt"};
}

ScalarField make_weight(const std::string& metric_name, int n, int m) {
  ScalarField phi;
  if (metric_name == "flat") {
    phi.eval = [](const Point&) { return Complex(0.0); };
    phi.jet = [n, m](const Point&) { return ScalarJet3(n + m); };
    return phi;
  }
  if (metric_name == "gaussian_weight" || metric_name == "diag_weights") {
    phi.eval = [](const Point& p) {
      return Complex(p.t.squaredNorm() + p.z.squaredNorm());
    };
    phi.jet = [](const Point& p) { return base_abs2_jet(p) + fiber_abs2_jet(p); };
    return phi;
  }
  if (metric_name == "reinhardt_invariant") {
    phi.eval = [](const Point& p) {
      double s = p.t.squaredNorm();
      for (int q = 0; q < p.m(); ++q) {
        const double u = std::norm(p.z[q]);
        s += u + 0.5 * u * u;
      }
      return Complex(s);
    };
    phi.jet = [](const Point& p) {
      const int nc = p.n() + p.m();
      ScalarJet3 s = base_abs2_jet(p);
      for (int q = 0; q < p.m(); ++q) {
        const ScalarJet3 u = jet_abs2(nc, p.n() + q, p.z[q]);
        s = s + u + u * u * Complex(0.5);
      }
      return s;
    };
    return phi;
  }
  throw ConfigError("unknown metric '" + metric_name + "'");
}

MatrixField make_metric(const std::string& name, int n, int m, int r) {
  if (r < 1 || r > 4) throw ConfigError("metric rank supported in 1..4");
  MatrixField h;
  h.rank = r;

  if (name == "flat") {
    h.eval = [r](const Point&) { return MatrixXcd::Identity(r, r).eval(); };
    h.jet = [n, m, r](const Point&) {
      MatrixJet2 j(n + m, r);
      j.value = MatrixXcd::Identity(r, r);
      return j;
    };
    return h;
  }

  // Exponents per diagonal entry: 1 for uniform weights, 1..r for
  // diag_weights.
  std::vector<double> expo(static_cast<std::size_t>(r), 1.0);
  if (name == "diag_weights")
    for (int l = 0; l < r; ++l) expo[static_cast<std::size_t>(l)] = l + 1.0;

  const ScalarField phi = make_weight(name, n, m);
  h.eval = [phi, expo, r](const Point& p) {
    const double v = phi.eval(p).real();
    MatrixXcd out = MatrixXcd::Zero(r, r);
    for (int l = 0; l < r; ++l) out(l, l) = std::exp(-expo[static_cast<std::size_t>(l)] * v);
    return out;
  };
  h.jet = [phi, expo, n, m, r](const Point& p) {
    const ScalarJet3 pj = phi.jet(p);
    MatrixJet2 out(n + m, r);
    const int nd = 2 * (n + m);
    for (int l = 0; l < r; ++l) {
      const ScalarJet3 e = jet_exp(pj * Complex(-expo[static_cast<std::size_t>(l)]));
      out.value(l, l) = e.value;
      for (int u = 0; u < nd; ++u) out.at1(u)(l, l) = e.d1[u];
      for (int u = 0; u < nd; ++u)
        for (int v = 0; v < nd; ++v) out.at2(u, v)(l, l) = e.d2(u, v);
    }
    return out;
  };
  return h;
}

std::vector<std::string> metric_names() {
  return {"flat", "gaussian_weight", "diag_weights", "reinhardt_invariant"};
}

}  // namespace diblab
