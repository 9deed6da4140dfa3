#include "diblab/family.hpp"

#include <cmath>
#include <sstream>

#include "diblab/quadrature.hpp"

namespace diblab {

namespace {

// The denominator rho - |d rho|^2 degenerates only where the boundary
// gradient vanishes; anything this close to zero is treated as degenerate.
constexpr double kDenomTol = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

GeometryFields geometry_fields_from_jet(const FamilySpec& fam, const Point& p,
                                        const ScalarJet3& jet_in) {
  const int n = fam.n, m = fam.m;
  if (p.n() != n || p.m() != m) throw ConfigError("point/family dimension mismatch");

  GeometryFields g;
  g.n = n;
  g.m = m;
  g.point = p;
  g.jet = jet_in;
  const double sym = symmetrize_real(g.jet);
  if (sym > 1e-6) throw NumericalError("rho jet violates reality by " + fmt(sym));
  const ScalarJet3& jet = g.jet;

  g.rho = jet.value.real();
  g.rho_t.resize(n);
  g.rho_z.resize(m);
  for (int j = 0; j < n; ++j) g.rho_t[j] = jet.d(dir_t(j));
  for (int q = 0; q < m; ++q) g.rho_z[q] = jet.d(dir_z(q, n));

  g.rho_tt.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) g.rho_tt(j, k) = jet.d(dir_t(j), dir_tbar(k));
  g.rho_tz.resize(n, m);
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < m; ++q) g.rho_tz(j, q) = jet.d(dir_t(j), dir_zbar(q, n));
  g.fiber_hessian.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      g.fiber_hessian(a, b) = jet.d(dir_z(a, n), dir_zbar(b, n));

  Eigen::FullPivLU<MatrixXcd> lu(g.fiber_hessian);
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    throw NumericalError("fiber Hessian numerically singular (rcond " +
                         fmt(lu.rcond()) + ")");
  g.inv_hessian = lu.inverse();

  g.rho_up = g.inv_hessian * g.rho_z;
  g.a_t = g.rho_t - g.rho_tz * g.rho_up;

  const Complex del2 = g.rho_z.conjugate().cwiseProduct(g.rho_up).sum();
  g.del_rho2 = del2.real();
  if (std::abs(del2.imag()) > 1e-9 * (1.0 + std::abs(del2.real())))
    throw NumericalError("|d rho|^2 acquired imaginary part " + fmt(del2.imag()));

  g.grad_fiber = 2.0 * std::sqrt(g.rho_z.squaredNorm());
  g.denom = g.rho - g.del_rho2;
  if (!(g.denom < -kDenomTol))
    throw NumericalError("denominator rho - |d rho|^2 = " + fmt(g.denom) +
                         " not safely negative");

  const VectorXcd rho_up_bar = g.rho_up.conjugate();
  g.nu = (g.a_t * rho_up_bar.transpose()) / g.denom - g.rho_tz * g.inv_hessian;

  // First derivatives of nu in every direction, by differentiating each
  // ingredient; third-order jet entries enter through dH and dRtz.
  const int ncoord = n + m;
  const int nd = 2 * ncoord;
  auto dir_of = [](int u) { return Dir{u / 2, (u % 2) != 0}; };

  std::vector<MatrixXcd> dM(nd), dRtz(nd);
  std::vector<VectorXcd> dte(nd), drho_up(nd);
  std::vector<Complex> ddenom(nd);
  for (int u = 0; u < nd; ++u) {
    const Dir d = dir_of(u);
    MatrixXcd dH(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) dH(a, b) = jet.d(dir_z(a, n), dir_zbar(b, n), d);
    dM[u] = -g.inv_hessian * dH * g.inv_hessian;
    dRtz[u].resize(n, m);
    for (int j = 0; j < n; ++j)
      for (int q = 0; q < m; ++q) dRtz[u](j, q) = jet.d(dir_t(j), dir_zbar(q, n), d);
    dte[u].resize(n);
    for (int j = 0; j < n; ++j) dte[u][j] = jet.d(dir_t(j), d);
    VectorXcd dze(m), dzb(m);
    for (int q = 0; q < m; ++q) {
      dze[q] = jet.d(dir_z(q, n), d);
      dzb[q] = jet.d(dir_zbar(q, n), d);
    }
    drho_up[u] = dM[u] * g.rho_z + g.inv_hessian * dze;
    const Complex ddel2 = dzb.cwiseProduct(g.rho_up).sum() +
                          g.rho_z.conjugate().cwiseProduct(drho_up[u]).sum();
    ddenom[u] = jet.d(d) - ddel2;
  }

  g.dnu.assign(nd, MatrixXcd::Zero(n, m));
  for (int u = 0; u < nd; ++u) {
    // d(conj(rho^p)) along u is the conjugate of d(rho^p) along the mirror
    // direction.
    const VectorXcd drho_up_bar = drho_up[u ^ 1].conjugate();
    const VectorXcd da = dte[u] - dRtz[u] * g.rho_up - g.rho_tz * drho_up[u];
    g.dnu[u] =
        (da * rho_up_bar.transpose() + g.a_t * drho_up_bar.transpose()) / g.denom -
        (g.a_t * rho_up_bar.transpose()) * (ddenom[u] / (g.denom * g.denom)) -
        dRtz[u] * g.inv_hessian - g.rho_tz * dM[u];
  }

  return g;
}

GeometryFields geometry_fields(const FamilySpec& fam, const Point& p,
                               const FdOptions& opts) {
  return geometry_fields_from_jet(fam, p, scalar_jet(fam.rho, p, 3, opts));
}

MatrixXcd h0_rho(const GeometryFields& g) {
  return g.rho_tt - g.rho_tz * g.inv_hessian * g.rho_tz.adjoint();
}

MatrixXcd h_rho(const GeometryFields& g) {
  if (g.del_rho2 <= 0.0)
    throw NumericalError("H(rho) undefined where the fiber gradient vanishes");
  return h0_rho(g) + (g.a_t * g.a_t.adjoint()) / g.del_rho2;
}

MatrixXcd h_rho_via_nu(const GeometryFields& g) {
  return g.rho_tt + g.nu * g.rho_tz.adjoint() + g.rho_tz * g.nu.adjoint() +
         g.nu * g.fiber_hessian * g.nu.adjoint();
}

Complex v_field_rho(const GeometryFields& g, int j) {
  return g.rho_t[j] + (g.nu.row(j) * g.rho_z).value();
}

Complex vbar_v_rho(const GeometryFields& g, int j, int k) {
  const int n = g.n, m = g.m;
  auto dg = [&](Dir d) {
    Complex s = g.jet.d(dir_t(j), d);
    for (int p = 0; p < m; ++p)
      s += g.dnu_dir(d)(j, p) * g.rho_z[p] + g.nu(j, p) * g.jet.d(dir_z(p, n), d);
    return s;
  };
  Complex r = dg(dir_tbar(k));
  for (int q = 0; q < m; ++q) r += std::conj(g.nu(k, q)) * dg(dir_zbar(q, n));
  return r;
}

namespace {

void add_check(FamilyReport& rep, std::string name, bool pass, double value,
               std::string detail = {}) {
  rep.checks.push_back({std::move(name), pass, value, std::move(detail)});
  rep.valid = rep.valid && pass;
}

}  // namespace

FamilyReport validate_family(const FamilySpec& fam, const ValidationOptions& opts) {
  FamilyReport rep;
  rep.valid = true;
  Rng rng(opts.seed);
  QuadratureOptions qopts;
  qopts.scan_steps = opts.ray_steps;

  double worst_sym = 0.0, worst_center = -1e300, worst_fiber_eig = 1e300;
  double worst_grad = 1e300, worst_denom = -1e300, worst_full_eig = 1e300;
  double worst_radius = 0.0;
  bool rays_ok = true, brackets_ok = true, center_checked = false;
  std::string ray_detail;

  auto rho_at = [&](const VectorXcd& t, const VectorXcd& z) {
    Point p;
    p.t = t;
    p.z = z;
    return fam.rho.eval(p).real();
  };

  for (int it = 0; it < opts.t_samples; ++it) {
    VectorXcd t(fam.n);
    for (int j = 0; j < fam.n; ++j) {
      const double r = 0.8 * fam.t_radius * std::sqrt(rng.uniform());
      t[j] = std::polar(r / std::sqrt(double(fam.n)), rng.uniform(0.0, 2.0 * M_PI));
    }
    if (it == 0) t.setZero();

    const VectorXcd c = fam.center_at(t);

    if (fam.m == 1 && !fam.annular) {
      center_checked = true;
      const double rc = rho_at(t, c);
      worst_center = std::max(worst_center, rc);
      if (rc >= 0.0) {
        add_check(rep, "star_center_interior", false, rc,
                  "fiber empty or star center outside at a sampled t");
        return rep;
      }
    }

    for (int ir = 0; ir < opts.rays; ++ir) {
      const double theta = 2.0 * M_PI * (ir + 0.13) / opts.rays;
      const double psi = 0.5 * M_PI * (ir + 0.37) / (opts.rays + 1);

      // z along the sampled ray, parametrized by radius r.
      auto ray_point = [&](double r) -> VectorXcd {
        VectorXcd z(fam.m);
        if (fam.m == 1) {
          z[0] = c[0] + std::polar(r, theta);
        } else {
          z << std::polar(r * std::cos(psi), theta),
              std::polar(r * std::sin(psi), 0.31 * theta);
        }
        return z;
      };

      double r_lo = fam.ray_scan_start, r_bd = 0.0;
      try {
        if (fam.m == 1 && fam.annular) {
          auto [ri, ro] = ray_ring_radii(fam, t, c[0], theta, qopts);
          r_lo = ri;
          r_bd = ro;
        } else if (fam.m == 1) {
          r_bd = ray_boundary_radius(fam, t, c[0], theta, fam.ray_scan_start,
                                     fam.bounding_radius, qopts);
        } else {
          r_bd = path_boundary_radius(
              [&](double r) { return rho_at(t, ray_point(r)); }, fam.ray_scan_start,
              fam.bounding_radius, qopts);
        }
      } catch (const NumericalError& e) {
        brackets_ok = false;
        ray_detail = e.what();
        continue;
      }
      worst_radius = std::max(worst_radius, r_bd);

      // Monotone sign along the ray: negative strictly inside the detected
      // boundary, positive just beyond it.
      for (int s = 1; s < opts.ray_steps; ++s) {
        const double r_mid = r_lo + (r_bd - r_lo) * 0.98 * s / opts.ray_steps;
        if (r_mid > r_lo && rho_at(t, ray_point(r_mid)) >= 0.0) rays_ok = false;
      }
      const double beyond = std::min(r_bd * 1.02, fam.bounding_radius);
      if (beyond > r_bd && rho_at(t, ray_point(beyond)) <= 0.0) rays_ok = false;

      for (double frac : {0.55, 1.0}) {
        Point p;
        p.t = t;
        p.z = ray_point(r_lo + (r_bd - r_lo) * frac);
        ScalarJet3 jet = scalar_jet(fam.rho, p, 3, opts.fd);
        worst_sym = std::max(worst_sym, real_symmetry_residual(jet));
        symmetrize_real(jet);

        MatrixXcd hf(fam.m, fam.m);
        for (int a = 0; a < fam.m; ++a)
          for (int b = 0; b < fam.m; ++b)
            hf(a, b) = jet.d(dir_z(a, fam.n), dir_zbar(b, fam.n));
        worst_fiber_eig = std::min(worst_fiber_eig, min_hermitian_eig(hf));

        if (frac == 1.0) {
          VectorXcd rz(fam.m);
          for (int q = 0; q < fam.m; ++q) rz[q] = jet.d(dir_z(q, fam.n));
          worst_grad = std::min(worst_grad, 2.0 * std::sqrt(rz.squaredNorm()));
          const double del2 =
              rz.conjugate().cwiseProduct(Eigen::LDLT<MatrixXcd>(hf).solve(rz)).sum().real();
          worst_denom = std::max(worst_denom, jet.value.real() - del2);
        }

        if (opts.strict) {
          const int nc = fam.n + fam.m;
          MatrixXcd full(nc, nc);
          for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) full(a, b) = jet.d2(2 * a, 2 * b + 1);
          worst_full_eig = std::min(worst_full_eig, min_hermitian_eig(full));
        }
      }
    }
  }

  add_check(rep, "rho_real_symmetry", worst_sym < 1e-6, worst_sym);
  if (center_checked)
    add_check(rep, "star_center_interior", worst_center < 0.0, worst_center);
  add_check(rep, "ray_brackets", brackets_ok, 0.0, ray_detail);
  add_check(rep, "ray_monotonicity", rays_ok, 0.0,
            rays_ok ? "" : "rho changes sign away from the detected boundary");
  add_check(rep, "fiber_hessian_pd", worst_fiber_eig > 0.0, worst_fiber_eig);
  add_check(rep, "boundary_gradient", worst_grad > 1e-8, worst_grad);
  add_check(rep, "denominator_negative", worst_denom < -1e-12, worst_denom);
  add_check(rep, "bounding_radius", worst_radius <= fam.bounding_radius, worst_radius);
  if (opts.strict)
    add_check(rep, "full_hessian_pd", worst_full_eig > 0.0, worst_full_eig);
  return rep;
}

}  // namespace diblab
