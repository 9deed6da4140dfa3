#include "diblab/quadrature.hpp"

#include <cmath>

namespace diblab {

void gauss_legendre(int k, VectorXd& x, VectorXd& w) {
  if (k < 1) throw ConfigError("gauss_legendre order must be positive");
  x.resize(k);
  w.resize(k);
  const int half = (k + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_k(t) and P'_k(t).
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = k * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[k - 1 - i] = t;
    const double wi = 2.0 / ((1.0 - t * t) * pp * pp);
    w[i] = wi;
    w[k - 1 - i] = wi;
  }
}

VectorXd spectral_derivative_periodic(const VectorXd& samples) {
  const int k = static_cast<int>(samples.size());
  if (k < 2) return VectorXd::Zero(k);
  const int kmax = (k - 1) / 2;  // Nyquist mode (even k) carries no derivative
  std::vector<Complex> coeff(static_cast<std::size_t>(kmax) + 1, Complex(0.0));
  for (int mode = 1; mode <= kmax; ++mode) {
    Complex c(0.0);
    for (int j = 0; j < k; ++j)
      c += samples[j] * std::polar(1.0, -2.0 * M_PI * mode * j / k);
    coeff[static_cast<std::size_t>(mode)] = c / double(k);
  }
  VectorXd out(k);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (int mode = 1; mode <= kmax; ++mode) {
      const Complex term = coeff[static_cast<std::size_t>(mode)] *
                           std::polar(1.0, 2.0 * M_PI * mode * j / k);
      s += -2.0 * mode * term.imag();  // 2 Re(i * mode * c_m e^{i m theta})
    }
    out[j] = s;
  }
  return out;
}

namespace {

// Bisection on a bracketing interval; returns the midpoint once the width
// reaches a few ulps.
double bisect(const std::function<double(double)>& g, double lo, double hi,
              double glo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
    if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double path_boundary_radius(const std::function<double(double)>& g, double scan_start,
                            double r_max, const QuadratureOptions& opts) {
  const double g0 = g(scan_start);
  if (!(g0 < 0.0))
    throw NumericalError("path does not start inside the fiber (rho = " +
                         std::to_string(g0) + ")");
  double prev_r = scan_start, prev_g = g0;
  for (int i = 1; i <= opts.scan_steps; ++i) {
    const double r = scan_start + (r_max - scan_start) * i / opts.scan_steps;
    const double gr = g(r);
    if (gr >= 0.0) {
      const double root = bisect(g, prev_r, r, prev_g);
      const double res = std::abs(g(root));
      if (res > opts.root_tol)
        throw NumericalError("boundary root residual " + std::to_string(res) +
                             " above tolerance");
      return root;
    }
    prev_r = r;
    prev_g = gr;
  }
  throw NumericalError("ray stays inside the fiber out to r_max = " +
                       std::to_string(r_max) + " (bounding radius too small?)");
}

double ray_boundary_radius(const FamilySpec& fam, const VectorXcd& t, Complex center,
                           double theta, double scan_start, double r_max,
                           const QuadratureOptions& opts) {
  auto g = [&](double r) {
    Point p;
    p.t = t;
    p.z = VectorXcd(1);
    p.z[0] = center + std::polar(r, theta);
    return fam.rho.eval(p).real();
  };
  return path_boundary_radius(g, scan_start, r_max, opts);
}

std::pair<double, double> ray_ring_radii(const FamilySpec& fam, const VectorXcd& t,
                                         Complex center, double theta,
                                         const QuadratureOptions& opts) {
  auto g = [&](double r) {
    Point p;
    p.t = t;
    p.z = VectorXcd(1);
    p.z[0] = center + std::polar(r, theta);
    return fam.rho.eval(p).real();
  };
  const double start = fam.ray_scan_start > 0.0
                           ? fam.ray_scan_start
                           : fam.bounding_radius / (4.0 * opts.scan_steps);
  double prev_r = start, prev_g = g(start);
  if (!(prev_g > 0.0))
    throw NumericalError("ring scan must start outside the fiber (inner disk)");
  double r_in = -1.0;
  for (int i = 1; i <= 2 * opts.scan_steps; ++i) {
    const double r = start + (fam.bounding_radius - start) * i / (2.0 * opts.scan_steps);
    const double gr = g(r);
    if (r_in < 0.0 && gr <= 0.0) {
      r_in = bisect(g, prev_r, r, prev_g);
    } else if (r_in >= 0.0 && gr >= 0.0) {
      const double r_out = bisect(g, prev_r, r, prev_g);
      if (std::abs(g(r_in)) > opts.root_tol || std::abs(g(r_out)) > opts.root_tol)
        throw NumericalError("ring boundary root residual above tolerance");
      return {r_in, r_out};
    }
    prev_r = r;
    prev_g = gr;
  }
  throw NumericalError(r_in < 0.0 ? "ring fiber not entered along ray"
                                  : "ring fiber not exited along ray");
}

namespace {

// Real fiber gradient components d rho / d r_p = 2 Re(rho_{z_p}) at a point
// with real nonnegative coordinates (theta = 0); Reinhardt symmetry makes
// these independent of the torus angles.
std::array<double, 2> profile_gradient(const FamilySpec& fam, const VectorXcd& t,
                                       double r1, double r2) {
  Point p;
  p.t = t;
  p.z = VectorXcd(2);
  p.z << Complex(r1, 0.0), Complex(r2, 0.0);
  const ScalarJet3 jet = scalar_jet(fam.rho, p, 1);
  return {2.0 * jet.d(dir_z(0, fam.n)).real(), 2.0 * jet.d(dir_z(1, fam.n)).real()};
}

double profile_radius(const FamilySpec& fam, const VectorXcd& t, double psi,
                      const QuadratureOptions& opts) {
  const double cs = std::cos(psi), sn = std::sin(psi);
  auto g = [&](double s) {
    Point p;
    p.t = t;
    p.z = VectorXcd(2);
    p.z << Complex(s * cs, 0.0), Complex(s * sn, 0.0);
    return fam.rho.eval(p).real();
  };
  return path_boundary_radius(g, fam.ray_scan_start, fam.bounding_radius, opts);
}

}  // namespace

QuadratureRule interior_rule(const FamilySpec& fam, const VectorXcd& t,
                             const QuadratureOptions& opts) {
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::interior;
  rule.t = t;
  rule.angular = opts.angular;
  rule.radial = opts.radial;

  VectorXd xr, wr;
  gauss_legendre(opts.radial, xr, wr);

  if (fam.m == 1) {
    const Complex c = fam.center_at(t)[0];
    const int K = opts.angular;
    rule.nodes.reserve(static_cast<std::size_t>(K) * opts.radial);
    std::vector<double> wts;
    wts.reserve(rule.nodes.capacity());
    for (int i = 0; i < K; ++i) {
      const double theta = 2.0 * M_PI * i / K;
      double r_lo = 0.0, r_hi = 0.0;
      if (fam.annular) {
        std::tie(r_lo, r_hi) = ray_ring_radii(fam, t, c, theta, opts);
      } else {
        r_hi = ray_boundary_radius(fam, t, c, theta, fam.ray_scan_start,
                                   fam.bounding_radius, opts);
      }
      for (int j = 0; j < opts.radial; ++j) {
        const double r = r_lo + (r_hi - r_lo) * 0.5 * (xr[j] + 1.0);
        VectorXcd z(1);
        z[0] = c + std::polar(r, theta);
        rule.nodes.push_back(z);
        wts.push_back((2.0 * M_PI / K) * 0.5 * (r_hi - r_lo) * wr[j] * r);
      }
    }
    rule.weights = Eigen::Map<VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    return rule;
  }

  if (fam.m == 2) {
    if (!fam.reinhardt)
      throw ConfigError("m = 2 quadrature supports Reinhardt fibers only");
    const double planned = double(opts.psi) * opts.radial * opts.angular * opts.angular;
    if (planned > 2e7)
      throw ConfigError("m = 2 rule would need " + std::to_string(planned) +
                        " nodes; lower angular/radial/psi");
    VectorXd xp, wp;
    gauss_legendre(opts.psi, xp, wp);
    const int K = opts.angular;
    std::vector<double> wts;
    for (int a = 0; a < opts.psi; ++a) {
      const double psi = 0.25 * M_PI * (xp[a] + 1.0);
      const double wpsi = 0.25 * M_PI * wp[a];
      const double cs = std::cos(psi), sn = std::sin(psi);
      const double S = profile_radius(fam, t, psi, opts);
      for (int b = 0; b < opts.radial; ++b) {
        const double s = S * 0.5 * (xr[b] + 1.0);
        const double ws = S * 0.5 * wr[b];
        const double geom = s * s * s * cs * sn;
        for (int i1 = 0; i1 < K; ++i1)
          for (int i2 = 0; i2 < K; ++i2) {
            VectorXcd z(2);
            z << std::polar(s * cs, 2.0 * M_PI * i1 / K),
                std::polar(s * sn, 2.0 * M_PI * i2 / K);
            rule.nodes.push_back(z);
            wts.push_back(wpsi * ws * geom * (2.0 * M_PI / K) * (2.0 * M_PI / K));
          }
      }
    }
    rule.weights = Eigen::Map<VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    return rule;
  }

  throw ConfigError("quadrature supports m in {1, 2}");
}

QuadratureRule boundary_rule(const FamilySpec& fam, const VectorXcd& t,
                             const QuadratureOptions& opts) {
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::boundary;
  rule.t = t;
  rule.angular = opts.angular;
  rule.radial = opts.radial;

  if (fam.m == 1) {
    const Complex c = fam.center_at(t)[0];
    const int K = opts.angular;
    const int rings = fam.annular ? 2 : 1;
    VectorXd r_out(K), r_in(K);
    for (int i = 0; i < K; ++i) {
      const double theta = 2.0 * M_PI * i / K;
      if (fam.annular) {
        std::tie(r_in[i], r_out[i]) = ray_ring_radii(fam, t, c, theta, opts);
      } else {
        r_out[i] = ray_boundary_radius(fam, t, c, theta, fam.ray_scan_start,
                                       fam.bounding_radius, opts);
      }
    }
    std::vector<double> wts;
    for (int ring = 0; ring < rings; ++ring) {
      const VectorXd& R = (ring == 0) ? r_out : r_in;
      const VectorXd dR = spectral_derivative_periodic(R);
      for (int i = 0; i < K; ++i) {
        VectorXcd z(1);
        z[0] = c + std::polar(R[i], 2.0 * M_PI * i / K);
        rule.nodes.push_back(z);
        wts.push_back((2.0 * M_PI / K) * std::sqrt(R[i] * R[i] + dR[i] * dR[i]));
      }
    }
    rule.weights = Eigen::Map<VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    return rule;
  }

  if (fam.m == 2) {
    if (!fam.reinhardt)
      throw ConfigError("m = 2 quadrature supports Reinhardt fibers only");
    const double planned = double(opts.psi) * opts.angular * opts.angular;
    if (planned > 2e7)
      throw ConfigError("m = 2 boundary rule would need " + std::to_string(planned) +
                        " nodes; lower angular/psi");
    VectorXd xp, wp;
    gauss_legendre(opts.psi, xp, wp);
    const int K = opts.angular;
    std::vector<double> wts;
    for (int a = 0; a < opts.psi; ++a) {
      const double psi = 0.25 * M_PI * (xp[a] + 1.0);
      const double wpsi = 0.25 * M_PI * wp[a];
      const double cs = std::cos(psi), sn = std::sin(psi);
      const double S = profile_radius(fam, t, psi, opts);
      const double r1 = S * cs, r2 = S * sn;
      const auto grad = profile_gradient(fam, t, r1, r2);
      const double denom = grad[0] * cs + grad[1] * sn;
      if (std::abs(denom) < 1e-12)
        throw NumericalError("profile boundary tangent degenerate");
      const double Sp = S * (grad[0] * sn - grad[1] * cs) / denom;
      const double geom = std::sqrt(S * S + Sp * Sp) * r1 * r2;
      for (int i1 = 0; i1 < K; ++i1)
        for (int i2 = 0; i2 < K; ++i2) {
          VectorXcd z(2);
          z << std::polar(r1, 2.0 * M_PI * i1 / K), std::polar(r2, 2.0 * M_PI * i2 / K);
          rule.nodes.push_back(z);
          wts.push_back(wpsi * geom * (2.0 * M_PI / K) * (2.0 * M_PI / K));
        }
    }
    rule.weights = Eigen::Map<VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    return rule;
  }

  throw ConfigError("quadrature supports m in {1, 2}");
}

Complex integrate(const QuadratureRule& rule,
                  const std::function<Complex(const VectorXcd&)>& f) {
  std::vector<Complex> terms(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    terms[i] = rule.weights[static_cast<Eigen::Index>(i)] * f(rule.nodes[i]);
  return pairwise_sum(std::span<Complex>(terms));
}

}  // namespace diblab
