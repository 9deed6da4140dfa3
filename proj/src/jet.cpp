#include "diblab/jet.hpp"

#include <cmath>
#include <limits>

namespace diblab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

int mirror(int u) { return u ^ 1; }

}  // namespace

ScalarJet3 ScalarJet3::operator+(const ScalarJet3& o) const {
  ScalarJet3 r = *this;
  r.value += o.value;
  r.d1 += o.d1;
  r.d2 += o.d2;
  for (std::size_t i = 0; i < r.d3.size(); ++i) r.d3[i] += o.d3[i];
  return r;
}

ScalarJet3 ScalarJet3::operator-(const ScalarJet3& o) const {
  ScalarJet3 r = *this;
  r.value -= o.value;
  r.d1 -= o.d1;
  r.d2 -= o.d2;
  for (std::size_t i = 0; i < r.d3.size(); ++i) r.d3[i] -= o.d3[i];
  return r;
}

ScalarJet3 ScalarJet3::operator*(Complex s) const {
  ScalarJet3 r = *this;
  r.value *= s;
  r.d1 *= s;
  r.d2 *= s;
  for (auto& x : r.d3) x *= s;
  return r;
}

ScalarJet3 ScalarJet3::operator+(Complex s) const {
  ScalarJet3 r = *this;
  r.value += s;
  return r;
}

ScalarJet3 ScalarJet3::operator*(const ScalarJet3& o) const {
  const int nd = ndir();
  ScalarJet3 r(ncoord_);
  r.value = value * o.value;
  for (int a = 0; a < nd; ++a) r.d1[a] = d1[a] * o.value + value * o.d1[a];
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      r.d2(a, b) = d2(a, b) * o.value + d1[a] * o.d1[b] + d1[b] * o.d1[a] +
                   value * o.d2(a, b);
  for (int a = 0; a < nd; ++a)
    for (int b = a; b < nd; ++b)
      for (int c = b; c < nd; ++c) {
        const Complex x = at3(a, b, c) * o.value + value * o.at3(a, b, c) +
                          d2(a, b) * o.d1[c] + d2(a, c) * o.d1[b] +
                          d2(b, c) * o.d1[a] + d1[a] * o.d2(b, c) +
                          d1[b] * o.d2(a, c) + d1[c] * o.d2(a, b);
        r.at3(a, b, c) = x;
        r.at3(a, c, b) = x;
        r.at3(b, a, c) = x;
        r.at3(b, c, a) = x;
        r.at3(c, a, b) = x;
        r.at3(c, b, a) = x;
      }
  return r;
}

ScalarJet3 jet_constant(int ncoord, Complex value) {
  ScalarJet3 j(ncoord);
  j.value = value;
  return j;
}

ScalarJet3 jet_coordinate(int ncoord, int coord, bool bar, Complex value) {
  ScalarJet3 j(ncoord);
  j.value = bar ? std::conj(value) : value;
  j.d1[2 * coord + (bar ? 1 : 0)] = 1.0;
  return j;
}

ScalarJet3 jet_abs2(int ncoord, int coord, Complex value) {
  return jet_coordinate(ncoord, coord, false, value) *
         jet_coordinate(ncoord, coord, true, value);
}

ScalarJet3 jet_compose(const ScalarJet3& f, const std::array<Complex, 4>& g) {
  const int nd = f.ndir();
  ScalarJet3 r(f.ncoord());
  r.value = g[0];
  for (int a = 0; a < nd; ++a) r.d1[a] = g[1] * f.d1[a];
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      r.d2(a, b) = g[2] * f.d1[a] * f.d1[b] + g[1] * f.d2(a, b);
  for (int a = 0; a < nd; ++a)
    for (int b = a; b < nd; ++b)
      for (int c = b; c < nd; ++c) {
        const Complex x = g[3] * f.d1[a] * f.d1[b] * f.d1[c] +
                          g[2] * (f.d2(a, b) * f.d1[c] + f.d2(a, c) * f.d1[b] +
                                  f.d2(b, c) * f.d1[a]) +
                          g[1] * f.at3(a, b, c);
        r.at3(a, b, c) = x;
        r.at3(a, c, b) = x;
        r.at3(b, a, c) = x;
        r.at3(b, c, a) = x;
        r.at3(c, a, b) = x;
        r.at3(c, b, a) = x;
      }
  return r;
}

ScalarJet3 jet_exp(const ScalarJet3& f) {
  const Complex e = std::exp(f.value);
  return jet_compose(f, {e, e, e, e});
}

ScalarJet3 jet_log(const ScalarJet3& f) {
  const Complex v = f.value;
  if (std::abs(v) == 0.0) throw NumericalError("jet_log at zero");
  return jet_compose(f, {std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)});
}

double real_symmetry_residual(const ScalarJet3& jet) {
  const int nd = jet.ndir();
  double res = std::abs(jet.value.imag());
  for (int a = 0; a < nd; ++a)
    res = std::max(res, std::abs(jet.d1[a] - std::conj(jet.d1[mirror(a)])));
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      res = std::max(res,
                     std::abs(jet.d2(a, b) - std::conj(jet.d2(mirror(a), mirror(b)))));
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      for (int c = 0; c < nd; ++c)
        res = std::max(res, std::abs(jet.at3(a, b, c) -
                                     std::conj(jet.at3(mirror(a), mirror(b), mirror(c)))));
  return res;
}

double symmetrize_real(ScalarJet3& jet) {
  const double res = real_symmetry_residual(jet);
  const int nd = jet.ndir();
  jet.value = Complex(jet.value.real(), 0.0);
  for (int a = 0; a < nd; ++a) {
    const int ma = mirror(a);
    if (a > ma) continue;
    const Complex avg = 0.5 * (jet.d1[a] + std::conj(jet.d1[ma]));
    jet.d1[a] = avg;
    jet.d1[ma] = std::conj(avg);
  }
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b) {
      const int ma = mirror(a), mb = mirror(b);
      if (std::make_pair(a, b) > std::make_pair(ma, mb)) continue;
      const Complex avg = 0.5 * (jet.d2(a, b) + std::conj(jet.d2(ma, mb)));
      jet.d2(a, b) = avg;
      jet.d2(ma, mb) = std::conj(avg);
    }
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      for (int c = 0; c < nd; ++c) {
        const int ma = mirror(a), mb = mirror(b), mc = mirror(c);
        if (std::make_tuple(a, b, c) > std::make_tuple(ma, mb, mc)) continue;
        const Complex avg = 0.5 * (jet.at3(a, b, c) + std::conj(jet.at3(ma, mb, mc)));
        jet.at3(a, b, c) = avg;
        jet.at3(ma, mb, mc) = std::conj(avg);
      }
  return res;
}

double fd_step(double coord_magnitude, int order, const FdOptions& opts) {
  // k-fold central differences amplify roundoff by h^-k; eps^(1/(k+2))
  // balances that against the h^2 truncation term.
  const double floor_k = std::pow(kEps, 1.0 / (order + 2));
  return std::max(opts.base_step, floor_k) * (1.0 + coord_magnitude);
}

namespace {

Point shifted(const Point& p, int coord, double dx, double dy) {
  Point q = p;
  const Complex delta(dx, dy);
  if (coord < q.n())
    q.t[coord] += delta;
  else
    q.z[coord - q.n()] += delta;
  return q;
}

template <typename Value, typename Fn>
Value fd_recursive(const Fn& f, const Point& p, std::span<const Dir> dirs,
                   int total_order, double scale, const FdOptions& opts) {
  if (dirs.empty()) return f(p);
  const Dir d = dirs.front();
  const auto rest = dirs.subspan(1);
  const Complex wc = (d.coord < p.n()) ? p.t[d.coord] : p.z[d.coord - p.n()];
  const double h = fd_step(std::abs(wc), total_order, opts) * scale;
  const Value fxp = fd_recursive<Value>(f, shifted(p, d.coord, h, 0.0), rest,
                                        total_order, scale, opts);
  const Value fxm = fd_recursive<Value>(f, shifted(p, d.coord, -h, 0.0), rest,
                                        total_order, scale, opts);
  const Value fyp = fd_recursive<Value>(f, shifted(p, d.coord, 0.0, h), rest,
                                        total_order, scale, opts);
  const Value fym = fd_recursive<Value>(f, shifted(p, d.coord, 0.0, -h), rest,
                                        total_order, scale, opts);
  const Value gx = (fxp - fxm) / (2.0 * h);
  const Value gy = (fyp - fym) / (2.0 * h);
  return d.bar ? Value(0.5 * (gx + I * gy)) : Value(0.5 * (gx - I * gy));
}

template <typename Value, typename Fn>
Value wirtinger_fd_impl(const Fn& f, const Point& p, std::span<const Dir> dirs,
                        const FdOptions& opts) {
  const int k = static_cast<int>(dirs.size());
  if (k == 0) return f(p);
  const Value coarse = fd_recursive<Value>(f, p, dirs, k, 1.0, opts);
  if (!opts.richardson) return coarse;
  const Value fine = fd_recursive<Value>(f, p, dirs, k, 0.5, opts);
  return Value((4.0 * fine - coarse) / 3.0);
}

}  // namespace

Complex wirtinger_fd(const ScalarEval& f, const Point& p, std::span<const Dir> dirs,
                     const FdOptions& opts) {
  return wirtinger_fd_impl<Complex>(f, p, dirs, opts);
}

ScalarJet3 scalar_jet_fd(const ScalarEval& f, const Point& p, int max_order,
                         const FdOptions& opts) {
  const int ncoord = p.n() + p.m();
  const int nd = 2 * ncoord;
  ScalarJet3 jet(ncoord);
  jet.value = f(p);
  auto dir_of = [](int u) { return Dir{u / 2, (u % 2) != 0}; };
  for (int a = 0; a < nd; ++a) {
    const std::array<Dir, 1> ds{dir_of(a)};
    jet.d1[a] = wirtinger_fd(f, p, ds, opts);
  }
  if (max_order >= 2) {
    for (int a = 0; a < nd; ++a)
      for (int b = a; b < nd; ++b) {
        const std::array<Dir, 2> ds{dir_of(a), dir_of(b)};
        const Complex x = wirtinger_fd(f, p, ds, opts);
        jet.d2(a, b) = x;
        jet.d2(b, a) = x;
      }
  }
  if (max_order >= 3) {
    for (int a = 0; a < nd; ++a)
      for (int b = a; b < nd; ++b)
        for (int c = b; c < nd; ++c) {
          const std::array<Dir, 3> ds{dir_of(a), dir_of(b), dir_of(c)};
          const Complex x = wirtinger_fd(f, p, ds, opts);
          jet.at3(a, b, c) = x;
          jet.at3(a, c, b) = x;
          jet.at3(b, a, c) = x;
          jet.at3(b, c, a) = x;
          jet.at3(c, a, b) = x;
          jet.at3(c, b, a) = x;
        }
  }
  return jet;
}

ScalarJet3 scalar_jet(const ScalarField& f, const Point& p, int max_order,
                      const FdOptions& opts) {
  if (f.jet) return f.jet(p);
  if (!f.eval) throw ConfigError("scalar field has no evaluator");
  return scalar_jet_fd(f.eval, p, max_order, opts);
}

MatrixJet2 matrix_jet_fd(const MatrixEval& f, int rank, const Point& p,
                         const FdOptions& opts) {
  const int ncoord = p.n() + p.m();
  const int nd = 2 * ncoord;
  MatrixJet2 jet(ncoord, rank);
  jet.value = f(p);
  auto dir_of = [](int u) { return Dir{u / 2, (u % 2) != 0}; };
  for (int a = 0; a < nd; ++a) {
    const std::array<Dir, 1> ds{dir_of(a)};
    jet.at1(a) = wirtinger_fd_impl<MatrixXcd>(f, p, ds, opts);
  }
  for (int a = 0; a < nd; ++a)
    for (int b = a; b < nd; ++b) {
      const std::array<Dir, 2> ds{dir_of(a), dir_of(b)};
      const MatrixXcd x = wirtinger_fd_impl<MatrixXcd>(f, p, ds, opts);
      jet.at2(a, b) = x;
      jet.at2(b, a) = x;
    }
  return jet;
}

double hermitian_symmetry_residual(const MatrixJet2& jet) {
  const int nd = 2 * jet.ncoord();
  double res = (jet.value - jet.value.adjoint().eval()).cwiseAbs().maxCoeff();
  for (int a = 0; a < nd; ++a)
    res = std::max(
        res, (jet.at1(a) - jet.at1(mirror(a)).adjoint().eval()).cwiseAbs().maxCoeff());
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      res = std::max(res, (jet.at2(a, b) - jet.at2(mirror(a), mirror(b)).adjoint().eval())
                              .cwiseAbs()
                              .maxCoeff());
  return res;
}

double symmetrize_hermitian(MatrixJet2& jet) {
  const double res = hermitian_symmetry_residual(jet);
  const int nd = 2 * jet.ncoord();
  jet.value = 0.5 * (jet.value + jet.value.adjoint().eval());
  for (int a = 0; a < nd; ++a) {
    const int ma = mirror(a);
    if (a > ma) continue;
    const MatrixXcd avg = 0.5 * (jet.at1(a) + jet.at1(ma).adjoint());
    jet.at1(a) = avg;
    jet.at1(ma) = avg.adjoint();
  }
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b) {
      const int ma = mirror(a), mb = mirror(b);
      if (std::make_pair(a, b) > std::make_pair(ma, mb)) continue;
      const MatrixXcd avg = 0.5 * (jet.at2(a, b) + jet.at2(ma, mb).adjoint());
      jet.at2(a, b) = avg;
      jet.at2(ma, mb) = avg.adjoint();
    }
  return res;
}

MatrixJet2 matrix_jet(const MatrixField& f, const Point& p, const FdOptions& opts) {
  if (f.jet) return f.jet(p);
  if (!f.eval) throw ConfigError("matrix field has no evaluator");
  return matrix_jet_fd(f.eval, f.rank, p, opts);
}

}  // namespace diblab
