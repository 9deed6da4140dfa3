#pragma once

#include <array>
#include <functional>

#include "diblab/types.hpp"

namespace diblab {

// Dense Wirtinger jet of a scalar function of (t, z) up to third order.
// Directions are indexed flat: 2*coord for d/dw_c, 2*coord+1 for d/dwbar_c,
// over the packed coordinate layout (base block first).  Tensors are stored
// fully symmetrized; accessors accept directions in any order.
class ScalarJet3 {
 public:
  ScalarJet3() = default;
  explicit ScalarJet3(int ncoord)
      : value(0.0),
        d1(VectorXcd::Zero(2 * ncoord)),
        d2(MatrixXcd::Zero(2 * ncoord, 2 * ncoord)),
        d3(static_cast<std::size_t>(8 * ncoord * ncoord * ncoord), Complex(0.0)),
        ncoord_(ncoord) {}

  int ncoord() const { return ncoord_; }
  int ndir() const { return 2 * ncoord_; }

  Complex value{0.0};
  VectorXcd d1;
  MatrixXcd d2;
  std::vector<Complex> d3;

  Complex d(Dir a) const { return d1[a.flat(ncoord_)]; }
  Complex d(Dir a, Dir b) const { return d2(a.flat(ncoord_), b.flat(ncoord_)); }
  Complex d(Dir a, Dir b, Dir c) const {
    return d3[flat3(a.flat(ncoord_), b.flat(ncoord_), c.flat(ncoord_))];
  }

  Complex& at3(int u, int v, int w) { return d3[flat3(u, v, w)]; }
  Complex at3(int u, int v, int w) const { return d3[flat3(u, v, w)]; }

  ScalarJet3 operator+(const ScalarJet3& o) const;
  ScalarJet3 operator-(const ScalarJet3& o) const;
  ScalarJet3 operator*(const ScalarJet3& o) const;  // Leibniz to order 3
  ScalarJet3 operator*(Complex s) const;
  ScalarJet3 operator+(Complex s) const;

 private:
  std::size_t flat3(int u, int v, int w) const {
    const int nd = 2 * ncoord_;
    return static_cast<std::size_t>((u * nd + v) * nd + w);
  }

  int ncoord_ = 0;
};

inline ScalarJet3 operator*(Complex s, const ScalarJet3& j) { return j * s; }

// Jet of the coordinate function w_c (or its conjugate) at a point where the
// coordinate has the given value.
ScalarJet3 jet_constant(int ncoord, Complex value);
ScalarJet3 jet_coordinate(int ncoord, int coord, bool bar, Complex value);
ScalarJet3 jet_abs2(int ncoord, int coord, Complex value);  // |w_c|^2

// Composition g(f) where outer holds g, g', g'', g''' evaluated at f.value.
ScalarJet3 jet_compose(const ScalarJet3& f, const std::array<Complex, 4>& outer);
ScalarJet3 jet_exp(const ScalarJet3& f);
ScalarJet3 jet_log(const ScalarJet3& f);  // requires f.value != 0

// Largest violation of the reality constraints d(abar..) = conj(d(a..)) and
// Im value = 0.  Only meaningful for jets of real-valued functions.
double real_symmetry_residual(const ScalarJet3& jet);

// Averages conjugate-mirror entries in place and returns the residual seen
// before symmetrization.
double symmetrize_real(ScalarJet3& jet);

// Finite-difference controls.  base_step applies to first derivatives; the
// step for order-k tensors never drops below eps^(1/(k+2)), the roundoff
// floor for a k-fold central difference.
struct FdOptions {
  double base_step = 1e-4;
  bool richardson = true;
};

double fd_step(double coord_magnitude, int order, const FdOptions& opts);

using ScalarEval = std::function<Complex(const Point&)>;

// Single mixed Wirtinger derivative (up to third order) of f at p.
Complex wirtinger_fd(const ScalarEval& f, const Point& p, std::span<const Dir> dirs,
                     const FdOptions& opts = {});

// Full jet via central differences; max_order in {1,2,3}.
ScalarJet3 scalar_jet_fd(const ScalarEval& f, const Point& p, int max_order = 3,
                         const FdOptions& opts = {});

// A scalar function of the total space.  jet, when present, is the analytic
// route; scalar_jet falls back to finite differences otherwise.
struct ScalarField {
  ScalarEval eval;
  std::function<ScalarJet3(const Point&)> jet;
};

ScalarJet3 scalar_jet(const ScalarField& f, const Point& p, int max_order = 3,
                      const FdOptions& opts = {});

// Second-order jet of an r x r matrix function (a fiber metric in practice).
struct MatrixJet2 {
  MatrixJet2() = default;
  MatrixJet2(int ncoord, int rank)
      : value(MatrixXcd::Zero(rank, rank)),
        d1(static_cast<std::size_t>(2 * ncoord), MatrixXcd::Zero(rank, rank)),
        d2(static_cast<std::size_t>(4 * ncoord * ncoord), MatrixXcd::Zero(rank, rank)),
        ncoord_(ncoord) {}

  int ncoord() const { return ncoord_; }
  int rank() const { return static_cast<int>(value.rows()); }

  MatrixXcd value;
  std::vector<MatrixXcd> d1;
  std::vector<MatrixXcd> d2;

  const MatrixXcd& d(Dir a) const { return d1[a.flat(ncoord_)]; }
  const MatrixXcd& d(Dir a, Dir b) const {
    return d2[static_cast<std::size_t>(a.flat(ncoord_) * 2 * ncoord_ + b.flat(ncoord_))];
  }
  MatrixXcd& at1(int u) { return d1[static_cast<std::size_t>(u)]; }
  MatrixXcd& at2(int u, int v) {
    return d2[static_cast<std::size_t>(u * 2 * ncoord_ + v)];
  }
  const MatrixXcd& at1(int u) const { return d1[static_cast<std::size_t>(u)]; }
  const MatrixXcd& at2(int u, int v) const {
    return d2[static_cast<std::size_t>(u * 2 * ncoord_ + v)];
  }

 private:
  int ncoord_ = 0;
};

using MatrixEval = std::function<MatrixXcd(const Point&)>;

MatrixJet2 matrix_jet_fd(const MatrixEval& f, int rank, const Point& p,
                         const FdOptions& opts = {});

// Hermitian-consistency residual for jets of Hermitian-matrix functions:
// value vs value^*, dH(dir) vs dH(conj dir)^*, and second-order mirrors.
double hermitian_symmetry_residual(const MatrixJet2& jet);
double symmetrize_hermitian(MatrixJet2& jet);

struct MatrixField {
  int rank = 1;
  MatrixEval eval;
  std::function<MatrixJet2(const Point&)> jet;
};

MatrixJet2 matrix_jet(const MatrixField& f, const Point& p, const FdOptions& opts = {});

}  // namespace diblab
