#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diblab {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr Complex I{0.0, 1.0};

// Thrown when input data violates a documented precondition (bad config,
// inconsistent dimensions, malformed catalog key).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine cannot certify its own result (singular
// Hessian, failed root bracket, ill-conditioned Gram matrix).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point of the total space: base coordinates t in C^n, fiber coordinates
// z in C^m.  Stored separately so call sites cannot mix the two blocks.
struct Point {
  VectorXcd t;
  VectorXcd z;

  int n() const { return static_cast<int>(t.size()); }
  int m() const { return static_cast<int>(z.size()); }

  // Packed view (t first, then z), the layout all jet tensors use.
  VectorXcd packed() const {
    VectorXcd w(t.size() + z.size());
    w << t, z;
    return w;
  }

  static Point unpack(const VectorXcd& w, int n, int m) {
    Point p;
    p.t = w.head(n);
    p.z = w.segment(n, m);
    return p;
  }
};

// One holomorphic or antiholomorphic coordinate direction of the total
// space.  coord indexes the packed layout (0..n-1 base, n..n+m-1 fiber).
struct Dir {
  int coord = 0;
  bool bar = false;

  int flat(int /*ncoord*/) const { return 2 * coord + (bar ? 1 : 0); }
  Dir conj() const { return Dir{coord, !bar}; }
};

inline Dir dir_t(int j) { return Dir{j, false}; }
inline Dir dir_tbar(int j) { return Dir{j, true}; }
inline Dir dir_z(int p, int n) { return Dir{n + p, false}; }
inline Dir dir_zbar(int p, int n) { return Dir{n + p, true}; }

// Pairwise (tree) reduction.  Fixed association order makes every integral
// in the library reproducible bit-for-bit regardless of accumulation size.
template <typename T>
T pairwise_sum(std::span<T> buf) {
  if (buf.empty()) return T{};
  std::size_t width = buf.size();
  while (width > 1) {
    std::size_t half = width / 2;
    for (std::size_t i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (width % 2 == 1) {
      buf[half] = buf[width - 1];
      width = half + 1;
    } else {
      width = half;
    }
  }
  return buf[0];
}

template <typename T>
T pairwise_sum(std::vector<T> buf) {
  return pairwise_sum(std::span<T>(buf));
}

// Deterministic random scalars.  mt19937_64 output is pinned by the
// standard; the mapping to doubles below avoids std::*_distribution, whose
// streams differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {  // Box-Muller, fresh pair each call
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Complex cnormal() { return Complex(normal(), normal()) / std::sqrt(2.0); }

  VectorXcd cnormal_vector(int size) {
    VectorXcd v(size);
    for (int i = 0; i < size; ++i) v[i] = cnormal();
    return v;
  }

  MatrixXcd cnormal_matrix(int rows, int cols) {
    MatrixXcd a(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) a(r, c) = cnormal();
    return a;
  }

  // Hermitian positive definite sample C*C + shift I.
  MatrixXcd hpd_matrix(int size, double shift = 1e-3) {
    const MatrixXcd c = cnormal_matrix(size, size);
    return c.adjoint() * c + shift * MatrixXcd::Identity(size, size);
  }

 private:
  std::mt19937_64 eng_;
};

inline double min_hermitian_eig(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a + a.adjoint()));
  return es.eigenvalues().minCoeff();
}

}  // namespace diblab
