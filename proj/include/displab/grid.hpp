#ifndef DISPLAB_GRID_HPP
#define DISPLAB_GRID_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace displab {

using Complex = std::complex<double>;
using Eigen::ArrayXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Uniform periodic grid on a box [origin, origin + n*h) per axis, dim 1 or 2.
/// Axis lengths must be powers of two so the spectral oracles stay exact.
struct GridSpec {
  int dim = 1;
  std::vector<int> n;        // points per axis
  std::vector<double> h;     // spacing per axis
  std::vector<double> origin;

  GridSpec() = default;
  GridSpec(int d, std::vector<int> n_, std::vector<double> h_, std::vector<double> o_);

  static GridSpec line(int n, double length, double center = 0.0);
  static GridSpec square(int n, double length, double center = 0.0);

  long size() const {
    long s = 1;
    for (int ni : n) s *= ni;
    return s;
  }
  // flattened index, row-major (axis 0 slowest)
  long index(int i, int j = 0) const { return dim == 1 ? i : static_cast<long>(i) * n[1] + j; }
  double coord(int axis, int i) const { return origin[axis] + h[axis] * i; }
  /// signed FFT wavenumber 2*pi*k/(n*h) with k in [-n/2, n/2)
  double wavenumber(int axis, int i) const;
  double cell() const {
    double c = 1;
    for (int a = 0; a < dim; ++a) c *= h[a];
    return c;
  }
  bool operator==(const GridSpec& o) const { return dim == o.dim && n == o.n && h == o.h && origin == o.origin; }
};

/// Complex grid function, values flattened row-major.
struct GridFunction {
  GridSpec grid;
  VectorXcd values;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& g) : grid(g), values(VectorXcd::Zero(g.size())) {}
  GridFunction(const GridSpec& g, VectorXcd v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw std::invalid_argument("GridFunction: value count mismatch");
  }

  Complex& at(int i, int j = 0) { return values[grid.index(i, j)]; }
  Complex at(int i, int j = 0) const { return values[grid.index(i, j)]; }
  double norm2() const { return values.norm() * std::sqrt(grid.cell()); }
  double norm_sup() const { return values.cwiseAbs().maxCoeff(); }
  double norm1() const { return values.cwiseAbs().sum() * grid.cell(); }
};

/// Unnormalized forward DFT per axis (matches exp(-i k x) analysis up to grid phases).
void fft_forward(const GridSpec& g, const VectorXcd& in, VectorXcd& out);
void fft_inverse(const GridSpec& g, const VectorXcd& in, VectorXcd& out);

/// Apply a Fourier multiplier m(k) (k = signed physical wavenumbers).
template <class Mult>
GridFunction apply_multiplier(const GridFunction& f, Mult&& m) {
  const GridSpec& g = f.grid;
  VectorXcd hat(g.size());
  fft_forward(g, f.values, hat);
  if (g.dim == 1) {
    for (int i = 0; i < g.n[0]; ++i) hat[i] *= m(VectorXd::Constant(1, g.wavenumber(0, i)));
  } else {
    VectorXd k(2);
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j) {
        k[0] = g.wavenumber(0, i);
        k[1] = g.wavenumber(1, j);
        hat[g.index(i, j)] *= m(k);
      }
  }
  GridFunction out(g);
  fft_inverse(g, hat, out.values);
  return out;
}

/// Trigonometric interpolation onto a 2x refined grid (band-limited zero padding).
GridFunction refine2(const GridFunction& f);

/// L^2 inner product with cell weights.
Complex inner(const GridFunction& a, const GridFunction& b);

}  // namespace displab

#endif
