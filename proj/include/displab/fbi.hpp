#ifndef DISPLAB_FBI_HPP
#define DISPLAB_FBI_HPP

#include "displab/symbol.hpp"

namespace displab {

/// Oversampled Gabor-type lattice of unit-width Gaussian coherent states
/// (one spatial dimension; scans in d=2 use the spectral reference
/// propagator and never need a frame).
///
/// Lattice: x_j = x0 + j*dx, xi_k = xi0 + k*dxi; the xi lattice is symmetric
/// about 0 so frequency reflection is an exact lattice permutation.
struct WavePacketFrame {
  double dx = 0.5;
  double dxi = M_PI / 4;
  int nx = 0, nxi = 0;
  double x0 = 0, xi0 = 0;
  double declared_tol = 2e-3;  // measured frame distortion bound at this density

  static WavePacketFrame make(double x_halfwidth, double xi_max, double dx = 0.5, double dxi = M_PI / 4);

  double x_at(int j) const { return x0 + j * dx; }
  double xi_at(int k) const { return xi0 + k * dxi; }
  int xi_mirror(int k) const { return nxi - 1 - k; }
  double weight() const { return dx * dxi; }
  double density_factor() const { return dx * dxi / (2 * M_PI); }
  bool contains(double x, double xi) const {
    return x >= x0 && x <= x_at(nx - 1) && xi >= xi0 && xi <= xi_at(nxi - 1);
  }
};

/// Phase-space coefficient array over a frame lattice. Rows index x, columns
/// index xi. Labels follow the physical-frequency convention: the column k
/// coefficient lives at frequency xi_at(k) of the data.
struct FbiCoefficients {
  WavePacketFrame frame;
  MatrixXcd c;

  double norm() const { return c.norm() * std::sqrt(frame.weight()); }
};

struct FbiResult {
  FbiCoefficients coeffs;
  bool boundary_warning = false;
  double boundary_mass = 0;
};

/// Analysis against the coherent states (bilinear pairing; physical labels).
FbiResult fbi_analyze(const GridFunction& f, const WavePacketFrame& frame);

/// Exact discrete adjoint of fbi_analyze: superposition of conjugate packets
/// with lattice weights.
GridFunction fbi_synthesize(const FbiCoefficients& coeffs, const GridSpec& grid);

/// Forward transform in the printed normalization (kernel e^{-i xi (x-y)});
/// equals fbi_analyze with the xi axis mirrored.
FbiResult fbi_forward(const GridFunction& f, const WavePacketFrame& frame);

/// Adjoint of fbi_forward: superposition of coherent states phi_{x,xi}.
GridFunction fbi_adjoint(const FbiCoefficients& coeffs, const GridSpec& grid);

/// || T a^w f - A~ T f ||_2 / ||f||_2 with
/// A~ = a + a_xi((1/i) d_x - xi) - (1/i) a_x d_xi on the coefficient lattice
/// (4th-order centered differences; lattice norm over the interior).
/// Requires analytic first derivatives of sym.
double conjugation_error(const Symbol& sym, const GridFunction& f, const WavePacketFrame& frame);

/// Apply a^w on the grid: Fourier multiplier for x-independent symbols, the
/// exact Weyl form -(m u')' - m'' u/4 for the variable-metric model.
GridFunction apply_weyl(const Symbol& sym, const GridFunction& f);

}  // namespace displab

#endif
