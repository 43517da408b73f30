#include "displab/fbi.hpp"

namespace displab {

namespace {

constexpr double kWindowRadius = 8.5;  // Gaussian tail e^{-36}
const double kNorm1d = std::pow(2.0, -0.5) * std::pow(M_PI, -0.75);

void require_1d(const GridSpec& g, const char* what) {
  if (g.dim != 1) throw std::invalid_argument(std::string(what) + ": frame operations are one-dimensional");
}

}  // namespace

WavePacketFrame WavePacketFrame::make(double x_halfwidth, double xi_max, double dx_, double dxi_) {
  WavePacketFrame f;
  f.dx = dx_;
  f.dxi = dxi_;
  if (f.dx * f.dxi > 2 * M_PI * 0.25 + 1e-12)
    throw std::invalid_argument("WavePacketFrame: density factor exceeds 1/4");
  const int jx = static_cast<int>(std::floor(x_halfwidth / dx_));
  const int jxi = static_cast<int>(std::floor(xi_max / dxi_));
  f.nx = 2 * jx + 1;
  f.nxi = 2 * jxi + 1;
  f.x0 = -jx * dx_;
  f.xi0 = -jxi * dxi_;
  return f;
}

FbiResult fbi_analyze(const GridFunction& f, const WavePacketFrame& frame) {
  require_1d(f.grid, "fbi_analyze");
  const GridSpec& g = f.grid;
  const int n = g.n[0];
  const double h = g.h[0];

  FbiResult out;
  out.coeffs.frame = frame;
  out.coeffs.c = MatrixXcd::Zero(frame.nx, frame.nxi);

  // boundary decay precondition (windowed inputs)
  double fmax = f.norm_sup();
  if (fmax > 0) {
    double edge = std::max(std::abs(f.values[0]), std::abs(f.values[n - 1]));
    out.boundary_mass = edge / fmax;
    out.boundary_warning = out.boundary_mass > 1e-10;
  }

  for (int j = 0; j < frame.nx; ++j) {
    const double xj = frame.x_at(j);
    int m0 = std::max(0, static_cast<int>(std::ceil((xj - kWindowRadius - g.origin[0]) / h)));
    int m1 = std::min(n - 1, static_cast<int>(std::floor((xj + kWindowRadius - g.origin[0]) / h)));
    if (m0 > m1) continue;
    for (int k = 0; k < frame.nxi; ++k) {
      const double xik = frame.xi_at(k);
      // c(j,k) = knorm * h * sum_y exp(i xi (x-y)) exp(-(x-y)^2/2) f(y)
      Complex acc(0, 0);
      const double y_start = g.coord(0, m0);
      Complex phase = std::polar(1.0, xik * (xj - y_start));
      const Complex step = std::polar(1.0, -xik * h);
      for (int m = m0; m <= m1; ++m) {
        const double u = xj - (y_start + (m - m0) * h);
        acc += phase * std::exp(-0.5 * u * u) * f.values[m];
        phase *= step;
      }
      out.coeffs.c(j, k) = kNorm1d * h * acc;
    }
  }
  return out;
}

GridFunction fbi_synthesize(const FbiCoefficients& coeffs, const GridSpec& grid) {
  require_1d(grid, "fbi_synthesize");
  const WavePacketFrame& frame = coeffs.frame;
  if (coeffs.c.rows() != frame.nx || coeffs.c.cols() != frame.nxi)
    throw std::invalid_argument("fbi_synthesize: coefficient shape mismatch");
  GridFunction out(grid);
  const int n = grid.n[0];
  const double h = grid.h[0];
  const double w = frame.weight();
  for (int j = 0; j < frame.nx; ++j) {
    const double xj = frame.x_at(j);
    int m0 = std::max(0, static_cast<int>(std::ceil((xj - kWindowRadius - grid.origin[0]) / h)));
    int m1 = std::min(n - 1, static_cast<int>(std::floor((xj + kWindowRadius - grid.origin[0]) / h)));
    if (m0 > m1) continue;
    for (int k = 0; k < frame.nxi; ++k) {
      const Complex ck = coeffs.c(j, k);
      if (ck == Complex(0, 0)) continue;
      const double xik = frame.xi_at(k);
      const double y_start = grid.coord(0, m0);
      // conj of the analysis kernel: exp(-i xi (x-y)) exp(-(x-y)^2/2)
      Complex phase = std::polar(1.0, -xik * (xj - y_start));
      const Complex step = std::polar(1.0, xik * h);
      for (int m = m0; m <= m1; ++m) {
        const double u = xj - (y_start + (m - m0) * h);
        out.values[m] += kNorm1d * w * ck * phase * std::exp(-0.5 * u * u);
        phase *= step;
      }
    }
  }
  return out;
}

namespace {

FbiCoefficients mirror_xi(const FbiCoefficients& in) {
  FbiCoefficients out;
  out.frame = in.frame;
  out.c = MatrixXcd(in.c.rows(), in.c.cols());
  for (int k = 0; k < in.c.cols(); ++k) out.c.col(k) = in.c.col(in.frame.xi_mirror(k));
  return out;
}

}  // namespace

FbiResult fbi_forward(const GridFunction& f, const WavePacketFrame& frame) {
  FbiResult r = fbi_analyze(f, frame);
  r.coeffs = mirror_xi(r.coeffs);
  return r;
}

GridFunction fbi_adjoint(const FbiCoefficients& coeffs, const GridSpec& grid) {
  return fbi_synthesize(mirror_xi(coeffs), grid);
}

GridFunction apply_weyl(const Symbol& sym, const GridFunction& f) {
  if (sym.name().rfind("variable_metric", 0) == 0) {
    // exact Weyl quantization of m(x) xi^2: -(m u')' - m'' u / 4
    const GridSpec& g = f.grid;
    require_1d(g, "apply_weyl");
    auto deriv = [&](const GridFunction& u) {
      return apply_multiplier(u, [](const VectorXd& k) { return Complex(0, k[0]); });
    };
    GridFunction du = deriv(f);
    GridFunction out(g);
    VectorXd m(g.n[0]), mpp(g.n[0]);
    const VectorXi a1 = unit_index(1, 0), a2 = 2 * unit_index(1, 0), z = zero_index(1);
    for (int i = 0; i < g.n[0]; ++i) {
      PhasePoint p = PhasePoint::d1(g.coord(0, i), 1.0);
      // m(x) = a(x, xi)/xi^2 evaluated through the second xi-derivative
      m[i] = 0.5 * sym.eval(p, z, a2).real();
      PhasePoint q = PhasePoint::d1(g.coord(0, i), 1.0);
      VectorXi axx = 2 * unit_index(1, 0);
      mpp[i] = 0.5 * sym.eval(q, axx, a2).real();
    }
    for (int i = 0; i < g.n[0]; ++i) du.values[i] *= m[i];
    GridFunction ddu = deriv(du);
    for (int i = 0; i < g.n[0]; ++i) out.values[i] = -ddu.values[i] - 0.25 * mpp[i] * f.values[i];
    return out;
  }
  // x-independent symbols act as Fourier multipliers
  const int d = sym.dim();
  const VectorXd x0 = VectorXd::Zero(d);
  return apply_multiplier(f, [&](const VectorXd& k) { return sym.eval(PhasePoint(0.0, x0, k)); });
}

double conjugation_error(const Symbol& sym, const GridFunction& f, const WavePacketFrame& frame) {
  if (!sym.analytic_derivs()) throw std::invalid_argument("conjugation_error: analytic first derivatives required");
  require_1d(f.grid, "conjugation_error");
  const FbiCoefficients Tf = fbi_analyze(f, frame).coeffs;
  const FbiCoefficients Taf = fbi_analyze(apply_weyl(sym, f), frame).coeffs;

  const int nx = frame.nx, nxi = frame.nxi;
  const VectorXi z = zero_index(1), e1 = unit_index(1, 0);

  // The coefficient field carries the intrinsic oscillation e^{i x xi}; the
  // lattice differences act on the slow twisted field D = e^{-i x xi} C:
  //   ((1/i) d_x - xi) C = e^{i x xi} (1/i) d_x D
  //   d_xi C              = i x C + e^{i x xi} d_xi D
  MatrixXcd D(nx, nxi);
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < nxi; ++k) D(j, k) = std::polar(1.0, -frame.x_at(j) * frame.xi_at(k)) * Tf.c(j, k);

  auto d4 = [](const MatrixXcd& M, int i, int j, bool in_x, double step) {
    if (in_x) return (M(i - 2, j) - 8.0 * M(i - 1, j) + 8.0 * M(i + 1, j) - M(i + 2, j)) / (12 * step);
    return (M(i, j - 2) - 8.0 * M(i, j - 1) + 8.0 * M(i, j + 1) - M(i, j + 2)) / (12 * step);
  };

  double num2 = 0;
  const Complex mi(0, -1);
  for (int j = 2; j < nx - 2; ++j)
    for (int k = 2; k < nxi - 2; ++k) {
      const double xj = frame.x_at(j), xik = frame.xi_at(k);
      const PhasePoint p = PhasePoint::d1(xj, xik);
      const Complex a = sym.eval(p);
      const Complex axi = sym.eval(p, z, e1);
      const Complex ax = sym.eval(p, e1, z);
      const Complex untwist = std::polar(1.0, xj * xik);
      const Complex dxD = d4(D, j, k, true, frame.dx);
      const Complex dxiD = d4(D, j, k, false, frame.dxi);
      const Complex tilde =
          a * Tf.c(j, k) + axi * (mi * untwist * dxD) - ax * xj * Tf.c(j, k) - mi * ax * untwist * dxiD;
      num2 += std::norm(Taf.c(j, k) - tilde);
    }
  return std::sqrt(num2 * frame.weight()) / f.norm2();
}

}  // namespace displab
