#include "displab/grid.hpp"

#include <unsupported/Eigen/FFT>

namespace displab {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

GridSpec::GridSpec(int d, std::vector<int> n_, std::vector<double> h_, std::vector<double> o_)
    : dim(d), n(std::move(n_)), h(std::move(h_)), origin(std::move(o_)) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
  if (static_cast<int>(n.size()) != dim || static_cast<int>(h.size()) != dim ||
      static_cast<int>(origin.size()) != dim)
    throw std::invalid_argument("GridSpec: axis count mismatch");
  for (int ni : n)
    if (!power_of_two(ni)) throw std::invalid_argument("GridSpec: axis length must be a power of two");
}

GridSpec GridSpec::line(int n, double length, double center) {
  return GridSpec(1, {n}, {length / n}, {center - length / 2});
}

GridSpec GridSpec::square(int n, double length, double center) {
  return GridSpec(2, {n, n}, {length / n, length / n}, {center - length / 2, center - length / 2});
}

double GridSpec::wavenumber(int axis, int i) const {
  const int ni = n[axis];
  const int k = i < ni / 2 ? i : i - ni;
  return 2.0 * M_PI * k / (ni * h[axis]);
}

namespace {

thread_local Eigen::FFT<double> g_fft;

void fft1(const VectorXcd& in, VectorXcd& out, bool forward) {
  out.resize(in.size());
  if (forward)
    g_fft.fwd(out, in);
  else
    g_fft.inv(out, in);
}

}  // namespace

void fft_forward(const GridSpec& g, const VectorXcd& in, VectorXcd& out) {
  if (g.dim == 1) {
    fft1(in, out, true);
    return;
  }
  const int n0 = g.n[0], n1 = g.n[1];
  out.resize(in.size());
  VectorXcd row(n1), rowt(n1), col(n0), colt(n0);
  for (int i = 0; i < n0; ++i) {
    row = in.segment(static_cast<long>(i) * n1, n1);
    fft1(row, rowt, true);
    out.segment(static_cast<long>(i) * n1, n1) = rowt;
  }
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) col[i] = out[g.index(i, j)];
    fft1(col, colt, true);
    for (int i = 0; i < n0; ++i) out[g.index(i, j)] = colt[i];
  }
}

void fft_inverse(const GridSpec& g, const VectorXcd& in, VectorXcd& out) {
  if (g.dim == 1) {
    fft1(in, out, false);
    return;
  }
  const int n0 = g.n[0], n1 = g.n[1];
  out.resize(in.size());
  VectorXcd row(n1), rowt(n1), col(n0), colt(n0);
  for (int i = 0; i < n0; ++i) {
    row = in.segment(static_cast<long>(i) * n1, n1);
    fft1(row, rowt, false);
    out.segment(static_cast<long>(i) * n1, n1) = rowt;
  }
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) col[i] = out[g.index(i, j)];
    fft1(col, colt, false);
    for (int i = 0; i < n0; ++i) out[g.index(i, j)] = colt[i];
  }
}

GridFunction refine2(const GridFunction& f) {
  const GridSpec& g = f.grid;
  std::vector<int> n2;
  std::vector<double> h2;
  for (int a = 0; a < g.dim; ++a) {
    n2.push_back(2 * g.n[a]);
    h2.push_back(g.h[a] / 2);
  }
  GridSpec gr(g.dim, n2, h2, g.origin);
  VectorXcd hat(g.size());
  fft_forward(g, f.values, hat);
  VectorXcd hat2 = VectorXcd::Zero(gr.size());
  auto map_index = [](int i, int n, int n_big) { return i < n / 2 ? i : i + (n_big - n); };
  if (g.dim == 1) {
    for (int i = 0; i < g.n[0]; ++i) hat2[map_index(i, g.n[0], gr.n[0])] = hat[i];
  } else {
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        hat2[gr.index(map_index(i, g.n[0], gr.n[0]), map_index(j, g.n[1], gr.n[1]))] = hat[g.index(i, j)];
  }
  GridFunction out(gr);
  fft_inverse(gr, hat2, out.values);
  // inverse normalizes by the big size; compensate so values interpolate f
  out.values *= static_cast<double>(gr.size()) / static_cast<double>(g.size());
  return out;
}

Complex inner(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner: grid mismatch");
  return (a.values.conjugate().cwiseProduct(b.values)).sum() * a.grid.cell();
}

}  // namespace displab
