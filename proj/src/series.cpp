#include "displab/series.hpp"

#include <cmath>

namespace displab {

EllipticNormalization elliptic_normalize_real(const std::function<double(double)>& p, double lo, double hi,
                                              int grid_points, double dp_min) {
  if (grid_points < 3) throw std::invalid_argument("elliptic_normalize_real: need at least 3 grid points");
  // locate sign changes on the coarse grid
  std::vector<double> roots;
  const double h = (hi - lo) / (grid_points - 1);
  double prev = p(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double s = lo + i * h;
    const double cur = p(s);
    if (prev == 0.0) roots.push_back(s - h);
    else if (prev * cur < 0) {
      double a = s - h, b = s;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (p(a) * p(mid) <= 0) b = mid;
        else a = mid;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  if (roots.empty()) throw std::runtime_error("elliptic_normalize_real: no root in range");
  if (roots.size() > 1) throw std::runtime_error("elliptic_normalize_real: multiple roots in range");
  const double r = roots[0];

  // noncharacteristic slope check along the grid (the |d_s p| >~ 1 hypothesis)
  const double fdh = 1e-6 * std::max(1.0, std::abs(hi - lo));
  for (int i = 0; i < grid_points; ++i) {
    const double s = lo + i * h;
    const double dp = (p(s + fdh) - p(s - fdh)) / (2 * fdh);
    if (std::abs(dp) < dp_min)
      throw std::runtime_error("elliptic_normalize_real: d_s p degenerates on the grid (principal type fails)");
  }

  EllipticNormalization out;
  out.root = r;
  out.defect = 0;
  for (int i = 0; i < grid_points; ++i) {
    const double s = lo + i * h - r;  // shifted so the root sits at 0
    out.grid.push_back(s);
    double e;
    if (std::abs(s) < 1e-12) {
      const double dp = (p(r + fdh) - p(r - fdh)) / (2 * fdh);
      e = 1.0 / dp;
    } else {
      e = s / p(s + r);
    }
    out.e.push_back(e);
    out.defect = std::max(out.defect, std::abs(e * p(s + r) - s));
  }
  return out;
}

}  // namespace displab
