#include "displab/assumptions.hpp"

#include <Eigen/QR>
#include <random>
#include <sstream>

namespace displab {

const AssumptionEntry& AssumptionReport::get(const std::string& label) const {
  for (const auto& e : entries)
    if (e.label == label) return e;
  throw std::out_of_range("AssumptionReport: no entry " + label);
}

std::string AssumptionReport::to_csv() const {
  std::ostringstream os;
  os << "assumption,constant,threshold,pass,worst_point\n";
  os.precision(17);
  for (const auto& e : entries) {
    os << e.label << "," << e.constant << "," << e.threshold << "," << (e.pass ? 1 : 0) << ",\"t=" << e.worst.t
       << " x=(";
    for (int i = 0; i < e.worst.x.size(); ++i) os << (i ? " " : "") << e.worst.x[i];
    os << ") xi=(";
    for (int i = 0; i < e.worst.xi.size(); ++i) os << (i ? " " : "") << e.worst.xi[i];
    os << ")\"\n";
  }
  return os.str();
}

namespace {

VectorXd random_direction(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> N(0.0, 1.0);
  VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = N(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

/// orthonormal basis of the orthogonal complement of the columns of G
MatrixXd complement_basis(const MatrixXd& G) {
  const int d = static_cast<int>(G.rows());
  Eigen::ColPivHouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ();
  const int rank = static_cast<int>(qr.rank());
  return Q.rightCols(d - rank);
}

/// best |det| over size x size minors (all row/column index subsets)
double best_minor(const MatrixXd& S, int size) {
  const int n = static_cast<int>(S.rows());
  if (size <= 0) return 1.0;
  if (size > n) return 0.0;
  std::vector<int> rows(size), cols(size);
  double best = 0;
  std::function<void(int, int, std::vector<int>&, const std::function<void()>&)> choose =
      [&](int start, int left, std::vector<int>& out, const std::function<void()>& done) {
        if (left == 0) {
          done();
          return;
        }
        for (int i = start; i <= n - left; ++i) {
          out[size - left] = i;
          choose(i + 1, left - 1, out, done);
        }
      };
  choose(0, size, rows, [&] {
    choose(0, size, cols, [&] {
      MatrixXd M(size, size);
      for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b) M(a, b) = S(rows[a], cols[b]);
      best = std::max(best, std::abs(M.determinant()));
    });
  });
  return best;
}

}  // namespace

double curvature_minor(const Symbol& sym, const PhasePoint& p, const VectorXd& normal, int size,
                       unsigned rotate_seed, double on_set_tol) {
  const int d = sym.dim();
  if (std::abs(sym.eval(p).real()) > on_set_tol * sym.lambda())
    throw std::invalid_argument("curvature_minor: point not on the characteristic set");
  const VectorXd g = sym.grad_xi(p);
  if (g.norm() < 1e-10) throw std::runtime_error("curvature_minor: degenerate gradient (principal type fails)");
  MatrixXd T = complement_basis(g);
  if (rotate_seed != 0) {
    std::mt19937_64 rng(rotate_seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const int m = static_cast<int>(T.cols());
    MatrixXd R(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) R(i, j) = N(rng);
    Eigen::HouseholderQR<MatrixXd> qr(R);
    T = T * MatrixXd(qr.householderQ());
  }
  const MatrixXd H = sym.hess_xi(p);
  const double c = normal.dot(g) / g.squaredNorm();
  const MatrixXd S = -c * (T.transpose() * H * T);
  (void)d;
  return best_minor(S, size);
}

CharPoints find_characteristic_points(const Symbol& sym, int rays, int x_samples, unsigned seed, double r_min,
                                      double r_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int d = sym.dim();
  CharPoints out;
  for (int xs = 0; xs < x_samples; ++xs) {
    VectorXd x = VectorXd::Zero(d);
    if (xs > 0)
      for (int i = 0; i < d; ++i) x[i] = 0.8 * U(rng);
    for (int r = 0; r < rays; ++r) {
      const VectorXd omega = random_direction(rng, d);
      auto f = [&](double rho) { return sym.eval(PhasePoint(0.0, x, rho * omega)).real(); };
      // scan for a sign change, then bisect to |p| <= 1e-8 lambda
      const int scan = 64;
      double prev_r = r_min, prev_v = f(r_min);
      bool found = false;
      for (int i = 1; i <= scan && !found; ++i) {
        const double rr = r_min + (r_max - r_min) * i / scan;
        const double v = f(rr);
        if (prev_v == 0.0 || prev_v * v < 0) {
          double a = prev_r, b = rr;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (f(a) * f(mid) <= 0) b = mid;
            else a = mid;
            if (std::abs(f(0.5 * (a + b))) <= 1e-8 * sym.lambda()) break;
          }
          out.points.emplace_back(0.0, x, 0.5 * (a + b) * omega);
          found = true;
        }
        prev_r = rr;
        prev_v = v;
      }
      if (!found) ++out.skipped;
    }
  }
  return out;
}

CharPoints find_joint_characteristic_points(const Symbol& p_re, const Symbol& p_im, int rays, int x_samples,
                                            unsigned seed, double r_min, double r_max) {
  CharPoints seeds = find_characteristic_points(p_re, rays, x_samples, seed, r_min, r_max);
  CharPoints out;
  out.skipped = seeds.skipped;
  const double tol = 1e-10 * p_re.lambda();
  for (auto& p : seeds.points) {
    PhasePoint q = p;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const double f1 = p_re.eval(q).real(), f2 = p_im.eval(q).real();
      if (std::abs(f1) < tol && std::abs(f2) < tol) {
        ok = true;
        break;
      }
      Eigen::Matrix<double, 2, Eigen::Dynamic> J(2, q.xi.size());
      J.row(0) = p_re.grad_xi(q).transpose();
      J.row(1) = p_im.grad_xi(q).transpose();
      Eigen::Vector2d F(f1, f2);
      const VectorXd step = J.completeOrthogonalDecomposition().solve(F);
      q.xi -= step;
      if (!q.xi.allFinite()) break;
    }
    if (ok)
      out.points.push_back(q);
    else
      ++out.skipped;
  }
  return out;
}

namespace {

struct NormalizedPair {
  const Symbol* re;
  const Symbol* im;
  double scale_re, scale_im;  // lambda^{1 - k_order}: gradients in unit-order class units

  VectorXd grad_xi_re(const PhasePoint& p) const { return scale_re * re->grad_xi(p); }
  VectorXd grad_xi_im(const PhasePoint& p) const { return scale_im * im->grad_xi(p); }
  double val_re(const PhasePoint& p) const { return scale_re * re->eval(p).real() / re->lambda(); }
  double val_im(const PhasePoint& p) const { return scale_im * im->eval(p).real() / im->lambda(); }
};

double wedge_norm(const VectorXd& a, const VectorXd& b) {
  const double g = a.squaredNorm() * b.squaredNorm() - std::pow(a.dot(b), 2);
  return std::sqrt(std::max(0.0, g));
}

/// second fundamental form of the joint zero set with respect to unit normal
/// nu expressed in the gradient frame, restricted to an orthonormal tangent
/// basis T
MatrixXd joint_second_form(const Symbol& p_re, const Symbol& p_im, const PhasePoint& p, const VectorXd& nu,
                           const MatrixXd& T) {
  const VectorXd g1 = p_re.grad_xi(p), g2 = p_im.grad_xi(p);
  Eigen::Matrix2d G;
  G << g1.dot(g1), g1.dot(g2), g2.dot(g1), g2.dot(g2);
  Eigen::Vector2d rhs(nu.dot(g1), nu.dot(g2));
  const Eigen::Vector2d c = G.ldlt().solve(rhs);
  const MatrixXd H = c[0] * p_re.hess_xi(p) + c[1] * p_im.hess_xi(p);
  return -(T.transpose() * H * T);
}

}  // namespace

AssumptionReport check_assumptions(const Symbol& p_re, const Symbol& p_im, const AssumptionConfig& cfg) {
  const int d = p_re.dim();
  const double lambda = p_re.lambda();
  NormalizedPair np{&p_re, &p_im, std::pow(lambda, 1.0 - p_re.k_order()), std::pow(lambda, 1.0 - p_im.k_order())};

  const CharPoints sigma_re =
      find_characteristic_points(p_re, cfg.rays, cfg.x_samples, cfg.seed, 0.05 * lambda, 1.5 * lambda);
  const CharPoints sigma =
      find_joint_characteristic_points(p_re, p_im, cfg.rays, cfg.x_samples, cfg.seed + 1, 0.05 * lambda, 1.5 * lambda);

  // bulk samples in B_lambda for A1
  std::vector<PhasePoint> bulk;
  {
    std::mt19937_64 rng(cfg.seed + 2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < cfg.rays * cfg.x_samples; ++i) {
      VectorXd x(d), xi(d);
      for (int a = 0; a < d; ++a) {
        x[a] = 0.9 * U(rng);
        xi[a] = 0.95 * lambda * U(rng);
      }
      bulk.emplace_back(0.0, x, xi);
    }
  }

  AssumptionReport rep;
  auto threshold_for = [&](const std::string& label, bool lower, bool small) {
    auto it = cfg.threshold_overrides.find(label);
    if (it != cfg.threshold_overrides.end()) return it->second;
    if (small) return cfg.small_threshold;
    return lower ? cfg.lower_threshold : cfg.upper_threshold;
  };
  auto push = [&](const std::string& label, bool lower, bool small, double constant, const PhasePoint& worst,
                  int skipped) {
    AssumptionEntry e;
    e.label = label;
    e.constant = constant;
    e.lower_bound = lower;
    e.threshold = threshold_for(label, lower, small);
    e.pass = lower ? constant >= e.threshold : constant <= e.threshold;
    e.worst = worst;
    e.skipped_rays = skipped;
    rep.entries.push_back(e);
  };

  auto reduce = [&](const std::vector<PhasePoint>& pts, bool lower,
                    const std::function<double(const PhasePoint&)>& f, PhasePoint& worst) {
    double acc = lower ? std::numeric_limits<double>::infinity() : 0.0;
    for (const auto& p : pts) {
      const double v = f(p);
      if (lower ? v < acc : v > acc) {
        acc = v;
        worst = p;
      }
    }
    if (pts.empty()) acc = lower ? 0.0 : std::numeric_limits<double>::infinity();
    return acc;
  };

  for (const std::string& label : cfg.labels) {
    PhasePoint worst;
    if (label == "A1") {
      const double c = reduce(bulk, false,
                              [&](const PhasePoint& p) {
                                const double br =
                                    np.scale_re * np.scale_im / lambda * poisson_bracket(p_re, p_im, p);
                                return std::abs(br) / (std::abs(np.val_re(p)) + std::abs(np.val_im(p)) + 1.0);
                              },
                              worst);
      push(label, false, false, c, worst, 0);
    } else if (label == "A1'") {
      const double c = reduce(sigma.points, false,
                              [&](const PhasePoint& p) {
                                const double br =
                                    np.scale_re * np.scale_im / lambda * poisson_bracket(p_re, p_im, p);
                                const double pv = std::hypot(np.val_re(p), np.val_im(p));
                                return std::abs(br) / (pv + 1.0);
                              },
                              worst);
      push(label, false, false, c, worst, sigma.skipped);
    } else if (label == "A2") {
      const double c =
          reduce(sigma_re.points, true, [&](const PhasePoint& p) { return np.grad_xi_re(p).norm(); }, worst);
      push(label, true, false, c, worst, sigma_re.skipped);
    } else if (label == "A2'") {
      const double c = reduce(sigma.points, true,
                              [&](const PhasePoint& p) { return wedge_norm(np.grad_xi_re(p), np.grad_xi_im(p)); },
                              worst);
      push(label, true, false, c, worst, sigma.skipped);
    } else if (label == "B1") {
      const double c = reduce(sigma.points, false,
                              [&](const PhasePoint& p) { return wedge_norm(np.grad_xi_re(p), np.grad_xi_im(p)); },
                              worst);
      push(label, false, true, c, worst, sigma.skipped);
    } else if (label == "A3") {
      const int size = d - 1 - cfg.k;
      const double c = reduce(sigma_re.points, true,
                              [&](const PhasePoint& p) {
                                const VectorXd g = p_re.grad_xi(p);
                                const double m = curvature_minor(p_re, p, g / g.norm(), size, 0, 1e-6);
                                return m / std::pow(lambda, cfg.k - d + 1);
                              },
                              worst);
      push(label, true, false, c, worst, sigma_re.skipped);
    } else if (label == "A3'" || label == "A5'" || label == "A6'") {
      const int size = d - 2 - cfg.k;
      const double c = reduce(sigma.points, true,
                              [&](const PhasePoint& p) {
                                const VectorXd g1 = p_re.grad_xi(p), g2 = p_im.grad_xi(p);
                                MatrixXd G(d, 2);
                                G.col(0) = g1;
                                G.col(1) = g2;
                                const MatrixXd T = complement_basis(G);
                                double best = 0;
                                if (label == "A3'") {
                                  // max over a grid of normal directions
                                  for (int a = 0; a < 16; ++a) {
                                    const double th = M_PI * a / 16;
                                    VectorXd nu = std::cos(th) * g1.normalized() + std::sin(th) * g2.normalized();
                                    if (nu.norm() < 1e-10) continue;
                                    nu.normalize();
                                    best = std::max(best, best_minor(joint_second_form(p_re, p_im, p, nu, T), size));
                                  }
                                } else if (label == "A5'") {
                                  // unique normal direction tangent to the x_1 slices
                                  VectorXd nu = -g2[0] * g1 + g1[0] * g2;
                                  if (nu.norm() < 1e-10) return 0.0;
                                  nu.normalize();
                                  best = best_minor(joint_second_form(p_re, p_im, p, nu, T), size);
                                } else {
                                  // second form of Sigma^re restricted to the joint tangent space
                                  const MatrixXd H = p_re.hess_xi(p);
                                  const MatrixXd S = -(T.transpose() * H * T) / g1.norm();
                                  best = best_minor(S, size);
                                }
                                return best / std::pow(lambda, cfg.k - d + 2);
                              },
                              worst);
      push(label, true, false, c, worst, sigma.skipped);
    } else if (label == "A4") {
      const double c = reduce(sigma_re.points, true,
                              [&](const PhasePoint& p) { return std::abs(np.grad_xi_re(p)[0]); }, worst);
      push(label, true, false, c, worst, sigma_re.skipped);
    } else if (label == "A4'") {
      const double c = reduce(sigma.points, true,
                              [&](const PhasePoint& p) {
                                return std::hypot(np.grad_xi_re(p)[0], np.grad_xi_im(p)[0]);
                              },
                              worst);
      push(label, true, false, c, worst, sigma.skipped);
    } else if (label == "B2") {
      const double c = reduce(sigma.points, false,
                              [&](const PhasePoint& p) {
                                const double d1 = std::abs(np.grad_xi_im(p)[0]);
                                double d2 = 0;
                                for (int a = 0; a < d; ++a) {
                                  VectorXi beta = unit_index(d, 0);
                                  beta[a] += 1;
                                  d2 = std::max(d2, std::abs(np.scale_im * p_im.eval(p, zero_index(d), beta)));
                                }
                                return std::max(d1, lambda * d2);
                              },
                              worst);
      push(label, false, true, c, worst, sigma.skipped);
    } else {
      throw std::invalid_argument("check_assumptions: unknown label " + label);
    }
  }
  return rep;
}

}  // namespace displab
