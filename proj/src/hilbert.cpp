#include "displab/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <random>
#include <set>

namespace displab {

namespace {

double opnorm(const MatrixXcd& M) {
  return M.jacobiSvd().singularValues()(0);
}

void require_hermitian(const MatrixXcd& M, const char* what) {
  if ((M - M.adjoint()).norm() > 1e-12 * (1.0 + M.norm()))
    throw std::invalid_argument(std::string(what) + ": matrix not Hermitian");
}

MatrixXcd rand_hermitian(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatrixXcd G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = Complex(N(rng), N(rng));
  MatrixXcd H = 0.5 * (G + G.adjoint());
  return H / std::max(opnorm(H), 1e-12);
}

}  // namespace

OperatorPath::OperatorPath(VectorXd t, std::vector<MatrixXcd> A_, std::vector<MatrixXcd> B_,
                           std::vector<MatrixXcd> Bp)
    : times(std::move(t)), A(std::move(A_)), B(std::move(B_)), Bprime(std::move(Bp)) {
  const int n = grid_size();
  if (n < 2 || static_cast<int>(A.size()) != n || static_cast<int>(B.size()) != n)
    throw std::invalid_argument("OperatorPath: grid/matrix count mismatch");
  if (!Bprime.empty() && static_cast<int>(Bprime.size()) != n)
    throw std::invalid_argument("OperatorPath: Bprime count mismatch");
  for (int i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("OperatorPath: time grid not increasing");
  for (int i = 0; i < n; ++i) {
    require_hermitian(A[i], "OperatorPath A");
    require_hermitian(B[i], "OperatorPath B");
  }
}

namespace {

MatrixXcd interp(const VectorXd& times, const std::vector<MatrixXcd>& M, double t) {
  const int n = static_cast<int>(times.size());
  if (t <= times[0]) return M[0];
  if (t >= times[n - 1]) return M[n - 1];
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (times[mid] <= t ? lo : hi) = mid;
  }
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1 - w) * M[lo] + w * M[hi];
}

}  // namespace

MatrixXcd OperatorPath::A_at(double t) const { return interp(times, A, t); }
MatrixXcd OperatorPath::B_at(double t) const { return interp(times, B, t); }

MatrixXcd OperatorPath::Bprime_at(double t) const {
  if (has_analytic_Bprime()) return interp(times, Bprime, t);
  const double h = 1e-5;
  return (B_at(t + h) - B_at(t - h)) / (2 * h);
}

OperatorPath OperatorPath::constant(const MatrixXcd& A, const MatrixXcd& B, int grid) {
  VectorXd t = VectorXd::LinSpaced(grid, 0.0, 1.0);
  std::vector<MatrixXcd> As(grid, A), Bs(grid, B), Bp(grid, MatrixXcd::Zero(A.rows(), A.cols()));
  return OperatorPath(std::move(t), std::move(As), std::move(Bs), std::move(Bp));
}

OperatorPath OperatorPath::random_near_commuting(int m, unsigned seed, double coupling, int grid,
                                                 double spec_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // common frame: everything is a function of B0 plus a small random coupling
  MatrixXcd F = rand_hermitian(rng, m);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(F);
  VectorXd mu(m);
  for (int i = 0; i < m; ++i) mu[i] = spec_radius * U(rng);
  const MatrixXcd V = es.eigenvectors();
  const MatrixXcd B0 = V * mu.asDiagonal() * V.adjoint();
  auto fn_of_B0 = [&](const std::function<double(double)>& g) {
    VectorXd gv(m);
    for (int i = 0; i < m; ++i) gv[i] = g(mu[i]);
    return MatrixXcd(V * gv.asDiagonal() * V.adjoint());
  };
  const double R = spec_radius;
  const MatrixXcd A0 = fn_of_B0([R](double x) { return 0.8 * std::cos(2.0 * x / R); }) + coupling * rand_hermitian(rng, m);
  const MatrixXcd C1 = fn_of_B0([R](double x) { return 0.5 * x / R; }) + coupling * rand_hermitian(rng, m);
  const MatrixXcd C2 = fn_of_B0([R](double x) { return 0.3 * (x * x / (R * R) - 0.5); }) + coupling * rand_hermitian(rng, m);

  VectorXd t = VectorXd::LinSpaced(grid, 0.0, 1.0);
  std::vector<MatrixXcd> As(grid), Bs(grid), Bp(grid);
  for (int i = 0; i < grid; ++i) {
    const double ti = t[i];
    As[i] = A0;
    Bs[i] = B0 + ti * C1 + 0.3 * std::sin(M_PI * ti) * C2;
    Bp[i] = C1 + 0.3 * M_PI * std::cos(M_PI * ti) * C2;
    As[i] = 0.5 * (As[i] + As[i].adjoint().eval());
    Bs[i] = 0.5 * (Bs[i] + Bs[i].adjoint().eval());
    Bp[i] = 0.5 * (Bp[i] + Bp[i].adjoint().eval());
  }
  return OperatorPath(std::move(t), std::move(As), std::move(Bs), std::move(Bp));
}

MatrixXcd functional_calculus(const MatrixXcd& M, const std::function<double(double)>& g) {
  require_hermitian(M, "functional_calculus");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M);
  VectorXd gl = es.eigenvalues();
  for (int i = 0; i < gl.size(); ++i) gl[i] = g(gl[i]);
  return es.eigenvectors() * gl.asDiagonal() * es.eigenvectors().adjoint();
}

Evolution::Evolution(const OperatorPath& path, int substeps) : path_(&path), substeps_(substeps) {
  const int n = path.grid_size();
  const int m = path.m();
  U_.resize(n);
  U_[0] = MatrixXcd::Identity(m, m);
  for (int i = 1; i < n; ++i) U_[i] = propagate(U_[i - 1], path.times[i - 1], path.times[i], substeps_);
  for (int i = 0; i < n; ++i)
    unitarity_defect_ = std::max(unitarity_defect_,
                                 (U_[i].adjoint() * U_[i] - MatrixXcd::Identity(m, m)).norm());
}

MatrixXcd Evolution::propagate(const MatrixXcd& U0, double from, double to, int steps) const {
  MatrixXcd U = U0;
  const double h = (to - from) / steps;
  const Complex mi(0, -1);
  for (int s = 0; s < steps; ++s) {
    const double t0 = from + s * h;
    const MatrixXcd k1 = mi * (path_->A_at(t0) * U);
    const MatrixXcd k2 = mi * (path_->A_at(t0 + h / 2) * (U + h / 2 * k1));
    const MatrixXcd k3 = mi * (path_->A_at(t0 + h / 2) * (U + h / 2 * k2));
    const MatrixXcd k4 = mi * (path_->A_at(t0 + h) * (U + h * k3));
    U += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return U;
}

MatrixXcd Evolution::S(double t, double s) const {
  const VectorXd& tg = path_->times;
  const int n = static_cast<int>(tg.size());
  auto below = [&](double v) {
    int lo = 0;
    for (int i = 0; i < n; ++i)
      if (tg[i] <= v) lo = i;
    return lo;
  };
  const int is = below(s), it = below(t);
  // S(t,s) = S(t,t_it) S_grid(it,is) S(t_is, s)
  MatrixXcd Us = propagate(MatrixXcd::Identity(path_->m(), path_->m()), s, tg[is], std::max(1, substeps_));
  MatrixXcd Ut = propagate(MatrixXcd::Identity(path_->m(), path_->m()), tg[it], t, std::max(1, substeps_));
  return Ut * S_grid(it, is) * Us;
}

VectorXcd evolve(const OperatorPath& path, double s, double t, const VectorXcd& v, int substeps) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - s) * (path.grid_size() - 1))) * substeps);
  VectorXcd u = v;
  const double h = (t - s) / steps;
  const Complex mi(0, -1);
  for (int k = 0; k < steps; ++k) {
    const double t0 = s + k * h;
    const VectorXcd k1 = mi * (path.A_at(t0) * u);
    const VectorXcd k2 = mi * (path.A_at(t0 + h / 2) * (u + h / 2 * k1));
    const VectorXcd k3 = mi * (path.A_at(t0 + h / 2) * (u + h / 2 * k2));
    const VectorXcd k4 = mi * (path.A_at(t0 + h) * (u + h * k3));
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  const double defect = std::abs(u.norm() - v.norm()) / std::max(v.norm(), 1e-300);
  if (defect > 1e-6) throw std::runtime_error("evolve: unitarity defect " + std::to_string(defect) + "; step count too small");
  return u;
}

double commutator_constant(const OperatorPath& path, const std::vector<VectorXcd>& samples) {
  double sup = 0;
  const Complex mi(0, -1);
  for (int i = 0; i < path.grid_size(); ++i) {
    const double t = path.times[i];
    const MatrixXcd C = mi * path.Bprime_at(t) + (path.A[i] * path.B[i] - path.B[i] * path.A[i]);
    for (const auto& u : samples) {
      const double num = (C * u).norm();
      const double den = (path.B[i] * u).norm() + u.norm();
      sup = std::max(sup, num / den);
    }
  }
  return sup;
}

double bdiff_constant(const OperatorPath& path, double s, double t, const std::vector<VectorXcd>& samples) {
  if (t == s) throw std::invalid_argument("bdiff_constant: t == s");
  Evolution ev(path);
  const MatrixXcd S = ev.S(t, s);
  const MatrixXcd Bt = path.B_at(t), Bs = path.B_at(s);
  const MatrixXcd D = Bt * S - S * Bs;
  double sup = 0;
  for (const auto& u : samples) {
    const double num = (D * u).norm();
    const double den = std::abs(t - s) * ((Bs * u).norm() + u.norm());
    sup = std::max(sup, num / den);
  }
  return sup;
}

MatrixXcd simple_parametrix_kernel(const Evolution& ev, int i, int k) {
  const OperatorPath& path = ev.path();
  const double tau = path.times[i] - path.times[k];
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(path.B[k]);
  VectorXd f(es.eigenvalues().size());
  for (int p = 0; p < f.size(); ++p) {
    const double b = es.eigenvalues()[p];
    // right-continuous in t: the coincidence limit keeps the forward projection
    const bool keep = tau >= 0 ? b < 0 : b > 0;
    f[p] = keep ? std::exp(tau * b) : 0.0;
  }
  return ev.S_grid(i, k) * (es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint());
}

namespace {

/// 4th-order quadrature weights on n uniform intervals. For n >= 6 the
/// endpoint-corrected (Gregory) trapezoid rule is used: unlike composite
/// Simpson its error varies smoothly with n, so time differences of the
/// integrals stay 4th-order accurate. Small n fall back to Newton-Cotes.
std::vector<double> quad_weights(int n, double h) {
  std::vector<double> w(n + 1, 0.0);
  if (n <= 0) return w;
  switch (n) {
    case 1:
      w = {0.5, 0.5};
      break;
    case 2:
      w = {1.0 / 3, 4.0 / 3, 1.0 / 3};
      break;
    case 3:
      w = {3.0 / 8, 9.0 / 8, 9.0 / 8, 3.0 / 8};
      break;
    case 4:
      w = {14.0 / 45, 64.0 / 45, 24.0 / 45, 64.0 / 45, 14.0 / 45};
      break;
    case 5:
      w = {1.0 / 3, 4.0 / 3, 1.0 / 3 + 3.0 / 8, 9.0 / 8, 9.0 / 8, 3.0 / 8};
      break;
    default:
      w.assign(n + 1, 1.0);
      w[0] = w[n] = 3.0 / 8;
      w[1] = w[n - 1] = 7.0 / 6;
      w[2] = w[n - 2] = 23.0 / 24;
      break;
  }
  for (auto& v : w) v *= h;
  return w;
}

}  // namespace

TimeSamples simple_parametrix_apply(const OperatorPath& path, const TimeSamples& f) {
  const int n = path.grid_size();
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("simple_parametrix_apply: forcing grid mismatch");
  Evolution ev(path);
  const double h = path.times[1] - path.times[0];
  const Complex im(0, 1);
  TimeSamples u(n, VectorXcd::Zero(path.m()));
  // cache eigendecompositions of B(s_k)
  std::vector<Eigen::SelfAdjointEigenSolver<MatrixXcd>> es(n);
  for (int k = 0; k < n; ++k) es[k].compute(path.B[k]);
  // endpoint s = t carries different one-sided kernel limits per branch
  auto branch_term = [&](int i, int k, bool forward) {
    const double tau = path.times[i] - path.times[k];
    VectorXcd g = es[k].eigenvectors().adjoint() * f[k];
    for (int p = 0; p < g.size(); ++p) {
      const double b = es[k].eigenvalues()[p];
      const bool keep = forward ? b < 0 : b > 0;
      g[p] *= keep ? std::exp(tau * b) : 0.0;
    }
    return VectorXcd(ev.S_grid(i, k) * (es[k].eigenvectors() * g));
  };
  for (int i = 0; i < n; ++i) {
    VectorXcd acc = VectorXcd::Zero(path.m());
    const std::vector<double> wf = quad_weights(i, h);
    for (int k = 0; k <= i; ++k)
      if (wf[k] != 0) acc += wf[k] * branch_term(i, k, true);
    const std::vector<double> wb = quad_weights(n - 1 - i, h);
    for (int k = i; k < n; ++k)
      if (wb[k - i] != 0) acc -= wb[k - i] * branch_term(i, k, false);
    u[i] = im * acc;
  }
  return u;
}

SimpleParametrixNorms simple_parametrix_norms(const OperatorPath& path, double t, double s) {
  if (t == s) throw std::invalid_argument("simple_parametrix_norms: t == s");
  Evolution ev(path);
  const MatrixXcd Bs = path.B_at(s), Bt = path.B_at(t);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Bs);
  auto Hat = [&](double tt) {
    VectorXd f(es.eigenvalues().size());
    for (int p = 0; p < f.size(); ++p) {
      const double b = es.eigenvalues()[p];
      f[p] = (tt - s) * b < 0 ? std::exp((tt - s) * b) : 0.0;
    }
    return MatrixXcd(ev.S(tt, s) * (es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint()));
  };
  const MatrixXcd H = Hat(t);
  SimpleParametrixNorms out;
  const double dt = std::abs(t - s);
  out.h_norm = opnorm(H);
  out.hb_norm = dt * opnorm(H * Bs);
  out.bh_norm = dt * opnorm(Bt * H);
  out.bhb_norm = dt * dt * opnorm(Bt * H * Bs);
  const double fdh = 1e-4 * std::min(1.0, dt / 4);
  const MatrixXcd Hp2 = Hat(t + 2 * fdh), Hp1 = Hat(t + fdh), Hm1 = Hat(t - fdh), Hm2 = Hat(t - 2 * fdh);
  const Complex mi(0, -1);
  const MatrixXcd Dt = mi * ((Hm2 - Hp2 + 8.0 * (Hp1 - Hm1)) / (12 * fdh));
  const MatrixXcd R = Dt + (path.A_at(t) + Complex(0, 1) * Bt) * H;
  out.residual_norm = opnorm(R);
  return out;
}

DyadicCalculus::DyadicCalculus(double spectral_radius_bound) {
  if (spectral_radius_bound <= 0) throw std::invalid_argument("DyadicCalculus: bound must be positive");
  J_ = 0;
  while (std::pow(2.0, J_ + 1) < spectral_radius_bound) ++J_;
}

double DyadicCalculus::rho(double r) const {
  auto eta = [](double x) { return x > 1.0 && x < 4.0 ? std::exp(-1.0 / ((x - 1.0) * (4.0 - x))) : 0.0; };
  if (r <= 0) return 0.0;
  const double e = eta(r);
  if (e == 0.0) return 0.0;
  double F = 0;
  const int j0 = static_cast<int>(std::floor(std::log2(r)));
  for (int j = j0 - 2; j <= j0 + 1; ++j) {
    const double v = eta(std::ldexp(r, -j));
    F += v * v;
  }
  return e / std::sqrt(F);
}

double DyadicCalculus::kappa(int j, double xi) const {
  const double r = std::abs(xi);
  if (j > 0) return rho(std::ldexp(r, -j));
  double s = 0;
  for (int i = 1; i <= J_ + 2; ++i) {
    const double v = rho(std::ldexp(r, -i));
    s += v * v;
  }
  return std::sqrt(std::max(0.0, 1.0 - s));
}

double DyadicCalculus::kappa_plus(int j, double xi) const {
  if (j == 0) return kappa(0, xi);
  return xi > 0 ? kappa(j, xi) : 0.0;
}

double DyadicCalculus::kappa_minus(int j, double xi) const {
  if (j == 0) return 0.0;
  return xi < 0 ? kappa(j, xi) : 0.0;
}

double DyadicCalculus::partition_defect(int grid) const {
  const double R = coverage();
  double worst = 0;
  for (int g = 0; g <= grid; ++g) {
    const double xi = -R + 2 * R * g / grid;
    double s = 0;
    for (int j = 0; j <= J_; ++j) {
      const double k = kappa(j, xi);
      s += k * k;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

namespace {

MatrixXcd dyadic_kernel_branch(const Evolution& ev, const DyadicCalculus& calc, int i, int k, double delta,
                               bool forward) {
  const OperatorPath& path = ev.path();
  const double tau = path.times[i] - path.times[k];
  Eigen::SelfAdjointEigenSolver<MatrixXcd> ei(path.B[i]), ek(path.B[k]);
  const int m = path.m();
  for (int p = 0; p < m; ++p)
    if (std::abs(delta * ei.eigenvalues()[p]) > calc.coverage() || std::abs(delta * ek.eigenvalues()[p]) > calc.coverage())
      throw std::runtime_error("dyadic_parametrix_kernel: spectrum outside calculus range");
  // W(p,q) = sum_j kappa_j^{-/+}(delta b_p(t)) kappa_j^{-/+}(delta b_q(s))
  MatrixXd W = MatrixXd::Zero(m, m);
  for (int j = 0; j <= calc.levels() - 1; ++j) {
    VectorXd kt(m), ks(m);
    for (int p = 0; p < m; ++p) {
      const double bt = delta * ei.eigenvalues()[p];
      const double bs = delta * ek.eigenvalues()[p];
      kt[p] = forward ? calc.kappa_minus(j, bt) : calc.kappa_plus(j, bt);
      ks[p] = forward ? calc.kappa_minus(j, bs) : calc.kappa_plus(j, bs);
    }
    W += kt * ks.transpose();
  }
  const MatrixXcd mid = ei.eigenvectors().adjoint() * ev.S_grid(i, k) * ek.eigenvectors();
  const MatrixXcd core = ei.eigenvectors() * (W.cast<Complex>().cwiseProduct(mid)) * ek.eigenvectors().adjoint();
  VectorXd e(m);
  for (int p = 0; p < m; ++p) e[p] = std::exp(delta * tau * ei.eigenvalues()[p]);
  const MatrixXcd expo = ei.eigenvectors() * e.asDiagonal() * ei.eigenvectors().adjoint();
  return core * expo;
}

}  // namespace

MatrixXcd dyadic_parametrix_kernel(const Evolution& ev, const DyadicCalculus& calc, int i, int k, double delta) {
  const bool forward = ev.path().times[i] >= ev.path().times[k];
  return dyadic_kernel_branch(ev, calc, i, k, delta, forward);
}

TimeSamples dyadic_parametrix_apply(const OperatorPath& path, const DyadicCalculus& calc, const TimeSamples& f,
                                    double delta) {
  const int n = path.grid_size();
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("dyadic_parametrix_apply: forcing grid mismatch");
  Evolution ev(path);
  const double h = path.times[1] - path.times[0];
  const Complex im(0, 1);
  TimeSamples u(n, VectorXcd::Zero(path.m()));
  for (int i = 0; i < n; ++i) {
    VectorXcd acc = VectorXcd::Zero(path.m());
    const std::vector<double> wf = quad_weights(i, h);
    for (int k = 0; k <= i; ++k)
      if (wf[k] != 0) acc += wf[k] * (dyadic_kernel_branch(ev, calc, i, k, delta, true) * f[k]);
    const std::vector<double> wb = quad_weights(n - 1 - i, h);
    for (int k = i; k < n; ++k)
      if (wb[k - i] != 0) acc -= wb[k - i] * (dyadic_kernel_branch(ev, calc, i, k, delta, false) * f[k]);
    u[i] = im * acc;
  }
  return u;
}

OrthogonalityConstants almost_orthogonality_constants(const OperatorPath& path, const DyadicCalculus& calc, double t,
                                                      double s) {
  if (t == s) throw std::invalid_argument("almost_orthogonality_constants: t == s");
  const MatrixXcd Bt = path.B_at(t), Bs = path.B_at(s);
  const int m = path.m();
  const double dt = std::abs(t - s);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> est(Bt), ess(Bs);
  auto kap_t = [&](int j) {
    VectorXd v(m);
    for (int p = 0; p < m; ++p) v[p] = calc.kappa(j, est.eigenvalues()[p]);
    return MatrixXcd(est.eigenvectors() * v.asDiagonal() * est.eigenvectors().adjoint());
  };
  auto kap_s = [&](int j) {
    VectorXd v(m);
    for (int p = 0; p < m; ++p) v[p] = calc.kappa(j, ess.eigenvalues()[p]);
    return MatrixXcd(ess.eigenvectors() * v.asDiagonal() * ess.eigenvectors().adjoint());
  };
  // pseudoinverse of B(s) for the low-mode bound
  VectorXd inv(m);
  const double tol = 1e-8 * std::max(1.0, ess.eigenvalues().cwiseAbs().maxCoeff());
  for (int p = 0; p < m; ++p) {
    const double b = ess.eigenvalues()[p];
    inv[p] = std::abs(b) > tol ? 1.0 / b : 0.0;
  }
  const MatrixXcd Bs_pinv = ess.eigenvectors() * inv.asDiagonal() * ess.eigenvectors().adjoint();

  OrthogonalityConstants out{0, 0, 0, 0};
  const int J = calc.levels() - 1;
  for (int j = 0; j <= J; ++j) {
    const MatrixXcd D = kap_t(j) - kap_s(j);
    out.low_mode = std::max(out.low_mode, opnorm(D * Bs_pinv) / (dt * std::pow(2.0, -j)));
    out.lipschitz = std::max(out.lipschitz, opnorm(D) / dt);
    out.high_mode = std::max(out.high_mode, opnorm(Bt * D) / (dt * std::pow(2.0, j)));
    for (int i2 = 0; i2 <= J; ++i2) {
      if (std::abs(i2 - j) < 3) continue;
      const double norm = opnorm(kap_t(i2) * kap_s(j));
      out.cross = std::max(out.cross, norm / (dt * std::pow(2.0, -std::abs(i2 - j))));
    }
  }
  return out;
}

DualAtom random_l1_atom(const OperatorPath& path, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> T(1, path.grid_size() - 2);
  std::normal_distribution<double> N(0.0, 1.0);
  DualAtom a;
  a.l1_type = true;
  a.grid_indices = {T(rng)};
  VectorXcd v(path.m());
  for (int i = 0; i < v.size(); ++i) v[i] = Complex(N(rng), N(rng));
  a.vectors = {v / v.norm()};
  return a;
}

DualAtom random_v2_atom(const OperatorPath& path, unsigned seed, int jumps) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<int> T(1, path.grid_size() - 2);
  std::normal_distribution<double> N(0.0, 1.0);
  std::set<int> idx;
  while (static_cast<int>(idx.size()) < jumps + 1) idx.insert(T(rng));
  DualAtom a;
  a.l1_type = false;
  a.grid_indices.assign(idx.begin(), idx.end());
  double total = 0;
  for (int k = 0; k + 1 < static_cast<int>(a.grid_indices.size()); ++k) {
    VectorXcd v(path.m());
    for (int i = 0; i < v.size(); ++i) v[i] = Complex(N(rng), N(rng));
    a.vectors.push_back(v);
    total += v.squaredNorm();
  }
  for (auto& v : a.vectors) v /= std::sqrt(total);
  return a;
}

TimeSamples apply_kernel_to_atom(const OperatorPath& path,
                                 const std::function<MatrixXcd(int, int)>& kernel_grid, const DualAtom& atom) {
  const int n = path.grid_size();
  const Complex im(0, 1);
  TimeSamples u(n, VectorXcd::Zero(path.m()));
  auto add_delta = [&](int k0, const VectorXcd& f0) {
    for (int i = 0; i < n; ++i) {
      const double sgn = i >= k0 ? 1.0 : -1.0;
      u[i] += sgn * im * (kernel_grid(i, k0) * f0);
    }
  };
  if (atom.l1_type) {
    add_delta(atom.grid_indices[0], atom.vectors[0]);
    return u;
  }
  Evolution ev(path, 2);
  for (int k = 0; k + 1 < static_cast<int>(atom.grid_indices.size()); ++k) {
    const int a = atom.grid_indices[k], b = atom.grid_indices[k + 1];
    add_delta(b, ev.S_grid(b, a) * atom.vectors[k]);
    add_delta(a, -atom.vectors[k]);
  }
  return u;
}

double atom_residual_sup(const OperatorPath& path, const TimeSamples& u, const DualAtom& atom, double delta) {
  const int n = path.grid_size();
  const double h = path.times[1] - path.times[0];
  const Complex mi(0, -1), im(0, 1);
  auto near_jump = [&](int i) {
    for (int k : atom.grid_indices)
      if (std::abs(i - k) <= 3) return true;
    return false;
  };
  double sup = 0;
  for (int i = 2; i < n - 2; ++i) {
    if (near_jump(i)) continue;
    const VectorXcd Dt = mi * ((u[i - 2] - u[i + 2] + 8.0 * (u[i + 1] - u[i - 1])) / (12 * h));
    const VectorXcd R = Dt + path.A[i] * u[i] + im * delta * (path.B[i] * u[i]);
    sup = std::max(sup, R.norm());
  }
  return sup;
}

std::vector<DeltaScanRow> delta_scan(const OperatorPath& path, const DyadicCalculus& calc,
                                     const std::vector<double>& deltas, int probes, unsigned seed) {
  Evolution ev(path);
  std::vector<DualAtom> atoms;
  for (int p = 0; p < probes; ++p)
    atoms.push_back(p % 2 == 0 ? random_l1_atom(path, seed + p) : random_v2_atom(path, seed + p));
  std::vector<DeltaScanRow> rows;
  for (double d : deltas) {
    if (!(d > 0 && d <= 1)) throw std::invalid_argument("delta_scan: delta must lie in (0,1]");
    auto kfn = [&](int i, int k) { return dyadic_parametrix_kernel(ev, calc, i, k, d); };
    DeltaScanRow row{d, 0, 0};
    for (const auto& atom : atoms) {
      const TimeSamples u = apply_kernel_to_atom(path, kfn, atom);
      double sup = 0;
      for (const auto& v : u) sup = std::max(sup, v.norm());
      row.mapping_constant = std::max(row.mapping_constant, sup);
      row.residual_constant = std::max(row.residual_constant, atom_residual_sup(path, u, atom, d));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace displab
