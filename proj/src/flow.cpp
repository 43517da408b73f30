#include "displab/flow.hpp"

namespace displab {

namespace {

struct FlowDeriv {
  VectorXd dx, dxi;
  double dpsi;
  MatrixXd dX, dXi;
};

FlowDeriv rhs(const Symbol& sym, double t, const VectorXd& x, const VectorXd& xi, const MatrixXd& X,
              const MatrixXd& Xi) {
  PhasePoint p(t, x, xi);
  FlowDeriv d;
  d.dx = sym.grad_xi(p);
  d.dxi = -sym.grad_x(p);
  d.dpsi = -sym.eval(p).real() + xi.dot(d.dx);
  const MatrixXd a_xixi = sym.hess_xi(p);
  const MatrixXd a_xix = sym.hess_xix(p);  // (i,j) = d_xi_i d_x_j
  const MatrixXd a_xx = sym.hess_xx(p);
  d.dX = a_xix * X + a_xixi * Xi;
  d.dXi = -a_xx * X - a_xix.transpose() * Xi;
  return d;
}

}  // namespace

FlowState integrate_flow(const Symbol& sym, const PhasePoint& start, double s, double t, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_flow: steps >= 1 required");
  const int d = sym.dim();
  FlowState st;
  st.x = start.x;
  st.xi = start.xi;
  st.psi = 0;
  st.X = MatrixXd::Zero(d, d);
  st.Xi = MatrixXd::Identity(d, d);
  st.t = s;
  return continue_flow(sym, st, t, steps);
}

FlowState continue_flow(const Symbol& sym, const FlowState& state, double t, int steps) {
  FlowState st = state;
  const double h = (t - st.t) / steps;
  if (h == 0) return st;
  for (int step = 0; step < steps; ++step) {
    const double tn = st.t;
    const FlowDeriv k1 = rhs(sym, tn, st.x, st.xi, st.X, st.Xi);
    const FlowDeriv k2 = rhs(sym, tn + h / 2, st.x + h / 2 * k1.dx, st.xi + h / 2 * k1.dxi, st.X + h / 2 * k1.dX,
                             st.Xi + h / 2 * k1.dXi);
    const FlowDeriv k3 = rhs(sym, tn + h / 2, st.x + h / 2 * k2.dx, st.xi + h / 2 * k2.dxi, st.X + h / 2 * k2.dX,
                             st.Xi + h / 2 * k2.dXi);
    const FlowDeriv k4 =
        rhs(sym, tn + h, st.x + h * k3.dx, st.xi + h * k3.dxi, st.X + h * k3.dX, st.Xi + h * k3.dXi);
    st.x += h / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
    st.xi += h / 6 * (k1.dxi + 2 * k2.dxi + 2 * k3.dxi + k4.dxi);
    st.psi += h / 6 * (k1.dpsi + 2 * k2.dpsi + 2 * k3.dpsi + k4.dpsi);
    st.X += h / 6 * (k1.dX + 2 * k2.dX + 2 * k3.dX + k4.dX);
    st.Xi += h / 6 * (k1.dXi + 2 * k2.dXi + 2 * k3.dXi + k4.dXi);
    st.t = tn + h;
    if (!(st.x.allFinite() && st.xi.allFinite() && std::isfinite(st.psi) && st.X.allFinite() && st.Xi.allFinite()))
      throw FlowBlowup(tn);
  }
  st.t = t;
  return st;
}

JacobianCheck flow_jacobian_check(const Symbol& sym, const PhasePoint& start, double s, double t, int steps) {
  const int d = sym.dim();
  // batched variational equations: J = [dX/dx0 dX/dxi0; dXi/dx0 dXi/dxi0],
  // columns propagated jointly with the base flow
  MatrixXd Xx = MatrixXd::Identity(d, d), Xxi = MatrixXd::Zero(d, d);
  MatrixXd Xix = MatrixXd::Zero(d, d), Xixi = MatrixXd::Identity(d, d);
  VectorXd x = start.x, xi = start.xi;
  const double h = (t - s) / steps;
  auto step_pair = [&](double tn, const VectorXd& xv, const VectorXd& xiv, const MatrixXd& Xa, const MatrixXd& Xb,
                       MatrixXd& dXa, MatrixXd& dXb) {
    PhasePoint p(tn, xv, xiv);
    const MatrixXd a_xixi = sym.hess_xi(p);
    const MatrixXd a_xix = sym.hess_xix(p);
    const MatrixXd a_xx = sym.hess_xx(p);
    dXa = a_xix * Xa + a_xixi * Xb;
    dXb = -a_xx * Xa - a_xix.transpose() * Xb;
  };
  for (int stp = 0; stp < steps; ++stp) {
    const double tn = s + stp * h;
    // RK4 on (x, xi, Xx, Xix, Xxi, Xixi)
    struct St { VectorXd x, xi; MatrixXd a, b, c, dm; };
    auto deriv = [&](const St& u, double tt) {
      St du;
      PhasePoint p(tt, u.x, u.xi);
      du.x = sym.grad_xi(p);
      du.xi = -sym.grad_x(p);
      step_pair(tt, u.x, u.xi, u.a, u.b, du.a, du.b);
      step_pair(tt, u.x, u.xi, u.c, u.dm, du.c, du.dm);
      return du;
    };
    St u{x, xi, Xx, Xix, Xxi, Xixi};
    St k1 = deriv(u, tn);
    St u2{x + h / 2 * k1.x, xi + h / 2 * k1.xi, Xx + h / 2 * k1.a, Xix + h / 2 * k1.b, Xxi + h / 2 * k1.c,
          Xixi + h / 2 * k1.dm};
    St k2 = deriv(u2, tn + h / 2);
    St u3{x + h / 2 * k2.x, xi + h / 2 * k2.xi, Xx + h / 2 * k2.a, Xix + h / 2 * k2.b, Xxi + h / 2 * k2.c,
          Xixi + h / 2 * k2.dm};
    St k3 = deriv(u3, tn + h / 2);
    St u4{x + h * k3.x, xi + h * k3.xi, Xx + h * k3.a, Xix + h * k3.b, Xxi + h * k3.c, Xixi + h * k3.dm};
    St k4 = deriv(u4, tn + h);
    x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    xi += h / 6 * (k1.xi + 2 * k2.xi + 2 * k3.xi + k4.xi);
    Xx += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
    Xix += h / 6 * (k1.b + 2 * k2.b + 2 * k3.b + k4.b);
    Xxi += h / 6 * (k1.c + 2 * k2.c + 2 * k3.c + k4.c);
    Xixi += h / 6 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm);
    if (!(x.allFinite() && xi.allFinite())) throw FlowBlowup(tn);
  }
  MatrixXd J(2 * d, 2 * d);
  J.topLeftCorner(d, d) = Xx;
  J.topRightCorner(d, d) = Xxi;
  J.bottomLeftCorner(d, d) = Xix;
  J.bottomRightCorner(d, d) = Xixi;
  MatrixXd Omega = MatrixXd::Zero(2 * d, 2 * d);
  Omega.topRightCorner(d, d) = MatrixXd::Identity(d, d);
  Omega.bottomLeftCorner(d, d) = -MatrixXd::Identity(d, d);
  JacobianCheck chk;
  chk.symplectic_defect = (J.transpose() * Omega * J - Omega).norm();

  // finite-difference Jacobian in xi0 against the variational (X, Xi)
  const FlowState base = integrate_flow(sym, start, s, t, steps);
  const double fdh = 1e-5 * std::max(1.0, start.xi.cwiseAbs().maxCoeff());
  MatrixXd Xfd(d, d), Xifd(d, d);
  for (int a = 0; a < d; ++a) {
    PhasePoint pp = start, pm = start;
    pp.xi[a] += fdh;
    pm.xi[a] -= fdh;
    const FlowState fp = integrate_flow(sym, pp, s, t, steps);
    const FlowState fm = integrate_flow(sym, pm, s, t, steps);
    Xfd.col(a) = (fp.x - fm.x) / (2 * fdh);
    Xifd.col(a) = (fp.xi - fm.xi) / (2 * fdh);
  }
  chk.fd_defect = std::sqrt((base.X - Xfd).squaredNorm() + (base.Xi - Xifd).squaredNorm());
  return chk;
}

double linearization_drift(const Symbol& sym, const PhasePoint& start, double t0, double lambda, int steps) {
  const Symbol resc = rescale_fixedtime(sym, t0, lambda);
  const FlowState fs = integrate_flow(resc, start, 0.0, 1.0, steps);
  PhasePoint p0 = start;
  p0.t = 0;
  const MatrixXd target = resc.hess_xi(p0);
  return (fs.X - target).norm();
}

}  // namespace displab
