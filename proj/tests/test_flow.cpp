#include <doctest.h>

#include "displab/flow.hpp"

using namespace displab;

TEST_CASE("free schrodinger flow closed form") {
  // x' = 2 xi, psi' = -xi^2 + 2 xi^2 = xi^2, X = 2 t, Xi = 1
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 2}});
  FlowState st = integrate_flow(a, PhasePoint::d1(0, 1), 0.0, 0.5, 64);
  CHECK(st.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(st.xi[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(st.psi == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(st.X(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(st.Xi(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("half-wave flow: unit transport, zero phase") {
  Symbol a = make_symbol("half_wave", {{"dim", 1}, {"lambda", 2}});
  FlowState st = integrate_flow(a, PhasePoint::d1(0.3, 2), 0.0, 1.0, 64);
  CHECK(st.x[0] == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(st.xi[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(st.psi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero symbol flow is the identity with Xi = I") {
  Symbol z = make_symbol("constant", {{"dim", 2}, {"lambda", 2}, {"c", 0}});
  VectorXd x(2), xi(2);
  x << 0.4, -0.2;
  xi << 1.0, 2.0;
  FlowState st = integrate_flow(z, PhasePoint(0, x, xi), 0.0, 1.0, 16);
  CHECK((st.x - x).norm() == 0.0);
  CHECK((st.xi - xi).norm() == 0.0);
  CHECK(st.psi == 0.0);
  CHECK(st.X.norm() == 0.0);
  CHECK((st.Xi - MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("variable metric self-convergence") {
  Symbol a = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 2}, {"eps", 0.1}});
  FlowState c = integrate_flow(a, PhasePoint::d1(0, 1), 0.0, 1.0, 2048);
  FlowState r = integrate_flow(a, PhasePoint::d1(0, 1), 0.0, 1.0, 65536);
  CHECK(std::abs(c.x[0] - r.x[0]) < 1e-8);
  CHECK(std::abs(c.xi[0] - r.xi[0]) < 1e-8);
  CHECK(std::abs(c.psi - r.psi) < 1e-8);
  CHECK((c.X - r.X).norm() < 1e-8);
  CHECK((c.Xi - r.Xi).norm() < 1e-8);
}

TEST_CASE("flow composition and time reversal") {
  Symbol a = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 2}, {"eps", 0.2}});
  const PhasePoint start = PhasePoint::d1(0.2, 1.5);
  FlowState mid = integrate_flow(a, start, 0.0, 0.4, 1024);
  FlowState full = integrate_flow(a, start, 0.0, 1.0, 2560);
  FlowState cont = continue_flow(a, mid, 1.0, 1536);
  CHECK(std::abs(cont.x[0] - full.x[0]) < 1e-8);
  CHECK(std::abs(cont.psi - full.psi) < 1e-8);  // phase adds along the flow

  FlowState back = integrate_flow(a, full.point(), 1.0, 0.0, 2560);
  CHECK(std::abs(back.x[0] - start.x[0]) < 1e-8);
  CHECK(std::abs(back.xi[0] - start.xi[0]) < 1e-8);
}

TEST_CASE("xi-independent symbol: psi equals the quadrature of -a") {
  // custom x-only symbol a(x) = cos(x_1); flow freezes x
  auto ev = [](double, const VectorXd& x, const VectorXd&, const VectorXi& alpha, const VectorXi& beta) -> Complex {
    if (beta.sum() > 0) return 0.0;
    const int k = alpha[0];
    switch (k % 4) {
      case 0: return std::cos(x[0]);
      case 1: return -std::sin(x[0]);
      case 2: return -std::cos(x[0]);
      default: return std::sin(x[0]);
    }
  };
  Symbol a(1, 2.0, 2, 0, 8, 8, ev, "potential");
  FlowState st = integrate_flow(a, PhasePoint::d1(0.7, 1.0), 0.0, 1.0, 256);
  CHECK(st.x[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(st.psi == doctest::Approx(-std::cos(0.7) * 1.0).epsilon(1e-10));
}

TEST_CASE("fourth-order convergence: doubling steps gains >= 8x") {
  Symbol a = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 2}, {"eps", 0.2}});
  const PhasePoint start = PhasePoint::d1(0.1, 1.2);
  FlowState ref = integrate_flow(a, start, 0.0, 1.0, 32768);
  auto err = [&](int steps) {
    FlowState st = integrate_flow(a, start, 0.0, 1.0, steps);
    return std::abs(st.x[0] - ref.x[0]) + std::abs(st.psi - ref.psi);
  };
  const double e1 = err(32), e2 = err(64);
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("jacobian checks") {
  Symbol free = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 2}});
  JacobianCheck j1 = flow_jacobian_check(free, PhasePoint::d1(0, 1), 0.0, 0.7, 64);
  CHECK(j1.symplectic_defect < 1e-10);
  CHECK(j1.fd_defect < 1e-8);

  Symbol vm = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 2}, {"eps", 0.2}});
  JacobianCheck j2 = flow_jacobian_check(vm, PhasePoint::d1(0, 1), 0.0, 1.0, 4096);
  CHECK(j2.symplectic_defect < 1e-6);

  Symbol z = make_symbol("constant", {{"dim", 1}, {"lambda", 2}, {"c", 0}});
  JacobianCheck j3 = flow_jacobian_check(z, PhasePoint::d1(0, 1), 0.0, 1.0, 8);
  CHECK(j3.symplectic_defect == 0.0);
}

TEST_CASE("linearization drift") {
  const double lambda = 64;
  Symbol free = make_symbol("schrodinger", {{"dim", 1}, {"lambda", lambda}, {"scale", 1.0 / lambda}, {"k_order", 1}});
  CHECK(linearization_drift(free, PhasePoint::d1(0, 1), 0.25, lambda, 256) < 1e-12);

  Symbol z = make_symbol("constant", {{"dim", 1}, {"lambda", lambda}, {"c", 0}});
  CHECK(linearization_drift(z, PhasePoint::d1(0, 1), 0.25, lambda, 16) == 0.0);

  Symbol vm = make_symbol("variable_metric",
                          {{"dim", 1}, {"lambda", lambda}, {"eps", 0.2}, {"scale", 1.0 / lambda}, {"k_order", 1}});
  const double d1 = linearization_drift(vm, PhasePoint::d1(0.4, 1), 0.25, lambda, 512);
  const double d2 = linearization_drift(vm, PhasePoint::d1(0.4, 1), 0.25 / 4, lambda, 512);
  const double d3 = linearization_drift(vm, PhasePoint::d1(0.4, 1), 0.25 / 16, lambda, 512);
  // drift ~ sqrt(t0): quartering t0 halves the drift, within a factor 2
  CHECK(d1 / d2 > 1.0);
  CHECK(d1 / d2 < 4.0);
  CHECK(d2 / d3 > 1.0);
  CHECK(d2 / d3 < 4.0);
  const double slope = std::log(d1 / d3) / std::log(16.0);
  CHECK(slope == doctest::Approx(0.5).epsilon(0.4));
}

TEST_CASE("blow-up reporting") {
  // x' = xi^2 style growth: a = x^2 xi^2 / something that blows up fast
  auto ev = [](double, const VectorXd& x, const VectorXd& xi, const VectorXi& alpha, const VectorXi& beta) -> Complex {
    // a = x^2 xi^2: hamilton system with finite-time blow-up for large data
    const int ax = alpha[0], bx = beta[0];
    auto pw = [](double v, int n) { return n == 0 ? v * v : n == 1 ? 2 * v : n == 2 ? 2.0 : 0.0; };
    return pw(x[0], ax) * pw(xi[0], bx);
  };
  Symbol a(1, 2.0, 2, 0, 8, 8, ev, "quartic");
  CHECK_THROWS_AS((void)integrate_flow(a, PhasePoint::d1(10.0, 10.0), 0.0, 8.0, 64), FlowBlowup);
}
