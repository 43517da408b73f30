#include <doctest.h>

#include "displab/assumptions.hpp"

using namespace displab;

namespace {

// |xi|^2 - lambda^2, exact derivatives
Symbol shell_symbol(int d, double lambda) {
  auto ev = [lambda](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha,
                     const VectorXi& beta) -> Complex {
    if (alpha.sum() > 0) return 0.0;
    int which = -1, ord = 0;
    for (int a = 0; a < beta.size(); ++a)
      if (beta[a] > 0) {
        if (which >= 0 && which != a) return 0.0;
        which = a;
        ord = beta[a];
      }
    if (which < 0) return xi.squaredNorm() - lambda * lambda;
    if (ord == 1) return 2.0 * xi[which];
    if (ord == 2) return 2.0;
    return 0.0;
  };
  return Symbol(d, lambda, 2, 2, 8, 8, ev, "shell");
}

// lambda * xi_1
Symbol drift_symbol(int d, double lambda) {
  auto ev = [lambda](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha,
                     const VectorXi& beta) -> Complex {
    if (alpha.sum() > 0) return 0.0;
    const int o = beta.sum();
    if (o == 0) return lambda * xi[0];
    if (o == 1 && beta[0] == 1) return lambda;
    return 0.0;
  };
  return Symbol(d, lambda, 2, 2, 8, 8, ev, "drift");
}

// xi_d - xi_1^2 - ... - xi_{d-1}^2 (paraboloid graph over the last axis)
Symbol paraboloid_symbol(int d, double lambda) {
  auto ev = [d](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha,
                const VectorXi& beta) -> Complex {
    if (alpha.sum() > 0) return 0.0;
    const int o = beta.sum();
    if (o == 0) {
      double s = xi[d - 1];
      for (int a = 0; a < d - 1; ++a) s -= xi[a] * xi[a];
      return s;
    }
    if (o == 1) {
      for (int a = 0; a < d; ++a)
        if (beta[a] == 1) return a == d - 1 ? 1.0 : -2.0 * xi[a];
    }
    if (o == 2) {
      for (int a = 0; a < d - 1; ++a)
        if (beta[a] == 2) return -2.0;
    }
    return 0.0;
  };
  return Symbol(d, lambda, 2, 1, 8, 8, ev, "paraboloid");
}

}  // namespace

TEST_CASE("curvature minors: sphere, plane, paraboloid") {
  const double lambda = 16;
  for (int d : {2, 3}) {
    Symbol shell = shell_symbol(d, lambda);
    VectorXd xi = VectorXd::Zero(d);
    xi[0] = lambda;
    PhasePoint p(0.0, VectorXd::Zero(d), xi);
    const VectorXd nu = xi / xi.norm();
    const double m = curvature_minor(shell, p, nu, d - 1);
    CHECK(m == doctest::Approx(std::pow(lambda, -(d - 1))).epsilon(1e-10));
    // invariance under a random orthogonal change of the tangent basis
    const double mr = curvature_minor(shell, p, nu, d - 1, 1234);
    CHECK(std::abs(m - mr) < 1e-8 * m);
  }

  Symbol flat = make_symbol("linear_xi", {{"dim", 2}, {"lambda", lambda}});
  PhasePoint pf(0.0, VectorXd::Zero(2), VectorXd::Zero(2));
  VectorXd e1 = VectorXd::Zero(2);
  e1[0] = 1;
  CHECK(curvature_minor(flat, pf, e1, 1) == 0.0);

  // paraboloid at the origin: d-size minor of the second form is 2^d
  const int d = 3;
  Symbol par = paraboloid_symbol(d, lambda);
  PhasePoint pp(0.0, VectorXd::Zero(d), VectorXd::Zero(d));
  VectorXd nu = VectorXd::Zero(d);
  nu[d - 1] = 1;
  CHECK(curvature_minor(par, pp, nu, d - 1) == doctest::Approx(std::pow(2.0, d - 1)).epsilon(1e-10));

  // precondition and degeneracy errors
  PhasePoint off(0.0, VectorXd::Zero(2), VectorXd::Constant(2, 1.0));
  CHECK_THROWS(curvature_minor(shell_symbol(2, lambda), off, e1, 1));
  Symbol zero = make_symbol("constant", {{"dim", 2}, {"lambda", lambda}, {"c", 0}});
  CHECK_THROWS(curvature_minor(zero, pf, e1, 1));
}

TEST_CASE("poisson bracket antisymmetry is exact") {
  Symbol a = make_symbol("variable_metric", {{"dim", 2}, {"lambda", 8}, {"eps", 0.2}});
  Symbol b = shell_symbol(2, 8);
  VectorXd x(2), xi(2);
  x << 0.3, -0.1;
  xi << 5.0, 2.0;
  PhasePoint p(0.0, x, xi);
  CHECK(poisson_bracket(a, b, p) == -poisson_bracket(b, a, p));
}

TEST_CASE("characteristic point finding") {
  Symbol shell = shell_symbol(2, 16);
  CharPoints cp = find_characteristic_points(shell, 32, 2, 5, 0.5, 24.0);
  CHECK(cp.skipped == 0);
  CHECK(cp.points.size() == 64);
  for (const auto& p : cp.points) CHECK(std::abs(p.xi.norm() - 16.0) < 1e-6);

  // no root on rays for an elliptic symbol
  Symbol pos = make_symbol("constant", {{"dim", 2}, {"lambda", 16}, {"c", 3}});
  CharPoints none = find_characteristic_points(pos, 8, 1, 5, 0.5, 24.0);
  CHECK(none.points.empty());
  CHECK(none.skipped == 8);

  Symbol drift = drift_symbol(2, 16);
  CharPoints joint = find_joint_characteristic_points(shell, drift, 32, 2, 7, 0.5, 24.0);
  for (const auto& p : joint.points) {
    CHECK(std::abs(p.xi.norm() - 16.0) < 1e-7);
    CHECK(std::abs(p.xi[0]) < 1e-7);
  }
  CHECK(joint.points.size() > 20);
}

TEST_CASE("assumption report for the shell/drift pair in 2d") {
  const double lambda = 16;
  Symbol p_re = shell_symbol(2, lambda);
  Symbol p_im = drift_symbol(2, lambda);
  AssumptionConfig cfg;
  cfg.labels = {"A1", "A1'", "A2", "A2'", "A3", "A4", "A4'", "A5'", "A6'", "B1", "B2"};
  cfg.k = 0;
  cfg.rays = 48;
  cfg.x_samples = 2;
  AssumptionReport rep = check_assumptions(p_re, p_im, cfg);
  CHECK(rep.entries.size() == cfg.labels.size());

  // (A2)': wedge constant >~ 1 on Sigma (closed form: 2 |xi_2| / lambda = 2)
  CHECK(rep.get("A2'").constant == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(rep.get("A2'").pass);
  // (A3): sphere curvature, minor det ~ lambda^{-(n-1)} against the same weight
  CHECK(rep.get("A3").constant == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.get("A3").pass);
  // (A2): |grad p_re|/lambda = 2 on the sphere
  CHECK(rep.get("A2").constant == doctest::Approx(2.0).epsilon(1e-4));
  // (A1): bracket vanishes for x-independent symbols
  CHECK(rep.get("A1").constant == 0.0);
  CHECK(rep.get("A1").pass);
  // (A4): |d_xi1 p_re| vanishes at xi_1 = 0 points of the sphere -> fail
  CHECK_FALSE(rep.get("A4").pass);
  // (A4)': the pair is jointly noncharacteristic in xi_1
  CHECK(rep.get("A4'").constant == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.get("A4'").pass);
  // (B1) fails: the characteristic sets are transversal, wedge ~ 2
  CHECK_FALSE(rep.get("B1").pass);
  // (B2) fails: |d_xi1 p_im| = 1 is not small
  CHECK_FALSE(rep.get("B2").pass);

  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("assumption,constant,threshold,pass,worst_point", 0) == 0);

  // flat symbol: (A3) minor vanishes -> fail
  Symbol flat = make_symbol("linear_xi", {{"dim", 2}, {"lambda", lambda}, {"k_order", 2}});
  AssumptionConfig cf;
  cf.labels = {"A3"};
  AssumptionReport rf = check_assumptions(flat, p_im, cf);
  CHECK_FALSE(rf.get("A3").pass);
  CHECK(rf.get("A3").constant == 0.0);
}

TEST_CASE("assumption report for the shell/drift pair in 3d") {
  const double lambda = 16;
  Symbol p_re = shell_symbol(3, lambda);
  Symbol p_im = drift_symbol(3, lambda);
  AssumptionConfig cfg;
  cfg.labels = {"A2'", "A3'", "A5'", "A6'"};
  cfg.k = 0;
  cfg.rays = 24;
  cfg.x_samples = 1;
  AssumptionReport rep = check_assumptions(p_re, p_im, cfg);
  // Sigma = sphere cap {xi_1 = 0}: one nonvanishing curvature on the circle
  CHECK(rep.get("A2'").pass);
  CHECK(rep.get("A3'").pass);
  CHECK(rep.get("A5'").constant == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.get("A6'").constant == doctest::Approx(1.0).epsilon(1e-3));
}
