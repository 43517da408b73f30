#include <doctest.h>

#include "displab/symbol.hpp"

using namespace displab;

namespace {

// central-difference oracle at step 1e-4, independent of Symbol's own FD path
double fd_oracle_dxdxi(const Symbol& s, double x, double xi) {
  const double h = 1e-4;
  auto v = [&](double xx, double xxi) { return s.eval(PhasePoint::d1(xx, xxi)).real(); };
  return (v(x + h, xi + h) - v(x + h, xi - h) - v(x - h, xi + h) + v(x - h, xi - h)) / (4 * h * h);
}

}  // namespace

TEST_CASE("eval_symbol closed forms") {
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 4}});
  CHECK(a.eval(PhasePoint::d1(0, 2)).real() == doctest::Approx(4.0));
  VectorXi two = 2 * unit_index(1, 0);
  CHECK(a.eval(PhasePoint::d1(0.3, 2), zero_index(1), two).real() == doctest::Approx(2.0));
  CHECK_THROWS(a.eval(PhasePoint::d1(0, 1), 9 * unit_index(1, 0), zero_index(1)));
}

TEST_CASE("variable metric mixed derivative vs central-difference oracle") {
  Symbol a = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 4}, {"eps", 0.1}});
  const double got = a.eval(PhasePoint::d1(0, 1), unit_index(1, 0), unit_index(1, 0)).real();
  CHECK(got == doctest::Approx(0.2).epsilon(1e-10));  // 0.1 cos(0) * 2 * 1
  CHECK(got == doctest::Approx(fd_oracle_dxdxi(a, 0, 1)).epsilon(1e-6));
}

TEST_CASE("finite differences agree with analytic derivatives on the model library") {
  std::vector<Symbol> models = {
      make_symbol("schrodinger", {{"dim", 2}, {"lambda", 8}}),
      make_symbol("variable_metric", {{"dim", 2}, {"lambda", 8}, {"eps", 0.2}}),
      make_symbol("half_wave", {{"dim", 2}, {"lambda", 8}}),
      make_symbol("degenerate", {{"dim", 2}, {"lambda", 8}, {"flat", 1}}),
  };
  std::vector<PhasePoint> pts;
  for (double x : {-0.4, 0.5})
    for (double xi : {3.0, 6.5}) {
      VectorXd xv(2), xiv(2);
      xv << x, 0.2;
      xiv << xi, 0.7 * xi;
      pts.emplace_back(0.0, xv, xiv);
    }
  for (const auto& s : models)
    for (const auto& p : pts)
      for (int ax = 0; ax <= 1; ++ax)
        for (int bx = 0; ax + bx <= 2; ++bx) {
          VectorXi alpha = ax * unit_index(2, 0), beta = bx * unit_index(2, 1);
          if (ax + bx == 0) continue;
          const Complex an = s.eval(p, alpha, beta);
          const Complex fd = s.eval_fd(p, alpha, beta);
          const double scale = std::max(1.0, std::abs(an));
          CHECK(std::abs(an - fd) / scale < 1e-5);
        }
}

TEST_CASE("check_symbol_class: dyadic bump constants are lambda-stable") {
  std::map<IndexPair, double> prev;
  for (double lambda : {16.0, 32.0, 64.0}) {
    Symbol a = make_symbol("bump_xi", {{"dim", 1}, {"lambda", lambda}, {"k_order", 1}});
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(PhasePoint::d1(0.0, (i - 500) * lambda / 510.0));
    auto table = check_symbol_class(a, 2, pts, 2);
    for (const auto& [key, c] : table) {
      CHECK(c < 50.0);
      if (!prev.empty() && prev[key] > 1e-6) CHECK(c / prev[key] < 4.0);
    }
    prev = table;
  }
}

TEST_CASE("check_symbol_class: zero symbol and half-wave") {
  Symbol zero = make_symbol("constant", {{"dim", 1}, {"lambda", 8}, {"c", 0}});
  auto t0 = check_symbol_class(zero, 2, {PhasePoint::d1(0, 1)}, 3);
  for (const auto& [k, c] : t0) CHECK(c == 0.0);

  std::map<IndexPair, double> prev;
  for (double lambda : {16.0, 32.0, 64.0}) {
    Symbol hw = make_symbol("half_wave", {{"dim", 1}, {"lambda", lambda}, {"k_order", 1}});
    std::vector<PhasePoint> pts;
    for (int i = 0; i <= 100; ++i) pts.push_back(PhasePoint::d1(0.0, lambda / 2 + i * lambda / 200.0));
    auto table = check_symbol_class(hw, 2, pts, 3);
    for (const auto& [key, c] : table) {
      CHECK(c < 20.0);  // uniform in lambda
      if (!prev.empty() && prev[key] > 1e-6) {
        const double ratio = c / prev[key];
        CHECK(ratio > 0.4);
        CHECK(ratio < 2.5);
      }
    }
    prev = table;
  }
}

TEST_CASE("half-wave transport is exact outside the cap") {
  Symbol hw = make_symbol("half_wave", {{"dim", 1}, {"lambda", 2}});
  CHECK(hw.eval(PhasePoint::d1(0, 2)).real() == doctest::Approx(2.0));
  CHECK(hw.eval(PhasePoint::d1(0, 2), zero_index(1), unit_index(1, 0)).real() == doctest::Approx(1.0));
  // inside the cap the quadratic matches value and slope at the seam
  const double r = 0.2;
  CHECK(hw.eval(PhasePoint::d1(0, r)).real() == doctest::Approx(r));
}

TEST_CASE("cutoff symbol plateau and support") {
  CutoffSymbol chi = CutoffSymbol::box(1, 1.0, 8.0);
  VectorXd x1 = VectorXd::Constant(1, 0.3), xi1 = VectorXd::Constant(1, 2.0);
  CHECK(chi.value(x1, xi1) == doctest::Approx(1.0));
  x1[0] = 1.1;
  CHECK(chi.value(x1, xi1) == 0.0);
  x1[0] = 0.8;
  const double v = chi.value(x1, xi1);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
}

TEST_CASE("rescale_fixedtime maps schrodinger to unit normalization") {
  const double lambda = 16, t0 = 0.25;
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", lambda}, {"scale", 1.0 / lambda}, {"k_order", 1}});
  Symbol resc = rescale_fixedtime(a, t0, lambda);
  // t0 * (xi * sqrt(lambda/t0))^2 / lambda = xi^2
  CHECK(resc.eval(PhasePoint::d1(0.7, 1.3)).real() == doctest::Approx(1.69).epsilon(1e-12));
  VectorXi two = 2 * unit_index(1, 0);
  CHECK(resc.eval(PhasePoint::d1(0, 1), zero_index(1), two).real() == doctest::Approx(2.0).epsilon(1e-12));
}
