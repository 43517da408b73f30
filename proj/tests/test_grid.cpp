#include <doctest.h>

#include "displab/grid.hpp"

using namespace displab;

TEST_CASE("fft roundtrip and multiplier identity") {
  GridSpec g = GridSpec::line(128, 16.0);
  GridFunction f(g);
  for (int i = 0; i < g.n[0]; ++i) {
    const double x = g.coord(0, i);
    f.values[i] = std::exp(-x * x) * Complex(std::cos(2 * x), std::sin(x));
  }
  VectorXcd hat, back;
  fft_forward(g, f.values, hat);
  fft_inverse(g, hat, back);
  CHECK((back - f.values).norm() < 1e-12 * f.values.norm());

  GridFunction same = apply_multiplier(f, [](const VectorXd&) { return Complex(1, 0); });
  CHECK((same.values - f.values).norm() < 1e-12 * f.values.norm());
}

TEST_CASE("multiplier differentiates plane waves exactly") {
  GridSpec g = GridSpec::line(64, 8.0);
  const double k0 = 2 * M_PI / 8.0 * 5;  // lattice mode
  GridFunction f(g);
  for (int i = 0; i < g.n[0]; ++i) f.values[i] = std::polar(1.0, k0 * g.coord(0, i));
  GridFunction df = apply_multiplier(f, [](const VectorXd& k) { return Complex(0, k[0]); });
  for (int i = 0; i < g.n[0]; ++i) CHECK(std::abs(df.values[i] - Complex(0, k0) * f.values[i]) < 1e-10);
}

TEST_CASE("2d fft parseval") {
  GridSpec g = GridSpec::square(32, 4.0);
  GridFunction f(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      f.values[g.index(i, j)] = std::sin(0.5 * i) + Complex(0, 1) * std::cos(0.3 * j);
  VectorXcd hat;
  fft_forward(g, f.values, hat);
  CHECK(hat.squaredNorm() / g.size() == doctest::Approx(f.values.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("refine2 interpolates band-limited data") {
  GridSpec g = GridSpec::line(64, 8.0);
  GridFunction f(g);
  const double k0 = 2 * M_PI / 8.0 * 3;
  for (int i = 0; i < g.n[0]; ++i) f.values[i] = std::polar(1.0, k0 * g.coord(0, i));
  GridFunction r = refine2(f);
  REQUIRE(r.grid.n[0] == 128);
  for (int i = 0; i < r.grid.n[0]; ++i)
    CHECK(std::abs(r.values[i] - std::polar(1.0, k0 * r.grid.coord(0, i))) < 1e-10);
}

TEST_CASE("grid validation") {
  CHECK_THROWS(GridSpec::line(100, 1.0));  // not a power of two
  GridSpec g = GridSpec::line(8, 1.0);
  CHECK_THROWS(GridFunction(g, VectorXcd::Zero(7)));
}
