#include <doctest.h>

#include "displab/parametrix.hpp"

using namespace displab;

namespace {

GridFunction gaussian_packet(const GridSpec& g, double x0, double k0, double width) {
  GridFunction f(g);
  for (int i = 0; i < g.n[0]; ++i) {
    const double x = g.coord(0, i);
    f.values[i] = std::polar(std::exp(-0.5 * (x - x0) * (x - x0) / (width * width)), k0 * (x - x0));
  }
  f.values /= f.norm2();
  return f;
}

Symbol shifted_variable_metric(double shift) {
  auto ev = [shift](double, const VectorXd& x, const VectorXd& xi, const VectorXi& alpha,
                    const VectorXi& beta) -> Complex {
    const double s = x[0] - shift;
    const int ax = alpha[0];
    double mfac;
    if (ax == 0) mfac = 1.0 + 0.1 * std::sin(s);
    else {
      switch (ax % 4) {
        case 1: mfac = 0.1 * std::cos(s); break;
        case 2: mfac = -0.1 * std::sin(s); break;
        case 3: mfac = -0.1 * std::cos(s); break;
        default: mfac = 0.1 * std::sin(s); break;
      }
    }
    const int bx = beta[0];
    const double xifac = bx == 0 ? xi[0] * xi[0] : bx == 1 ? 2 * xi[0] : bx == 2 ? 2.0 : 0.0;
    return mfac * xifac;
  };
  return Symbol(1, 8.0, 2, 2, 8, 8, ev, "variable_metric");
}

}  // namespace

TEST_CASE("reference propagator: closed-form gaussian evolution and unitarity") {
  GridSpec g = GridSpec::line(512, 32.0);
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 4}});
  const double sigma = 1.3, t = 0.4;
  GridFunction u0(g);
  for (int i = 0; i < g.n[0]; ++i) {
    const double x = g.coord(0, i);
    u0.values[i] = std::exp(-0.5 * x * x / (sigma * sigma));
  }
  RefPropResult r = reference_propagator(a, 0.0, t, u0);
  CHECK(r.unitary_defect < 1e-8);
  // hat u0 = sigma sqrt(2 pi) e^{-sigma^2 k^2/2} evolves to the complex-width gaussian
  const Complex w2 = sigma * sigma + Complex(0, 2 * t);
  for (int i = 0; i < g.n[0]; i += 7) {
    const double x = g.coord(0, i);
    const Complex expect = sigma / std::sqrt(w2) * std::exp(-0.5 * x * x / w2);
    CHECK(std::abs(r.u.values[i] - expect) < 1e-10);
  }
  // t = s is the identity
  RefPropResult id = reference_propagator(a, 0.3, 0.3, u0);
  CHECK((id.u.values - u0.values).norm() < 1e-13 * u0.values.norm());
}

TEST_CASE("reference propagator: variable metric stays unitary and converges") {
  GridSpec g = GridSpec::line(256, 24.0);
  Symbol a = make_symbol("variable_metric", {{"dim", 1}, {"lambda", 8}, {"eps", 0.1}});
  GridFunction u0 = gaussian_packet(g, 0.0, 6.0, 1.0);
  RefPropResult r = reference_propagator(a, 0.0, 0.05, u0);
  CHECK(r.unitary_defect < 1e-7);
  Symbol strange(1, 2.0, 2, 0, 2, 4,
                 [](double, const VectorXd&, const VectorXd&, const VectorXi&, const VectorXi&) -> Complex {
                   return 0.0;
                 },
                 "mystery");
  CHECK_THROWS(reference_propagator(strange, 0.0, 0.1, u0));
}

TEST_CASE("apply_parametrix: zero and constant symbols") {
  GridSpec g = GridSpec::line(512, 32.0);
  WavePacketFrame frame = WavePacketFrame::make(12.0, 16.0);
  GridFunction u0 = gaussian_packet(g, 0.0, 4.0, 1.2);

  ParametrixConfig cfg{make_symbol("constant", {{"dim", 1}, {"lambda", 4}, {"c", 0}}), frame, 0.0, 0.3, 64};
  ParametrixApply r = apply_parametrix(cfg, u0);
  CHECK((r.u.values - u0.values).norm() / u0.values.norm() < 1e-3);
  CHECK(r.leaked_mass < 1e-8);

  // a = c: pure phase e^{-i c (t-s)}
  const double c = 1.7, dt = 0.3;
  ParametrixConfig cfgc{make_symbol("constant", {{"dim", 1}, {"lambda", 4}, {"c", c}}), frame, 0.0, dt, 64};
  ParametrixApply rc = apply_parametrix(cfgc, u0);
  GridFunction expect = u0;
  expect.values *= std::polar(1.0, -c * dt);
  CHECK((rc.u.values - expect.values).norm() / u0.values.norm() < 1e-3);

  CHECK_THROWS(apply_parametrix(ParametrixConfig{cfg.sym, frame, 0.5, 0.2, 64}, u0));
}

TEST_CASE("apply_parametrix tracks the spectral reference for free schrodinger at lambda = 16") {
  GridSpec g = GridSpec::line(1024, 32.0);
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 16}});
  WavePacketFrame frame = WavePacketFrame::make(14.0, 26.0);
  GridFunction u0 = gaussian_packet(g, -2.0, 16.0, 1.0);
  ParametrixConfig cfg{a, frame, 0.0, 0.25, 64};
  ParametrixApply r = apply_parametrix(cfg, u0);
  RefPropResult ref = reference_propagator(a, 0.0, 0.25, u0);
  const double dist = (r.u.values - ref.u.values).norm() * std::sqrt(g.cell());
  CHECK(dist <= 0.15 * u0.norm2());
  CHECK(r.u.norm2() <= 1.05 * u0.norm2());
}

TEST_CASE("parametrix covariance under symbol translation") {
  GridSpec g = GridSpec::line(512, 32.0);
  WavePacketFrame frame = WavePacketFrame::make(12.0, 12.0);
  const double shift = 0.5;  // one x-lattice cell, 8 grid cells
  GridFunction u0 = gaussian_packet(g, 0.0, 4.0, 1.0);
  GridFunction u0s(g);
  const int cells = static_cast<int>(std::round(shift / g.h[0]));
  for (int i = 0; i < g.n[0]; ++i) u0s.values[(i + cells) % g.n[0]] = u0.values[i];

  ParametrixApply r0 = apply_parametrix({shifted_variable_metric(0.0), frame, 0.0, 0.2, 256}, u0);
  ParametrixApply r1 = apply_parametrix({shifted_variable_metric(shift), frame, 0.0, 0.2, 256}, u0s);
  double dev = 0;
  for (int i = 0; i < g.n[0] - cells; ++i)
    dev = std::max(dev, std::abs(r1.u.values[i + cells] - r0.u.values[i]));
  CHECK(dev < 1e-8);
}

TEST_CASE("kernel: reproducing value at t = s against the continuum oracle") {
  Symbol zero = make_symbol("constant", {{"dim", 1}, {"lambda", 4}, {"c", 0}});
  WavePacketFrame frame = WavePacketFrame::make(10.0, 14.0);
  ParametrixConfig cfg{zero, frame, 0.0, 0.0, 8};
  const double xi_extent = frame.xi_at(frame.nxi - 1) - frame.xi0 + frame.dxi;  // Riemann cell count * dxi
  const double oracle = 0.5 * std::pow(M_PI, -1.5) * std::sqrt(M_PI) * xi_extent;
  const Complex got = kernel_eval(cfg, 0.0, 0.0);
  CHECK(std::abs(got - oracle) < 5e-3 * std::abs(oracle));

  // quadrature error decays by >= 2x when the lattice density doubles
  const double y = 0.4, yt = -0.3;
  auto continuum = [&](const WavePacketFrame& f) {
    const double Xi = f.xi_at(f.nxi - 1) + f.dxi / 2;
    const double d = y - yt;
    return 0.5 * std::pow(M_PI, -1.5) * std::sqrt(M_PI) * std::exp(-d * d / 4) * 2 * std::sin(Xi * d) / d;
  };
  WavePacketFrame dense = WavePacketFrame::make(10.0, 14.0, 0.5, M_PI / 8);
  // midpoint-style oracle: integrate xi over the lattice cells
  const double e1 = std::abs(kernel_eval(cfg, y, yt) - continuum(frame));
  ParametrixConfig cfg2{zero, dense, 0.0, 0.0, 8};
  const double e2 = std::abs(kernel_eval(cfg2, y, yt) - continuum(dense));
  CHECK(e2 <= e1 / 2);
}

TEST_CASE("kernel: free schrodinger magnitude and far-field decay") {
  Symbol a = make_symbol("schrodinger", {{"dim", 1}, {"lambda", 4}});
  WavePacketFrame frame = WavePacketFrame::make(10.0, 14.0);
  ParametrixConfig cfg{a, frame, 0.0, 0.25, 64};
  const double expect = std::pow(4 * M_PI * 0.25, -0.5);
  CHECK(std::abs(kernel_eval(cfg, 0.0, 0.0)) == doctest::Approx(expect).epsilon(0.2));
  CHECK(std::abs(kernel_eval(cfg, 40.0, 0.0)) < 1e-8);
}

TEST_CASE("parametrix residual: exact cases stay below 1e-2") {
  GridSpec g = GridSpec::line(512, 32.0);
  WavePacketFrame frame = WavePacketFrame::make(12.0, 14.0);
  std::vector<GridFunction> samples{gaussian_packet(g, 0.0, 4.0, 1.0), gaussian_packet(g, 1.0, -3.0, 1.4)};

  ParametrixConfig zero{make_symbol("constant", {{"dim", 1}, {"lambda", 4}, {"c", 0}}), frame, 0.0, 0.1, 64};
  ParametrixResidual r0 = parametrix_residual(zero, samples);
  CHECK(r0.residual_ratio < 1e-2);
  CHECK(r0.k_norm_ratio < 1.01);

  ParametrixConfig lin{make_symbol("linear_xi", {{"dim", 1}, {"lambda", 4}}), frame, 0.0, 0.1, 64};
  ParametrixResidual r1 = parametrix_residual(lin, samples);
  CHECK(r1.residual_ratio < 1e-2);
  CHECK_FALSE(r1.tau_unstable);
}

TEST_CASE("parametrix residual is lambda-uniform in the fixed-time normalization") {
  // the uniform claim concerns unit-scale symbols: rescale the class-normalized
  // variable metric (data moves to frequency mu = sqrt(lambda))
  std::vector<double> res;
  for (double lambda : {8.0, 16.0}) {
    GridSpec g = GridSpec::line(512, 32.0);
    const double mu = std::sqrt(lambda);
    WavePacketFrame frame = WavePacketFrame::make(12.0, 1.6 * mu + 10);
    Symbol paper = make_symbol("variable_metric",
                               {{"dim", 1}, {"lambda", lambda}, {"eps", 0.1}, {"scale", 1.0 / lambda}, {"k_order", 1}});
    Symbol a = rescale_fixedtime(paper, 1.0, lambda);
    std::vector<GridFunction> samples{gaussian_packet(g, 0.0, mu, 1.0)};
    ParametrixConfig cfg{a, frame, 0.0, 1.0 / 16, 256};
    ParametrixResidual r = parametrix_residual(cfg, samples, 1e-5);
    CHECK(r.k_norm_ratio <= 1.05);
    res.push_back(r.residual_ratio);
  }
  CHECK(res[1] / res[0] <= 2.0);
  CHECK(res[0] / res[1] <= 2.0);
}

TEST_CASE("decay scan: free schrodinger slope and flatness rejection") {
  DecayScanConfig cfg;
  cfg.symbol_factory = [](double lambda) {
    return make_symbol("schrodinger", {{"dim", 1}, {"lambda", lambda}, {"scale", 1.0 / lambda}, {"k_order", 1}});
  };
  cfg.lambdas = {64.0};
  cfg.times = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};
  cfg.grid_n = 2048;
  cfg.grid_length = 48.0;
  cfg.probes = 3;
  DecayScanResult r = fixed_time_decay_scan(cfg);
  CHECK(r.fit_valid);
  CHECK(r.t_exponent == doctest::Approx(-0.5).epsilon(0.1));

  DecayScanConfig flat = cfg;
  flat.symbol_factory = [](double lambda) {
    return make_symbol("constant", {{"dim", 1}, {"lambda", lambda}, {"c", 0}});
  };
  flat.grid_n = 512;
  DecayScanResult rf = fixed_time_decay_scan(flat);
  CHECK_FALSE(rf.fit_valid);

  DecayScanConfig tiny = cfg;
  tiny.times = {0.5};
  tiny.probes = 1;
  CHECK_THROWS(fixed_time_decay_scan(tiny));  // fewer than 3 points: fit refused
}
