#include "displab/parametrix.hpp"

#include <array>
#include <set>

namespace displab {

namespace {

constexpr double kPacketRadius = 8.5;
const double kNorm1d = std::pow(2.0, -0.5) * std::pow(M_PI, -0.75);

}  // namespace

WavePacketPropagator::WavePacketPropagator(Symbol sym, WavePacketFrame frame, double s, int flow_steps)
    : sym_(std::move(sym)), frame_(frame), s_(s), t_(s), flow_steps_(flow_steps) {
  if (sym_.dim() != 1) throw std::invalid_argument("WavePacketPropagator: one spatial dimension");
  flows_.resize(static_cast<size_t>(frame_.nx) * frame_.nxi);
  const int d = 1;
  for (int j = 0; j < frame_.nx; ++j)
    for (int k = 0; k < frame_.nxi; ++k) {
      FlowState st;
      st.x = VectorXd::Constant(1, frame_.x_at(j));
      st.xi = VectorXd::Constant(1, frame_.xi_at(k));
      st.psi = 0;
      st.X = MatrixXd::Zero(d, d);
      st.Xi = MatrixXd::Identity(d, d);
      st.t = s;
      flows_[static_cast<size_t>(j) * frame_.nxi + k] = std::move(st);
    }
}

void WavePacketPropagator::advance_to(double t) {
  if (t == t_) return;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - t_) * flow_steps_)));
  for (auto& st : flows_) st = continue_flow(sym_, st, t, steps);
  t_ = t;
}

GridFunction WavePacketPropagator::apply(const FbiCoefficients& coeffs, const GridSpec& grid,
                                         double* leaked) const {
  if (grid.dim != 1) throw std::invalid_argument("WavePacketPropagator::apply: one-dimensional grids");
  if (coeffs.c.rows() != frame_.nx || coeffs.c.cols() != frame_.nxi)
    throw std::invalid_argument("WavePacketPropagator::apply: coefficient shape mismatch");
  GridFunction out(grid);
  const int n = grid.n[0];
  const double h = grid.h[0];
  const double w = frame_.weight();
  double total_mass = 0, lost_mass = 0;
  for (int j = 0; j < frame_.nx; ++j)
    for (int k = 0; k < frame_.nxi; ++k) {
      const Complex ck = coeffs.c(j, k);
      if (ck == Complex(0, 0)) continue;
      const FlowState& st = flows_[static_cast<size_t>(j) * frame_.nxi + k];
      const double mass = std::norm(ck);
      total_mass += mass;
      if (!frame_.contains(st.x[0], st.xi[0])) lost_mass += mass;
      const double xt = st.x[0], xit = st.xi[0];
      int m0 = std::max(0, static_cast<int>(std::ceil((xt - kPacketRadius - grid.origin[0]) / h)));
      int m1 = std::min(n - 1, static_cast<int>(std::floor((xt + kPacketRadius - grid.origin[0]) / h)));
      if (m0 > m1) continue;
      // packet exp(i xi^t (y - x^t) - (y - x^t)^2/2) with the flow phase
      const Complex amp = kNorm1d * w * ck * std::polar(1.0, st.psi);
      const double y_start = grid.coord(0, m0);
      Complex phase = std::polar(1.0, xit * (y_start - xt));
      const Complex step = std::polar(1.0, xit * h);
      for (int m = m0; m <= m1; ++m) {
        const double u = y_start + (m - m0) * h - xt;
        out.values[m] += amp * phase * std::exp(-0.5 * u * u);
        phase *= step;
      }
    }
  if (leaked) *leaked = total_mass > 0 ? lost_mass / total_mass : 0.0;
  return out;
}

Complex WavePacketPropagator::kernel(double y, double ytilde) const {
  const double c2 = 0.5 * std::pow(M_PI, -1.5);  // 2^{-d} pi^{-3d/2}, d = 1
  Complex acc(0, 0);
  for (int j = 0; j < frame_.nx; ++j) {
    const double xs = frame_.x_at(j);
    const double gin = ytilde - xs;
    if (std::abs(gin) > kPacketRadius) continue;
    for (int k = 0; k < frame_.nxi; ++k) {
      const FlowState& st = flows_[static_cast<size_t>(j) * frame_.nxi + k];
      const double gout = y - st.x[0];
      if (std::abs(gout) > kPacketRadius) continue;
      const double xis = frame_.xi_at(k);
      const double phase = st.xi[0] * gout - xis * gin + st.psi;
      acc += std::exp(-0.5 * (gout * gout + gin * gin)) * std::polar(1.0, phase);
    }
  }
  return c2 * acc * frame_.weight();
}

ParametrixApply apply_parametrix(const ParametrixConfig& cfg, const GridFunction& u0) {
  if (cfg.t < cfg.s) throw std::invalid_argument("apply_parametrix: forward parametrix needs t >= s");
  const FbiCoefficients C = fbi_analyze(u0, cfg.frame).coeffs;
  WavePacketPropagator prop(cfg.sym, cfg.frame, cfg.s, cfg.flow_steps);
  prop.advance_to(cfg.t);
  ParametrixApply out;
  out.u = prop.apply(C, u0.grid, &out.leaked_mass);
  return out;
}

Complex kernel_eval(const ParametrixConfig& cfg, double y, double ytilde) {
  WavePacketPropagator prop(cfg.sym, cfg.frame, cfg.s, cfg.flow_steps);
  prop.advance_to(cfg.t);
  return prop.kernel(y, ytilde);
}

ParametrixResidual parametrix_residual(const ParametrixConfig& cfg, const std::vector<GridFunction>& samples,
                                       double tau_fd) {
  ParametrixResidual out;
  if (samples.empty()) return out;
  WavePacketPropagator prop(cfg.sym, cfg.frame, cfg.s, cfg.flow_steps);
  std::vector<FbiCoefficients> coeffs;
  for (const auto& u : samples) coeffs.push_back(fbi_analyze(u, cfg.frame).coeffs);

  // five time stations give FD residuals at steps tau and tau/2
  const GridSpec& g = samples[0].grid;
  const double tau = tau_fd;
  const std::array<double, 5> stations{cfg.t - tau, cfg.t - tau / 2, cfg.t, cfg.t + tau / 2, cfg.t + tau};
  std::vector<std::vector<GridFunction>> ku(5);
  for (int sidx = 0; sidx < 5; ++sidx) {
    prop.advance_to(stations[sidx]);
    for (const auto& c : coeffs) ku[sidx].push_back(prop.apply(c, g));
  }
  const Complex mi(0, -1);
  for (size_t i = 0; i < samples.size(); ++i) {
    const double un = samples[i].norm2();
    GridFunction awku = apply_weyl(cfg.sym, ku[2][i]);
    GridFunction r_full(g), r_half(g);
    r_full.values = mi * (ku[4][i].values - ku[0][i].values) / (2 * tau) + awku.values;
    r_half.values = mi * (ku[3][i].values - ku[1][i].values) / tau + awku.values;
    const double res_full = r_full.norm2() / un;
    const double res_half = r_half.norm2() / un;
    // truncation dominates when halving the step moves the value; ignore the
    // roundoff floor of near-exact cases
    if (res_full - res_half > 0.1 * res_half + 1e-6) out.tau_unstable = true;
    out.residual_ratio = std::max(out.residual_ratio, res_half);
    out.k_norm_ratio = std::max(out.k_norm_ratio, ku[2][i].norm2() / un);
  }
  return out;
}

RefPropResult reference_propagator(const Symbol& sym, double s, double t, const GridFunction& u0) {
  RefPropResult out;
  if (sym.name().rfind("variable_metric", 0) == 0) {
    // Fourier-collocation RK4 within the stability bound
    const GridSpec& g = u0.grid;
    const double kmax = M_PI / g.h[0];
    const double sup_a = 1.3 * kmax * kmax;  // max (1 + eps sin) |k|^2 with eps <= 0.3 margin
    const double dt_stab = 2.5 / sup_a;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t - s) / (0.5 * dt_stab))));
    const double h = (t - s) / steps;
    const Complex mi(0, -1);
    GridFunction u = u0;
    auto rhs = [&](const GridFunction& v) {
      GridFunction r = apply_weyl(sym, v);
      r.values *= mi;
      return r;
    };
    for (int k = 0; k < steps; ++k) {
      GridFunction k1 = rhs(u);
      GridFunction tmp(g);
      tmp.values = u.values + 0.5 * h * k1.values;
      GridFunction k2 = rhs(tmp);
      tmp.values = u.values + 0.5 * h * k2.values;
      GridFunction k3 = rhs(tmp);
      tmp.values = u.values + h * k3.values;
      GridFunction k4 = rhs(tmp);
      u.values += h / 6 * (k1.values + 2 * k2.values + 2 * k3.values + k4.values);
    }
    out.unitary_defect = std::abs(u.norm2() / u0.norm2() - 1.0);
    out.u = std::move(u);
    return out;
  }
  // multiplier symbols: exact evolution ("_rescaled" variants stay multipliers)
  static const std::set<std::string> multiplier_names{"schrodinger", "half_wave", "degenerate",
                                                      "constant",    "linear_xi", "bump_xi"};
  bool is_multiplier = false;
  for (const auto& nm : multiplier_names) is_multiplier |= sym.name().rfind(nm, 0) == 0;
  if (!is_multiplier)
    throw std::invalid_argument("reference_propagator: symbol '" + sym.name() +
                                "' is neither a multiplier nor the variable-metric model");
  const VectorXd x0 = VectorXd::Zero(sym.dim());
  const double dt = t - s;
  out.u = apply_multiplier(u0, [&](const VectorXd& k) {
    return std::polar(1.0, -dt * sym.eval(PhasePoint(0.0, x0, k)).real());
  });
  out.unitary_defect = std::abs(out.u.norm2() / u0.norm2() - 1.0);
  return out;
}

namespace {

GridFunction radial_band_cutoff(const GridFunction& f, double lambda, bool annulus) {
  // gaussian dyadic band about 1.2 lambda: its fourier tail decays fast enough
  // in time that the stationary near field dies before the scanned times and
  // the sup rides the radiated front
  if (annulus)
    return apply_multiplier(f, [&](const VectorXd& k) {
      const double d = (k.norm() - 1.2 * lambda) / (0.3 * lambda);
      return d * d > 40.0 ? 0.0 : std::exp(-0.5 * d * d);
    });
  return apply_multiplier(f, [&](const VectorXd& k) { return bump_profile(k.norm() / (1.2 * lambda)); });
}

GridFunction spatial_bump(const GridFunction& f, double radius) {
  GridFunction out = f;
  const GridSpec& g = f.grid;
  VectorXd x(g.dim);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < (g.dim == 2 ? g.n[1] : 1); ++j) {
      x[0] = g.coord(0, i);
      if (g.dim == 2) x[1] = g.coord(1, j);
      double v = 1;
      for (int a = 0; a < g.dim; ++a) v *= bump_profile(x[a] / radius);
      out.values[g.index(i, j)] *= v;
    }
  return out;
}

}  // namespace

DecayScanResult fixed_time_decay_scan(const DecayScanConfig& cfg) {
  DecayScanResult res;
  for (double lambda : cfg.lambdas) {
    const Symbol sym = cfg.symbol_factory(lambda);
    const int d = sym.dim();
    const GridSpec g = d == 2 ? GridSpec::square(cfg.grid_n, cfg.grid_length)
                              : GridSpec::line(cfg.grid_n, cfg.grid_length);
    // probe centers on a small lattice inside the spatial cutoff plateau
    std::vector<VectorXd> centers;
    const int side = d == 2 ? 3 : cfg.probes;
    for (int i = 0; i < (d == 2 ? side * side : side); ++i) {
      VectorXd c(d);
      if (d == 2) {
        c[0] = cfg.probe_spread * (-1 + i / side);
        c[1] = cfg.probe_spread * (-1 + i % side);
      } else {
        c[0] = side == 1 ? 0.0 : cfg.probe_spread * (-1.0 + 2.0 * i / (side - 1));
      }
      centers.push_back(c);
    }
    const double probe_width = 0.25 / lambda;
    for (double t : cfg.times) {
      if (t < cfg.min_lambda_t / lambda) continue;  // scan restricted to t >= c/lambda
      double sup_ratio = 0;
      for (const auto& c : centers) {
        GridFunction u0(g);
        VectorXd x(d);
        for (int i = 0; i < g.n[0]; ++i)
          for (int j = 0; j < (d == 2 ? g.n[1] : 1); ++j) {
            x[0] = g.coord(0, i);
            if (d == 2) x[1] = g.coord(1, j);
            u0.values[g.index(i, j)] = std::exp(-0.5 * (x - c).squaredNorm() / (probe_width * probe_width));
          }
        const double l1 = u0.norm1();
        GridFunction cut = spatial_bump(radial_band_cutoff(u0, lambda, cfg.annulus_cutoff), cfg.x_cutoff_radius);
        const GridFunction ut = reference_propagator(sym, 0.0, t, cut).u;
        // trigonometric interpolation so the sup is not quantized by the grid
        const double sup = d == 2 ? refine2(refine2(ut)).norm_sup() : refine2(ut).norm_sup();
        sup_ratio = std::max(sup_ratio, sup / l1);
      }
      res.rows.push_back({lambda, t, sup_ratio});
    }
  }
  if (res.rows.size() < 3) throw std::invalid_argument("fixed_time_decay_scan: fewer than 3 scan points, fit refused");

  // joint least squares: log v = c + alpha log t + beta log lambda
  const int nr = static_cast<int>(res.rows.size());
  bool lambda_varies = false;
  for (const auto& r : res.rows) lambda_varies |= r.lambda != res.rows[0].lambda;
  const int p = lambda_varies ? 3 : 2;
  MatrixXd A(nr, p);
  VectorXd b(nr);
  for (int i = 0; i < nr; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::log(res.rows[i].t);
    if (p == 3) A(i, 2) = std::log(res.rows[i].lambda);
    b[i] = std::log(res.rows[i].sup_ratio);
  }
  const VectorXd sol = A.colPivHouseholderQr().solve(b);
  res.t_exponent = sol[1];
  res.lambda_exponent = p == 3 ? sol[2] : 0.0;
  res.fit_residual = std::sqrt((A * sol - b).squaredNorm() / nr);
  res.fit_valid = res.t_exponent <= -0.05;
  return res;
}

}  // namespace displab
