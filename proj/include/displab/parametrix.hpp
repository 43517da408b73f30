#ifndef DISPLAB_PARAMETRIX_HPP
#define DISPLAB_PARAMETRIX_HPP

#include "displab/fbi.hpp"
#include "displab/flow.hpp"

namespace displab {

struct ParametrixConfig {
  Symbol sym;
  WavePacketFrame frame;
  double s = 0;
  double t = 0;
  int flow_steps = 128;  // per unit time
};

/// Wave-packet parametrix K(t,s) = T* S~(t,s) T: analyzed coefficients are
/// transported along the Hamilton flow with the action phase and
/// re-synthesized as packets at the flowed centers. Flow tables are cached
/// per lattice point and can be advanced in time incrementally.
class WavePacketPropagator {
 public:
  WavePacketPropagator(Symbol sym, WavePacketFrame frame, double s, int flow_steps = 128);

  double time() const { return t_; }
  double start_time() const { return s_; }
  const WavePacketFrame& frame() const { return frame_; }

  /// integrate all lattice flows to time t (from the current cached time)
  void advance_to(double t);

  /// synthesis of transported analyzed coefficients onto a grid;
  /// leaked = coefficient mass fraction whose flowed center left the frame box
  GridFunction apply(const FbiCoefficients& coeffs, const GridSpec& grid, double* leaked = nullptr) const;

  /// parametrix kernel value by lattice quadrature
  Complex kernel(double y, double ytilde) const;

 private:
  Symbol sym_;
  WavePacketFrame frame_;
  double s_, t_;
  int flow_steps_;
  std::vector<FlowState> flows_;  // row-major j*nxi + k
};

struct ParametrixApply {
  GridFunction u;
  double leaked_mass = 0;
};

/// K(cfg.t, cfg.s) u0 (requires t >= s).
ParametrixApply apply_parametrix(const ParametrixConfig& cfg, const GridFunction& u0);

/// Kernel value at (y, ytilde).
Complex kernel_eval(const ParametrixConfig& cfg, double y, double ytilde);

struct ParametrixResidual {
  double residual_ratio = 0;  // sup over samples of ||(D_t + a^w) K u|| / ||u||
  double k_norm_ratio = 0;    // sup over samples of ||K u|| / ||u||
  bool tau_unstable = false;  // halving the FD step moved the residual > 10%
};

ParametrixResidual parametrix_residual(const ParametrixConfig& cfg, const std::vector<GridFunction>& samples,
                                       double tau_fd = 1e-5);

struct RefPropResult {
  GridFunction u;
  double unitary_defect = 0;
};

/// Exact Fourier multiplier for x-independent symbols; Fourier-collocation
/// RK4 within the stability bound for the variable-metric model.
RefPropResult reference_propagator(const Symbol& sym, double s, double t, const GridFunction& u0);

struct DecayScanConfig {
  std::function<Symbol(double lambda)> symbol_factory;
  std::vector<double> lambdas;
  std::vector<double> times;
  int grid_n = 1024;
  double grid_length = 64.0;
  int probes = 9;
  double x_cutoff_radius = 1.0;
  double probe_spread = 0.5;    // probe centers fill [-spread, spread]^d
  bool annulus_cutoff = false;  // dyadic annulus at |xi| ~ lambda instead of a low pass
  double min_lambda_t = 1.0;    // keep rows with t >= min_lambda_t / lambda
};

struct DecayScanRow {
  double lambda, t, sup_ratio;
};

struct DecayScanResult {
  std::vector<DecayScanRow> rows;
  double t_exponent = 0;
  double lambda_exponent = 0;
  double fit_residual = 0;
  bool fit_valid = false;  // flatness detector: t-slope <= -0.05
};

/// L^1 -> L^inf decay scan of the reference propagator through a cutoff:
/// narrow-Gaussian probes, sup extracted on a 2x refined grid, rows with
/// t < 1/lambda dropped, joint least-squares fit of the two exponents.
DecayScanResult fixed_time_decay_scan(const DecayScanConfig& cfg);

}  // namespace displab

#endif
