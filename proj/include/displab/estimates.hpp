#ifndef DISPLAB_ESTIMATES_HPP
#define DISPLAB_ESTIMATES_HPP

#include "displab/symbol.hpp"

namespace displab {

/// Admissible mixed-norm exponent pair for dimension n and curvature
/// deficiency k: 2/q + (n-1-k)/r = (n-1-k)/2, 2 <= q,r <= inf, (q,r) != (2,inf).
struct StrichartzPair {
  double q, r;
  int n, k;
  double rho;  // (n-1)/2 - 1/q - (n-1)/r

  StrichartzPair(double q_, double r_, int n_, int k_);
};

/// Time-sampled grid functions (uniform or general times; trapezoid weights).
struct SpaceTimeField {
  VectorXd times;
  std::vector<GridFunction> slices;
};

/// L^q in time of L^r in space with quadrature weights; inf handled as max.
double mixed_norm(const SpaceTimeField& u, double q, double r);

/// Flat L^p of one slice with cell weights (p = inf -> sup).
double lp_norm(const GridFunction& f, double p);

struct ExponentFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // rms log-misfit
};

/// Least squares on (log param, log value); needs >= 3 points, positive values.
ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& points);

enum class EvolutionModel { Schrodinger1d, HalfWave2d };
enum class ScanNormalization { Physical, Paper };

struct StrichartzScanConfig {
  EvolutionModel model = EvolutionModel::Schrodinger1d;
  ScanNormalization normalization = ScanNormalization::Physical;
  int grid_n = 256;
  double grid_length = 12.0;
  int time_samples = 33;
  double t_max = 1.0;
  int n_samples = 8;
  unsigned seed = 1;
};

/// max over samples of ||chi^w u||_{L^q L^r} / (lambda^rho ||u0||_2);
/// rho = 0 in the physical normalization.
double strichartz_constant(const StrichartzPair& pair, double lambda, const StrichartzScanConfig& cfg);

enum class ResolventVariant { Helmholtz, HelmholtzIQ, HelmholtzDrift, HelmholtzDeltaDrift };

double resolvent_q(ResolventVariant v, int n);

struct ScanResult {
  std::vector<double> param;       // lambda, or delta for the delta scan
  std::vector<double> max_ratio;
  std::vector<double> witness_ratio;
  ExponentFit fit;
  ExponentFit witness_fit;
};

struct ResolventScanConfig {
  int grid_n = 512;
  int n_samples = 64;
  unsigned seed = 1;
  double fixed_lambda = 64.0;   // used by the delta scan
  double fixed_delta = 1.0;     // used by the lambda scans of the delta variant
  int workers = 0;              // 0 = hardware default
};

/// Constant-coefficient inequality scan over lambda (or over delta for
/// HelmholtzDeltaDrift when deltas is nonempty): samples smooth unit-ball
/// data, applies P in Fourier space on a periodic box of side 4, records
/// max ||u||_q / ||Pu||_{q'} and fits the exponent.
ScanResult resolvent_ratio_scan(int n, ResolventVariant variant, const std::vector<double>& lambdas,
                                const std::vector<double>& deltas, const ResolventScanConfig& cfg);

enum class WitnessKind { Tube, Isotropic };

/// Ratio of an adapted wave packet (lower-bound certificate for the scan
/// exponent); Tube is the sharp packet, Isotropic the control.
double sharpness_witness(int n, ResolventVariant variant, double lambda, const ResolventScanConfig& cfg,
                         WitnessKind kind = WitnessKind::Tube, double delta = 1.0);

}  // namespace displab

#endif
