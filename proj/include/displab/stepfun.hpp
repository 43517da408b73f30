#ifndef DISPLAB_STEPFUN_HPP
#define DISPLAB_STEPFUN_HPP

#include "displab/hilbert.hpp"

namespace displab {

/// Right-continuous vector-valued step function on [0,1]:
/// u(t) = values[k] for t in [times[k], times[k+1]), times[0] = 0.
struct StepFunction {
  VectorXd times;
  std::vector<VectorXcd> values;

  StepFunction() = default;
  StepFunction(VectorXd t, std::vector<VectorXcd> v);
  int jumps() const { return static_cast<int>(times.size()) - 1; }
  int dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
  double sup_norm() const;

  static StepFunction random(int m, int K, unsigned seed);
};

/// V^2 norm: sqrt(||u(0)||^2 + sup over increasing index chains of the
/// summed squared increments), computed exactly by dynamic programming.
/// With a transport, increments are measured against S(t_{j+1}, t_j).
double v2_norm(const StepFunction& u, const Evolution* transport = nullptr);

/// Exhaustive-enumeration oracle, K <= 20 (test use).
double v2_norm_bruteforce(const StepFunction& u);

struct UqLevel {
  StepFunction part;      // v_j
  double coefficient;     // (sum_k ||step||^q)^{1/q}
  int intervals;          // n_j = |I_j|
  double threshold;       // refinement threshold 2^{-j} used to create I_j
};

struct UqDecomposition {
  std::vector<UqLevel> levels;
  double bound;                 // sum of coefficients: U^q-norm upper bound
  double reconstruction_error;  // sup-norm of u - sum v_j
  int q;
};

/// Greedy two-scale decomposition of a step function into U^q atoms
/// (transport-free A = 0 model). Levels refine where the running jump of the
/// residual reaches half the current threshold; terminates exactly for step
/// functions (j_max guards the impossible case).
UqDecomposition uq_decompose(const StepFunction& u, double q, double eps_stop = 1e-12, int j_max = 40);

}  // namespace displab

#endif
