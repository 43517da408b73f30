#ifndef DISPLAB_FLOW_HPP
#define DISPLAB_FLOW_HPP

#include "displab/symbol.hpp"

namespace displab {

/// Hamilton-flow state at one time for one initial phase point:
/// position, frequency, action phase and the xi-derivatives of the flow map.
struct FlowState {
  VectorXd x;    // x^t
  VectorXd xi;   // xi^t
  double psi = 0;
  MatrixXd X;    // d x^t / d xi
  MatrixXd Xi;   // d xi^t / d xi
  double t = 0;

  PhasePoint point() const { return PhasePoint(t, x, xi); }
};

/// Raised on non-finite flow state; carries the last valid time.
struct FlowBlowup : std::runtime_error {
  double last_valid_time;
  explicit FlowBlowup(double t)
      : std::runtime_error("hamilton flow blow-up, last valid time t=" + std::to_string(t)), last_valid_time(t) {}
};

/// Integrate x' = a_xi, xi' = -a_x, psi' = -a + xi.a_xi together with the
/// variational system for (X, Xi); fixed-step classical RK4, X(s)=0, Xi(s)=I.
FlowState integrate_flow(const Symbol& sym, const PhasePoint& start, double s, double t, int steps);

/// Continue an existing flow state to a later (or earlier) time.
FlowState continue_flow(const Symbol& sym, const FlowState& state, double t, int steps);

struct JacobianCheck {
  double symplectic_defect;  // ||J^T Omega J - Omega||
  double fd_defect;          // ||(X,Xi) - finite-difference Jacobian||
};

/// Full-Jacobian symplecticity and finite-difference consistency of (X, Xi).
JacobianCheck flow_jacobian_check(const Symbol& sym, const PhasePoint& start, double s, double t, int steps);

/// || X(1) - a~_xixi(0, x, xi) || for the fixed-time rescaled normalization
/// of `sym` at frequency lambda and time unit t0; the prediction is O(sqrt t0).
double linearization_drift(const Symbol& sym, const PhasePoint& start, double t0, double lambda, int steps = 2048);

}  // namespace displab

#endif
