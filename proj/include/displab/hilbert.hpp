#ifndef DISPLAB_HILBERT_HPP
#define DISPLAB_HILBERT_HPP

#include <functional>
#include <vector>

#include "displab/grid.hpp"

namespace displab {

/// Time-sampled Hermitian matrix paths A(t), B(t) on C^m, piecewise-linear in t.
struct OperatorPath {
  VectorXd times;  // strictly increasing grid in [0,1]
  std::vector<MatrixXcd> A;
  std::vector<MatrixXcd> B;
  std::vector<MatrixXcd> Bprime;  // optional analytic derivative of B

  OperatorPath() = default;
  OperatorPath(VectorXd t, std::vector<MatrixXcd> A_, std::vector<MatrixXcd> B_, std::vector<MatrixXcd> Bp = {});

  int m() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int grid_size() const { return static_cast<int>(times.size()); }
  bool has_analytic_Bprime() const { return !Bprime.empty(); }

  MatrixXcd A_at(double t) const;
  MatrixXcd B_at(double t) const;
  /// analytic rule when supplied, else centered differences at 1e-5
  MatrixXcd Bprime_at(double t) const;

  /// constant-coefficient path on a uniform grid
  static OperatorPath constant(const MatrixXcd& A, const MatrixXcd& B, int grid = 257);
  /// near-commuting random model: A and B(t) are perturbed functions of one
  /// random Hermitian frame; `coupling` controls ||[A,B]||.
  static OperatorPath random_near_commuting(int m, unsigned seed, double coupling = 0.1, int grid = 257,
                                            double spec_radius = 4.0);
};

/// g(M) for Hermitian M by eigendecomposition.
MatrixXcd functional_calculus(const MatrixXcd& M, const std::function<double(double)>& g);

/// Cached unitary evolution S(t,s) generated by u' = -iA(t)u on the path grid.
class Evolution {
 public:
  Evolution(const OperatorPath& path, int substeps = 4);

  const OperatorPath& path() const { return *path_; }
  /// S(t_i, t_k) between grid times (exact group composition of cached factors)
  MatrixXcd S_grid(int i, int k) const { return U_[i] * U_[k].adjoint(); }
  const MatrixXcd& U(int i) const { return U_[i]; }
  /// S(t,s) for arbitrary times (integrates off-grid remainders)
  MatrixXcd S(double t, double s) const;
  double unitarity_defect() const { return unitarity_defect_; }

 private:
  MatrixXcd propagate(const MatrixXcd& U0, double from, double to, int steps) const;
  const OperatorPath* path_;
  int substeps_;
  std::vector<MatrixXcd> U_;
  double unitarity_defect_ = 0;
};

/// S(t,s)v; flags a too-coarse step count through the unitarity defect.
VectorXcd evolve(const OperatorPath& path, double s, double t, const VectorXcd& v, int substeps = 4);

/// sup over samples and grid times of ||(-iB' + [A,B]) u|| / (||Bu|| + ||u||).
double commutator_constant(const OperatorPath& path, const std::vector<VectorXcd>& samples);

/// sup over samples of ||(B(t)S(t,s) - S(t,s)B(s)) u|| / (|t-s| (||B(s)u|| + ||u||)).
double bdiff_constant(const OperatorPath& path, double s, double t, const std::vector<VectorXcd>& samples);

/// Forcing sampled on the path's time grid.
using TimeSamples = std::vector<VectorXcd>;

/// Simple parametrix kernel H(t,s) = S(t,s) 1_{(t-s)B(s)<0} e^{(t-s)B(s)}.
MatrixXcd simple_parametrix_kernel(const Evolution& ev, int i, int k);

/// (Hf)(t) = i Int_0^t H(t,s) f(s) ds - i Int_t^1 H(t,s) f(s) ds
/// (composite Simpson per branch); exact solver in the commuting case.
TimeSamples simple_parametrix_apply(const OperatorPath& path, const TimeSamples& f);

struct SimpleParametrixNorms {
  double h_norm;          // ||H||
  double hb_norm;         // |t-s| ||H B(s)||
  double bh_norm;         // |t-s| ||B(t) H||
  double bhb_norm;        // |t-s|^2 ||B(t) H B(s)||
  double residual_norm;   // ||(D_t + A + iB) H(t,s)|| by 4th-order FD in t
};

SimpleParametrixNorms simple_parametrix_norms(const OperatorPath& path, double t, double s);

/// Dyadic partition kappa_j with sum of squares 1, supp kappa_j in
/// {2^j <= max(|xi|,1) <= 2^{j+2}}, and signed halves (kappa_0^- = 0).
class DyadicCalculus {
 public:
  explicit DyadicCalculus(double spectral_radius_bound);

  int levels() const { return J_ + 1; }
  double coverage() const { return std::pow(2.0, J_ + 1); }
  double kappa(int j, double xi) const;
  double kappa_plus(int j, double xi) const;
  double kappa_minus(int j, double xi) const;
  /// max_grid |sum_j kappa_j^2 - 1| on [-coverage, coverage]
  double partition_defect(int grid = 4096) const;

 private:
  double rho(double r) const;  // normalized dyadic template, supp in [1,4]
  int J_;
};

/// Modified parametrix of the dyadic construction at scale delta in (0,1]:
/// H(t,s) = 1_{t>s} sum_j kappa_j^-(dB(t)) S(t,s) kappa_j^-(dB(s)) e^{d(t-s)B(t)}
///        - 1_{t<s} sum_j kappa_j^+(dB(t)) S(t,s) kappa_j^+(dB(s)) e^{d(t-s)B(t)}
MatrixXcd dyadic_parametrix_kernel(const Evolution& ev, const DyadicCalculus& calc, int i, int k, double delta);

TimeSamples dyadic_parametrix_apply(const OperatorPath& path, const DyadicCalculus& calc, const TimeSamples& f,
                                    double delta);

struct OrthogonalityConstants {
  double low_mode;    // ||[k_j(B(t))-k_j(B(s))] B(s)^+|| * (|t-s| 2^-j)^-1
  double cross;       // ||k_i(B(t)) k_j(B(s))|| * (|t-s| 2^-|i-j|)^-1, |i-j| >= 3
  double lipschitz;   // ||k_j(B(t))-k_j(B(s))|| / |t-s|
  double high_mode;   // ||B(t)[k_j(B(t))-k_j(B(s))]|| * (|t-s| 2^j)^-1
};

OrthogonalityConstants almost_orthogonality_constants(const OperatorPath& path, const DyadicCalculus& calc, double t,
                                                      double s);

/// Discrete-time (V^2_A)^* atoms used as parametrix probes.
struct DualAtom {
  std::vector<int> grid_indices;     // times t_k as path grid indices
  std::vector<VectorXcd> vectors;    // f_k; L^1 type has one entry
  bool l1_type = true;
};

DualAtom random_l1_atom(const OperatorPath& path, unsigned seed);
DualAtom random_v2_atom(const OperatorPath& path, unsigned seed, int jumps = 6);

/// Apply a parametrix kernel to a dual atom exactly (no quadrature):
/// L^1 atom f0 delta_{t0}: u(t) = +/- i H(t,t0) f0 per branch;
/// 2-variation atom: transported difference pairs.
TimeSamples apply_kernel_to_atom(const OperatorPath& path,
                                 const std::function<MatrixXcd(int, int)>& kernel_grid, const DualAtom& atom);

/// sup_t ||(D_t + A + i delta B) u(t)|| over grid times away from the atom's
/// jumps (4th-order finite differences in t).
double atom_residual_sup(const OperatorPath& path, const TimeSamples& u, const DualAtom& atom, double delta = 1.0);

struct DeltaScanRow {
  double delta;
  double mapping_constant;   // max over probes of ||H_d f||_inf / ||f||_atom
  double residual_constant;  // max over probes of residual sup
};

std::vector<DeltaScanRow> delta_scan(const OperatorPath& path, const DyadicCalculus& calc,
                                     const std::vector<double>& deltas, int probes, unsigned seed);

}  // namespace displab

#endif
