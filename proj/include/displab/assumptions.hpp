#ifndef DISPLAB_ASSUMPTIONS_HPP
#define DISPLAB_ASSUMPTIONS_HPP

#include "displab/symbol.hpp"

namespace displab {

struct AssumptionEntry {
  std::string label;
  double constant = 0;    // measured quantity in class-normalized units
  double threshold = 0;
  bool lower_bound = true;  // pass means constant >= threshold (else <=)
  bool pass = false;
  PhasePoint worst;
  int skipped_rays = 0;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;
  const AssumptionEntry& get(const std::string& label) const;
  std::string to_csv() const;  // columns: assumption,constant,threshold,pass,worst_point
};

struct AssumptionConfig {
  std::vector<std::string> labels;  // subset of A1,A1',A2,A2',A3,A3',A4,A4',A5',A6',B1,B2
  int k = 0;                        // curvature deficiency
  int rays = 64;                    // characteristic-point seeds
  int x_samples = 4;
  unsigned seed = 7;
  double lower_threshold = 0.1;     // default for >~ assumptions
  double upper_threshold = 10.0;    // default for A1/A1'
  double small_threshold = 0.1;     // default for << assumptions (B1, B2)
  std::map<std::string, double> threshold_overrides;
};

/// Numeric checks of the geometric assumptions for the pair (p_re, p_im).
/// Gradients are normalized to the unit-order class via lambda^{1 - k_order};
/// characteristic points are found by ray bisection (Sigma^re) and a
/// Gauss-Newton refinement (joint Sigma).
AssumptionReport check_assumptions(const Symbol& p_re, const Symbol& p_im, const AssumptionConfig& cfg);

/// Best |det| over size x size minors of the second fundamental form
/// S_{x,xi}(nu) of the level set {p = 0} in the xi fiber.
/// rotate_seed != 0 applies a random orthogonal change of tangent basis
/// (the full-size determinant is invariant).
double curvature_minor(const Symbol& sym, const PhasePoint& p, const VectorXd& normal, int size,
                       unsigned rotate_seed = 0, double on_set_tol = 1e-6);

/// Bisection roots of Re p(x, r*omega) = 0 along radial rays.
struct CharPoints {
  std::vector<PhasePoint> points;
  int skipped = 0;
};

CharPoints find_characteristic_points(const Symbol& sym, int rays, int x_samples, unsigned seed, double r_min,
                                      double r_max);

/// Gauss-Newton refinement onto the joint zero set {p_re = p_im = 0}.
CharPoints find_joint_characteristic_points(const Symbol& p_re, const Symbol& p_im, int rays, int x_samples,
                                            unsigned seed, double r_min, double r_max);

}  // namespace displab

#endif
