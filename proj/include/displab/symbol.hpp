#ifndef DISPLAB_SYMBOL_HPP
#define DISPLAB_SYMBOL_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "displab/grid.hpp"

namespace displab {

/// A point (t, x, xi) in extended phase space.
struct PhasePoint {
  double t = 0;
  VectorXd x;
  VectorXd xi;

  PhasePoint() = default;
  PhasePoint(double t_, VectorXd x_, VectorXd xi_) : t(t_), x(std::move(x_)), xi(std::move(xi_)) {}
  static PhasePoint d1(double x, double xi, double t = 0);
  bool finite() const { return x.allFinite() && xi.allFinite() && std::isfinite(t); }
};

VectorXi unit_index(int dim, int axis);
VectorXi zero_index(int dim);

/// Phase-space symbol a(t,x,xi) with derivative access up to max_order.
///
/// The evaluator returns d_x^alpha d_xi^beta a for |alpha|+|beta| <= analytic_order;
/// higher derivatives are formed by nested 4th-order central differences on top of
/// the highest analytic level. analytic_order = 0 means value-only evaluator.
class Symbol {
 public:
  using Evaluator = std::function<Complex(double t, const VectorXd& x, const VectorXd& xi, const VectorXi& alpha,
                                          const VectorXi& beta)>;

  Symbol() = default;
  Symbol(int dim, double lambda, int class_order, int k_order, int analytic_order, int max_order, Evaluator ev,
         std::string name = "");

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  int class_order() const { return class_order_; }
  int k_order() const { return k_order_; }
  bool analytic_derivs() const { return analytic_order_ > 0; }
  int analytic_order() const { return analytic_order_; }
  int max_order() const { return max_order_; }
  const std::string& name() const { return name_; }

  /// d_x^alpha d_xi^beta a(t,x,xi). Throws if |alpha|+|beta| exceeds max_order.
  Complex eval(const PhasePoint& p, const VectorXi& alpha, const VectorXi& beta) const;
  Complex eval(const PhasePoint& p) const;
  double real(const PhasePoint& p, const VectorXi& alpha, const VectorXi& beta) const {
    return eval(p, alpha, beta).real();
  }

  /// Finite-difference evaluation all the way down to the raw evaluator
  /// (cross-check path; independent of the analytic derivative formulas).
  Complex eval_fd(const PhasePoint& p, const VectorXi& alpha, const VectorXi& beta) const;

  VectorXd grad_x(const PhasePoint& p) const;
  VectorXd grad_xi(const PhasePoint& p) const;
  MatrixXd hess_xi(const PhasePoint& p) const;
  MatrixXd hess_xx(const PhasePoint& p) const;
  MatrixXd hess_xix(const PhasePoint& p) const;  // (i,j) = d_xi_i d_x_j a

 private:
  Complex eval_rec(const PhasePoint& p, VectorXi alpha, VectorXi beta, int down_to) const;

  int dim_ = 1;
  double lambda_ = 2.0;
  int class_order_ = 2;
  int k_order_ = 0;
  int analytic_order_ = 0;
  int max_order_ = 4;
  Evaluator eval_;
  std::string name_;
};

/// {f, g} = sum_i d_xi f d_x g - d_x f d_xi g at p (real parts).
double poisson_bracket(const Symbol& f, const Symbol& g, const PhasePoint& p);

/// Model library, selectable by name + parameter map from the CLI config:
///   schrodinger        scale*|xi|^2
///   half_wave          scale*(|xi| with a quadratic cap inside radius 0.1*lambda)
///   degenerate         scale*(xi_1^2+...+xi_{d-flat}^2)
///   variable_metric    scale*(1+eps*sin x_1)|xi|^2
///   constant           c
///   linear_xi          xi_1
///   bump_xi            lambda*chi(|xi|/lambda), smooth bump
/// params: lambda, dim, scale (default 1), eps (default 0.1), c, flat, k_order.
Symbol make_symbol(const std::string& name, const std::map<std::string, double>& params);

/// Rescaled symbol t0*a(t*t0^-1... ) of the fixed-time normalization:
/// a~(t,x,xi) = t0 * a(t/t0, x*sqrt(t0/lambda), xi*sqrt(lambda/t0)).
Symbol rescale_fixedtime(const Symbol& sym, double t0, double lambda);

/// C^inf profile: 1 for |s|<=1/2, 0 for |s|>=1, monotone in between.
double bump_profile(double s);

/// Smooth tensor-product cutoff chi(x,xi) in [0,1]: 1 on the half-size box,
/// supported in the declared box.
struct CutoffSymbol {
  VectorXd x_center, xi_center;
  VectorXd x_radius, xi_radius;

  CutoffSymbol() = default;
  CutoffSymbol(VectorXd xc, VectorXd xic, VectorXd xr, VectorXd xir);
  static CutoffSymbol box(int dim, double x_radius, double xi_radius, VectorXd xi_center = VectorXd());

  double value(const VectorXd& x, const VectorXd& xi) const;
  double x_factor(const VectorXd& x) const;
  double xi_factor(const VectorXd& xi) const;
};

/// Multi-index pair key for derivative tables.
struct IndexPair {
  std::vector<int> alpha, beta;
  bool operator<(const IndexPair& o) const {
    if (alpha != o.alpha) return alpha < o.alpha;
    return beta < o.beta;
  }
};

/// For each (alpha,beta) with |alpha|+|beta| <= max_order, sup over samples of
/// |d^alpha_x d^beta_xi a| divided by the class weight lambda^{-|beta|}
/// (|alpha| <= j) or lambda^{(|alpha|-j)/2-|beta|} (|alpha| >= j), after
/// normalizing the symbol to order zero by lambda^{-k_order}.
std::map<IndexPair, double> check_symbol_class(const Symbol& sym, int j, const std::vector<PhasePoint>& samples,
                                               int max_order);

}  // namespace displab

#endif
