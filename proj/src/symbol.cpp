#include "displab/symbol.hpp"

#include <cmath>

namespace displab {

PhasePoint PhasePoint::d1(double x, double xi, double t) {
  return PhasePoint(t, VectorXd::Constant(1, x), VectorXd::Constant(1, xi));
}

VectorXi unit_index(int dim, int axis) {
  VectorXi e = VectorXi::Zero(dim);
  e[axis] = 1;
  return e;
}

VectorXi zero_index(int dim) { return VectorXi::Zero(dim); }

Symbol::Symbol(int dim, double lambda, int class_order, int k_order, int analytic_order, int max_order, Evaluator ev,
               std::string name)
    : dim_(dim),
      lambda_(lambda),
      class_order_(class_order),
      k_order_(k_order),
      analytic_order_(analytic_order),
      max_order_(max_order),
      eval_(std::move(ev)),
      name_(std::move(name)) {
  if (lambda_ <= 1.0) throw std::invalid_argument("Symbol: lambda must exceed 1");
  if (class_order_ < 0 || class_order_ > 2) throw std::invalid_argument("Symbol: class order in {0,1,2}");
}

namespace {

// per-order central-difference steps; the first-order value is the one the
// derivative cross-checks are calibrated to, higher orders trade truncation
// against roundoff accumulated through nesting
constexpr double kFdStep[5] = {0.0, 1e-4, 1e-3, 3e-3, 1e-2};

int total(const VectorXi& a) { return a.sum(); }

}  // namespace

Complex Symbol::eval_rec(const PhasePoint& p, VectorXi alpha, VectorXi beta, int down_to) const {
  const int m = total(alpha) + total(beta);
  if (m <= down_to) return eval_(p.t, p.x, p.xi, alpha, beta);
  const double scale = std::max({1.0, p.x.size() ? p.x.cwiseAbs().maxCoeff() : 0.0,
                                 p.xi.size() ? p.xi.cwiseAbs().maxCoeff() / lambda_ : 0.0});
  const double h = kFdStep[std::min(m, 4)] * scale;
  // peel one derivative off the first loaded axis, x side first
  for (int side = 0; side < 2; ++side) {
    VectorXi& idx = side == 0 ? alpha : beta;
    for (int a = 0; a < dim_; ++a) {
      if (idx[a] == 0) continue;
      idx[a] -= 1;
      Complex v[4];
      const double off[4] = {-2 * h, -h, h, 2 * h};
      for (int s = 0; s < 4; ++s) {
        PhasePoint q = p;
        (side == 0 ? q.x[a] : q.xi[a]) += off[s];
        v[s] = eval_rec(q, alpha, beta, down_to);
      }
      return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
    }
  }
  return eval_(p.t, p.x, p.xi, alpha, beta);
}

Complex Symbol::eval(const PhasePoint& p, const VectorXi& alpha, const VectorXi& beta) const {
  const int m = total(alpha) + total(beta);
  if (m > max_order_) throw std::out_of_range("Symbol: derivative order " + std::to_string(m) + " unsupported");
  return eval_rec(p, alpha, beta, analytic_order_);
}

Complex Symbol::eval(const PhasePoint& p) const { return eval_(p.t, p.x, p.xi, zero_index(dim_), zero_index(dim_)); }

Complex Symbol::eval_fd(const PhasePoint& p, const VectorXi& alpha, const VectorXi& beta) const {
  return eval_rec(p, alpha, beta, 0);
}

VectorXd Symbol::grad_x(const PhasePoint& p) const {
  VectorXd g(dim_);
  for (int a = 0; a < dim_; ++a) g[a] = eval(p, unit_index(dim_, a), zero_index(dim_)).real();
  return g;
}

VectorXd Symbol::grad_xi(const PhasePoint& p) const {
  VectorXd g(dim_);
  for (int a = 0; a < dim_; ++a) g[a] = eval(p, zero_index(dim_), unit_index(dim_, a)).real();
  return g;
}

MatrixXd Symbol::hess_xi(const PhasePoint& p) const {
  MatrixXd h(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = a; b < dim_; ++b) {
      VectorXi beta = unit_index(dim_, a);
      beta[b] += 1;
      h(a, b) = h(b, a) = eval(p, zero_index(dim_), beta).real();
    }
  return h;
}

MatrixXd Symbol::hess_xx(const PhasePoint& p) const {
  MatrixXd h(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = a; b < dim_; ++b) {
      VectorXi alpha = unit_index(dim_, a);
      alpha[b] += 1;
      h(a, b) = h(b, a) = eval(p, alpha, zero_index(dim_)).real();
    }
  return h;
}

MatrixXd Symbol::hess_xix(const PhasePoint& p) const {
  MatrixXd h(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) h(a, b) = eval(p, unit_index(dim_, b), unit_index(dim_, a)).real();
  return h;
}

double poisson_bracket(const Symbol& f, const Symbol& g, const PhasePoint& p) {
  const VectorXd fx = f.grad_x(p), fxi = f.grad_xi(p);
  const VectorXd gx = g.grad_x(p), gxi = g.grad_xi(p);
  return fxi.dot(gx) - fx.dot(gxi);
}

namespace {

double get(const std::map<std::string, double>& m, const std::string& k, double dflt) {
  auto it = m.find(k);
  return it == m.end() ? dflt : it->second;
}

// derivative of s*|xi|^2 type monomial sums: handled per model below

double sin_cycle(double x, int order) {
  switch (order % 4) {
    case 0: return std::sin(x);
    case 1: return std::cos(x);
    case 2: return -std::sin(x);
    default: return -std::cos(x);
  }
}

}  // namespace

double bump_profile(double s) {
  const double a = std::abs(s);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  auto f = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
  const double u = 2.0 * (a - 0.5);
  return f(1.0 - u) / (f(u) + f(1.0 - u));
}

Symbol make_symbol(const std::string& name, const std::map<std::string, double>& params) {
  const int d = static_cast<int>(get(params, "dim", 1));
  const double lambda = get(params, "lambda", 2.0);
  const double scale = get(params, "scale", 1.0);

  if (name == "schrodinger" || name == "degenerate") {
    const int flat = name == "degenerate" ? static_cast<int>(get(params, "flat", 1)) : 0;
    const int nact = d - flat;
    if (nact < 1 || nact > d) throw std::invalid_argument("degenerate: flat count out of range");
    auto ev = [nact, scale, d](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha,
                               const VectorXi& beta) -> Complex {
      if (alpha.sum() > 0) return 0.0;
      (void)d;
      // derivative of sum_{i<nact} xi_i^2
      int which = -1, ord = 0;
      for (int a = 0; a < beta.size(); ++a)
        if (beta[a] > 0) {
          if (which >= 0 && which != a) return 0.0;  // mixed derivative of a diagonal quadratic
          which = a;
          ord = beta[a];
        }
      if (which < 0) {
        double s = 0;
        for (int i = 0; i < nact; ++i) s += xi[i] * xi[i];
        return scale * s;
      }
      if (which >= nact) return 0.0;
      if (ord == 1) return scale * 2.0 * xi[which];
      if (ord == 2) return scale * 2.0;
      return 0.0;
    };
    return Symbol(d, lambda, 2, static_cast<int>(get(params, "k_order", 2)), 8, 8, ev,
                  name == "schrodinger" ? "schrodinger" : "degenerate");
  }

  if (name == "variable_metric") {
    const double eps = get(params, "eps", 0.1);
    if (eps > 0.2) throw std::invalid_argument("variable_metric: eps must be <= 0.2");
    auto ev = [eps, scale](double, const VectorXd& x, const VectorXd& xi, const VectorXi& alpha,
                           const VectorXi& beta) -> Complex {
      // separable (1 + eps sin x_1) * |xi|^2
      for (int a = 1; a < alpha.size(); ++a)
        if (alpha[a] > 0) return 0.0;
      const int ax = alpha[0];
      double mfac = ax == 0 ? 1.0 + eps * std::sin(x[0]) : eps * sin_cycle(x[0], ax);
      int which = -1, ord = 0;
      for (int a = 0; a < beta.size(); ++a)
        if (beta[a] > 0) {
          if (which >= 0 && which != a) return 0.0;
          which = a;
          ord = beta[a];
        }
      double xifac;
      if (which < 0)
        xifac = xi.squaredNorm();
      else if (ord == 1)
        xifac = 2.0 * xi[which];
      else if (ord == 2)
        xifac = 2.0;
      else
        xifac = 0.0;
      return scale * mfac * xifac;
    };
    return Symbol(d, lambda, 2, static_cast<int>(get(params, "k_order", 2)), 8, 8, ev, "variable_metric");
  }

  if (name == "half_wave") {
    const double r = 0.1 * lambda;
    auto ev = [r, scale, d](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha,
                            const VectorXi& beta) -> Complex {
      if (alpha.sum() > 0) return 0.0;
      const double rho = xi.norm();
      const int ord = beta.sum();
      if (rho < r) {
        // quadratic cap |xi|^2/(2r) + r/2
        if (ord == 0) return scale * (rho * rho / (2 * r) + r / 2);
        int which = -1, o = 0;
        for (int a = 0; a < beta.size(); ++a)
          if (beta[a] > 0) {
            if (which >= 0 && which != a) return 0.0;
            which = a;
            o = beta[a];
          }
        if (o == 1) return scale * xi[which] / r;
        if (o == 2) return scale / r;
        return 0.0;
      }
      if (ord == 0) return scale * rho;
      if (ord == 1) {
        for (int a = 0; a < beta.size(); ++a)
          if (beta[a] == 1) return scale * xi[a] / rho;
      }
      if (ord == 2) {
        int i = -1, jx = -1;
        for (int a = 0; a < beta.size(); ++a) {
          if (beta[a] == 2) i = jx = a;
          else if (beta[a] == 1) (i < 0 ? i : jx) = a;
        }
        const double del = i == jx ? 1.0 : 0.0;
        return scale * (del / rho - xi[i] * xi[jx] / (rho * rho * rho));
      }
      (void)d;
      return 0.0;  // orders > 2 resolved by finite differences on the gradient
    };
    return Symbol(d, lambda, 2, static_cast<int>(get(params, "k_order", 1)), 2, 6, ev, "half_wave");
  }

  if (name == "constant") {
    const double c = get(params, "c", 1.0);
    auto ev = [c](double, const VectorXd&, const VectorXd&, const VectorXi& alpha, const VectorXi& beta) -> Complex {
      return (alpha.sum() + beta.sum()) == 0 ? c : 0.0;
    };
    return Symbol(d, lambda, 2, 0, 8, 8, ev, "constant");
  }

  if (name == "linear_xi") {
    auto ev = [](double, const VectorXd&, const VectorXd& xi, const VectorXi& alpha, const VectorXi& beta) -> Complex {
      if (alpha.sum() > 0) return 0.0;
      const int o = beta.sum();
      if (o == 0) return xi[0];
      if (o == 1 && beta[0] == 1) return 1.0;
      return 0.0;
    };
    return Symbol(d, lambda, 2, static_cast<int>(get(params, "k_order", 1)), 8, 8, ev, "linear_xi");
  }

  if (name == "bump_xi") {
    auto ev = [lambda](double, const VectorXd&, const VectorXd& xi, const VectorXi&, const VectorXi&) -> Complex {
      return lambda * bump_profile(xi.norm() / lambda);
    };
    return Symbol(d, lambda, 2, static_cast<int>(get(params, "k_order", 1)), 0, 4, ev, "bump_xi");
  }

  throw std::invalid_argument("make_symbol: unknown symbol '" + name + "'");
}

Symbol rescale_fixedtime(const Symbol& sym, double t0, double lambda) {
  if (t0 <= 0) throw std::invalid_argument("rescale_fixedtime: t0 must be positive");
  const double cx = std::sqrt(t0 / lambda);
  const double cxi = std::sqrt(lambda / t0);
  auto base = sym;  // capture by value; Symbol is cheap to copy
  auto ev = [base, t0, cx, cxi](double t, const VectorXd& x, const VectorXd& xi, const VectorXi& alpha,
                                const VectorXi& beta) -> Complex {
    PhasePoint q(t / t0, cx * x, cxi * xi);
    const double fac = t0 * std::pow(cx, alpha.sum()) * std::pow(cxi, beta.sum());
    return fac * base.eval(q, alpha, beta);
  };
  const double mu = std::sqrt(t0 * lambda);
  return Symbol(sym.dim(), std::max(mu, 1.0 + 1e-9), sym.class_order(), sym.k_order(), sym.analytic_order(),
                sym.max_order(), ev, sym.name() + "_rescaled");
}

CutoffSymbol::CutoffSymbol(VectorXd xc, VectorXd xic, VectorXd xr, VectorXd xir)
    : x_center(std::move(xc)), xi_center(std::move(xic)), x_radius(std::move(xr)), xi_radius(std::move(xir)) {
  if (x_radius.minCoeff() <= 0 || xi_radius.minCoeff() <= 0)
    throw std::invalid_argument("CutoffSymbol: radii must be positive");
}

CutoffSymbol CutoffSymbol::box(int dim, double x_radius, double xi_radius, VectorXd xi_center) {
  if (xi_center.size() == 0) xi_center = VectorXd::Zero(dim);
  return CutoffSymbol(VectorXd::Zero(dim), xi_center, VectorXd::Constant(dim, x_radius),
                      VectorXd::Constant(dim, xi_radius));
}

double CutoffSymbol::x_factor(const VectorXd& x) const {
  double v = 1;
  for (int a = 0; a < x.size(); ++a) v *= bump_profile((x[a] - x_center[a]) / x_radius[a]);
  return v;
}

double CutoffSymbol::xi_factor(const VectorXd& xi) const {
  double v = 1;
  for (int a = 0; a < xi.size(); ++a) v *= bump_profile((xi[a] - xi_center[a]) / xi_radius[a]);
  return v;
}

double CutoffSymbol::value(const VectorXd& x, const VectorXd& xi) const { return x_factor(x) * xi_factor(xi); }

namespace {

void enumerate_indices(int dim, int budget, std::vector<VectorXi>& out) {
  // all multi-indices with sum <= budget
  VectorXi cur = VectorXi::Zero(dim);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[axis] = v;
      rec(axis + 1, left - v);
    }
    cur[axis] = 0;
  };
  rec(0, budget);
}

}  // namespace

std::map<IndexPair, double> check_symbol_class(const Symbol& sym, int j, const std::vector<PhasePoint>& samples,
                                               int max_order) {
  if (samples.empty()) throw std::invalid_argument("check_symbol_class: empty sample set");
  const int d = sym.dim();
  const double lambda = sym.lambda();
  const double norm = std::pow(lambda, -sym.k_order());
  std::vector<VectorXi> idx;
  enumerate_indices(d, max_order, idx);
  std::map<IndexPair, double> out;
  for (const auto& alpha : idx)
    for (const auto& beta : idx) {
      const int na = alpha.sum(), nb = beta.sum();
      if (na + nb > max_order) continue;
      const double weight =
          na <= j ? std::pow(lambda, -nb) : std::pow(lambda, 0.5 * (na - j) - nb);
      double sup = 0;
      for (const auto& p : samples) sup = std::max(sup, std::abs(sym.eval(p, alpha, beta)) * norm / weight);
      IndexPair key{{alpha.data(), alpha.data() + d}, {beta.data(), beta.data() + d}};
      out[key] = sup;
    }
  return out;
}

}  // namespace displab
