#ifndef DISPLAB_SERIES_HPP
#define DISPLAB_SERIES_HPP

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace displab {

/// Bivariate truncated power series sum c_{k,l} s^k q^l, 0 <= k+l <= N,
/// with exact coefficient arithmetic truncated at total degree N.
/// Scalar must support +, -, *, /, == and value-construction from int.
template <class Scalar>
class TruncatedSeries2 {
 public:
  explicit TruncatedSeries2(int degree_cap) : cap_(degree_cap) {
    if (degree_cap < 0) throw std::invalid_argument("TruncatedSeries2: negative degree cap");
    coef_.assign(static_cast<size_t>((cap_ + 1) * (cap_ + 2) / 2), Scalar(0));
  }

  int cap() const { return cap_; }

  Scalar& at(int k, int l) {
    check(k, l);
    return coef_[slot(k, l)];
  }
  const Scalar& at(int k, int l) const {
    check(k, l);
    return coef_[slot(k, l)];
  }

  static TruncatedSeries2 monomial(int cap, int k, int l, Scalar c) {
    TruncatedSeries2 s(cap);
    if (k + l <= cap) s.at(k, l) = c;
    return s;
  }

  TruncatedSeries2 operator+(const TruncatedSeries2& o) const {
    same_cap(o);
    TruncatedSeries2 r(cap_);
    for (size_t i = 0; i < coef_.size(); ++i) r.coef_[i] = coef_[i] + o.coef_[i];
    return r;
  }
  TruncatedSeries2 operator-(const TruncatedSeries2& o) const {
    same_cap(o);
    TruncatedSeries2 r(cap_);
    for (size_t i = 0; i < coef_.size(); ++i) r.coef_[i] = coef_[i] - o.coef_[i];
    return r;
  }
  TruncatedSeries2 operator*(const TruncatedSeries2& o) const {
    same_cap(o);
    TruncatedSeries2 r(cap_);
    for (int k = 0; k <= cap_; ++k)
      for (int l = 0; k + l <= cap_; ++l) {
        const Scalar& a = coef_[slot(k, l)];
        if (a == Scalar(0)) continue;
        for (int k2 = 0; k + k2 <= cap_; ++k2)
          for (int l2 = 0; k + k2 + l + l2 <= cap_; ++l2) {
            const Scalar& b = o.coef_[slot(k2, l2)];
            if (b == Scalar(0)) continue;
            r.coef_[slot(k + k2, l + l2)] = r.coef_[slot(k + k2, l + l2)] + a * b;
          }
      }
    return r;
  }
  TruncatedSeries2 scaled(const Scalar& c) const {
    TruncatedSeries2 r(cap_);
    for (size_t i = 0; i < coef_.size(); ++i) r.coef_[i] = coef_[i] * c;
    return r;
  }
  /// re-truncate to a smaller cap
  TruncatedSeries2 truncated(int new_cap) const {
    TruncatedSeries2 r(new_cap);
    for (int k = 0; k <= new_cap; ++k)
      for (int l = 0; k + l <= new_cap; ++l) r.at(k, l) = at(k, l);
    return r;
  }

  template <class F>
  void for_each(F&& f) const {
    for (int k = 0; k <= cap_; ++k)
      for (int l = 0; k + l <= cap_; ++l) f(k, l, coef_[slot(k, l)]);
  }

 private:
  void check(int k, int l) const {
    if (k < 0 || l < 0 || k + l > cap_) throw std::out_of_range("TruncatedSeries2: monomial outside cap");
  }
  size_t slot(int k, int l) const {
    const int d = k + l;
    return static_cast<size_t>(d * (d + 1) / 2 + l);
  }
  void same_cap(const TruncatedSeries2& o) const {
    if (cap_ != o.cap_) throw std::invalid_argument("TruncatedSeries2: degree cap mismatch");
  }

  int cap_;
  std::vector<Scalar> coef_;
};

/// Output of the canonical-form series recursion: the elliptic factor
/// e = sum e_{k,l} s^k q^l (k+l <= N-1) and remainder coefficients
/// c_l = a_l + i b_l, 1 <= l <= N, with e (s + i p_im) = s + sum c_l q^l
/// modulo total degree > N.
template <class Scalar>
struct SsnSeries {
  TruncatedSeries2<Scalar> e;
  std::vector<Scalar> c;  // c[l] = a_l + i b_l, index 0 unused
};

/// Canonical-form recursion at a frozen base point. q[k] for k = 1..N+1 are
/// the Taylor coefficients of p_im in s; q[0] is the second formal variable
/// and its slot is ignored. Requires 1 + i q_1 invertible.
template <class Scalar>
SsnSeries<Scalar> ssn_recursion(const std::vector<Scalar>& q, int N) {
  if (static_cast<int>(q.size()) < N + 2) throw std::invalid_argument("ssn_recursion: need q_k for k <= N+1");
  const Scalar I = Scalar(0, 1);
  const Scalar lead = Scalar(1) + I * q[1];
  if (lead == Scalar(0)) throw std::domain_error("ssn_recursion: 1 + i q_1 = 0, division blocked");
  const Scalar e00 = Scalar(1) / lead;

  SsnSeries<Scalar> out{TruncatedSeries2<Scalar>(std::max(N - 1, 0)), std::vector<Scalar>(N + 1, Scalar(0))};
  if (N == 0) return out;
  out.e.at(0, 0) = e00;
  out.c[1] = I * e00;

  // level Np determines e_{k,l} with k+l = Np-1 and c_Np. The right-hand side
  // is the homogeneous degree-Np part -i sum_{k+l<Np-1} e_{k,l} q_{Np-k-l} s^{Np-l} q^l,
  // divided by s(1+i q_1) + i q as polynomials in s.
  for (int Np = 2; Np <= N; ++Np) {
    // R[j] = coefficient of s^j q^{Np-j}
    std::vector<Scalar> R(Np + 1, Scalar(0));
    for (int k = 0; k + 1 <= Np - 1; ++k)
      for (int l = 0; k + l < Np - 1; ++l) {
        const int m = Np - k - l;  // >= 2
        R[Np - l] = R[Np - l] - I * out.e.at(k, l) * q[m];
      }
    // synthetic division by (1+iq_1) s + i q; quotient Q[j] = coeff of s^j q^{Np-1-j}
    std::vector<Scalar> Q(Np, Scalar(0));
    for (int j = Np; j >= 1; --j) {
      const Scalar t = R[j] / lead;
      Q[j - 1] = t;
      R[j] = Scalar(0);
      R[j - 1] = R[j - 1] - I * t;  // i q * s^{j-1} term
    }
    for (int k = 0; k <= Np - 1; ++k) out.e.at(k, Np - 1 - k) = Q[k];
    out.c[Np] = Scalar(0) - R[0];
  }
  return out;
}

/// Largest |coefficient| of total degree <= N in
/// e^{N-1} (s + i p_im) - (s + sum_l c_l q^l), assembled in truncated
/// arithmetic; the recursion makes this identically zero.
template <class Scalar, class AbsFn>
auto residual_order(const SsnSeries<Scalar>& ssn, const std::vector<Scalar>& q, int N, AbsFn&& absfn)
    -> decltype(absfn(Scalar(0))) {
  const Scalar I = Scalar(0, 1);
  TruncatedSeries2<Scalar> e(N);
  ssn.e.for_each([&](int k, int l, const Scalar& v) { e.at(k, l) = v; });
  TruncatedSeries2<Scalar> pim(N);
  if (N >= 1) pim.at(0, 1) = Scalar(1);  // q_0 is the second variable
  for (int k = 1; k <= std::min(N, static_cast<int>(q.size()) - 1); ++k) pim.at(k, 0) = q[k];
  TruncatedSeries2<Scalar> target(N);
  target.at(1, 0) = Scalar(1);
  for (int l = 1; l <= N && l < static_cast<int>(ssn.c.size()); ++l) target.at(0, l) = ssn.c[l];
  const TruncatedSeries2<Scalar> lhs = e * (TruncatedSeries2<Scalar>::monomial(N, 1, 0, Scalar(1)) + pim.scaled(I));
  const TruncatedSeries2<Scalar> diff = lhs - target;
  auto worst = absfn(Scalar(0));
  diff.for_each([&](int, int, const Scalar& v) {
    auto a = absfn(v);
    if (worst < a) worst = a;
  });
  return worst;
}

/// Sampled elliptic normalization e(s) = s / p(s - root) on a shifted grid,
/// with the simple root located by bisection; returns e and sup |e p - s|.
struct EllipticNormalization {
  double root;
  std::vector<double> grid;  // shifted so the root sits at 0
  std::vector<double> e;
  double defect;
};

EllipticNormalization elliptic_normalize_real(const std::function<double(double)>& p, double lo, double hi,
                                              int grid_points, double dp_min = 1e-6);

}  // namespace displab

#endif
