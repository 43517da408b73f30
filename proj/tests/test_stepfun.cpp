#include <doctest.h>

#include <random>

#include "displab/stepfun.hpp"

using namespace displab;

namespace {

StepFunction scalar_steps(const std::vector<double>& times, const std::vector<double>& vals) {
  VectorXd t(times.size());
  for (size_t i = 0; i < times.size(); ++i) t[static_cast<int>(i)] = times[i];
  std::vector<VectorXcd> v;
  for (double x : vals) v.push_back(VectorXcd::Constant(1, Complex(x, 0)));
  return StepFunction(t, v);
}

}  // namespace

TEST_CASE("v2 norm: constant, alternating, monotone") {
  StepFunction c = scalar_steps({0.0, 0.5}, {2.0, 2.0});
  CHECK(v2_norm(c) == doctest::Approx(2.0));

  // (0,1,0): the finest chain wins, 1 + 1 = 2, norm sqrt(2)
  StepFunction alt = scalar_steps({0.0, 0.3, 0.6}, {0.0, 1.0, 0.0});
  CHECK(v2_norm(alt) == doctest::Approx(std::sqrt(2.0)));

  // (0,1,2): the coarsest chain wins, 2^2 = 4 > 1 + 1, norm 2
  StepFunction mono = scalar_steps({0.0, 0.3, 0.6}, {0.0, 1.0, 2.0});
  CHECK(v2_norm(mono) == doctest::Approx(2.0));
  CHECK(v2_norm(mono) == doctest::Approx(v2_norm_bruteforce(mono)));
}

TEST_CASE("v2 norm dynamic programming equals exhaustive enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> K(1, 11);
  for (int trial = 0; trial < 200; ++trial) {
    StepFunction u = StepFunction::random(3, K(rng), 1000 + trial);
    CHECK(v2_norm(u) == doctest::Approx(v2_norm_bruteforce(u)).epsilon(1e-12));
  }
}

TEST_CASE("v2 norm with transport conjugation") {
  // A constant diagonal, u(t) = S(t,0) v: transported increments vanish
  const int m = 3;
  VectorXd d(m);
  d << 1.0, -2.0, 0.5;
  OperatorPath path = OperatorPath::constant(d.asDiagonal().toDenseMatrix().cast<Complex>(), MatrixXcd::Zero(m, m));
  Evolution ev(path);
  VectorXcd v(m);
  v << 1.0, Complex(0, 1), -0.5;
  std::vector<double> times{0.0, 0.25, 0.5, 0.75};
  VectorXd t(4);
  std::vector<VectorXcd> vals;
  for (int i = 0; i < 4; ++i) {
    t[i] = times[i];
    vals.push_back(ev.S(times[i], 0.0) * v);
  }
  StepFunction u(t, vals);
  CHECK(v2_norm(u, &ev) == doctest::Approx(v.norm()).epsilon(1e-7));
  CHECK(v2_norm(u) > v.norm());  // without transport the increments are real
}

TEST_CASE("uq decomposition: single jump is one atom") {
  std::vector<VectorXcd> vals(2, VectorXcd::Zero(2));
  vals[1] = VectorXcd::Zero(2);
  vals[1][0] = 1.0;
  VectorXd t(2);
  t << 0.0, 0.5;
  StepFunction u(t, vals);
  UqDecomposition dec = uq_decompose(u, 4.0);
  CHECK(dec.levels.size() == 1);
  CHECK(dec.reconstruction_error < 1e-14);
  CHECK(dec.bound <= 2.0);
}

TEST_CASE("uq decomposition: alternating jumps satisfy the level-count audit") {
  const int K = 32;
  VectorXd t(K + 1);
  std::vector<VectorXcd> vals(K + 1, VectorXcd::Zero(1));
  for (int i = 0; i <= K; ++i) {
    t[i] = static_cast<double>(i) / (K + 1);
    vals[i][0] = i % 2 == 0 ? 0.0 : 1.0;
  }
  StepFunction u(t, vals);
  const double nv2 = v2_norm(u);
  UqDecomposition dec = uq_decompose(u, 4.0);
  CHECK(dec.reconstruction_error < 1e-12);
  int prev = 1;
  for (size_t l = 0; l < dec.levels.size(); ++l) {
    const double thr = dec.levels[l].threshold;  // 2^{-j-1} at level j = l
    CHECK(dec.levels[l].intervals - prev <= std::pow(thr, -2.0) * nv2 * nv2 + 1e-9);
    prev = dec.levels[l].intervals;
  }
}

TEST_CASE("uq decomposition: randomized audit") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> K(1, 64), M(1, 8);
  double worst_ratio = 0;
  for (int trial = 0; trial < 300; ++trial) {
    StepFunction u = StepFunction::random(M(rng), K(rng), 5000 + trial);
    const double nv2 = v2_norm(u);
    UqDecomposition dec = uq_decompose(u, 4.0);
    CHECK(dec.reconstruction_error <= 1e-10);
    int prev = 1;
    double cap = 0;
    for (size_t l = 0; l < dec.levels.size(); ++l) {
      const double thr = dec.levels[l].threshold;
      CHECK(dec.levels[l].intervals - prev <= 4.0 / (thr * thr) * nv2 * nv2 + 1e-9);
      prev = dec.levels[l].intervals;
      cap += 2.0 * thr;  // 2^{-j} at level j
      // atoms are valid: steps partition [0,1], sum ||steps||^q = 1 after normalization
      double qsum = 0;
      for (const auto& v : dec.levels[l].part.values)
        qsum += std::pow(v.norm() / dec.levels[l].coefficient, 4.0);
      if (dec.levels[l].coefficient > 1e-14) CHECK(qsum == doctest::Approx(1.0).epsilon(1e-10));
    }
    worst_ratio = std::max(worst_ratio, dec.bound / nv2);
  }
  // empirical embedding constant for q = 4 within margin 4 of sum_j 2^{(2/q-1) j}
  const double budget = 4.0 / (std::sqrt(2.0) - 1.0);
  CHECK(worst_ratio <= budget);
}

TEST_CASE("uq decomposition rejects q <= 2") { 
  StepFunction u = StepFunction::random(2, 4, 1);
  CHECK_THROWS(uq_decompose(u, 2.0));
}
