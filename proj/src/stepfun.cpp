#include "displab/stepfun.hpp"

#include <random>
#include <set>

namespace displab {

StepFunction::StepFunction(VectorXd t, std::vector<VectorXcd> v) : times(std::move(t)), values(std::move(v)) {
  if (times.size() == 0 || static_cast<size_t>(times.size()) != values.size())
    throw std::invalid_argument("StepFunction: time/value count mismatch");
  if (times[0] != 0.0) throw std::invalid_argument("StepFunction: first jump time must be 0");
  for (int i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("StepFunction: jump times not increasing");
  for (const auto& val : values)
    if (!val.allFinite()) throw std::invalid_argument("StepFunction: non-finite value");
}

double StepFunction::sup_norm() const {
  double s = 0;
  for (const auto& v : values) s = std::max(s, v.norm());
  return s;
}

StepFunction StepFunction::random(int m, int K, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  std::set<double> ts{0.0};
  while (static_cast<int>(ts.size()) < K + 1) ts.insert(0.01 + 0.98 * U(rng));
  VectorXd t(K + 1);
  int i = 0;
  for (double v : ts) t[i++] = v;
  std::vector<VectorXcd> vals(K + 1);
  for (auto& v : vals) {
    v.resize(m);
    for (int j = 0; j < m; ++j) v[j] = Complex(N(rng), N(rng));
  }
  return StepFunction(std::move(t), std::move(vals));
}

namespace {

std::vector<VectorXcd> conjugate_values(const StepFunction& u, const Evolution* transport) {
  std::vector<VectorXcd> v = u.values;
  if (!transport) return v;
  // pull back along the flow: increments of S(0,t)u(t) are the transported increments
  for (size_t k = 0; k < v.size(); ++k) v[k] = transport->S(0.0, u.times[static_cast<int>(k)]) * v[k];
  return v;
}

}  // namespace

double v2_norm(const StepFunction& u, const Evolution* transport) {
  const std::vector<VectorXcd> v = conjugate_values(u, transport);
  const int K = static_cast<int>(v.size());
  // best[j] = max summed squared increments over chains ending at j
  std::vector<double> best(K, 0.0);
  double overall = 0.0;
  for (int j = 1; j < K; ++j) {
    for (int i = 0; i < j; ++i) {
      const double cand = best[i] + (v[j] - v[i]).squaredNorm();
      best[j] = std::max(best[j], cand);
    }
    overall = std::max(overall, best[j]);
  }
  return std::sqrt(v[0].squaredNorm() + overall);
}

double v2_norm_bruteforce(const StepFunction& u) {
  const int K = static_cast<int>(u.values.size());
  if (K > 20) throw std::invalid_argument("v2_norm_bruteforce: too many jumps");
  double overall = 0.0;
  for (unsigned long mask = 0; mask < (1ul << K); ++mask) {
    double sum = 0;
    int prev = -1;
    for (int i = 0; i < K; ++i) {
      if (!(mask & (1ul << i))) continue;
      if (prev >= 0) sum += (u.values[i] - u.values[prev]).squaredNorm();
      prev = i;
    }
    overall = std::max(overall, sum);
  }
  return std::sqrt(u.values[0].squaredNorm() + overall);
}

UqDecomposition uq_decompose(const StepFunction& u, double q, double eps_stop, int j_max) {
  if (!(q > 2)) throw std::invalid_argument("uq_decompose: q > 2 required");
  const int K = static_cast<int>(u.values.size());
  UqDecomposition out;
  out.q = static_cast<int>(q);
  out.bound = 0;

  std::vector<VectorXcd> residual = u.values;  // u_j sampled on u's jump grid
  std::vector<int> cuts{0};                    // current partition I_j as start indices
  auto sup = [&](const std::vector<VectorXcd>& w) {
    double s = 0;
    for (const auto& v : w) s = std::max(s, v.norm());
    return s;
  };

  int level = 0;
  while (sup(residual) > eps_stop) {
    if (++level > j_max) throw std::runtime_error("uq_decompose: no convergence within j_max levels");
    const double threshold = std::ldexp(1.0, -level);  // 2^{-j-1} with j = level-1
    // refine each interval at the first index where the running jump of the
    // residual reaches the threshold
    std::vector<int> new_cuts;
    for (size_t c = 0; c < cuts.size(); ++c) {
      const int a = cuts[c];
      const int b = c + 1 < cuts.size() ? cuts[c + 1] : K;
      int anchor = a;
      new_cuts.push_back(a);
      for (int i = a + 1; i < b; ++i) {
        if ((residual[i] - residual[anchor]).norm() >= threshold) {
          anchor = i;
          new_cuts.push_back(i);
        }
      }
    }
    // v_{level} snapshots the residual at the anchors
    std::vector<VectorXcd> vpart(K);
    for (size_t c = 0; c < new_cuts.size(); ++c) {
      const int a = new_cuts[c];
      const int b = c + 1 < new_cuts.size() ? new_cuts[c + 1] : K;
      for (int i = a; i < b; ++i) vpart[i] = residual[new_cuts[c]];
    }
    double coeff_q = 0;
    std::vector<VectorXcd> step_values;
    VectorXd step_times(new_cuts.size());
    for (size_t c = 0; c < new_cuts.size(); ++c) {
      step_times[static_cast<int>(c)] = u.times[new_cuts[c]];
      step_values.push_back(residual[new_cuts[c]]);
      coeff_q += std::pow(residual[new_cuts[c]].norm(), q);
    }
    const double coeff = std::pow(coeff_q, 1.0 / q);
    UqLevel lvl;
    lvl.part = StepFunction(step_times, step_values);
    lvl.coefficient = coeff;
    lvl.intervals = static_cast<int>(new_cuts.size());
    lvl.threshold = threshold;
    out.levels.push_back(std::move(lvl));
    out.bound += coeff;
    for (int i = 0; i < K; ++i) residual[i] -= vpart[i];
    cuts = std::move(new_cuts);
  }
  out.reconstruction_error = sup(residual);
  return out;
}

}  // namespace displab
