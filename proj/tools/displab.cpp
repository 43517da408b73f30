// displab: configuration-driven numerical experiments for dispersive
// estimates of pseudodifferential evolutions.
//
//   displab list
//   displab run <config.json> [--seed N] [--workers N] [--out DIR]
//
// Exit codes: 0 all gates pass, 1 a numerical gate failed, 2 usage or
// schema error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <cstdio>
#include <random>

#include "displab/assumptions.hpp"
#include "displab/csv.hpp"
#include "displab/estimates.hpp"
#include "displab/hilbert.hpp"
#include "displab/parametrix.hpp"
#include "displab/series.hpp"
#include "displab/stepfun.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace displab;

namespace {

struct RunContext {
  fs::path out_dir;
  unsigned seed = 1;
  int workers = 0;
  std::vector<std::string> failures;

  void gate(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void save(const std::string& name, const CsvWriter& csv) const { csv.save((out_dir / name).string()); }
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& where) {
  for (const auto& k : required)
    if (!obj.contains(k)) throw SchemaError(where + ": missing required key '" + k + "'");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& k = it.key();
    if (std::find(required.begin(), required.end(), k) == required.end() &&
        std::find(optional.begin(), optional.end(), k) == optional.end())
      throw SchemaError(where + ": unknown key '" + k + "'");
  }
}

double num(const json& p, const std::string& key, double dflt) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_number()) throw SchemaError("key '" + key + "' must be a number");
  return p[key].get<double>();
}

std::vector<double> num_list(const json& p, const std::string& key, std::vector<double> dflt = {}) {
  if (!p.contains(key)) {
    if (dflt.empty()) throw SchemaError("missing list '" + key + "'");
    return dflt;
  }
  if (!p[key].is_array() || p[key].empty()) throw SchemaError("key '" + key + "' must be a nonempty array");
  std::vector<double> v;
  for (const auto& e : p[key]) {
    if (!e.is_number()) throw SchemaError("key '" + key + "' must hold numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

Symbol symbol_from_json(const json& p) {
  if (!p.contains("symbol") || !p["symbol"].is_object()) throw SchemaError("params.symbol object required");
  const json& s = p["symbol"];
  require_keys(s, {"name"}, {"lambda", "dim", "scale", "eps", "c", "flat", "k_order"}, "symbol");
  std::map<std::string, double> m;
  for (auto it = s.begin(); it != s.end(); ++it)
    if (it.key() != "name") m[it.key()] = it.value().get<double>();
  return make_symbol(s["name"].get<std::string>(), m);
}

// ---------------------------------------------------------------- flow ----

void run_flow(const json& p, RunContext& ctx) {
  require_keys(p, {"symbol", "start_x", "start_xi"},
               {"s", "t", "steps", "checkpoints", "max_symplectic_defect", "max_fd_defect"}, "flow");
  Symbol sym = symbol_from_json(p);
  const auto sx = num_list(p, "start_x"), sxi = num_list(p, "start_xi");
  if (static_cast<int>(sx.size()) != sym.dim() || static_cast<int>(sxi.size()) != sym.dim())
    throw SchemaError("flow: start point dimension mismatch");
  VectorXd x(sym.dim()), xi(sym.dim());
  for (int i = 0; i < sym.dim(); ++i) {
    x[i] = sx[i];
    xi[i] = sxi[i];
  }
  const double s = num(p, "s", 0.0), t = num(p, "t", 1.0);
  const int steps = static_cast<int>(num(p, "steps", 4096));
  const int checkpoints = static_cast<int>(num(p, "checkpoints", 9));

  CsvWriter csv({"t_time", "x", "xi", "psi", "units"});
  PhasePoint start(s, x, xi);
  for (int c = 1; c <= checkpoints; ++c) {
    const double tc = s + (t - s) * c / checkpoints;
    FlowState st = integrate_flow(sym, start, s, tc, std::max(1, steps * c / checkpoints));
    std::ostringstream xs, xis;
    xs.precision(17);
    xis.precision(17);
    for (int i = 0; i < sym.dim(); ++i) {
      xs << (i ? ";" : "") << st.x[i];
      xis << (i ? ";" : "") << st.xi[i];
    }
    csv.row(tc, xs.str(), xis.str(), st.psi, "phase_space");
  }
  ctx.save("results.csv", csv);

  JacobianCheck jc = flow_jacobian_check(sym, start, s, t, steps);
  CsvWriter fit({"symplectic_defect", "fd_defect", "units"});
  fit.row(jc.symplectic_defect, jc.fd_defect, "operator_norm");
  ctx.save("fit.csv", fit);
  ctx.gate(jc.symplectic_defect <= num(p, "max_symplectic_defect", 1e-6),
           "symplectic defect " + std::to_string(jc.symplectic_defect));
  ctx.gate(jc.fd_defect <= num(p, "max_fd_defect", 1e-4), "finite-difference defect");
}

// --------------------------------------------------------- fbi-selftest ----

void run_fbi_selftest(const json& p, RunContext& ctx) {
  require_keys(p, {}, {"grid_n", "grid_length", "x_halfwidth", "xi_max", "dx", "dxi", "samples", "band"},
               "fbi-selftest");
  const int n = static_cast<int>(num(p, "grid_n", 256));
  const double L = num(p, "grid_length", 16.0);
  GridSpec g = GridSpec::line(n, L);
  WavePacketFrame frame = WavePacketFrame::make(num(p, "x_halfwidth", 8.0), num(p, "xi_max", 20.0),
                                                num(p, "dx", 0.5), num(p, "dxi", M_PI / 4));
  const int samples = static_cast<int>(num(p, "samples", 20));
  const double band = num(p, "band", 12.0);

  CsvWriter csv({"sample", "plancherel_ratio", "tstar_t_error", "units"});
  double worst_pl_lo = 1e9, worst_pl_hi = 0, worst_tt = 0;
  std::mt19937_64 rng(ctx.seed);
  for (int sidx = 0; sidx < samples; ++sidx) {
    std::normal_distribution<double> N(0.0, 1.0);
    VectorXcd hat = VectorXcd::Zero(g.size());
    for (int i = 0; i < g.n[0]; ++i)
      if (std::abs(g.wavenumber(0, i)) <= band) hat[i] = Complex(N(rng), N(rng));
    GridFunction f(g);
    fft_inverse(g, hat, f.values);
    for (int i = 0; i < g.n[0]; ++i) {
      const double x = g.coord(0, i);
      f.values[i] *= std::exp(-x * x / 2.5);
    }
    f.values /= f.norm2();
    FbiResult r = fbi_forward(f, frame);
    const double pl = std::pow(r.coeffs.norm() / f.norm2(), 2);
    const double tt = (fbi_adjoint(r.coeffs, g).values - f.values).norm() / f.values.norm();
    csv.row(sidx, pl, tt, "dimensionless");
    worst_pl_lo = std::min(worst_pl_lo, pl);
    worst_pl_hi = std::max(worst_pl_hi, pl);
    worst_tt = std::max(worst_tt, tt);
  }
  ctx.save("results.csv", csv);
  CsvWriter fit({"plancherel_min", "plancherel_max", "tstar_t_max", "units"});
  fit.row(worst_pl_lo, worst_pl_hi, worst_tt, "dimensionless");
  ctx.save("fit.csv", fit);
  ctx.gate(worst_pl_lo >= 0.999 && worst_pl_hi <= 1.001, "plancherel ratio outside [0.999, 1.001]");
  ctx.gate(worst_tt <= 1e-3, "T*T error above 1e-3");
}

// ------------------------------------------------------------- propagate ----

void run_propagate(const json& p, RunContext& ctx) {
  require_keys(p, {},
               {"symbol", "lambda", "t", "grid_n", "grid_length", "x_halfwidth", "xi_max", "flow_steps",
                "data_center", "data_width", "max_distance"},
               "propagate");
  const double lambda = num(p, "lambda", 16.0);
  Symbol sym = p.contains("symbol") ? symbol_from_json(p)
                                    : make_symbol("schrodinger", {{"dim", 1}, {"lambda", lambda}});
  const double t = num(p, "t", 0.25);
  GridSpec g = GridSpec::line(static_cast<int>(num(p, "grid_n", 1024)), num(p, "grid_length", 32.0));
  WavePacketFrame frame =
      WavePacketFrame::make(num(p, "x_halfwidth", 14.0), num(p, "xi_max", 1.5 * lambda + 10.0));
  GridFunction u0(g);
  const double x0 = num(p, "data_center", -2.0), w = num(p, "data_width", 1.0);
  for (int i = 0; i < g.n[0]; ++i) {
    const double x = g.coord(0, i);
    u0.values[i] = std::polar(std::exp(-0.5 * (x - x0) * (x - x0) / (w * w)), lambda * (x - x0));
  }
  u0.values /= u0.norm2();
  ParametrixConfig cfg{sym, frame, 0.0, t, static_cast<int>(num(p, "flow_steps", 128))};
  ParametrixApply r = apply_parametrix(cfg, u0);
  RefPropResult ref = reference_propagator(sym, 0.0, t, u0);
  const double dist = (r.u.values - ref.u.values).norm() * std::sqrt(g.cell());
  CsvWriter csv({"lambda", "t_time", "l2_distance", "k_norm_ratio", "leaked_mass", "units"});
  csv.row(lambda, t, dist, r.u.norm2() / u0.norm2(), r.leaked_mass, "l2_normalized");
  ctx.save("results.csv", csv);
  ctx.gate(dist <= num(p, "max_distance", 0.15), "parametrix-to-reference distance " + std::to_string(dist));
}

// ------------------------------------------------------------ decay-scan ----

void run_decay_scan(const json& p, RunContext& ctx) {
  require_keys(p, {"model", "lambdas", "times"},
               {"grid_n", "grid_length", "probes", "min_lambda_t", "t_exponent", "t_tol", "lambda_exponent", "lambda_tol"},
               "decay-scan");
  const std::string model = p["model"].get<std::string>();
  DecayScanConfig cfg;
  cfg.lambdas = num_list(p, "lambdas");
  cfg.times = num_list(p, "times");
  cfg.probes = static_cast<int>(num(p, "probes", 9));
  cfg.min_lambda_t = num(p, "min_lambda_t", 1.0);
  if (model == "schrodinger_1d") {
    cfg.symbol_factory = [](double lambda) {
      return make_symbol("schrodinger", {{"dim", 1}, {"lambda", lambda}, {"scale", 1.0 / lambda}, {"k_order", 1}});
    };
    cfg.grid_n = static_cast<int>(num(p, "grid_n", 2048));
    cfg.grid_length = num(p, "grid_length", 48.0);
    cfg.annulus_cutoff = false;
  } else if (model == "half_wave_2d") {
    cfg.symbol_factory = [](double lambda) {
      return make_symbol("half_wave", {{"dim", 2}, {"lambda", lambda}, {"k_order", 1}});
    };
    cfg.grid_n = static_cast<int>(num(p, "grid_n", 256));
    cfg.grid_length = num(p, "grid_length", 12.0);
    cfg.annulus_cutoff = true;
  } else {
    throw SchemaError("decay-scan: model must be schrodinger_1d or half_wave_2d");
  }
  DecayScanResult r = fixed_time_decay_scan(cfg);
  CsvWriter csv({"lambda", "t_time", "sup_ratio", "units"});
  CsvWriter plot({"log_t", "log_sup", "units"});
  for (const auto& row : r.rows) {
    csv.row(row.lambda, row.t, row.sup_ratio, "l1_to_linf");
    plot.row(std::log(row.t), std::log(row.sup_ratio), "log");
  }
  ctx.save("results.csv", csv);
  ctx.save("plot_t.dat", plot);
  CsvWriter fit({"t_exponent", "lambda_exponent", "residual", "fit_valid", "units"});
  fit.row(r.t_exponent, r.lambda_exponent, r.fit_residual, r.fit_valid ? 1 : 0, "log_log_slope");
  ctx.save("fit.csv", fit);
  ctx.gate(r.fit_valid, "flatness detector rejected the fit");
  if (p.contains("t_exponent"))
    ctx.gate(std::abs(r.t_exponent - num(p, "t_exponent", 0)) <= num(p, "t_tol", 0.05),
             "t-exponent " + std::to_string(r.t_exponent));
  if (p.contains("lambda_exponent"))
    ctx.gate(std::abs(r.lambda_exponent - num(p, "lambda_exponent", 0)) <= num(p, "lambda_tol", 0.15),
             "lambda-exponent " + std::to_string(r.lambda_exponent));
}

// -------------------------------------------------------- strichartz-scan ----

void run_strichartz_scan(const json& p, RunContext& ctx) {
  require_keys(p, {"model", "lambdas", "q", "r", "n", "k"},
               {"normalization", "grid_n", "grid_length", "time_samples", "samples", "max_factor", "t_max"},
               "strichartz-scan");
  StrichartzScanConfig cfg;
  const std::string model = p["model"].get<std::string>();
  if (model == "schrodinger_1d")
    cfg.model = EvolutionModel::Schrodinger1d;
  else if (model == "half_wave_2d")
    cfg.model = EvolutionModel::HalfWave2d;
  else
    throw SchemaError("strichartz-scan: unknown model");
  const std::string norm = p.value("normalization", "physical");
  cfg.normalization = norm == "paper" ? ScanNormalization::Paper : ScanNormalization::Physical;
  cfg.grid_n = static_cast<int>(num(p, "grid_n", cfg.model == EvolutionModel::HalfWave2d ? 256 : 512));
  cfg.grid_length = num(p, "grid_length", cfg.model == EvolutionModel::HalfWave2d ? 12.0 : 24.0);
  cfg.time_samples = static_cast<int>(num(p, "time_samples", 17));
  cfg.n_samples = static_cast<int>(num(p, "samples", 8));
  cfg.seed = ctx.seed;
  StrichartzPair pair(num(p, "q", 6), num(p, "r", 6), static_cast<int>(num(p, "n", 3)),
                      static_cast<int>(num(p, "k", 1)));
  CsvWriter csv({"lambda", "constant", "rho", "normalization", "units"});
  double lo = 1e300, hi = 0;
  for (double lambda : num_list(p, "lambdas")) {
    // physical schrodinger window tracks the group transit of the unit cutoff
    cfg.t_max = p.contains("t_max") ? num(p, "t_max", 1.0)
                                    : (cfg.model == EvolutionModel::Schrodinger1d &&
                                               cfg.normalization == ScanNormalization::Physical
                                           ? 2.0 / lambda
                                           : 1.0);
    const double c = strichartz_constant(pair, lambda, cfg);
    csv.row(lambda, c, pair.rho, norm, "mixed_norm_ratio");
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  ctx.save("results.csv", csv);
  ctx.gate(hi / lo <= num(p, "max_factor", 3.0), "constant varies by factor " + std::to_string(hi / lo));
}

// --------------------------------------------------------- helmholtz-scan ----

ResolventVariant variant_from_string(const std::string& v) {
  if (v == "helmholtz") return ResolventVariant::Helmholtz;
  if (v == "helmholtz_iQ") return ResolventVariant::HelmholtzIQ;
  if (v == "helmholtz_drift") return ResolventVariant::HelmholtzDrift;
  if (v == "helmholtz_delta_drift") return ResolventVariant::HelmholtzDeltaDrift;
  throw SchemaError("unknown variant '" + v + "'");
}

void run_helmholtz_scan(const json& p, RunContext& ctx) {
  require_keys(p, {"variant"},
               {"n", "lambdas", "deltas", "grid_n", "samples", "fixed_lambda", "exponent", "tol",
                "witness_exponent", "witness_tol"},
               "helmholtz-scan");
  const ResolventVariant variant = variant_from_string(p["variant"].get<std::string>());
  ResolventScanConfig cfg;
  cfg.grid_n = static_cast<int>(num(p, "grid_n", 512));
  cfg.n_samples = static_cast<int>(num(p, "samples", 64));
  cfg.seed = ctx.seed;
  cfg.workers = ctx.workers;
  cfg.fixed_lambda = num(p, "fixed_lambda", 64.0);
  const int n = static_cast<int>(num(p, "n", 2));
  std::vector<double> lambdas = num_list(p, "lambdas", {16.0, 32.0, 64.0, 128.0});
  std::vector<double> deltas = p.contains("deltas") ? num_list(p, "deltas") : std::vector<double>{};
  ScanResult r = resolvent_ratio_scan(n, variant, lambdas, deltas, cfg);
  CsvWriter csv({"variant", "n", "lambda", "delta", "max_ratio", "witness_ratio", "units"});
  CsvWriter plot({"log_param", "log_max_ratio", "units"});
  const bool dscan = variant == ResolventVariant::HelmholtzDeltaDrift && !deltas.empty();
  for (size_t i = 0; i < r.param.size(); ++i) {
    csv.row(p["variant"].get<std::string>(), n, dscan ? cfg.fixed_lambda : r.param[i],
            dscan ? r.param[i] : 1.0, r.max_ratio[i], r.witness_ratio[i], "lq_ratio");
    plot.row(std::log(r.param[i]), std::log(r.max_ratio[i]), "log");
  }
  ctx.save("results.csv", csv);
  ctx.save("plot_param.dat", plot);
  CsvWriter fit({"fitted_slope", "residual", "witness_slope", "witness_residual", "units"});
  fit.row(r.fit.slope, r.fit.residual, r.witness_fit.slope, r.witness_fit.residual, "log_log_slope");
  ctx.save("fit.csv", fit);
  if (p.contains("exponent"))
    ctx.gate(std::abs(r.fit.slope - num(p, "exponent", 0)) <= num(p, "tol", 0.15),
             "fitted exponent " + std::to_string(r.fit.slope));
  if (p.contains("witness_exponent"))
    ctx.gate(std::abs(r.witness_fit.slope - num(p, "witness_exponent", 0)) <= num(p, "witness_tol", 0.2),
             "witness exponent " + std::to_string(r.witness_fit.slope));
}

// ---------------------------------------------------------------- witness ----

void run_witness(const json& p, RunContext& ctx) {
  require_keys(p, {"variant", "lambdas"}, {"n", "grid_n", "delta", "min_ratio_factor"}, "witness");
  const ResolventVariant variant = variant_from_string(p["variant"].get<std::string>());
  ResolventScanConfig cfg;
  cfg.grid_n = static_cast<int>(num(p, "grid_n", 512));
  const int n = static_cast<int>(num(p, "n", 2));
  const double delta = num(p, "delta", 1.0);
  CsvWriter csv({"lambda", "tube_ratio", "isotropic_ratio", "units"});
  bool tube_wins = true;
  for (double lambda : num_list(p, "lambdas")) {
    const double tube = sharpness_witness(n, variant, lambda, cfg, WitnessKind::Tube, delta);
    const double iso = sharpness_witness(n, variant, lambda, cfg, WitnessKind::Isotropic, delta);
    tube_wins = tube_wins && tube >= iso;
    csv.row(lambda, tube, iso, "lq_ratio");
  }
  ctx.save("results.csv", csv);
  ctx.gate(tube_wins, "isotropic control beat the tube witness");
}

// ----------------------------------------------------------- hilbert-model ----

void run_hilbert_model(const json& p, RunContext& ctx) {
  require_keys(p, {},
               {"m", "seeds", "grid", "coupling", "t", "s", "max_norm", "residual_factor", "spec_radius"},
               "hilbert-model");
  const int m = static_cast<int>(num(p, "m", 16));
  const int seeds = static_cast<int>(num(p, "seeds", 20));
  const int grid = static_cast<int>(num(p, "grid", 257));
  const double coupling = num(p, "coupling", 0.1);
  const double t = num(p, "t", 0.8), s = num(p, "s", 0.25);
  const double R = num(p, "spec_radius", 4.0);
  DyadicCalculus calc(R + 2.0);

  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> N(0.0, 1.0);
  auto samples = [&](int count) {
    std::vector<VectorXcd> v;
    for (int i = 0; i < count; ++i) {
      VectorXcd w(m);
      for (int j = 0; j < m; ++j) w[j] = Complex(N(rng), N(rng));
      v.push_back(w / w.norm());
    }
    return v;
  };

  CsvWriter csv({"seed", "commutator", "bdiff", "h_norm", "hb_norm", "bh_norm", "bhb_norm", "residual",
                 "ort_low", "ort_cross", "ort_lip", "ort_high", "units"});
  bool ok_norms = true, ok_res = true, ok_ort = true;
  const double max_norm = num(p, "max_norm", 10.0);
  for (int sd = 0; sd < seeds; ++sd) {
    OperatorPath path = OperatorPath::random_near_commuting(m, ctx.seed + 100 + sd, coupling, grid, R);
    const auto probes = samples(8);
    const double cc = commutator_constant(path, probes);
    const double bd = bdiff_constant(path, s, t, probes);
    SimpleParametrixNorms nn = simple_parametrix_norms(path, t, s);
    OrthogonalityConstants o1 = almost_orthogonality_constants(path, calc, t, s);
    OrthogonalityConstants o2 = almost_orthogonality_constants(path, calc, s + (t - s) / 2, s);
    csv.row(sd, cc, bd, nn.h_norm, nn.hb_norm, nn.bh_norm, nn.bhb_norm, nn.residual_norm, o1.low_mode,
            o1.cross, o1.lipschitz, o1.high_mode, "operator_norm");
    ok_norms = ok_norms && nn.h_norm <= max_norm && nn.hb_norm <= max_norm && nn.bh_norm <= max_norm &&
               nn.bhb_norm <= max_norm;
    ok_res = ok_res && nn.residual_norm <= num(p, "residual_factor", 10.0) * std::max(bd, 0.1);
    ok_ort = ok_ort && o2.lipschitz <= 2.0 * std::max(o1.lipschitz, 0.05) &&
             o2.high_mode <= 2.0 * std::max(o1.high_mode, 0.05);
  }
  ctx.save("results.csv", csv);
  CsvWriter fit({"partition_defect", "units"});
  fit.row(calc.partition_defect(), "sup_norm");
  ctx.save("fit.csv", fit);
  ctx.gate(calc.partition_defect() <= 1e-10, "dyadic partition defect");
  ctx.gate(ok_norms, "a (ks)-normalized parametrix norm exceeded the bound");
  ctx.gate(ok_res, "residual norm exceeded the bdiff budget");
  ctx.gate(ok_ort, "almost-orthogonality constants unstable under |t-s| halving");
}

// ----------------------------------------------------------- vp-decompose ----

void run_vp_decompose(const json& p, RunContext& ctx) {
  require_keys(p, {}, {"count", "m", "jumps", "q"}, "vp-decompose");
  const int count = static_cast<int>(num(p, "count", 1000));
  const int m = static_cast<int>(num(p, "m", 8));
  const int jumps = static_cast<int>(num(p, "jumps", 64));
  const double q = num(p, "q", 4.0);

  std::mt19937_64 rng(ctx.seed);
  std::uniform_int_distribution<int> K(1, jumps), M(1, m);
  bool ok_rec = true, ok_audit = true;
  double worst_ratio = 0;
  for (int c = 0; c < count; ++c) {
    StepFunction u = StepFunction::random(M(rng), K(rng), ctx.seed + 10 + c);
    const double nv2 = v2_norm(u);
    UqDecomposition dec = uq_decompose(u, q);
    ok_rec = ok_rec && dec.reconstruction_error <= 1e-10;
    int prev = 1;
    for (const auto& lvl : dec.levels) {
      ok_audit = ok_audit && lvl.intervals - prev <= 4.0 / (lvl.threshold * lvl.threshold) * nv2 * nv2 + 1e-9;
      prev = lvl.intervals;
    }
    worst_ratio = std::max(worst_ratio, dec.bound / nv2);
  }
  // atom table for one representative case
  StepFunction rep = StepFunction::random(m, jumps, ctx.seed + 1);
  UqDecomposition dec = uq_decompose(rep, q);
  CsvWriter csv({"level", "interval_start", "interval_end", "vector_norm", "units"});
  for (size_t l = 0; l < dec.levels.size(); ++l) {
    const StepFunction& part = dec.levels[l].part;
    for (int k = 0; k < static_cast<int>(part.values.size()); ++k) {
      const double t0 = part.times[k];
      const double t1 = k + 1 < static_cast<int>(part.values.size()) ? part.times[k + 1] : 1.0;
      csv.row(l + 1, t0, t1, part.values[k].norm() / std::max(dec.levels[l].coefficient, 1e-300), "atom_step");
    }
  }
  ctx.save("results.csv", csv);
  const double budget = 4.0 / (std::sqrt(2.0) - 1.0);
  CsvWriter fit({"embedding_ratio_max", "budget", "units"});
  fit.row(worst_ratio, budget, "uq_over_v2");
  ctx.save("fit.csv", fit);
  ctx.gate(ok_rec, "reconstruction error above 1e-10");
  ctx.gate(ok_audit, "level-count audit failed");
  ctx.gate(worst_ratio <= budget, "embedding constant above the budget");
}

// ---------------------------------------------------------- canonical-form ----

void run_canonical_form(const json& p, RunContext& ctx) {
  require_keys(p, {}, {"order", "count", "max_residual"}, "canonical-form");
  const int N = static_cast<int>(num(p, "order", 6));
  const int count = static_cast<int>(num(p, "count", 100));
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0;
  SsnSeries<Complex> last{TruncatedSeries2<Complex>(0), {}};
  for (int c = 0; c < count; ++c) {
    std::vector<Complex> q(N + 2);
    for (auto& v : q) {
      do {
        v = Complex(U(rng), U(rng));
      } while (std::abs(v) > 1.0);
    }
    // quantitative version of the 1 + i q_1 != 0 hypothesis; without it the
    // exact identity drowns in roundoff amplified by (1+i q_1)^{-N}
    while (std::abs(Complex(1, 0) + Complex(0, 1) * q[1]) < 0.65) q[1] = Complex(U(rng), U(rng));
    q[0] = 0.0;
    auto ssn = ssn_recursion(q, N);
    worst = std::max(worst, residual_order(ssn, q, N, [](const Complex& z) { return std::abs(z); }));
    if (c + 1 == count) last = ssn;
  }
  CsvWriter csv({"k", "l", "coefficient_re", "coefficient_im", "units"});
  last.e.for_each([&](int k, int l, const Complex& v) { csv.row(k, l, v.real(), v.imag(), "e_series"); });
  for (int l = 1; l <= N; ++l) csv.row(0, l, last.c[l].real(), last.c[l].imag(), "remainder_series");
  ctx.save("results.csv", csv);
  CsvWriter fit({"max_residual", "cases", "units"});
  fit.row(worst, count, "coefficient_sup");
  ctx.save("fit.csv", fit);
  char msg[64];
  std::snprintf(msg, sizeof msg, "series residual %.3e", worst);
  ctx.gate(worst <= num(p, "max_residual", 1e-12), msg);
}

// ----------------------------------------------------------------- registry ----

struct Experiment {
  std::string required;
  std::string target;
  void (*fn)(const json&, RunContext&);
};

const std::vector<std::pair<std::string, Experiment>>& registry() {
  static const std::vector<std::pair<std::string, Experiment>> reg = {
      {"flow", {"symbol,start_x,start_xi", "Hamilton flow transport, action phase and symplectic structure", run_flow}},
      {"fbi-selftest", {"(defaults)", "wave-packet transform isometry and inversion fidelity", run_fbi_selftest}},
      {"propagate", {"(defaults)", "wave-packet parametrix against the spectral reference propagator", run_propagate}},
      {"decay-scan", {"model,lambdas,times", "fixed-time L1->Linf dispersive decay exponents", run_decay_scan}},
      {"strichartz-scan", {"model,lambdas,q,r,n,k", "mixed-norm space-time constants across frequency", run_strichartz_scan}},
      {"helmholtz-scan", {"variant", "constant-coefficient resolvent inequality scaling", run_helmholtz_scan}},
      {"witness", {"variant,lambdas", "tube wave-packet lower-bound certificates", run_witness}},
      {"hilbert-model", {"(defaults)", "matrix-model parametrix norms, residuals and dyadic calculus", run_hilbert_model}},
      {"vp-decompose", {"(defaults)", "2-variation norms and greedy atomic decompositions", run_vp_decompose}},
      {"canonical-form", {"(defaults)", "elliptic normalization series recursion residuals", run_canonical_form}},
  };
  return reg;
}

int do_list() {
  std::cout << "experiment,required_keys,target\n";
  for (const auto& [name, exp] : registry())
    std::cout << name << ",\"" << exp.required << "\",\"" << exp.target << "\"\n";
  return 0;
}

int do_run(const std::string& config_path, int seed_override, int workers, const std::string& out_override) {
  json cfg;
  {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return 2;
    }
    try {
      cfg = json::parse(f);
    } catch (const std::exception& e) {
      std::cerr << "error: config parse failure: " << e.what() << "\n";
      return 2;
    }
  }
  try {
    require_keys(cfg, {"experiment"}, {"seed", "out", "params", "schema_version"}, "config");
    if (cfg.contains("schema_version") && cfg["schema_version"].get<int>() != 1)
      throw SchemaError("unsupported schema_version");
    const std::string name = cfg["experiment"].get<std::string>();
    const Experiment* exp = nullptr;
    for (const auto& [n, e] : registry())
      if (n == name) exp = &e;
    if (!exp) throw SchemaError("unknown experiment '" + name + "'");

    RunContext ctx;
    ctx.seed = seed_override >= 0 ? static_cast<unsigned>(seed_override)
                                  : static_cast<unsigned>(cfg.value("seed", 1));
    ctx.workers = workers;
    std::string out_root = out_override;
    if (out_root.empty() && cfg.contains("out")) out_root = cfg["out"].get<std::string>();
    if (out_root.empty()) {
      const char* env = std::getenv("DISPLAB_OUT");
      out_root = env ? env : "displab_out";
    }
    ctx.out_dir = fs::path(out_root) / name;
    fs::create_directories(ctx.out_dir);

    const json params = cfg.value("params", json::object());
    {
      json resolved = cfg;
      resolved["seed"] = ctx.seed;
      resolved["out"] = out_root;
      resolved["params"] = params;
      std::ofstream rf(ctx.out_dir / "resolved_config.json");
      rf << resolved.dump(2) << "\n";
    }
    try {
      exp->fn(params, ctx);
    } catch (const SchemaError&) {
      std::error_code ec;
      fs::remove(ctx.out_dir / "resolved_config.json", ec);
      fs::remove(ctx.out_dir, ec);  // removed only if empty
      throw;
    }
    if (!ctx.failures.empty()) {
      std::cerr << "numerical gates failed:\n";
      for (const auto& f : ctx.failures) std::cerr << "  - " << f << "\n";
      return 1;
    }
    std::cout << "ok: " << name << " -> " << ctx.out_dir.string() << "\n";
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"displab: numerical laboratory for dispersive estimates"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "print the experiment registry");

  std::string config_path, out_dir;
  int seed = -1, workers = 0;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  run->add_option("--out", out_dir, "output root directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (list->parsed()) return do_list();
  return do_run(config_path, seed, workers, out_dir);
}
