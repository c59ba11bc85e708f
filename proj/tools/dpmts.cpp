// dpmts: fit and query nonparametric mixture transition models from the shell.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpmts/errors.hpp"
#include "dpmts/inference.hpp"
#include "dpmts/io.hpp"
#include "dpmts/priors.hpp"
#include "dpmts/sampler.hpp"
#include "dpmts/simulate.hpp"
#include "dpmts/stationary.hpp"
#include "dpmts/tar.hpp"

using namespace dpmts;

namespace {

fs::path default_out_dir() {
  const char* env = std::getenv("DPMTS_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string kind;
  std::size_t n = 500;
  std::uint64_t seed = 1;
  double z1 = 0.0;
  std::string draws;
  long draw = -1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  std::vector<double> series;
  nlohmann::json meta = {{"kind", a.kind}, {"n", a.n}, {"seed", a.seed}};
  if (a.kind == "brownian") {
    series = simulate_brownian(a.n, a.seed);
  } else if (a.kind == "skewnormal") {
    series = simulate_skew_normal_series(a.n, a.z1, a.seed);
    meta["z1"] = a.z1;
  } else {
    if (a.draws.empty()) throw ValidationError("simulate model needs --draws");
    const auto stored = read_draws(a.draws);
    if (stored.model() == "tar") throw ValidationError("simulate model needs mixture draws, not tar");
    const auto& states = stored.mixture.draws;
    const std::size_t idx = a.draw < 0 ? states.size() - 1 : static_cast<std::size_t>(a.draw);
    if (idx >= states.size()) throw ValidationError("--draw out of range (file has " + std::to_string(states.size()) + " draws)");
    series = simulate_from_model(states[idx], a.z1, a.n, a.seed);
    meta["z1"] = a.z1;
    meta["draws"] = a.draws;
    meta["draw"] = idx;
  }
  const fs::path out = a.out.empty() ? default_out_dir() / (a.kind + ".txt") : fs::path(a.out);
  write_series(out, series);
  write_text(fs::path(out.string() + ".meta.json"), meta.dump(2) + "\n");
  std::cout << "wrote " << series.size() << " values to " << out.string() << "\n";
  return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string config;
  std::string data, column, model, paper_defaults, out_dir, resume, save_config;
  std::optional<std::size_t> iterations, burn_in, thin, truncation, chains;
  std::optional<std::uint64_t> seed;
  std::optional<double> center, range;
  bool no_adapt = false;
  bool quiet = false;
};

void apply_paper_defaults(RunConfig& c, const std::string& experiment) {
  if (experiment != "oldfaithful" && experiment != "brownian" && experiment != "skewnormal")
    throw ValidationError("--paper-defaults must be oldfaithful, brownian or skewnormal");
  c.truncation = 30;
  c.settings.n_iterations = 110000;
  c.settings.burn_in = 10000;
  c.settings.thin = 20;
  c.shapes = PriorShapes{};
  c.priors.reset();
  if (experiment == "oldfaithful" && c.column.empty()) c.column = "waiting";
}

RunConfig resolve_fit_config(const FitArgs& a) {
  RunConfig c = a.config.empty() ? RunConfig{} : read_run_config(a.config);
  if (!a.paper_defaults.empty()) apply_paper_defaults(c, a.paper_defaults);
  if (!a.data.empty()) c.data = a.data;
  if (!a.column.empty()) c.column = a.column;
  if (!a.model.empty()) c.model = a.model;
  if (!a.out_dir.empty()) c.output_dir = a.out_dir;
  if (a.iterations) c.settings.n_iterations = *a.iterations;
  if (a.burn_in) c.settings.burn_in = *a.burn_in;
  if (a.thin) c.settings.thin = *a.thin;
  if (a.seed) c.settings.seed = *a.seed;
  if (a.truncation) {
    c.truncation = *a.truncation;
    if (c.priors) c.priors->truncation = *a.truncation;
  }
  if (a.chains) c.chains = *a.chains;
  if (a.center) c.center = a.center;
  if (a.range) c.range = a.range;
  if (a.no_adapt) c.settings.adapt = false;
  if (c.output_dir.empty()) c.output_dir = default_out_dir().string();
  return c;
}

HyperpriorConfig mixture_priors(const RunConfig& c, const std::vector<double>& series) {
  if (c.priors) return *c.priors;
  DataProxy proxy = proxy_from_series(series);
  if (c.center) proxy.center = *c.center;
  if (c.range) proxy.range = *c.range;
  return default_priors(proxy, c.shapes, c.truncation);
}

std::string chain_suffix(std::size_t chain, std::size_t chains) {
  return chains > 1 ? ".chain" + std::to_string(chain + 1) : "";
}

template <class Sampler>
void finish_mixture(Sampler& sampler, const fs::path& dir, const std::string& suffix, bool quiet) {
  sampler.run();
  write_draws(dir / ("draws" + suffix + ".txt"), sampler.draws());
  write_checkpoint(dir / ("checkpoint" + suffix + ".json"), sampler.checkpoint());
  write_trace(dir / ("trace" + suffix + ".log"), sampler.trace());
  if (!quiet) {
    std::size_t max_occ = 0;
    for (const auto& r : sampler.trace()) max_occ = std::max(max_occ, r.occupied);
    std::cerr << "chain" << suffix << ": " << sampler.draws().draws.size() << " draws, max occupied "
              << max_occ << " of " << sampler.draws().meta.truncation << ", slice violations "
              << sampler.slice_stats().violations << "\n";
    if (max_occ >= sampler.draws().meta.truncation)
      std::cerr << "warning: occupied components reached the truncation level; increase --truncation\n";
  }
}

int cmd_fit(const FitArgs& a) {
  if (!a.resume.empty()) {
    const auto cp = read_checkpoint(a.resume);
    const fs::path dir = a.out_dir.empty() ? fs::path(a.resume).parent_path() : fs::path(a.out_dir);
    SamplerSettings settings = cp.settings;
    if (a.iterations) {
      if (*a.iterations < cp.chain.iteration)
        throw ValidationError("--iterations is below the checkpoint's iteration count");
      settings.n_iterations = *a.iterations;
    }
    Checkpoint c = cp;
    c.settings = settings;
    if (cp.model == "general") {
      auto s = GeneralSampler::resume(c);
      finish_mixture(s, dir, "", a.quiet);
    } else if (cp.model == "stationary") {
      auto s = StationarySampler::resume(c);
      finish_mixture(s, dir, "", a.quiet);
    } else {
      throw ValidationError("cannot resume model '" + cp.model + "'");
    }
    return 0;
  }

  const RunConfig c = resolve_fit_config(a);
  c.validate();
  const auto series = read_series(c.data, c.column);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_text(dir / "config.json", to_json_text(c));
  if (!a.save_config.empty()) write_text(a.save_config, to_json_text(c));

  if (c.model == "tar") {
    const TarPriors priors = c.tar_priors ? *c.tar_priors : tar_default_priors(series);
    for (std::size_t k = 0; k < c.chains; ++k) {
      SamplerSettings s = c.settings;
      if (k > 0) s.seed = derive_seed(c.settings.seed, k);
      const auto fit = fit_tar(series, priors, s);
      write_draws(dir / ("draws" + chain_suffix(k, c.chains) + ".txt"), fit);
      if (!a.quiet)
        std::cerr << "chain" << chain_suffix(k, c.chains) << ": " << fit.draws.size()
                  << " draws, threshold acceptance " << num(fit.threshold_acceptance) << "\n";
    }
    return 0;
  }

  const HyperpriorConfig priors = mixture_priors(c, series);
  priors.validate();
  std::vector<std::string> errors(c.chains);
  const auto chains = static_cast<std::ptrdiff_t>(c.chains);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < chains; ++k) {
    try {
      SamplerSettings s = c.settings;
      if (k > 0) s.seed = derive_seed(c.settings.seed, static_cast<std::uint64_t>(k));
      const auto suffix = chain_suffix(static_cast<std::size_t>(k), c.chains);
      if (c.model == "general") {
        GeneralSampler sampler(series, priors, s);
        finish_mixture(sampler, dir, suffix, a.quiet);
      } else {
        StationarySampler sampler(series, priors, s);
        finish_mixture(sampler, dir, suffix, a.quiet);
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError(e);
  return 0;
}

// ---- predict / ppo / compare ---------------------------------------------

struct DataArgs {
  std::string data, column;
};

std::vector<double> load_matching_series(const DataArgs& d, const StoredDraws& draws, const std::string& name) {
  if (d.data.empty()) throw ValidationError("--data is required");
  const auto series = read_series(d.data, d.column);
  if (series_fingerprint(series) != draws.meta().series_hash || series.size() != draws.meta().n)
    throw ValidationError(name + " was not fitted to " + d.data);
  return series;
}

struct PredictArgs {
  std::string draws, out_dir;
  DataArgs data;
  InferenceRequests req;
  std::uint64_t seed = 1;
};

int cmd_predict(const PredictArgs& a) {
  const auto stored = read_draws(a.draws);
  const auto series = load_matching_series(a.data, stored, a.draws);
  if (a.req.empty()) {
    std::cout << "nothing requested; use --transition-at, --forecast, --expectation or --horizon\n";
    return 0;
  }
  const auto view = stored.view();
  const fs::path dir = a.out_dir.empty() ? default_out_dir() : fs::path(a.out_dir);

  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it, hi = *hi_it, range = hi - lo;
  std::vector<double> grid = default_grid(series, a.req.grid_points);
  if (a.req.grid_lo || a.req.grid_hi)
    grid = linspace(a.req.grid_lo.value_or(grid.front()), a.req.grid_hi.value_or(grid.back()), a.req.grid_points);
  auto check_sane = [&](double z, const char* what) {
    if (z < lo - 2.0 * range || z > hi + 2.0 * range)
      std::cerr << "warning: " << what << " " << num(z) << " is far outside the data range [" << num(lo) << ", "
                << num(hi) << "]\n";
  };

  const std::string tag = "model " + stored.model();
  for (double z : a.req.transition_at) {
    check_sane(z, "z_prev");
    write_grid(dir / ("transition_" + num(z) + ".txt"), transition_grid(*view, z, grid, a.req.level),
               tag + ", transition density at z_prev = " + full(z));
  }
  const double z_n = a.req.z_n.value_or(series.back());
  if (a.req.forecast) {
    check_sane(z_n, "z_n");
    write_grid(dir / "forecast.txt", forecast_density(*view, z_n, grid, a.req.level),
               tag + ", one-step forecast density from z_n = " + full(z_n));
  }
  if (a.req.expectation)
    write_grid(dir / "expectation.txt", expectation_curve(*view, grid, a.req.level),
               tag + ", conditional expectation E(Z_t | Z_{t-1} = z)");
  if (a.req.horizon > 0) {
    const auto ms = multi_step_forecast(*view, z_n, a.req.horizon, a.req.paths_per_draw, grid, a.seed, a.req.level);
    for (std::size_t k = 0; k < ms.horizons.size(); ++k)
      write_grid(dir / ("forecast_h" + std::to_string(k + 1) + ".txt"), ms.horizons[k],
                 tag + ", " + std::to_string(k + 1) + "-step forecast density from z_n = " + full(z_n));
    write_paths(dir / "forecast_paths.txt", ms.paths);
  }
  std::cout << "wrote predictions to " << dir.string() << "\n";
  return 0;
}

std::size_t resolve_t_start(std::optional<std::size_t> t_start, std::optional<std::size_t> last, std::size_t n) {
  if (t_start && last) throw ValidationError("give either --t-start or --last, not both");
  std::size_t t = 0;
  if (t_start) t = *t_start;
  else if (last) {
    if (*last < 1 || *last > n) throw ValidationError("--last must lie in [1, " + std::to_string(n) + "]");
    t = n - *last + 1;
  } else {
    throw ValidationError("give --t-start or --last");
  }
  if (t < 3 || t > n)
    throw ValidationError("t_start must lie in [3, " + std::to_string(n) + "], got " + std::to_string(t));
  return t;
}

struct PpoArgs {
  std::vector<std::string> draws;
  DataArgs data;
  std::optional<std::size_t> t_start, last;
  std::string out;
};

int cmd_ppo(const PpoArgs& a) {
  const auto stored = read_draws(a.draws.front());
  const auto series = load_matching_series(a.data, stored, a.draws.front());
  const std::size_t t = resolve_t_start(a.t_start, a.last, series.size());
  const auto r = ppo(*stored.view(), series, t);
  const fs::path out = a.out.empty() ? default_out_dir() / ("ppo_" + stored.model() + ".txt") : fs::path(a.out);
  write_ppo(out, r, "model " + stored.model());
  std::cout << stored.model() << " log-ordinate sum over t = " << t << ".." << series.size() << ": "
            << full(r.log_sum) << "\n";
  if (!r.all_finite) {
    std::cerr << "warning: non-finite ordinates at t =";
    for (std::size_t i = 0; i < r.t.size(); ++i)
      if (!r.finite[i]) std::cerr << ' ' << r.t[i];
    std::cerr << "\n";
  }
  return 0;
}

int cmd_compare(const PpoArgs& a) {
  if (a.data.data.empty()) throw ValidationError("--data is required");
  const auto series = read_series(a.data.data, a.data.column);
  const std::size_t t = resolve_t_start(a.t_start, a.last, series.size());
  const fs::path dir = a.out.empty() ? default_out_dir() : fs::path(a.out).parent_path();
  struct Row {
    std::string file, model;
    double sum;
    double min_ess;
    bool finite;
  };
  std::vector<Row> rows;
  std::map<std::string, int> seen;
  for (const auto& file : a.draws) {
    const auto stored = read_draws(file);
    load_matching_series(a.data, stored, file);
    const auto r = ppo(*stored.view(), series, t);
    std::string label = stored.model();
    if (seen[label]++) label += "_" + std::to_string(seen[label]);
    write_ppo(dir / ("ppo_" + label + ".txt"), r, "model " + stored.model() + ", draws " + file);
    rows.push_back({file, label, r.log_sum, *std::min_element(r.ess.begin(), r.ess.end()), r.all_finite});
  }
  std::ostringstream rep;
  rep << "# posterior predictive ordinates, t = " << t << ".." << series.size() << " ("
      << series.size() - t + 1 << " values)\n";
  if (rows.size() > 1) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.sum > y.sum; });
    rep << "rank model log_sum min_ess finite draws\n";
  } else {
    rep << "model log_sum min_ess finite draws\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows.size() > 1) rep << i + 1 << ' ';
    rep << rows[i].model << ' ' << full(rows[i].sum) << ' ' << full(rows[i].min_ess) << ' ' << (rows[i].finite ? 1 : 0)
        << ' ' << rows[i].file << '\n';
  }
  const fs::path out = a.out.empty() ? dir / "compare.txt" : fs::path(a.out);
  write_text(out, rep.str());
  std::cout << rep.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian nonparametric mixture models for Markovian time series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a test series");
  s->add_option("kind", sim.kind, "brownian | skewnormal | model")
      ->required()
      ->check(CLI::IsMember({"brownian", "skewnormal", "model"}));
  s->add_option("--n", sim.n, "Series length")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--z1", sim.z1, "Initial value (skewnormal, model)");
  s->add_option("--draws", sim.draws, "Draws file to simulate from (model)");
  s->add_option("--draw", sim.draw, "Draw index (default: last)");
  s->add_option("--out", sim.out, "Output file");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Run the MCMC sampler");
  f->add_option("--config", fit.config, "JSON run configuration");
  f->add_option("--data", fit.data, "Series file");
  f->add_option("--column", fit.column, "Column name for CSV input");
  f->add_option("--model", fit.model, "general | stationary | tar")
      ->check(CLI::IsMember({"general", "stationary", "tar"}));
  f->add_option("--paper-defaults", fit.paper_defaults, "oldfaithful | brownian | skewnormal");
  f->add_option("--iterations", fit.iterations, "Total sweeps");
  f->add_option("--burn-in", fit.burn_in, "Sweeps discarded before retaining draws");
  f->add_option("--thin", fit.thin, "Keep every thin-th sweep after burn-in");
  f->add_option("--seed", fit.seed, "Random seed");
  f->add_option("--truncation", fit.truncation, "Number of mixture components L");
  f->add_option("--center", fit.center, "Data center used by the default priors");
  f->add_option("--range", fit.range, "Data range used by the default priors");
  f->add_option("--chains", fit.chains, "Independent chains (seeds derived from --seed)");
  f->add_flag("--no-adapt", fit.no_adapt, "Disable proposal-scale adaptation");
  f->add_option("--resume", fit.resume, "Continue from a checkpoint file");
  f->add_option("--save-config", fit.save_config, "Also write the resolved configuration here");
  f->add_option("--out-dir", fit.out_dir, "Output directory (default $DPMTS_OUT_DIR or .)");
  f->add_flag("--quiet", fit.quiet, "No summary on stderr");

  PredictArgs pred;
  std::string transition_at;
  auto* p = app.add_subcommand("predict", "Density grids, forecasts and expectation curves");
  p->add_option("--draws", pred.draws, "Draws file")->required();
  p->add_option("--data", pred.data.data, "Series the draws were fitted to")->required();
  p->add_option("--column", pred.data.column, "Column name for CSV input");
  p->add_option("--transition-at", pred.req.transition_at, "Comma-separated z_prev values")->delimiter(',');
  p->add_flag("--forecast", pred.req.forecast, "One-step forecast density");
  p->add_option("--z-n", pred.req.z_n, "Forecast origin (default: last observation)");
  p->add_flag("--expectation", pred.req.expectation, "Conditional expectation curve");
  p->add_option("--horizon", pred.req.horizon, "Multi-step forecast horizon");
  p->add_option("--paths", pred.req.paths_per_draw, "Simulated paths per draw for multi-step forecasts")
      ->check(CLI::PositiveNumber);
  p->add_option("--grid-points", pred.req.grid_points, "Grid size")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  p->add_option("--grid-lo", pred.req.grid_lo, "Grid lower end");
  p->add_option("--grid-hi", pred.req.grid_hi, "Grid upper end");
  p->add_option("--level", pred.req.level, "Credible level")->check(CLI::Range(0.0, 1.0));
  p->add_option("--seed", pred.seed, "Seed for multi-step simulation");
  p->add_option("--out-dir", pred.out_dir, "Output directory");

  PpoArgs po;
  auto* q = app.add_subcommand("ppo", "One-step-ahead posterior predictive ordinates");
  q->add_option("--draws", po.draws, "Draws file")->required()->expected(1);
  q->add_option("--data", po.data.data, "Series the draws were fitted to")->required();
  q->add_option("--column", po.data.column, "Column name for CSV input");
  q->add_option("--t-start", po.t_start, "First (1-based) index t");
  q->add_option("--last", po.last, "Use the last k observations");
  q->add_option("--out", po.out, "Output file");

  PpoArgs cmp;
  auto* c = app.add_subcommand("compare", "Rank fitted models by summed log ordinates");
  c->add_option("--draws", cmp.draws, "Draws files")->required()->expected(1, 64);
  c->add_option("--data", cmp.data.data, "Series the draws were fitted to")->required();
  c->add_option("--column", cmp.data.column, "Column name for CSV input");
  c->add_option("--t-start", cmp.t_start, "First (1-based) index t");
  c->add_option("--last", cmp.last, "Use the last k observations");
  c->add_option("--out", cmp.out, "Report file (per-model ordinates go next to it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*f) return cmd_fit(fit);
    if (*p) return cmd_predict(pred);
    if (*q) return cmd_ppo(po);
    if (*c) return cmd_compare(cmp);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
