// Command-line front end: simulation, fitting, stability measures,
// diagnostics, forecasting, descriptive statistics and the Monte Carlo
// harness, with JSON reports and flat plot-data CSVs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvdar/csv.hpp"
#include "tvdar/descriptive.hpp"
#include "tvdar/diagnostics.hpp"
#include "tvdar/estimation.hpp"
#include "tvdar/forecast.hpp"
#include "tvdar/math.hpp"
#include "tvdar/model.hpp"
#include "tvdar/montecarlo.hpp"
#include "tvdar/report.hpp"
#include "tvdar/stability.hpp"

namespace fs = std::filesystem;
using tvdar::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config plumbing: defaults < --config file < explicit flags (with a warning
// when a flag overrides a config value).
// ---------------------------------------------------------------------------

Json load_config_options(const std::string& path, const std::string& command) {
  Json j = tvdar::load_json(path);
  if (j.contains("config")) j = j["config"];  // accept a full report as config
  if (j.contains("command") && j["command"].is_string() &&
      j["command"] != command) {
    throw std::invalid_argument("config file was produced by command '" +
                                j["command"].get<std::string>() + "', not '" +
                                command + "'");
  }
  return j.value("options", Json::object());
}

struct Merger {
  const Json& cfg;
  const CLI::App* cmd;

  template <typename T>
  void operator()(const std::string& key, T& value) const {
    if (!cfg.contains(key)) return;
    const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt != nullptr && opt->count() > 0) {
      tvdar::warn("flag --" + key + " overrides the config file value");
      return;
    }
    value = cfg.at(key).get<T>();
  }
};

struct CommonArgs {
  std::string out_dir = "tvdar_out";
  std::string config_path;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--config", args.config_path,
                  "JSON config (or a previous report.json) supplying options");
  cmd->add_option("--threads", args.threads,
                  "Worker threads (0 = hardware/TVDAR_THREADS)");
}

int resolve_threads(int requested) {
  return requested <= 0 ? tvdar::detail::default_threads() : requested;
}

Json make_meta() {
  return Json{{"tool", "tvdar"},
              {"version", kVersion},
              {"created", tvdar::created_timestamp()}};
}

void finish(const std::string& command, const std::string& out_dir,
            Json options, Json results) {
  tvdar::Report report;
  report.meta = make_meta();
  // The output directory is deliberately not echoed: a rerun from this config
  // into a different directory must produce byte-identical files.
  report.config = Json{{"command", command}, {"options", std::move(options)}};
  report.results = std::move(results);
  tvdar::emit_report(report, out_dir);
  std::cout << command << ": report written to "
            << (fs::path(out_dir) / "report.json").string() << "\n";
}

// ---------------------------------------------------------------------------
// JSON serialization of result records.
// ---------------------------------------------------------------------------

Json cov_to_json(const tvdar::AsymptoticCov& cov) {
  Json j{{"sigma_hat", cov.sigma_hat},
         {"omega_hat", {cov.omega_hat.a11, cov.omega_hat.a12, cov.omega_hat.a22}},
         {"kappa_hat", cov.kappa_hat},
         {"sigma_singular", cov.sigma_singular},
         {"omega_singular", cov.omega_singular}};
  j["se_phi"] = cov.se_phi ? Json(*cov.se_phi) : Json();
  j["se_omega"] = cov.se_omega ? Json(*cov.se_omega) : Json();
  j["se_alpha"] = cov.se_alpha ? Json(*cov.se_alpha) : Json();
  return j;
}

Json fit_to_json(const tvdar::FitResult& fit) {
  return Json{{"phi", fit.params.phi},      {"omega", fit.params.omega},
              {"alpha", fit.params.alpha},  {"loglik", fit.loglik},
              {"converged", fit.converged}, {"iterations", fit.iterations},
              {"n_used", fit.n_used},       {"cov", cov_to_json(fit.cov)}};
}

Json test_to_json(const tvdar::TestResult& t) {
  Json j{{"name", t.name},
         {"statistic", t.statistic},
         {"p_value", t.p_value},
         {"level", t.level},
         {"reject", t.reject}};
  for (const auto& [k, v] : t.nuisance) j["nuisance"][k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// Shared input / local-fit option blocks.
// ---------------------------------------------------------------------------

struct InputArgs {
  std::string input;
  std::string demean = "local";
  std::size_t mean_window = 50;
};

void add_input(CLI::App* cmd, InputArgs& args, const char* default_demean) {
  args.demean = default_demean;
  cmd->add_option("--input", args.input, "Input price CSV (date,close[,volume])");
  cmd->add_option("--demean", args.demean, "Demeaning: global | local | none");
  cmd->add_option("--mean-window", args.mean_window, "Local-mean trailing window");
}

void merge_input(const Merger& m, InputArgs& args) {
  m("input", args.input);
  m("demean", args.demean);
  m("mean-window", args.mean_window);
}

Json input_to_json(const InputArgs& args) {
  return Json{{"input", args.input},
              {"demean", args.demean},
              {"mean-window", args.mean_window}};
}

tvdar::DemeanedSeries load_demeaned(const InputArgs& args) {
  if (args.input.empty()) throw std::invalid_argument("--input is required");
  tvdar::PriceSeries series = tvdar::parse_csv(args.input);
  if (args.demean == "global") return tvdar::demean_global(series);
  if (args.demean == "local") return tvdar::demean_local(series, args.mean_window);
  if (args.demean == "none") {
    auto x = tvdar::DemeanedSeries::from_values(series.values());
    x.origin = series;
    return x;
  }
  throw std::invalid_argument("--demean must be global, local or none");
}

struct LocalArgs {
  std::string kernel = "epanechnikov";
  double bandwidth = 0.0;   // 0 = derive from window
  std::size_t window = 50;  // bandwidth = window / T when bandwidth unset
  std::size_t grid = 200;
  bool grid_at_obs = false;
  double level = 0.95;
  bool no_warm_start = false;
};

void add_local(CLI::App* cmd, LocalArgs& args) {
  cmd->add_option("--kernel", args.kernel, "epanechnikov | rectangular");
  cmd->add_option("--bandwidth", args.bandwidth, "Bandwidth b in (0, 1]");
  cmd->add_option("--window", args.window, "Equivalent window (b = window/T)");
  cmd->add_option("--grid", args.grid, "Number of grid points");
  cmd->add_flag("--grid-at-obs", args.grid_at_obs, "Grid at observation times");
  cmd->add_option("--level", args.level, "Confidence level for bands");
  cmd->add_flag("--no-warm-start", args.no_warm_start, "Cold-start every grid point");
}

void merge_local(const Merger& m, LocalArgs& args) {
  m("kernel", args.kernel);
  m("bandwidth", args.bandwidth);
  m("window", args.window);
  m("grid", args.grid);
  m("grid-at-obs", args.grid_at_obs);
  m("level", args.level);
  m("no-warm-start", args.no_warm_start);
}

Json local_to_json(const LocalArgs& args) {
  return Json{{"kernel", args.kernel},
              {"bandwidth", args.bandwidth},
              {"window", args.window},
              {"grid", args.grid},
              {"grid-at-obs", args.grid_at_obs},
              {"level", args.level},
              {"no-warm-start", args.no_warm_start}};
}

tvdar::KernelSpec kernel_from_name(const std::string& name) {
  if (name == "epanechnikov") return {tvdar::KernelKind::epanechnikov};
  if (name == "rectangular") return {tvdar::KernelKind::rectangular_asymmetric};
  throw std::invalid_argument("--kernel must be epanechnikov or rectangular");
}

struct LocalFitBundle {
  tvdar::LocalFit fit;
  tvdar::Bandwidth b{1.0};
  tvdar::KernelSpec kernel;
};

LocalFitBundle run_local_fit(const tvdar::DemeanedSeries& x, const LocalArgs& args,
                             int threads) {
  LocalFitBundle out;
  out.kernel = kernel_from_name(args.kernel);
  std::size_t T = x.size();
  out.b = args.bandwidth > 0.0 ? tvdar::Bandwidth(args.bandwidth)
                               : tvdar::Bandwidth::from_window(args.window, T);
  std::vector<tvdar::TimePoint> grid;
  if (args.grid_at_obs) {
    for (std::size_t t = 1; t <= T; ++t) {
      grid.emplace_back(static_cast<double>(t) / static_cast<double>(T));
    }
  } else {
    grid = tvdar::make_grid(args.grid);
  }
  tvdar::LocalFitOptions opt;
  opt.warm_start = !args.no_warm_start;
  opt.threads = threads;
  out.fit = tvdar::fit_tvdar(x, grid, out.kernel, out.b, opt);
  return out;
}

void write_local_csvs(const std::string& out_dir, const tvdar::DemeanedSeries& x,
                      const LocalFitBundle& bundle, double level) {
  const auto& fit = bundle.fit;
  auto bands = tvdar::local_confidence_bands(fit, level);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cs, phis, omegas, alphas, effn;
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    cs.push_back(fit.grid[i].c);
    phis.push_back(fit.params_at[i] ? fit.params_at[i]->phi : nan);
    omegas.push_back(fit.params_at[i] ? fit.params_at[i]->omega : nan);
    alphas.push_back(fit.params_at[i] ? fit.params_at[i]->alpha : nan);
    effn.push_back(fit.effective_n[i]);
  }
  tvdar::write_columns_csv((fs::path(out_dir) / "phi_local.csv").string(),
                           {"c", "phi_hat", "lower", "upper"}, {},
                           {cs, phis, bands.phi_lo, bands.phi_hi});
  tvdar::write_columns_csv((fs::path(out_dir) / "params_local.csv").string(),
                           {"c", "phi", "omega", "alpha", "effective_n"}, {},
                           {cs, phis, omegas, alphas, effn});

  // Conditional volatility sqrt(omega(t/T) + alpha(t/T) x_{t-1}^2) at
  // observation times.
  std::size_t T = x.size();
  std::vector<double> cv_c, cv;
  std::vector<std::string> cv_dates;
  bool have_dates = x.origin.has_value();
  for (std::size_t t = 1; t < T; ++t) {
    double c = static_cast<double>(t + 1) / static_cast<double>(T);
    cv_c.push_back(c);
    cv.push_back(std::sqrt(fit.omega_at(c) +
                           fit.alpha_at(c) * x.values[t - 1] * x.values[t - 1]));
    if (have_dates) cv_dates.push_back(x.origin->dates()[t]);
  }
  if (have_dates) {
    tvdar::write_columns_csv((fs::path(out_dir) / "cond_vol.csv").string(),
                             {"date", "c", "cond_vol"}, {cv_dates}, {cv_c, cv});
  } else {
    tvdar::write_columns_csv((fs::path(out_dir) / "cond_vol.csv").string(),
                             {"c", "cond_vol"}, {}, {cv_c, cv});
  }
}

Json local_fit_summary(const LocalFitBundle& bundle) {
  double tb3 = 0.0;
  bool admissible = tvdar::bandwidth_admissible(bundle.fit.n_obs, bundle.b, &tb3);
  return Json{{"kernel", bundle.kernel.name()},
              {"bandwidth", bundle.b.b},
              {"equivalent_window", bundle.b.equivalent_window(bundle.fit.n_obs)},
              {"grid_points", bundle.fit.grid.size()},
              {"estimated_points", bundle.fit.estimated_count()},
              {"T_b_cubed", tb3},
              {"bandwidth_admissible", admissible}};
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  CommonArgs common;
  std::size_t T = 1361;
  double phi = 0.7, omega = 9e-6, alpha = 0.48;
  double phi_end = std::numeric_limits<double>::quiet_NaN();
  double omega_end = std::numeric_limits<double>::quiet_NaN();
  double alpha_end = std::numeric_limits<double>::quiet_NaN();
  std::string noise = "gaussian";
  std::uint64_t seed = 20171109;
  std::size_t burn_in = tvdar::kDefaultBurnIn;
  double base_level = 1.0;
  std::string start_date = "2017-11-09";
  bool with_volume = false;
  std::string series_name = "series.csv";
};

int run_simulate(const SimulateArgs& a) {
  tvdar::NoiseDistribution dist = tvdar::NoiseDistribution::from_name(a.noise);

  bool tv = !std::isnan(a.phi_end) || !std::isnan(a.omega_end) ||
            !std::isnan(a.alpha_end);
  tvdar::DarParams p0(a.phi, a.omega, a.alpha);
  tvdar::ParamPath path = tvdar::ParamPath::constant(p0);
  if (tv) {
    tvdar::DarParams p1(std::isnan(a.phi_end) ? a.phi : a.phi_end,
                        std::isnan(a.omega_end) ? a.omega : a.omega_end,
                        std::isnan(a.alpha_end) ? a.alpha : a.alpha_end);
    path = tvdar::ParamPath::linear(p0, p1);
  }
  tvdar::DemeanedSeries x = tvdar::simulate_tvdar(path, a.T, dist, a.seed, a.burn_in);

  std::vector<std::string> dates(a.T);
  std::string d = a.start_date;
  for (std::size_t i = 0; i < a.T; ++i) {
    dates[i] = d;
    d = tvdar::next_date(d);
  }
  std::vector<double> prices(a.T);
  for (std::size_t i = 0; i < a.T; ++i) prices[i] = a.base_level + x.values[i];
  std::vector<double> volume;
  if (a.with_volume) {
    // Deterministic synthetic volume, loosely trending with |x|.
    volume.resize(a.T);
    for (std::size_t i = 0; i < a.T; ++i) {
      volume[i] = 1e10 * (1.0 + 0.5 * static_cast<double>(i) / static_cast<double>(a.T) +
                          25.0 * std::fabs(x.values[i]));
    }
  }
  tvdar::PriceSeries series(dates, prices, {}, volume);
  fs::create_directories(a.common.out_dir);
  std::string series_path = (fs::path(a.common.out_dir) / a.series_name).string();
  tvdar::write_price_csv(series_path, series);

  Json options{{"T", a.T},
               {"phi", a.phi},
               {"omega", a.omega},
               {"alpha", a.alpha},
               {"noise", a.noise},
               {"seed", a.seed},
               {"burn-in", a.burn_in},
               {"base-level", a.base_level},
               {"start-date", a.start_date},
               {"with-volume", a.with_volume},
               {"series-name", a.series_name}};
  if (tv) {
    options["phi-end"] = std::isnan(a.phi_end) ? a.phi : a.phi_end;
    options["omega-end"] = std::isnan(a.omega_end) ? a.omega : a.omega_end;
    options["alpha-end"] = std::isnan(a.alpha_end) ? a.alpha : a.alpha_end;
  }
  Json results{{"series_path", series_path},
               {"rows", a.T},
               {"sample_mean", tvdar::detail::mean(prices)},
               {"sample_variance", tvdar::detail::variance(prices)}};
  finish("simulate", a.common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int run_fit(const CommonArgs& common, const InputArgs& input, int lags) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  tvdar::FitResult fit = tvdar::fit_dar(x);
  tvdar::Residuals res = tvdar::residuals(x, fit.params);
  std::vector<double> sq(res.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = res.values[i] * res.values[i];

  Json results{{"fit", fit_to_json(fit)}};
  results["residual_tests"] =
      Json{{"eta", test_to_json(tvdar::ljung_box(res.values, lags))},
           {"eta_sq", test_to_json(tvdar::ljung_box(sq, lags))}};
  Json options = input_to_json(input);
  options["lags"] = lags;
  finish("fit", common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// fit-local
// ---------------------------------------------------------------------------

int run_fit_local(const CommonArgs& common, const InputArgs& input,
                  const LocalArgs& local) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  int threads = resolve_threads(common.threads);
  LocalFitBundle bundle = run_local_fit(x, local, threads);
  fs::create_directories(common.out_dir);
  write_local_csvs(common.out_dir, x, bundle, local.level);

  Json options = input_to_json(input);
  options.update(local_to_json(local));
  options["threads"] = threads;
  finish("fit-local", common.out_dir, options,
         Json{{"local_fit", local_fit_summary(bundle)}});
  return 0;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

struct StabilityArgs {
  double xi0 = 1.0;
  double test_level = 0.05;
  std::string assume = "gaussian";  // density for the quadrature estimator
  int bootstrap_reps = 0;
  std::uint64_t bootstrap_seed = 7;
};

int run_stability(const CommonArgs& common, const InputArgs& input,
                  const LocalArgs& local, const StabilityArgs& st) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  int threads = resolve_threads(common.threads);

  tvdar::FitResult fit = tvdar::fit_dar(x);
  tvdar::Residuals res = tvdar::residuals(x, fit.params);
  tvdar::StabilityReport report;
  report.lambda_plugin = tvdar::lyapunov_plugin(fit.params, res);
  if (st.assume != "none") {
    tvdar::NoiseDistribution dist = tvdar::NoiseDistribution::from_name(st.assume);
    report.lambda_quadrature =
        tvdar::lyapunov_quadrature(fit.params.phi, fit.params.alpha, dist);
  }
  report.lambda_analytic = tvdar::lyapunov_uniform(fit.params.phi, fit.params.alpha);
  tvdar::XiEstimate xi = tvdar::xi_measure(fit.params, fit.cov);
  report.xi = xi.xi;
  report.xi_variance = xi.variance;
  report.xi_test =
      tvdar::xi_wald_test(xi.xi, xi.variance, fit.n_used, st.xi0, st.test_level);

  // Local stability measures from the kernel fit.
  LocalFitBundle bundle = run_local_fit(x, local, threads);
  tvdar::Residuals local_res = tvdar::local_residuals(x, bundle.fit);
  report.local_grid = bundle.fit.grid;
  report.local_lambda.reserve(report.local_grid.size());
  for (const auto& tp : report.local_grid) {
    double v = std::numeric_limits<double>::quiet_NaN();
    try {
      v = tvdar::lyapunov_local(bundle.fit, local_res, tp, bundle.kernel, bundle.b);
    } catch (const std::exception&) {
      // unestimable at this grid point
    }
    report.local_lambda.push_back(v);
  }
  tvdar::local_xi_with_intervals(bundle.fit, local.level, report.local_xi,
                                 report.local_xi_lo, report.local_xi_hi);
  if (st.bootstrap_reps > 0) {
    report.lambda_samples = tvdar::lambda2_sampling(
        fit.params, x.size(),
        tvdar::NoiseDistribution::from_name(st.assume == "none" ? "gaussian"
                                                                : st.assume),
        st.bootstrap_reps, st.bootstrap_seed, {}, threads);
  }

  fs::create_directories(common.out_dir);
  std::vector<double> cs;
  for (const auto& tp : report.local_grid) cs.push_back(tp.c);
  tvdar::write_columns_csv((fs::path(common.out_dir) / "lyapunov_local.csv").string(),
                           {"c", "lambda2"}, {}, {cs, report.local_lambda});
  tvdar::write_columns_csv(
      (fs::path(common.out_dir) / "xi_local.csv").string(),
      {"c", "xi", "lower", "upper"}, {},
      {cs, report.local_xi, report.local_xi_lo, report.local_xi_hi});
  if (!report.lambda_samples.empty()) {
    tvdar::write_columns_csv(
        (fs::path(common.out_dir) / "lambda_bootstrap.csv").string(), {"lambda2"},
        {}, {report.lambda_samples});
  }

  Json results;
  results["fit"] = fit_to_json(fit);
  Json stab{{"lambda_plugin", report.lambda_plugin},
            {"xi", report.xi},
            {"xi_variance", report.xi_variance},
            {"xi_test", test_to_json(report.xi_test)},
            {"lambda_analytic_uniform", *report.lambda_analytic}};
  stab["lambda_quadrature"] =
      report.lambda_quadrature ? Json(*report.lambda_quadrature) : Json();
  stab["bootstrap_draws"] = report.lambda_samples.size();
  results["stability"] = stab;
  results["local_fit"] = local_fit_summary(bundle);

  Json options = input_to_json(input);
  options.update(local_to_json(local));
  options["xi0"] = st.xi0;
  options["test-level"] = st.test_level;
  options["assume"] = st.assume;
  options["bootstrap-reps"] = st.bootstrap_reps;
  options["bootstrap-seed"] = st.bootstrap_seed;
  options["threads"] = threads;
  finish("stability", common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

int run_forecast(const CommonArgs& common, const std::string& input,
                 std::size_t window, double level, const std::string& interval) {
  if (input.empty()) throw std::invalid_argument("--input is required");
  tvdar::PriceSeries series = tvdar::parse_csv(input);

  tvdar::ForecastOptions opt;
  opt.level = level;
  if (interval == "parameter") {
    opt.interval = tvdar::IntervalKind::parameter_only;
  } else if (interval == "innovation") {
    opt.interval = tvdar::IntervalKind::innovation_inclusive;
  } else {
    throw std::invalid_argument("--interval must be parameter or innovation");
  }
  opt.threads = resolve_threads(common.threads);
  auto records = tvdar::one_step_forecast(series, window, opt);

  fs::create_directories(common.out_dir);
  std::vector<std::string> origin, target;
  std::vector<double> yhat, lo, hi, actual;
  std::size_t skipped = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : records) {
    if (r.skipped) {
      ++skipped;
      continue;
    }
    origin.push_back(r.origin_date);
    target.push_back(r.target_date);
    yhat.push_back(r.y_hat);
    lo.push_back(r.lower);
    hi.push_back(r.upper);
    actual.push_back(r.actual ? *r.actual : nan);
  }
  tvdar::write_columns_csv(
      (fs::path(common.out_dir) / "forecast.csv").string(),
      {"origin_date", "target_date", "y_hat", "lower", "upper", "actual"},
      {origin, target}, {yhat, lo, hi, actual});

  Json results{{"forecast", Json{{"n_forecasts", records.size()},
                                 {"skipped", skipped},
                                 {"mspe", tvdar::mspe(records)}}}};
  Json options{{"input", input},
               {"window", window},
               {"level", level},
               {"interval", interval},
               {"threads", opt.threads}};
  finish("forecast", common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// test whiteness | homoscedasticity | xi
// ---------------------------------------------------------------------------

int run_test_whiteness(const CommonArgs& common, const InputArgs& input,
                       std::size_t window, int lags, double level) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  int threads = resolve_threads(common.threads);
  auto rw = tvdar::rolling_whiteness(x, window, lags, level, {}, threads);

  fs::create_directories(common.out_dir);
  std::vector<double> end_idx, p_eta, p_eta_sq, skipped_col;
  for (const auto& w : rw.windows) {
    end_idx.push_back(static_cast<double>(w.end_index));
    p_eta.push_back(w.p_eta);
    p_eta_sq.push_back(w.p_eta_sq);
    skipped_col.push_back(w.skipped ? 1.0 : 0.0);
  }
  tvdar::write_columns_csv((fs::path(common.out_dir) / "whiteness.csv").string(),
                           {"end_index", "p_eta", "p_eta_sq", "skipped"}, {},
                           {end_idx, p_eta, p_eta_sq, skipped_col});

  Json results{{"whiteness",
                Json{{"fraction_reject_eta", rw.fraction_reject_eta},
                     {"fraction_reject_eta_sq", rw.fraction_reject_eta_sq},
                     {"windows", rw.windows.size()},
                     {"skipped", rw.skipped_windows},
                     {"level", level},
                     {"lags", lags}}}};
  Json options = input_to_json(input);
  options["window"] = window;
  options["lags"] = lags;
  options["level"] = level;
  options["threads"] = threads;
  finish("test-whiteness", common.out_dir, options, results);
  return 0;
}

int run_test_homoscedasticity(const CommonArgs& common, const InputArgs& input,
                              const LocalArgs& local, std::vector<double> gammas,
                              double grid_step, double level) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  int threads = resolve_threads(common.threads);
  LocalFitBundle bundle = run_local_fit(x, local, threads);

  if (gammas.empty()) gammas = {0.9};
  fs::create_directories(common.out_dir);
  Json tests = Json::array();
  for (double gamma : gammas) {
    tvdar::CpOptions copt;
    copt.alpha_grid_step = grid_step;
    tvdar::CpResult cp = tvdar::cp_statistic(x, bundle.fit, gamma, copt);
    std::vector<double> alphas, values;
    for (const auto& [a, v] : cp.profile) {
      alphas.push_back(a);
      values.push_back(v);
    }
    std::ostringstream name;
    name << "cp_profile_gamma" << gamma << ".csv";
    tvdar::write_columns_csv((fs::path(common.out_dir) / name.str()).string(),
                             {"alpha", "value"}, {}, {alphas, values});
    tests.push_back(Json{{"gamma", gamma},
                         {"statistic", cp.statistic},
                         {"quantile_sq", cp.quantile_sq},
                         {"argmax_alpha", cp.argmax_alpha},
                         {"p_value", cp.p_value},
                         {"reject", cp.p_value < level}});
  }

  Json results{{"homoscedasticity", tests}};
  results["local_fit"] = local_fit_summary(bundle);
  Json options = input_to_json(input);
  options.update(local_to_json(local));
  options["gammas"] = gammas;
  options["grid-step"] = grid_step;
  options["test-level"] = level;
  options["threads"] = threads;
  finish("test-homoscedasticity", common.out_dir, options, results);
  return 0;
}

int run_test_xi(const CommonArgs& common, const InputArgs& input, double xi0,
                double level) {
  tvdar::DemeanedSeries x = load_demeaned(input);
  tvdar::FitResult fit = tvdar::fit_dar(x);
  tvdar::XiEstimate xi = tvdar::xi_measure(fit.params, fit.cov);
  tvdar::TestResult t = tvdar::xi_wald_test(xi.xi, xi.variance, fit.n_used, xi0, level);

  Json results{{"fit", fit_to_json(fit)}, {"xi", test_to_json(t)}};
  Json options = input_to_json(input);
  options["xi0"] = xi0;
  options["test-level"] = level;
  finish("test-xi", common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// describe
// ---------------------------------------------------------------------------

int run_describe(const CommonArgs& common, const std::string& input,
                 std::size_t window, double level, const std::string& ci_mode,
                 std::size_t max_lag, const std::string& events_path) {
  if (input.empty()) throw std::invalid_argument("--input is required");
  tvdar::PriceSeries series = tvdar::parse_csv(input);
  std::map<std::string, std::string> events;
  if (!events_path.empty()) events = tvdar::parse_events_csv(events_path);

  tvdar::CiMode mode;
  if (ci_mode == "standard") {
    mode = tvdar::CiMode::standard;
  } else if (ci_mode == "paper-footnote") {
    mode = tvdar::CiMode::paper_footnote;
  } else {
    throw std::invalid_argument("--ci-mode must be standard or paper-footnote");
  }
  auto stats = tvdar::rolling_mean_var(series, window, level, mode);

  fs::create_directories(common.out_dir);
  std::vector<std::string> labels(stats.dates.size());
  for (std::size_t i = 0; i < stats.dates.size(); ++i) {
    auto it = events.find(stats.dates[i]);
    if (it != events.end()) labels[i] = it->second;
  }
  tvdar::write_columns_csv(
      (fs::path(common.out_dir) / "local_stats.csv").string(),
      {"date", "label", "local_mean", "mean_lower", "mean_upper", "local_var"},
      {stats.dates, labels},
      {stats.local_mean, stats.ci_lower, stats.ci_upper, stats.local_var});

  // ACF over the full sample and per calendar year.
  tvdar::DemeanedSeries x = tvdar::demean_global(series);
  auto full_acf = tvdar::acf(x.values, max_lag);
  std::vector<std::string> headers{"lag", "acf_full"};
  std::vector<std::vector<double>> columns;
  std::vector<double> lag_col(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) lag_col[k] = static_cast<double>(k);
  columns.push_back(lag_col);
  columns.push_back(full_acf);
  std::map<std::string, std::pair<std::size_t, std::size_t>> year_ranges;
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::string year = series.dates()[i].substr(0, 4);
    auto [it, inserted] = year_ranges.try_emplace(year, i, i);
    if (!inserted) it->second.second = i;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [year, range] : year_ranges) {
    std::size_t n = range.second - range.first + 1;
    std::vector<double> year_acf(max_lag + 1, nan);
    if (n >= 3) {
      std::size_t lag = std::min(max_lag, n - 2);
      try {
        auto a = tvdar::acf(std::span<const double>(
                                series.values().data() + range.first, n),
                            lag);
        std::copy(a.begin(), a.end(), year_acf.begin());
      } catch (const std::exception&) {
        // constant year: leave NaN
      }
    }
    headers.push_back("acf_" + year);
    columns.push_back(std::move(year_acf));
  }
  tvdar::write_columns_csv((fs::path(common.out_dir) / "acf.csv").string(),
                           headers, {}, columns);

  // AR(1) baseline, global and rolling.
  tvdar::DemeanedSeries xl = tvdar::demean_local(series, window);
  tvdar::Ar1Fit ar1 = tvdar::rolling_ar1(xl, window);
  const auto& roll = *ar1.rolling;
  std::vector<std::string> rho_dates;
  std::vector<double> rho_col;
  for (std::size_t i = 0; i < roll.rho.size(); ++i) {
    rho_dates.push_back(series.dates()[roll.rho_start - 1 + i]);
    rho_col.push_back(roll.rho[i]);
  }
  std::vector<double> sigma_col(roll.rho.size(), nan);
  std::size_t offset = roll.sigma_start - roll.rho_start;
  for (std::size_t i = 0; i < roll.sigma_e.size(); ++i) {
    if (offset + i < sigma_col.size()) sigma_col[offset + i] = roll.sigma_e[i];
  }
  tvdar::write_columns_csv((fs::path(common.out_dir) / "ar1_rolling.csv").string(),
                           {"date", "rho", "sigma_e"}, {rho_dates},
                           {rho_col, sigma_col});

  tvdar::Ar1Fit global = tvdar::fit_ar1(x);
  Json results{{"describe", Json{{"rho", global.rho},
                                 {"sigma2", global.sigma2},
                                 {"rolling_skipped", roll.skipped},
                                 {"global_mean", std::get<double>(x.mean_used)},
                                 {"years", year_ranges.size()}}}};
  Json options{{"input", input},     {"window", window},
               {"level", level},     {"ci-mode", ci_mode},
               {"max-lag", max_lag}, {"events", events_path}};
  finish("describe", common.out_dir, options, results);
  return 0;
}

// ---------------------------------------------------------------------------
// montecarlo
// ---------------------------------------------------------------------------

int run_montecarlo(const CommonArgs& common, double phi, double omega,
                   double alpha, const std::string& t_list, int reps,
                   const std::string& noise, std::uint64_t seed,
                   const std::string& targets_csv, bool surface,
                   const std::string& surface_noise) {
  int threads = resolve_threads(common.threads);
  fs::create_directories(common.out_dir);
  Json results;

  if (reps > 0) {
    tvdar::ExperimentConfig config;
    config.theta0 = tvdar::DarParams(phi, omega, alpha);
    config.T_values.clear();
    std::stringstream ts(t_list);
    std::string tok;
    while (std::getline(ts, tok, ',')) {
      if (!tok.empty()) config.T_values.push_back(std::stoul(tok));
    }
    config.reps = reps;
    config.noise = tvdar::NoiseDistribution::from_name(noise);
    config.seed = seed;
    config.threads = threads;
    config.targets.clear();
    std::stringstream tg(targets_csv);
    while (std::getline(tg, tok, ',')) {
      if (!tok.empty()) config.targets.push_back(tvdar::target_from_name(tok));
    }
    auto result = tvdar::run_estimator_density_experiment(config);

    Json summary;
    for (const auto& [T, per_target] : result.densities) {
      Json node;
      for (const auto& [target, density] : per_target) {
        std::ostringstream name;
        name << "density_" << tvdar::target_name(target) << "_T" << T << ".csv";
        tvdar::write_columns_csv((fs::path(common.out_dir) / name.str()).string(),
                                 {"grid", "density"}, {},
                                 {density.grid, density.density});
        node[tvdar::target_name(target)] =
            Json{{"mode", density.mode()},
                 {"median", tvdar::detail::median(density.samples)},
                 {"iqr", tvdar::detail::interquartile_range(density.samples)},
                 {"bandwidth", density.bandwidth},
                 {"n", density.samples.size()}};
      }
      node["failed_reps"] = result.failed_reps.at(T);
      summary["T" + std::to_string(T)] = node;
    }
    summary["flagged"] = result.flagged;
    results["montecarlo"] = summary;
  }

  if (surface) {
    std::vector<double> phi_grid, alpha_grid;
    for (int i = -5; i <= 5; ++i) phi_grid.push_back(0.2 * i);
    for (int j = 0; j <= 10; ++j) alpha_grid.push_back(0.1 * j);
    auto grid = tvdar::lyapunov_surface(
        phi_grid, alpha_grid, tvdar::NoiseDistribution::from_name(surface_noise));
    std::vector<double> pcol, acol, lcol;
    for (std::size_t i = 0; i < phi_grid.size(); ++i) {
      for (std::size_t j = 0; j < alpha_grid.size(); ++j) {
        pcol.push_back(phi_grid[i]);
        acol.push_back(alpha_grid[j]);
        lcol.push_back(grid[i][j]);
      }
    }
    tvdar::write_columns_csv(
        (fs::path(common.out_dir) / "lyapunov_surface.csv").string(),
        {"phi", "alpha", "lambda"}, {}, {pcol, acol, lcol});
    results["surface"] = Json{{"rows", pcol.size()}, {"noise", surface_noise}};
  }

  Json options{{"phi", phi},           {"omega", omega},
               {"alpha", alpha},       {"T-list", t_list},
               {"reps", reps},         {"noise", noise},
               {"seed", seed},         {"targets", targets_csv},
               {"surface", surface},   {"surface-noise", surface_noise},
               {"threads", threads}};
  finish("montecarlo", common.out_dir, options, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying DAR(1) modeling, stability measures and diagnostics"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic price series");
  add_common(c_sim, sim.common);
  c_sim->add_option("--T", sim.T, "Series length");
  c_sim->add_option("--phi", sim.phi);
  c_sim->add_option("--omega", sim.omega);
  c_sim->add_option("--alpha", sim.alpha);
  c_sim->add_option("--phi-end", sim.phi_end, "Linear path endpoint for phi");
  c_sim->add_option("--omega-end", sim.omega_end, "Linear path endpoint for omega");
  c_sim->add_option("--alpha-end", sim.alpha_end, "Linear path endpoint for alpha");
  c_sim->add_option("--noise", sim.noise,
                    "gaussian | uniform_pm1 | uniform_standardized");
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--burn-in", sim.burn_in);
  c_sim->add_option("--base-level", sim.base_level,
                    "Level added to the simulated deviations");
  c_sim->add_option("--start-date", sim.start_date);
  c_sim->add_flag("--with-volume", sim.with_volume);
  c_sim->add_option("--series-name", sim.series_name);

  CommonArgs fit_common;
  InputArgs fit_input;
  int fit_lags = 10;
  CLI::App* c_fit = app.add_subcommand("fit", "Global quasi-likelihood fit");
  add_common(c_fit, fit_common);
  add_input(c_fit, fit_input, "global");
  c_fit->add_option("--lags", fit_lags, "Whiteness-test lags for the fit summary");

  CommonArgs fl_common;
  InputArgs fl_input;
  LocalArgs fl_local;
  CLI::App* c_fl = app.add_subcommand("fit-local", "Kernel-localized fit with bands");
  add_common(c_fl, fl_common);
  add_input(c_fl, fl_input, "local");
  add_local(c_fl, fl_local);

  CommonArgs st_common;
  InputArgs st_input;
  LocalArgs st_local;
  StabilityArgs st_args;
  CLI::App* c_st = app.add_subcommand("stability", "Lyapunov and xi stability measures");
  add_common(c_st, st_common);
  add_input(c_st, st_input, "local");
  add_local(c_st, st_local);
  c_st->add_option("--xi0", st_args.xi0, "Null value for the xi Wald test");
  c_st->add_option("--test-level", st_args.test_level);
  c_st->add_option("--assume", st_args.assume,
                   "Density for the quadrature estimator (or 'none')");
  c_st->add_option("--bootstrap-reps", st_args.bootstrap_reps,
                   "Simulation draws for the lambda sampling distribution");
  c_st->add_option("--bootstrap-seed", st_args.bootstrap_seed);

  CommonArgs fc_common;
  std::string fc_input;
  std::size_t fc_window = 50;
  double fc_level = 0.95;
  std::string fc_interval = "parameter";
  CLI::App* c_fc = app.add_subcommand("forecast", "Rolling one-step-ahead forecasts");
  add_common(c_fc, fc_common);
  c_fc->add_option("--input", fc_input, "Input price CSV");
  c_fc->add_option("--window", fc_window, "Estimation window");
  c_fc->add_option("--level", fc_level);
  c_fc->add_option("--interval", fc_interval, "parameter | innovation");

  CLI::App* c_test = app.add_subcommand("test", "Diagnostic hypothesis tests");
  c_test->require_subcommand(1);

  CommonArgs tw_common;
  InputArgs tw_input;
  std::size_t tw_window = 50;
  int tw_lags = 10;
  double tw_level = 0.05;
  CLI::App* c_tw = c_test->add_subcommand("whiteness", "Rolling residual whiteness");
  add_common(c_tw, tw_common);
  add_input(c_tw, tw_input, "local");
  c_tw->add_option("--window", tw_window);
  c_tw->add_option("--lags", tw_lags);
  c_tw->add_option("--level", tw_level);

  CommonArgs th_common;
  InputArgs th_input;
  LocalArgs th_local;
  std::vector<double> th_gammas;
  double th_grid_step = 0.001;
  double th_level = 0.05;
  CLI::App* c_th = c_test->add_subcommand("homoscedasticity", "Variance-constancy test");
  add_common(c_th, th_common);
  add_input(c_th, th_input, "local");
  add_local(c_th, th_local);
  CLI::Option* th_gamma_opt =
      c_th->add_option("--gamma", th_gammas, "Quantile levels (repeatable)");
  c_th->add_option("--grid-step", th_grid_step);
  c_th->add_option("--test-level", th_level);

  CommonArgs tx_common;
  InputArgs tx_input;
  double tx_xi0 = 1.0;
  double tx_level = 0.05;
  CLI::App* c_tx = c_test->add_subcommand("xi", "Wald test on xi = phi^2 + alpha");
  add_common(c_tx, tx_common);
  add_input(c_tx, tx_input, "global");
  c_tx->add_option("--xi0", tx_xi0);
  c_tx->add_option("--test-level", tx_level);

  CommonArgs de_common;
  std::string de_input;
  std::size_t de_window = 50;
  double de_level = 0.95;
  std::string de_ci_mode = "standard";
  std::size_t de_max_lag = 50;
  std::string de_events;
  CLI::App* c_de =
      app.add_subcommand("describe", "Rolling statistics, ACF, AR(1) baseline");
  add_common(c_de, de_common);
  c_de->add_option("--input", de_input, "Input price CSV");
  c_de->add_option("--window", de_window);
  c_de->add_option("--level", de_level);
  c_de->add_option("--ci-mode", de_ci_mode, "standard | paper-footnote");
  c_de->add_option("--max-lag", de_max_lag);
  c_de->add_option("--events", de_events, "Optional annotations CSV (date,label)");

  CommonArgs mc_common;
  double mc_phi = 0.7, mc_omega = 0.01, mc_alpha = 0.5;
  std::string mc_tlist = "50,100";
  int mc_reps = 4000;
  std::string mc_noise = "gaussian";
  std::uint64_t mc_seed = 1;
  std::string mc_targets = "phi,omega,alpha,lambda2,xi";
  bool mc_surface = false;
  std::string mc_surface_noise = "uniform_pm1";
  CLI::App* c_mc = app.add_subcommand(
      "montecarlo", "Estimator sampling densities and the Lyapunov surface");
  add_common(c_mc, mc_common);
  c_mc->add_option("--phi", mc_phi);
  c_mc->add_option("--omega", mc_omega);
  c_mc->add_option("--alpha", mc_alpha);
  c_mc->add_option("--T-list", mc_tlist, "Comma-separated sample sizes");
  c_mc->add_option("--reps", mc_reps, "Replications (0 skips the experiment)");
  c_mc->add_option("--noise", mc_noise);
  c_mc->add_option("--seed", mc_seed);
  c_mc->add_option("--targets", mc_targets, "Comma-separated target list");
  c_mc->add_flag("--surface", mc_surface, "Also emit the Lyapunov surface grid");
  c_mc->add_option("--surface-noise", mc_surface_noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) {
      if (!sim.common.config_path.empty()) {
        Json cfg = load_config_options(sim.common.config_path, "simulate");
        Merger m{cfg, c_sim};
        m("T", sim.T);
        m("phi", sim.phi);
        m("omega", sim.omega);
        m("alpha", sim.alpha);
        m("phi-end", sim.phi_end);
        m("omega-end", sim.omega_end);
        m("alpha-end", sim.alpha_end);
        m("noise", sim.noise);
        m("seed", sim.seed);
        m("burn-in", sim.burn_in);
        m("base-level", sim.base_level);
        m("start-date", sim.start_date);
        m("with-volume", sim.with_volume);
        m("series-name", sim.series_name);
      }
      return run_simulate(sim);
    }
    if (c_fit->parsed()) {
      if (!fit_common.config_path.empty()) {
        Json cfg = load_config_options(fit_common.config_path, "fit");
        Merger m{cfg, c_fit};
        merge_input(m, fit_input);
        m("lags", fit_lags);
      }
      return run_fit(fit_common, fit_input, fit_lags);
    }
    if (c_fl->parsed()) {
      if (!fl_common.config_path.empty()) {
        Json cfg = load_config_options(fl_common.config_path, "fit-local");
        Merger m{cfg, c_fl};
        merge_input(m, fl_input);
        merge_local(m, fl_local);
        m("threads", fl_common.threads);
      }
      return run_fit_local(fl_common, fl_input, fl_local);
    }
    if (c_st->parsed()) {
      if (!st_common.config_path.empty()) {
        Json cfg = load_config_options(st_common.config_path, "stability");
        Merger m{cfg, c_st};
        merge_input(m, st_input);
        merge_local(m, st_local);
        m("xi0", st_args.xi0);
        m("test-level", st_args.test_level);
        m("assume", st_args.assume);
        m("bootstrap-reps", st_args.bootstrap_reps);
        m("bootstrap-seed", st_args.bootstrap_seed);
        m("threads", st_common.threads);
      }
      return run_stability(st_common, st_input, st_local, st_args);
    }
    if (c_fc->parsed()) {
      if (!fc_common.config_path.empty()) {
        Json cfg = load_config_options(fc_common.config_path, "forecast");
        Merger m{cfg, c_fc};
        m("input", fc_input);
        m("window", fc_window);
        m("level", fc_level);
        m("interval", fc_interval);
        m("threads", fc_common.threads);
      }
      return run_forecast(fc_common, fc_input, fc_window, fc_level, fc_interval);
    }
    if (c_tw->parsed()) {
      if (!tw_common.config_path.empty()) {
        Json cfg = load_config_options(tw_common.config_path, "test-whiteness");
        Merger m{cfg, c_tw};
        merge_input(m, tw_input);
        m("window", tw_window);
        m("lags", tw_lags);
        m("level", tw_level);
        m("threads", tw_common.threads);
      }
      return run_test_whiteness(tw_common, tw_input, tw_window, tw_lags, tw_level);
    }
    if (c_th->parsed()) {
      if (!th_common.config_path.empty()) {
        Json cfg = load_config_options(th_common.config_path, "test-homoscedasticity");
        Merger m{cfg, c_th};
        merge_input(m, th_input);
        merge_local(m, th_local);
        if (cfg.contains("gammas") && th_gamma_opt->count() == 0) {
          th_gammas = cfg["gammas"].get<std::vector<double>>();
        }
        m("grid-step", th_grid_step);
        m("test-level", th_level);
        m("threads", th_common.threads);
      }
      return run_test_homoscedasticity(th_common, th_input, th_local, th_gammas,
                                       th_grid_step, th_level);
    }
    if (c_tx->parsed()) {
      if (!tx_common.config_path.empty()) {
        Json cfg = load_config_options(tx_common.config_path, "test-xi");
        Merger m{cfg, c_tx};
        merge_input(m, tx_input);
        m("xi0", tx_xi0);
        m("test-level", tx_level);
      }
      return run_test_xi(tx_common, tx_input, tx_xi0, tx_level);
    }
    if (c_de->parsed()) {
      if (!de_common.config_path.empty()) {
        Json cfg = load_config_options(de_common.config_path, "describe");
        Merger m{cfg, c_de};
        m("input", de_input);
        m("window", de_window);
        m("level", de_level);
        m("ci-mode", de_ci_mode);
        m("max-lag", de_max_lag);
        m("events", de_events);
      }
      return run_describe(de_common, de_input, de_window, de_level, de_ci_mode,
                          de_max_lag, de_events);
    }
    if (c_mc->parsed()) {
      if (!mc_common.config_path.empty()) {
        Json cfg = load_config_options(mc_common.config_path, "montecarlo");
        Merger m{cfg, c_mc};
        m("phi", mc_phi);
        m("omega", mc_omega);
        m("alpha", mc_alpha);
        m("T-list", mc_tlist);
        m("reps", mc_reps);
        m("noise", mc_noise);
        m("seed", mc_seed);
        m("targets", mc_targets);
        m("surface", mc_surface);
        m("surface-noise", mc_surface_noise);
        m("threads", mc_common.threads);
      }
      return run_montecarlo(mc_common, mc_phi, mc_omega, mc_alpha, mc_tlist,
                            mc_reps, mc_noise, mc_seed, mc_targets, mc_surface,
                            mc_surface_noise);
    }
  } catch (const tvdar::csv_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
