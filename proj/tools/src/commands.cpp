#include "commands.hpp"

#include "scm/csv.hpp"
#include "scm/graph.hpp"
#include "scm/io.hpp"
#include "scm/national.hpp"
#include "scm/simulate.hpp"
#include "scm/stats.hpp"
#include "scm/validation.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

#ifndef SCM_VERSION
#define SCM_VERSION "unknown"
#endif

namespace scm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPredictiveSeedOffset = 0x9E3779B97F4A7C15ULL;

class OutputSet {
 public:
  OutputSet(fs::path dir, std::string command, const RunConfig& config)
      : dir_(std::move(dir)), command_(std::move(command)), config_(config),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    files_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw InputError("failed writing " + path.string());
  }

  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void warn(const std::string& message) { warnings_.push_back(message); }

  std::vector<fs::path> commit() {
    json manifest;
    manifest["command"] = command_;
    manifest["config_hash"] = config_hash(config_.text);
    manifest["seeds"] = seeds_;
    manifest["versions"] = {{"scm", SCM_VERSION},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"compiler", __VERSION__}};
    std::vector<std::string> names;
    for (const auto& f : files_) names.push_back(f.filename().string());
    names.push_back("manifest.json");
    manifest["outputs"] = names;
    manifest["warnings"] = warnings_;
    manifest["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write("manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
    committed_ = true;
    return files_;
  }

 private:
  fs::path dir_;
  std::string command_;
  const RunConfig& config_;
  std::chrono::steady_clock::time_point start_;
  std::vector<fs::path> files_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> warnings_;
  bool committed_ = false;
};

struct Inputs {
  ObservationPanel panel;
  AreaGraph graph;
};

Inputs load_inputs(const RunConfig& config) {
  if (config.data.counts.empty()) throw InputError("config: data.counts is required");
  if (config.data.adjacency.empty()) throw InputError("config: data.adjacency is required");
  ObservationPanel panel = load_panel(config.data.counts, config.data.populations);
  AreaGraph graph = read_adjacency(config.data.adjacency);
  if (graph.num_areas() != panel.num_areas()) {
    throw InputError("adjacency has " + std::to_string(graph.num_areas()) + " areas but the panel has " +
                     std::to_string(panel.num_areas()));
  }
  return {std::move(panel), std::move(graph)};
}

void write_rate_summary(std::ostream& out, const PosteriorSamples& samples, const ObservationPanel& panel,
                        int fitted_years, double unit) {
  std::vector<Cell> cells;
  for (int d = 0; d < kNumDiseases; ++d) {
    for (int t = 0; t < panel.num_years(); ++t) {
      for (int i = 0; i < panel.num_areas(); ++i) cells.push_back({i, t, static_cast<Disease>(d)});
    }
  }
  const Eigen::MatrixXd log_rates = samples.log_rate_draws(cells);
  out << "# rate_unit=" << format_number(unit) << '\n';
  out << "area,year,disease,horizon,observed_count,population,mean,sd,q025,q500,q975\n";
  std::vector<double> draws(static_cast<std::size_t>(log_rates.rows()));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    for (Eigen::Index s = 0; s < log_rates.rows(); ++s) {
      draws[static_cast<std::size_t>(s)] = std::exp(log_rates(s, static_cast<Eigen::Index>(c))) * unit;
    }
    const auto count = panel.count(cell.area, cell.year, cell.disease);
    const int horizon = std::max(0, cell.year - fitted_years + 1);
    out << cell.area << ',' << panel.first_year() + cell.year << ',' << to_string(cell.disease) << ','
        << horizon << ',' << (count ? std::to_string(*count) : std::string()) << ','
        << format_number(panel.population(cell.area, cell.year, cell.disease)) << ','
        << format_number(mean(draws)) << ',' << format_number(draws.size() > 1 ? sample_sd(draws) : 0.0) << ','
        << format_number(quantile(draws, 0.025)) << ',' << format_number(quantile(draws, 0.5)) << ','
        << format_number(quantile(draws, 0.975)) << '\n';
  }
}

void write_hyper_summary(std::ostream& out, const PosteriorSamples& samples) {
  out << "name,mean,sd,q025,q500,q975,acceptance,ess\n";
  const auto& diag = samples.diagnostics;
  for (std::size_t k = 0; k < samples.layout->hypers().size(); ++k) {
    const Eigen::VectorXd col = samples.hyper.col(static_cast<Eigen::Index>(k));
    const std::span<const double> v(col.data(), static_cast<std::size_t>(col.size()));
    const bool mcmc = k < diag.hyper_acceptance.size();
    out << samples.layout->hypers()[k].name() << ',' << format_number(mean(v)) << ','
        << format_number(v.size() > 1 ? sample_sd(v) : 0.0) << ',' << format_number(quantile(v, 0.025)) << ','
        << format_number(quantile(v, 0.5)) << ',' << format_number(quantile(v, 0.975)) << ','
        << (mcmc ? format_number(diag.hyper_acceptance[k]) : std::string()) << ','
        << (k < diag.hyper_ess.size() ? format_number(diag.hyper_ess[k]) : std::string()) << '\n';
  }
}

void record_fit(OutputSet& outputs, const RunConfig& config, const PosteriorSamples& samples) {
  outputs.seed("fit", config.fit.rng_seed);
  for (const auto& w : samples.diagnostics.warnings) outputs.warn(w);
}

}  // namespace

void apply_overrides(RunConfig& config, const Overrides& o) {
  if (const char* env = std::getenv("SCM_OUTPUT_DIR"); env && *env) config.data.output = env;
  if (o.output) config.data.output = *o.output;
  if (o.seed) config.fit.rng_seed = *o.seed;
  if (o.samples) config.fit.n_samples = *o.samples;
  if (o.burn_in) config.fit.burn_in = *o.burn_in;
  if (o.thin) config.fit.thin = *o.thin;
  if (o.horizon) config.forecast.horizon = *o.horizon;
  if (o.mode) config.fit.mode = parse_fit_mode(*o.mode);
  config.fit.validate();
}

std::vector<fs::path> run_fit(const RunConfig& config) {
  OutputSet outputs(config.data.output, "fit", config);
  const Inputs in = load_inputs(config);
  const PosteriorSamples samples = fit_model(config.model, in.graph, in.panel, config.fit);
  record_fit(outputs, config, samples);
  outputs.write("fit_summary.csv", [&](std::ostream& out) {
    write_rate_summary(out, samples, in.panel, in.panel.num_years(), config.scoring.rate_unit);
  });
  outputs.write("hyper_summary.csv", [&](std::ostream& out) { write_hyper_summary(out, samples); });
  return outputs.commit();
}

std::vector<fs::path> run_forecast(const RunConfig& config) {
  OutputSet outputs(config.data.output, "forecast", config);
  if (!config.forecast.projected_populations) {
    throw InputError("forecast requires forecast.projected_populations");
  }
  const Inputs in = load_inputs(config);
  const auto projection = projection_from(load_populations(*config.forecast.projected_populations));
  const int h = config.forecast.horizon;
  const PosteriorSamples samples = forecast_horizon(config.model, in.graph, in.panel, h, projection, config.fit);
  const ObservationPanel extended = extend_panel(in.panel, h, projection);
  record_fit(outputs, config, samples);
  outputs.write("forecast_summary.csv", [&](std::ostream& out) {
    write_rate_summary(out, samples, extended, in.panel.num_years(), config.scoring.rate_unit);
  });
  outputs.write("hyper_summary.csv", [&](std::ostream& out) { write_hyper_summary(out, samples); });
  return outputs.commit();
}

std::vector<fs::path> run_validate(const RunConfig& config) {
  OutputSet outputs(config.data.output, "validate", config);
  const Inputs in = load_inputs(config);
  const auto& h = config.harness;
  const MaskSchedule mask =
      build_mask(in.panel.num_areas(), in.panel.first_year(), in.panel.num_years(), h.fractions, h.mask_seed,
                 h.band_length);
  const CvPlan plan = build_cv_plan(in.panel.first_year(), in.panel.first_year() + in.panel.num_years() - 1,
                                    h.horizon, h.max_folds, h.min_fit_years);
  ValidationOptions options;
  options.scoring = config.scoring;
  options.threads = h.threads;
  const ValidationReport report = run_validation(config.model, in.graph, in.panel, mask, plan, config.fit, options);

  bool any_ok = false;
  for (const auto& f : report.folds) {
    any_ok = any_ok || !f.failed;
    outputs.seed("fold_" + std::to_string(f.fold.index), config.fit.rng_seed + f.fold.index);
  }
  if (!any_ok) throw NumericalError("every validation fold failed: " + report.folds.front().error);
  outputs.seed("mask", h.mask_seed);
  for (const auto& w : report.in_window.warnings) outputs.warn(w);
  for (const auto& w : report.forecast.warnings) outputs.warn(w);

  outputs.write("mask.csv", [&](std::ostream& out) {
    out << "area,first_available_year,missing_years\n";
    for (int i = 0; i < mask.num_areas; ++i) {
      out << i << ',' << mask.first_available_year[i] << ',' << mask.missing_duration(i) << '\n';
    }
  });
  outputs.write("folds.csv", [&](std::ostream& out) {
    out << "fold,fit_first,fit_last,forecast_first,forecast_last,failed,observed_cells,likelihood_terms,error\n";
    for (const auto& f : report.folds) {
      out << f.fold.index << ',' << f.fold.fit_first << ',' << f.fold.fit_last << ',' << f.fold.forecast_first
          << ',' << f.fold.forecast_last << ',' << (f.failed ? 1 : 0) << ',' << f.observed_cells << ','
          << f.likelihood_terms << ',' << f.error << '\n';
    }
  });
  outputs.write("in_window_cells.csv", [&](std::ostream& out) { write_cell_scores(out, report.in_window); });
  outputs.write("in_window_aggregates.csv", [&](std::ostream& out) { write_aggregates(out, report.in_window); });
  outputs.write("forecast_cells.csv", [&](std::ostream& out) { write_cell_scores(out, report.forecast); });
  outputs.write("forecast_aggregates.csv", [&](std::ostream& out) { write_aggregates(out, report.forecast); });
  return outputs.commit();
}

std::vector<fs::path> run_national(const RunConfig& config) {
  OutputSet outputs(config.data.output, "national", config);
  const Inputs in = load_inputs(config);
  const PosteriorSamples samples = fit_model(config.model, in.graph, in.panel, config.fit);
  record_fit(outputs, config, samples);
  const std::uint64_t seed = config.fit.rng_seed ^ kPredictiveSeedOffset;
  outputs.seed("predictive", seed);
  const NationalSummary summary = national_distribution(samples, in.panel, seed);
  outputs.write("national.csv", [&](std::ostream& out) { write_national(out, summary); });
  return outputs.commit();
}

std::vector<fs::path> run_simulate(const RunConfig& config) {
  OutputSet outputs(config.data.output, "simulate", config);
  const auto& s = config.simulate;
  const AreaGraph graph = grid_graph(s.rows, s.cols);
  const LatentLayout layout(config.model, graph, s.years);
  HyperParams hyper = default_hyper(layout);
  for (const auto& [name, value] : s.hypers) {
    bool found = false;
    for (const auto& id : layout.hypers()) {
      if (id.name() == name) {
        set_hyper_value(hyper, id, value);
        found = true;
      }
    }
    if (!found) throw InputError("simulate.hypers: model has no hyperparameter '" + name + "'");
  }
  const auto [panel, truth] = simulate(config.model, graph, s.years, s.population, hyper, s.seed, s.intercepts);
  outputs.seed("simulate", s.seed);
  outputs.write("panel.csv", [&](std::ostream& out) { write_panel(out, panel); });
  outputs.write("adjacency.txt", [&](std::ostream& out) { write_adjacency(out, graph); });
  outputs.write("truth.csv", [&](std::ostream& out) { write_truth(out, truth, panel.first_year()); });
  return outputs.commit();
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shared-component spatio-temporal models for incidence and mortality"};
  app.require_subcommand(1);
  fs::path config_path;
  Overrides o;
  std::string output;
  std::uint64_t seed = 0;
  int samples = 0;
  int burn_in = 0;
  int thin = 0;
  int horizon = 0;
  std::string mode;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", "Fit a model and write posterior rate summaries"},
      {"forecast", "Fit with projected populations and forecast future years"},
      {"validate", "Run the masking and rolling-origin validation harness"},
      {"national", "Fit and write national incidence distributions"},
      {"simulate", "Generate a synthetic lattice panel with known truth"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", output, "Output directory");
    sub->add_option("--seed", seed, "Sampler seed");
    sub->add_option("--samples", samples, "Retained draws");
    sub->add_option("--burn-in", burn_in, "Burn-in iterations");
    sub->add_option("--thin", thin, "Thinning interval");
    sub->add_option("--horizon", horizon, "Forecast horizon in years");
    sub->add_option("--mode", mode, "Fit mode: mcmc or eb");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out;
    std::ostringstream o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code;
  }

  CLI::App* chosen = nullptr;
  for (auto* sub : subs) {
    if (sub->parsed()) chosen = sub;
  }
  auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
  if (given("--output")) o.output = output;
  if (given("--seed")) o.seed = seed;
  if (given("--samples")) o.samples = samples;
  if (given("--burn-in")) o.burn_in = burn_in;
  if (given("--thin")) o.thin = thin;
  if (given("--horizon")) o.horizon = horizon;
  if (given("--mode")) o.mode = mode;

  try {
    RunConfig config = load_run_config(config_path);
    apply_overrides(config, o);
    const std::string name = chosen->get_name();
    std::vector<fs::path> files;
    if (name == "fit") files = run_fit(config);
    if (name == "forecast") files = run_forecast(config);
    if (name == "validate") files = run_validate(config);
    if (name == "national") files = run_national(config);
    if (name == "simulate") files = run_simulate(config);
    for (const auto& f : files) out << f.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "scm: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace scm::cli
