#include "run_config.hpp"

#include "scm/csv.hpp"
#include "scm/graph.hpp"
#include "scm/io.hpp"
#include "scm/validation.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace scm::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"data", {"counts", "populations", "adjacency", "output"}},
    {"model",
     {"model", "interaction", "shared_interaction_precision", "num_rho", "sd_prior_upper", "gamma_shape",
      "gamma_rate"}},
    {"fit",
     {"mode", "burn_in", "samples", "thin", "seed", "eb_draws", "initial_step", "field_rho", "tune_field",
      "fixed"}},
    {"forecast", {"horizon", "projected_populations"}},
    {"validate", {"fractions", "band_length", "mask_seed", "horizon", "max_folds", "min_fit_years", "threads"}},
    {"scoring", {"beta", "rate_unit"}},
    {"simulate",
     {"rows", "cols", "years", "first_year", "population", "seed", "hypers", "alpha_incidence",
      "alpha_mortality"}},
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::map<std::string, double> parse_pairs(const std::string& text, const std::string& key) {
  std::map<std::string, double> out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InputError("config: " + key + " entries must be name:value");
    const std::string name(trim(item.substr(0, colon)));
    try {
      out[name] = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("config: bad value in " + key + " entry '" + item + "'");
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
  if (const auto v = tree.get_optional<T>(key)) {
    target = *v;
  } else if (tree.get_child_optional(key)) {
    throw InputError("config: invalid value for " + key);
  }
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  {
    std::stringstream buffer;
    buffer << in.rdbuf();
    cfg.text = buffer.str();
  }
  pt::ptree tree;
  try {
    std::istringstream text(cfg.text);
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw InputError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) throw InputError("config: unknown key " + section + "." + key);
    }
  }

  if (auto v = tree.get_optional<std::string>("data.counts")) cfg.data.counts = resolve(base_dir, *v);
  if (auto v = tree.get_optional<std::string>("data.populations")) cfg.data.populations = resolve(base_dir, *v);
  if (auto v = tree.get_optional<std::string>("data.adjacency")) cfg.data.adjacency = resolve(base_dir, *v);
  if (auto v = tree.get_optional<std::string>("data.output")) cfg.data.output = resolve(base_dir, *v);

  try {
    if (auto v = tree.get_optional<std::string>("model.model")) cfg.model.model = parse_model_id(*v);
    if (auto v = tree.get_optional<std::string>("model.interaction")) {
      cfg.model.interaction = parse_interaction_type(*v);
    }
    if (auto v = tree.get_optional<std::string>("fit.mode")) cfg.fit.mode = parse_fit_mode(*v);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  read(tree, "model.shared_interaction_precision", cfg.model.shared_interaction_precision);
  read(tree, "model.num_rho", cfg.model.num_rho);
  read(tree, "model.sd_prior_upper", cfg.model.sd_prior_upper);
  read(tree, "model.gamma_shape", cfg.model.gamma_shape);
  read(tree, "model.gamma_rate", cfg.model.gamma_rate);

  read(tree, "fit.burn_in", cfg.fit.burn_in);
  read(tree, "fit.samples", cfg.fit.n_samples);
  read(tree, "fit.thin", cfg.fit.thin);
  read(tree, "fit.seed", cfg.fit.rng_seed);
  read(tree, "fit.eb_draws", cfg.fit.eb_draws);
  read(tree, "fit.initial_step", cfg.fit.initial_step);
  read(tree, "fit.field_rho", cfg.fit.field_rho);
  read(tree, "fit.tune_field", cfg.fit.tune_field);
  if (auto v = tree.get_optional<std::string>("fit.fixed")) cfg.fit.fixed_hypers = parse_pairs(*v, "fit.fixed");

  read(tree, "forecast.horizon", cfg.forecast.horizon);
  if (auto v = tree.get_optional<std::string>("forecast.projected_populations")) {
    cfg.forecast.projected_populations = resolve(base_dir, *v);
  }

  cfg.harness.fractions = kDefaultMaskFractions;
  if (auto v = tree.get_optional<std::string>("validate.fractions")) {
    cfg.harness.fractions.clear();
    for (const auto& item : split(*v, ',')) {
      try {
        cfg.harness.fractions.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw InputError("config: bad fraction '" + item + "'");
      }
    }
  }
  read(tree, "validate.band_length", cfg.harness.band_length);
  read(tree, "validate.mask_seed", cfg.harness.mask_seed);
  read(tree, "validate.horizon", cfg.harness.horizon);
  read(tree, "validate.max_folds", cfg.harness.max_folds);
  read(tree, "validate.min_fit_years", cfg.harness.min_fit_years);
  read(tree, "validate.threads", cfg.harness.threads);

  read(tree, "scoring.beta", cfg.scoring.beta);
  read(tree, "scoring.rate_unit", cfg.scoring.rate_unit);

  read(tree, "simulate.rows", cfg.simulate.rows);
  read(tree, "simulate.cols", cfg.simulate.cols);
  read(tree, "simulate.years", cfg.simulate.years);
  read(tree, "simulate.first_year", cfg.simulate.intercepts.first_year);
  read(tree, "simulate.population", cfg.simulate.population);
  read(tree, "simulate.seed", cfg.simulate.seed);
  read(tree, "simulate.alpha_incidence", cfg.simulate.intercepts.alpha_incidence);
  read(tree, "simulate.alpha_mortality", cfg.simulate.intercepts.alpha_mortality);
  if (auto v = tree.get_optional<std::string>("simulate.hypers")) {
    cfg.simulate.hypers = parse_pairs(*v, "simulate.hypers");
  }

  try {
    cfg.fit.validate();
    cfg.scoring.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  return parse_run_config(in, path.parent_path());
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scm::cli
