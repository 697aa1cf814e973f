#include "polyfilter/config.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "polyfilter/text_io.hpp"

namespace polyfilter {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) {
      // Strip trailing ';' or '#' comments.
      std::string s = *v;
      if (auto c = s.find_first_of(";#"); c != std::string::npos) s = s.substr(0, c);
      return trim(s);
    }
    return std::nullopt;
  }

  std::string require(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) throw ConfigError(key + ": required field is missing");
    return *v;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto v = raw(key);
    return v && !v->empty() ? *v : fallback;
  }

  double real(const std::string& key, double fallback) const {
    auto v = raw(key);
    return v && !v->empty() ? to_real(key, *v) : fallback;
  }

  long integer(const std::string& key, long fallback) const {
    auto v = raw(key);
    return v && !v->empty() ? to_integer(key, *v) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v || v->empty()) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + *v + "'");
  }

  std::optional<Eigen::VectorXd> vector(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) return std::nullopt;
    const auto items = split_list(*v);
    Eigen::VectorXd out(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) out(static_cast<Eigen::Index>(i)) = to_real(key, items[i]);
    return out;
  }

  static double to_real(const std::string& key, const std::string& s) {
    try {
      return parse_double(s);
    } catch (const std::invalid_argument&) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
  }

  static long to_integer(const std::string& key, const std::string& s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
  }

 private:
  const pt::ptree& tree_;
};

std::size_t non_negative(const std::string& key, long v) {
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<Patch> parse_patches(const std::string& key, const std::string& s) {
  std::vector<Patch> out;
  for (const auto& item : split_list(s)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": patch '" + item + "' must be lo:hi");
    out.push_back({Reader::to_real(key, item.substr(0, colon)), Reader::to_real(key, item.substr(colon + 1))});
  }
  return out;
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  const Reader r(tree);
  for (const char* s : {"experiment", "model", "measurement", "schedule", "filter"})
    if (!r.has_section(s)) throw ConfigError(std::string(s) + ": required section is missing");

  ExperimentConfig cfg;
  cfg.id = r.require("experiment.id");
  {
    const auto s = r.require("experiment.seed");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ConfigError("experiment.seed: expected an unsigned integer, got '" + s + "'");
    cfg.seed = v;
  }
  cfg.output_dir = r.text("experiment.output", "runs/" + cfg.id);

  const auto model = r.require("model.type");
  if (model == "identity") cfg.model = ModelKind::identity;
  else if (model == "lorenz84") cfg.model = ModelKind::lorenz84;
  else if (model == "diffusion1d") cfg.model = ModelKind::diffusion1d;
  else throw ConfigError("model.type: unknown model '" + model + "' (identity, lorenz84, diffusion1d)");

  cfg.lorenz.a = r.real("lorenz84.a", cfg.lorenz.a);
  cfg.lorenz.b = r.real("lorenz84.b", cfg.lorenz.b);
  cfg.lorenz.F = r.real("lorenz84.F", cfg.lorenz.F);
  cfg.lorenz.G = r.real("lorenz84.G", cfg.lorenz.G);
  cfg.lorenz.dt = r.real("lorenz84.dt", cfg.lorenz.dt);
  cfg.lorenz.method = r.text("lorenz84.method", cfg.lorenz.method);

  cfg.diffusion.mesh = static_cast<int>(r.integer("diffusion1d.mesh", cfg.diffusion.mesh));
  cfg.diffusion.kl_modes = non_negative("diffusion1d.kl_modes",
                                        r.integer("diffusion1d.kl_modes", static_cast<long>(cfg.diffusion.kl_modes)));
  cfg.diffusion.prior_mean = r.real("diffusion1d.prior_mean", cfg.diffusion.prior_mean);
  cfg.diffusion.prior_std = r.real("diffusion1d.prior_std", cfg.diffusion.prior_std);
  cfg.diffusion.decay = r.real("diffusion1d.decay", cfg.diffusion.decay);
  if (auto p = r.raw("diffusion1d.patches"); p && !p->empty())
    cfg.diffusion.patches = parse_patches("diffusion1d.patches", *p);
  if (auto l = r.raw("diffusion1d.loads"); l && !l->empty()) cfg.diffusion.rhs_cases = split_list(*l);

  if (auto v = r.vector("prior.mean")) cfg.prior_mean = *v;
  if (auto v = r.vector("prior.std")) cfg.prior_std = *v;

  const auto truth = r.text("truth.type", "prior_sample");
  if (truth == "prior_sample") cfg.truth = TruthKind::prior_sample;
  else if (truth == "explicit") cfg.truth = TruthKind::explicit_value;
  else if (truth == "bimodal") cfg.truth = TruthKind::bimodal;
  else throw ConfigError("truth.type: unknown truth '" + truth + "' (prior_sample, explicit, bimodal)");
  if (auto v = r.vector("truth.value")) cfg.truth_value = *v;

  try {
    cfg.measurement = parse_measurement_kind(r.require("measurement.operator"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("measurement.operator: ") + e.what());
  }
  if (auto v = r.vector("measurement.noise_std")) cfg.noise_std = *v;
  else throw ConfigError("measurement.noise_std: required field is missing");
  cfg.repeat = static_cast<int>(r.integer("measurement.repeat", cfg.repeat));

  cfg.cycles = static_cast<int>(r.integer("schedule.cycles", cfg.cycles));
  cfg.span = r.real("schedule.span", cfg.span);
  cfg.initial_span = r.real("schedule.initial_span", cfg.initial_span);

  apply_filter_override(cfg, r.require("filter.type"));
  cfg.degree = static_cast<int>(r.integer("filter.degree", cfg.degree));
  if (cfg.filter == FilterKind::lbu) cfg.degree = 1;
  if (cfg.filter == FilterKind::nlbu2) cfg.degree = 2;
  cfg.members = non_negative("filter.members", r.integer("filter.members", static_cast<long>(cfg.members)));
  cfg.allow_high_degree = r.flag("filter.allow_high_degree", cfg.allow_high_degree);
  cfg.center = r.flag("filter.center", cfg.center);
  cfg.whiten = r.flag("filter.whiten", cfg.whiten);
  cfg.tol = r.real("filter.tol", cfg.tol);

  cfg.basis_degree = static_cast<int>(r.integer("basis.degree", cfg.basis_degree));
  cfg.measurement_degree = static_cast<int>(r.integer("basis.measurement_degree", cfg.measurement_degree));
  cfg.points = static_cast<int>(r.integer("basis.points", cfg.points));
  cfg.germ_cap = non_negative("basis.germ_cap", r.integer("basis.germ_cap", static_cast<long>(cfg.germ_cap)));

  cfg.kde_samples = non_negative("output.kde_samples", r.integer("output.kde_samples", static_cast<long>(cfg.kde_samples)));
  cfg.kde_points = non_negative("output.kde_points", r.integer("output.kde_points", static_cast<long>(cfg.kde_points)));
  cfg.quantile_samples = non_negative("output.quantile_samples",
                                      r.integer("output.quantile_samples", static_cast<long>(cfg.quantile_samples)));
  if (auto v = r.vector("output.quantiles")) cfg.quantile_probs.assign(v->data(), v->data() + v->size());

  validate(cfg);
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in);
}

void apply_filter_override(ExperimentConfig& cfg, const std::string& choice) {
  const auto colon = choice.find(':');
  const std::string name = choice.substr(0, colon);
  const std::optional<std::string> arg =
      colon == std::string::npos ? std::nullopt : std::optional<std::string>(choice.substr(colon + 1));
  if (name == "lbu") {
    cfg.filter = FilterKind::lbu;
    cfg.degree = 1;
  } else if (name == "nlbu2") {
    cfg.filter = FilterKind::nlbu2;
    cfg.degree = 2;
  } else if (name == "general") {
    cfg.filter = FilterKind::general;
    if (arg) cfg.degree = static_cast<int>(Reader::to_integer("filter.degree", *arg));
  } else if (name == "enkf") {
    cfg.filter = FilterKind::enkf;
    if (arg) cfg.members = non_negative("filter.members", Reader::to_integer("filter.members", *arg));
  } else {
    throw ConfigError("filter.type: unknown filter '" + choice + "' (lbu, nlbu2, general:<n>, enkf[:<members>])");
  }
}

std::size_t parameter_dim(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::identity: return static_cast<std::size_t>(cfg.prior_mean.size());
    case ModelKind::lorenz84: return 3;
    case ModelKind::diffusion1d: return cfg.diffusion.nodes();
  }
  return 0;
}

std::size_t base_measurement_dim(const ExperimentConfig& cfg) {
  if (cfg.model == ModelKind::diffusion1d) return cfg.diffusion.patches.size() * cfg.diffusion.rhs_cases.size();
  return parameter_dim(cfg);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.id.empty()) throw ConfigError("experiment.id: must not be empty");
  if (cfg.model == ModelKind::diffusion1d) {
    try {
      validate(cfg.diffusion);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (cfg.diffusion.patches.empty()) throw ConfigError("diffusion1d.patches: at least one patch is required");
    if (cfg.measurement != MeasurementKind::patch_average)
      throw ConfigError("measurement.operator: diffusion1d observes through patch_average");
  } else {
    if (cfg.measurement == MeasurementKind::patch_average)
      throw ConfigError("measurement.operator: patch_average needs the diffusion1d model");
    if (cfg.prior_mean.size() == 0) throw ConfigError("prior.mean: required for the " + to_string(cfg.model) + " model");
    if (cfg.prior_std.size() != cfg.prior_mean.size())
      throw ConfigError("prior.std: needs one entry per prior.mean entry");
    if ((cfg.prior_std.array() < 0.0).any()) throw ConfigError("prior.std: must be non-negative");
    if (cfg.model == ModelKind::lorenz84 && cfg.prior_mean.size() != 3)
      throw ConfigError("prior.mean: lorenz84 has a 3-dimensional state");
  }
  if (cfg.model == ModelKind::lorenz84) {
    if (!(cfg.lorenz.dt > 0.0)) throw ConfigError("lorenz84.dt: must be positive");
    if (cfg.lorenz.method != "rk4") throw ConfigError("lorenz84.method: only rk4 is available");
  } else if (cfg.span != 0.0 || cfg.initial_span != 0.0) {
    throw ConfigError("schedule.span: propagation spans apply to the lorenz84 model only");
  }
  if (cfg.span < 0.0) throw ConfigError("schedule.span: must be non-negative");
  if (cfg.initial_span < 0.0) throw ConfigError("schedule.initial_span: must be non-negative");
  if (cfg.cycles < 1) throw ConfigError("schedule.cycles: need at least one update cycle");

  if (cfg.truth == TruthKind::explicit_value) {
    const auto want = cfg.model == ModelKind::diffusion1d ? cfg.diffusion.kl_modes : parameter_dim(cfg);
    if (static_cast<std::size_t>(cfg.truth_value.size()) != want)
      throw ConfigError("truth.value: expected " + std::to_string(want) + " entries");
  }
  if (cfg.truth == TruthKind::bimodal && !(cfg.model == ModelKind::identity && parameter_dim(cfg) == 1))
    throw ConfigError("truth.type: the bimodal truth is defined for the scalar identity model");

  const auto r = base_measurement_dim(cfg);
  if (cfg.noise_std.size() != 1 && static_cast<std::size_t>(cfg.noise_std.size()) != r)
    throw ConfigError("measurement.noise_std: give one value or " + std::to_string(r));
  if ((cfg.noise_std.array() < 0.0).any()) throw ConfigError("measurement.noise_std: must be non-negative");
  if (cfg.repeat < 1) throw ConfigError("measurement.repeat: must be at least 1");

  if (cfg.filter == FilterKind::general) {
    if (cfg.degree < 0) throw ConfigError("filter.degree: must be non-negative");
    if (cfg.degree > kDefaultMaxUpdateDegree && !cfg.allow_high_degree)
      throw ConfigError("filter.degree: above " + std::to_string(kDefaultMaxUpdateDegree) +
                        " requires filter.allow_high_degree = true");
  }
  if (cfg.filter == FilterKind::enkf && cfg.members < 2) throw ConfigError("filter.members: need at least 2");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw ConfigError("filter.tol: must lie in (0, 1)");

  if (cfg.basis_degree < 1) throw ConfigError("basis.degree: must be at least 1");
  if (cfg.measurement_degree < 1) throw ConfigError("basis.measurement_degree: must be at least 1");
  if (cfg.points < 0) throw ConfigError("basis.points: must be non-negative");
  if (cfg.germ_cap != 0 && cfg.germ_cap < (cfg.model == ModelKind::diffusion1d ? 1 : parameter_dim(cfg)))
    throw ConfigError("basis.germ_cap: must be 0 or at least the parameter dimension");

  if (cfg.kde_samples < 2) throw ConfigError("output.kde_samples: need at least 2");
  if (cfg.kde_points < 2) throw ConfigError("output.kde_points: need at least 2");
  if (cfg.quantile_samples < 1) throw ConfigError("output.quantile_samples: need at least 1");
  for (double p : cfg.quantile_probs)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("output.quantiles: probabilities must lie in (0, 1)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::identity: return "identity";
    case ModelKind::lorenz84: return "lorenz84";
    case ModelKind::diffusion1d: return "diffusion1d";
  }
  return "unknown";
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::lbu: return "lbu";
    case FilterKind::nlbu2: return "nlbu2";
    case FilterKind::general: return "general";
    case FilterKind::enkf: return "enkf";
  }
  return "unknown";
}

}  // namespace polyfilter
