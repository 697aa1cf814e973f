#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyfilter/linalg.hpp"
#include "polyfilter/models.hpp"

namespace polyfilter {

/// A configuration problem, with the offending "section.key" as the prefix
/// of what().
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ModelKind { identity, lorenz84, diffusion1d };
enum class FilterKind { lbu, nlbu2, general, enkf };
enum class TruthKind {
  prior_sample,  // one draw from the prior
  explicit_value,
  bimodal,  // fresh draw per observation from the built-in non-Gaussian truth
};

struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  ModelKind model = ModelKind::identity;
  Lorenz84Config lorenz;
  Diffusion1dConfig diffusion;

  // Gaussian prior for the identity and Lorenz models (diagonal).
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd prior_std;

  TruthKind truth = TruthKind::prior_sample;
  /// State, parameter or (diffusion) germ coordinates of the truth.
  Eigen::VectorXd truth_value;

  MeasurementKind measurement = MeasurementKind::linear;
  /// One entry per base channel, or one entry broadcast to all.
  Eigen::VectorXd noise_std;
  /// Each observation is replicated this many times with independent noise.
  int repeat = 1;

  int cycles = 1;
  /// Propagation span between updates (Lorenz only, days).
  double span = 0.0;
  /// Propagation before the first update.
  double initial_span = 0.0;

  FilterKind filter = FilterKind::lbu;
  int degree = 1;
  bool allow_high_degree = false;
  bool center = true;
  bool whiten = true;
  std::size_t members = 1000;
  double tol = kDefaultPinvTolerance;

  int basis_degree = 3;
  int measurement_degree = 3;
  /// Gauss-Hermite points per germ; 0 picks them from the degrees.
  int points = 0;
  /// Re-parameterize the posterior by a Gaussian once it has more germs than
  /// this; 0 disables.
  std::size_t germ_cap = 0;

  std::size_t kde_samples = 20000;
  std::size_t kde_points = 256;
  std::vector<double> quantile_probs{0.05, 0.25, 0.5, 0.75, 0.95};
  std::size_t quantile_samples = 20000;
};

/// Reads an INI-style file. Throws ConfigError for malformed or missing fields.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::istream& in);

/// Cross-field checks; throws ConfigError naming the field.
void validate(const ExperimentConfig& cfg);

/// Applies a --filter override: lbu, nlbu2, general:<n> or enkf[:<members>].
void apply_filter_override(ExperimentConfig& cfg, const std::string& choice);

/// Number of noise-free measurement channels before replication.
std::size_t base_measurement_dim(const ExperimentConfig& cfg);
/// Parameter dimension M of the filtered random variable.
std::size_t parameter_dim(const ExperimentConfig& cfg);

std::string to_string(ModelKind kind);
std::string to_string(FilterKind kind);

}  // namespace polyfilter
