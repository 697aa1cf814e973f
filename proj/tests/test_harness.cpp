#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "polyfilter/config.hpp"
#include "polyfilter/experiment.hpp"
#include "polyfilter/kde.hpp"
#include "polyfilter/text_io.hpp"
#include "support.hpp"

namespace polyfilter {
namespace {

namespace fs = std::filesystem;
using test::Gen;

const char* kIdentityConfig = R"(
[experiment]
id = unit-identity
seed = 7

[model]
type = identity

[prior]
mean = 0.3
std = 1.2

[truth]
type = prior_sample

[measurement]
operator = linear
noise_std = 0.4

[schedule]
cycles = 10

[filter]
type = lbu
)";

// An empty output key falls back to runs/<id>, so tests clear it explicitly.
ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  auto cfg = parse_config(in);
  cfg.output_dir.clear();
  return cfg;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::logic_error("pattern not found: " + from);
  return text.replace(pos, from.size(), to);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesIdentityConfig) {
  const auto cfg = parse(kIdentityConfig);
  EXPECT_EQ(cfg.id, "unit-identity");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.model, ModelKind::identity);
  EXPECT_EQ(cfg.cycles, 10);
  EXPECT_EQ(cfg.filter, FilterKind::lbu);
  EXPECT_TRUE(cfg.output_dir.empty());
  ASSERT_EQ(cfg.prior_std.size(), 1);
  EXPECT_DOUBLE_EQ(cfg.prior_std(0), 1.2);
}

TEST(Config, FieldPreciseErrors) {
  EXPECT_EQ(config_error(replace(kIdentityConfig, "seed = 7", "")).rfind("experiment.seed:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "seed = 7", "seed = -3")).rfind("experiment.seed:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "type = identity", "type = heat")).rfind("model.type:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "operator = linear", "operator = square"))
                .rfind("measurement.operator:", 0),
            0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "cycles = 10", "cycles = 0")).rfind("schedule.cycles:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "cycles = 10", "cycles = ten")).rfind("schedule.cycles:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "std = 1.2", "std = 1.2, 3")).rfind("prior.std:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "type = lbu", "type = ukf")).rfind("filter.type:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "cycles = 10", "cycles = 10\nspan = 1")).rfind("schedule.span:", 0),
            0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "[filter]", "[nothing]")).rfind("filter:", 0), 0u);
  EXPECT_EQ(config_error(replace(kIdentityConfig, "type = lbu", "type = general:5")).rfind("filter.degree:", 0), 0u);
}

TEST(Config, FilterOverride) {
  auto cfg = parse(kIdentityConfig);
  apply_filter_override(cfg, "general:3");
  EXPECT_EQ(cfg.filter, FilterKind::general);
  EXPECT_EQ(cfg.degree, 3);
  apply_filter_override(cfg, "enkf:500");
  EXPECT_EQ(cfg.filter, FilterKind::enkf);
  EXPECT_EQ(cfg.members, 500u);
  EXPECT_THROW(apply_filter_override(cfg, "kalman"), ConfigError);
}

TEST(Config, FixturesValidate) {
  for (const char* f : {"exp-B-1", "exp-B-2", "exp-B-7", "exp-NB-5", "exp-NB-9", "exp-NB-10"}) {
    const auto path = fs::path(POLYFILTER_FIXTURE_DIR) / (std::string(f) + ".ini");
    EXPECT_NO_THROW(load_config(path)) << f;
    EXPECT_EQ(load_config(path).id, f);
  }
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(RunExperiment, ConjugateRecursionOverTenCycles) {
  const auto cfg = parse(kIdentityConfig);
  const auto report = run_experiment(cfg);
  ASSERT_EQ(report.rows.size(), 10u);
  const double sf2 = 1.2 * 1.2, se2 = 0.4 * 0.4;
  for (int c = 1; c <= 10; ++c) {
    const auto& row = report.rows[static_cast<std::size_t>(c - 1)];
    EXPECT_EQ(row.cycle, c);
    const double expected = sf2 * se2 / (se2 + c * sf2);
    EXPECT_NEAR(row.posterior_trace, expected, 1e-8 * expected);
    EXPECT_LT(row.posterior_trace, row.forecast_trace);
  }
  EXPECT_TRUE(report.files.empty());
}

TEST(RunExperiment, ZeroNoiseRecoversTruth) {
  auto cfg = parse(replace(replace(kIdentityConfig, "noise_std = 0.4", "noise_std = 0"), "cycles = 10", "cycles = 1"));
  const auto report = run_experiment(cfg);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_NEAR(report.rows[0].posterior_mean(0), report.truths[0](0), 1e-9);
  EXPECT_NEAR(report.rows[0].rms_error, 0.0, 1e-9);
}

TEST(RunExperiment, DeterministicArtifacts) {
  const auto base = fs::temp_directory_path() / "polyfilter_determinism";
  fs::remove_all(base);
  auto cfg = load_config(fs::path(POLYFILTER_FIXTURE_DIR) / "exp-NB-10.ini");
  cfg.cycles = 2;
  cfg.kde_samples = 2000;
  cfg.quantile_samples = 2000;
  cfg.output_dir = base / "a";
  const auto ra = run_experiment(cfg);
  cfg.output_dir = base / "b";
  const auto rb = run_experiment(cfg);
  ASSERT_EQ(ra.files.size(), rb.files.size());
  ASSERT_FALSE(ra.files.empty());
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    EXPECT_EQ(ra.files[i].filename(), rb.files[i].filename());
    EXPECT_EQ(slurp(ra.files[i]), slurp(rb.files[i])) << ra.files[i];
  }
  for (const char* name : {"report.csv", "diagnostics.csv", "quantiles.csv", "pdf_1.csv", "posterior_2.pce"})
    EXPECT_TRUE(fs::exists(base / "a" / name)) << name;

  const auto report = read_csv(base / "a" / "report.csv");
  EXPECT_EQ(report.rows.size(), 2u);
  EXPECT_NO_THROW(report.column("mean_x"));
  const auto posterior = load_pce(base / "a" / "posterior_2.pce");
  EXPECT_EQ(posterior.mean(), ra.rows[1].posterior_mean);
  fs::remove_all(base);
}

TEST(RunExperiment, EnkfFilterRuns) {
  auto cfg = parse(replace(kIdentityConfig, "cycles = 10", "cycles = 3"));
  apply_filter_override(cfg, "enkf:4000");
  const auto report = run_experiment(cfg);
  ASSERT_TRUE(report.final_ensemble.has_value());
  EXPECT_EQ(report.final_ensemble->size(), 4000);
  const double sf2 = 1.44, se2 = 0.16;
  const double expected = sf2 * se2 / (se2 + 3 * sf2);
  EXPECT_NEAR(report.rows.back().posterior_trace, expected, 0.1 * expected);
}

// A single realization of the identification error is noisy, so the curve
// shape is checked on the seed average after a 3-cycle moving average.
TEST(RunExperiment, DiffusionErrorLevelsOff) {
  auto cfg = load_config(fs::path(POLYFILTER_FIXTURE_DIR) / "exp-B-7.ini");
  cfg.output_dir.clear();
  constexpr int seeds = 8;
  std::vector<double> mean(static_cast<std::size_t>(cfg.cycles), 0.0);
  for (int s = 1; s <= seeds; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const auto report = run_experiment(cfg);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += report.rows[c].rms_error / seeds;
  }
  std::vector<double> smooth;
  for (std::size_t c = 1; c + 1 < mean.size(); ++c) smooth.push_back((mean[c - 1] + mean[c] + mean[c + 1]) / 3.0);
  for (std::size_t c = 1; c < smooth.size(); ++c) EXPECT_LE(smooth[c], smooth[c - 1]) << c;
  const double drop = mean.front() - mean.back();
  EXPECT_GT(drop, 0.0);
  EXPECT_LT(mean[6] - mean[9], 0.1 * drop);
}

TEST(Kde, StandardNormalPeak) {
  Gen gen(91);
  std::vector<double> s(100000);
  for (auto& x : s) x = gen.normal();
  const auto curve = kde(s, GridSpec{-5.0, 5.0, 1001});
  EXPECT_NEAR(curve.density[500], 1.0 / std::sqrt(2.0 * std::numbers::pi), 0.01);
  EXPECT_NEAR(integral(curve), 1.0, 1e-3);
  EXPECT_NEAR(curve.bandwidth, 1.06 * std::pow(1e5, -0.2), 0.01);
}

TEST(Kde, TwoPointSymmetry) {
  const std::vector<double> s{-1.0, 1.0};
  const auto curve = kde(s, GridSpec{-2.0, 2.0, 401}, 0.1);
  for (std::size_t i = 0; i < 401; ++i) EXPECT_NEAR(curve.density[i], curve.density[400 - i], 1e-14);
  EXPECT_GT(curve.density[100], 10.0 * curve.density[200]);
  EXPECT_NEAR(integral(curve), 1.0, 1e-3);
}

TEST(Kde, SpikeAndErrors) {
  const std::vector<double> same{2.0, 2.0, 2.0};
  const auto curve = kde(same, GridSpec{0.0, 4.0, 10});
  EXPECT_TRUE(curve.spike);
  EXPECT_EQ(curve.spike_location, 2.0);
  EXPECT_THROW(kde(std::vector<double>{1.0}, GridSpec{}), std::invalid_argument);
  EXPECT_THROW(kde(std::vector<double>{1.0, 2.0}, GridSpec{1.0, 1.0, 10}), std::invalid_argument);
  const auto a = kde(std::vector<double>{0.0, 1.0}, GridSpec{0.0, 1.0, 10});
  const auto b = kde(std::vector<double>{0.0, 1.0}, GridSpec{0.0, 2.0, 10});
  EXPECT_THROW(l1_distance(a, b), std::invalid_argument);
  EXPECT_EQ(l1_distance(a, a), 0.0);
}

TEST(QuantileTrack, Examples) {
  const auto d = PceVector::constant(Eigen::Vector2d(1.0, -3.0), 1);
  const std::vector<double> probs{0.05, 0.5, 0.95};
  const auto flat = quantile_track({d}, probs, 100, 3);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0].row(0), Eigen::RowVector3d::Constant(1.0));
  EXPECT_EQ(flat[0].row(1), Eigen::RowVector3d::Constant(-3.0));

  const auto h1 = PceVector::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  constexpr std::size_t n = 200000;
  const std::vector<double> quartiles{0.25, 0.5, 0.75};
  const auto q = quantile_track({h1}, quartiles, n, 4)[0];
  EXPECT_NEAR(q(0, 1), 0.0, 4.0 * 1.2533 / std::sqrt(double(n)));
  EXPECT_NEAR((q(0, 2) - q(0, 0)) / 1.3489795, 1.0, 0.02);
}

TEST(EmpiricalQuantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(empirical_quantile({3.0, 1.0, 2.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(empirical_quantile({3.0, 1.0, 2.0, 4.0}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(empirical_quantile({5.0}, 0.9), 5.0);
  EXPECT_THROW(empirical_quantile({1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST(RmsError, Examples) {
  const auto q = PceVector::constant(Eigen::Vector3d(1.0, 2.0, 3.0), 1);
  EXPECT_EQ(rms_error(q, Eigen::Vector3d(1.0, 2.0, 3.0)), 0.0);
  EXPECT_DOUBLE_EQ(rms_error(PceVector::constant(Eigen::VectorXd::Constant(1, 3.0), 1), Eigen::VectorXd::Constant(1, 2.0)),
                   1.0);
  const auto p = PceVector::constant(Eigen::Vector3d(3.0, 1.0, 2.0), 1);
  EXPECT_DOUBLE_EQ(rms_error(q, Eigen::Vector3d(0.0, 0.5, 2.0)), rms_error(p, Eigen::Vector3d(2.0, 0.0, 0.5)));
}

TEST(BimodalTruth, HasTwoHumps) {
  const auto t = bimodal_truth();
  EXPECT_EQ(t.germ_dim(), 1u);
  EXPECT_DOUBLE_EQ(t.mean()(0), 1.0);
  const auto s = sample(t, 200000, 12);
  std::vector<double> col(s.data(), s.data() + s.rows());
  // The cubic tails are long, so resolve the humps on a fixed window.
  const auto curve = kde(col, GridSpec{0.5, 1.5, 201});
  // Ignore the far tails where the estimate is numerically zero.
  const double top = *std::max_element(curve.density.begin(), curve.density.end());
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < curve.density.size(); ++i)
    if (curve.density[i] > 0.01 * top && curve.density[i] > curve.density[i - 1] &&
        curve.density[i] > curve.density[i + 1])
      ++peaks;
  EXPECT_EQ(peaks, 2);
}

#ifdef POLYFILTER_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(POLYFILTER_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ValidateRunAndReport) {
  const auto fixture = fs::path(POLYFILTER_FIXTURE_DIR) / "exp-B-1.ini";
  EXPECT_EQ(run_cli("validate " + fixture.string()), 0);
  const auto bad = fs::temp_directory_path() / "polyfilter_bad.ini";
  {
    std::ofstream out(bad);
    out << replace(kIdentityConfig, "type = identity", "type = heat");
  }
  EXPECT_EQ(run_cli("validate " + bad.string()), 2);
  EXPECT_NE(run_cli("validate /nonexistent.ini"), 0);

  const auto out = fs::temp_directory_path() / "polyfilter_cli_run";
  fs::remove_all(out);
  EXPECT_EQ(run_cli("run " + fixture.string() + " --seed 5 --filter lbu --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_EQ(run_cli("report " + out.string()), 0);
  EXPECT_NE(run_cli("report " + (out / "missing").string()), 0);
  fs::remove_all(out);
  fs::remove(bad);
}
#endif

}  // namespace
}  // namespace polyfilter
