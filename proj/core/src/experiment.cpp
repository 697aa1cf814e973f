#include "polyfilter/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "polyfilter/kde.hpp"
#include "polyfilter/models.hpp"
#include "polyfilter/rng.hpp"
#include "polyfilter/text_io.hpp"
#include "polyfilter/update.hpp"

namespace polyfilter {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> variable_names(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  const auto m = parameter_dim(cfg);
  if (cfg.model == ModelKind::lorenz84) return {"x", "y", "z"};
  for (std::size_t i = 0; i < m; ++i)
    names.push_back(cfg.model == ModelKind::diffusion1d ? "log_kappa_" + std::to_string(i)
                    : m == 1                             ? std::string("q")
                                                         : "q_" + std::to_string(i));
  return names;
}

PceVector make_prior(const ExperimentConfig& cfg) {
  if (cfg.model == ModelKind::diffusion1d) return diffusion_prior(cfg.diffusion);
  // Only components with spread get a germ.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < cfg.prior_std.size(); ++i)
    if (cfg.prior_std(i) > 0.0) active.push_back(i);
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(cfg.prior_mean.size(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k)
    factor(active[k], static_cast<Eigen::Index>(k)) = cfg.prior_std(active[k]);
  auto prior = PceVector::gaussian(cfg.prior_mean, factor);
  prior.set_label(cfg.model == ModelKind::lorenz84 ? "state" : "q");
  return prior;
}

Eigen::VectorXd draw_germs(Rng& rng, std::size_t n) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.gaussian();
  return theta;
}

Eigen::VectorXd eval(const PceVector& q, const Eigen::VectorXd& theta) {
  return q.evaluate(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
}

Eigen::VectorXd initial_truth(const ExperimentConfig& cfg, const PceVector& prior) {
  if (cfg.truth == TruthKind::bimodal) return bimodal_truth().mean();
  if (cfg.truth == TruthKind::explicit_value)
    return cfg.model == ModelKind::diffusion1d ? eval(prior, cfg.truth_value) : cfg.truth_value;
  Rng rng(cfg.seed, "truth", 0);
  return eval(prior, draw_germs(rng, prior.germ_dim()));
}

PceVector replicate(const PceVector& y, int repeat) {
  PceVector out = y;
  for (int i = 1; i < repeat; ++i) out = stack(out, y);
  out.set_label(y.label());
  return out;
}

Eigen::VectorXd tile(const Eigen::VectorXd& v, int repeat) {
  Eigen::VectorXd out(v.size() * repeat);
  for (int i = 0; i < repeat; ++i) out.segment(i * v.size(), v.size()) = v;
  return out;
}

double trace_of(const PceVector& q) { return covariance(q, q).trace(); }

int auto_points(const ExperimentConfig& cfg, int degree) {
  return cfg.points > 0 ? cfg.points : projection_points(degree, degree + 2);
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {
    op_.kind = cfg.measurement;
    if (cfg.model == ModelKind::diffusion1d) {
      op_.patches = cfg.diffusion.patches;
      op_.mesh = cfg.diffusion.mesh;
    }
    const auto r = static_cast<Eigen::Index>(base_measurement_dim(cfg));
    Eigen::VectorXd std_base =
        cfg.noise_std.size() == 1 ? Eigen::VectorXd::Constant(r, cfg.noise_std(0)) : cfg.noise_std;
    noise_std_ = tile(std_base, cfg.repeat);
    noise_cov_ = noise_std_.array().square().matrix().asDiagonal();
    op_.noise_cov = noise_cov_;
    identity_forward_ = cfg.model != ModelKind::diffusion1d;
    forward_ = identity_forward_ ? ForwardModel([](const Eigen::VectorXd& q) { return q; })
                                 : ForwardModel([this](const Eigen::VectorXd& q) { return diffusion_forward(q); });
  }

  RunReport run();

 private:
  Eigen::VectorXd diffusion_forward(const Eigen::VectorXd& q) const {
    const auto nodes = static_cast<Eigen::Index>(cfg_.diffusion.nodes());
    Eigen::VectorXd out(nodes * static_cast<Eigen::Index>(cfg_.diffusion.rhs_cases.size()));
    for (std::size_t c = 0; c < cfg_.diffusion.rhs_cases.size(); ++c)
      out.segment(static_cast<Eigen::Index>(c) * nodes, nodes) =
          diffusion_solve(q, cfg_.diffusion.rhs_cases[c], cfg_.diffusion);
    return out;
  }

  Eigen::VectorXd measure(const Eigen::VectorXd& q) const { return observe(op_, forward_(q)); }

  PceVector predict(const PceVector& q) const {
    PceVector y;
    if (identity_forward_ && (op_.kind == MeasurementKind::linear || op_.kind == MeasurementKind::cubic)) {
      y = predicted_measurement_exact(op_, q);
    } else {
      const auto germs = q.germ_dim();
      const auto basis = make_index_set(total_degree_set(germs, cfg_.measurement_degree));
      const auto rule = tensor_gauss_hermite(germs, auto_points(cfg_, cfg_.measurement_degree));
      y = predicted_measurement(op_, q, forward_, basis, rule);
    }
    return replicate(y, cfg_.repeat);
  }

  PceVector propagate(const PceVector& q, double span) const {
    const auto germs = q.germ_dim();
    const auto basis = make_index_set(total_degree_set(germs, cfg_.basis_degree));
    const auto rule = tensor_gauss_hermite(germs, auto_points(cfg_, cfg_.basis_degree));
    return propagate_pce(q, span, cfg_.lorenz, basis, rule);
  }

  // Truth observation for one cycle: noise-free measurement (replicated)
  // plus seeded noise.
  Eigen::VectorXd observation(int cycle, const Eigen::VectorXd& truth) const {
    Eigen::VectorXd clean;
    if (cfg_.truth == TruthKind::bimodal) {
      const auto t = bimodal_truth();
      Rng rng(cfg_.seed, "truth", static_cast<std::uint64_t>(cycle));
      clean.resize(static_cast<Eigen::Index>(cfg_.repeat));
      for (int i = 0; i < cfg_.repeat; ++i) {
        const Eigen::VectorXd value = eval(t, draw_germs(rng, 1));
        clean(i) = measure(value)(0);
      }
    } else {
      clean = tile(measure(truth), cfg_.repeat);
    }
    Rng rng(cfg_.seed, "noise", static_cast<std::uint64_t>(cycle));
    return clean + noise_std_.cwiseProduct(draw_germs(rng, static_cast<std::size_t>(clean.size())));
  }

  const ExperimentConfig& cfg_;
  MeasurementOp op_;
  Eigen::VectorXd noise_std_;
  Eigen::MatrixXd noise_cov_;
  bool identity_forward_ = true;
  ForwardModel forward_;
};

struct CycleDiagnostics {
  double loss = kNaN;
  double condition_number = kNaN;
  bool pseudo_inverse = false;
};

Eigen::MatrixXd sample_quantiles(const Eigen::MatrixXd& samples, std::span<const double> probs) {
  Eigen::MatrixXd out(samples.cols(), static_cast<Eigen::Index>(probs.size()));
  for (Eigen::Index m = 0; m < samples.cols(); ++m) {
    std::vector<double> col(samples.col(m).data(), samples.col(m).data() + samples.rows());
    std::sort(col.begin(), col.end());
    for (std::size_t p = 0; p < probs.size(); ++p) {
      const double h = (static_cast<double>(col.size()) - 1.0) * probs[p];
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const auto hi = std::min(lo + 1, col.size() - 1);
      out(m, static_cast<Eigen::Index>(p)) = col[lo] + (h - static_cast<double>(lo)) * (col[hi] - col[lo]);
    }
  }
  return out;
}

void write_pdf(const std::filesystem::path& path, const Eigen::MatrixXd& samples,
               const std::vector<std::string>& names, std::size_t points) {
  CsvTable t;
  std::vector<KdeCurve> curves;
  for (Eigen::Index m = 0; m < samples.cols(); ++m) {
    t.header.push_back("x_" + names[static_cast<std::size_t>(m)]);
    t.header.push_back("density_" + names[static_cast<std::size_t>(m)]);
    std::vector<double> col(samples.col(m).data(), samples.col(m).data() + samples.rows());
    curves.push_back(kde(col, padded_grid(col, points), std::nullopt));
  }
  for (std::size_t i = 0; i < points; ++i) {
    std::vector<std::string> row;
    for (const auto& c : curves) {
      if (c.spike) {
        row.push_back(format_double(c.spike_location));
        row.push_back(i == 0 ? "inf" : "0");
      } else {
        row.push_back(format_double(c.x[i]));
        row.push_back(format_double(c.density[i]));
      }
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

RunReport Runner::run() {
  RunReport report;
  report.id = cfg_.id;
  report.variables = variable_names(cfg_);
  const bool write = !cfg_.output_dir.empty();
  if (write) std::filesystem::create_directories(cfg_.output_dir);
  const bool ensemble_mode = cfg_.filter == FilterKind::enkf;

  PceVector q = make_prior(cfg_);
  Eigen::VectorXd truth = initial_truth(cfg_, q);
  const Eigen::VectorXd truth_mean = truth;  // reference for the bimodal truth
  Ensemble ens;
  if (ensemble_mode) {
    ens.members = sample(q, cfg_.members, substream_seed(cfg_.seed, "enkf", 0));
    ens.seed = cfg_.seed;
  }
  auto current_trace = [&] { return ensemble_mode ? ens.covariance().trace() : trace_of(q); };

  // Sample sets for quantiles.csv: (time, cycle, stage, samples).
  struct Snapshot {
    double time;
    int cycle;
    std::string stage;
    Eigen::MatrixXd samples;
  };
  std::vector<Snapshot> snapshots;
  const auto quantile_base = substream_seed(cfg_.seed, "kde", 0);
  auto snapshot = [&](double time, int cycle, const std::string& stage) {
    const auto index = static_cast<std::uint64_t>(snapshots.size());
    Eigen::MatrixXd s = ensemble_mode ? ens.members
                                      : sample(q, cfg_.quantile_samples, substream_seed(quantile_base, "quantile", index));
    snapshots.push_back({time, cycle, stage, std::move(s)});
  };
  snapshot(0.0, 0, "prior");

  CsvTable diagnostics;
  diagnostics.header = {"cycle", "filter", "degree", "condition_number", "pseudo_inverse", "loss"};

  double time = 0.0;
  for (int c = 1; c <= cfg_.cycles; ++c) {
    try {
      CycleRow row;
      row.cycle = c;
      row.previous_trace = current_trace();
      const double span = c == 1 ? cfg_.initial_span : cfg_.span;
      if (cfg_.model == ModelKind::lorenz84 && span > 0.0) {
        truth = lorenz84_integrate(truth, span, cfg_.lorenz);
        if (ensemble_mode) {
          for (Eigen::Index i = 0; i < ens.members.rows(); ++i)
            ens.members.row(i) = lorenz84_integrate(ens.members.row(i).transpose(), span, cfg_.lorenz).transpose();
        } else {
          q = propagate(q, span);
        }
        time += span;
      } else if (cfg_.model != ModelKind::lorenz84) {
        time = c;
      }
      row.time = time;
      row.forecast_trace = current_trace();
      if (!ensemble_mode) report.forecasts.push_back(q);
      if (cfg_.model == ModelKind::lorenz84 && span > 0.0) snapshot(time, c, "forecast");

      const Eigen::VectorXd z_hat = observation(c, truth);
      CycleDiagnostics diag;
      if (ensemble_mode) {
        Eigen::MatrixXd y(ens.members.rows(), z_hat.size());
        for (Eigen::Index i = 0; i < ens.members.rows(); ++i)
          y.row(i) = tile(measure(ens.members.row(i).transpose()), cfg_.repeat).transpose();
        auto res = enkf_update(ens, y, noise_cov_, z_hat, substream_seed(cfg_.seed, "enkf", static_cast<std::uint64_t>(c)),
                               cfg_.tol);
        ens = std::move(res.posterior);
        diag.condition_number = res.condition_number;
        diag.pseudo_inverse = res.pseudo_inverse;
      } else {
        const PceVector y = predict(q);
        UpdateMap map;
        if (cfg_.filter == FilterKind::lbu) {
          auto res = lbu_update(q, y, noise_cov_, z_hat, cfg_.tol);
          map = std::move(res.map);
          q = std::move(res.posterior);
        } else {
          const auto z = add_measurement_noise(y, noise_cov_, std::max(q.germ_dim(), y.germ_dim()));
          if (cfg_.filter == FilterKind::nlbu2) {
            map = nlbu2_closed_form(z, q, cfg_.tol);
          } else {
            FitOptions opts;
            opts.center = cfg_.center;
            opts.whiten = cfg_.whiten;
            opts.allow_high_degree = cfg_.allow_high_degree;
            opts.tol = cfg_.tol;
            map = fit_update_map(z, q, cfg_.degree, opts);
          }
          q = apply_update_map(map, q, z, z_hat);
        }
        diag = {map.diagnostics.loss, map.diagnostics.condition_number, map.diagnostics.pseudo_inverse};
        if (cfg_.germ_cap > 0 && q.germ_dim() > cfg_.germ_cap) q = regerm_gaussian(q, cfg_.germ_cap);
        report.posteriors.push_back(q);
      }

      const Eigen::VectorXd reference = cfg_.truth == TruthKind::bimodal ? truth_mean : truth;
      report.truths.push_back(reference);
      row.posterior_trace = current_trace();
      row.posterior_mean = ensemble_mode ? ens.mean() : q.mean();
      row.rms_error = (row.posterior_mean - reference).norm() / std::sqrt(static_cast<double>(reference.size()));
      row.loss = diag.loss;
      row.condition_number = diag.condition_number;
      row.pseudo_inverse = diag.pseudo_inverse;
      row.germ_dim = ensemble_mode ? 0 : q.germ_dim();
      report.rows.push_back(row);
      snapshot(time, c, "posterior");

      diagnostics.rows.push_back({std::to_string(c), to_string(cfg_.filter), std::to_string(cfg_.degree),
                                  format_double(diag.condition_number), diag.pseudo_inverse ? "1" : "0",
                                  format_double(diag.loss)});
      if (write) {
        const auto pdf = cfg_.output_dir / ("pdf_" + std::to_string(c) + ".csv");
        write_pdf(pdf, ensemble_mode ? ens.members
                                     : sample(q, cfg_.kde_samples, substream_seed(cfg_.seed, "kde", static_cast<std::uint64_t>(c))),
                  report.variables, cfg_.kde_points);
        report.files.push_back(pdf);
        if (!ensemble_mode) {
          const auto pce = cfg_.output_dir / ("posterior_" + std::to_string(c) + ".pce");
          save_pce(pce, q);
          report.files.push_back(pce);
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("cycle " + std::to_string(c) + ": " + e.what());
    }
  }
  if (ensemble_mode) report.final_ensemble = ens;

  if (write) {
    CsvTable rep;
    rep.header = {"cycle", "time", "previous_trace", "forecast_trace", "posterior_trace", "loss",
                  "condition_number", "pseudo_inverse", "rms_error", "germ_dim"};
    for (const auto& v : report.variables) rep.header.push_back("mean_" + v);
    for (const auto& r : report.rows) {
      std::vector<std::string> cells{std::to_string(r.cycle), format_double(r.time), format_double(r.previous_trace),
                                     format_double(r.forecast_trace), format_double(r.posterior_trace),
                                     format_double(r.loss), format_double(r.condition_number),
                                     r.pseudo_inverse ? "1" : "0", format_double(r.rms_error),
                                     std::to_string(r.germ_dim)};
      for (Eigen::Index m = 0; m < r.posterior_mean.size(); ++m) cells.push_back(format_double(r.posterior_mean(m)));
      rep.rows.push_back(std::move(cells));
    }
    write_csv(cfg_.output_dir / "report.csv", rep);
    write_csv(cfg_.output_dir / "diagnostics.csv", diagnostics);

    CsvTable quant;
    quant.header = {"time", "cycle", "stage", "variable"};
    for (double p : cfg_.quantile_probs) quant.header.push_back("q" + format_double(p));
    for (const auto& s : snapshots) {
      const auto qs = sample_quantiles(s.samples, cfg_.quantile_probs);
      for (Eigen::Index m = 0; m < qs.rows(); ++m) {
        std::vector<std::string> cells{format_double(s.time), std::to_string(s.cycle), s.stage,
                                       report.variables[static_cast<std::size_t>(m)]};
        for (Eigen::Index p = 0; p < qs.cols(); ++p) cells.push_back(format_double(qs(m, p)));
        quant.rows.push_back(std::move(cells));
      }
    }
    write_csv(cfg_.output_dir / "quantiles.csv", quant);
    report.files.insert(report.files.begin(), {cfg_.output_dir / "report.csv", cfg_.output_dir / "diagnostics.csv",
                                               cfg_.output_dir / "quantiles.csv"});
  }
  return report;
}

}  // namespace

PceVector bimodal_truth() {
  auto basis = make_index_set(total_degree_set(1, 3));
  Eigen::MatrixXd c(1, 4);
  c << 1.0, 0.3, 0.1, 0.2;
  return PceVector(basis, c, "truth");
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  return Runner(cfg).run();
}

double rms_error(const PceVector& q, const Eigen::VectorXd& truth) {
  if (truth.size() != static_cast<Eigen::Index>(q.dim()))
    throw std::invalid_argument("rms_error: truth dimension does not match");
  return (q.mean() - truth).norm() / std::sqrt(static_cast<double>(truth.size()));
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("empirical_quantile: p must lie in (0, 1)");
  Eigen::MatrixXd m = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const double probs[] = {p};
  return sample_quantiles(m, probs)(0, 0);
}

std::vector<Eigen::MatrixXd> quantile_track(const std::vector<PceVector>& states, std::span<const double> probs,
                                            std::size_t samples, std::uint64_t seed) {
  for (double p : probs)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_track: probabilities must lie in (0, 1)");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(states.size());
  for (std::size_t t = 0; t < states.size(); ++t)
    out.push_back(sample_quantiles(sample(states[t], samples, substream_seed(seed, "quantile", t)), probs));
  return out;
}

double kde_l1_distance(const PceVector& a, const PceVector& b, std::size_t samples, std::size_t points,
                       std::uint64_t seed) {
  if (a.dim() != b.dim()) throw std::invalid_argument("kde_l1_distance: dimension mismatch");
  const Eigen::MatrixXd sa = sample(a, samples, seed);
  const Eigen::MatrixXd sb = sample(b, samples, seed);
  double total = 0.0;
  for (Eigen::Index m = 0; m < sa.cols(); ++m) {
    std::vector<double> xa(sa.col(m).data(), sa.col(m).data() + sa.rows());
    std::vector<double> xb(sb.col(m).data(), sb.col(m).data() + sb.rows());
    const auto ga = padded_grid(xa, points);
    const auto gb = padded_grid(xb, points);
    const GridSpec grid{std::min(ga.lo, gb.lo), std::max(ga.hi, gb.hi), points};
    total += l1_distance(kde(xa, grid), kde(xb, grid));
  }
  return total;
}

}  // namespace polyfilter
