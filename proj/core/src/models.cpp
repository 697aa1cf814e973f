#include "polyfilter/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "polyfilter/chaos_algebra.hpp"

namespace polyfilter {

Eigen::Vector3d lorenz84_rhs(const Eigen::Vector3d& s, const Lorenz84Config& cfg) {
  const double x = s(0), y = s(1), z = s(2);
  return {-y * y - z * z - cfg.a * x + cfg.a * cfg.F,
          x * y - cfg.b * x * z - y + cfg.G,
          cfg.b * x * y + x * z - z};
}

Eigen::Vector3d rk4_step(const Eigen::Vector3d& s, double h, const Lorenz84Config& cfg) {
  const Eigen::Vector3d k1 = lorenz84_rhs(s, cfg);
  const Eigen::Vector3d k2 = lorenz84_rhs(s + 0.5 * h * k1, cfg);
  const Eigen::Vector3d k3 = lorenz84_rhs(s + 0.5 * h * k2, cfg);
  const Eigen::Vector3d k4 = lorenz84_rhs(s + h * k3, cfg);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::Vector3d lorenz84_integrate(const Eigen::Vector3d& state, double t_span, const Lorenz84Config& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("lorenz84: dt must be positive");
  if (t_span < 0.0) throw std::invalid_argument("lorenz84: negative time span");
  if (cfg.method != "rk4") throw std::invalid_argument("lorenz84: unknown integrator '" + cfg.method + "'");
  if (t_span == 0.0) return state;
  const auto steps = static_cast<long>(std::ceil(t_span / cfg.dt - 1e-9));
  const double h = t_span / static_cast<double>(steps);
  Eigen::Vector3d s = state;
  for (long i = 0; i < steps; ++i) s = rk4_step(s, h, cfg);
  if (!s.allFinite()) throw std::overflow_error("lorenz84: state became non-finite");
  return s;
}

PceVector propagate_pce(const PceVector& state, double t_span, const Lorenz84Config& cfg,
                        const IndexSetPtr& basis, const QuadratureRule& rule) {
  if (state.dim() != 3) throw std::invalid_argument("propagate_pce: state must be 3-dimensional");
  if (rule.dimension() < state.germ_dim())
    throw std::invalid_argument("propagate_pce: rule covers fewer germs than the state");
  Eigen::MatrixXd values(3, static_cast<Eigen::Index>(rule.size()));
  std::vector<double> theta(rule.dimension());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k)
      theta[k] = rule.nodes()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    const Eigen::Vector3d s0 = state.evaluate(theta);
    values.col(static_cast<Eigen::Index>(i)) = lorenz84_integrate(s0, t_span, cfg);
  }
  auto out = project_values(values, basis, rule);
  out.set_label(state.label());
  return out;
}

void validate(const Diffusion1dConfig& cfg) {
  if (cfg.mesh < 2) throw std::invalid_argument("diffusion1d.mesh: need at least 2 elements");
  if (cfg.kl_modes == 0) throw std::invalid_argument("diffusion1d.kl_modes: must be positive");
  if (!(cfg.prior_std >= 0.0)) throw std::invalid_argument("diffusion1d.prior_std: must be non-negative");
  for (std::size_t i = 0; i < cfg.patches.size(); ++i) {
    const auto& p = cfg.patches[i];
    if (!(p.lo >= 0.0 && p.hi <= 1.0 && p.lo < p.hi))
      throw std::invalid_argument("diffusion1d.patches[" + std::to_string(i) + "]: interval must lie in [0,1]");
    if (i > 0 && p.lo < cfg.patches[i - 1].hi)
      throw std::invalid_argument("diffusion1d.patches[" + std::to_string(i) +
                                  "]: patches must be sorted and disjoint");
  }
  if (cfg.rhs_cases.empty()) throw std::invalid_argument("diffusion1d.rhs_cases: need at least one load");
  for (const auto& id : cfg.rhs_cases)
    if (!is_known_load(id)) throw std::invalid_argument("diffusion1d.rhs_cases: unknown load '" + id + "'");
}

bool is_known_load(std::string_view id) {
  return id == "one" || id == "sin1" || id == "left" || id == "right" || id == "ramp" || id == "hat";
}

double diffusion_load(std::string_view id, double x) {
  if (id == "one") return 1.0;
  if (id == "sin1") return std::sin(std::numbers::pi * x);
  if (id == "left") return x < 0.5 ? 2.0 : 0.0;
  if (id == "right") return x >= 0.5 ? 2.0 : 0.0;
  if (id == "ramp") return 2.0 * x;
  if (id == "hat") return std::max(0.0, 2.0 - 8.0 * std::abs(x - 0.5));
  throw std::invalid_argument("unknown load id '" + std::string(id) + "'");
}

Eigen::VectorXd diffusion_solve(const Eigen::VectorXd& q_nodes, std::string_view load,
                                const Diffusion1dConfig& cfg) {
  const int n = cfg.mesh;
  if (q_nodes.size() != n + 1) throw std::invalid_argument("diffusion_solve: field size must be mesh + 1");
  const double h = 1.0 / n;
  Eigen::VectorXd kappa(n);
  for (int e = 0; e < n; ++e) {
    kappa(e) = std::exp(0.5 * (q_nodes(e) + q_nodes(e + 1)));
    if (!std::isfinite(kappa(e)) || kappa(e) <= 0.0)
      throw std::domain_error("diffusion_solve: non-finite conductivity in element " + std::to_string(e));
  }
  // Interior unknowns 1..n-1; tridiagonal stiffness, two-point Gauss load.
  const int m = n - 1;
  Eigen::VectorXd diag(m), off(std::max(m - 1, 0)), rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) diag(i) = (kappa(i) + kappa(i + 1)) / h;
  for (int i = 0; i + 1 < m; ++i) off(i) = -kappa(i + 1) / h;
  const double g = 0.5 / std::sqrt(3.0);
  for (int e = 0; e < n; ++e) {
    for (double s : {0.5 - g, 0.5 + g}) {
      const double w = 0.5 * h * diffusion_load(load, (e + s) * h);
      // Element e spans nodes e, e+1; interior index of node j is j-1.
      if (e >= 1) rhs(e - 1) += w * (1.0 - s);
      if (e + 1 <= m) rhs(e) += w * s;
    }
  }
  // Thomas algorithm.
  Eigen::VectorXd c(m), d(m);
  c(0) = m > 1 ? off(0) / diag(0) : 0.0;
  d(0) = rhs(0) / diag(0);
  for (int i = 1; i < m; ++i) {
    const double denom = diag(i) - off(i - 1) * c(i - 1);
    c(i) = i + 1 < m ? off(i) / denom : 0.0;
    d(i) = (rhs(i) - off(i - 1) * d(i - 1)) / denom;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  u(m) = d(m - 1);
  for (int i = m - 2; i >= 0; --i) u(i + 1) = d(i) - c(i) * u(i + 2);
  return u;
}

PceVector diffusion_prior(const Diffusion1dConfig& cfg) {
  validate(cfg);
  const auto nodes = static_cast<Eigen::Index>(cfg.nodes());
  const auto k = static_cast<Eigen::Index>(cfg.kl_modes);
  Eigen::MatrixXd factor(nodes, k);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    const double x = static_cast<double>(i) / cfg.mesh;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double phi = j == 0 ? 1.0 : std::sqrt(2.0) * std::cos(static_cast<double>(j) * std::numbers::pi * x);
      factor(i, j) = cfg.prior_std * std::pow(static_cast<double>(j + 1), -cfg.decay) * phi;
    }
  }
  auto prior = PceVector::gaussian(Eigen::VectorXd::Constant(nodes, cfg.prior_mean), factor);
  prior.set_label("log_kappa");
  return prior;
}

MeasurementKind parse_measurement_kind(std::string_view name) {
  if (name == "linear") return MeasurementKind::linear;
  if (name == "cubic") return MeasurementKind::cubic;
  if (name == "quad_sign") return MeasurementKind::quad_sign;
  if (name == "patch_average") return MeasurementKind::patch_average;
  throw std::invalid_argument("unknown measurement kind '" + std::string(name) + "'");
}

std::string_view to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::linear: return "linear";
    case MeasurementKind::cubic: return "cubic";
    case MeasurementKind::quad_sign: return "quad_sign";
    case MeasurementKind::patch_average: return "patch_average";
  }
  return "unknown";
}

Eigen::VectorXd observe(const MeasurementOp& op, const Eigen::VectorXd& s) {
  switch (op.kind) {
    case MeasurementKind::linear: return s;
    case MeasurementKind::cubic: return s.array().cube().matrix();
    case MeasurementKind::quad_sign: return (s.array() * s.array().abs()).matrix();
    case MeasurementKind::patch_average: {
      const Eigen::Index nodes = op.mesh + 1;
      if (op.mesh < 1 || s.size() % nodes != 0)
        throw std::invalid_argument("observe: field size is not a multiple of the mesh node count");
      const Eigen::Index cases = s.size() / nodes;
      Eigen::VectorXd out(cases * static_cast<Eigen::Index>(op.patches.size()));
      Eigen::Index r = 0;
      for (Eigen::Index c = 0; c < cases; ++c) {
        const auto u = s.segment(c * nodes, nodes);
        for (const auto& p : op.patches) {
          double sum = 0.0;
          int count = 0;
          for (Eigen::Index i = 0; i < nodes; ++i) {
            const double x = static_cast<double>(i) / op.mesh;
            if (x >= p.lo - 1e-12 && x <= p.hi + 1e-12) {
              sum += u(i);
              ++count;
            }
          }
          if (count == 0) {
            // Patch narrower than an element: interpolate at its centre.
            const double x = 0.5 * (p.lo + p.hi) * op.mesh;
            const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), nodes - 2);
            const double t = x - static_cast<double>(i);
            sum = (1.0 - t) * u(i) + t * u(i + 1);
            count = 1;
          }
          out(r++) = sum / count;
        }
      }
      return out;
    }
  }
  throw std::invalid_argument("observe: unknown measurement kind");
}

PceVector predicted_measurement(const MeasurementOp& op, const PceVector& q, const ForwardModel& forward,
                                const IndexSetPtr& basis, const QuadratureRule& rule) {
  if (rule.dimension() < q.germ_dim())
    throw std::invalid_argument("predicted_measurement: rule covers fewer germs than the parameter");
  Eigen::MatrixXd values;
  std::vector<double> theta(rule.dimension());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k)
      theta[k] = rule.nodes()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    const Eigen::VectorXd y = observe(op, forward(q.evaluate(theta)));
    if (i == 0) values.resize(y.size(), static_cast<Eigen::Index>(rule.size()));
    values.col(static_cast<Eigen::Index>(i)) = y;
  }
  auto out = project_values(values, basis, rule);
  out.set_label("y");
  return out;
}

PceVector predicted_measurement_exact(const MeasurementOp& op, const PceVector& q) {
  if (op.kind == MeasurementKind::linear) {
    PceVector y = q;
    y.set_label("y");
    return y;
  }
  if (op.kind != MeasurementKind::cubic)
    throw std::invalid_argument("predicted_measurement_exact: operator '" + std::string(to_string(op.kind)) +
                                "' is not polynomial");
  std::vector<SparseChaos> rows;
  rows.reserve(q.dim());
  for (std::size_t m = 0; m < q.dim(); ++m) {
    const auto r = to_sparse(q, m);
    rows.push_back(multiply(multiply(r, r), r));
  }
  auto y = from_sparse(rows, q.germ_dim());
  y.set_label("y");
  return y;
}

}  // namespace polyfilter
