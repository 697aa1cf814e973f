#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polyfilter/pce.hpp"
#include "polyfilter/quadrature.hpp"

namespace polyfilter {

// ---------------------------------------------------------------- Lorenz-84

/// x' = -y^2 - z^2 - a x + a F,  y' = x y - b x z - y + G,  z' = b x y + x z - z.
/// Time is measured in days.
struct Lorenz84Config {
  double a = 0.25;
  double b = 4.0;
  double F = 8.0;
  double G = 1.0;
  double dt = 0.05;
  std::string method = "rk4";
};

Eigen::Vector3d lorenz84_rhs(const Eigen::Vector3d& state, const Lorenz84Config& cfg);

/// One classical Runge-Kutta step of size h.
Eigen::Vector3d rk4_step(const Eigen::Vector3d& state, double h, const Lorenz84Config& cfg);

/// Integrates over t_span with ceil(t_span / dt) equal RK4 steps. Throws
/// std::overflow_error on a non-finite state.
Eigen::Vector3d lorenz84_integrate(const Eigen::Vector3d& state, double t_span, const Lorenz84Config& cfg);

/// Non-intrusive propagation: every rule node is evaluated, integrated and
/// projected back onto `basis`.
PceVector propagate_pce(const PceVector& state, double t_span, const Lorenz84Config& cfg,
                        const IndexSetPtr& basis, const QuadratureRule& rule);

// ----------------------------------------------------------- 1D diffusion

struct Patch {
  double lo = 0.0;
  double hi = 0.0;
};

/// -(kappa u')' = f on [0,1], u(0) = u(1) = 0, kappa = exp(q), linear elements.
/// The prior is q(x) = mean + sum_k sigma_k theta_k phi_k(x) with phi_0 = 1,
/// phi_k = sqrt(2) cos(k pi x) and sigma_k = prior_std (k+1)^{-decay}.
struct Diffusion1dConfig {
  int mesh = 64;
  std::size_t kl_modes = 4;
  double prior_mean = 0.0;
  double prior_std = 0.5;
  double decay = 1.5;
  std::vector<Patch> patches;
  std::vector<std::string> rhs_cases{"one"};

  std::size_t nodes() const { return static_cast<std::size_t>(mesh) + 1; }
};

/// Throws std::invalid_argument naming the offending field.
void validate(const Diffusion1dConfig& cfg);

/// Load ids: one, sin1, left, right, ramp, hat.
double diffusion_load(std::string_view id, double x);
bool is_known_load(std::string_view id);

/// Nodal solution for nodal log-conductivities q (size mesh+1). The element
/// conductivity is exp of the average of its two nodal values.
Eigen::VectorXd diffusion_solve(const Eigen::VectorXd& q_nodes, std::string_view load,
                                const Diffusion1dConfig& cfg);

/// Gaussian prior of the nodal field over kl_modes germs.
PceVector diffusion_prior(const Diffusion1dConfig& cfg);

// ------------------------------------------------------------ measurement

enum class MeasurementKind { linear, cubic, quad_sign, patch_average };

MeasurementKind parse_measurement_kind(std::string_view name);
std::string_view to_string(MeasurementKind kind);

struct MeasurementOp {
  MeasurementKind kind = MeasurementKind::linear;
  Eigen::MatrixXd noise_cov;
  /// patch_average only: intervals and the mesh used to place nodes.
  std::vector<Patch> patches;
  int mesh = 0;
};

/// Applies the noise-free operator to a state or nodal field.
Eigen::VectorXd observe(const MeasurementOp& op, const Eigen::VectorXd& state);

/// Parameter -> forward model output (state for Lorenz, concatenated nodal
/// solutions for diffusion).
using ForwardModel = std::function<Eigen::VectorXd(const Eigen::VectorXd& q)>;

/// y = observe(forward(q)) evaluated on the rule and projected onto `basis`.
PceVector predicted_measurement(const MeasurementOp& op, const PceVector& q, const ForwardModel& forward,
                                const IndexSetPtr& basis, const QuadratureRule& rule);

/// Exact y for the identity model and a polynomial operator (linear or
/// cubic), formed in the Hermite algebra without quadrature.
PceVector predicted_measurement_exact(const MeasurementOp& op, const PceVector& q);

}  // namespace polyfilter
