#include "polyfilter/update.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "polyfilter/chaos_algebra.hpp"
#include "polyfilter/hermite.hpp"
#include "polyfilter/moments.hpp"

namespace polyfilter {

namespace {

std::vector<Combination> combos_up_to(std::size_t measurements, int degree) {
  std::vector<Combination> out;
  for (int k = 0; k <= degree; ++k) {
    const auto& table = combination_table(measurements, k)->combos;
    out.insert(out.end(), table.begin(), table.end());
  }
  return out;
}

void check_degree(int degree, bool allow_high) {
  if (degree < 0) throw std::invalid_argument("update degree must be non-negative");
  if (degree > kDefaultMaxUpdateDegree && !allow_high)
    throw std::invalid_argument("update degree " + std::to_string(degree) + " exceeds the cap of " +
                                std::to_string(kDefaultMaxUpdateDegree) +
                                " (set allow_high_degree to override)");
}

// Affine change of measurement variables w = a z + b used before fitting.
struct Standardization {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

Standardization standardize(const PceVector& z, const FitOptions& options) {
  const auto r = static_cast<Eigen::Index>(z.dim());
  Standardization s{Eigen::MatrixXd::Identity(r, r), Eigen::VectorXd::Zero(r)};
  if (options.whiten) {
    const Eigen::MatrixXd c = covariance(z, z);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c + c.transpose()));
    const auto& lambda = eig.eigenvalues();
    const double top = r ? lambda.cwiseAbs().maxCoeff() : 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (r && top > 0.0 && lambda.minCoeff() > options.tol * top && llt.info() == Eigen::Success) {
      s.a = llt.matrixL().solve(Eigen::MatrixXd::Identity(r, r));
    } else {
      // Rank-deficient covariance: keep only the resolved directions.
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = r - 1; i >= 0; --i)
        if (top > 0.0 && lambda(i) > options.tol * top) keep.push_back(i);
      s.a.resize(static_cast<Eigen::Index>(keep.size()), r);
      for (std::size_t j = 0; j < keep.size(); ++j)
        s.a.row(static_cast<Eigen::Index>(j)) =
            eig.eigenvectors().col(keep[j]).transpose() / std::sqrt(lambda(keep[j]));
    }
    s.b = Eigen::VectorXd::Zero(s.a.rows());
  }
  if (options.center) s.b = -(s.a * z.mean());
  return s;
}

}  // namespace

UpdateMap::UpdateMap(int degree, std::size_t outputs, std::size_t measurements)
    : outputs_(outputs), measurements_(measurements) {
  if (degree < 0) throw std::invalid_argument("UpdateMap: negative degree");
  for (int k = 0; k <= degree; ++k) blocks_.emplace_back(k, measurements, outputs);
}

double UpdateMap::block_norm(int k) const {
  const auto& b = block(k);
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j)
    s += multiplicity(b.combos()[j]) * b.values().col(static_cast<Eigen::Index>(j)).squaredNorm();
  return std::sqrt(s);
}

Eigen::VectorXd UpdateMap::operator()(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs_));
  for (const auto& b : blocks_) out += b.contract(z);
  return out;
}

MonomialPolynomial UpdateMap::to_monomials() const {
  MonomialPolynomial p(outputs_, measurements_);
  for (const auto& b : blocks_)
    for (std::size_t j = 0; j < b.size(); ++j)
      p.add(b.combos()[j], multiplicity(b.combos()[j]) * b.values().col(static_cast<Eigen::Index>(j)));
  return p;
}

UpdateMap UpdateMap::from_monomials(const MonomialPolynomial& p, int degree) {
  if (p.degree() > degree) throw std::invalid_argument("UpdateMap::from_monomials: degree too small");
  UpdateMap map(degree, p.outputs(), p.variables());
  for (const auto& [c, h] : p.terms()) {
    auto& b = map.block(static_cast<int>(c.size()));
    b.values().col(static_cast<Eigen::Index>(b.position(c))) = h / multiplicity(c);
  }
  return map;
}

GainResult kalman_gain(const Eigen::MatrixXd& c_qz, const Eigen::MatrixXd& c_zz, double tol) {
  require_symmetric(c_zz, "kalman_gain");
  if (c_qz.cols() != c_zz.rows()) throw std::invalid_argument("kalman_gain: c_qz columns do not match c_zz");
  const auto solve = solve_symmetric(c_zz, c_qz.transpose(), tol, IndefinitePolicy::reject);
  return {solve.solution.transpose(), solve.condition_number, solve.pseudo_inverse};
}

PceVector add_measurement_noise(const PceVector& y, const Eigen::MatrixXd& noise_cov,
                                std::size_t germ_offset) {
  if (noise_cov.rows() != static_cast<Eigen::Index>(y.dim()))
    throw std::invalid_argument("add_measurement_noise: noise covariance does not match measurement size");
  require_symmetric(noise_cov, "add_measurement_noise");
  if (noise_cov.isZero(0.0)) return y;
  Eigen::MatrixXd factor;
  Eigen::LLT<Eigen::MatrixXd> llt(noise_cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise_cov);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (eig.eigenvalues().minCoeff() < -kDefaultPinvTolerance * top)
      throw InvalidCovariance("add_measurement_noise: noise covariance is indefinite");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = eig.eigenvalues().size() - 1; i >= 0; --i)
      if (eig.eigenvalues()(i) > kDefaultPinvTolerance * top) keep.push_back(i);
    factor.resize(noise_cov.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      factor.col(static_cast<Eigen::Index>(j)) =
          std::sqrt(eig.eigenvalues()(keep[j])) * eig.eigenvectors().col(keep[j]);
  }
  germ_offset = std::max(germ_offset, y.germ_dim());
  auto noise = PceVector::gaussian(Eigen::VectorXd::Zero(noise_cov.rows()), factor, germ_offset);
  auto z = y + noise;
  z.set_label(y.label());
  return z;
}

UpdateResult lbu_update(const PceVector& q_f, const PceVector& y_f, const Eigen::MatrixXd& noise_cov,
                        const Eigen::VectorXd& z_hat, double tol) {
  if (z_hat.size() != static_cast<Eigen::Index>(y_f.dim()))
    throw std::invalid_argument("lbu_update: observation size does not match the predicted measurement");
  auto z = add_measurement_noise(y_f, noise_cov, std::max(q_f.germ_dim(), y_f.germ_dim()));
  const Eigen::MatrixXd c_qz = covariance(q_f, y_f);
  const Eigen::MatrixXd c_zz = covariance(y_f, y_f) + noise_cov;
  const auto gain = kalman_gain(c_qz, 0.5 * (c_zz + c_zz.transpose()), tol);

  auto [qc, zc] = on_common_basis(q_f, z);
  Eigen::MatrixXd coeffs = qc.coeffs() - gain.gain * zc.coeffs();
  coeffs.col(0) += gain.gain * z_hat;

  UpdateMap map(1, q_f.dim(), y_f.dim());
  map.block(1).values() = gain.gain;
  map.block(0).values().col(0) = q_f.mean() - gain.gain * z.mean();
  map.diagnostics.condition_number = gain.condition_number;
  map.diagnostics.pseudo_inverse = gain.pseudo_inverse;
  const Eigen::MatrixXd c_qq = covariance(q_f, q_f);
  map.diagnostics.loss = (c_qq - gain.gain * c_qz.transpose()).trace();

  PceVector posterior(qc.basis_ptr(), std::move(coeffs), q_f.label());
  return {std::move(posterior), std::move(z), std::move(map)};
}

HankelSystem build_hankel_system(const PceVector& z, const PceVector& q, int degree,
                                 const MomentBudget& budget) {
  if (degree < 0) throw std::invalid_argument("build_hankel_system: negative degree");
  budget.check(z, 2 * degree);
  HankelSystem sys;
  sys.degree = degree;
  sys.measurements = z.dim();
  sys.outputs = q.dim();
  sys.combos = combos_up_to(z.dim(), degree);
  const auto d = static_cast<Eigen::Index>(sys.combos.size());
  MomentEngine engine(z, budget);
  sys.matrix.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = engine.raw(combine(sys.combos[static_cast<std::size_t>(i)],
                                          sys.combos[static_cast<std::size_t>(j)]));
      sys.matrix(i, j) = v;
      sys.matrix(j, i) = v;
    }
  sys.rhs.resize(d, static_cast<Eigen::Index>(q.dim()));
  for (std::size_t m = 0; m < q.dim(); ++m) {
    const auto row = to_sparse(q, m);
    for (Eigen::Index i = 0; i < d; ++i)
      sys.rhs(i, static_cast<Eigen::Index>(m)) = engine.cross(row, sys.combos[static_cast<std::size_t>(i)]);
  }
  sys.q_second_moment = second_moment(q);
  return sys;
}

UpdateMap solve_update_map(const HankelSystem& sys, double tol) {
  if (sys.matrix.rows() != sys.matrix.cols() || sys.matrix.rows() != sys.rhs.rows() ||
      static_cast<std::size_t>(sys.matrix.rows()) != sys.combos.size() ||
      static_cast<std::size_t>(sys.rhs.cols()) != sys.outputs)
    throw std::invalid_argument("solve_update_map: inconsistent system dimensions");
  const auto solve = solve_symmetric(sys.matrix, sys.rhs, tol, IndefinitePolicy::truncate);
  MonomialPolynomial p(sys.outputs, sys.measurements);
  for (std::size_t i = 0; i < sys.combos.size(); ++i)
    p.add(sys.combos[i], solve.solution.row(static_cast<Eigen::Index>(i)).transpose());
  auto map = UpdateMap::from_monomials(p, sys.degree);
  map.diagnostics.condition_number = solve.condition_number;
  map.diagnostics.pseudo_inverse = solve.pseudo_inverse;
  map.diagnostics.loss = sys.q_second_moment - (solve.solution.array() * sys.rhs.array()).sum();
  return map;
}

UpdateMap nlbu2_closed_form(const PceVector& z, const PceVector& q, double tol) {
  const std::size_t r = z.dim();
  const std::size_t mdim = q.dim();
  MomentEngine engine(z);
  const auto& singles = combination_table(r, 1)->combos;
  const auto& pairs = combination_table(r, 2)->combos;
  const auto nr = static_cast<Eigen::Index>(r);
  const auto np = static_cast<Eigen::Index>(pairs.size());
  const auto nm = static_cast<Eigen::Index>(mdim);

  Eigen::VectorXd mz(nr), m2(np);
  for (Eigen::Index i = 0; i < nr; ++i) mz(i) = engine.raw(singles[static_cast<std::size_t>(i)]);
  for (Eigen::Index c = 0; c < np; ++c) m2(c) = engine.raw(pairs[static_cast<std::size_t>(c)]);

  Eigen::MatrixXd czz(nr, nr), a(np, nr), d(np, np);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nr; ++j) czz(i, j) = engine.raw(combine(singles[i], singles[j])) - mz(i) * mz(j);
  for (Eigen::Index c = 0; c < np; ++c)
    for (Eigen::Index k = 0; k < nr; ++k) a(c, k) = engine.raw(combine(pairs[c], singles[k])) - m2(c) * mz(k);
  for (Eigen::Index c = 0; c < np; ++c)
    for (Eigen::Index e = 0; e < np; ++e) d(c, e) = engine.raw(combine(pairs[c], pairs[e])) - m2(c) * m2(e);

  Eigen::VectorXd mq = q.mean();
  Eigen::MatrixXd cqz(nm, nr), eq(nm, np);
  for (Eigen::Index m = 0; m < nm; ++m) {
    const auto row = to_sparse(q, static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < nr; ++k) cqz(m, k) = engine.cross(row, singles[k]) - mq(m) * mz(k);
    for (Eigen::Index c = 0; c < np; ++c) eq(m, c) = engine.cross(row, pairs[c]) - mq(m) * m2(c);
  }

  const auto czz_solve_k = solve_symmetric(czz, cqz.transpose(), tol, IndefinitePolicy::truncate);
  const Eigen::MatrixXd k = czz_solve_k.solution.transpose();
  const Eigen::MatrixXd f = solve_symmetric(czz, a.transpose(), tol, IndefinitePolicy::truncate).solution.transpose();
  Eigen::MatrixXd g = d - f * a.transpose();
  g = 0.5 * (g + g.transpose());
  const Eigen::MatrixXd e = eq - k * a.transpose();
  const auto g_solve = solve_symmetric(g, e.transpose(), tol, IndefinitePolicy::truncate);
  const Eigen::MatrixXd h2 = g_solve.solution.transpose();
  const Eigen::MatrixXd h1 = k - h2 * f;
  const Eigen::VectorXd h0 = mq - h1 * mz - h2 * m2;

  UpdateMap map(2, mdim, r);
  map.block(0).values().col(0) = h0;
  map.block(1).values() = h1;
  for (Eigen::Index c = 0; c < np; ++c)
    map.block(2).values().col(c) = h2.col(c) / multiplicity(pairs[static_cast<std::size_t>(c)]);
  map.diagnostics.condition_number = std::max(czz_solve_k.condition_number, g_solve.condition_number);
  map.diagnostics.pseudo_inverse = czz_solve_k.pseudo_inverse || g_solve.pseudo_inverse;
  // At the minimizer the loss is E||q||^2 - E[q . psi(z)].
  double captured = h0.dot(mq);
  for (Eigen::Index m = 0; m < nm; ++m) {
    captured += h1.row(m).dot(cqz.row(m) + mq(m) * mz.transpose());
    captured += h2.row(m).dot(eq.row(m) + mq(m) * m2.transpose());
  }
  map.diagnostics.loss = second_moment(q) - captured;
  return map;
}

UpdateMap fit_update_map(const PceVector& z, const PceVector& q, int degree, const FitOptions& options) {
  check_degree(degree, options.allow_high_degree);
  const auto s = standardize(z, options);
  if (s.a.rows() == 0) {
    UpdateMap map(degree, q.dim(), z.dim());
    map.block(0).values().col(0) = q.mean();
    map.diagnostics.loss = (covariance(q, q)).trace();
    return map;
  }
  const auto w = z.affine(s.a, s.b);
  const auto sys = build_hankel_system(w, q, degree, options.budget);
  const auto in_w = solve_update_map(sys, options.tol);
  auto map = UpdateMap::from_monomials(in_w.to_monomials().compose_affine(s.a, s.b), degree);
  map.diagnostics = in_w.diagnostics;
  return map;
}

PceVector expand_update_map(const UpdateMap& map, const PceVector& z, const MomentBudget& budget) {
  if (z.dim() != map.measurement_dim())
    throw std::invalid_argument("expand_update_map: measurement dimension mismatch");
  MomentEngine engine(z, budget);
  std::vector<SparseChaos> rows(map.output_dim());
  const auto poly = map.to_monomials();
  for (const auto& [c, h] : poly.terms()) {
    if (h.isZero(0.0)) continue;
    const auto& product = engine.product(c);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      const double hm = h(static_cast<Eigen::Index>(m));
      if (hm == 0.0) continue;
      for (const auto& [alpha, v] : product) rows[m][alpha] += hm * v;
    }
  }
  return from_sparse(rows, z.germ_dim());
}

PceVector apply_update_map(const UpdateMap& map, const PceVector& q_f, const PceVector& z,
                           const Eigen::VectorXd& z_hat, const MomentBudget& budget) {
  if (q_f.dim() != map.output_dim())
    throw std::invalid_argument("apply_update_map: parameter dimension does not match the map");
  if (z_hat.size() != static_cast<Eigen::Index>(map.measurement_dim()))
    throw std::invalid_argument("apply_update_map: observation size does not match the map");
  auto qa = q_f - expand_update_map(map, z, budget);
  qa.coeffs().col(0) += map(z_hat);
  qa.set_label(q_f.label());
  return qa;
}

double update_loss(const UpdateMap& map, const PceVector& q, const PceVector& z, const MomentBudget& budget) {
  return second_moment(q - expand_update_map(map, z, budget));
}

double half_normal_moment(int k, double sigma) {
  if (k < 0) throw std::invalid_argument("half_normal_moment: negative k");
  return std::pow(sigma, 2 * k + 1) * std::ldexp(factorial(k), k) * std::sqrt(2.0 / std::numbers::pi);
}

}  // namespace polyfilter
