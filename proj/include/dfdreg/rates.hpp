// Source conditions, noise models and convergence-rate experiments.
//
// A source element of smoothness mu and radius rho satisfies
// <x, u_l> = kappa_l^mu omega_l with ||omega|| <= rho. For such solutions
// and a filter with qualification mu, the a-priori rule
// alpha = c (delta/rho)^{1/(mu+1)} yields reconstruction errors bounded by
// const * delta^{mu/(mu+1)}. The rate study sweeps a delta grid, measures
// worst errors over seeded noise draws, and fits the log-log slope on the
// small-delta half of the grid. The optimality witness x_nu = rho kappa^mu
// ubar_nu realizes the matching lower bound for Riesz bases: its data norm
// is at most delta_nu = rho kappa_nu^{mu+1} / sqrt(A_v) while its own norm
// stays above sqrt(A_v/B_u) delta_nu^{mu/(mu+1)} rho^{1/(mu+1)}.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dfdreg/dfd.hpp"
#include "dfdreg/regularize.hpp"
#include "dfdreg/rng.hpp"

namespace dfdreg {

struct SourceElement {
  Vector x_dagger;
  Vector omega;  // aligned with the DFD index set
  double mu = 0.0;
  double rho = 0.0;
};

struct OneHot {
  std::size_t nu = 0;
};
struct Geometric {
  double ratio = 0.5;
};
struct UserOmega {
  Vector omega;
};
using SourceProfile = std::variant<OneHot, Geometric, UserOmega>;

namespace detail {

constexpr double kRieszTol = 1e-10;
constexpr double kSourceRealizationTol = 1e-8;

inline Vector profile_omega(const SourceProfile& profile, std::size_t count, double rho) {
  Vector omega(static_cast<Eigen::Index>(count));
  if (std::holds_alternative<OneHot>(profile)) {
    const auto nu = std::get<OneHot>(profile).nu;
    if (nu >= count) throw std::invalid_argument("make_source_element: one-hot index out of range");
    omega.setZero();
    omega[static_cast<Eigen::Index>(nu)] = rho;
  } else if (std::holds_alternative<Geometric>(profile)) {
    const double r = std::get<Geometric>(profile).ratio;
    if (!(r > 0.0)) throw std::invalid_argument("make_source_element: geometric ratio must be positive");
    for (Eigen::Index i = 0; i < omega.size(); ++i) omega[i] = std::pow(r, static_cast<double>(i));
    omega *= rho / omega.norm();
  } else {
    omega = std::get<UserOmega>(profile).omega;
    if (static_cast<std::size_t>(omega.size()) != count)
      throw std::invalid_argument("make_source_element: omega length mismatch");
    if (omega.norm() > rho * (1.0 + 1e-12))
      throw std::invalid_argument("make_source_element: ||omega|| exceeds rho");
  }
  return omega;
}

}  // namespace detail

// Realizes a source element for the given DFD. For a Riesz basis u the
// element is synthesized directly through the biorthogonal dual. For an
// overcomplete u the analysis coefficients are not free parameters: the
// coefficient constraint is solved in the least-squares sense, and the
// candidate is rejected when the residual shows the requested omega is not
// realizable (pass allow_projection to accept the projected coefficients,
// with omega recomputed from what was achieved).
inline SourceElement make_source_element(const DiagonalFrameDecomposition& dfd, double mu,
                                         double rho, const SourceProfile& profile,
                                         bool allow_projection = false) {
  if (!(mu > 0.0) || !(rho > 0.0))
    throw std::invalid_argument("make_source_element: mu and rho must be positive");

  Vector omega = detail::profile_omega(profile, dfd.size(), rho);
  Vector target = dfd.kappa.array().pow(mu) * omega.array();

  SourceElement element;
  element.mu = mu;
  element.rho = rho;

  const auto bio = biorthogonality_residual(dfd.u, dfd.u_dual);
  if (bio && *bio <= detail::kRieszTol) {
    element.x_dagger = dfd.u_dual.matrix() * target;
    element.omega = omega;
  } else {
    // min-norm least squares for the analysis constraint U^T x = target
    Eigen::BDCSVD<Matrix> svd(dfd.u.matrix().transpose(),
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector x = svd.solve(target);
    const double residual = (dfd.u.matrix().transpose() * x - target).norm();
    if (residual > detail::kSourceRealizationTol * std::max(1.0, target.norm())) {
      if (!allow_projection)
        throw std::runtime_error(
            "make_source_element: requested omega is not realizable for the overcomplete "
            "frame (constraint residual " + std::to_string(residual) +
            "); use the least-squares projection option to accept the projected coefficients");
      Vector achieved = dfd.u.matrix().transpose() * x;
      Vector omega_eff = achieved.array() / dfd.kappa.array().pow(mu);
      if (omega_eff.norm() > rho * (1.0 + 1e-9))
        throw std::runtime_error(
            "make_source_element: projected coefficients leave the source set");
      element.x_dagger = std::move(x);
      element.omega = std::move(omega_eff);
      return element;
    }
    element.x_dagger = std::move(x);
    element.omega = omega;
  }

  const double err = (dfd.u.matrix().transpose() * element.x_dagger -
                      Vector(dfd.kappa.array().pow(mu) * element.omega.array()))
                         .cwiseAbs()
                         .maxCoeff();
  if (err > 1e-10 * std::max(1.0, element.x_dagger.norm()))
    throw std::runtime_error("make_source_element: source condition violated, residual " +
                             std::to_string(err));
  return element;
}

struct RandomUnit {};
struct Aligned {
  Vector direction;
};
using NoiseMode = std::variant<RandomUnit, Aligned>;

// Noise vector with ||z|| = delta exactly (delta = 0 gives the zero vector).
inline Vector noise_sample(Eigen::Index dim, double delta, const NoiseMode& mode,
                           std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("noise_sample: delta must be nonnegative");
  if (delta == 0.0) return Vector::Zero(dim);
  if (std::holds_alternative<Aligned>(mode)) {
    const Vector& dir = std::get<Aligned>(mode).direction;
    if (dir.size() != dim) throw std::invalid_argument("noise_sample: direction dimension mismatch");
    const double n = dir.norm();
    if (n == 0.0) throw std::invalid_argument("noise_sample: zero direction");
    return (delta / n) * dir;
  }
  Xoshiro256ss rng(seed);
  Vector g = rng.normal_vector(dim);
  double n = g.norm();
  if (n == 0.0) {
    g[0] = 1.0;
    n = 1.0;
  }
  return (delta / n) * g;
}

struct RateStudyConfig {
  double mu = 1.0;
  double rho = 1.0;
  double c = 1.0;                   // constant in the a-priori rule
  std::vector<double> delta_grid;   // strictly decreasing
  int noise_draws = 5;
  std::uint64_t seed = 0;
  SourceProfile profile = Geometric{0.5};
};

struct RateStudyRow {
  double delta = 0.0;
  double alpha = 0.0;
  double worst_error = 0.0;
  double rate_bound = 0.0;  // C_rate * delta^{mu/(mu+1)}
};

struct RateStudyResult {
  std::vector<RateStudyRow> rows;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  double target_slope = 0.0;    // mu / (mu + 1)
  double rate_constant = 0.0;   // C_rate assembled from frame and filter constants
  std::size_t fit_begin = 0;    // first row index used by the slope fit
  int points_excluded = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  int points_used = 0;
  int points_excluded = 0;
};

// Ordinary least squares on (log delta, log error); rows with nonpositive
// errors are excluded and counted.
inline SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& rows) {
  std::vector<std::pair<double, double>> pts;
  int excluded = 0;
  for (const auto& [delta, error] : rows) {
    if (error > 0.0 && delta > 0.0)
      pts.emplace_back(std::log(delta), std::log(error));
    else
      ++excluded;
  }
  if (pts.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: need at least 3 rows with positive errors");

  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate delta grid");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (intercept + slope * x);
    rss += r * r;
  }
  SlopeFit fit;
  fit.slope = slope;
  fit.std_error = pts.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  fit.points_used = static_cast<int>(pts.size());
  fit.points_excluded = excluded;
  return fit;
}

// Worst reconstruction error over seeded noise draws along the delta grid,
// with the a-priori parameter choice. The rate bound column carries the
// proof's constant
//   C_rate = (sqrt(B_ubar B_v) s / c + sqrt(B_ubar) Ct c^mu) rho^{1/(mu+1)},
// where s is the (R1) constant of the filter and Ct its claimed
// qualification constant at mu. The slope is fitted on the small-delta half
// of the grid.
inline RateStudyResult run_rate_study(const DiagonalFrameDecomposition& dfd,
                                      const FilterFamily& filter,
                                      const RateStudyConfig& config) {
  if (config.delta_grid.size() < 3)
    throw std::invalid_argument("run_rate_study: need at least 3 deltas");
  for (std::size_t i = 1; i < config.delta_grid.size(); ++i)
    if (!(config.delta_grid[i] < config.delta_grid[i - 1]))
      throw std::invalid_argument("run_rate_study: delta grid must be strictly decreasing");
  if (config.noise_draws < 1)
    throw std::invalid_argument("run_rate_study: need at least one noise draw");

  const auto claimed = filter.claimed_c_tilde(config.mu);
  if (!claimed)
    throw std::invalid_argument("run_rate_study: filter '" + filter.name +
                                "' does not claim qualification mu=" +
                                std::to_string(config.mu) +
                                "; the source-condition rate is not guaranteed for it");
  if (!std::isfinite(filter.r1_constant))
    throw std::invalid_argument("run_rate_study: filter '" + filter.name +
                                "' lacks an (R1) constant");

  const SourceElement source =
      make_source_element(dfd, config.mu, config.rho, config.profile);
  const Vector y_exact = dfd.op->apply(source.x_dagger);

  const FrameBounds ub =
      dfd.u_dual.bounds() ? *dfd.u_dual.bounds() : estimate_frame_bounds(dfd.u_dual);
  const FrameBounds vb = dfd.v.bounds() ? *dfd.v.bounds() : estimate_frame_bounds(dfd.v);

  RateStudyResult result;
  result.target_slope = config.mu / (config.mu + 1.0);
  result.rate_constant =
      (std::sqrt(ub.upper * vb.upper) * filter.r1_constant / config.c +
       std::sqrt(ub.upper) * *claimed * std::pow(config.c, config.mu)) *
      std::pow(config.rho, 1.0 / (config.mu + 1.0));

  const AprioriParams params{config.rho, config.mu, config.c};
  for (std::size_t i = 0; i < config.delta_grid.size(); ++i) {
    const double delta = config.delta_grid[i];
    const double alpha = apriori_choice(delta, params);
    FilteredDfdOperator op(dfd, filter, alpha);
    double worst = 0.0;
    for (int j = 0; j < config.noise_draws; ++j) {
      const Vector z = noise_sample(dfd.op->dim_range(), delta, RandomUnit{},
                                    derive_seed(config.seed, i, static_cast<std::uint64_t>(j)));
      const Vector x = filtered_apply(op, y_exact + z);
      worst = std::max(worst, (x - source.x_dagger).norm());
    }
    result.rows.push_back(
        {delta, alpha, worst,
         result.rate_constant * std::pow(delta, result.target_slope)});
  }

  result.fit_begin = config.delta_grid.size() / 2;
  std::vector<std::pair<double, double>> fit_rows;
  for (std::size_t i = result.fit_begin; i < result.rows.size(); ++i)
    fit_rows.emplace_back(result.rows[i].delta, result.rows[i].worst_error);
  const SlopeFit fit = fit_loglog_slope(fit_rows);
  result.fitted_slope = fit.slope;
  result.slope_stderr = fit.std_error;
  result.points_excluded = fit.points_excluded;
  return result;
}

struct OptimalityWitness {
  std::size_t nu = 0;
  std::string label;
  Vector x_nu;
  double kappa_nu = 0.0;
  double delta_nu = 0.0;
  double norm_x_nu = 0.0;
  double lower_bound_value = 0.0;  // sqrt(A_v/B_u) delta_nu^{mu/(mu+1)} rho^{1/(mu+1)}
  double proof_constant = 0.0;     // sqrt(A_v / B_u), from the lower-bound derivation
  double statement_constant = 0.0; // sqrt(B_v / A_u), as the theorem statement reads
};

// One-hot lower-bound witness x_nu = rho kappa_nu^mu ubar_nu. Requires u to
// be a Riesz basis (a biorthogonal dual). The derivation and the theorem
// statement carry different constants; both are reported.
inline OptimalityWitness optimality_witness(const DiagonalFrameDecomposition& dfd, double mu,
                                            double rho, std::size_t nu) {
  if (!(mu >= 0.0) || !(rho > 0.0))
    throw std::invalid_argument("optimality_witness: need mu >= 0 and rho > 0");
  if (nu >= dfd.size()) throw std::invalid_argument("optimality_witness: nu out of range");
  const auto bio = biorthogonality_residual(dfd.u, dfd.u_dual);
  if (!bio || *bio > detail::kRieszTol)
    throw std::invalid_argument(
        "optimality_witness: u has no biorthogonal sequence (not a Riesz basis); "
        "the lower-bound construction requires one");

  const FrameBounds ubounds = dfd.u.bounds() ? *dfd.u.bounds() : estimate_frame_bounds(dfd.u);
  const FrameBounds vbounds = dfd.v.bounds() ? *dfd.v.bounds() : estimate_frame_bounds(dfd.v);

  OptimalityWitness w;
  w.nu = nu;
  w.label = dfd.index_set()->label(nu);
  w.kappa_nu = dfd.kappa[static_cast<Eigen::Index>(nu)];
  w.x_nu = rho * std::pow(w.kappa_nu, mu) * dfd.u_dual.element(nu);
  w.delta_nu = rho * std::pow(w.kappa_nu, mu + 1.0) / std::sqrt(vbounds.lower);
  w.norm_x_nu = w.x_nu.norm();
  w.proof_constant = std::sqrt(vbounds.lower / ubounds.upper);
  w.statement_constant = std::sqrt(vbounds.upper / ubounds.lower);
  w.lower_bound_value = w.proof_constant * std::pow(w.delta_nu, mu / (mu + 1.0)) *
                        std::pow(rho, 1.0 / (mu + 1.0));

  const double data_norm = dfd.op->apply(w.x_nu).norm();
  if (data_norm > w.delta_nu * (1.0 + 1e-10))
    throw std::runtime_error("optimality_witness: ||K x_nu|| exceeds delta_nu");
  const double norm_sq_floor = std::pow(w.kappa_nu, 2.0 * mu) * rho * rho / ubounds.upper;
  if (w.norm_x_nu * w.norm_x_nu < norm_sq_floor * (1.0 - 1e-10))
    throw std::runtime_error("optimality_witness: ||x_nu|| fell below the frame floor");
  return w;
}

// Sampled lower bound for the worst-case error of a reconstruction method on
// the source set: random omega on the rho-sphere plus, for Riesz bases, the
// deterministic adversarial witnesses whose data fit inside the noise level.
inline double empirical_worst_case(const std::function<Vector(const Vector&)>& method,
                                   const DiagonalFrameDecomposition& dfd, double mu,
                                   double rho, double delta, int samples,
                                   std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("empirical_worst_case: need samples >= 1");
  const Vector zero_image = method(Vector::Zero(dfd.op->dim_range()));
  if (zero_image.norm() > 1e-10)
    throw std::invalid_argument("empirical_worst_case: method(0) != 0");

  const auto bio = biorthogonality_residual(dfd.u, dfd.u_dual);
  const bool riesz = bio && *bio <= detail::kRieszTol;

  double worst = 0.0;
  const auto count = static_cast<Eigen::Index>(dfd.size());
  for (int i = 0; i < samples; ++i) {
    Xoshiro256ss rng(derive_seed(seed, static_cast<std::uint64_t>(i), 0));
    Vector omega = rng.normal_vector(count);
    omega *= rho / omega.norm();
    Vector x;
    if (riesz) {
      x = dfd.u_dual.matrix() * Vector(dfd.kappa.array().pow(mu) * omega.array());
    } else {
      // Project onto the realizable slice of the source sphere.
      SourceElement e = make_source_element(dfd, mu, rho, UserOmega{omega}, true);
      const double achieved = e.omega.norm();
      if (achieved == 0.0) continue;
      x = e.x_dagger * (rho / achieved);
    }
    const Vector z = noise_sample(dfd.op->dim_range(), delta, RandomUnit{},
                                  derive_seed(seed, static_cast<std::uint64_t>(i), 1));
    worst = std::max(worst, (method(dfd.op->apply(x) + z) - x).norm());
  }

  if (riesz) {
    for (std::size_t nu = 0; nu < dfd.size(); ++nu) {
      const Vector x_nu = rho * std::pow(dfd.kappa[static_cast<Eigen::Index>(nu)], mu) *
                          dfd.u_dual.element(nu);
      const Vector image = dfd.op->apply(x_nu);
      if (image.norm() <= delta)  // adversarial z = -K x_nu is admissible
        worst = std::max(worst, (method(image - image) - x_nu).norm());
    }
  }
  return worst;
}

}  // namespace dfdreg
