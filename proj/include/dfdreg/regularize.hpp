// Filtered-DFD reconstruction.
//
// The filtered DFD replaces the exact inversion weights 1/kappa_l by
// f_alpha(kappa_l):
//   F_alpha y = sum_l f_alpha(kappa_l) <y, v_l> ubar_l.
// Its operator norm obeys ||F_alpha|| <= ||f_alpha||_inf sqrt(B_ubar B_v).
// With a parameter choice alpha*(delta) -> 0 such that
// delta ||f_{alpha*(delta)}||_inf -> 0, the family is a regularization of
// the pseudoinverse; the a-priori rule alpha = c (delta/rho)^{1/(mu+1)}
// realizes the source-condition convergence rates.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dfdreg/dfd.hpp"
#include "dfdreg/filters.hpp"

namespace dfdreg {

// Lightweight view tying a DFD, a filter family and a parameter value
// together; does not own the decomposition or the filter.
struct FilteredDfdOperator {
  const DiagonalFrameDecomposition& dfd;
  const FilterFamily& filter;
  double alpha;

  FilteredDfdOperator(const DiagonalFrameDecomposition& d, const FilterFamily& f, double a)
      : dfd(d), filter(f), alpha(a) {
    if (!(alpha > 0.0)) throw std::invalid_argument("FilteredDfdOperator: alpha must be positive");
  }

  Vector filter_weights() const {
    Vector w(dfd.kappa.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = filter.evaluate(alpha, dfd.kappa[i]);
    return w;
  }
};

inline Vector filtered_apply(const FilteredDfdOperator& op, const Vector& y) {
  if (y.size() != op.dfd.op->dim_range())
    throw std::invalid_argument("filtered_apply: dimension mismatch");
  Vector c = op.dfd.v.matrix().transpose() * y;
  c.array() *= op.filter_weights().array();
  return op.dfd.u_dual.matrix() * c;
}

inline Matrix assemble_filtered(const FilteredDfdOperator& op) {
  return (op.dfd.u_dual.matrix() * op.filter_weights().asDiagonal()) *
         op.dfd.v.matrix().transpose();
}

struct NormBoundReport {
  double bound = 0.0;      // ||f_alpha||_inf sqrt(B_ubar B_v)
  double empirical = 0.0;  // largest singular value of the assembled operator
  bool pass = false;       // empirical <= bound (1 + 1e-6)
};

inline NormBoundReport operator_norm_bound(const FilteredDfdOperator& op) {
  const FrameBounds ub = op.dfd.u_dual.bounds() ? *op.dfd.u_dual.bounds()
                                                : estimate_frame_bounds(op.dfd.u_dual);
  const FrameBounds vb =
      op.dfd.v.bounds() ? *op.dfd.v.bounds() : estimate_frame_bounds(op.dfd.v);

  NormBoundReport report;
  report.bound = op.filter.sup_norm(op.alpha) * std::sqrt(ub.upper * vb.upper);
  Eigen::BDCSVD<Matrix> svd(assemble_filtered(op));
  report.empirical = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  report.pass = report.empirical <= report.bound * (1.0 + 1e-6);
  return report;
}

struct AprioriParams {
  double rho = 1.0;
  double mu = 1.0;
  double c = 1.0;
};

// alpha = c (delta / rho)^{1/(mu+1)}.
inline double apriori_choice(double delta, const AprioriParams& p) {
  if (!(delta > 0.0) || !(p.rho > 0.0) || !(p.mu > 0.0) || !(p.c > 0.0))
    throw std::invalid_argument("apriori_choice: delta, rho, mu, c must be positive");
  return p.c * std::pow(delta / p.rho, 1.0 / (p.mu + 1.0));
}

// Parameter choice rule alpha*(delta); either the a-priori power rule or a
// caller-supplied function of delta. Rules here never see the data y.
class ParameterChoice {
 public:
  static ParameterChoice apriori(AprioriParams params) {
    ParameterChoice c;
    c.params_ = params;
    return c;
  }

  static ParameterChoice user(std::function<double(double)> rule) {
    if (!rule) throw std::invalid_argument("ParameterChoice: null rule");
    ParameterChoice c;
    c.user_rule_ = std::move(rule);
    return c;
  }

  double operator()(double delta) const {
    const double alpha = user_rule_ ? user_rule_(delta) : apriori_choice(delta, *params_);
    if (!(alpha > 0.0)) throw std::runtime_error("ParameterChoice: produced nonpositive alpha");
    return alpha;
  }

  bool is_apriori() const { return !user_rule_; }
  const std::optional<AprioriParams>& apriori_params() const { return params_; }

 private:
  ParameterChoice() = default;
  std::optional<AprioriParams> params_;
  std::function<double(double)> user_rule_;
};

struct AdmissibilityRow {
  double delta = 0.0;
  double alpha = 0.0;
  double delta_sup_norm = 0.0;  // delta * ||f_{alpha*(delta)}||_inf
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRow> rows;
  bool alpha_decays = false;
  bool noise_term_decays = false;
  bool pass = false;
};

// Finite certificate for the two admissibility limits: both alpha*(delta)
// and delta ||f_{alpha*}||_inf must be nonincreasing along the grid and decay
// by at least a factor of two in total.
inline AdmissibilityReport check_admissibility(const ParameterChoice& choice,
                                               const FilterFamily& filter,
                                               const std::vector<double>& delta_grid) {
  if (delta_grid.size() < 2)
    throw std::invalid_argument("check_admissibility: need at least two deltas");
  for (std::size_t i = 1; i < delta_grid.size(); ++i)
    if (!(delta_grid[i] < delta_grid[i - 1]))
      throw std::invalid_argument("check_admissibility: delta grid must be decreasing");

  AdmissibilityReport report;
  for (double delta : delta_grid) {
    const double alpha = choice(delta);
    report.rows.push_back({delta, alpha, delta * filter.sup_norm(alpha)});
  }

  auto decays = [&](auto proj) {
    for (std::size_t i = 1; i < report.rows.size(); ++i)
      if (proj(report.rows[i]) > proj(report.rows[i - 1]) * (1.0 + 1e-12)) return false;
    return proj(report.rows.back()) <= 0.5 * proj(report.rows.front());
  };
  report.alpha_decays = decays([](const AdmissibilityRow& r) { return r.alpha; });
  report.noise_term_decays = decays([](const AdmissibilityRow& r) { return r.delta_sup_norm; });
  report.pass = report.alpha_decays && report.noise_term_decays;
  return report;
}

struct ReconstructionResult {
  Vector x;
  double alpha_used = 0.0;
};

inline ReconstructionResult reconstruct(const DiagonalFrameDecomposition& dfd,
                                        const FilterFamily& filter,
                                        const ParameterChoice& choice, const Vector& y_delta,
                                        double delta) {
  const double alpha = choice(delta);
  FilteredDfdOperator op(dfd, filter, alpha);
  return ReconstructionResult{filtered_apply(op, y_delta), alpha};
}

}  // namespace dfdreg
