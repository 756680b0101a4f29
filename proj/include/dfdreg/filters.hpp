// Regularizing filter families.
//
// A regularizing filter is a family f_alpha on (0, inf) with
//   (F1) finite sup norm for every alpha,
//   (F2) |kappa f_alpha(kappa)| uniformly bounded by a constant C,
//   (F3) pointwise limit f_alpha(kappa) -> 1/kappa as alpha -> 0.
// A family has qualification mu with constant Ct when
//   sup_kappa kappa^mu |1 - kappa f_alpha(kappa)| <= Ct alpha^mu.
// Shipped families: truncated spectral cutoff (two cutoff conventions),
// Tikhonov (textbook form and a rate-compliant reparametrization), and
// Landweber. Axioms and qualification claims are machine-checked on grids.
//
// Note the parametrization trap: the textbook Tikhonov form
// f_alpha(k) = k/(k^2+alpha) and the sigma^2 < alpha cutoff both lose half an
// order in the qualification exponent measured against alpha. The rate_form
// Tikhonov k/(k^2+alpha^2) and the kappa < alpha cutoff restore it; rate
// experiments default to those variants.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfdreg/frames.hpp"

namespace dfdreg {

struct QualificationClaim {
  double mu = 0.0;
  double c_tilde = 0.0;
};

struct FilterFamily {
  std::string name;
  std::function<double(double alpha, double kappa)> evaluate;
  std::function<double(double alpha)> sup_norm;
  bool sup_norm_exact = true;
  double axiom_constant = 1.0;  // C in (F2)
  // Smallest s with sup_norm(alpha) <= s / alpha on alpha in (0, 1];
  // the (R1) constant used by rate bounds.
  double r1_constant = 1.0;
  std::vector<QualificationClaim> qualification;
  bool qualification_all_mu = false;

  std::optional<double> claimed_c_tilde(double mu) const {
    for (const auto& q : qualification)
      if (std::abs(q.mu - mu) <= 1e-12 * std::max(1.0, std::abs(mu))) return q.c_tilde;
    if (qualification_all_mu && mu > 0.0) return 1.0;
    return std::nullopt;
  }
};

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i / (n - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

// Documented verification grids: 40 log-spaced alphas in [1e-6, 1] and
// 400 log-spaced kappas in [1e-4, 10].
inline std::vector<double> default_alpha_grid() { return log_spaced(1e-6, 1.0, 40); }
inline std::vector<double> default_kappa_grid() { return log_spaced(1e-4, 10.0, 400); }

enum class TruncatedVariant { sigma_squared_cutoff, kappa_cutoff };

// Spectral cutoff: keep 1/kappa above the threshold, zero below.
// sigma_squared_cutoff drops kappa^2 < alpha (the classical truncated-SVD
// convention); kappa_cutoff drops kappa < alpha and has qualification of
// every order with constant 1.
inline FilterFamily truncated_filter(TruncatedVariant variant) {
  FilterFamily f;
  if (variant == TruncatedVariant::sigma_squared_cutoff) {
    f.name = "truncated:sigma_squared_cutoff";
    f.evaluate = [](double alpha, double kappa) {
      return kappa * kappa < alpha ? 0.0 : 1.0 / kappa;
    };
    f.sup_norm = [](double alpha) { return 1.0 / std::sqrt(alpha); };
    f.r1_constant = 1.0;  // alpha * alpha^{-1/2} <= 1 on (0, 1]
  } else {
    f.name = "truncated:kappa_cutoff";
    f.evaluate = [](double alpha, double kappa) {
      return kappa < alpha ? 0.0 : 1.0 / kappa;
    };
    f.sup_norm = [](double alpha) { return 1.0 / alpha; };
    f.r1_constant = 1.0;
    f.qualification = {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
    f.qualification_all_mu = true;
  }
  f.axiom_constant = 1.0;
  return f;
}

enum class TikhonovVariant { paper_form, rate_form };

// Tikhonov filter. paper_form is the textbook kappa/(kappa^2 + alpha) with
// sup norm 1/(2 sqrt(alpha)); rate_form substitutes alpha <- alpha^2, giving
// sup norm 1/(2 alpha) and qualification mu = 1 (constant 1/2, attained at
// kappa = alpha) and mu = 2 (constant 1).
inline FilterFamily tikhonov_filter(TikhonovVariant variant) {
  FilterFamily f;
  if (variant == TikhonovVariant::paper_form) {
    f.name = "tikhonov:paper_form";
    f.evaluate = [](double alpha, double kappa) { return kappa / (kappa * kappa + alpha); };
    f.sup_norm = [](double alpha) { return 1.0 / (2.0 * std::sqrt(alpha)); };
    f.r1_constant = 0.5;
  } else {
    f.name = "tikhonov:rate_form";
    f.evaluate = [](double alpha, double kappa) {
      return kappa / (kappa * kappa + alpha * alpha);
    };
    f.sup_norm = [](double alpha) { return 1.0 / (2.0 * alpha); };
    f.r1_constant = 0.5;
    f.qualification = {{1.0, 0.5}, {2.0, 1.0}};
  }
  f.axiom_constant = 1.0;
  return f;
}

// Landweber iteration read as a filter with alpha = 1/m:
//   f_{1/m}(kappa) = (1 - (1 - omega kappa^2)^m) / kappa,
// the closed form of omega kappa sum_{j<m} (1 - omega kappa^2)^j. Requires
// omega kappa_max^2 < 1 at the use site; 1/alpha is rounded to the nearest
// iteration count. The sup norm bound sqrt(omega m) is an estimate, not the
// exact supremum.
inline FilterFamily landweber_filter(double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("landweber_filter: omega must be positive");
  FilterFamily f;
  std::ostringstream name;
  name << "landweber omega=" << omega;
  f.name = name.str();
  f.evaluate = [omega](double alpha, double kappa) {
    const auto m = static_cast<double>(std::max<long long>(1, std::llround(1.0 / alpha)));
    return (1.0 - std::pow(1.0 - omega * kappa * kappa, m)) / kappa;
  };
  f.sup_norm = [omega](double alpha) {
    const auto m = static_cast<double>(std::max<long long>(1, std::llround(1.0 / alpha)));
    return std::sqrt(omega * m);
  };
  f.sup_norm_exact = false;
  f.axiom_constant = 1.0;
  f.r1_constant = std::sqrt(omega);
  return f;
}

// Converts a spectral-calculus filter h_alpha(lambda) ~ 1/lambda into the
// DFD form f_alpha(kappa) = kappa h_alpha(kappa^2). When no sup-norm function
// is supplied it is estimated on the default kappa grid and flagged.
inline FilterFamily filter_from_spectral(
    std::function<double(double alpha, double lambda)> h, std::string name,
    std::optional<std::function<double(double)>> sup_norm = std::nullopt,
    std::optional<double> axiom_constant = std::nullopt) {
  FilterFamily f;
  f.name = std::move(name);
  f.evaluate = [h](double alpha, double kappa) { return kappa * h(alpha, kappa * kappa); };
  if (sup_norm) {
    f.sup_norm = *sup_norm;
    f.sup_norm_exact = true;
  } else {
    auto eval = f.evaluate;
    f.sup_norm = [eval](double alpha) {
      double worst = 0.0;
      for (double kappa : default_kappa_grid())
        worst = std::max(worst, std::abs(eval(alpha, kappa)));
      return worst;
    };
    f.sup_norm_exact = false;
  }
  if (axiom_constant) {
    f.axiom_constant = *axiom_constant;
  } else {
    double worst = 0.0;
    for (double alpha : default_alpha_grid())
      for (double kappa : default_kappa_grid())
        worst = std::max(worst, std::abs(kappa * f.evaluate(alpha, kappa)));
    f.axiom_constant = worst;
  }
  f.r1_constant = std::numeric_limits<double>::quiet_NaN();  // unknown in general
  return f;
}

struct FilterAxiomReport {
  bool f1_pass = false;
  double f1_worst_ratio = 0.0;  // max |f| / sup_norm over the grid
  bool f2_pass = false;
  double f2_sup = 0.0;  // max |kappa f|
  bool f3_pass = false;
  double f3_worst_deviation = 0.0;
  double limit_kappa_min = 0.0;
  bool pass = false;
};

// Grid check of (F1)-(F3). The pointwise limit (F3) is checked at the
// smallest grid alpha for kappa >= limit_kappa_min only: for any fixed
// alpha > 0 the deviation from 1/kappa necessarily blows up as kappa -> 0,
// so the finite certificate restricts to a fixed positive foot point.
inline FilterAxiomReport verify_filter_axioms(const FilterFamily& f,
                                              const std::vector<double>& alpha_grid,
                                              const std::vector<double>& kappa_grid,
                                              double limit_tol,
                                              double limit_kappa_min = 0.1) {
  if (alpha_grid.empty() || kappa_grid.empty())
    throw std::invalid_argument("verify_filter_axioms: empty grid");

  FilterAxiomReport report;
  report.limit_kappa_min = limit_kappa_min;
  report.f1_pass = true;
  double alpha_min = alpha_grid.front();
  for (double alpha : alpha_grid) {
    alpha_min = std::min(alpha_min, alpha);
    const double bound = f.sup_norm(alpha);
    double worst = 0.0;
    for (double kappa : kappa_grid) {
      const double val = std::abs(f.evaluate(alpha, kappa));
      if (!std::isfinite(val)) report.f1_pass = false;
      worst = std::max(worst, val);
      report.f2_sup = std::max(report.f2_sup, kappa * val);
    }
    const double ratio = worst / bound;
    report.f1_worst_ratio = std::max(report.f1_worst_ratio, ratio);
    if (!(ratio <= 1.0 + 1e-9)) report.f1_pass = false;
  }
  report.f2_pass = report.f2_sup <= f.axiom_constant * (1.0 + 1e-9);

  report.f3_pass = true;
  for (double kappa : kappa_grid) {
    if (kappa < limit_kappa_min) continue;
    const double dev = std::abs(f.evaluate(alpha_min, kappa) - 1.0 / kappa);
    report.f3_worst_deviation = std::max(report.f3_worst_deviation, dev);
    if (!(dev <= limit_tol)) report.f3_pass = false;
  }

  report.pass = report.f1_pass && report.f2_pass && report.f3_pass;
  return report;
}

struct QualificationReport {
  double c_tilde_empirical = 0.0;
  std::optional<double> claimed;
  bool pass = false;
  // Per-alpha ratio max_kappa kappa^mu |1 - kappa f_alpha(kappa)| / alpha^mu,
  // in grid order; divergence as alpha shrinks is the failure signature.
  std::vector<std::pair<double, double>> per_alpha;
};

inline QualificationReport verify_qualification(const FilterFamily& f, double mu,
                                                const std::vector<double>& alpha_grid,
                                                const std::vector<double>& kappa_grid) {
  if (!(mu > 0.0)) throw std::invalid_argument("verify_qualification: mu must be positive");
  QualificationReport report;
  report.claimed = f.claimed_c_tilde(mu);
  for (double alpha : alpha_grid) {
    double sup = 0.0;
    for (double kappa : kappa_grid) {
      const double val =
          std::pow(kappa, mu) * std::abs(1.0 - kappa * f.evaluate(alpha, kappa));
      sup = std::max(sup, val);
    }
    const double ratio = sup / std::pow(alpha, mu);
    report.per_alpha.emplace_back(alpha, ratio);
    report.c_tilde_empirical = std::max(report.c_tilde_empirical, ratio);
  }
  report.pass =
      report.claimed && report.c_tilde_empirical <= *report.claimed * (1.0 + 1e-6);
  return report;
}

// Filter selection from a config string: "truncated:kappa_cutoff",
// "tikhonov:rate_form", "landweber omega=0.9".
inline FilterFamily filter_from_spec(const std::string& spec) {
  std::string s = spec;
  // strip surrounding whitespace
  const auto begin = s.find_first_not_of(" \t");
  const auto end = s.find_last_not_of(" \t");
  if (begin == std::string::npos) throw std::invalid_argument("filter_from_spec: empty spec");
  s = s.substr(begin, end - begin + 1);

  if (s == "truncated:sigma_squared_cutoff")
    return truncated_filter(TruncatedVariant::sigma_squared_cutoff);
  if (s == "truncated:kappa_cutoff")
    return truncated_filter(TruncatedVariant::kappa_cutoff);
  if (s == "tikhonov:paper_form") return tikhonov_filter(TikhonovVariant::paper_form);
  if (s == "tikhonov:rate_form") return tikhonov_filter(TikhonovVariant::rate_form);
  if (s.rfind("landweber", 0) == 0) {
    const auto eq = s.find("omega=");
    if (eq == std::string::npos)
      throw std::invalid_argument("filter_from_spec: landweber needs omega=<value>");
    const std::string num = s.substr(eq + 6);
    std::size_t used = 0;
    const double omega = std::stod(num, &used);
    if (used != num.size())
      throw std::invalid_argument("filter_from_spec: bad omega value '" + num + "'");
    return landweber_filter(omega);
  }
  throw std::invalid_argument("filter_from_spec: unknown filter '" + s + "'");
}

}  // namespace dfdreg
