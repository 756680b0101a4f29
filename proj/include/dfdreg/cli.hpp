// Command implementations behind the dfdreg tool.
//
// Exit code contract: 0 = all checks passed, 1 = a check failed,
// 2 = configuration or input errors. Every output file starts with a
// comment header embedding the tool version and the verbatim config, so a
// result file is self-describing and reruns are byte-comparable.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfdreg/config.hpp"
#include "dfdreg/dfd.hpp"
#include "dfdreg/filters.hpp"
#include "dfdreg/io.hpp"
#include "dfdreg/rates.hpp"
#include "dfdreg/regularize.hpp"
#include "dfdreg/version.hpp"

namespace dfdreg {

namespace cli {

inline void write_output_header(std::ostream& out, const RunConfig& config) {
  out << "# dfdreg " << kVersion << "\n# config:\n";
  std::istringstream text(config.raw_text);
  std::string line;
  while (std::getline(text, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << "#   " << line << "\n";
  }
}

inline std::vector<std::string> header_comment_lines(const RunConfig& config) {
  std::vector<std::string> lines;
  lines.push_back(std::string("dfdreg ") + kVersion);
  lines.push_back("config:");
  std::istringstream text(config.raw_text);
  std::string line;
  while (std::getline(text, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back("  " + line);
  }
  return lines;
}

inline DiagonalFrameDecomposition build_dfd(const RunConfig& config) {
  if (config.problem == ProblemKind::files) {
    if (config.path.empty()) throw ConfigError("problem: kind=files requires path=");
    try {
      return load_dfd(config.path);
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()).rfind("cannot open", 0) == 0) throw ConfigError(e.what());
      throw;
    }
  }
  if (config.n < 2) throw ConfigError("problem: n must be at least 2");

  std::shared_ptr<const LinearOperator> op;
  switch (config.problem) {
    case ProblemKind::hp:
    case ProblemKind::hp_unbounded:
      op = std::make_shared<const LinearOperator>(make_hp_operator(config.n));
      break;
    case ProblemKind::volterra:
      op = std::make_shared<const LinearOperator>(make_volterra_operator(config.n));
      break;
    default:
      break;
  }

  switch (config.dfd_source) {
    case DfdSource::svd:
      return dfd_from_svd(svd_decompose(*op), op);
    case DfdSource::example_hp: {
      if (config.problem == ProblemKind::volterra)
        throw ConfigError("dfd: source=example_hp applies to the hp problems only");
      const HpVariant variant = config.problem == ProblemKind::hp_unbounded
                                    ? HpVariant::unbounded_kappa
                                    : HpVariant::standard;
      return dfd_example_hp(config.n, variant);
    }
    case DfdSource::derive: {
      if (config.v_path.empty()) throw ConfigError("dfd: source=derive requires v_path=");
      return derive_dfd_from_range_frame(op, read_frame(config.v_path), KappaRule::normalize_u)
          .dfd;
    }
  }
  throw ConfigError("dfd: unsupported source");
}

// Rebuilds the same DFD family at twice the truncation; null for file-based
// problems, whose truncation cannot be refined.
inline std::function<DiagonalFrameDecomposition()> refine_callback(const RunConfig& config) {
  if (config.problem == ProblemKind::files) return nullptr;
  RunConfig doubled = config;
  doubled.n = config.n * 2;
  return [doubled]() { return build_dfd(doubled); };
}

inline std::filesystem::path prepare_out_dir(const RunConfig& config) {
  std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cli

// validate: quasi-singular relations, duality of the stored dual, frame
// bounds, ill-posedness diagnostics. Writes validate.txt.
inline int cmd_validate(const RunConfig& config) {
  const auto dir = cli::prepare_out_dir(config);
  std::ofstream out(dir / "validate.txt");
  if (!out) throw ConfigError("cannot write to output directory " + config.out_dir);
  cli::write_output_header(out, config);

  std::optional<DiagonalFrameDecomposition> built;
  try {
    built = cli::build_dfd(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out << "construction_failed = " << e.what() << "\n" << "result = FAIL\n";
    std::cerr << "validate: construction failed: " << e.what() << "\n";
    return 1;
  }
  const DiagonalFrameDecomposition& dfd = *built;

  const QuasiSingularReport qsr = validate_quasi_singular(dfd);
  const DualityReport duality = check_duality(dfd.u, dfd.u_dual, 64, 1e-10);
  const FrameBounds u_bounds = estimate_frame_bounds(dfd.u, 1e-10);
  const FrameBounds v_bounds = estimate_frame_bounds(dfd.v, 1e-10);
  const IllposednessReport ill = illposedness_report(dfd, 0.05, cli::refine_callback(config));

  out << "quasi_singular_elementwise_residual = " << format_double(qsr.elementwise_residual)
      << "\n";
  out << "quasi_singular_operator_residual = " << format_double(qsr.operator_residual) << "\n";
  out << "duality_max_residual = " << format_double(duality.max_residual) << "\n";
  out << "u_bounds = [" << format_double(u_bounds.lower) << ", "
      << format_double(u_bounds.upper) << "]\n";
  out << "v_bounds = [" << format_double(v_bounds.lower) << ", "
      << format_double(v_bounds.upper) << "]\n";
  out << "inf_kappa = " << format_double(ill.inf_kappa) << "\n";
  out << "sup_kappa = " << format_double(ill.sup_kappa) << "\n";
  if (ill.inf_kappa_refined)
    out << "inf_kappa_refined = " << format_double(*ill.inf_kappa_refined) << "\n";
  out << "kappa_clusters =";
  for (const auto& c : ill.accumulation_clusters)
    out << " (" << format_double(c.center) << " x" << c.count << ")";
  out << "\n";
  out << "verdict = " << to_string(ill.verdict) << "\n";

  const bool pass = qsr.pass && duality.pass;
  out << "quasi_singular = " << (qsr.pass ? "PASS" : "FAIL") << "\n";
  out << "duality = " << (duality.pass ? "PASS" : "FAIL") << "\n";
  out << "result = " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

// invert: filtered reconstruction of a data vector. Writes
// reconstruction.txt; prints alpha and, when ground truth is supplied, the
// reconstruction error.
inline int cmd_invert(const RunConfig& config, const std::string& data_path,
                      const std::string& truth_path = "") {
  const DiagonalFrameDecomposition dfd = cli::build_dfd(config);
  const Vector y = read_vector(data_path);
  if (y.size() != dfd.op->dim_range()) {
    std::cerr << "invert: data has dimension " << y.size() << ", operator expects "
              << dfd.op->dim_range() << "\n";
    return 2;
  }

  const FilterFamily filter = filter_from_spec(config.filter_spec);
  double alpha = 0.0;
  if (config.alpha) {
    alpha = *config.alpha;
    if (!(alpha > 0.0)) throw ConfigError("regularization: alpha must be positive");
  } else if (config.delta) {
    alpha = apriori_choice(*config.delta, AprioriParams{config.rho, config.mu, config.c});
  } else {
    throw ConfigError("invert needs either alpha= or delta= under [regularization]");
  }

  const Vector x = filtered_apply(FilteredDfdOperator(dfd, filter, alpha), y);

  const auto dir = cli::prepare_out_dir(config);
  std::ofstream out(dir / "reconstruction.txt");
  if (!out) throw ConfigError("cannot write to output directory " + config.out_dir);
  cli::write_output_header(out, config);
  out << "# alpha_used = " << format_double(alpha) << "\n";
  write_vector(out, x);

  std::cout << "alpha_used = " << format_double(alpha) << "\n";
  if (!truth_path.empty()) {
    const Vector truth = read_vector(truth_path);
    if (truth.size() != x.size()) {
      std::cerr << "invert: ground truth has dimension " << truth.size() << ", expected "
                << x.size() << "\n";
      return 2;
    }
    std::cout << "error_vs_truth = " << format_double((x - truth).norm()) << "\n";
  }
  return 0;
}

// rates: convergence-rate study against the a-priori rule. Writes rates.csv
// and rates_summary.txt; exit 0 iff the fitted slope is within 0.1 of
// mu/(mu+1).
inline int cmd_rates(const RunConfig& config) {
  if (!config.seed) throw ConfigError("rates requires seed= under [run] (or --seed)");

  const DiagonalFrameDecomposition dfd = cli::build_dfd(config);
  const FilterFamily filter = filter_from_spec(config.filter_spec);

  RateStudyConfig study;
  study.mu = config.mu;
  study.rho = config.rho;
  study.c = config.c;
  study.delta_grid = config.delta_grid();
  study.noise_draws = config.noise_draws;
  study.seed = *config.seed;
  study.profile = config.source_profile;

  const auto dir = cli::prepare_out_dir(config);
  std::ofstream summary(dir / "rates_summary.txt");
  if (!summary) throw ConfigError("cannot write to output directory " + config.out_dir);
  cli::write_output_header(summary, config);

  RateStudyResult result;
  try {
    result = run_rate_study(dfd, filter, study);
  } catch (const std::invalid_argument& e) {
    summary << "refused = " << e.what() << "\n" << "result = FAIL\n";
    std::cerr << "rates: " << e.what() << "\n";
    return 1;
  }

  write_rates_csv(dir / "rates.csv", result, cli::header_comment_lines(config));

  const double target = result.target_slope;
  const bool pass = std::abs(result.fitted_slope - target) <= 0.1;
  summary << "fitted_slope = " << format_double(result.fitted_slope) << "\n";
  summary << "slope_stderr = " << format_double(result.slope_stderr) << "\n";
  summary << "target_slope = " << format_double(target) << "\n";
  summary << "rate_constant = " << format_double(result.rate_constant) << "\n";
  summary << "fit_rows = " << (result.rows.size() - result.fit_begin) << " of "
          << result.rows.size() << " (small-delta half)\n";
  summary << "seed = " << *config.seed << "\n";
  summary << "band = [" << format_double(target - 0.1) << ", " << format_double(target + 0.1)
          << "]\n";
  summary << "result = " << (pass ? "PASS" : "FAIL") << "\n";
  std::cout << "fitted_slope = " << format_double(result.fitted_slope) << " (target "
            << format_double(target) << ")\n";
  return pass ? 0 : 1;
}

// witness: lower-bound witnesses over the nu range whose delta_nu falls in
// the configured delta window, with the rate-study upper envelope for
// comparison. Requires a Riesz u; exit 1 otherwise.
inline int cmd_witness(const RunConfig& config) {
  const DiagonalFrameDecomposition dfd = cli::build_dfd(config);
  const FilterFamily filter = filter_from_spec(config.filter_spec);

  const auto dir = cli::prepare_out_dir(config);
  std::ofstream out(dir / "witness.txt");
  if (!out) throw ConfigError("cannot write to output directory " + config.out_dir);
  cli::write_output_header(out, config);

  const auto bio = biorthogonality_residual(dfd.u, dfd.u_dual);
  if (!bio || *bio > 1e-10) {
    out << "refused = u has no biorthogonal sequence (not a Riesz basis); the order-"
           "optimality witness requires one\n";
    out << "result = FAIL\n";
    std::cerr << "witness: u is not a Riesz basis\n";
    return 1;
  }
  out << "biorthogonality_residual = " << format_double(*bio) << "\n";

  // Upper envelope constant from the same ingredients the rate study uses.
  std::optional<double> rate_constant;
  const auto claimed = filter.claimed_c_tilde(config.mu);
  if (claimed && std::isfinite(filter.r1_constant)) {
    const FrameBounds ub =
        dfd.u_dual.bounds() ? *dfd.u_dual.bounds() : estimate_frame_bounds(dfd.u_dual);
    const FrameBounds vb = dfd.v.bounds() ? *dfd.v.bounds() : estimate_frame_bounds(dfd.v);
    rate_constant = (std::sqrt(ub.upper * vb.upper) * filter.r1_constant / config.c +
                     std::sqrt(ub.upper) * *claimed * std::pow(config.c, config.mu)) *
                    std::pow(config.rho, 1.0 / (config.mu + 1.0));
    out << "rate_constant = " << format_double(*rate_constant) << "\n";
  }

  out << "columns = nu label kappa delta_nu norm_x_nu lower_bound"
      << (rate_constant ? " rate_envelope" : "") << "\n";
  std::size_t written = 0;
  for (std::size_t nu = 0; nu < dfd.size(); ++nu) {
    const OptimalityWitness w = optimality_witness(dfd, config.mu, config.rho, nu);
    if (w.delta_nu < config.delta_min || w.delta_nu > config.delta_max) continue;
    out << nu << ' ' << w.label << ' ' << format_double(w.kappa_nu) << ' '
        << format_double(w.delta_nu) << ' ' << format_double(w.norm_x_nu) << ' '
        << format_double(w.lower_bound_value);
    if (rate_constant)
      out << ' '
          << format_double(*rate_constant *
                           std::pow(w.delta_nu, config.mu / (config.mu + 1.0)));
    out << "\n";
    ++written;
  }
  out << "rows = " << written << "\n";
  out << "result = PASS\n";
  return 0;
}

}  // namespace dfdreg
