// Plain-text serialization.
//
// All numeric output uses 17 significant digits, which round-trips IEEE
// doubles exactly. Formats:
//   frame:  "# frame ambient_dim=N count=L" then one record per element,
//           "label <TAB> v_1 v_2 ... v_N"
//   matrix: "# matrix rows=R cols=C" then R lines of C entries (row-major)
//   vector: "# vector dim=N" then one value per line (header optional on read)
//   DFD:    a directory with u.frame, v.frame, u_dual.frame, kappa.txt
//           (one value per line, index order) and operator.txt (matrix)
//   rates:  CSV "delta,alpha,worst_error,rate_bound"

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfdreg/dfd.hpp"
#include "dfdreg/frames.hpp"
#include "dfdreg/operators.hpp"
#include "dfdreg/rates.hpp"

namespace dfdreg {

inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

// Reads the next line, skipping blank lines; returns false at EOF.
inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
  }
  return false;
}

inline long parse_header_field(const std::string& line, const std::string& key,
                               const std::string& context) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos)
    throw std::runtime_error(context + ": missing '" + key + "=' in header '" + line + "'");
  return std::stol(line.substr(pos + key.size() + 1));
}

}  // namespace detail

// --- frames -----------------------------------------------------------------

inline void write_frame(std::ostream& out, const Frame& frame) {
  out << "# frame ambient_dim=" << frame.ambient_dim() << " count=" << frame.size() << "\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << frame.index_set()->label(i) << '\t';
    const auto col = frame.matrix().col(static_cast<Eigen::Index>(i));
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (r) out << ' ';
      out << format_double(col[r]);
    }
    out << '\n';
  }
}

inline void write_frame(const std::filesystem::path& path, const Frame& frame) {
  auto out = detail::open_out(path);
  write_frame(out, frame);
}

inline Frame read_frame(std::istream& in, const std::string& context = "frame") {
  std::string line;
  if (!detail::next_line(in, line) || line.rfind("# frame", 0) != 0)
    throw std::runtime_error(context + ": expected '# frame' header");
  const long dim = detail::parse_header_field(line, "ambient_dim", context);
  const long count = detail::parse_header_field(line, "count", context);
  if (dim < 1 || count < 1) throw std::runtime_error(context + ": bad header sizes");

  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(count));
  Matrix cols(dim, count);
  for (long i = 0; i < count; ++i) {
    if (!detail::next_line(in, line))
      throw std::runtime_error(context + ": unexpected end of file at record " + std::to_string(i));
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(context + ": record " + std::to_string(i) + " has no label field");
    labels.push_back(line.substr(0, tab));
    std::istringstream values(line.substr(tab + 1));
    for (long r = 0; r < dim; ++r)
      if (!(values >> cols(r, i)))
        throw std::runtime_error(context + ": record '" + labels.back() + "' has fewer than " +
                                 std::to_string(dim) + " values");
  }
  return Frame(std::make_shared<const IndexSet>(std::move(labels)), std::move(cols));
}

inline Frame read_frame(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_frame(in, path.string());
}

// --- matrices and vectors ----------------------------------------------------

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out << "# matrix rows=" << m.rows() << " cols=" << m.cols() << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = detail::open_out(path);
  write_matrix(out, m);
}

inline Matrix read_matrix(std::istream& in, const std::string& context = "matrix") {
  std::string line;
  if (!detail::next_line(in, line) || line.rfind("# matrix", 0) != 0)
    throw std::runtime_error(context + ": expected '# matrix' header");
  const long rows = detail::parse_header_field(line, "rows", context);
  const long cols = detail::parse_header_field(line, "cols", context);
  if (rows < 1 || cols < 1) throw std::runtime_error(context + ": bad header sizes");
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!detail::next_line(in, line))
      throw std::runtime_error(context + ": unexpected end of file at row " + std::to_string(r));
    std::istringstream values(line);
    for (long c = 0; c < cols; ++c)
      if (!(values >> m(r, c)))
        throw std::runtime_error(context + ": row " + std::to_string(r) + " is short");
  }
  return m;
}

inline Matrix read_matrix(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_matrix(in, path.string());
}

inline void write_vector(std::ostream& out, const Vector& v) {
  out << "# vector dim=" << v.size() << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

inline void write_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = detail::open_out(path);
  write_vector(out, v);
}

// Accepts either the "# vector dim=N" header or a bare list of values.
inline Vector read_vector(std::istream& in, const std::string& context = "vector") {
  std::string line;
  std::vector<double> values;
  long declared = -1;
  while (detail::next_line(in, line)) {
    if (line.rfind("# vector", 0) == 0) {
      declared = detail::parse_header_field(line, "dim", context);
      continue;
    }
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream row(line);
    double x;
    while (row >> x) values.push_back(x);
  }
  if (values.empty()) throw std::runtime_error(context + ": no values");
  if (declared >= 0 && declared != static_cast<long>(values.size()))
    throw std::runtime_error(context + ": header declares dim=" + std::to_string(declared) +
                             " but " + std::to_string(values.size()) + " values were read");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

inline Vector read_vector(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_vector(in, path.string());
}

// --- DFD directories ----------------------------------------------------------

inline void save_dfd(const std::filesystem::path& dir, const DiagonalFrameDecomposition& dfd) {
  std::filesystem::create_directories(dir);
  write_frame(dir / "u.frame", dfd.u);
  write_frame(dir / "v.frame", dfd.v);
  write_frame(dir / "u_dual.frame", dfd.u_dual);
  auto kappa_out = detail::open_out(dir / "kappa.txt");
  for (Eigen::Index i = 0; i < dfd.kappa.size(); ++i)
    kappa_out << format_double(dfd.kappa[i]) << '\n';
  write_matrix(dir / "operator.txt", dfd.op->assemble());
}

inline DiagonalFrameDecomposition load_dfd(const std::filesystem::path& dir) {
  Frame u = read_frame(dir / "u.frame");
  Frame v = read_frame(dir / "v.frame");
  Frame u_dual = read_frame(dir / "u_dual.frame");

  auto kappa_in = detail::open_in(dir / "kappa.txt");
  std::vector<double> kappa_values;
  std::string line;
  while (detail::next_line(kappa_in, line)) kappa_values.push_back(std::stod(line));
  if (kappa_values.size() != u.size())
    throw std::runtime_error("load_dfd: kappa.txt has " + std::to_string(kappa_values.size()) +
                             " values for " + std::to_string(u.size()) + " frame elements");
  Vector kappa(static_cast<Eigen::Index>(kappa_values.size()));
  for (std::size_t i = 0; i < kappa_values.size(); ++i)
    kappa[static_cast<Eigen::Index>(i)] = kappa_values[i];

  auto op = std::make_shared<const LinearOperator>(make_dense_operator(read_matrix(dir / "operator.txt")));
  if (!(*v.index_set() == *u.index_set()) || !(*u_dual.index_set() == *u.index_set()))
    throw std::runtime_error("load_dfd: u.frame, v.frame and u_dual.frame carry different labels");
  // Rebuild on u's shared index set object so all three families share one set.
  Frame v_shared(u.index_set(), v.matrix());
  Frame dual_shared(u.index_set(), u_dual.matrix());
  DiagonalFrameDecomposition dfd{std::move(u), std::move(v_shared), std::move(dual_shared),
                                 std::move(kappa), std::move(op)};
  detail::validate_dfd(dfd, detail::kDfdConstructionTol);
  return dfd;
}

// --- rate study CSV -------------------------------------------------------------

inline void write_rates_csv(std::ostream& out, const RateStudyResult& result,
                            const std::vector<std::string>& comment_lines = {}) {
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  out << "delta,alpha,worst_error,rate_bound\n";
  for (const auto& row : result.rows)
    out << format_double(row.delta) << ',' << format_double(row.alpha) << ','
        << format_double(row.worst_error) << ',' << format_double(row.rate_bound) << '\n';
}

inline void write_rates_csv(const std::filesystem::path& path, const RateStudyResult& result,
                            const std::vector<std::string>& comment_lines = {}) {
  auto out = detail::open_out(path);
  write_rates_csv(out, result, comment_lines);
}

}  // namespace dfdreg
