// Finite-dimensional frame machinery.
//
// A frame here is a finite, labeled family of vectors in R^N stored as the
// columns of a dense N x L matrix, together with (optionally) its frame
// bounds. Analysis maps a vector to its coefficient sequence against the
// family, synthesis is the adjoint map, and the frame operator is their
// composition. Frame bounds are the extreme eigenvalues of the frame
// operator restricted to the span of the family (or to a caller-supplied
// subspace). The canonical dual applies the pseudoinverse of the frame
// operator to every element.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dfdreg/rng.hpp"

namespace dfdreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Ordered set of distinct labels indexing the elements of a frame.
class IndexSet {
 public:
  explicit IndexSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("IndexSet: no labels");
    positions_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!positions_.emplace(labels_[i], i).second)
        throw std::invalid_argument("IndexSet: duplicate label '" + labels_[i] + "'");
    }
  }

  static std::shared_ptr<const IndexSet> numbered(std::size_t count,
                                                  const std::string& prefix = "") {
    std::vector<std::string> labels;
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) labels.push_back(prefix + std::to_string(i));
    return std::make_shared<const IndexSet>(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> position(const std::string& label) const {
    auto it = positions_.find(label);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return &a == &b || a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> positions_;
};

inline bool same_index_set(const std::shared_ptr<const IndexSet>& a,
                           const std::shared_ptr<const IndexSet>& b) {
  return a == b || (a && b && *a == *b);
}

enum class BoundMethod { exact, estimated };

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  BoundMethod method = BoundMethod::estimated;
  double tolerance = 0.0;

  FrameBounds() = default;
  FrameBounds(double a, double b, BoundMethod m, double tol)
      : lower(a), upper(b), method(m), tolerance(tol) {
    if (!(a > 0.0) || !(b > 0.0) || a > b * (1.0 + 1e-12))
      throw std::invalid_argument("FrameBounds: need 0 < A <= B");
  }
};

// Coefficient sequence over a frame's index set.
struct CoefficientSequence {
  std::shared_ptr<const IndexSet> index_set;
  Vector values;

  CoefficientSequence(std::shared_ptr<const IndexSet> idx, Vector vals)
      : index_set(std::move(idx)), values(std::move(vals)) {
    if (!index_set) throw std::invalid_argument("CoefficientSequence: null index set");
    if (static_cast<std::size_t>(values.size()) != index_set->size())
      throw std::invalid_argument("CoefficientSequence: size mismatch with index set");
    if (!values.allFinite())
      throw std::invalid_argument("CoefficientSequence: non-finite values");
  }

  double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
  double norm() const { return values.norm(); }
};

class Frame {
 public:
  Frame(std::shared_ptr<const IndexSet> index_set, Matrix columns,
        std::optional<FrameBounds> bounds = std::nullopt)
      : index_set_(std::move(index_set)),
        columns_(std::make_shared<const Matrix>(std::move(columns))),
        bounds_(bounds) {
    if (!index_set_) throw std::invalid_argument("Frame: null index set");
    if (static_cast<std::size_t>(columns_->cols()) != index_set_->size())
      throw std::invalid_argument("Frame: column count does not match index set");
    if (columns_->rows() < 1) throw std::invalid_argument("Frame: empty ambient space");
    if (!columns_->allFinite()) throw std::invalid_argument("Frame: non-finite entries");
    if (columns_->colwise().norm().maxCoeff() == 0.0)
      throw std::invalid_argument("Frame: all elements are zero");
  }

  Eigen::Index ambient_dim() const { return columns_->rows(); }
  std::size_t size() const { return index_set_->size(); }
  const std::shared_ptr<const IndexSet>& index_set() const { return index_set_; }
  const Matrix& matrix() const { return *columns_; }
  Vector element(std::size_t i) const { return columns_->col(static_cast<Eigen::Index>(i)); }
  const std::optional<FrameBounds>& bounds() const { return bounds_; }

  Frame with_bounds(FrameBounds b) const {
    Frame f = *this;
    f.bounds_ = b;
    return f;
  }

 private:
  std::shared_ptr<const IndexSet> index_set_;
  std::shared_ptr<const Matrix> columns_;
  std::optional<FrameBounds> bounds_;
};

// --- analysis / synthesis -------------------------------------------------

inline CoefficientSequence analysis(const Frame& frame, const Vector& x) {
  if (x.size() != frame.ambient_dim())
    throw std::invalid_argument("analysis: vector dimension " + std::to_string(x.size()) +
                                " does not match ambient dimension " +
                                std::to_string(frame.ambient_dim()));
  return CoefficientSequence(frame.index_set(), frame.matrix().transpose() * x);
}

inline Vector synthesis(const Frame& frame, const CoefficientSequence& c) {
  if (!same_index_set(frame.index_set(), c.index_set))
    throw std::invalid_argument("synthesis: coefficient sequence indexed by a different set");
  return frame.matrix() * c.values;
}

inline Vector frame_operator_apply(const Frame& frame, const Vector& x) {
  return synthesis(frame, analysis(frame, x));
}

namespace detail {

constexpr double kRankTol = 1e-12;       // relative eigenvalue cutoff for span detection
constexpr double kCondLimit = 1e12;      // conditioning limit for dual computation
constexpr Eigen::Index kDenseDimCap = 2000;

// Eigen-decomposition of the frame operator S = U U^T. Eigenvalues come back
// ascending from Eigen's solver.
inline Eigen::SelfAdjointEigenSolver<Matrix> frame_operator_eigen(const Frame& frame) {
  if (frame.ambient_dim() > kDenseDimCap)
    throw std::invalid_argument(
        "frame operator: ambient dimension exceeds the dense cap of " +
        std::to_string(kDenseDimCap));
  const Matrix& u = frame.matrix();
  Matrix s = u * u.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("frame operator: eigendecomposition failed");
  return es;
}

}  // namespace detail

// Frame bounds as extreme eigenvalues of the frame operator restricted to
// span(frame), or to the caller-supplied subspace (columns spanning it).
inline FrameBounds estimate_frame_bounds(const Frame& frame,
                                         const std::optional<Matrix>& subspace,
                                         double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("estimate_frame_bounds: tolerance must be positive");

  double lower = 0.0, upper = 0.0;
  if (subspace) {
    if (subspace->rows() != frame.ambient_dim())
      throw std::invalid_argument("estimate_frame_bounds: subspace dimension mismatch");
    // Orthonormalize the subspace basis, then restrict S to it.
    Eigen::HouseholderQR<Matrix> qr(*subspace);
    Matrix q = qr.householderQ() * Matrix::Identity(subspace->rows(), subspace->cols());
    Matrix w = frame.matrix().transpose() * q;  // L x k
    Matrix m = w.transpose() * w;               // k x k restriction of S
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("estimate_frame_bounds: eigendecomposition failed");
    lower = es.eigenvalues().minCoeff();
    upper = es.eigenvalues().maxCoeff();
  } else {
    auto es = detail::frame_operator_eigen(frame);
    const Vector& ev = es.eigenvalues();
    upper = ev.maxCoeff();
    const double cut = detail::kRankTol * upper;
    lower = upper;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > cut) lower = std::min(lower, ev[i]);
  }
  if (!(upper > 0.0)) throw std::invalid_argument("estimate_frame_bounds: zero frame has no lower bound");
  if (!(lower > 0.0))
    throw std::runtime_error("estimate_frame_bounds: frame fails the lower bound on the claimed subspace");
  return FrameBounds(lower, upper, BoundMethod::estimated, tolerance);
}

inline FrameBounds estimate_frame_bounds(const Frame& frame, double tolerance = 1e-10) {
  return estimate_frame_bounds(frame, std::nullopt, tolerance);
}

// Canonical dual frame (S^+ u_lambda)_lambda on span(frame).
inline Frame canonical_dual(const Frame& frame) {
  auto es = detail::frame_operator_eigen(frame);
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0)) throw std::invalid_argument("canonical_dual: zero frame");

  const double rank_cut = detail::kRankTol * top;
  const double cond_cut = top / detail::kCondLimit;
  Eigen::Index deficient = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > rank_cut && ev[i] < cond_cut) ++deficient;
  if (deficient > 0)
    throw std::runtime_error(
        "canonical_dual: frame operator numerically singular on a subspace of dimension " +
        std::to_string(deficient) + " (condition limit " +
        std::to_string(detail::kCondLimit) + ")");

  Vector inv = Vector::Zero(ev.size());
  double lo = top, hi = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > rank_cut) {
      inv[i] = 1.0 / ev[i];
      lo = std::min(lo, ev[i]);
      hi = std::max(hi, ev[i]);
    }
  }
  Matrix s_pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  Matrix dual_cols = s_pinv * frame.matrix();
  // Bounds of the canonical dual on the span are the reciprocals of the
  // original bounds, swapped.
  FrameBounds dual_bounds(1.0 / hi, 1.0 / lo, BoundMethod::estimated, detail::kRankTol);
  return Frame(frame.index_set(), std::move(dual_cols), dual_bounds);
}

struct DualityReport {
  double max_residual = 0.0;
  int vectors_checked = 0;
  double tolerance = 0.0;
  bool pass = false;
};

// Checks x = sum_l <x,u_l> ubar_l over all span basis directions plus
// `trials` random vectors drawn from the span. Residuals are relative.
inline DualityReport check_duality(const Frame& frame, const Frame& dual, int trials,
                                   double tol, std::uint64_t seed = 0x4475616C6974790AULL) {
  if (!same_index_set(frame.index_set(), dual.index_set()))
    throw std::invalid_argument("check_duality: index sets differ");
  if (frame.ambient_dim() != dual.ambient_dim())
    throw std::invalid_argument("check_duality: ambient dimensions differ");

  auto es = detail::frame_operator_eigen(frame);
  const Vector& ev = es.eigenvalues();
  const double cut = detail::kRankTol * ev.maxCoeff();
  std::vector<Eigen::Index> span_cols;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cut) span_cols.push_back(i);

  Matrix q(frame.ambient_dim(), static_cast<Eigen::Index>(span_cols.size()));
  for (std::size_t j = 0; j < span_cols.size(); ++j)
    q.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(span_cols[j]);

  DualityReport report;
  report.tolerance = tol;
  auto residual = [&](const Vector& x) {
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    Vector rec = dual.matrix() * (frame.matrix().transpose() * x);
    return (x - rec).norm() / nx;
  };

  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    report.max_residual = std::max(report.max_residual, residual(q.col(j)));
    ++report.vectors_checked;
  }
  Xoshiro256ss rng(seed);
  for (int t = 0; t < trials; ++t) {
    Vector g = rng.normal_vector(q.cols());
    report.max_residual = std::max(report.max_residual, residual(q * g));
    ++report.vectors_checked;
  }
  report.pass = report.max_residual <= tol;
  return report;
}

inline bool is_norm_bounded_below(const Frame& frame, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("is_norm_bounded_below: a must be positive");
  return frame.matrix().colwise().norm().minCoeff() >= a;
}

inline double min_element_norm(const Frame& frame) {
  return frame.matrix().colwise().norm().minCoeff();
}

inline double max_element_norm(const Frame& frame) {
  return frame.matrix().colwise().norm().maxCoeff();
}

}  // namespace dfdreg
