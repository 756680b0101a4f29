// Finite-dimensional linear operators and the dense least-squares oracle.
//
// Operators carry apply / adjoint-apply callables plus an optional cached
// dense matrix. Model problems: the diagonal compact multiplication operator
// with entries 1/sqrt(i+1), and a discrete cumulative-sum (Volterra-type)
// operator as a non-diagonal companion. The SVD of an assembled operator is
// the ground-truth route for minimum-norm least-squares solutions.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dfdreg/frames.hpp"

namespace dfdreg {

enum class OperatorRepresentation { dense, diagonal, composed };

class LinearOperator {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  LinearOperator(Eigen::Index dim_domain, Eigen::Index dim_range, ApplyFn apply,
                 ApplyFn adjoint_apply, OperatorRepresentation repr,
                 std::shared_ptr<const Matrix> dense = nullptr)
      : dim_domain_(dim_domain),
        dim_range_(dim_range),
        apply_(std::move(apply)),
        adjoint_(std::move(adjoint_apply)),
        repr_(repr),
        dense_(std::move(dense)) {
    if (dim_domain_ < 1 || dim_range_ < 1)
      throw std::invalid_argument("LinearOperator: dimensions must be at least 1");
  }

  Eigen::Index dim_domain() const { return dim_domain_; }
  Eigen::Index dim_range() const { return dim_range_; }
  OperatorRepresentation representation() const { return repr_; }

  Vector apply(const Vector& x) const {
    if (x.size() != dim_domain_)
      throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
    return apply_(x);
  }

  Vector adjoint_apply(const Vector& y) const {
    if (y.size() != dim_range_)
      throw std::invalid_argument("LinearOperator::adjoint_apply: dimension mismatch");
    return adjoint_(y);
  }

  // Dense assembly (cached when the operator was built from a matrix).
  Matrix assemble() const {
    if (dense_) return *dense_;
    Matrix m(dim_range_, dim_domain_);
    Vector e = Vector::Zero(dim_domain_);
    for (Eigen::Index j = 0; j < dim_domain_; ++j) {
      e[j] = 1.0;
      m.col(j) = apply_(e);
      e[j] = 0.0;
    }
    return m;
  }

  Matrix apply_columns(const Matrix& x) const {
    if (x.rows() != dim_domain_)
      throw std::invalid_argument("LinearOperator::apply_columns: dimension mismatch");
    if (dense_) return *dense_ * x;
    Matrix out(dim_range_, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = apply_(x.col(j));
    return out;
  }

  Matrix adjoint_apply_columns(const Matrix& y) const {
    if (y.rows() != dim_range_)
      throw std::invalid_argument("LinearOperator::adjoint_apply_columns: dimension mismatch");
    if (dense_) return dense_->transpose() * y;
    Matrix out(dim_domain_, y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) out.col(j) = adjoint_(y.col(j));
    return out;
  }

 private:
  Eigen::Index dim_domain_, dim_range_;
  ApplyFn apply_, adjoint_;
  OperatorRepresentation repr_;
  std::shared_ptr<const Matrix> dense_;
};

inline LinearOperator make_dense_operator(Matrix m) {
  auto shared = std::make_shared<const Matrix>(std::move(m));
  return LinearOperator(
      shared->cols(), shared->rows(),
      [shared](const Vector& x) { return Vector(*shared * x); },
      [shared](const Vector& y) { return Vector(shared->transpose() * y); },
      OperatorRepresentation::dense, shared);
}

inline LinearOperator make_diagonal_operator(Vector diag) {
  auto d = std::make_shared<const Vector>(std::move(diag));
  auto mul = [d](const Vector& x) { return Vector(d->cwiseProduct(x)); };
  return LinearOperator(d->size(), d->size(), mul, mul,
                        OperatorRepresentation::diagonal,
                        std::make_shared<const Matrix>(d->asDiagonal()));
}

inline LinearOperator make_matrix_free_operator(Eigen::Index dim_domain,
                                                Eigen::Index dim_range,
                                                LinearOperator::ApplyFn apply,
                                                LinearOperator::ApplyFn adjoint_apply) {
  return LinearOperator(dim_domain, dim_range, std::move(apply), std::move(adjoint_apply),
                        OperatorRepresentation::composed);
}

// Diagonal multiplication operator x_i -> x_i / sqrt(i+1); self-adjoint,
// singular values 1/sqrt(i+1).
inline LinearOperator make_hp_operator(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("make_hp_operator: N must be at least 1");
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
  return make_diagonal_operator(std::move(d));
}

inline LinearOperator make_identity_operator(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("make_identity_operator: N must be at least 1");
  return make_diagonal_operator(Vector::Ones(n));
}

// Discrete cumulative sum scaled by 1/N: (Kx)_i = (1/N) sum_{j<=i} x_j.
// Lower-triangular, non-normal; a second compact model problem.
inline LinearOperator make_volterra_operator(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("make_volterra_operator: N must be at least 1");
  Matrix m = Matrix::Zero(n, n);
  const double scale = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = scale;
  return make_dense_operator(std::move(m));
}

// Singular triple in the convention K u_j = sigma_j v_j, K* v_j = sigma_j u_j:
// u spans the domain side, v the range side. Singular values are sorted
// decreasing and entries below 1e-12 * sigma_max are dropped.
struct SvdTriple {
  Matrix u;      // dim_domain x r
  Matrix v;      // dim_range x r
  Vector sigma;  // r, decreasing, positive

  Eigen::Index rank() const { return sigma.size(); }
};

namespace detail {
constexpr double kSvdRelCutoff = 1e-12;
}

inline SvdTriple svd_decompose(const LinearOperator& op,
                               Eigen::Index dense_cap = detail::kDenseDimCap) {
  if (op.dim_domain() > dense_cap || op.dim_range() > dense_cap)
    throw std::invalid_argument(
        "svd_decompose: dimensions exceed the dense cap of " + std::to_string(dense_cap) +
        "; matrix-free decomposition is unsupported here");
  Matrix m = op.assemble();
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? detail::kSvdRelCutoff * s[0] : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > cutoff) ++r;
  if (r == 0) throw std::runtime_error("svd_decompose: operator is numerically zero");
  SvdTriple t;
  t.u = svd.matrixV().leftCols(r);
  t.v = svd.matrixU().leftCols(r);
  t.sigma = s.head(r);
  return t;
}

// Minimum-norm least-squares solution from a singular triple:
// x = sum_j sigma_j^{-1} <y, v_j> u_j over the retained spectrum.
inline Vector pseudo_inverse_apply(const SvdTriple& triple, const Vector& y) {
  if (y.size() != triple.v.rows())
    throw std::invalid_argument("pseudo_inverse_apply: dimension mismatch");
  Vector c = triple.v.transpose() * y;
  c.array() /= triple.sigma.array();
  return triple.u * c;
}

inline Vector pseudo_inverse_direct(const LinearOperator& op, const Vector& y) {
  return pseudo_inverse_apply(svd_decompose(op), y);
}

// Largest singular value estimate by power iteration on K*K with a fixed
// deterministic start; exact dense SVD stays the oracle in tests.
inline double operator_norm_estimate(const LinearOperator& op, int iterations = 200) {
  Vector x = Vector::Ones(op.dim_domain()).normalized();
  double norm = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = op.adjoint_apply(op.apply(x));
    const double n = y.norm();
    if (n == 0.0) return 0.0;
    const double next = std::sqrt(n);
    if (it > 4 && std::abs(next - norm) <= 1e-12 * std::max(1.0, norm)) return next;
    norm = next;
    x = y / n;
  }
  return norm;
}

// Worst adjoint-consistency violation |<Kx,y> - <x,K*y>| over random pairs,
// scaled by the product of norms. Used by validity checks and tests.
inline double adjoint_mismatch(const LinearOperator& op, int trials,
                               std::uint64_t seed = 0xAD301420AD301420ULL) {
  Xoshiro256ss rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector x = rng.normal_vector(op.dim_domain());
    Vector y = rng.normal_vector(op.dim_range());
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint_apply(y));
    const double scale = std::max(1.0, x.norm() * y.norm());
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

}  // namespace dfdreg
