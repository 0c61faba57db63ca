#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "confocal/errors.hpp"

namespace confocal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kRankTol = 1e-10;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kParallelTol = 1e-12;

namespace detail {

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

// First component above noise level made positive.
inline void canonical_sign(Eigen::Ref<Vector> v) {
  const double cut = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cut) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

inline void require_dim(const Vector& v, Eigen::Index k, const char* what) {
  if (v.size() != k)
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " has dimension " + std::to_string(v.size()) +
                    ", expected " + std::to_string(k));
  if (!v.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not finite");
}

}  // namespace detail

class WeightedPointSet {
 public:
  explicit WeightedPointSet(Matrix coords)
      : WeightedPointSet(coords, Vector::Ones(coords.rows())) {}

  WeightedPointSet(Matrix coords, Vector masses) : coords_(std::move(coords)), masses_(std::move(masses)) {
    if (coords_.rows() < 1) throw Error(ErrorCode::EmptyDataset, "point set has no points");
    if (coords_.cols() < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
    if (masses_.size() != coords_.rows())
      throw Error(ErrorCode::InvalidArgument, "mass count does not match point count");
    if (!coords_.allFinite()) throw Error(ErrorCode::InvalidArgument, "coordinates must be finite");
    for (Eigen::Index j = 0; j < masses_.size(); ++j)
      if (!(masses_[j] > 0) || !std::isfinite(masses_[j]))
        throw Error(ErrorCode::InvalidArgument, "masses must be positive and finite");
  }

  Eigen::Index size() const { return coords_.rows(); }
  Eigen::Index dim() const { return coords_.cols(); }
  const Matrix& coords() const { return coords_; }
  const Vector& masses() const { return masses_; }
  Vector point(Eigen::Index j) const { return coords_.row(j).transpose(); }
  double total_mass() const { return masses_.sum(); }
  bool has_unit_masses() const { return (masses_.array() == 1.0).all(); }

 private:
  Matrix coords_;
  Vector masses_;
};

class SymmetricOperator {
 public:
  explicit SymmetricOperator(Matrix entries) : a_(std::move(entries)) {
    if (a_.rows() != a_.cols() || a_.rows() < 1)
      throw Error(ErrorCode::NotSymmetric, "operator must be square");
    if (!a_.allFinite()) throw Error(ErrorCode::NotSymmetric, "operator entries must be finite");
    const double scale = std::max(a_.cwiseAbs().maxCoeff(), 1e-300);
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
      throw Error(ErrorCode::NotSymmetric, "operator is not symmetric");
    a_ = 0.5 * (a_ + a_.transpose()).eval();
  }

  const Matrix& matrix() const { return a_; }
  Eigen::Index dim() const { return a_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }
  double quadratic_form(const Vector& n) const { return n.dot(a_ * n); }

 private:
  Matrix a_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // columns, orthonormal
};

inline EigenDecomposition symmetric_eigen(const SymmetricOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NotSymmetric, "eigen solver did not converge");
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index i = 0; i < out.vectors.cols(); ++i) detail::canonical_sign(out.vectors.col(i));
  return out;
}

// The set {x : <normal, x> = offset} with unit normal.
class Hyperplane {
 public:
  Hyperplane(Vector normal, double offset) {
    if (!normal.allFinite() || !std::isfinite(offset))
      throw Error(ErrorCode::InvalidArgument, "hyperplane must be finite");
    const double len = normal.norm();
    if (!(len > 0)) throw Error(ErrorCode::ZeroVector, "hyperplane normal is zero");
    n_ = normal / len;
    p_ = offset / len;
    const Vector before = n_;
    detail::canonical_sign(n_);
    if (n_.dot(before) < 0) p_ = -p_;
  }

  static Hyperplane through(const Vector& point, const Vector& normal) {
    return Hyperplane(normal, normal.dot(point));
  }

  const Vector& normal() const { return n_; }
  double offset() const { return p_; }
  Eigen::Index dim() const { return n_.size(); }
  double signed_distance(const Vector& x) const { return n_.dot(x) - p_; }
  Vector foot_of_origin() const { return p_ * n_; }

 private:
  Vector n_;
  double p_ = 0;
};

// base + span(basis columns); basis is orthonormalized on construction.
class FlatSubspace {
 public:
  FlatSubspace(Vector base_point, const Matrix& directions) : base_(std::move(base_point)) {
    const Eigen::Index k = base_.size();
    const Eigen::Index ell = directions.cols();
    if (directions.rows() != k) throw Error(ErrorCode::InvalidArgument, "basis dimension mismatch");
    if (ell < 1 || ell > k - 1) throw Error(ErrorCode::InvalidArgument, "flat dimension must be in [1, k-1]");
    if (!base_.allFinite() || !directions.allFinite())
      throw Error(ErrorCode::InvalidArgument, "flat must be finite");
    Eigen::HouseholderQR<Matrix> qr(directions);
    const Matrix r = qr.matrixQR().topRows(ell).triangularView<Eigen::Upper>();
    const double scale = directions.colwise().norm().maxCoeff();
    for (Eigen::Index i = 0; i < ell; ++i)
      if (!(std::abs(r(i, i)) > 1e-12 * scale))
        throw Error(ErrorCode::InvalidArgument, "flat directions are linearly dependent");
    basis_ = qr.householderQ() * Matrix::Identity(k, ell);
  }

  static FlatSubspace line(const Vector& point, const Vector& direction) {
    return FlatSubspace(point, Matrix(direction));
  }

  const Vector& base_point() const { return base_; }
  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return base_.size(); }
  Eigen::Index flat_dim() const { return basis_.cols(); }

  Vector project(const Vector& x) const {
    const Vector d = x - base_;
    return base_ + basis_ * (basis_.transpose() * d);
  }
  Vector residual(const Vector& x) const {
    const Vector d = x - base_;
    return d - basis_ * (basis_.transpose() * d);
  }
  double distance2(const Vector& x) const { return residual(x).squaredNorm(); }
  // Point of the flat closest to the origin.
  Vector foot_of_origin() const { return base_ - basis_ * (basis_.transpose() * base_); }

 private:
  Vector base_;
  Matrix basis_;
};

inline Vector centroid(const WeightedPointSet& ps) {
  return (ps.coords().transpose() * ps.masses()) / ps.total_mass();
}

inline SymmetricOperator inertia_operator(const WeightedPointSet& ps, const Vector& origin) {
  detail::require_dim(origin, ps.dim(), "origin");
  const Matrix d = ps.coords().rowwise() - origin.transpose();
  Matrix a = d.transpose() * ps.masses().asDiagonal() * d;
  return SymmetricOperator(0.5 * (a + a.transpose()));
}

inline bool full_rank(const WeightedPointSet& ps) {
  if (ps.size() < ps.dim() + 1) return false;
  const Vector mu = symmetric_eigen(inertia_operator(ps, centroid(ps))).values;
  const double top = mu[mu.size() - 1];
  return top > 0 && mu[0] > kRankTol * top;
}

inline double hyperplanar_moment(const WeightedPointSet& ps, const Hyperplane& plane) {
  detail::require_dim(plane.normal(), ps.dim(), "plane normal");
  const Vector dist = (ps.coords() * plane.normal()).array() - plane.offset();
  return ps.masses().dot(dist.cwiseAbs2());
}

inline double l_planar_moment(const WeightedPointSet& ps, const FlatSubspace& flat) {
  detail::require_dim(flat.base_point(), ps.dim(), "flat");
  const Matrix d = ps.coords().rowwise() - flat.base_point().transpose();
  const Matrix r = d - (d * flat.basis()) * flat.basis().transpose();
  return ps.masses().dot(r.rowwise().squaredNorm());
}

inline double axial_moment(const WeightedPointSet& ps, const FlatSubspace& line) {
  if (line.flat_dim() != 1) throw Error(ErrorCode::InvalidArgument, "axial moment needs a line");
  return l_planar_moment(ps, line);
}

inline double directional_moment(const WeightedPointSet& ps, const Hyperplane& plane, const Vector& w) {
  detail::require_dim(w, ps.dim(), "direction");
  const double len = w.norm();
  if (!(len > 0)) throw Error(ErrorCode::ZeroVector, "direction is zero");
  const double c = plane.normal().dot(w) / len;
  if (std::abs(c) < kParallelTol) throw Error(ErrorCode::DirectionParallel, "direction is parallel to the plane");
  return hyperplanar_moment(ps, plane) / (c * c);
}

}  // namespace confocal
