#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"
#include "confocal/pencil.hpp"

namespace confocal {

inline constexpr double kAnchorTol = 1e-12;
inline constexpr double kTieTol = 1e-8;

enum class FitRole { Best, Worst };

inline const char* role_name(FitRole r) { return r == FitRole::Best ? "best" : "worst"; }

struct FitResult {
  FitRole role;
  FlatSubspace flat;
  std::optional<Hyperplane> hyperplane;  // set when the flat has codimension one
  double moment;
};

struct RestrictedPcaResult {
  Vector point;
  Matrix directions;  // columns, ascending moments
  Vector moments;
  JacobiCoordinates lambdas;
  bool tied = false;
};

struct TestReport {
  double statistic;
  int df1;
  std::optional<int> df2;  // empty means infinity
  double p_value;
  Matrix whitening;         // empty when no whitening applies
  double reference_moment;  // best unrestricted moment (J_1 or RSS of the full model)
  double restricted_moment;
};

namespace detail {

inline void require_full_rank(const WeightedPointSet& ps) {
  if (!full_rank(ps)) throw Error(ErrorCode::RankDeficient, "point set is not of full rank");
}

inline void require_ell(Eigen::Index ell, Eigen::Index k) {
  if (ell < 1 || ell > k - 1) throw Error(ErrorCode::InvalidArgument, "flat dimension must be in [1, k-1]");
}

// Flat through `point` spanned by the columns of `frame` listed in [from, from + ell).
inline FitResult make_fit(FitRole role, const Vector& point, const Matrix& frame, Eigen::Index from,
                          Eigen::Index ell, double moment) {
  const Eigen::Index k = frame.rows();
  FlatSubspace flat(point, frame.middleCols(from, ell));
  std::optional<Hyperplane> plane;
  if (ell == k - 1) {
    const Eigen::Index normal_col = from == 0 ? k - 1 : 0;
    plane = Hyperplane::through(point, frame.col(normal_col));
  }
  return FitResult{role, std::move(flat), std::move(plane), moment};
}

inline FlatSubspace flat_of(const Hyperplane& plane) {
  const Eigen::Index k = plane.dim();
  Eigen::HouseholderQR<Matrix> qr(Matrix(plane.normal()));
  const Matrix q = qr.householderQ();
  return FlatSubspace(plane.foot_of_origin(), q.rightCols(k - 1));
}

}  // namespace detail

inline FitResult best_fit_flat(const WeightedPointSet& ps, Eigen::Index ell) {
  const Eigen::Index k = ps.dim();
  detail::require_ell(ell, k);
  detail::require_full_rank(ps);
  const Vector c = centroid(ps);
  const EigenDecomposition eig = symmetric_eigen(inertia_operator(ps, c));
  return detail::make_fit(FitRole::Best, c, eig.vectors, k - ell, ell, eig.values.head(k - ell).sum());
}

inline FitResult worst_fit_flat(const WeightedPointSet& ps, Eigen::Index ell) {
  const Eigen::Index k = ps.dim();
  detail::require_ell(ell, k);
  detail::require_full_rank(ps);
  const Vector c = centroid(ps);
  const EigenDecomposition eig = symmetric_eigen(inertia_operator(ps, c));
  return detail::make_fit(FitRole::Worst, c, eig.vectors, 0, ell, eig.values.tail(k - ell).sum());
}

inline RestrictedPcaResult restricted_pca(const WeightedPointSet& ps, const Vector& point) {
  detail::require_dim(point, ps.dim(), "point");
  detail::require_full_rank(ps);
  const ConfocalPencil pencil = ConfocalPencil::from_points(ps);
  const EigenDecomposition eig = symmetric_eigen(inertia_operator(ps, point));
  RestrictedPcaResult out{point, eig.vectors, eig.values, jacobi_coordinates(pencil, point), false};
  const double top = eig.values.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i + 1 < eig.values.size(); ++i)
    if (eig.values[i + 1] - eig.values[i] <= kTieTol * top) out.tied = true;
  return out;
}

// Best and worst ell-flats through `point`; moments from the Jacobi coordinates of the point.
inline std::pair<FitResult, FitResult> restricted_best_fit_flat(const WeightedPointSet& ps, const Vector& point,
                                                                Eigen::Index ell) {
  const Eigen::Index k = ps.dim();
  detail::require_ell(ell, k);
  const RestrictedPcaResult pca = restricted_pca(ps, point);
  const ConfocalPencil pencil = ConfocalPencil::from_points(ps);
  const double j1 = pencil.principal_moments()[0];
  const double m = pencil.mass();
  const Vector& lam = pca.lambdas.lambdas;
  const double best = 2.0 * static_cast<double>(k - ell) * j1 - m * lam.tail(k - ell).sum();
  const double worst = 2.0 * static_cast<double>(k - ell) * j1 - m * lam.head(k - ell).sum();
  return {detail::make_fit(FitRole::Best, point, pca.directions, k - ell, ell, best),
          detail::make_fit(FitRole::Worst, point, pca.directions, 0, ell, worst)};
}

inline double f_upper_tail(double x, int df1, std::optional<int> df2) {
  if (df1 < 1 || (df2 && *df2 < 1)) throw Error(ErrorCode::BadDegrees, "degrees of freedom must be positive");
  if (std::isnan(x) || x < 0) throw Error(ErrorCode::InvalidArgument, "statistic must be non-negative");
  if (x == 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double d1 = df1;
  if (!df2) return boost::math::gamma_q(d1 / 2, d1 * x / 2);
  const double d2 = *df2;
  return boost::math::ibeta(d2 / 2, d1 / 2, d2 / (d2 + d1 * x));
}

inline TestReport point_hypothesis_test(const WeightedPointSet& ps, const Vector& point,
                                        const SymmetricOperator& error_cov) {
  const Eigen::Index k = ps.dim();
  detail::require_dim(point, k, "point");
  if (!ps.has_unit_masses()) throw Error(ErrorCode::NonUnitMasses, "the test requires unit masses");
  if (error_cov.dim() != k) throw Error(ErrorCode::BadCovariance, "error covariance has the wrong dimension");
  Eigen::SelfAdjointEigenSolver<Matrix> g(error_cov.matrix());
  const double gmax = g.eigenvalues().cwiseAbs().maxCoeff();
  if (g.info() != Eigen::Success || !(g.eigenvalues()[0] > 1e-14 * gmax))
    throw Error(ErrorCode::BadCovariance, "error covariance is not positive definite");
  const Matrix w = g.eigenvectors() * g.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                   g.eigenvectors().transpose();
  const WeightedPointSet white(ps.coords() * w, ps.masses());
  if (!full_rank(white)) throw Error(ErrorCode::RankDeficient, "point set is not of full rank");
  const ConfocalPencil pencil = ConfocalPencil::from_points(white);
  const JacobiCoordinates jc = jacobi_coordinates(pencil, w * point);
  const double n = static_cast<double>(ps.size());
  const double lam_c = pencil.poles()[0];
  const double lam_p = jc.lambdas[k - 1];
  const int df1 = static_cast<int>(ps.size() - k + 1);
  if (df1 < 1) throw Error(ErrorCode::BadDegrees, "need more points than dimensions");
  const double stat = std::max(0.0, n / df1 * (2 * lam_c - lam_p));
  return TestReport{stat, df1, std::nullopt, f_upper_tail(stat, df1, std::nullopt), w, n * lam_c,
                    n * (2 * lam_c - lam_p)};
}

// Hyperplane minimizing squared deviations along w, through the centroid or through `through`.
inline FitResult directional_fit(const WeightedPointSet& ps, const Vector& w,
                                 const std::optional<Vector>& through = std::nullopt) {
  const Eigen::Index k = ps.dim();
  if (w.size() != k || !w.allFinite() || !(w.norm() > 0))
    throw Error(ErrorCode::DirectionDegenerate, "direction must be a finite nonzero k-vector");
  detail::require_full_rank(ps);
  const Vector dir = w.normalized();
  const Vector c = centroid(ps);
  Vector anchor = c;
  if (through) {
    detail::require_dim(*through, k, "through point");
    const double scale = std::sqrt(symmetric_eigen(inertia_operator(ps, c)).values.sum() / ps.total_mass());
    if ((*through - c).norm() > kAnchorTol * std::max(scale, c.norm())) anchor = *through;
  }
  const Matrix j = inertia_operator(ps, anchor).matrix();
  const Vector n = j.ldlt().solve(dir);
  if (!n.allFinite() || !(n.dot(dir) > 0))
    throw Error(ErrorCode::DirectionDegenerate, "direction gives no finite directional fit");
  const Hyperplane plane = Hyperplane::through(anchor, n);
  FlatSubspace flat = detail::flat_of(plane);
  return FitResult{FitRole::Best, std::move(flat), plane, directional_moment(ps, plane, dir)};
}

// Restricted (through P, p1 = k - 1 parameters) against unrestricted (p2 = k) directional fits.
inline TestReport nested_f_test(const WeightedPointSet& ps, const Vector& w, const Vector& point) {
  const Eigen::Index k = ps.dim();
  const double rss2 = directional_fit(ps, w).moment;
  const double rss1 = directional_fit(ps, w, point).moment;
  const int df2 = static_cast<int>(ps.size() - k);
  if (df2 < 1) throw Error(ErrorCode::BadDegrees, "need more points than dimensions");
  const double f = std::max(0.0, (rss1 - rss2) / (rss2 / df2));
  return TestReport{f, 1, df2, f_upper_tail(f, 1, df2), Matrix(), rss2, rss1};
}

}  // namespace confocal
