#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"

namespace confocal {

inline constexpr double kGapTol = 1e-8;
inline constexpr double kCoordTol = 1e-9;
inline constexpr double kOnQuadricTol = 1e-8;

// Pencil Q_lambda(y) = sum y_i^2 / (a_i - lambda) in the principal frame y = V^T (x - C).
class ConfocalPencil {
 public:
  static ConfocalPencil from_points(const WeightedPointSet& ps) {
    if (!full_rank(ps)) throw Error(ErrorCode::RankDeficient, "point set is not of full rank");
    const Vector c = centroid(ps);
    const EigenDecomposition eig = symmetric_eigen(inertia_operator(ps, c));
    const Eigen::Index k = ps.dim();
    const double top = eig.values[k - 1];
    for (Eigen::Index i = 0; i + 1 < k; ++i)
      if (eig.values[i + 1] - eig.values[i] <= kGapTol * top)
        throw Error(ErrorCode::DegenerateSpectrum, "principal moments " + std::to_string(i + 1) + " and " +
                                                       std::to_string(i + 2) + " coincide");
    ConfocalPencil p;
    p.center_ = c;
    p.frame_ = eig.vectors;
    p.moments_ = eig.values;
    p.mass_ = ps.total_mass();
    p.poles_ = (2 * eig.values[0] - eig.values.array()) / p.mass_;
    p.poles_[0] = eig.values[0] / p.mass_;
    p.scale_ = std::sqrt(eig.values.sum() / p.mass_);
    return p;
  }

  // Centered at the origin, identity frame, unit mass, given descending poles.
  static ConfocalPencil canonical(const Vector& poles) {
    const Eigen::Index k = poles.size();
    if (k < 2 || !poles.allFinite()) throw Error(ErrorCode::InvalidSemiaxes, "need at least two finite poles");
    const double spread = poles.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i + 1 < k; ++i)
      if (!(poles[i] - poles[i + 1] > kGapTol * spread))
        throw Error(ErrorCode::InvalidSemiaxes, "poles must be strictly decreasing");
    ConfocalPencil p;
    p.center_ = Vector::Zero(k);
    p.frame_ = Matrix::Identity(k, k);
    p.mass_ = 1.0;
    p.poles_ = poles;
    p.moments_ = 2 * poles[0] - poles.array();
    p.moments_[0] = poles[0];
    p.scale_ = std::sqrt(spread);
    return p;
  }

  Eigen::Index dim() const { return center_.size(); }
  const Vector& center() const { return center_; }
  const Matrix& frame() const { return frame_; }
  const Vector& principal_moments() const { return moments_; }
  const Vector& poles() const { return poles_; }
  double mass() const { return mass_; }
  double scale() const { return scale_; }

  Vector to_principal(const Vector& x) const {
    detail::require_dim(x, dim(), "point");
    return frame_.transpose() * (x - center_);
  }
  Vector from_principal(const Vector& y) const { return center_ + frame_ * y; }
  Vector direction_to_principal(const Vector& v) const { return frame_.transpose() * v; }
  Vector direction_from_principal(const Vector& v) const { return frame_ * v; }

  double tangent_moment(double lambda) const { return 2 * moments_[0] - mass_ * lambda; }
  double lambda_for_moment(double moment) const { return (2 * moments_[0] - moment) / mass_; }
  // Level of the mass-normalized axial gyration ellipsoid.
  double gyration_moment() const { return moments_.sum(); }

  struct AttachPair {
    Eigen::Index index;  // 0-based principal index i >= 1
    Vector plus;
    Vector minus;
  };

  // Points on the first principal axis where moments J_1 and J_i coincide.
  std::vector<AttachPair> attached_points() const {
    std::vector<AttachPair> out;
    for (Eigen::Index i = 1; i < dim(); ++i) {
      const double a = std::sqrt((moments_[i] - moments_[0]) / mass_);
      const Vector off = a * frame_.col(0);
      out.push_back({i, center_ + off, center_ - off});
    }
    return out;
  }

 private:
  ConfocalPencil() = default;
  Vector center_;
  Matrix frame_;
  Vector moments_;
  Vector poles_;
  double mass_ = 1;
  double scale_ = 1;
};

struct JacobiCoordinates {
  Vector lambdas;                // ascending
  std::vector<bool> degenerate;  // root equals a pole
  Vector point_principal;
};

namespace detail {

// Root of sum w_i/(a_i - x) = 1 inside (lo, hi) where the left side increases.
template <class F>
double bisect_increasing(F&& f, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (f(mid) < 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline bool near_pole(double lambda, const Vector& poles) {
  for (Eigen::Index i = 0; i < poles.size(); ++i)
    if (std::abs(lambda - poles[i]) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(poles[i])))
      return true;
  return false;
}

}  // namespace detail

inline JacobiCoordinates jacobi_coordinates(const ConfocalPencil& pencil, const Vector& point) {
  const Vector y = pencil.to_principal(point);
  const Vector& a = pencil.poles();
  const Eigen::Index k = pencil.dim();
  std::vector<Eigen::Index> live;
  std::vector<double> roots;
  std::vector<bool> flags;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(y[i]) < kCoordTol * pencil.scale()) {
      roots.push_back(a[i]);
      flags.push_back(true);
    } else {
      live.push_back(i);
    }
  }
  auto f = [&](double lambda) {
    double s = -1.0;
    for (Eigen::Index i : live) s += y[i] * y[i] / (a[i] - lambda);
    return s;
  };
  if (!live.empty()) {
    double r2 = 0;
    for (Eigen::Index i : live) r2 += y[i] * y[i];
    const double lowest = a[live.back()];
    roots.push_back(detail::bisect_increasing(f, lowest - r2 * (1 + 1e-12) - 1e-300, lowest));
    flags.push_back(false);
    for (std::size_t j = live.size() - 1; j > 0; --j) {
      roots.push_back(detail::bisect_increasing(f, a[live[j]], a[live[j - 1]]));
      flags.push_back(false);
    }
  }
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return roots[l] < roots[r]; });
  JacobiCoordinates out{Vector(k), std::vector<bool>(static_cast<std::size_t>(k)), y};
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.lambdas[static_cast<Eigen::Index>(i)] = roots[order[i]];
    out.degenerate[i] = flags[order[i]];
  }
  return out;
}

class QuadricMember {
 public:
  QuadricMember(ConfocalPencil pencil, double lambda) : pencil_(std::move(pencil)), lambda_(lambda) {
    if (!std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "member parameter must be finite");
    if (detail::near_pole(lambda, pencil_.poles()))
      throw Error(ErrorCode::InvalidArgument, "member parameter coincides with a pole");
  }

  const ConfocalPencil& pencil() const { return pencil_; }
  double lambda() const { return lambda_; }
  // Number of poles above lambda: k is an ellipsoid, 0 is empty.
  int type_index() const { return static_cast<int>((pencil_.poles().array() > lambda_).count()); }
  bool is_ellipsoid() const { return type_index() == pencil_.dim(); }
  Vector semiaxes2() const { return pencil_.poles().array() - lambda_; }
  double tangent_moment() const { return pencil_.tangent_moment(lambda_); }

  double value_principal(const Vector& y) const { return (y.array().square() / semiaxes2().array()).sum(); }
  double value(const Vector& x) const { return value_principal(pencil_.to_principal(x)); }

 private:
  ConfocalPencil pencil_;
  double lambda_;
};

struct DegenerateHyperplane {
  Eigen::Index index;  // 0-based principal index
  Hyperplane plane;
};

struct NoSolution {};

using Envelope = std::variant<QuadricMember, DegenerateHyperplane, NoSolution>;

inline Envelope envelope_for_moment(const ConfocalPencil& pencil, double moment) {
  const Vector& j = pencil.principal_moments();
  const double tol = 1e-12 * j.cwiseAbs().maxCoeff();
  if (moment < j[0] - tol) return NoSolution{};
  for (Eigen::Index i = 0; i < j.size(); ++i)
    if (std::abs(moment - j[i]) <= tol)
      return DegenerateHyperplane{i, Hyperplane::through(pencil.center(), pencil.frame().col(i))};
  return QuadricMember(pencil, pencil.lambda_for_moment(moment));
}

inline Hyperplane tangent_hyperplane(const QuadricMember& member, const Vector& point) {
  const ConfocalPencil& p = member.pencil();
  const Vector y = p.to_principal(point);
  if (!(std::abs(member.value_principal(y) - 1) < kOnQuadricTol))
    throw Error(ErrorCode::PointNotOnQuadric, "point does not lie on the member");
  const Vector g = y.array() / member.semiaxes2().array();
  return Hyperplane::through(point, p.direction_from_principal(g));
}

inline double tangent_moment(const ConfocalPencil& pencil, double lambda) { return pencil.tangent_moment(lambda); }

struct ThreadSlice {
  double focal_distance;  // c(theta)
  double minor_semiaxis;  // r(theta)
  std::vector<Eigen::Vector3d> points;
};

// Ellipse cut from x^2/alpha + y^2/beta + z^2/gamma = 1 by the plane through the
// x axis at angle theta, drawn as a thread of length 2 sqrt(alpha) pinned at (+-c, 0, 0).
inline ThreadSlice thread_slice(const Eigen::Vector3d& semiaxes2, double theta, int n_samples) {
  const double al = semiaxes2[0], be = semiaxes2[1], ga = semiaxes2[2];
  if (!(al > be && be > ga && ga > 0) || !semiaxes2.allFinite())
    throw Error(ErrorCode::InvalidSemiaxes, "need alpha > beta > gamma > 0");
  if (!(theta >= 0 && theta <= std::numbers::pi / 2))
    throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, pi/2]");
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const double co = std::cos(theta), si = std::sin(theta);
  const double r2 = be * ga / (ga * co * co + be * si * si);
  ThreadSlice out{std::sqrt(al - r2), std::sqrt(r2), {}};
  out.points.reserve(static_cast<std::size_t>(n_samples));
  const double ra = std::sqrt(al);
  for (int j = 0; j < n_samples; ++j) {
    const double t = 2 * std::numbers::pi * j / n_samples;
    const double s = out.minor_semiaxis * std::sin(t);
    out.points.emplace_back(ra * std::cos(t), s * co, s * si);
  }
  return out;
}

}  // namespace confocal
