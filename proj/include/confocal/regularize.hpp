#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"
#include "confocal/pencil.hpp"

namespace confocal {

enum class NormKind { L1, L2 };

inline constexpr std::uint64_t kDefaultFitSeed = 0x5eedc0f0ca1ULL;
inline constexpr int kFitStarts = 16;
inline constexpr double kFitStepTol = 1e-12;
inline constexpr double kVertexTol = 1e-8;

// Hyperplane {x : <u, x> = 1}.
class CoefficientVector {
 public:
  explicit CoefficientVector(Vector u) : u_(std::move(u)) {
    if (!u_.allFinite()) throw Error(ErrorCode::InvalidArgument, "coefficients must be finite");
    if (!(u_.norm() > 0)) throw Error(ErrorCode::ZeroVector, "coefficient vector is zero");
  }

  static CoefficientVector from_hyperplane(const Hyperplane& plane) {
    if (plane.offset() == 0)
      throw Error(ErrorCode::InvalidArgument, "hyperplanes through the origin have no coefficient vector");
    return CoefficientVector(plane.normal() / plane.offset());
  }

  const Vector& values() const { return u_; }
  Eigen::Index dim() const { return u_.size(); }
  Hyperplane hyperplane() const { return Hyperplane(u_, 1.0); }
  double norm(NormKind kind) const { return kind == NormKind::L1 ? u_.lpNorm<1>() : u_.norm(); }

 private:
  Vector u_;
};

inline double moment_of_coefficients(const WeightedPointSet& ps, const CoefficientVector& u) {
  detail::require_dim(u.values(), ps.dim(), "coefficients");
  const Vector r = (ps.coords() * u.values()).array() - 1.0;
  return ps.masses().dot(r.cwiseAbs2()) / u.values().squaredNorm();
}

// Form over (u, u0) for planes <u, x> + u0 = 0; value / |u|^2 is level - moment.
class DualQuadric {
 public:
  DualQuadric(Matrix form, double level) : form_(std::move(form)), level_(level) {}

  const Matrix& matrix() const { return form_; }
  double level() const { return level_; }
  Eigen::Index dim() const { return form_.rows() - 1; }

  double evaluate(const Vector& u, double u0) const {
    Vector xi(u.size() + 1);
    xi << u, u0;
    return xi.dot(form_ * xi) / u.squaredNorm();
  }
  double residual(const Hyperplane& plane) const { return evaluate(plane.normal(), -plane.offset()); }
  double residual(const CoefficientVector& u) const { return evaluate(u.values(), -1.0); }

 private:
  Matrix form_;
  double level_;
};

inline DualQuadric dual_quadric(const ConfocalPencil& pencil, double level) {
  const Vector& j = pencil.principal_moments();
  if (level < j[0] - 1e-12 * j.cwiseAbs().maxCoeff())
    throw Error(ErrorCode::NoEnvelope, "level is below the least principal moment");
  const Eigen::Index k = pencil.dim();
  Matrix t = Matrix::Zero(k + 1, k + 1);
  t.topLeftCorner(k, k) = pencil.frame().transpose();
  t.block(k, 0, 1, k) = pencil.center().transpose();
  t(k, k) = 1;
  Vector d(k + 1);
  d.head(k) = level - j.array();
  d[k] = -pencil.mass();
  Matrix form = t.transpose() * d.asDiagonal() * t;
  return DualQuadric(0.5 * (form + form.transpose()), level);
}

inline Vector project_l2_ball(const Vector& v, double radius) {
  const double n = v.norm();
  return n <= radius ? v : Vector(v * (radius / n));
}

inline Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> w(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) w[i] = std::abs(v[i]);
  std::sort(w.begin(), w.end(), std::greater<>());
  double cum = 0, theta = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    cum += w[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (w[j] - t > 0) theta = t;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = std::copysign(std::max(std::abs(v[i]) - theta, 0.0), v[i]);
  return out;
}

struct ConstrainedFit {
  CoefficientVector coefficients;
  double moment;
  bool constraint_active;
  std::vector<Eigen::Index> zero_coordinates;
  double kkt_residual;
};

namespace detail {

struct CoefficientObjective {
  Matrix j;
  Vector c;
  double m;

  double value(const Vector& u) const {
    const double t = c.dot(u) - 1;
    return (u.dot(j * u) + m * t * t) / u.squaredNorm();
  }
  Vector gradient(const Vector& u) const {
    const double uu = u.squaredNorm();
    const double t = c.dot(u) - 1;
    return (2 * (j * u) + 2 * m * t * c - 2 * value(u) * u) / uu;
  }
};

inline Vector project_ball(const Vector& v, NormKind kind, double bound) {
  return kind == NormKind::L1 ? project_l1_ball(v, bound) : project_l2_ball(v, bound);
}

inline Vector scale_to_boundary(const Vector& v, NormKind kind, double bound) {
  const double n = kind == NormKind::L1 ? v.lpNorm<1>() : v.norm();
  return v * (bound / n);
}

inline double kkt_residual(const Vector& u, const Vector& g, NormKind kind) {
  const double gn = g.norm();
  if (!(gn > 0)) return 0;
  if (kind == NormKind::L2) {
    const double mu = -g.dot(u) / u.squaredNorm();
    return ((g + mu * u).norm() + std::max(0.0, -mu) * u.norm()) / gn;
  }
  const double cut = kVertexTol * u.cwiseAbs().maxCoeff();
  double mu = 0;
  int live = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > cut) {
      mu += -g[i] * (u[i] > 0 ? 1 : -1);
      ++live;
    }
  mu /= std::max(live, 1);
  double r2 = mu < 0 ? mu * mu : 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double e = std::abs(u[i]) > cut ? -g[i] - mu * (u[i] > 0 ? 1 : -1) : std::max(0.0, std::abs(g[i]) - mu);
    r2 += e * e;
  }
  return std::sqrt(r2) / gn;
}

// Spectral projected gradient with a nonmonotone Armijo search; stops when the projected step falls below
// kFitStepTol relative to |u| at the reference step length.
inline Vector projected_descent(const CoefficientObjective& obj, Vector u, NormKind kind, double bound, double step0) {
  constexpr int kMemory = 10;
  std::vector<double> recent{obj.value(u)};
  Vector g = obj.gradient(u);
  double alpha = step0;
  for (int it = 0; it < 20000; ++it) {
    const Vector pg = project_ball(u - step0 * g, kind, bound) - u;
    if (pg.norm() < kFitStepTol * u.norm()) break;
    const Vector d = project_ball(u - alpha * g, kind, bound) - u;
    const double slope = g.dot(d);
    const double ref = *std::max_element(recent.begin(), recent.end());
    double t = 1;
    Vector next = u + d;
    double fn = next.norm() > 0 ? obj.value(next) : std::numeric_limits<double>::infinity();
    while (!(fn <= ref + 1e-4 * t * slope) && t > 1e-20) {
      t *= 0.5;
      next = u + t * d;
      fn = next.norm() > 0 ? obj.value(next) : std::numeric_limits<double>::infinity();
    }
    if (!(fn <= ref + 1e-4 * t * slope)) break;
    const Vector gn = obj.gradient(next);
    const Vector sv = next - u, yv = gn - g;
    const double sy = sv.dot(yv);
    alpha = sy > 0 ? std::clamp(sv.squaredNorm() / sy, 1e-6 * step0, 1e6 * step0) : 1e6 * step0;
    u = next;
    g = gn;
    recent.push_back(fn);
    if (static_cast<int>(recent.size()) > kMemory) recent.erase(recent.begin());
  }
  return u;
}

}  // namespace detail

// Minimizer of the hyperplanar moment over {<u, x> = 1} with |u|_norm <= bound.
inline ConstrainedFit constrained_fit(const WeightedPointSet& ps, NormKind kind, double bound,
                                      std::uint64_t seed = kDefaultFitSeed) {
  if (!(bound > 0) || !std::isfinite(bound)) throw Error(ErrorCode::InvalidArgument, "bound must be positive");
  const Eigen::Index k = ps.dim();
  const Vector c = centroid(ps);
  const SymmetricOperator jc = inertia_operator(ps, c);
  const EigenDecomposition eig = symmetric_eigen(jc);
  const detail::CoefficientObjective obj{jc.matrix(), c, ps.total_mass()};
  auto norm_of = [&](const Vector& v) { return kind == NormKind::L1 ? v.lpNorm<1>() : v.norm(); };
  auto finish = [&](const Vector& u, bool active) {
    const CoefficientVector cv(u);
    std::vector<Eigen::Index> zeros;
    const double cut = kVertexTol * u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < k; ++i)
      if (std::abs(u[i]) <= cut) zeros.push_back(i);
    const double kkt = active ? detail::kkt_residual(u, obj.gradient(u), kind) : obj.gradient(u).norm() * u.norm() /
                                                                                   std::max(obj.value(u), 1e-300);
    return ConstrainedFit{cv, moment_of_coefficients(ps, cv), active, std::move(zeros), kkt};
  };

  const Vector n1 = eig.vectors.col(0);
  const double p = n1.dot(c);
  const double spread = std::sqrt(std::max(eig.values.sum(), 0.0) / ps.total_mass()) + c.norm();
  std::vector<Vector> starts;
  if (std::abs(p) > 1e-14 * spread) {
    const Vector ustar = n1 / p;
    if (norm_of(ustar) <= bound) return finish(ustar, false);
    starts.push_back(detail::scale_to_boundary(ustar, kind, bound));
  }
  for (Eigen::Index i = 0; i < k && static_cast<int>(starts.size()) < kFitStarts; ++i)
    for (double s : {1.0, -1.0})
      if (static_cast<int>(starts.size()) < kFitStarts)
        starts.push_back(detail::scale_to_boundary(s * eig.vectors.col(i), kind, bound));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; static_cast<int>(starts.size()) < kFitStarts; ++i) {
    Vector v = eig.vectors.col(i % k) * (i % 2 == 0 ? 1.0 : -1.0);
    for (Eigen::Index d = 0; d < k; ++d) v[d] += 0.5 * gauss(rng);
    if (v.norm() > 0) starts.push_back(detail::scale_to_boundary(v, kind, bound));
  }

  const double curvature = 2 * (eig.values[k - 1] + ps.total_mass() * c.squaredNorm());
  Vector best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const Vector& s : starts) {
    const double step0 = s.squaredNorm() / std::max(curvature, 1e-300);
    const Vector u = detail::projected_descent(obj, s, kind, bound, step0);
    const double f = obj.value(u);
    if (f < best_f) {
      best_f = f;
      best = u;
    }
  }
  return finish(best, true);
}

}  // namespace confocal
