#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"
#include "confocal/pencil.hpp"

namespace confocal {

inline constexpr double kHitTol = 1e-10;
inline constexpr double kTangencyTol = 1e-9;

struct Ray {
  Vector point;
  Vector direction;

  Ray(Vector p, Vector d) : point(std::move(p)), direction(std::move(d)) {
    if (point.size() != direction.size()) throw Error(ErrorCode::InvalidArgument, "ray dimension mismatch");
    if (!point.allFinite() || !direction.allFinite()) throw Error(ErrorCode::InvalidArgument, "ray must be finite");
    const double n = direction.norm();
    if (!(n > 0)) throw Error(ErrorCode::ZeroVector, "ray direction is zero");
    direction /= n;
  }

  FlatSubspace line() const { return FlatSubspace::line(point, direction); }
};

struct CausticSet {
  std::vector<double> lambdas;  // ascending
};

inline Ray reflect(const Ray& ray, const QuadricMember& member) {
  const ConfocalPencil& pen = member.pencil();
  const Vector p = pen.to_principal(ray.point);
  const Vector v = pen.direction_to_principal(ray.direction);
  const Vector s = member.semiaxes2();
  const double qa = (v.array().square() / s.array()).sum();
  const double qb = 2 * (p.array() * v.array() / s.array()).sum();
  const double qc = (p.array().square() / s.array()).sum() - 1;
  const double tmin = kHitTol * pen.scale();
  double hit = std::numeric_limits<double>::infinity();
  auto consider = [&](double t) {
    if (std::isfinite(t) && t > tmin) hit = std::min(hit, t);
  };
  if (qa == 0) {
    if (qb != 0) consider(-qc / qb);
  } else {
    const double disc = qb * qb - 4 * qa * qc;
    if (disc >= 0) {
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      consider(q / qa);
      if (q != 0) consider(qc / q);
    }
  }
  if (!std::isfinite(hit)) throw Error(ErrorCode::NoIntersection, "ray does not meet the member");
  const Vector h = p + hit * v;
  const Vector n = (h.array() / s.array()).matrix().normalized();
  const Vector w = (v - 2 * v.dot(n) * n).normalized();
  return Ray(pen.from_principal(h), pen.direction_from_principal(w));
}

namespace detail {

// det M(lambda) * prod(a_i - lambda) for M = W^T diag(1/(a - lambda), -1) W, expanded by Cauchy-Binet.
class TangencyPolynomial {
 public:
  TangencyPolynomial(const Vector& poles, const Matrix& basis, const Vector& base) : a_(poles) {
    const Eigen::Index k = poles.size();
    const Eigen::Index ell = basis.cols();
    Matrix w = Matrix::Zero(k + 1, ell + 1);
    w.topLeftCorner(k, ell) = basis;
    w.block(0, ell, k, 1) = base;
    w(k, ell) = 1;
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(ell + 1));
    std::vector<bool> mask(static_cast<std::size_t>(k + 1), false);
    std::fill(mask.end() - (ell + 1), mask.end(), true);
    do {
      Matrix ws(ell + 1, ell + 1);
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i <= k; ++i)
        if (mask[static_cast<std::size_t>(i)]) ws.row(r++) = w.row(i);
      const double d = ws.determinant();
      if (d != 0) terms_.push_back({mask, d * d});
    } while (std::next_permutation(mask.begin(), mask.end()));
  }

  // Value and a positive normalizer of the same magnitude.
  std::pair<double, double> operator()(double lambda) const {
    const Eigen::Index k = a_.size();
    double val = 0, norm = 0;
    for (const Term& t : terms_) {
      double prod = t.weight;
      for (Eigen::Index i = 0; i < k; ++i)
        if (!t.mask[static_cast<std::size_t>(i)]) prod *= a_[i] - lambda;
      val += t.mask[static_cast<std::size_t>(k)] ? -prod : prod;
      norm += std::abs(prod);
    }
    return {val, norm};
  }

 private:
  struct Term {
    std::vector<bool> mask;
    double weight;
  };
  Vector a_;
  std::vector<Term> terms_;
};

struct PrincipalFlat {
  Vector base;   // closest point to the center, principal frame
  Matrix basis;  // principal frame, orthonormal
};

inline PrincipalFlat to_principal(const ConfocalPencil& pencil, const FlatSubspace& flat) {
  detail::require_dim(flat.base_point(), pencil.dim(), "flat");
  const Matrix b = pencil.frame().transpose() * flat.basis();
  Vector base = pencil.to_principal(flat.base_point());
  base -= b * (b.transpose() * base);
  return {base, b};
}

}  // namespace detail

inline CausticSet caustics_of_flat(const ConfocalPencil& pencil, const FlatSubspace& flat) {
  const detail::PrincipalFlat pf = detail::to_principal(pencil, flat);
  const Vector& a = pencil.poles();
  const Eigen::Index k = a.size();
  const Eigen::Index ell = pf.basis.cols();
  const Eigen::Index want = k - ell;
  const detail::TangencyPolynomial poly(a, pf.basis, pf.base);

  const double low = a[k - 1] - 2 * (pf.base.squaredNorm() + (a[0] - a[k - 1]));
  std::vector<double> grid;
  const int per_gap = static_cast<int>(64 * want);
  std::vector<double> knots{low};
  for (Eigen::Index i = k - 1; i >= 0; --i) knots.push_back(a[i]);
  for (std::size_t g = 0; g + 1 < knots.size(); ++g)
    for (int j = 0; j < per_gap; ++j) grid.push_back(knots[g] + (knots[g + 1] - knots[g]) * j / per_gap);
  grid.push_back(knots.back());

  constexpr double zero_tol = 1e-12;
  std::vector<double> vals(grid.size());
  std::vector<bool> zero(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [v, n] = poly(grid[i]);
    vals[i] = v;
    zero[i] = std::abs(v) <= zero_tol * n;
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (zero[i]) {
      roots.push_back(grid[i]);
      continue;
    }
    if (i + 1 < grid.size() && !zero[i + 1] && (vals[i] < 0) != (vals[i + 1] < 0)) {
      double lo = grid[i], hi = grid[i + 1];
      const bool lo_neg = vals[i] < 0;
      for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if ((poly(mid).first < 0) == lo_neg) lo = mid;
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
  }
  if (static_cast<Eigen::Index>(roots.size()) != want)
    throw Error(ErrorCode::DegenerateFlat, "found " + std::to_string(roots.size()) + " tangency parameters, expected " +
                                               std::to_string(want));
  std::sort(roots.begin(), roots.end());
  return CausticSet{roots};
}

// Relative residual of the tangency condition at lambda.
inline double tangency_residual(const ConfocalPencil& pencil, const FlatSubspace& flat, double lambda) {
  const detail::PrincipalFlat pf = detail::to_principal(pencil, flat);
  const auto [v, n] = detail::TangencyPolynomial(pencil.poles(), pf.basis, pf.base)(lambda);
  return n > 0 ? std::abs(v) / n : 0.0;
}

// Point where the flat touches member lambda, original frame.
inline Vector tangency_point(const ConfocalPencil& pencil, const FlatSubspace& flat, double lambda) {
  const detail::PrincipalFlat pf = detail::to_principal(pencil, flat);
  if (detail::near_pole(lambda, pencil.poles()))
    throw Error(ErrorCode::DegenerateFlat, "tangency parameter coincides with a pole");
  const Vector d = (pencil.poles().array() - lambda).inverse();
  const Matrix bdb = pf.basis.transpose() * d.asDiagonal() * pf.basis;
  const Vector t = -bdb.fullPivLu().solve(pf.basis.transpose() * d.asDiagonal() * pf.base);
  return pencil.from_principal(pf.base + pf.basis * t);
}

inline double moment_via_caustics(const ConfocalPencil& pencil, const FlatSubspace& flat) {
  double sum = 0;
  for (double g : caustics_of_flat(pencil, flat).lambdas) sum += pencil.tangent_moment(g);
  return sum;
}

// Power sums s = 1..k-1 of the caustic tangent moments of a line.
inline Vector higher_axial_moments(const ConfocalPencil& pencil, const Ray& ray) {
  const CausticSet cs = caustics_of_flat(pencil, ray.line());
  const Eigen::Index k = pencil.dim();
  Vector out = Vector::Zero(k - 1);
  for (double g : cs.lambdas) {
    const double t = pencil.tangent_moment(g);
    double pw = 1;
    for (Eigen::Index s = 0; s < k - 1; ++s) {
      pw *= t;
      out[s] += pw;
    }
  }
  return out;
}

// Caustic parameters interlace with the poles: gamma_j is b_{2j-1} or b_{2j} of the merged sorted list.
inline bool audin_arrangement(const ConfocalPencil& pencil, const CausticSet& caustics) {
  const Eigen::Index k = pencil.dim();
  if (static_cast<Eigen::Index>(caustics.lambdas.size()) != k - 1) return false;
  std::vector<double> b(caustics.lambdas);
  for (Eigen::Index i = 0; i < k; ++i) b.push_back(pencil.poles()[i]);
  std::sort(b.begin(), b.end());
  std::vector<double> g(caustics.lambdas);
  std::sort(g.begin(), g.end());
  for (std::size_t j = 0; j < g.size(); ++j)
    if (g[j] != b[2 * j] && g[j] != b[2 * j + 1]) return false;
  return true;
}

struct JoachimsthalValue {
  double value;    // F
  double caustic;  // lambda_0
};

// Ellipse x^2/alpha + y^2/beta = 1; the caustic is the confocal conic with semiaxes^2 (alpha - lambda_0, beta - lambda_0).
inline JoachimsthalValue joachimsthal_2d(double alpha, double beta, const Ray& ray) {
  if (!(alpha > beta && beta > 0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidSemiaxes, "need alpha > beta > 0");
  if (ray.point.size() != 2) throw Error(ErrorCode::InvalidArgument, "Joachimsthal integral is planar");
  const double x = ray.point[0], y = ray.point[1];
  const double dx = ray.direction[0], dy = ray.direction[1];
  const double cross = dx * y - dy * x;
  const double f = dx * dx / alpha + dy * dy / beta - cross * cross / (alpha * beta);
  return {f, alpha * beta * f};
}

// Same integral for a planar pencil member; the caustic is returned as a pencil parameter.
inline JoachimsthalValue joachimsthal_2d(const QuadricMember& member, const Ray& ray) {
  const ConfocalPencil& pen = member.pencil();
  if (pen.dim() != 2) throw Error(ErrorCode::InvalidArgument, "Joachimsthal integral is planar");
  if (!member.is_ellipsoid()) throw Error(ErrorCode::NotEllipsoidType, "member is not an ellipse");
  const Vector s = member.semiaxes2();
  const JoachimsthalValue j =
      joachimsthal_2d(s[0], s[1], Ray(pen.to_principal(ray.point), pen.direction_to_principal(ray.direction)));
  return {j.value, member.lambda() + j.caustic};
}

// Start ray followed by one ray per bounce.
inline std::vector<Ray> trajectory(const QuadricMember& member, const Ray& start, int bounces) {
  if (!member.is_ellipsoid()) throw Error(ErrorCode::NotEllipsoidType, "billiards need an ellipsoid member");
  if (bounces < 0) throw Error(ErrorCode::InvalidArgument, "bounce count must be non-negative");
  if (member.value(start.point) > 1 + 1e-9) throw Error(ErrorCode::InvalidArgument, "start point lies outside the member");
  std::vector<Ray> out{start};
  out.reserve(static_cast<std::size_t>(bounces) + 1);
  for (int b = 0; b < bounces; ++b) out.push_back(reflect(out.back(), member));
  return out;
}

}  // namespace confocal
