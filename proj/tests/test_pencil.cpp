#include <gtest/gtest.h>

#include <numbers>

#include "confocal/pencil.hpp"
#include "test_support.hpp"

using namespace confocal;
using namespace testing_support;

namespace {

ConfocalPencil cells_pencil() { return ConfocalPencil::from_points(WeightedPointSet(cells_xy())); }

// Random point on member lambda in the principal frame, when one exists along the sampled ray.
std::optional<Vector> point_on_member(Rng& rng, const QuadricMember& m) {
  const Vector d = rng.normal_vector(m.pencil().dim());
  const double q = m.value_principal(d);
  if (!(q > 1e-6)) return std::nullopt;
  return m.pencil().from_principal(d / std::sqrt(q));
}

}  // namespace

TEST(BuildPencil, CellsPoles) {
  const ConfocalPencil p = cells_pencil();
  EXPECT_LT(rel(p.poles()[0], 0.13921), 1e-5);
  EXPECT_LT(rel(p.poles()[1], -12.76154), 1e-6);
  EXPECT_DOUBLE_EQ(p.poles()[0], p.principal_moments()[0] / p.mass());
}

TEST(BuildPencil, ForbesPoles) {
  const ConfocalPencil p = ConfocalPencil::from_points(WeightedPointSet(forbes_xy()));
  EXPECT_LT(rel(p.poles()[0], 0.037552), 2e-5);
  EXPECT_LT(rel(p.poles()[1], -39.69441), 1e-6);
}

TEST(BuildPencil, SymmetricSetHasDiagonalAxes) {
  Matrix pts(5, 2);
  pts << 1, 0, -1, 0, 0, 1, 0, -1, 2, 2;
  const ConfocalPencil p = ConfocalPencil::from_points(WeightedPointSet(pts));
  const double s = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(p.frame().col(0).dot(Eigen::Vector2d(s, -s))), 1, 1e-12);
  EXPECT_NEAR(std::abs(p.frame().col(1).dot(Eigen::Vector2d(s, s))), 1, 1e-12);
}

TEST(BuildPencil, Rejections) {
  Matrix sq(4, 2);
  sq << 1, 1, -1, 1, -1, -1, 1, -1;
  try {
    ConfocalPencil::from_points(WeightedPointSet(sq));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
  }
  Matrix line(3, 2);
  line << 0, 0, 1, 2, 2, 4;
  try {
    ConfocalPencil::from_points(WeightedPointSet(line));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(BuildPencil, GyrationEllipsoidIsTraceMember) {
  Rng rng(31);
  for (Eigen::Index k = 2; k <= 5; ++k) {
    const WeightedPointSet ps = random_cloud(rng, k, 30);
    const ConfocalPencil p = ConfocalPencil::from_points(ps);
    const QuadricMember g(p, p.lambda_for_moment(p.gyration_moment()));
    EXPECT_TRUE(g.is_ellipsoid());
    const double trace = p.principal_moments().sum();
    for (Eigen::Index i = 0; i < k; ++i) {
      const double axial = trace - p.principal_moments()[i];
      const Vector y = Vector::Unit(k, i) * std::sqrt(axial / p.mass());
      EXPECT_NEAR(g.value_principal(y), 1, 1e-9);
    }
  }
}

TEST(BuildPencil, AttachedPointsEqualizeMoments) {
  Rng rng(32);
  const WeightedPointSet ps = random_cloud(rng, 4, 30);
  const ConfocalPencil p = ConfocalPencil::from_points(ps);
  for (const auto& a : p.attached_points()) {
    for (const Vector& f : {a.plus, a.minus}) {
      const Vector mu = symmetric_eigen(inertia_operator(ps, f)).values;
      const double ji = p.principal_moments()[a.index];
      int hits = 0;
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (rel(mu[i], ji) < 1e-9) ++hits;
      EXPECT_EQ(hits, 2);
    }
  }
}

TEST(JacobiCoordinates, CellsOrigin) {
  const JacobiCoordinates jc = jacobi_coordinates(cells_pencil(), Vector::Zero(2));
  EXPECT_LT(rel(jc.lambdas[0], -186.907), 1e-5);
  EXPECT_LT(rel(jc.lambdas[1], -0.73589), 1e-5);
}

TEST(JacobiCoordinates, CentroidGivesPoles) {
  const ConfocalPencil p = cells_pencil();
  const JacobiCoordinates jc = jacobi_coordinates(p, p.center());
  EXPECT_DOUBLE_EQ(jc.lambdas[0], p.poles()[1]);
  EXPECT_DOUBLE_EQ(jc.lambdas[1], p.poles()[0]);
  EXPECT_TRUE(jc.degenerate[0] && jc.degenerate[1]);
}

TEST(JacobiCoordinates, ForbesPoint) {
  const ConfocalPencil p = ConfocalPencil::from_points(WeightedPointSet(forbes_xy()));
  const JacobiCoordinates jc = jacobi_coordinates(p, Eigen::Vector2d(201.5, 24.5));
  EXPECT_LT(rel(jc.lambdas[0], -42.0876), 1e-5);
  EXPECT_LT(rel(jc.lambdas[1], 0.007398), 1e-4);
  EXPECT_LT(rel(std::abs(jc.point_principal[0]), 0.1788025), 1e-5);
  EXPECT_LT(rel(std::abs(jc.point_principal[1]), 1.5464), 1e-4);
}

TEST(JacobiCoordinates, InterlaceAndSolveEquation) {
  Rng rng(33);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index k = rng.integer(2, 5);
    const ConfocalPencil p = ConfocalPencil::from_points(random_cloud(rng, k, 25));
    const Vector x = p.center() + rng.normal_vector(k) * rng.uniform(0.1, 10);
    const JacobiCoordinates jc = jacobi_coordinates(p, x);
    const Vector& a = p.poles();
    EXPECT_LT(jc.lambdas[0], a[k - 1]);
    for (Eigen::Index j = 1; j < k; ++j) {
      EXPECT_GT(jc.lambdas[j], a[k - j]);
      EXPECT_LT(jc.lambdas[j], a[k - j - 1]);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      const QuadricMember m(p, jc.lambdas[j]);
      EXPECT_NEAR(m.value(x), 1, 1e-9);
    }
  }
}

TEST(JacobiCoordinates, DualToPointInertiaEigenvalues) {
  Rng rng(34);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index k = rng.integer(2, 4);
    const WeightedPointSet ps = random_cloud(rng, k, 20);
    const ConfocalPencil p = ConfocalPencil::from_points(ps);
    const Vector x = p.center() + rng.normal_vector(k) * 3;
    const JacobiCoordinates jc = jacobi_coordinates(p, x);
    const Vector mu = symmetric_eigen(inertia_operator(ps, x)).values;
    for (Eigen::Index i = 0; i < k; ++i) EXPECT_LT(rel(p.tangent_moment(jc.lambdas[k - 1 - i]), mu[i]), 1e-9);
  }
}

TEST(JacobiCoordinates, PointOnPrincipalHyperplaneIsFlagged) {
  Rng rng(35);
  const WeightedPointSet ps = random_cloud(rng, 3, 20);
  const ConfocalPencil p = ConfocalPencil::from_points(ps);
  const Vector x = p.from_principal(Eigen::Vector3d(1.3, 0.0, -2.1));
  const JacobiCoordinates jc = jacobi_coordinates(p, x);
  int flagged = 0;
  for (Eigen::Index i = 0; i < 3; ++i)
    if (jc.degenerate[static_cast<std::size_t>(i)]) {
      ++flagged;
      EXPECT_DOUBLE_EQ(jc.lambdas[i], p.poles()[1]);
    }
  EXPECT_EQ(flagged, 1);
  const Vector mu = symmetric_eigen(inertia_operator(ps, x)).values;
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LT(rel(p.tangent_moment(jc.lambdas[2 - i]), mu[i]), 1e-9);
}

TEST(Envelope, LeastMomentIsBestHyperplane) {
  const ConfocalPencil p = cells_pencil();
  const Envelope e = envelope_for_moment(p, p.principal_moments()[0]);
  ASSERT_TRUE(std::holds_alternative<DegenerateHyperplane>(e));
  const auto& d = std::get<DegenerateHyperplane>(e);
  EXPECT_EQ(d.index, 0);
  EXPECT_LT(rel(hyperplanar_moment(WeightedPointSet(cells_xy()), d.plane), 0.69605), 1e-5);
}

TEST(Envelope, GyrationLevelAndBelowLeast) {
  const ConfocalPencil p = cells_pencil();
  const Envelope e = envelope_for_moment(p, p.gyration_moment());
  ASSERT_TRUE(std::holds_alternative<QuadricMember>(e));
  const auto& m = std::get<QuadricMember>(e);
  EXPECT_TRUE(m.is_ellipsoid());
  const Vector s = m.semiaxes2();
  for (Eigen::Index i = 0; i < 2; ++i)
    EXPECT_LT(rel(s[i], (p.gyration_moment() - p.principal_moments()[i]) / p.mass()), 1e-12);
  EXPECT_TRUE(std::holds_alternative<NoSolution>(envelope_for_moment(p, p.principal_moments()[0] - 1)));
}

TEST(Envelope, ClassificationByBand) {
  Rng rng(36);
  const ConfocalPencil p = ConfocalPencil::from_points(random_cloud(rng, 4, 30));
  const Vector& j = p.principal_moments();
  for (Eigen::Index i = 0; i + 1 < 4; ++i) {
    const Envelope e = envelope_for_moment(p, 0.5 * (j[i] + j[i + 1]));
    ASSERT_TRUE(std::holds_alternative<QuadricMember>(e));
    EXPECT_EQ(std::get<QuadricMember>(e).type_index(), i + 1);
  }
  EXPECT_EQ(std::get<QuadricMember>(envelope_for_moment(p, j[3] * 2)).type_index(), 4);
  const Envelope d = envelope_for_moment(p, j[2]);
  ASSERT_TRUE(std::holds_alternative<DegenerateHyperplane>(d));
  EXPECT_EQ(std::get<DegenerateHyperplane>(d).index, 2);
}

TEST(TangentHyperplane, EllipseVertex) {
  const QuadricMember m(ConfocalPencil::canonical(Eigen::Vector2d(4, 1)), 0);
  const Hyperplane h = tangent_hyperplane(m, Eigen::Vector2d(2, 0));
  EXPECT_NEAR(h.normal()[0], 1, 1e-15);
  EXPECT_NEAR(h.normal()[1], 0, 1e-15);
  EXPECT_NEAR(h.offset(), 2, 1e-15);
  EXPECT_THROW(tangent_hyperplane(m, Eigen::Vector2d(1, 0)), Error);
}

TEST(TangentHyperplane, CellsRestrictedBestLine) {
  const ConfocalPencil p = cells_pencil();
  const JacobiCoordinates jc = jacobi_coordinates(p, Vector::Zero(2));
  const Hyperplane h = tangent_hyperplane(QuadricMember(p, jc.lambdas[1]), Vector::Zero(2));
  EXPECT_NEAR(h.offset(), 0, 1e-12);
  EXPECT_LT(rel(-h.normal()[0] / h.normal()[1], 0.30014), 1e-5);
}

TEST(TangentHyperplane, TangencyIdentityAndMoment) {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index k = rng.integer(2, 4);
    const WeightedPointSet ps = random_cloud(rng, k, 20);
    const ConfocalPencil p = ConfocalPencil::from_points(ps);
    const QuadricMember m(p, p.poles()[k - 1] - rng.uniform(0.1, 5));
    const auto x = point_on_member(rng, m);
    ASSERT_TRUE(x);
    const Hyperplane h = tangent_hyperplane(m, *x);
    const Vector n = p.direction_to_principal(h.normal());
    const double pp = -h.signed_distance(p.center());
    EXPECT_LT(std::abs(n.cwiseAbs2().dot(m.semiaxes2()) - pp * pp), 1e-9 * m.semiaxes2().maxCoeff());
    EXPECT_LT(rel(direct_moment(ps, h.normal(), h.offset()), m.tangent_moment()), 1e-9);
  }
}

TEST(TangentMoment, Values) {
  const ConfocalPencil p = cells_pencil();
  EXPECT_DOUBLE_EQ(p.tangent_moment(p.poles()[0]), p.principal_moments()[0]);
  EXPECT_LT(rel(p.tangent_moment(-0.73589), 5.071564), 1e-5);
}

TEST(TangentMoment, AllTangentPlanesOfMemberAgree) {
  Rng rng(38);
  const WeightedPointSet ps = random_cloud(rng, 3, 25);
  const ConfocalPencil p = ConfocalPencil::from_points(ps);
  for (double lambda : {p.poles()[2] - 2.0, 0.5 * (p.poles()[1] + p.poles()[2]), 0.5 * (p.poles()[0] + p.poles()[1])}) {
    const QuadricMember m(p, lambda);
    int used = 0;
    while (used < 20) {
      const auto x = point_on_member(rng, m);
      if (!x) continue;
      const Hyperplane h = tangent_hyperplane(m, *x);
      EXPECT_LT(rel(direct_moment(ps, h.normal(), h.offset()), p.tangent_moment(lambda)), 1e-9);
      ++used;
    }
  }
}

TEST(PlanarFoci, DistanceProductAndEnvelope) {
  Rng rng(39);
  const WeightedPointSet ps = random_cloud(rng, 2, 15);
  const ConfocalPencil p = ConfocalPencil::from_points(ps);
  const auto foci = p.attached_points().front();
  for (double lambda : {p.poles()[1] - 3.0, 0.5 * (p.poles()[0] + p.poles()[1])}) {
    const QuadricMember m(p, lambda);
    for (int t = 0; t < 20;) {
      const auto x = point_on_member(rng, m);
      if (!x) continue;
      ++t;
      const Hyperplane h = tangent_hyperplane(m, *x);
      const double d1 = h.signed_distance(foci.plus), d2 = h.signed_distance(foci.minus);
      EXPECT_NEAR(d1 * d2, p.poles()[1] - lambda, 1e-10 * std::max(1.0, std::abs(p.poles()[1] - lambda)));
    }
  }
  for (int t = 0; t < 20; ++t) {
    const Hyperplane h(rng.unit_vector(2), rng.normal() * 2 + rng.unit_vector(2).dot(p.center()));
    const double d1 = h.signed_distance(foci.plus), d2 = h.signed_distance(foci.minus);
    EXPECT_LT(rel(hyperplanar_moment(ps, h), p.principal_moments()[1] + p.mass() * d1 * d2), 1e-9);
  }
}

TEST(ThreadSlice, ExtremeAngles) {
  const Eigen::Vector3d s(10, 8, 2);
  const ThreadSlice a = thread_slice(s, 0, 100);
  EXPECT_NEAR(a.focal_distance, std::sqrt(2.0), 1e-14);
  for (const auto& x : a.points) EXPECT_NEAR(x[2], 0, 1e-15);
  const ThreadSlice b = thread_slice(s, std::numbers::pi / 2, 100);
  EXPECT_NEAR(b.focal_distance, std::sqrt(8.0), 1e-14);
}

TEST(ThreadSlice, QuarterAngleOnEllipsoidWithConstantThread) {
  const Eigen::Vector3d s(10, 8, 2);
  const ThreadSlice sl = thread_slice(s, std::numbers::pi / 4, 1000);
  EXPECT_NEAR(sl.focal_distance * sl.focal_distance, 6.8, 1e-12);
  const Eigen::Vector3d c1(sl.focal_distance, 0, 0), c2(-sl.focal_distance, 0, 0);
  const Eigen::Vector3d plane_normal(0, -std::sin(std::numbers::pi / 4), std::cos(std::numbers::pi / 4));
  for (const auto& x : sl.points) {
    EXPECT_NEAR(x[0] * x[0] / 10 + x[1] * x[1] / 8 + x[2] * x[2] / 2, 1, 1e-12);
    EXPECT_NEAR((x - c1).norm() + (x - c2).norm(), 2 * std::sqrt(10.0), 1e-12);
    EXPECT_NEAR(x.dot(plane_normal), 0, 1e-14);
  }
}

TEST(ThreadSlice, RejectsBadSemiaxes) {
  try {
    thread_slice(Eigen::Vector3d(2, 8, 10), 0.1, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSemiaxes);
  }
}
