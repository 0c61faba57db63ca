#include <gtest/gtest.h>

#include "confocal/billiards.hpp"
#include "test_support.hpp"

using namespace confocal;
using namespace testing_support;

namespace {

double spread(const ConfocalPencil& p) { return p.poles().cwiseAbs().maxCoeff(); }

Vector interior_point(Rng& rng, const QuadricMember& m) {
  const Vector d = rng.normal_vector(m.pencil().dim());
  return m.pencil().from_principal(d / std::sqrt(m.value_principal(d)) * rng.uniform(0.1, 0.8));
}

void expect_same_caustics(const CausticSet& a, const CausticSet& b, double scale) {
  ASSERT_EQ(a.lambdas.size(), b.lambdas.size());
  for (std::size_t i = 0; i < a.lambdas.size(); ++i) EXPECT_NEAR(a.lambdas[i], b.lambdas[i], 1e-8 * scale);
}

}  // namespace

TEST(Reflect, NormalIncidence) {
  const QuadricMember m(ConfocalPencil::canonical(Eigen::Vector2d(4, 1)), 0);
  const Ray r = reflect(Ray(Vector::Zero(2), Eigen::Vector2d(1, 0)), m);
  EXPECT_NEAR(r.point[0], 2, 1e-14);
  EXPECT_NEAR(r.point[1], 0, 1e-14);
  EXPECT_NEAR(r.direction[0], -1, 1e-14);
  EXPECT_NEAR(r.direction[1], 0, 1e-14);
}

TEST(Reflect, EqualAnglesAndOnMember) {
  Rng rng(81);
  const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 3, 20));
  const QuadricMember m(pen, pen.poles()[2] - 2);
  for (int t = 0; t < 50; ++t) {
    const Ray in(interior_point(rng, m), rng.unit_vector(3));
    const Ray out = reflect(in, m);
    EXPECT_NEAR(m.value(out.point), 1, 1e-10);
    const Vector n = tangent_hyperplane(m, out.point).normal();
    EXPECT_NEAR(in.direction.dot(n), -out.direction.dot(n), 1e-12);
    const Vector back = in.direction - in.direction.dot(n) * n;
    const Vector fwd = out.direction - out.direction.dot(n) * n;
    EXPECT_LT((back - fwd).norm(), 1e-12);
    const Vector seg = out.point - in.point;
    EXPECT_NEAR(seg.normalized().dot(in.direction), 1, 1e-12);
  }
}

TEST(Reflect, MissingRayThrows) {
  const QuadricMember m(ConfocalPencil::canonical(Eigen::Vector2d(4, 1)), 0);
  try {
    reflect(Ray(Eigen::Vector2d(5, 0), Eigen::Vector2d(1, 0)), m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoIntersection);
  }
}

TEST(Caustics, TangentLineHasMemberAsCaustic) {
  Rng rng(82);
  for (int t = 0; t < 20; ++t) {
    const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 3, 20));
    const QuadricMember m(pen, pen.poles()[2] - rng.uniform(0.2, 4));
    const Vector d = rng.normal_vector(3);
    const Vector x = pen.from_principal(d / std::sqrt(m.value_principal(d)));
    const Vector n = tangent_hyperplane(m, x).normal();
    Vector v = rng.normal_vector(3);
    v -= v.dot(n) * n;
    const CausticSet cs = caustics_of_flat(pen, FlatSubspace::line(x, v));
    double closest = std::numeric_limits<double>::infinity();
    for (double g : cs.lambdas) closest = std::min(closest, std::abs(g - m.lambda()));
    EXPECT_LT(closest, 1e-8 * spread(pen));
    EXPECT_LT(tangency_residual(pen, FlatSubspace::line(x, v), m.lambda()), 1e-9);
  }
}

TEST(Caustics, AudinArrangementAndTangency) {
  Rng rng(83);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index k = rng.integer(2, 4);
    const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, k, 20));
    const FlatSubspace line = FlatSubspace::line(pen.center() + rng.normal_vector(k) * 2, rng.unit_vector(k));
    const CausticSet cs = caustics_of_flat(pen, line);
    EXPECT_EQ(static_cast<Eigen::Index>(cs.lambdas.size()), k - 1);
    EXPECT_TRUE(audin_arrangement(pen, cs));
    for (double g : cs.lambdas) {
      EXPECT_LT(tangency_residual(pen, line, g), 1e-9);
      const Vector x = tangency_point(pen, line, g);
      EXPECT_LT(line.distance2(x), 1e-18 * std::max(1.0, x.squaredNorm()));
      EXPECT_NEAR(QuadricMember(pen, g).value(x), 1, 1e-8);
    }
  }
}

TEST(Caustics, TwoFlatInFourSpaceHasOrthogonalTangentHyperplanes) {
  Rng rng(84);
  for (int t = 0; t < 20; ++t) {
    const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 4, 30));
    Matrix dirs(4, 2);
    dirs << rng.normal_vector(4), rng.normal_vector(4);
    const FlatSubspace flat(pen.center() + rng.normal_vector(4) * 2, dirs);
    const CausticSet cs = caustics_of_flat(pen, flat);
    ASSERT_EQ(cs.lambdas.size(), 2u);
    std::vector<Vector> normals;
    for (double g : cs.lambdas) {
      const QuadricMember m(pen, g);
      const Vector x = tangency_point(pen, flat, g);
      const Vector n = tangent_hyperplane(m, x).normal();
      EXPECT_LT((flat.basis().transpose() * n).norm(), 1e-8);
      normals.push_back(n);
    }
    EXPECT_NEAR(normals[0].dot(normals[1]), 0, 1e-8);
  }
}

TEST(Caustics, MomentViaCausticsMatchesDirect) {
  Rng rng(85);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index k = rng.integer(2, 4);
    const WeightedPointSet ps = random_cloud(rng, k, 25);
    const ConfocalPencil pen = ConfocalPencil::from_points(ps);
    const Eigen::Index ell = rng.integer(1, static_cast<int>(k) - 1);
    Matrix dirs(k, ell);
    for (Eigen::Index j = 0; j < ell; ++j) dirs.col(j) = rng.normal_vector(k);
    const FlatSubspace flat(pen.center() + rng.normal_vector(k) * 2, dirs);
    EXPECT_LT(rel(moment_via_caustics(pen, flat), l_planar_moment(ps, flat)), 1e-8);
    EXPECT_LT(rel(moment_via_caustics(pen, flat), gram_moment(ps, flat.base_point(), dirs)), 1e-8);
  }
}

TEST(Caustics, PrincipalAxisLineHasCoordinateCaustics) {
  const ConfocalPencil pen = ConfocalPencil::canonical(Eigen::Vector3d(5, 3, 1));
  const CausticSet cs = caustics_of_flat(pen, FlatSubspace::line(Vector::Zero(3), Eigen::Vector3d(1, 0, 0)));
  ASSERT_EQ(cs.lambdas.size(), 2u);
  EXPECT_NEAR(cs.lambdas[0], 1, 1e-12);
  EXPECT_NEAR(cs.lambdas[1], 3, 1e-12);
  const CausticSet minor = caustics_of_flat(pen, FlatSubspace::line(Vector::Zero(3), Eigen::Vector3d(0, 0, 1)));
  EXPECT_NEAR(minor.lambdas[0], 3, 1e-12);
  EXPECT_NEAR(minor.lambdas[1], 5, 1e-12);
}

TEST(Caustics, PlanarAxesCases) {
  const ConfocalPencil pen = ConfocalPencil::canonical(Eigen::Vector2d(4, 1));
  const CausticSet minor = caustics_of_flat(pen, FlatSubspace::line(Eigen::Vector2d(0, 0.3), Eigen::Vector2d(0, 1)));
  EXPECT_NEAR(minor.lambdas[0], 4, 1e-12);
  const CausticSet major = caustics_of_flat(pen, FlatSubspace::line(Eigen::Vector2d(0.3, 0), Eigen::Vector2d(1, 0)));
  EXPECT_NEAR(major.lambdas[0], 1, 1e-12);
}

TEST(Joachimsthal, AxisValues) {
  const JoachimsthalValue minor = joachimsthal_2d(4, 1, Ray(Vector::Zero(2), Eigen::Vector2d(0, 1)));
  EXPECT_NEAR(minor.value, 1.0, 1e-15);
  EXPECT_NEAR(minor.caustic, 4, 1e-14);
  const JoachimsthalValue major = joachimsthal_2d(4, 1, Ray(Vector::Zero(2), Eigen::Vector2d(1, 0)));
  EXPECT_NEAR(major.value, 0.25, 1e-15);
  EXPECT_NEAR(major.caustic, 1, 1e-14);
  EXPECT_THROW(joachimsthal_2d(1, 4, Ray(Vector::Zero(2), Eigen::Vector2d(1, 0))), Error);
}

TEST(Joachimsthal, AgreesWithCausticOfLine) {
  Rng rng(86);
  const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 2, 20));
  const QuadricMember m(pen, pen.poles()[1] - 3);
  for (int t = 0; t < 30; ++t) {
    const Ray r(interior_point(rng, m), rng.unit_vector(2));
    const double g = caustics_of_flat(pen, r.line()).lambdas[0];
    EXPECT_NEAR(joachimsthal_2d(m, r).caustic, g, 1e-9 * spread(pen));
  }
}

TEST(Trajectory, PlanarConservation) {
  Rng rng(87);
  const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 2, 20));
  const QuadricMember m(pen, pen.poles()[1] - 3);
  for (int t = 0; t < 5; ++t) {
    const std::vector<Ray> path = trajectory(m, Ray(interior_point(rng, m), rng.unit_vector(2)), 50);
    ASSERT_EQ(path.size(), 51u);
    const JoachimsthalValue j0 = joachimsthal_2d(m, path.front());
    const CausticSet c0 = caustics_of_flat(pen, path.front().line());
    for (std::size_t i = 1; i < path.size(); ++i) {
      EXPECT_NEAR(joachimsthal_2d(m, path[i]).value, j0.value, 1e-8 * std::abs(j0.value));
      expect_same_caustics(caustics_of_flat(pen, path[i].line()), c0, spread(pen));
      EXPECT_NEAR(m.value(path[i].point), 1, 1e-10);
    }
  }
}

TEST(Trajectory, SpatialConservation) {
  Rng rng(88);
  for (int t = 0; t < 5; ++t) {
    const ConfocalPencil pen = ConfocalPencil::from_points(random_cloud(rng, 3, 20));
    const QuadricMember m(pen, pen.poles()[2] - rng.uniform(0.5, 3));
    const std::vector<Ray> path = trajectory(m, Ray(interior_point(rng, m), rng.unit_vector(3)), 50);
    const CausticSet c0 = caustics_of_flat(pen, path.front().line());
    EXPECT_TRUE(audin_arrangement(pen, c0));
    const Vector h0 = higher_axial_moments(pen, path.front());
    for (std::size_t i = 1; i < path.size(); ++i) {
      const CausticSet ci = caustics_of_flat(pen, path[i].line());
      expect_same_caustics(ci, c0, spread(pen));
      EXPECT_TRUE(audin_arrangement(pen, ci));
      const Vector hi = higher_axial_moments(pen, path[i]);
      for (Eigen::Index s = 0; s < h0.size(); ++s) EXPECT_LT(rel(hi[s], h0[s]), 1e-8);
    }
  }
}

TEST(Trajectory, HigherMomentsArePowerSums) {
  Rng rng(89);
  const WeightedPointSet ps = random_cloud(rng, 3, 20);
  const ConfocalPencil pen = ConfocalPencil::from_points(ps);
  const Ray r(pen.center() + rng.normal_vector(3), rng.unit_vector(3));
  const Vector h = higher_axial_moments(pen, r);
  ASSERT_EQ(h.size(), 2);
  EXPECT_LT(rel(h[0], axial_moment(ps, r.line())), 1e-8);
  const CausticSet cs = caustics_of_flat(pen, r.line());
  const double t0 = pen.tangent_moment(cs.lambdas[0]), t1 = pen.tangent_moment(cs.lambdas[1]);
  EXPECT_LT(rel(h[1], t0 * t0 + t1 * t1), 1e-12);
}

TEST(Trajectory, MajorAxisBouncesBackAndForth) {
  const QuadricMember m(ConfocalPencil::canonical(Eigen::Vector2d(4, 1)), 0);
  const std::vector<Ray> path = trajectory(m, Ray(Vector::Zero(2), Eigen::Vector2d(1, 0)), 4);
  EXPECT_NEAR(path[1].point[0], 2, 1e-14);
  EXPECT_NEAR(path[2].point[0], -2, 1e-14);
  EXPECT_NEAR(path[3].point[0], 2, 1e-14);
  EXPECT_NEAR(path[4].point[0], -2, 1e-14);
  for (const Ray& r : path) EXPECT_NEAR(r.point[1], 0, 1e-14);
}

TEST(Trajectory, Rejections) {
  const ConfocalPencil pen = ConfocalPencil::canonical(Eigen::Vector2d(4, 1));
  try {
    trajectory(QuadricMember(pen, 2), Ray(Vector::Zero(2), Eigen::Vector2d(1, 0)), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotEllipsoidType);
  }
  EXPECT_THROW(trajectory(QuadricMember(pen, 0), Ray(Eigen::Vector2d(5, 0), Eigen::Vector2d(1, 0)), 3), Error);
  EXPECT_THROW(trajectory(QuadricMember(pen, 0), Ray(Vector::Zero(2), Eigen::Vector2d(1, 0)), -1), Error);
}
