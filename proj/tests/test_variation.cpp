#include <gtest/gtest.h>

#include "support.hpp"

using namespace varifold;
using vt::v2;
using vt::v3;

namespace {

TestField random_field(int n, std::mt19937_64& rng, const Vec& near) {
  std::uniform_real_distribution<double> u(0.5, 2.5);
  const Profile p = Profile::bump(near + vt::random_point(n, rng, 0.5), u(rng));
  switch (rng() % 3) {
    case 0: return TestField::constant(p, vt::random_point(n, rng));
    case 1: return TestField::affine(p, Mat::Random(n, n), vt::random_point(n, rng));
    default: return TestField::rotation(p, n, 0, n - 1);
  }
}

double atom_pairing(const std::vector<VariationAtom>& atoms, const TestField& g) {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass * g.evaluate(a.location).dot(a.omega);
  return s;
}

}  // namespace

TEST(TestField, InvariantsHoldForLibraryFields) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 4; ++n) {
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(validate_test_field(random_field(n, rng, Vec::Zero(n)), rng));
    EXPECT_TRUE(validate_test_field(TestField::constant(Profile::plateau(Vec::Zero(n), 0.5, 1.5), Vec::Ones(n)), rng));
  }
}

TEST(FirstVariation, Examples) {
  DiscreteVarifold seg(2);
  seg.add(SegmentPiece(v2(0, 0), v2(1, 0), 1.0));
  const auto g = TestField::constant(Profile::bump(v2(1, 0), 0.3), v2(2, 5));
  EXPECT_NEAR(first_variation(seg, g), g.evaluate(v2(1, 0)).dot(v2(1, 0)), 1e-15);

  const auto Y = vt::y_junction();
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(first_variation(Y, random_field(2, rng, Vec::Zero(2))), 0.0, 1e-14);

  // g = plateau * (x, 0) with plateau = 1 on the segment
  const auto h = TestField::affine(Profile::plateau(v2(0.5, 0), 1.0, 2.0), (Mat(2, 2) << 1, 0, 0, 0).finished(),
                                   Vec::Zero(2));
  EXPECT_NEAR(first_variation(seg, h), 1.0, 1e-15);
  EXPECT_NEAR(vt::first_variation_quadrature(seg, h), 1.0, 1e-8);
}

TEST(FirstVariation, ClosedFormMatchesQuadrature) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const auto V = vt::random_varifold(n, rng, 2, 1);
    const auto g = random_field(n, rng, V.segments[0].a);
    const double cf = first_variation(V, g);
    const double q = vt::first_variation_quadrature(V, g);
    EXPECT_NEAR(cf, q, 1e-8 * std::max(1.0, std::abs(q)));
  }
}

TEST(VertexResiduals, Examples) {
  DiscreteVarifold line(2);
  add_line(line, v2(0, 0), v2(1, 0));
  EXPECT_TRUE(vertex_residuals(line).empty());

  DiscreteVarifold ray(2);
  ray.add(RayPiece(v2(0, 0), v2(1, 0), 1.0));
  const auto atoms = vertex_residuals(ray);
  ASSERT_EQ(atoms.size(), 1u);
  EXPECT_EQ(atoms[0].omega, v2(-1, 0));
  EXPECT_EQ(atoms[0].mass, 1.0);
  const auto g = TestField::constant(Profile::bump(v2(0, 0), 0.5), v2(1, 0));
  EXPECT_NEAR(first_variation(ray, g), -g.evaluate(v2(0, 0))[0], 1e-15);
  EXPECT_NEAR(first_variation(ray, g), atom_pairing(atoms, g), 1e-15);

  EXPECT_TRUE(vertex_residuals(vt::y_junction()).empty());
  DiscreteVarifold heavy = vt::y_junction();
  heavy.rays[2].weight = 2.0;
  const auto h = vertex_residuals(heavy);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_NEAR(h[0].mass, 1.0, 1e-15);
  EXPECT_LE((h[0].omega + heavy.rays[2].direction).norm(), 1e-15);
}

TEST(VertexResiduals, RepresentFirstVariation) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const auto V = vt::random_varifold(n, rng);
    const auto atoms = vertex_residuals(V);
    for (const auto& a : atoms) {
      EXPECT_NEAR(a.omega.norm(), 1.0, 1e-12);
      EXPECT_GT(a.mass, 0.0);
    }
    for (int k = 0; k < 20; ++k) {
      const auto g = random_field(n, rng, Vec::Zero(n));
      EXPECT_NEAR(first_variation(V, g), atom_pairing(atoms, g), 1e-8);
    }
  }
}

TEST(IsStationary, ExamplesAndDilationInvariance) {
  DiscreteVarifold line(3);
  add_line(line, v3(1, 2, 3), v3(0, 1, 1));
  EXPECT_TRUE(is_stationary(line, 1e-12).stationary);
  EXPECT_TRUE(is_stationary(vt::y_junction(3), 1e-12).stationary);
  DiscreteVarifold seg(2);
  seg.add(SegmentPiece(v2(0, 0), v2(1, 0), 2.5));
  const auto rep = is_stationary(seg, 1e-12);
  EXPECT_FALSE(rep.stationary);
  EXPECT_EQ(rep.max_residual, 2.5);
  EXPECT_THROW(is_stationary(seg, 0.0), InvalidInput);

  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto V = vt::balanced_network(n, rng);
    ASSERT_TRUE(is_stationary(V, 1e-12).stationary);
    const double lambda = std::uniform_real_distribution<double>(0.01, 10.0)(rng);
    EXPECT_TRUE(is_stationary(dilate(V, vt::random_point(n, rng), lambda), 1e-10).stationary);
  }
}

TEST(BoundaryVariation, Examples) {
  DiscreteVarifold line(2);
  add_line(line, v2(1, 1), v2(1, 1));
  const auto atoms = boundary_variation(line, v2(1, 1), 0.5);
  ASSERT_EQ(atoms.size(), 2u);
  for (const auto& a : atoms) {
    EXPECT_EQ(a.mass, 1.0);
    EXPECT_GE(a.omega.dot((a.location - v2(1, 1)).normalized()), 0.99);
  }

  const auto Y = vt::y_junction();
  const auto ya = boundary_variation(Y, v2(0, 0), 0.7);
  ASSERT_EQ(ya.size(), 3u);
  for (const auto& a : ya) EXPECT_NEAR(a.omega.dot(a.location) / 0.7, 1.0, 1e-15);

  // chord at distance d: omega makes angle arccos(sqrt(1 - d^2/r^2)) with the radial direction
  DiscreteVarifold chord(2);
  add_line(chord, v2(0, 0.3), v2(1, 0));
  const auto ca = boundary_variation(chord, v2(0, 0), 0.5);
  ASSERT_EQ(ca.size(), 2u);
  for (const auto& a : ca) {
    EXPECT_NEAR(a.omega.dot(a.location.normalized()), std::sqrt(1.0 - 0.09 / 0.25), 1e-15);
  }
}

TEST(BoundaryVariation, Degeneracies) {
  DiscreteVarifold tangent(2);
  add_line(tangent, v2(0, 1), v2(1, 0));
  EXPECT_THROW(boundary_variation(tangent, v2(0, 0), 1.0), DegenerateGeometry);
  DiscreteVarifold touching(2);
  touching.add(SegmentPiece(v2(0, 0), v2(1, 0), 1.0));
  EXPECT_THROW(boundary_variation(touching, v2(0, 0), 1.0), DegenerateGeometry);
  EXPECT_THROW(boundary_variation(touching, v2(0, 0), 0.0), InvalidInput);
}

TEST(BoundaryVariation, OutwardAndCompletesRestrictedVariation) {
  std::mt19937_64 rng(16);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const auto V = vt::random_varifold(n, rng);
    const Vec y = vt::random_point(n, rng);
    const auto r = find_regular_radius(V, y, 0.5, 2.0);
    ASSERT_TRUE(r.has_value());
    const auto atoms = boundary_variation(V, y, *r);
    for (const auto& a : atoms) EXPECT_GE(a.omega.dot((a.location - y) / *r), -1e-12);
    // delta(V_r) = interior residuals + boundary atoms. The restricted
    // varifold's own residuals at crossing points are the boundary atoms.
    const auto Vr = restrict(V, y, *r, Keep::Inside);
    for (int k = 0; k < 10; ++k) {
      const auto g = random_field(n, rng, y);
      double interior = 0.0;
      for (const auto& a : vertex_residuals(V)) {
        if ((a.location - y).norm() < *r) interior += a.mass * g.evaluate(a.location).dot(a.omega);
      }
      EXPECT_NEAR(first_variation(Vr, g), interior + atom_pairing(atoms, g), 1e-8);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}
