#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "otb/domain.hpp"
#include "otb/errors.hpp"

using otb::Domain;
using otb::DomainKind;
using otb::Mat;
using otb::Vec;

namespace {
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
}  // namespace

TEST_CASE("box membership, projection and geometry") {
  Domain d = Domain::box(v2(0.0, -1.0), v2(1.0, 1.0));
  REQUIRE(d.kind() == DomainKind::box);
  REQUIRE(d.dim() == 2);

  REQUIRE(d.contains(v2(0.5, 0.0)));
  REQUIRE(d.contains(v2(0.0, 1.0)));            // closure
  REQUIRE(d.contains(v2(-1e-13, 0.0)));         // inside the membership tol
  REQUIRE_FALSE(d.contains(v2(-0.1, 0.0)));
  REQUIRE_FALSE(d.contains(v2(0.5, 1.5)));

  REQUIRE(d.project(v2(2.0, -3.0)) == v2(1.0, -1.0));
  REQUIRE(d.project(v2(0.3, 0.3)) == v2(0.3, 0.3));

  REQUIRE(d.boundary_distance(v2(0.5, 0.0)) == 0.5);
  REQUIRE(d.boundary_distance(v2(0.25, 0.9)) == Catch::Approx(0.1));
  REQUIRE(d.diameter() == Catch::Approx(std::sqrt(5.0)));
  REQUIRE(d.inradius() == 0.5);

  REQUIRE_THROWS_AS(d.contains(Vec::Zero(3)), otb::DimensionMismatchError);
  REQUIRE_THROWS_AS(Domain::box(v2(0.0, 0.0), v2(1.0, 0.0)), otb::Error);
}

TEST_CASE("box inward normals") {
  Domain d = Domain::box(v2(0.0, 0.0), v2(1.0, 2.0));
  Vec n = d.inward_normal(v2(0.0, 1.0));
  REQUIRE(n == v2(1.0, 0.0));
  n = d.inward_normal(v2(0.5, 2.0));
  REQUIRE(n == v2(0.0, -1.0));
  REQUIRE_THROWS_AS(d.inward_normal(v2(0.0, 0.0)), otb::AmbiguousNormalError);
  REQUIRE_THROWS_AS(d.inward_normal(v2(0.5, 1.0)), otb::Error);
}

TEST_CASE("half line") {
  Domain d = Domain::half_line(2);
  REQUIRE(d.contains(v2(0.0, 5.0)));
  REQUIRE_FALSE(d.contains(v2(-0.1, 5.0)));
  REQUIRE(d.project(v2(-2.0, 3.0)) == v2(0.0, 3.0));
  REQUIRE(d.boundary_distance(v2(2.0, 3.0)) == 2.0);
  REQUIRE(d.inradius() == otb::kInf);
  REQUIRE_THROWS_AS(d.diameter(), otb::UnboundedDomainError);
  REQUIRE(d.inward_normal(v2(0.0, 1.0)) == v2(1.0, 0.0));
  REQUIRE_THROWS_AS(d.inward_normal(v2(0.0, 0.0)), otb::AmbiguousNormalError);
  REQUIRE_THROWS_AS(Domain::half_line(0), otb::DimensionMismatchError);
}

TEST_CASE("triangle polytope") {
  // x >= 0, y >= 0, x + y <= 1
  Mat a(3, 2);
  a << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
  Vec b(3);
  b << 0.0, 0.0, 1.0;
  Domain d = Domain::polytope(a, b);

  REQUIRE(d.vertices().size() == 3);
  REQUIRE(d.diameter() == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(d.contains(v2(0.2, 0.2)));
  REQUIRE_FALSE(d.contains(v2(0.7, 0.7)));

  // projection of (1,1) lands on the hypotenuse midpoint
  Vec p = d.project(v2(1.0, 1.0));
  REQUIRE(p[0] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(p[1] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(d.project(v2(0.1, 0.2)) == v2(0.1, 0.2));

  Vec n = d.inward_normal(v2(0.5, 0.5));
  REQUIRE(n[0] == Catch::Approx(-1.0 / std::sqrt(2.0)));
  REQUIRE(n[1] == Catch::Approx(-1.0 / std::sqrt(2.0)));
  REQUIRE_THROWS_AS(d.inward_normal(v2(0.0, 0.0)), otb::AmbiguousNormalError);

  // nearest faces: the axes for (0.25,0.25), the hypotenuse for (0.4,0.4)
  REQUIRE(d.boundary_distance(v2(0.25, 0.25)) == Catch::Approx(0.25));
  REQUIRE(d.boundary_distance(v2(0.4, 0.4)) ==
          Catch::Approx(0.2 / std::sqrt(2.0)));
}

TEST_CASE("degenerate polytopes are rejected") {
  Mat quadrant(2, 2);
  quadrant << -1.0, 0.0, 0.0, -1.0;
  Vec b0 = Vec::Zero(2);
  REQUIRE_THROWS_AS(Domain::polytope(quadrant, b0), otb::UnboundedDomainError);

  Mat empty(2, 1);
  empty << 1.0, -1.0;  // x <= -1 and -x <= -1
  Vec be(2);
  be << -1.0, -1.0;
  REQUIRE_THROWS_AS(Domain::polytope(empty, be), otb::Error);

  Mat wide(1, 7);
  wide.setOnes();
  REQUIRE_THROWS_AS(Domain::polytope(wide, Vec::Ones(1)), otb::SizeLimitError);
}

TEST_CASE("json round trips") {
  Domain box = Domain::box(v2(-0.5, 0.0), v2(0.5, 2.0));
  Domain box2 = Domain::from_json(box.to_json());
  REQUIRE(box2.kind() == DomainKind::box);
  REQUIRE(box2.lower() == box.lower());
  REQUIRE(box2.upper() == box.upper());

  Domain hl = Domain::half_line(3);
  REQUIRE(Domain::from_json(hl.to_json()).dim() == 3);

  Mat a(3, 2);
  a << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
  Vec b(3);
  b << 0.0, 0.0, 1.0;
  Domain poly = Domain::polytope(a, b);
  Domain poly2 = Domain::from_json(poly.to_json());
  REQUIRE(poly2.kind() == DomainKind::polytope);
  REQUIRE(poly2.a() == poly.a());
  REQUIRE(poly2.b() == poly.b());

  REQUIRE_THROWS_AS(Domain::from_json(nlohmann::json{{"kind", "disk"}}),
                    otb::ConfigError);
  REQUIRE_THROWS_AS(Domain::from_json(nlohmann::json{{"kind", "box"}}),
                    otb::ConfigError);
}

TEST_CASE("inner shrink") {
  Domain d = Domain::box(v2(0.0, 0.0), v2(1.0, 1.0));
  otb::InnerDomain in = otb::inner_shrink(d, 0.2);
  REQUIRE(in.contains(v2(0.5, 0.5)));
  REQUIRE_FALSE(in.contains(v2(0.1, 0.5)));
  REQUIRE(in.project(v2(0.05, 0.5)) == v2(0.2, 0.5));
  REQUIRE_THROWS_AS(otb::inner_shrink(d, 0.5), otb::EmptyInnerDomainError);
  REQUIRE_THROWS_AS(otb::inner_shrink(d, 0.0), otb::Error);

  Domain hl = Domain::half_line(1);
  otb::InnerDomain ih = otb::inner_shrink(hl, 0.3);
  REQUIRE(ih.project(Vec::Zero(1))[0] == 0.3);
  REQUIRE(ih.contains(Vec::Ones(1)));
}
