#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "otb/domain.hpp"
#include "otb/eot.hpp"
#include "otb/errors.hpp"
#include "otb/kernels.hpp"
#include "otb/ldp.hpp"
#include "otb/measure.hpp"
#include "otb/rng.hpp"

using otb::CostMatrix;
using otb::DiscreteMeasure;
using otb::Mat;
using otb::OtSolution;
using otb::Vec;

namespace {

DiscreteMeasure points_1d(std::initializer_list<double> xs) {
  Mat pts(static_cast<int>(xs.size()), 1);
  int i = 0;
  for (double x : xs) pts(i++, 0) = x;
  return DiscreteMeasure::uniform(pts);
}

DiscreteMeasure random_uniform_1d(otb::RngStream& r, int n) {
  Mat pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = 5.0 * r.uniform01();
  return DiscreteMeasure::uniform(pts);
}

OtSolution manual_solution(Mat plan, const CostMatrix& cost) {
  OtSolution sol;
  sol.plan = std::move(plan);
  sol.value = 0.0;
  for (int i = 0; i < sol.plan.rows(); ++i)
    for (int j = 0; j < sol.plan.cols(); ++j)
      sol.value += sol.plan(i, j) * cost.values(i, j);
  sol.support = otb::support_set(sol.plan);
  return sol;
}

}  // namespace

TEST_CASE("support extraction thresholds relative to the largest entry") {
  Mat plan(2, 3);
  plan << 0.5, 1e-13 * 0.5, 0.0,
          0.0, 0.25, 0.25;
  otb::SupportSet s = otb::support_set(plan);
  REQUIRE(s.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {1, 2}});
  REQUIRE(s.x0 == std::vector<int>{0, 1});
  REQUIRE(s.y0 == std::vector<int>{0, 1, 2});
  REQUIRE(s.tol == 1e-12 * 0.5);
  REQUIRE(s.in_x0(1));
  REQUIRE_FALSE(s.in_y0(3));

  // a looser threshold can drop small mass
  otb::SupportSet coarse = otb::support_set(plan, 0.6);
  REQUIRE(coarse.pairs == std::vector<std::pair<int, int>>{{0, 0}});

  REQUIRE_THROWS_AS(otb::support_set(Mat::Zero(2, 2)), otb::Error);
}

TEST_CASE("the two exact solvers agree bitwise on uniform instances") {
  otb::RngStream r(501, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(r.uniform01() * 5.99);
    DiscreteMeasure mu = random_uniform_1d(r, n);
    DiscreteMeasure nu = random_uniform_1d(r, n);
    CostMatrix c = otb::quadratic_cost(mu, nu);
    OtSolution bru = otb::ot_bruteforce_permutations(mu, nu, c);
    OtSolution smx = otb::ot_transport_simplex(mu, nu, c);
    REQUIRE(bru.value == smx.value);
    REQUIRE((bru.plan - smx.plan).cwiseAbs().maxCoeff() == 0.0);

    // dispatch picks the permutation oracle here
    OtSolution via = otb::exact_ot(mu, nu, c);
    REQUIRE(via.value == bru.value);
  }
}

TEST_CASE("one-dimensional quadratic transport matches by rank") {
  otb::RngStream r(502, 1);
  const int n = 6;
  DiscreteMeasure mu = random_uniform_1d(r, n);
  DiscreteMeasure nu = random_uniform_1d(r, n);
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);

  std::vector<int> rx(n), ry(n);
  std::iota(rx.begin(), rx.end(), 0);
  std::iota(ry.begin(), ry.end(), 0);
  std::sort(rx.begin(), rx.end(),
            [&](int a, int b) { return mu.points(a, 0) < mu.points(b, 0); });
  std::sort(ry.begin(), ry.end(),
            [&](int a, int b) { return nu.points(a, 0) < nu.points(b, 0); });
  Mat expect = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k)
    expect(rx[static_cast<std::size_t>(k)], ry[static_cast<std::size_t>(k)]) =
        1.0 / n;
  REQUIRE((sol.plan - expect).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(sol.eta == 0.0);
}

TEST_CASE("shifted pair instance has optimal value one eighth") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  DiscreteMeasure nu = points_1d({0.5, 1.5});
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);
  REQUIRE(sol.value == 0.125);
  REQUIRE(sol.support.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("solver guards") {
  DiscreteMeasure mu2 = points_1d({0.0, 1.0});
  DiscreteMeasure mu3 = points_1d({0.0, 1.0, 2.0});
  CostMatrix c23 = otb::quadratic_cost(mu2, mu3);
  REQUIRE_THROWS_AS(otb::ot_bruteforce_permutations(mu2, mu3, c23), otb::Error);

  Mat pts(2, 1);
  pts << 0.0, 1.0;
  DiscreteMeasure lop(pts, (Vec(2) << 0.25, 0.75).finished());
  CostMatrix c22 = otb::quadratic_cost(lop, mu2);
  REQUIRE_THROWS_AS(otb::ot_bruteforce_permutations(lop, mu2, c22), otb::Error);

  otb::RngStream r(55, 0);
  DiscreteMeasure big = random_uniform_1d(r, 101);
  CostMatrix cb = otb::quadratic_cost(big, big);
  REQUIRE_THROWS_AS(otb::exact_ot(big, big, cb), otb::SizeLimitError);
  REQUIRE_THROWS_AS(otb::ot_transport_simplex(big, big, cb), otb::SizeLimitError);
}

TEST_CASE("potentials on the symmetric two-point instance") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  OtSolution sol = otb::exact_ot(mu, mu, c);
  REQUIRE(sol.value == 0.0);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);

  REQUIRE(d.components == 2);
  REQUIRE_FALSE(d.shifted);
  REQUIRE(d.psi[0] == 0.0);
  REQUIRE(d.psi[1] == 0.0);
  REQUIRE(d.psi_c[0] == 0.0);
  REQUIRE(d.psi_c[1] == 0.0);
  REQUIRE(d.dual_value == 0.0);

  REQUIRE(otb::rate_dual(0, 1, c, d, sol.support) == 0.5);
  REQUIRE(otb::rate_dual(1, 0, c, d, sol.support) == 0.5);
  REQUIRE(otb::rate_dual(0, 0, c, d, sol.support) == 0.0);

  // exchanging the two targets costs exactly the crossed minus direct total
  double lhs = otb::rate_dual(0, 1, c, d, sol.support) +
               otb::rate_dual(1, 0, c, d, sol.support);
  double rhs = c.values(0, 1) + c.values(1, 0) - c.values(0, 0) - c.values(1, 1);
  REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));
}

TEST_CASE("potentials keep zero anchors when the disconnected pieces are compatible") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  DiscreteMeasure nu = points_1d({0.5, 1.5});
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);

  REQUIRE(d.components == 2);
  REQUIRE_FALSE(d.shifted);
  REQUIRE(d.psi[0] == 0.0);
  REQUIRE(d.psi[1] == 0.0);
  REQUIRE(d.psi_c[0] == 0.125);
  REQUIRE(d.psi_c[1] == 0.125);
  REQUIRE(d.dual_value == Catch::Approx(0.125).margin(1e-15));
  REQUIRE(d.max_violation == Catch::Approx(0.0).margin(1e-15));

  // one cross pair is tight, the other carries the whole crossed premium
  REQUIRE(otb::rate_dual(1, 0, c, d, sol.support) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(otb::rate_dual(0, 1, c, d, sol.support) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("potentials shift components when zero anchors are infeasible") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  DiscreteMeasure nu = points_1d({2.0, 3.0});
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);
  REQUIRE(sol.value == 2.0);

  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  REQUIRE(d.components == 2);
  REQUIRE(d.shifted);
  REQUIRE(d.shifts == std::vector<double>{0.0, 2.5});
  REQUIRE(d.psi[0] == 0.0);
  REQUIRE(d.psi[1] == 2.5);
  REQUIRE(d.psi_c[0] == 2.0);
  REQUIRE(d.psi_c[1] == 4.5);
  REQUIRE(d.dual_value == 2.0);

  REQUIRE(otb::rate_dual(0, 1, c, d, sol.support) == 0.0);
  REQUIRE(otb::rate_dual(1, 0, c, d, sol.support) == 1.0);
  double lhs = otb::rate_dual(0, 1, c, d, sol.support) +
               otb::rate_dual(1, 0, c, d, sol.support);
  double rhs = c.values(0, 1) + c.values(1, 0) - c.values(0, 0) - c.values(1, 1);
  REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));
}

TEST_CASE("a crossed plan is rejected as non-optimal") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  Mat crossed(2, 2);
  crossed << 0.0, 0.5,
             0.5, 0.0;
  OtSolution sol = manual_solution(crossed, c);
  REQUIRE_THROWS_WITH(otb::kantorovich_potentials(sol, c),
                      Catch::Matchers::ContainsSubstring("not an exact optimum"));
}

TEST_CASE("constant costs produce a flat rate function") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::build_cost(
      [](const Vec&, const Vec&) { return 2.0; }, mu, mu, "flat");
  Mat diag(2, 2);
  diag << 0.5, 0.0,
          0.0, 0.5;
  OtSolution sol = manual_solution(diag, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  REQUIRE_FALSE(d.shifted);
  REQUIRE(d.psi_c[0] == 2.0);
  REQUIRE(d.psi_c[1] == 2.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      REQUIRE(otb::rate_dual(i, j, c, d, sol.support) == 0.0);
}

TEST_CASE("connected supports make the enumeration reach the dual rate") {
  Mat pts(2, 1);
  pts << 0.0, 1.0;
  DiscreteMeasure mu(pts, (Vec(2) << 0.5, 0.5).finished());
  DiscreteMeasure nu(pts, (Vec(2) << 0.25, 0.75).finished());
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);  // simplex route (non-uniform nu)
  REQUIRE(sol.value == 0.125);
  REQUIRE(sol.support.pairs ==
          std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 1}});

  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  REQUIRE(d.components == 1);
  REQUIRE_FALSE(d.shifted);
  REQUIRE(d.psi[0] == 0.0);
  REQUIRE(d.psi[1] == 0.5);
  REQUIRE(d.psi_c[0] == 0.0);
  REQUIRE(d.psi_c[1] == 0.5);

  REQUIRE(otb::rate_dual(1, 0, c, d, sol.support) == 1.0);
  otb::EnumResult e2 = otb::rate_enum(1, 0, c, sol.support, 2);
  REQUIRE(e2.value == 1.0);
  REQUIRE(e2.tuple.front() == std::pair<int, int>{1, 0});
  REQUIRE(otb::rate_enum(1, 0, c, sol.support, 3).value == 1.0);
  REQUIRE(otb::rate_enum_permutations(1, 0, c, sol.support, 2).value == 1.0);
}

TEST_CASE("disconnected supports leave the enumeration strictly below the dual") {
  // the crossed pair (0,1) has dual rate 1/2, but every enumerable cycle
  // through the two-point diagonal support telescopes to zero
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  OtSolution sol = otb::exact_ot(mu, mu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);

  REQUIRE(otb::rate_dual(0, 1, c, d, sol.support) == 0.5);
  REQUIRE(otb::rate_enum(0, 1, c, sol.support, 2).value == 0.0);
  REQUIRE(otb::rate_enum(0, 1, c, sol.support, 3).value == 0.0);
  REQUIRE(otb::rate_enum_permutations(0, 1, c, sol.support, 2).value == 0.0);
}

TEST_CASE("enumeration properties on random instances") {
  otb::RngStream r(503, 2);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + static_cast<int>(r.uniform01() * 3.99);
    DiscreteMeasure mu = random_uniform_1d(r, n);
    DiscreteMeasure nu = random_uniform_1d(r, n);
    CostMatrix c = otb::quadratic_cost(mu, nu);
    OtSolution sol = otb::exact_ot(mu, nu, c);
    otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
    REQUIRE(d.dual_value == Catch::Approx(sol.value).margin(1e-9));

    otb::RateReport rep = otb::rate_report(c, sol.support, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dual = rep.i_dual(i, j);
        REQUIRE(dual >= -1e-9);
        // cyclic enumeration never overshoots the dual rate and grows with k
        REQUIRE(rep.i_enum_k2(i, j) <= dual + 1e-9);
        REQUIRE(rep.i_enum_k3(i, j) <= dual + 1e-9);
        REQUIRE(rep.i_enum_k3(i, j) >= rep.i_enum_k2(i, j));
        otb::EnumResult pe = otb::rate_enum_permutations(i, j, c, sol.support, 3);
        REQUIRE(pe.value == Catch::Approx(rep.i_enum_k3(i, j)).margin(1e-12));
      }
    for (const auto& [i, j] : sol.support.pairs) {
      REQUIRE(std::fabs(rep.i_dual(i, j)) <= 1e-9);
      otb::EnumResult e = otb::rate_enum(i, j, c, sol.support, 2);
      REQUIRE(e.value >= 0.0);
      REQUIRE(e.value <= 1e-9);
    }
  }
}

TEST_CASE("rate queries off the support projections") {
  Mat plan(3, 2);
  plan << 0.5, 0.0,
          0.0, 0.5,
          0.0, 0.0;  // third source index never used
  otb::SupportSet supp = otb::support_set(plan);
  REQUIRE_FALSE(supp.in_x0(2));

  Mat pts3(3, 1), pts2(2, 1);
  pts3 << 0.0, 1.0, 2.0;
  pts2 << 0.0, 1.0;
  CostMatrix c = otb::quadratic_cost(DiscreteMeasure::uniform(pts3),
                                     DiscreteMeasure::uniform(pts2));
  OtSolution sol;
  sol.plan = plan;
  sol.value = 0.0;
  sol.support = supp;
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);

  REQUIRE_THROWS_AS(otb::rate_dual(2, 0, c, d, supp), otb::RegionError);
  REQUIRE(otb::rate_dual_extended(2, 0, c, d, supp) == otb::kInf);
  REQUIRE(otb::rate_dual_extended(0, 0, c, d, supp) == 0.0);
}

TEST_CASE("enumeration argument guards") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  otb::SupportSet supp = otb::support_set(Mat::Identity(2, 2) * 0.5);

  REQUIRE_THROWS_AS(otb::rate_enum(0, 0, c, supp, 1), otb::Error);
  REQUIRE_THROWS_AS(otb::rate_enum(0, 0, c, supp, 5), otb::Error);
  REQUIRE_THROWS_AS(otb::rate_enum(0, 2, c, supp, 2), otb::DimensionMismatchError);

  // 11x11 dense support has 121 pairs; 121^3 cycles exceed the cap
  Mat dense = Mat::Constant(11, 11, 1.0 / 121.0);
  otb::SupportSet big = otb::support_set(dense);
  Mat cbig = Mat::Zero(11, 11);
  CostMatrix cm{cbig, "flat"};
  REQUIRE_THROWS_AS(otb::rate_enum(0, 0, cm, big, 4), otb::SizeLimitError);
  REQUIRE_THROWS_AS(otb::monotonicity_gap(big, cm, 4), otb::SizeLimitError);
}

TEST_CASE("cycle gap certifies optimal supports and flags crossed ones") {
  otb::RngStream r(504, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + static_cast<int>(r.uniform01() * 3.99);
    DiscreteMeasure mu = random_uniform_1d(r, n);
    DiscreteMeasure nu = random_uniform_1d(r, n);
    CostMatrix c = otb::quadratic_cost(mu, nu);
    OtSolution sol = otb::exact_ot(mu, nu, c);
    otb::EnumResult g = otb::monotonicity_gap(sol.support, c, 3);
    REQUIRE(g.value <= 1e-9);
    REQUIRE(g.value >= 0.0);
  }

  // swapping the two targets of the shifted-pair instance saves exactly 1
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  DiscreteMeasure nu = points_1d({0.5, 1.5});
  CostMatrix c = otb::quadratic_cost(mu, nu);
  Mat crossed(2, 2);
  crossed << 0.0, 0.5,
             0.5, 0.0;
  otb::SupportSet supp = otb::support_set(crossed);
  otb::EnumResult g = otb::monotonicity_gap(supp, c, 2);
  REQUIRE(g.value == 1.0);
  REQUIRE(g.tuple.size() == 2);

  // a single support pair only admits the degenerate zero cycle
  Mat lone = Mat::Zero(2, 2);
  lone(1, 0) = 1.0;
  otb::EnumResult z = otb::monotonicity_gap(otb::support_set(lone), c, 3);
  REQUIRE(z.value == 0.0);
}

TEST_CASE("c-transform on two-point examples") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix chalf = otb::quadratic_cost(mu, points_1d({0.5}));
  Vec zero2 = Vec::Zero(2);
  Vec t = otb::c_transform(zero2, chalf.values);
  REQUIRE(t.size() == 1);
  REQUIRE(t[0] == 0.125);

  CostMatrix cpair = otb::quadratic_cost(mu, points_1d({0.5, 1.5}));
  Vec t2 = otb::c_transform(zero2, cpair.values);
  REQUIRE(t2[0] == 0.125);
  REQUIRE(t2[1] == 1.125);

  CostMatrix cflat = otb::build_cost(
      [](const Vec&, const Vec&) { return 2.0; }, mu, mu, "flat");
  Vec tf = otb::c_transform(zero2, cflat.values);
  REQUIRE(tf[0] == 2.0);
  REQUIRE(tf[1] == 2.0);

  Vec nanpsi = Vec::Constant(2, otb::kNaN);
  REQUIRE_THROWS_AS(otb::c_transform(nanpsi, cpair.values), otb::Error);
  REQUIRE_THROWS_AS(otb::c_transform(zero2, cpair.values, {}), otb::Error);
  REQUIRE_THROWS_AS(otb::c_transform_inverse(t2, cpair.values, {}), otb::Error);
}

TEST_CASE("double transform reproduces potentials of optimal plans") {
  std::vector<int> both{0, 1};

  // connected-support potentials round-trip
  Mat pts(2, 1);
  pts << 0.0, 1.0;
  DiscreteMeasure mu(pts, (Vec(2) << 0.5, 0.5).finished());
  DiscreteMeasure nu(pts, (Vec(2) << 0.25, 0.75).finished());
  CostMatrix c = otb::quadratic_cost(mu, nu);
  OtSolution sol = otb::exact_ot(mu, nu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  Vec up = otb::c_transform(d.psi, c.values, both);
  Vec back = otb::c_transform_inverse(up, c.values, both);
  REQUIRE(back[0] == Catch::Approx(d.psi[0]).margin(1e-12));
  REQUIRE(back[1] == Catch::Approx(d.psi[1]).margin(1e-12));

  // symmetric two-point potentials round-trip through a different midpoint
  DiscreteMeasure u2 = points_1d({0.0, 1.0});
  CostMatrix cq = otb::quadratic_cost(u2, u2);
  Vec zero2 = Vec::Zero(2);
  Vec mid = otb::c_transform(zero2, cq.values, both);
  REQUIRE(mid[0] == 0.5);
  REQUIRE(mid[1] == 0.5);
  Vec rt = otb::c_transform_inverse(mid, cq.values, both);
  REQUIRE(rt[0] == 0.0);
  REQUIRE(rt[1] == 0.0);

  CostMatrix cs = otb::quadratic_cost(u2, points_1d({0.5, 1.5}));
  Vec rt2 = otb::c_transform_inverse(otb::c_transform(zero2, cs.values, both),
                                     cs.values, both);
  REQUIRE(rt2[0] == 0.0);
  REQUIRE(rt2[1] == 0.0);
}

TEST_CASE("double transform can move potentials of widely separated optima") {
  // identity coupling on {0,1,10}: the anchored potentials are all zero, but
  // the sup-form transform pins everything to the far point and the round
  // trip lifts the middle value; flat potentials are not c-concave here
  DiscreteMeasure mu = points_1d({0.0, 1.0, 10.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  OtSolution sol = otb::exact_ot(mu, mu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  REQUIRE(d.psi[0] == 0.0);
  REQUIRE(d.psi[1] == 0.0);
  REQUIRE(d.psi[2] == 0.0);

  std::vector<int> all{0, 1, 2};
  Vec up = otb::c_transform(d.psi, c.values, all);
  REQUIRE(up[0] == 50.0);
  REQUIRE(up[1] == 40.5);
  REQUIRE(up[2] == 50.0);
  Vec back = otb::c_transform_inverse(up, c.values, all);
  REQUIRE(back[0] == 0.0);
  REQUIRE(back[1] == 9.5);
  REQUIRE(back[2] == 0.0);
}

TEST_CASE("scaled log-mass table approaches the rate function") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  OtSolution sol = otb::exact_ot(mu, mu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  otb::RateReport rep = otb::rate_report(c, sol.support, d);

  otb::CostFamily free;
  free.free_dim = 1;
  const std::vector<double> etas{0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  otb::SinkhornOptions tight;
  tight.tol = 1e-12;
  auto plans = otb::plan_family(mu, mu, free, etas, tight);

  std::vector<otb::IndexSet> sets;
  sets.push_back({"crossed", {{0, 1}}});
  sets.push_back({"everything", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}});
  otb::LdpTable tab = otb::ldp_table(plans, rep.i_dual, sets);
  REQUIRE(tab.rows.size() == 12);

  double prev_gap = otb::kInf;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const otb::LdpRow& row = tab.rows[k];
    REQUIRE(row.set_id == "crossed");
    REQUIRE(row.eta == etas[k]);
    REQUIRE(row.neg_inf_rate == -0.5);
    REQUIRE_FALSE(row.zero_mass);
    // the symmetric 2x2 plan gives pi({(0,1)}) = 1/(2(1+e^{1/(2 eta)}))
    // exactly, so the gap has the closed form below
    const double expected_gap =
        etas[k] * (std::log(2.0) + std::log1p(std::exp(-0.5 / etas[k])));
    REQUIRE(row.gap == Catch::Approx(expected_gap).margin(1e-9));
    REQUIRE(row.gap < prev_gap);
    prev_gap = row.gap;
  }
  REQUIRE(tab.extrapolated[0].first == "crossed");
  REQUIRE(tab.extrapolated[0].second == Catch::Approx(-0.5).margin(1e-9));

  // a set containing the whole support has vanishing rate and full mass
  for (std::size_t k = etas.size(); k < tab.rows.size(); ++k) {
    const otb::LdpRow& row = tab.rows[k];
    REQUIRE(row.set_id == "everything");
    REQUIRE(row.neg_inf_rate == 0.0);
    REQUIRE(std::fabs(row.eta_log_prob) < 1e-8);
    REQUIRE(row.gap < 1e-8);
  }
  REQUIRE(tab.extrapolated[1].second == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("support-complement mass gap shrinks along the ladder") {
  DiscreteMeasure mu = points_1d({0.0, 0.3, 0.7, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  OtSolution sol = otb::exact_ot(mu, mu, c);
  otb::DualPotentials d = otb::kantorovich_potentials(sol, c);
  otb::RateReport rep = otb::rate_report(c, sol.support, d);

  otb::IndexSet off;
  off.id = "off-diagonal";
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) off.pairs.emplace_back(i, j);

  otb::CostFamily free;
  free.free_dim = 1;
  auto plans = otb::plan_family(mu, mu, free, {0.1, 0.05, 0.02, 0.01, 0.005});
  otb::LdpTable tab = otb::ldp_table(plans, rep.i_dual, {off});

  double prev = otb::kInf;
  for (const auto& row : tab.rows) {
    // nearest escape from the support costs (0.3)^2/2
    REQUIRE(row.neg_inf_rate == Catch::Approx(-0.045).margin(1e-15));
    REQUIRE(row.gap < prev);
    prev = row.gap;
  }
}

TEST_CASE("ldp table input guards") {
  DiscreteMeasure mu = points_1d({0.0, 1.0});
  CostMatrix c = otb::quadratic_cost(mu, mu);
  otb::Coupling a = otb::sinkhorn(mu, mu, c, 0.2);
  otb::Coupling b = otb::sinkhorn(mu, mu, c, 0.1);
  Mat rate = Mat::Zero(2, 2);
  std::vector<otb::IndexSet> sets{{"all", {{0, 0}}}};

  REQUIRE_THROWS_AS(otb::ldp_table({}, rate, sets), otb::Error);
  REQUIRE_THROWS_AS(otb::ldp_table({a, b}, rate, {}), otb::Error);
  REQUIRE_THROWS_AS(otb::ldp_table({b, a}, rate, sets), otb::Error);
  REQUIRE_THROWS_AS(otb::ldp_table({a, b}, rate, {otb::IndexSet{"empty", {}}}),
                    otb::Error);
  otb::Coupling stale = b;
  stale.converged = false;
  REQUIRE_THROWS_AS(otb::ldp_table({a, stale}, rate, sets), otb::Error);
}
