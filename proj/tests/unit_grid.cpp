#include <catch2/catch_amalgamated.hpp>

#include "obs/grid.hpp"
#include "obs/rng.hpp"

using namespace obs;

TEST_CASE("make_grid builds lattices with the documented classification") {
  Grid g = make_grid(1, {5}, {1.0});
  REQUIRE(g.node_count() == 5);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(g.position(k, 0) == Catch::Approx(0.25 * double(k)));
  CHECK(g.boundary_node_list() == std::vector<std::size_t>{0, 4});
  CHECK(g.spacing(0) == 0.25);

  Grid q = make_grid(2, {3, 3}, {1.0, 1.0});
  REQUIRE(q.node_count() == 9);
  CHECK(q.interior_count() == 1);
  CHECK(q.boundary_count() == 8);
  CHECK_FALSE(q.is_boundary(q.index(1, 1)));
}

TEST_CASE("make_grid rejects degenerate input") {
  CHECK_THROWS_AS(make_grid(1, {2}, {1.0}), GridError);
  CHECK_THROWS_AS(make_grid(1, {5}, {0.0}), GridError);
  CHECK_THROWS_AS(make_grid(3, {5, 5, 5}, {1.0, 1.0, 1.0}), GridError);
  CHECK_THROWS_AS(make_grid(2, {5}, {1.0}), GridError);
}

TEST_CASE("node classification counts") {
  Grid a = make_grid(1, {17}, {2.0});
  CHECK(a.boundary_count() == 2);
  Grid b = make_grid(2, {9, 7}, {1.0, 2.0});
  CHECK(b.boundary_count() == 2 * (9 + 7) - 4);
  CHECK(b.interior_count() + b.boundary_count() == b.node_count());
}

TEST_CASE("nodal volumes integrate constants exactly") {
  for (const Grid& g : {make_grid(1, {9}, {2.0}), make_grid(2, {5, 9}, {1.0, 3.0})}) {
    double total = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k) total += g.node_volume(k);
    CHECK(total == Catch::Approx(g.domain_volume()).epsilon(1e-14));
  }
}

TEST_CASE("embed_boundary places data on the boundary and fill inside") {
  Grid g = make_grid(2, {5, 5}, {1.0, 1.0});
  auto f = embed_boundary(BoundaryData::constant(g, 0.0), -1.0);
  for (std::size_t k = 0; k < g.node_count(); ++k)
    CHECK(f[k] == (g.is_boundary(k) ? 0.0 : -1.0));

  auto c = embed_boundary(BoundaryData::constant(g, 2.0), 2.0);
  for (std::size_t k = 0; k < g.node_count(); ++k) CHECK(c[k] == 2.0);

  Grid line = make_grid(1, {3}, {1.0});
  BoundaryData ends(line, {0.0, 1.0});
  auto e = embed_boundary(ends, 0.0);
  CHECK(e.values() == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("embed then restrict is the identity on boundary nodes") {
  Grid g = make_grid(2, {7, 5}, {1.0, 1.0});
  Rng rng(7);
  std::vector<double> bv(g.boundary_count());
  for (auto& x : bv) x = rng.uniform(-2.0, 2.0);
  BoundaryData bd(g, bv);
  auto back = BoundaryData::restrict_to_boundary(embed_boundary(bd, 123.0));
  CHECK(back.values() == bv);
}

TEST_CASE("pointwise_max is idempotent, commutative, associative") {
  Grid g = make_grid(1, {9}, {1.0});
  Rng rng(3);
  std::vector<double> av(9), bv(9), cv(9);
  for (std::size_t k = 0; k < 9; ++k) {
    av[k] = rng.uniform(-1, 1);
    bv[k] = rng.uniform(-1, 1);
    cv[k] = rng.uniform(-1, 1);
  }
  GridFunction a(g, av), b(g, bv), c(g, cv);
  CHECK(pointwise_max(a, a).values() == a.values());
  CHECK(pointwise_max(a, b).values() == pointwise_max(b, a).values());
  CHECK(pointwise_max(pointwise_max(a, b), c).values() ==
        pointwise_max(a, pointwise_max(b, c)).values());

  GridFunction zero = GridFunction::constant(g, 0.0);
  GridFunction neg = GridFunction::constant(g, -1.0);
  CHECK(pointwise_max(zero, neg).values() == zero.values());

  Grid other = make_grid(1, {11}, {1.0});
  CHECK_THROWS_AS(pointwise_max(a, GridFunction::constant(other, 0.0)), GridError);
}

TEST_CASE("grid functions refuse non-finite values") {
  Grid g = make_grid(1, {5}, {1.0});
  std::vector<double> v(5, 0.0);
  v[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GridFunction(g, v), GridError);
}

TEST_CASE("boundary interpolant matches data on the boundary") {
  Grid g = make_grid(2, {9, 9}, {1.0, 1.0});
  auto bd = BoundaryData::sample(
      g, [](double x, double y) { return x * x - 0.5 * y + 0.25; });
  auto f = boundary_interpolant(bd);
  for (std::size_t k = 0; k < bd.size(); ++k)
    CHECK(f[bd.node(k)] == Catch::Approx(bd.value(k)).margin(1e-14));

  // 1D: affine between the endpoint values
  Grid line = make_grid(1, {5}, {1.0});
  BoundaryData ends(line, {1.0, 3.0});
  auto a = boundary_interpolant(ends);
  CHECK(a[2] == Catch::Approx(2.0));
}

TEST_CASE("lipschitz estimate of boundary data") {
  Grid line = make_grid(1, {5}, {2.0});
  BoundaryData ends(line, {0.0, 1.0});
  CHECK(ends.lipschitz_estimate() == Catch::Approx(0.5));

  Grid g = make_grid(2, {3, 3}, {1.0, 1.0});
  auto bd = BoundaryData::sample(g, [](double x, double) { return x; });
  CHECK(bd.lipschitz_estimate() == Catch::Approx(1.0));
}

TEST_CASE("obstacle instance enforces feasibility and exponent range") {
  Grid g = make_grid(1, {5}, {1.0});
  GridFunction psi = GridFunction::constant(g, 0.5);
  BoundaryData zero = BoundaryData::constant(g, 0.0);
  CHECK_THROWS_AS(ObstacleInstance(psi, zero, 2.0), InfeasibleObstacle);

  GridFunction ok = GridFunction::sample(
      g, [](double x, double) { return x * (1.0 - x); });
  CHECK_NOTHROW(ObstacleInstance(ok, zero, 2.0));
  CHECK_NOTHROW(ObstacleInstance(ok, zero, kInfExponent));
  CHECK_THROWS_AS(ObstacleInstance(ok, zero, 1.0), GridError);
  CHECK_THROWS_AS(ObstacleInstance(ok, zero, 0.5), GridError);
}
