#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "obs/experiments.hpp"
#include "obs/instances.hpp"

using namespace obs;

TEST_CASE("limit harness: liminf of max") {
  // canonical pairs
  {
    double p = 1e6;
    double ap = 1.0 + 1.0 / p, bp = 2.0 - 1.0 / p;
    CHECK(std::max(ap, bp) == Catch::Approx(2.0).margin(1e-5));
    CHECK(std::max(0.0, 0.0) == 0.0);
  }
  auto rep = check_liminf_max(100, 314159);
  CHECK(rep.cases == 100);
  CHECK(rep.ok());
  CHECK(rep.max_error <= 1e-6);
}

TEST_CASE("limit harness: power means and the sandwich inequality") {
  // a = b = 1, p = 2: value sqrt(2), bounded by [1, 2^(1/2)]
  double v = std::sqrt(2.0);
  CHECK(v >= 1.0);
  CHECK(v <= std::pow(2.0, 0.5) + 1e-15);
  // a = 3, b = 0: the power mean is exactly 3 for every p
  for (double p : {2.0, 17.0, 100.0})
    CHECK(std::pow(std::pow(3.0, p), 1.0 / p) == Catch::Approx(3.0).epsilon(1e-12));

  auto rep = check_power_mean(100, 2718);
  CHECK(rep.cases == 100);
  CHECK(rep.ok());
  CHECK(rep.max_error <= 1e-12);
}

TEST_CASE("convergence study on the constant 1D profile") {
  auto b = builtin_instance("constant-profile-1d");
  StudyInstance inst{b.name, b.z, b.g};
  auto table = run_convergence_study(inst, {2, 4, 8});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.inf_row.has_value());
  CHECK(table.inf_row->value == Catch::Approx(1.0).margin(1e-6));
  CHECK(table.all_certified);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].value >= 0.0);
    if (i > 0) CHECK(table.rows[i].p > table.rows[i - 1].p);
    CHECK(table.rows[i].fixed_point_residual <= 1e-4);
  }
  CHECK(table.gap_at_pmax ==
        Catch::Approx(std::abs(table.rows.back().value - table.inf_row->value)));
}

TEST_CASE("convergence study is deterministic") {
  auto b = builtin_instance("constant-profile-1d");
  StudyInstance inst{b.name, b.z, b.g};
  auto t1 = run_convergence_study(inst, {2, 4});
  auto t2 = run_convergence_study(inst, {2, 4});
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].value == t2.rows[i].value);  // bit identical
    CHECK(t1.rows[i].fixed_point_residual == t2.rows[i].fixed_point_residual);
  }
  CHECK(t1.inf_row->value == t2.inf_row->value);
}

TEST_CASE("zero profile: every row is zero") {
  Grid g = make_grid(1, {33}, {1.0});
  StudyInstance inst{"zero", GridFunction::constant(g, 0.0),
                     BoundaryData::constant(g, 0.0)};
  auto table = run_convergence_study(inst, {2, 4, 8});
  for (const auto& row : table.rows) CHECK(row.value <= 1e-6);
  CHECK(table.inf_row->value <= 1e-6);
  CHECK(table.gap_at_pmax <= 1e-6);
}

TEST_CASE("parallel study runner matches the sequential one") {
  auto a = builtin_instance("constant-profile-1d");
  Grid g = make_grid(1, {33}, {1.0});
  std::vector<StudyInstance> insts = {
      {"a", a.z, a.g},
      {"b", GridFunction::constant(g, 0.5), BoundaryData::constant(g, 0.0)}};
  auto seq = run_convergence_studies(insts, {2, 4}, {}, 1);
  auto par = run_convergence_studies(insts, {2, 4}, {}, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].instance_id == par[i].instance_id);
    for (std::size_t r = 0; r < seq[i].rows.size(); ++r)
      CHECK(seq[i].rows[r].value == par[i].rows[r].value);
  }
}

TEST_CASE("built-in instances are feasible and documented") {
  for (const auto& name : builtin_names()) {
    auto b = builtin_instance(name);
    CHECK(b.name == name);
    CHECK_FALSE(b.description.empty());
    CHECK_NOTHROW(ObstacleInstance(b.psi, b.g, 2.0, b.z));
  }
  CHECK_THROWS_AS(builtin_instance("no-such-instance"), GridError);
}
