#include <cmath>
#include <random>

#include "conas/engine.hpp"
#include "conas/oracles.hpp"
#include "conas/seeding.hpp"
#include "doctest.h"
#include "support/brute_force.hpp"

using namespace conas;

namespace {

ParityIndex ps(std::initializer_list<Coord> idx) { return ParityIndex(std::vector<Coord>(idx)); }

EvaluatorPtr planted(std::size_t n, FourierExpansion::Terms terms) {
  return std::make_shared<PlantedOracle>(FourierExpansion(n, std::move(terms)));
}

SearchOptions options(double lambda, std::size_t s, std::size_t m) {
  SearchOptions o;
  o.recovery.lambda = lambda;
  o.recovery.sparsity = s;
  o.recovery.m = m;
  return o;
}

}  // namespace

TEST_CASE("stage_statistics") {
  auto s = stage_statistics(std::vector<double>{2.0, 2.0});
  CHECK(s.mean == 2.0);
  CHECK(s.std == 0.0);
  CHECK(s.min == 2.0);

  s = stage_statistics(std::vector<double>{1.0, 3.0});
  CHECK(s.mean == 2.0);
  CHECK(s.std == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.min == 1.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> draws(1000);
  for (auto& v : draws) v = nd(rng);
  s = stage_statistics(draws);
  CHECK(std::abs(s.mean) < 0.1);
  CHECK(std::abs(s.std - 1.0) < 0.1);

  CHECK_THROWS_AS(stage_statistics(std::vector<double>{}), std::invalid_argument);
  CHECK(stage_statistics(std::vector<double>{5.0}).std == 0.0);
}

TEST_CASE("final_encoding") {
  CHECK(final_encoding(Restriction(4), 4) == Encoding::filled(4, -1));
  CHECK(final_encoding(Restriction(3, {{0, 1}}), 3) == Encoding::from_binary("100"));
  const Restriction all(3, {{0, 1}, {1, -1}, {2, 1}});
  CHECK(final_encoding(all, 3) == Encoding::from_binary("101"));
}

TEST_CASE("run_stage") {
  SUBCASE("single dominant coordinate is fixed to its minimizing sign") {
    const auto f = planted(6, {{ps({3}), -5.0}});
    for (bool exhaustive : {false, true}) {
      auto o = options(0.05, 1, 64);
      o.recovery.exhaustive = exhaustive;
      const auto r = run_stage(f, Restriction(6), o, 0, 11);
      CHECK(r.assignment == Restriction(6, {{3, 1}}));
      CHECK(r.cumulative == r.assignment);
      CHECK(r.free_dimension == 6);
      CHECK(r.measurements == 64);
      CHECK(r.lasso_converged);
    }
  }
  SUBCASE("constant function fixes nothing") {
    const auto f = planted(5, {{ps({}), 2.5}});
    const Restriction before(5, {{1, -1}});
    const auto r = run_stage(f, before, options(0.05, 3, 50), 0, 2);
    CHECK(r.assignment.fixed().empty());
    CHECK(r.cumulative == before);
    CHECK(r.surrogate.max_degree() == 0);
    CHECK(r.free_dimension == 4);
  }
  SUBCASE("degree is clamped to the free dimension") {
    const auto f = planted(4, {{ps({2}), 1.0}});
    const Restriction before(4, {{0, 1}, {1, 1}, {3, -1}});
    auto o = options(0.01, 1, 20);
    o.recovery.degree = 3;
    const auto r = run_stage(f, before, o, 0, 5);
    CHECK(r.degree == 1);
    CHECK(r.warnings.size() == 1);
    CHECK(r.cumulative == Restriction(4, {{0, 1}, {1, 1}, {2, -1}, {3, -1}}));
  }
  SUBCASE("nothing left to fix is an error") {
    const auto f = planted(2, {{ps({0}), 1.0}});
    CHECK_THROWS(run_stage(f, Restriction(2, {{0, 1}, {1, 1}}), options(0.1, 1, 10), 0, 1));
  }
  SUBCASE("stages on reduced coordinates map back to original ones") {
    // separable two-variable function; one variable per stage. Once alpha_5
    // is fixed it folds into a constant, so stage 2 needs s = 2.
    const auto f = planted(8, {{ps({0}), 2.0}, {ps({5}), -3.0}});
    auto o = options(0.05, 1, 200);
    o.sparsity_schedule = {1, 2};
    const auto r = conas_search(f, o, 2, 3);
    REQUIRE(r.stages.size() == 2);
    CHECK(r.stages[0].assignment == Restriction(8, {{5, 1}}));
    CHECK(r.stages[1].assignment == Restriction(8, {{0, -1}}));
    CHECK(r.stages[1].free_dimension == 7);
    CHECK(r.final_encoding == Encoding::from_binary("00000100"));
  }
}

TEST_CASE("exhaustive stage hits the brute-force minimizer") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 10;
    const auto plant = make_planted({n, 6, 2}, seed);
    auto o = options(1e-7, 6, 0);
    o.recovery.exhaustive = true;
    o.recovery.tol = 1e-12;
    const auto r = run_stage(plant, Restriction(n), o, 0, seed);
    CHECK(r.measurements == 1024);

    const auto support = plant->hidden().variables();
    std::vector<Coord> got;
    for (const auto& [c, v] : r.assignment.fixed()) got.push_back(c);
    CHECK(got == std::vector<Coord>(support.begin(), support.end()));

    const double best = testing::brute_force_min(plant->hidden());
    CHECK(plant->evaluate(final_encoding(r.assignment, n)) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("conas_search bookkeeping") {
  const auto plant = make_planted({30, 12, 2}, 9);
  auto o = options(1.0, 5, 300);
  const auto r = conas_search(plant, o, 4, 21);
  REQUIRE(r.stages.size() == 4);
  CHECK_FALSE(r.stopped_early);

  std::size_t fixed_before = 0;
  Restriction previous(30);
  for (const auto& st : r.stages) {
    CHECK(st.free_dimension == 30 - fixed_before);
    CHECK(st.seed == derive_seed(21, streams::kStage, st.stage));
    for (const auto& [c, v] : previous.fixed()) CHECK(st.cumulative.fixed().at(c) == v);
    for (const auto& [c, v] : st.assignment.fixed()) {
      CHECK(previous.fixed().count(c) == 0);
      CHECK(st.cumulative.fixed().at(c) == v);
    }
    CHECK(st.cumulative.fixed().size() == previous.fixed().size() + st.assignment.fixed().size());
    fixed_before = st.cumulative.fixed().size();
    previous = st.cumulative;
  }
  CHECK(r.final_encoding == final_encoding(previous, 30));

  SUBCASE("t = 1 is one run_stage plus assembly") {
    const auto one = conas_search(plant, o, 1, 21);
    const auto direct = run_stage(plant, Restriction(30), o, 0, derive_seed(21, streams::kStage, 0));
    CHECK(nlohmann::json(one.stages.at(0)) == nlohmann::json(direct));
    CHECK(one.final_encoding == final_encoding(direct.cumulative, 30));
  }
  SUBCASE("same seed gives the same JSON, also across thread counts") {
    const auto again = conas_search(plant, o, 4, 21);
    CHECK(nlohmann::json(again).dump() == nlohmann::json(r).dump());
    auto threaded = o;
    threaded.threads = 4;
    CHECK(nlohmann::json(conas_search(plant, threaded, 4, 21)).dump() == nlohmann::json(r).dump());
    CHECK(nlohmann::json(conas_search(plant, o, 4, 22)).dump() != nlohmann::json(r).dump());
  }
  CHECK_THROWS_AS(conas_search(plant, o, 0, 1), std::invalid_argument);
}

TEST_CASE("search stops early once every coordinate is fixed") {
  const auto f = planted(3, {{ps({0}), 1.0}, {ps({1}), -2.0}, {ps({2}), 1.5}});
  auto o = options(1e-6, 3, 0);
  o.recovery.exhaustive = true;
  const auto r = conas_search(f, o, 3, 0);
  CHECK(r.stopped_early);
  CHECK(r.stages.size() == 1);
  CHECK(r.requested_stages == 3);
  CHECK(r.final_encoding == Encoding::from_binary("010"));
}

TEST_CASE("sparsity schedule and cell attachment") {
  const auto spec = CellSpec::cnn(5);
  const auto plant = make_planted({50, 10, 2}, 1);
  auto o = options(1.0, 10, 200);
  o.sparsity_schedule = {6, 3};
  o.cell = spec;
  const auto r = conas_search(plant, o, 3, 4);
  REQUIRE(r.stages.size() == 3);
  CHECK(r.stages[0].sparsity == 6);
  CHECK(r.stages[1].sparsity == 3);
  CHECK(r.stages[2].sparsity == 10);
  REQUIRE(r.final_cell.has_value());
  CHECK(encode_cell(*r.final_cell) == r.final_encoding);

  SUBCASE("repair during sampling keeps stage-fixed bits") {
    o.repair_connectivity = true;
    const auto repaired = conas_search(plant, o, 3, 4);
    REQUIRE(repaired.stages.size() == 3);
    for (std::size_t k = 1; k < repaired.stages.size(); ++k) {
      for (const auto& [c, v] : repaired.stages[k - 1].cumulative.fixed()) {
        CHECK(repaired.stages[k].cumulative.fixed().at(c) == v);
      }
    }
  }
  SUBCASE("repair without a cell is rejected") {
    auto bad = options(1.0, 10, 200);
    bad.repair_connectivity = true;
    CHECK_THROWS(conas_search(plant, bad, 1, 0));
  }
}
