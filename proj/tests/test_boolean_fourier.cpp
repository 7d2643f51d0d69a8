#include <cmath>
#include <random>

#include "conas/boolean_fourier.hpp"
#include "conas/evaluator.hpp"
#include "conas/oracles.hpp"
#include "doctest.h"
#include "support/brute_force.hpp"

using namespace conas;
using conas::testing::all_points;
using conas::testing::to_encoding;

namespace {

Encoding enc(std::initializer_list<int> bits) {
  std::vector<std::int8_t> v;
  for (int b : bits) v.push_back(static_cast<std::int8_t>(b));
  return Encoding(v);
}

ParityIndex ps(std::initializer_list<Coord> idx) { return ParityIndex(std::vector<Coord>(idx)); }

}  // namespace

TEST_CASE("encoding rejects values other than +-1") {
  CHECK_THROWS_AS(Encoding(std::vector<std::int8_t>{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(Encoding::from_binary("01x"), std::invalid_argument);
  CHECK(Encoding::from_binary("0110") == enc({-1, 1, 1, -1}));
  CHECK(enc({-1, 1, 1}).to_binary() == "011");
}

TEST_CASE("parity index must be strictly increasing") {
  CHECK_THROWS_AS(ps({1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ps({2, 1}), std::invalid_argument);
  CHECK(ps({}).empty());
  // canonical order: size first, then lexicographic
  CHECK(ps({5}) < ps({0, 1}));
  CHECK(ps({0, 2}) < ps({1, 2}));
  CHECK(ps({}) < ps({0}));
}

TEST_CASE("parity_eval") {
  CHECK(parity_eval(ps({}), enc({-1, 1, -1})) == 1.0);
  CHECK(parity_eval(ps({0, 1}), enc({-1, 1, 1})) == -1.0);
  CHECK(parity_eval(ps({0, 2}), enc({-1, 1, -1})) == 1.0);

  SUBCASE("index beyond the encoding names the index") {
    try {
      parity_eval(ps({0, 3}), enc({1, 1}));
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
  }
}

TEST_CASE("expansion_eval") {
  CHECK(expansion_eval(FourierExpansion(3, {{ps({}), 3.5}}), enc({1, -1, 1})) == 3.5);
  CHECK(expansion_eval(FourierExpansion(2, {{ps({0}), 1.0}, {ps({0, 1}), -2.0}}), enc({1, 1})) == -1.0);
  CHECK_THROWS_AS(expansion_eval(FourierExpansion(2, {}), enc({1})), std::invalid_argument);

  SUBCASE("random expansions agree with a term-by-term evaluator") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = testing::random_expansion(9, 5, 3, rng);
      const auto p = testing::random_point(9, rng);
      CHECK(expansion_eval(g, to_encoding(p)) == doctest::Approx(testing::naive_eval(g, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("expansion drops zero terms and checks dimension") {
  FourierExpansion g(3, {{ps({0}), 0.0}, {ps({1}), 2.0}});
  CHECK(g.size() == 1);
  CHECK_THROWS_AS(FourierExpansion(2, {{ps({2}), 1.0}}), std::invalid_argument);
}

TEST_CASE("enumerate_parities") {
  const auto p = enumerate_parities(3, 1);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == ps({}));
  CHECK(p[1] == ps({0}));
  CHECK(p[2] == ps({1}));
  CHECK(p[3] == ps({2}));

  CHECK(enumerate_parities(10, 2).size() == 56);
  // 1 + 140 + 140*139/2
  CHECK(enumerate_parities(140, 2).size() == 9871);
  CHECK(parity_count(140, 2) == 9871);
  CHECK_THROWS_AS(enumerate_parities(3, 4), std::invalid_argument);

  SUBCASE("canonical order is strictly increasing") {
    const auto q = enumerate_parities(7, 3);
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i - 1] < q[i]);
    CHECK(q.size() == 1 + 7 + 21 + 35);
  }
}

TEST_CASE("orthonormality and boundedness of parities, exhaustive for n <= 10") {
  for (std::size_t n : {1U, 4U, 10U}) {
    const auto points = all_points(n);
    const auto parities = enumerate_parities(n, std::min<std::size_t>(n, 2));
    std::vector<std::vector<double>> table;
    for (const auto& s : parities) {
      std::vector<double> col;
      for (const auto& p : points) {
        const double v = parity_eval(s, to_encoding(p));
        REQUIRE(std::abs(v) == 1.0);
        col.push_back(v);
      }
      table.push_back(col);
    }
    for (std::size_t a = 0; a < table.size(); ++a) {
      for (std::size_t b = a; b < table.size(); ++b) {
        double inner = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) inner += table[a][k] * table[b][k];
        inner /= static_cast<double>(points.size());
        CHECK(inner == (a == b ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("exact_transform") {
  SUBCASE("single coordinate") {
    FunctionEvaluator f(2, [](const Encoding& a) { return static_cast<double>(a[0]); });
    const auto g = exact_transform(f);
    CHECK(g == FourierExpansion(2, {{ps({0}), 1.0}}));
  }
  SUBCASE("product of two coordinates") {
    FunctionEvaluator f(2, [](const Encoding& a) { return static_cast<double>(a[0] * a[1]); });
    CHECK(exact_transform(f) == FourierExpansion(2, {{ps({0, 1}), 1.0}}));
  }
  SUBCASE("planted 8-term expansion round-trips") {
    auto plant = make_planted({10, 8, 3, 1.0, 2.0}, 5);
    const auto g = exact_transform(*plant);
    CHECK(g.size() == 8);
    CHECK(testing::max_term_difference(g, plant->hidden()) < 1e-9);
  }
  SUBCASE("matches the quadratic-time definition on a non-sparse function") {
    FunctionEvaluator f(6, [](const Encoding& a) {
      double v = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) v += (i + 1) * (a[i] > 0 ? 1.0 : 0.0);
      return std::sin(v);
    });
    const auto fast = exact_transform(f);
    const auto slow = testing::naive_transform(f);
    CHECK(fast.size() == slow.size());
    for (const auto& [subset, c] : slow) {
      CHECK(fast.coefficient(ParityIndex(std::vector<Coord>(subset.begin(), subset.end()))) ==
            doctest::Approx(c).epsilon(1e-12));
    }
  }
  SUBCASE("dimension cap") {
    FunctionEvaluator f(17, [](const Encoding&) { return 0.0; });
    CHECK_THROWS_WITH_AS(exact_transform(f), doctest::Contains("cap"), std::invalid_argument);
  }
}

TEST_CASE("transform then evaluate reproduces f on every point") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {3U, 8U, 12U}) {
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<double> table(std::size_t{1} << n);
    for (auto& v : table) v = u(rng);
    FunctionEvaluator f(n, [&](const Encoding& a) {
      std::size_t x = 0;
      for (std::size_t i = 0; i < n; ++i) x |= (a[i] == 1 ? std::size_t{1} : 0) << i;
      return table[x];
    });
    const auto g = exact_transform(f);
    double worst = 0.0;
    for (const auto& p : all_points(n)) {
      const auto e = to_encoding(p);
      worst = std::max(worst, std::abs(expansion_eval(g, e) - f.evaluate(e)));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("merge_point") {
  CHECK(merge_point(enc({-1}), Restriction(2, {{1, 1}})) == enc({-1, 1}));
  CHECK(merge_point(enc({-1, 1}), Restriction(2)) == enc({-1, 1}));
  CHECK(merge_point(enc({1, -1}), Restriction(4, {{0, -1}, {3, 1}})) == enc({-1, 1, -1, 1}));
  CHECK_THROWS_AS(merge_point(enc({1}), Restriction(4, {{0, -1}})), std::invalid_argument);
}

TEST_CASE("restriction bookkeeping") {
  Restriction r(5, {{1, 1}, {3, -1}});
  CHECK(r.free_coordinates() == std::vector<Coord>{0, 2, 4});
  CHECK_THROWS_AS(Restriction(3, {{3, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(r.combine(Restriction(5, {{1, -1}})), std::invalid_argument);
  // reduced coordinate 1 is original coordinate 2
  CHECK(r.compose(Restriction(3, {{1, 1}})) == Restriction(5, {{1, 1}, {2, 1}, {3, -1}}));
}

TEST_CASE("restrict_expansion") {
  const FourierExpansion g(2, {{ps({0, 1}), 2.0}});
  CHECK(restrict_expansion(g, Restriction(2, {{1, 1}})) == FourierExpansion(1, {{ps({0}), 2.0}}));
  CHECK(restrict_expansion(g, Restriction(2, {{1, -1}})) == FourierExpansion(1, {{ps({0}), -2.0}}));

  SUBCASE("colliding monomials are summed and cancellations dropped") {
    const FourierExpansion h(2, {{ps({0}), 1.0}, {ps({0, 1}), 1.0}});
    CHECK(restrict_expansion(h, Restriction(2, {{1, -1}})).size() == 0);
    CHECK(restrict_expansion(h, Restriction(2, {{1, 1}})) == FourierExpansion(1, {{ps({0}), 2.0}}));
  }

  SUBCASE("agrees with merge-and-evaluate; never raises degree") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 8;
      const auto g2 = testing::random_expansion(n, 12, 3, rng);
      std::bernoulli_distribution coin(0.4);
      Restriction::Fixed fixed;
      for (Coord c = 0; c < n; ++c) {
        if (coin(rng)) fixed[c] = coin(rng) ? 1 : -1;
      }
      const Restriction rho(n, fixed);
      const auto h = restrict_expansion(g2, rho);
      CHECK(h.dimension() == rho.free_count());
      CHECK(h.max_degree() <= g2.max_degree());
      for (int k = 0; k < 50; ++k) {
        const auto p = to_encoding(testing::random_point(rho.free_count(), rng));
        CHECK(expansion_eval(h, p) == doctest::Approx(expansion_eval(g2, merge_point(p, rho))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("restrict_oracle") {
  auto sum = std::make_shared<FunctionEvaluator>(3, [](const Encoding& a) {
    return static_cast<double>(a[0] + a[1] + a[2]);
  });
  auto fixed = restrict_oracle(sum, Restriction(3, {{2, 1}}));
  CHECK(fixed->dimension() == 2);
  CHECK(fixed->evaluate(enc({-1, -1})) == -1.0);

  auto identity = restrict_oracle(sum, Restriction(3));
  for (const auto& p : all_points(3)) CHECK(identity->evaluate(to_encoding(p)) == sum->evaluate(to_encoding(p)));

  SUBCASE("composition equals one combined restriction") {
    auto f4 = std::make_shared<FunctionEvaluator>(4, [](const Encoding& a) {
      return 1.0 * a[0] + 2.0 * a[1] + 4.0 * a[2] + 8.0 * a[3] + a[0] * a[3];
    });
    auto first = restrict_oracle(f4, Restriction(4, {{0, 1}}));
    // original coordinate 1 is reduced coordinate 0 after fixing coordinate 0
    auto twice = restrict_oracle(first, Restriction(3, {{0, -1}}));
    auto once = restrict_oracle(f4, Restriction(4, {{0, 1}, {1, -1}}));
    REQUIRE(twice->dimension() == 2);
    for (const auto& p : all_points(2)) CHECK(twice->evaluate(to_encoding(p)) == once->evaluate(to_encoding(p)));
  }

  CHECK_THROWS_AS(restrict_oracle(sum, Restriction(4)), std::invalid_argument);
}

TEST_CASE("restriction commutes with the transform") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 9;
    auto plant = std::make_shared<PlantedOracle>(testing::random_expansion(n, 15, 4, rng));
    Restriction::Fixed fixed;
    std::bernoulli_distribution coin(0.5);
    for (Coord c = 0; c < n; ++c) {
      if (coin(rng)) fixed[c] = coin(rng) ? 1 : -1;
    }
    const Restriction rho(n, fixed);
    const auto lhs = exact_transform(*restrict_oracle(plant, rho));
    const auto rhs = restrict_expansion(exact_transform(*plant), rho);
    CHECK(testing::max_term_difference(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("expansion JSON is canonical and round-trips") {
  const FourierExpansion g(4, {{ps({1, 3}), -0.5}, {ps({}), 2.0}, {ps({2}), 1.25}});
  const nlohmann::json j = g;
  CHECK(j.dump() == R"({"n":4,"terms":[{"c":2.0,"s":[]},{"c":1.25,"s":[2]},{"c":-0.5,"s":[1,3]}]})");
  CHECK(j.get<FourierExpansion>() == g);
}
