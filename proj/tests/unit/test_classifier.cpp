#include <algorithm>
#include <random>

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "hsgd/classifier.hpp"
#include "hsgd/error.hpp"

using namespace hsgd;
using fixtures::range;
using testing::code_of;

namespace {

std::vector<double> v1(double x) { return {x}; }

Scale two_props(double split_hi) {
  return Scale{{Proposition{"p1", {range(0, 0.0, split_hi)}, "S0", 0},
                Proposition{"p2", {range(0, 1.0, 2.0)}, "S1", 1}}};
}

Classifier random_classifier(std::mt19937_64& rng, std::size_t dim) {
  // Non-overlapping boxes: slice parameter 0 into consecutive cells and give
  // each cell random bounds on the other parameters.
  Classifier c;
  c.dimension = dim;
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const int n = std::uniform_int_distribution<int>(1, 5)(rng);
  double lo = u(rng);
  for (int i = 0; i < n; ++i) {
    const double hi = lo + std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    Proposition p{"k" + std::to_string(i), {range(0, lo, hi)}, "s" + std::to_string(i), i};
    for (std::size_t d = 1; d < dim; ++d) {
      const double a = u(rng);
      p.predicates.push_back(range(d, a, a + std::uniform_real_distribution<double>(1.0, 15.0)(rng)));
    }
    c.root.propositions.push_back(p);
    lo = hi + (std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 0.0 : 0.5);
  }
  // Refine the first proposition into two halves.
  const auto& first = c.root.propositions.front();
  const double a = *first.predicates[0].lower;
  const double b = *first.predicates[0].upper;
  const double mid = (a + b) / 2;
  Proposition left = first;
  left.id = "k0a";
  left.state = "s0a";
  left.predicates[0] = range(0, a, mid);
  Proposition right = first;
  right.id = "k0b";
  right.state = "s0b";
  right.state_rank = 1;
  right.predicates[0] = range(0, mid, b);
  c.refinements["k0"].propositions = {left, right};
  return c;
}

}  // namespace

TEST_CASE("validate_scale") {
  CHECK(validate_scale(two_props(1.0), 1).ok());

  const auto overlap = validate_scale(two_props(1.5), 1);
  REQUIRE(overlap.has_code("scale.overlap"));
  CHECK(overlap.mentions("[1,1.5)"));
  CHECK(overlap.issues.front().subjects == std::vector<std::string>{"p1", "p2"});

  Scale reversed{{Proposition{"K1", {range(0, 0.0, 1.0)}, "S2", 2},
                  Proposition{"K2", {range(0, 1.0, 2.0)}, "S1", 1}}};
  CHECK(validate_scale(reversed, 1).mentions("order mismatch"));

  Scale empty{{Proposition{"E", {range(0, 2.0, 1.0)}, "S0", 0}}};
  const auto r = validate_scale(empty, 1);
  CHECK(r.has_code("scale.empty_domain"));
  CHECK(r.has_code("scale.predicate"));

  Scale beyond{{Proposition{"B", {range(3, 0.0, 1.0)}, "S0", 0}}};
  CHECK(validate_scale(beyond, 1).has_code("scale.parameter"));
}

TEST_CASE("classify") {
  const auto c = fixtures::demo3_classifier();
  CHECK(classify(c, v1(15)) == StateId("S1"));
  CHECK(classify(c, v1(10)) == StateId("S1"));
  CHECK(classify(c, v1(20)) == StateId("S2"));
  CHECK(classify(c, v1(-1e9)) == StateId("S0"));

  Classifier gapped = c;
  gapped.root.propositions[0].predicates[0].lower = 0.0;
  CHECK_FALSE(classify(gapped, v1(-5)).has_value());

  CHECK(classify(fixtures::two_level_classifier(), v1(17)) == StateId("S1b"));
  CHECK(classify(fixtures::two_level_classifier(), v1(12)) == StateId("S1a"));
  CHECK(classify(fixtures::two_level_classifier(), v1(5)) == StateId("S0"));

  const std::vector<double> two{1.0, 2.0};
  CHECK(code_of([&] { classify(c, two); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("a refinement that does not match stops at the parent") {
  auto c = fixtures::two_level_classifier();
  c.refinements["K1"].propositions.pop_back();  // [15, 20) no longer refined
  CHECK(classify(c, v1(17)) == StateId("S1"));
}

TEST_CASE("validate_classifier") {
  CHECK(validate_classifier(fixtures::two_level_classifier()).ok());

  auto wide = fixtures::two_level_classifier();
  wide.refinements["K1"].propositions[1].predicates[0].upper = 25.0;
  CHECK(validate_classifier(wide).has_code("classifier.not_nested"));

  auto orphan = fixtures::demo3_classifier();
  orphan.refinements["nope"].propositions = {Proposition{"z", {range(0, 0.0, 1.0)}, "Z", 0}};
  CHECK(validate_classifier(orphan).has_code("classifier.orphan"));

  auto dup = fixtures::two_level_classifier();
  dup.refinements["K1"].propositions[0].id = "K0";
  CHECK(validate_classifier(dup).has_code("classifier.duplicate"));
}

TEST_CASE("a valid scale matches at most one proposition") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const auto c = random_classifier(rng, dim);
    REQUIRE(validate_classifier(c).ok());
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(dim);
      for (auto& xi : x) xi = u(rng);
      const auto matches = std::count_if(c.root.propositions.begin(), c.root.propositions.end(),
                                         [&](const Proposition& p) { return p.holds(x); });
      CHECK(matches <= 1);
    }
  }
}

TEST_CASE("classify_batch agrees with classify") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const auto c = random_classifier(rng, dim);
    const std::size_t rows = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
    std::vector<double> data(rows * dim);
    for (auto& x : data) x = u(rng);
    const auto batch = classify_batch(c, data);
    REQUIRE(batch.size() == rows);
    for (std::size_t r = 0; r < rows; ++r) {
      CHECK(batch[r] == classify(c, std::span<const double>(data).subspan(r * dim, dim)));
    }
  }
  const std::vector<double> ragged{1.0, 2.0, 3.0};
  auto c2 = fixtures::demo3_classifier();
  c2.dimension = 2;
  CHECK(code_of([&] { classify_batch(c2, ragged); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("recognize_dynamics") {
  SUBCASE("monotone") {
    const std::vector<double> s{1, 2, 3, 4, 5};
    const auto p = recognize_dynamics(s, 0.0);
    CHECK(p.trend == Trend::monotone_increasing);
    CHECK(p.critical_points.empty());
    CHECK_FALSE(p.cyclic);
    CHECK(p.min_value == 1);
    CHECK(p.max_value == 5);
  }
  SUBCASE("single peak") {
    const std::vector<double> s{0, 1, 4, 9, 4, 1, 0};
    const auto p = recognize_dynamics(s, 0.0);
    CHECK(p.trend == Trend::non_monotone);
    CHECK(p.critical_points == std::vector<std::size_t>{3});
    CHECK_FALSE(p.cyclic);
  }
  SUBCASE("cyclic") {
    const std::vector<double> s{0, 1, 0, -1, 0, 1, 0, -1, 0};
    const auto p = recognize_dynamics(s, 0.0);
    CHECK(p.cyclic);
    CHECK(p.period == doctest::Approx(4.0));
    CHECK(p.critical_points == std::vector<std::size_t>{1, 3, 5, 7});
  }
  SUBCASE("inflexion") {
    const std::vector<double> s{0, 1, 3, 6, 8, 9};
    const auto p = recognize_dynamics(s, 0.0);
    CHECK(p.trend == Trend::monotone_increasing);
    CHECK(p.inflexions == std::vector<std::size_t>{3});
  }
  SUBCASE("tolerance flattens noise") {
    const std::vector<double> s{1.0, 1.05, 0.98, 1.02, 1.0};
    CHECK(recognize_dynamics(s, 0.1).trend == Trend::constant);
    CHECK(recognize_dynamics(s, 0.0).trend == Trend::non_monotone);
  }
  SUBCASE("too short") {
    const std::vector<double> s{1, 2};
    CHECK(code_of([&] { recognize_dynamics(s, 0.0); }) == ErrorCode::series_too_short);
  }
}

TEST_CASE("reversing a series swaps the trend and keeps critical points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 30)(rng);
    std::vector<double> s(n);
    const int mode = trial % 3;
    double acc = 0;
    for (auto& x : s) {
      acc += mode == 0 ? std::abs(u(rng)) : mode == 1 ? -std::abs(u(rng)) : u(rng);
      x = acc;
    }
    const double tol = trial % 2 == 0 ? 0.0 : 0.5;
    std::vector<double> r(s.rbegin(), s.rend());
    const auto ps = recognize_dynamics(s, tol);
    const auto pr = recognize_dynamics(r, tol);
    const auto swapped = [](Trend t) {
      if (t == Trend::monotone_increasing) return Trend::monotone_decreasing;
      if (t == Trend::monotone_decreasing) return Trend::monotone_increasing;
      return t;
    };
    CHECK(pr.trend == swapped(ps.trend));
    CHECK(pr.critical_points.size() == ps.critical_points.size());
  }
}

TEST_CASE("reestimate_state") {
  const auto c = fixtures::demo3_classifier();
  auto gapped = c;
  gapped.root.propositions[1].predicates[0].upper = 15.0;  // gap [15, 20)

  auto r = reestimate_state("S1", v1(12), v1(13), c);
  CHECK(r.state == "S1");
  CHECK(r.flags == ReestimateFlags{});

  r = reestimate_state("S1", v1(12), v1(17), gapped);
  CHECK(r.state == "S1");
  CHECK(r.flags.gap_hold);
  CHECK_FALSE(r.flags.rank_jump);

  r = reestimate_state("S0", v1(5), v1(25), c);
  CHECK(r.state == "S2");
  CHECK(r.flags.rank_jump);

  CHECK(code_of([&] { reestimate_state("S9", v1(5), v1(5), c); }) == ErrorCode::unknown_state);
}

TEST_CASE("reestimate_state is the identity on unchanged parameters") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 40.0);
  const auto c = fixtures::two_level_classifier();
  for (int k = 0; k < 200; ++k) {
    const auto x = v1(u(rng));
    const auto s = classify(c, x);
    REQUIRE(s.has_value());
    const auto r = reestimate_state(*s, x, x, c);
    CHECK(r.state == *s);
    CHECK(r.flags == ReestimateFlags{});
  }
}

TEST_CASE("build_canonical_from_history") {
  const auto c = fixtures::demo3_classifier();
  const TimePartition p{{0, 2, 4}};

  SUBCASE("four objects climbing S0 -> S1 -> S2") {
    std::vector<ObjectHistory> hs;
    for (int o = 0; o < 4; ++o) {
      hs.push_back(ObjectHistory{"o" + std::to_string(o), {{0, {5.0}}, {2, {15.0}}, {4, {25.0}}}});
    }
    const auto built = build_canonical_from_history("h", hs, c, p);
    CHECK_MESSAGE(built.report.ok(), format_report(built.report));
    const auto& d = built.diagram;
    CHECK(d.states_by_rank() == std::vector<StateId>{"S0", "S1", "S2"});
    REQUIRE(d.arcs.size() == 2);
    CHECK(d.arcs[0].source == "S0");
    CHECK(d.arcs[0].target == "S1");
    CHECK(d.arcs[1].source == "S1");
    CHECK(d.arcs[1].target == "S2");
    CHECK(d.mu.at(0) == Distribution{{"S0", 1.0}});
    CHECK(d.mu.at(1) == Distribution{{"S1", 1.0}});
    CHECK(d.mu.at(2) == Distribution{{"S2", 1.0}});
    CHECK(d.initial == "S0");
    CHECK(d.final_state == "S2");
    CHECK(d.population == 4);
  }
  SUBCASE("one object that never moves") {
    std::vector<ObjectHistory> hs{{"o", {{0, {1.0}}, {2, {2.0}}, {4, {3.0}}}}};
    const auto built = build_canonical_from_history("h", hs, c, p);
    CHECK(built.report.ok());
    CHECK(built.diagram.states.size() == 1);
    CHECK(built.diagram.arcs.empty());
    for (int i = 0; i < 3; ++i) CHECK(built.diagram.mu.at(i) == Distribution{{"S0", 1.0}});
  }
  SUBCASE("a fall back produces a backstep arc") {
    std::vector<ObjectHistory> hs{{"o", {{0, {1.0}}, {2, {15.0}}, {4, {3.0}}}}};
    const auto built = build_canonical_from_history("h", hs, c, p);
    const auto* back = built.diagram.find_arc("b_S1_S0");
    REQUIRE(back != nullptr);
    CHECK(back->kind == ArcKind::backstep);
  }
  SUBCASE("missing boundary sample") {
    std::vector<ObjectHistory> hs{{"o", {{0, {1.0}}, {4, {3.0}}}}};
    CHECK(code_of([&] { build_canonical_from_history("h", hs, c, p); }) == ErrorCode::unsampled_boundary);
  }
}

TEST_CASE("validate_matrix") {
  const auto c = fixtures::demo3_classifier();
  ClassificationMatrix m{{"young", "old"}, {{"K0", "K2"}}};
  CHECK(validate_matrix(m, c).ok());
  m.cells[0][1] = "K9";
  CHECK(validate_matrix(m, c).has_code("matrix.rule"));
}
