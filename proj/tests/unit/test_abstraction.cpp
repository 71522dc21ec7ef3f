#include <gtest/gtest.h>

#include <random>

#include "absaudit/abstraction.hpp"
#include "absaudit/error.hpp"
#include "absaudit/random.hpp"
#include "support.hpp"

using namespace absaudit;
namespace ts = test_support;

namespace {

Abstraction appendix(const std::string& stem) { return ts::load_abstraction(ts::fixtures_dir() / "appendix" / (stem + ".abs")); }

Variable numbered(const std::string& name, std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return {name, FiniteDomain(labels)};
}

// Every function from {0..n-1} to {0..m-1}, visited as a digit vector in base m.
template <typename F>
void for_each_function(std::size_t n, std::size_t m, F&& f) {
  std::vector<std::size_t> digits(n, 0);
  while (true) {
    f(digits);
    std::size_t k = 0;
    while (k < n && ++digits[k] == m) digits[k++] = 0;
    if (k == n) return;
  }
}

}  // namespace

TEST(Abstraction, RelevantSetAndPreimage) {
  const auto a = appendix("nodes-functionality-b");
  EXPECT_EQ(relevant_set(a), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(preimage(a, "S'"), (std::vector<std::size_t>{0}));
  const auto b = appendix("nodes-functionality-a");
  EXPECT_EQ(preimage(b, "S'"), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(block_domain(*b.source, std::vector<std::string>{"T", "S"}).values(),
            (std::vector<std::string>{"0,0", "0,1", "1,0", "1,1"}));
}

TEST(Abstraction, PreimageRefusesStochasticRows) {
  auto a = appendix("nodes-functionality-a");
  a.structural.node_map(1, 0) = 0.5;
  a.structural.node_map(1, 1) = 0.5;
  EXPECT_THROW(preimage(a, "S'"), InvalidArgument);
}

TEST(Abstraction, ValidationDefects) {
  auto a = appendix("nodes-functionality-a");
  EXPECT_TRUE(validate_abstraction(a).clean());

  auto bad = a;
  bad.structural.node_map(0, 1) = 0.5;
  EXPECT_TRUE(validate_abstraction(bad).mentions("normalization defect"));

  const auto reversed = appendix("edges-functoriality-b");
  const auto report = validate_abstraction(reversed);
  EXPECT_FALSE(report.has_errors());
  EXPECT_TRUE(report.mentions("endpoint defect"));

  auto outcomes = appendix("outcomes-functionality-a");
  outcomes.outcomes->per_variable[0].block = {};
  EXPECT_TRUE(validate_abstraction(outcomes).has_errors());
}

TEST(Pushforward, MatchesPreimageSummation) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 1; m <= 4; ++m) {
      Distribution d;
      d.scope = {numbered("X", n)};
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += d.table.emplace_back(unit(rng));
      for (auto& p : d.table) p /= total;
      for_each_function(n, m, [&](const std::vector<std::size_t>& f) {
        Matrix k(n, m);
        for (std::size_t i = 0; i < n; ++i) k(i, f[i]) = 1.0;
        const auto out = pushforward(d, k, {numbered("Y", m)});
        for (std::size_t y = 0; y < m; ++y) {
          double expected = 0.0;
          for (std::size_t x = 0; x < n; ++x)
            if (f[x] == y) expected += d.table[x];
          EXPECT_NEAR(out.table[y], expected, 1e-9);
        }
      });
    }
}

TEST(Pushforward, PartialMapsNeedRenormalization) {
  Distribution d;
  d.scope = {numbered("X", 3)};
  d.table = {0.2, 0.3, 0.5};
  auto k = Matrix::from_function({std::nullopt, 0, 1}, 2);
  EXPECT_THROW(pushforward(d, k, {numbered("Y", 2)}), InvalidArgument);
  const auto out = pushforward(d, k, {numbered("Y", 2)}, PushOptions{true});
  EXPECT_NEAR(out.table[0], 0.375, 1e-12);
  EXPECT_NEAR(out.table[1], 0.625, 1e-12);
}

TEST(Pushforward, SplittingRow) {
  Distribution d;
  d.scope = {numbered("X", 2)};
  d.table = {0.4, 0.6};
  Matrix k(2, 2);
  k(0, 0) = k(0, 1) = 0.5;
  k(1, 1) = 1.0;
  const auto out = pushforward(d, k, {numbered("Y", 2)});
  EXPECT_NEAR(out.table[0], 0.2, 1e-12);
  EXPECT_NEAR(out.table[1], 0.8, 1e-12);
}

TEST(PushDistribution, OutcomeFixture) {
  const auto a = appendix("outcomes-functionality-a");
  const auto out = push_distribution(a, joint_distribution(*a.source));
  ASSERT_EQ(out.table.size(), 2u);
  EXPECT_NEAR(out.table[0], 0.5, 1e-12);
  EXPECT_NEAR(out.table[1], 0.5, 1e-12);
}

TEST(Composition, IdentityIsNeutral) {
  std::mt19937 rng(31);
  int checked = 0;
  for (int n = 0; n < 300; ++n) {
    const Abstraction a = random_abstraction(rng);
    if (a.direction != Direction::MicroToMacro) continue;
    if (a.outcomes && a.outcomes->granularity == Granularity::Global) continue;
    const Abstraction right = compose_abstractions(a, identity_abstraction(a.target));
    const Abstraction left = compose_abstractions(identity_abstraction(a.source), a);
    EXPECT_TRUE(approx_equal(right.structural.node_map, a.structural.node_map, 1e-12));
    EXPECT_TRUE(approx_equal(left.structural.node_map, a.structural.node_map, 1e-12));
    EXPECT_EQ(right.structural.edge_map.has_value(), a.structural.edge_map.has_value());
    if (a.structural.edge_map && relevant_set(a).size() == a.source->endogenous.size()) {
      EXPECT_EQ(*left.structural.edge_map, *a.structural.edge_map);
    }
    if (!a.outcomes) continue;
    const auto source = joint_distribution(*a.source);
    try {
      const auto direct = push_distribution(a, source, PushOptions{true});
      const auto via = push_distribution(right, source, PushOptions{true});
      ASSERT_EQ(direct.table.size(), via.table.size());
      for (std::size_t i = 0; i < direct.table.size(); ++i) EXPECT_NEAR(direct.table[i], via.table[i], 1e-9);
      ++checked;
    } catch (const InvalidArgument&) {
      // Every outcome was dropped; nothing to renormalize.
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Composition, PushThroughTwoStages) {
  // smoking-3 -> smoking-macro-3 (0,0,1) then smoking-macro-3 -> smoking-macro-2 (0,1,1).
  const auto first = appendix("outcomes-surjectivity-b");
  auto second = identity_abstraction(first.target);
  second.target = ts::load_model(ts::fixtures_dir() / "appendix" / "smoking-macro-2.scm");
  second.structural.edge_map.reset();
  second.outcomes->per_variable[0].matrix = Matrix::from_function({0, 1, 1}, 2);
  ASSERT_FALSE(validate_abstraction(second).has_errors());
  const auto both = compose_abstractions(first, second);
  EXPECT_EQ(both.outcomes->per_variable[0].matrix, Matrix::from_function({0, 0, 1}, 2));
  EXPECT_THROW(compose_abstractions(second, first), InvalidArgument);
}
