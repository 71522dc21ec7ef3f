#include <gtest/gtest.h>

#include <random>
#include <set>

#include "absaudit/error.hpp"
#include "absaudit/free_category.hpp"
#include "absaudit/random.hpp"

using namespace absaudit;

namespace {

void dfs(const Dag& g, std::size_t at, std::size_t goal, std::vector<std::size_t>& path,
         std::vector<Morphism>& out) {
  if (at == goal) {
    out.push_back(Morphism{path});
    return;
  }
  for (const auto& [a, b] : g.edges()) {
    if (a != at) continue;
    path.push_back(b);
    dfs(g, b, goal, path, out);
    path.pop_back();
  }
}

std::vector<Morphism> brute_force_paths(const Dag& g, std::size_t u, std::size_t v) {
  std::vector<std::size_t> path{u};
  std::vector<Morphism> out;
  dfs(g, u, v, path, out);
  std::sort(out.begin(), out.end());
  return out;
}

// Path counts by dynamic programming over a reverse topological sweep.
std::vector<std::vector<std::size_t>> path_counts(const Dag& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> count(n, std::vector<std::size_t>(n, 0));
  std::vector<std::size_t> indeg(n, 0), order;
  for (const auto& [a, b] : g.edges()) ++indeg[b];
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) order.push_back(i);
  for (std::size_t k = 0; k < order.size(); ++k)
    for (const auto& [a, b] : g.edges())
      if (a == order[k] && --indeg[b] == 0) order.push_back(b);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = *it;
    count[u][u] = 1;
    for (const auto& [a, b] : g.edges())
      if (a == u)
        for (std::size_t w = 0; w < n; ++w) count[u][w] += count[b][w];
  }
  return count;
}

Dag chain() { return Dag({"S", "T", "C"}, {{0, 1}, {1, 2}}); }

}  // namespace

TEST(HomSet, MatchesDepthFirstOracle) {
  std::mt19937 rng(2024);
  for (int n = 0; n < 250; ++n) {
    const std::size_t nodes = 1 + rng() % 8;
    const Dag g = random_dag(rng, nodes, std::uniform_real_distribution<double>(0.1, 0.8)(rng));
    const auto counts = path_counts(g);
    for (std::size_t u = 0; u < nodes; ++u)
      for (std::size_t v = 0; v < nodes; ++v) {
        const auto hom = hom_set(g, u, v);
        EXPECT_EQ(hom.morphisms, brute_force_paths(g, u, v));
        EXPECT_EQ(hom.morphisms.size(), counts[u][v]);
        for (const auto& m : hom.morphisms) EXPECT_TRUE(is_path(g, m));
      }
  }
}

TEST(HomSet, IdentityAndEmpty) {
  const Dag g = chain();
  EXPECT_EQ(hom_set(g, 1, 1).morphisms, std::vector<Morphism>{Morphism::identity(1)});
  EXPECT_TRUE(hom_set(g, 2, 0).morphisms.empty());
  EXPECT_EQ(hom_set(g, 0, 2).morphisms.size(), 1u);
}

TEST(HomSet, CapacityLimit) {
  // A ladder of diamonds has 2^k paths from the first node to the last.
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t k = 12;
  for (std::size_t i = 0; i <= 3 * k; ++i) names.push_back("n" + std::to_string(i));
  for (std::size_t d = 0; d < k; ++d) {
    const std::size_t s = 3 * d;
    edges.insert(edges.end(), {{s, s + 1}, {s, s + 2}, {s + 1, s + 3}, {s + 2, s + 3}});
  }
  const Dag g(names, edges);
  EnumerationLimits limits;
  limits.max_morphisms = 1000;
  EXPECT_THROW(hom_set(g, 0, 3 * k, limits), CapacityError);
  EXPECT_EQ(hom_set(g, 0, 3 * k).morphisms.size(), 1u << k);
}

TEST(Compose, ConcatenatesAndChecksEndpoints) {
  const Morphism st{{0, 1}}, tc{{1, 2}};
  EXPECT_EQ(compose(st, tc), (Morphism{{0, 1, 2}}));
  EXPECT_EQ(compose(Morphism::identity(0), st), st);
  EXPECT_EQ(compose(st, Morphism::identity(1)), st);
  EXPECT_THROW(compose(tc, st), InvalidArgument);
}

TEST(Compose, Associative) {
  std::mt19937 rng(5);
  for (int n = 0; n < 50; ++n) {
    const Dag g = random_dag(rng, 6, 0.6);
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b)
        for (std::size_t c = 0; c < 6; ++c)
          for (std::size_t d = 0; d < 6; ++d) {
            const auto p = hom_set(g, a, b).morphisms;
            const auto q = hom_set(g, b, c).morphisms;
            const auto r = hom_set(g, c, d).morphisms;
            if (p.empty() || q.empty() || r.empty()) continue;
            EXPECT_EQ(compose(compose(p[0], q[0]), r[0]), compose(p[0], compose(q[0], r[0])));
          }
  }
}

TEST(Exponential, RoundTrip) {
  const Dag g = chain();
  EXPECT_EQ(to_exponential(g, Morphism{{0, 1, 2}}), "S^T^C");
  EXPECT_EQ(to_exponential(g, Morphism::identity(1)), "T^T");
  EXPECT_EQ(parse_exponential(g, "S^S"), Morphism::identity(0));
  EXPECT_EQ(parse_exponential(g, "S^T^C"), (Morphism{{0, 1, 2}}));
  EXPECT_THROW(parse_exponential(g, "S^C"), InvalidArgument);
  EXPECT_THROW(parse_exponential(g, "S^X"), InvalidArgument);

  std::mt19937 rng(3);
  for (int n = 0; n < 30; ++n) {
    const Dag h = random_dag(rng, 5, 0.5);
    for (std::size_t u = 0; u < 5; ++u)
      for (std::size_t v = 0; v < 5; ++v)
        for (const auto& m : hom_set(h, u, v).morphisms) EXPECT_EQ(parse_exponential(h, to_exponential(h, m)), m);
  }
}

TEST(GraphHomomorphism, StrictAndPathValued) {
  const Dag g = chain();
  const Dag sc({"S'", "C'"}, {{0, 1}});
  // S,T -> S' collapses the edge S->T onto an identity.
  EXPECT_FALSE(is_graph_homomorphism({0, 0, 1}, g, sc, HomomorphismMode::Strict));
  EXPECT_TRUE(is_graph_homomorphism({0, 0, 1}, g, sc, HomomorphismMode::PathValued));
  EXPECT_FALSE(is_graph_homomorphism({1, 1, 0}, g, sc, HomomorphismMode::PathValued));
  EXPECT_TRUE(is_graph_homomorphism({0, 1, 2}, g, g, HomomorphismMode::Strict));
}
