#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "absaudit/error.hpp"
#include "absaudit/random.hpp"
#include "absaudit/scm.hpp"
#include "support.hpp"

using namespace absaudit;

namespace {

// Independent evaluator: walks the exogenous table directly and resolves each
// variable by recursion on its parents, without the library's topological order.
std::vector<double> enumerate_joint(const Scm& scm) {
  std::vector<std::size_t> exo_shape, endo_shape;
  for (const auto& u : scm.exogenous) exo_shape.push_back(u.domain.size());
  for (const auto& x : scm.endogenous) endo_shape.push_back(x.domain.size());
  std::size_t endo_states = 1;
  for (auto s : endo_shape) endo_states *= s;
  std::vector<double> out(endo_states, 0.0);

  for (std::size_t s = 0; s < scm.exogenous_dist.size(); ++s) {
    const auto u = decode_index(s, exo_shape);
    std::vector<int> value(scm.endogenous.size(), -1);
    std::function<std::size_t(std::size_t)> eval = [&](std::size_t i) -> std::size_t {
      if (value[i] >= 0) return static_cast<std::size_t>(value[i]);
      const auto& m = scm.mechanisms[i];
      const std::size_t ui = *scm.exogenous_for(i);
      std::size_t row = 0;
      for (auto p : m.parents) row = row * scm.endogenous[p].domain.size() + eval(p);
      row = row * scm.exogenous[ui].domain.size() + u[ui];
      value[i] = static_cast<int>(m.table[row]);
      return m.table[row];
    };
    std::vector<std::size_t> x(scm.endogenous.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = eval(i);
    out[encode_index(x, endo_shape)] += scm.exogenous_dist[s];
  }
  return out;
}

std::size_t row_of(const Scm& scm, const Mechanism& m, const std::vector<std::size_t>& x) {
  std::size_t row = 0;
  for (auto p : m.parents) row = row * scm.endogenous[p].domain.size() + x[p];
  return row;
}

}  // namespace

TEST(FiniteDomain, RejectsEmptyAndDuplicateLabels) {
  EXPECT_THROW(FiniteDomain(std::vector<std::string>{}), InvalidArgument);
  EXPECT_THROW(FiniteDomain(std::vector<std::string>{"0", "0"}), InvalidArgument);
  FiniteDomain d({"lo", "mid", "hi"});
  EXPECT_EQ(d.index_of("mid"), 1u);
  EXPECT_FALSE(d.index_of("x").has_value());
}

TEST(IndexHelpers, EncodeDecodeRoundTrip) {
  const std::vector<std::size_t> shape{2, 3, 4};
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(encode_index(decode_index(i, shape), shape), i);
  EXPECT_EQ(encode_index(std::vector<std::size_t>{1, 2, 3}, shape), 23u);
}

TEST(Dag, RejectsCycles) {
  EXPECT_THROW(Dag({"a", "b"}, {{0, 1}, {1, 0}}), InvalidArgument);
  EXPECT_THROW(Dag({"a"}, {{0, 0}}), InvalidArgument);
  Dag g({"a", "b", "c"}, {{1, 2}, {0, 1}, {0, 1}});
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
}

TEST(Scm, LungChainMarginals) {
  auto lung = test_support::load_model(test_support::fixtures_dir() / "appendix" / "lung.scm");
  ASSERT_TRUE(validate_scm(*lung).clean());
  const auto joint = joint_distribution(*lung);
  EXPECT_NEAR(joint.total(), 1.0, 1e-12);
  EXPECT_NEAR(marginal(joint, {"C"}).table[1], 0.5, 1e-12);

  Intervention smoke;
  smoke.assignments["S"] = "1";
  const auto after = joint_distribution(intervene(*lung, smoke));
  EXPECT_NEAR(marginal(after, {"T"}).table[1], 0.9, 1e-12);
  EXPECT_NEAR(marginal(after, {"C"}).table[1], 0.9, 1e-12);
}

TEST(Scm, ValidationFindsDefects) {
  auto lung = *test_support::load_model(test_support::fixtures_dir() / "appendix" / "lung.scm");
  auto bad = lung;
  bad.exogenous_dist[0] += 0.25;
  EXPECT_FALSE(validate_scm(bad).clean());
  bad = lung;
  bad.mechanisms[0].parents.push_back(2);  // S <- C closes a cycle
  EXPECT_FALSE(validate_scm(bad).clean());
  bad = lung;
  bad.mechanisms[1].table.pop_back();
  EXPECT_FALSE(validate_scm(bad).clean());
}

TEST(Scm, TopologicalOrderRespectsParents) {
  std::mt19937 rng(7);
  for (int n = 0; n < 100; ++n) {
    auto scm = random_scm(rng, {1, 6, 3, 0.5, true});
    const auto order = topological_order(*scm);
    std::vector<std::size_t> pos(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (std::size_t i = 0; i < scm->mechanisms.size(); ++i)
      for (auto p : scm->mechanisms[i].parents) EXPECT_LT(pos[p], pos[i]);
  }
}

TEST(Scm, JointMatchesEnumerationOracle) {
  std::mt19937 rng(11);
  for (int n = 0; n < 60; ++n) {
    RandomModelOptions opts{1, 4, 3, 0.5, n % 2 == 0};
    auto scm = random_scm(rng, opts);
    const auto joint = joint_distribution(*scm);
    const auto oracle = enumerate_joint(*scm);
    ASSERT_EQ(joint.table.size(), oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(joint.table[i], oracle[i], 1e-9);
  }
}

TEST(Scm, JointMatchesKernelProduct) {
  std::mt19937 rng(13);
  for (int n = 0; n < 60; ++n) {
    auto scm = random_scm(rng, {1, 4, 2, 0.5, true});
    const auto joint = joint_distribution(*scm);
    std::vector<Matrix> kernels;
    for (const auto& x : scm->endogenous) kernels.push_back(mechanism_kernel(*scm, x.name));
    const auto shape = joint.shape();
    for (std::size_t s = 0; s < joint.table.size(); ++s) {
      const auto x = decode_index(s, shape);
      double p = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) p *= kernels[i](row_of(*scm, scm->mechanisms[i], x), x[i]);
      EXPECT_NEAR(joint.table[s], p, 1e-9);
    }
  }
}

TEST(Scm, KernelRefusesDependentExogenous) {
  auto scm = *test_support::load_model(test_support::fixtures_dir() / "appendix" / "lung.scm");
  // Couple U_S and U_T: all mass on equal values.
  std::fill(scm.exogenous_dist.begin(), scm.exogenous_dist.end(), 0.0);
  scm.exogenous_dist[0] = 0.5;
  scm.exogenous_dist[7] = 0.5;
  EXPECT_THROW(mechanism_kernel(scm, "T"), InvalidArgument);
  EXPECT_NO_THROW(joint_distribution(scm));
}

TEST(Scm, InterventionContract) {
  std::mt19937 rng(17);
  for (int n = 0; n < 150; ++n) {
    auto scm = random_scm(rng, {1, 5, 3, 0.6, n % 3 != 0});
    const auto iota = random_intervention(rng, *scm);
    const Scm once = intervene(*scm, iota);
    const Dag g = underlying_graph(once);
    const auto joint = joint_distribution(once);
    for (const auto& [var, label] : iota.assignments) {
      const std::size_t i = *scm->find_endogenous(var);
      for (const auto& [from, to] : g.edges()) EXPECT_NE(to, i) << "edge into intervened " << var;
      const auto m = marginal(joint, {var});
      const std::size_t v = *scm->endogenous[i].domain.index_of(label);
      for (std::size_t k = 0; k < m.table.size(); ++k) EXPECT_NEAR(m.table[k], k == v ? 1.0 : 0.0, 1e-12);
    }
    EXPECT_EQ(intervene(once, iota), once);
  }
}

TEST(Scm, InterventionRejectsUnknownNames) {
  auto lung = test_support::load_model(test_support::fixtures_dir() / "appendix" / "lung.scm");
  Intervention bad;
  bad.assignments["Q"] = "1";
  EXPECT_THROW(intervene(*lung, bad), InvalidArgument);
  bad.assignments = {{"S", "7"}};
  EXPECT_THROW(intervene(*lung, bad), InvalidArgument);
}

TEST(Scm, EnumerationCapIsEnforced) {
  auto lung = test_support::load_model(test_support::fixtures_dir() / "appendix" / "lung.scm");
  EnumerationLimits tight;
  tight.max_states = 4;
  EXPECT_THROW(joint_distribution(*lung, tight), CapacityError);
}
