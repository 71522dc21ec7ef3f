#include <gtest/gtest.h>

#include <random>

#include "absaudit/error.hpp"
#include "absaudit/format.hpp"
#include "absaudit/random.hpp"
#include "support.hpp"

using namespace absaudit;
namespace ts = test_support;

namespace {

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const char* kTiny = R"(absaudit-format 1
model tiny

endogenous X   : 0 1
exogenous  U_X : 0 1 -> X

distribution U_X
  0 : 0.25
  1 : 0.75
end

mechanism X | U_X
  0 : 0
  1 : 1
end
)";

}  // namespace

TEST(Format, CommittedFixturesAreCanonical) {
  std::size_t models = 0, abstractions = 0;
  for (const auto& p : ts::files_with_extension(ts::fixtures_dir(), ".scm")) {
    const std::string text = ts::slurp(p);
    EXPECT_EQ(emit_model(parse_model(text)), text) << p;
    ++models;
  }
  for (const auto& p : ts::files_with_extension(ts::fixtures_dir(), ".abs")) {
    const std::string text = ts::slurp(p);
    EXPECT_EQ(emit_abstraction(ts::load_abstraction(p)), text) << p;
    ++abstractions;
  }
  EXPECT_GE(models, 11u);
  EXPECT_GE(abstractions, 24u);
}

TEST(Format, TablesAreCanonical) {
  for (const auto& f : {"structural.tbl", "distributional.tbl"}) {
    const std::string text = ts::slurp(ts::data_dir() / f);
    EXPECT_EQ(emit_matrix(parse_matrix(text)), text) << f;
  }
}

TEST(Format, RandomModelsRoundTrip) {
  std::mt19937 rng(8);
  for (int n = 0; n < 100; ++n) {
    auto scm = random_scm(rng, {1, 4, 3, 0.5, n % 2 == 0});
    const std::string once = emit_model(*scm);
    const Scm back = parse_model(once);
    EXPECT_EQ(emit_model(back), once);
    EXPECT_EQ(back.endogenous, scm->endogenous);
    EXPECT_EQ(back.mechanisms, scm->mechanisms);
    for (std::size_t i = 0; i < back.exogenous_dist.size(); ++i)
      EXPECT_EQ(back.exogenous_dist[i], scm->exogenous_dist[i]);
  }
}

TEST(Format, RandomAbstractionsRoundTrip) {
  std::mt19937 rng(9);
  for (int n = 0; n < 200; ++n) {
    Abstraction a = random_abstraction(rng);
    a.source_ref = "source.scm";
    a.target_ref = "target.scm";
    const std::string once = emit_abstraction(a);
    const Abstraction back = parse_abstraction(once, a.source, a.target);
    EXPECT_EQ(emit_abstraction(back), once);
    EXPECT_TRUE(back == a) << once;
  }
}

TEST(Format, DistributionRoundTrip) {
  const Scm tiny = parse_model(kTiny);
  const auto d = joint_distribution(tiny);
  const std::string text = emit_distribution(d);
  const auto back = parse_distribution(text, tiny);
  EXPECT_EQ(back.table, d.table);
  EXPECT_EQ(emit_distribution(back), text);
}

TEST(Format, CommentsAndBlankLinesAreIgnored) {
  std::string text = kTiny;
  text.insert(text.find("endogenous"), "# the only variable\n\n");
  EXPECT_EQ(emit_model(parse_model(text)), kTiny);
}

TEST(Format, ParseErrorsCarryLocations) {
  EXPECT_EQ(parse_error_line("model x\n"), 1u);  // missing header

  std::string bad = kTiny;
  bad.replace(bad.find("0.75"), 4, "0.7");  // mass 0.95, reported at the block
  EXPECT_EQ(parse_error_line(bad), 7u);

  bad = kTiny;
  bad.replace(bad.find("  1 : 1\nend"), 7, "  1 : 5");  // value outside the domain
  EXPECT_EQ(parse_error_line(bad), 14u);

  bad = kTiny;
  bad.replace(bad.find("-> X"), 4, "-> Y");
  EXPECT_EQ(parse_error_line(bad), 5u);

  bad = kTiny;
  bad.erase(bad.rfind("end"));
  EXPECT_EQ(parse_error_line(bad), 12u);  // the unterminated block

  try {
    parse_model(std::string(kTiny) + "mechanism X | U_X\n  0 : 0\n  1 : 1\nend\n");
    FAIL() << "duplicate mechanism accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 16u);
    EXPECT_GE(e.column(), 1u);
  }
}

TEST(Format, AbstractionErrors) {
  const auto dir = ts::fixtures_dir() / "appendix";
  auto src = ts::load_model(dir / "lung.scm");
  auto tgt = ts::load_model(dir / "lung-macro-sc.scm");
  std::string text = ts::slurp(dir / "nodes-functionality-a.abs");
  EXPECT_NO_THROW(parse_abstraction(text, src, tgt));

  std::string bad = text;
  bad.replace(bad.find("C -> C'"), 7, "C -> Q'");
  try {
    parse_abstraction(bad, src, tgt);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 10u);
  }
  bad = text;
  bad.replace(bad.find("micro-to-macro"), 14, "sideways");
  EXPECT_THROW(parse_abstraction(bad, src, tgt), ParseError);
}

TEST(Format, MatrixErrors) {
  std::string text = ts::slurp(ts::data_dir() / "distributional.tbl");
  text.replace(text.find("✓", text.find("Functionality")), std::string("✓").size(), "?");
  EXPECT_THROW(parse_matrix(text), ParseError);
}

TEST(Format, ShortestProbabilities) {
  EXPECT_EQ(format_probability(0.1), "0.1");
  EXPECT_EQ(format_probability(1.0), "1");
  EXPECT_EQ(std::stod(format_probability(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Dot, DeterministicAndWellFormed) {
  const auto a = ts::load_abstraction(ts::fixtures_dir() / "appendix" / "nodes-functionality-a.abs");
  const std::string once = emit_dot(a);
  EXPECT_EQ(emit_dot(ts::load_abstraction(ts::fixtures_dir() / "appendix" / "nodes-functionality-a.abs")), once);
  EXPECT_EQ(once.rfind("digraph", 0), 0u);
  EXPECT_NE(once.find("cluster_source"), std::string::npos);
  EXPECT_NE(once.find("cluster_target"), std::string::npos);
  EXPECT_LT(once.find("cluster_source"), once.find("cluster_target"));
  EXPECT_NE(once.find("dotted"), std::string::npos);
  EXPECT_EQ(std::count(once.begin(), once.end(), '{'), std::count(once.begin(), once.end(), '}'));

  const std::string model = emit_dot(*a.source);
  EXPECT_NE(model.find("\"S\" -> \"T\""), std::string::npos) << model;
}
