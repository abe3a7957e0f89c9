#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "adslab/experiments.hpp"

using namespace adslab;

namespace {

RunContext context(nlohmann::json config) {
  RunContext c;
  c.config = std::move(config);
  return c;
}

const Check* find(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks())
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST(Selector, ParsesKeysAndExpressions) {
  const Selector s = Selector::parse("equidistant:t=pi/6");
  EXPECT_EQ(s.kind, "equidistant");
  EXPECT_DOUBLE_EQ(s.number("t"), std::acos(-1.0) / 6);
  const Selector iso = Selector::parse("isometry:seed=7:base=equidistant:t=pi/6");
  EXPECT_EQ(iso.number("seed"), 7.0);
  EXPECT_EQ(iso.params.at("base"), "equidistant:t=pi/6");
  EXPECT_EQ(Selector::parse("identity").params.size(), 0u);
  EXPECT_THROW(Selector::parse("piecewise:s"), Error);
  EXPECT_THROW(Selector::parse("piecewise").number("s"), Error);
  EXPECT_EQ(Selector::parse("piecewise:s=2").number("x", 5.0), 5.0);
}

TEST(Report, RowsAndExitCodes) {
  RunReport r("demo");
  EXPECT_TRUE(r.near("a", 1.0 + 1e-9, 1.0, 1e-8, Basis::kDerived));
  EXPECT_FALSE(r.at_most("b", 2.0, 1.0, Basis::kTrivial));
  EXPECT_EQ(r.exit_code(), 1);
  const auto j = r.to_json({{"x", 1}});
  EXPECT_EQ(j["checks"][0]["provenance"], "derived");
  EXPECT_EQ(j["checks"][0]["tolerance"], 1e-8);
  EXPECT_EQ(j["checks"][1]["pass"], false);
  EXPECT_EQ(j["exit_code"], 1);

  RunReport e("err");
  e.fail_with(Error(ErrorKind::kNoConvergence, "x"));
  EXPECT_EQ(e.exit_code(), 5);
  RunReport ok("ok");
  ok.holds("c", true, Basis::kTrivial);
  EXPECT_EQ(ok.exit_code(), 0);
  EXPECT_EQ(exit_code(ErrorKind::kChartFailure), 3);
  EXPECT_EQ(exit_code(ErrorKind::kBoundaryMismatch), 4);
  EXPECT_EQ(exit_code(ErrorKind::kInvalidInput), 2);
}

TEST(Qs, BuiltinsAndMalformedInput) {
  const RunReport id = cmd_qs(context({{"map", "identity"}}));
  EXPECT_EQ(id.exit_code(), 0);
  EXPECT_EQ(find(id, "k")->value, 1.0);
  EXPECT_EQ(find(id, "M")->value, 1.0);

  const RunReport pw = cmd_qs(context({{"map", "piecewise:s=2"}}));
  EXPECT_EQ(pw.exit_code(), 0);
  EXPECT_NEAR(find(pw, "k")->value, 2.0, 1e-6);

  const std::string path = ::testing::TempDir() + "adslab_bad.csv";
  std::ofstream(path) << "theta,f_theta\n0.0,0.0\n1.0,abc\n";
  const RunReport bad = cmd_qs(context({{"map", "csv:path=" + path}}));
  EXPECT_EQ(bad.exit_code(), 2);
  ASSERT_TRUE(bad.error());
  EXPECT_NE(bad.error()->message.find("line 3"), std::string::npos) << bad.error()->message;
  std::remove(path.c_str());

  EXPECT_EQ(cmd_qs(context({{"map", "identity"}, {"typo", 1}})).exit_code(), 2);
}

TEST(Hull, IdentityAndRhombus) {
  const RunReport id = cmd_hull(context({{"curve", "identity"}}));
  EXPECT_EQ(id.exit_code(), 0);
  EXPECT_NEAR(find(id, "width")->value, 0.0, 1e-9);
  const RunReport rh = cmd_hull(context({{"curve", "rhombus"}}));
  EXPECT_EQ(rh.exit_code(), 0);
  EXPECT_NEAR(find(rh, "width")->value, kPi / 2, 1e-3);
}

TEST(Glue, FixturesAndMismatch) {
  const RunReport eq = cmd_glue(context({{"fixture", "equidistant:t=pi/6"}, {"isometries", 2}}));
  EXPECT_EQ(eq.exit_code(), 0);
  EXPECT_NEAR(find(eq, "D")->value, std::sqrt(3.0), 1e-8);
  const RunReport iso = cmd_glue(context({{"fixture", "isometry:seed=7:base=equidistant:t=pi/6"}}));
  EXPECT_EQ(iso.exit_code(), 0);
  EXPECT_LE(find(iso, "gluing_deviation")->value, 1e-4);
  EXPECT_EQ(cmd_glue(context({{"fixture", "mismatched:t=pi/6"}})).exit_code(), 4);
  EXPECT_EQ(cmd_glue(context({{"fixture", "equidistant:t=pi/6"}, {"curve", "rhombus"}})).exit_code(), 4);
}

TEST(Solve, ConstantAndErrorPaths) {
  const RunReport c = cmd_solve(context({{"curvature", "constant:k=-4"}, {"grid", 65}}));
  EXPECT_EQ(c.exit_code(), 0);
  EXPECT_LE(find(c, "sup_error")->value, 1e-10);
  EXPECT_EQ(cmd_solve(context({{"curvature", "radial"}, {"grid", 65}, {"max_iter", 1}})).exit_code(), 5);
  EXPECT_EQ(cmd_solve(context({{"curvature", "constant:k=2"}})).exit_code(), 2);
  const RunReport j = cmd_solve(context({{"curvature", {{"expr", "-2 - exp(-d^2)"}, {"epsilon", 0.2}}}, {"grid", 33}}));
  EXPECT_EQ(j.exit_code(), 0);
}

TEST(Pipeline, ValidationAndForcedMismatch) {
  const RunReport zero = cmd_pipeline(context({{"epsilon", 0}}));
  EXPECT_EQ(zero.exit_code(), 2);
  const auto j = zero.to_json({});
  EXPECT_EQ(j["skipped"].size(), 7u);

  const RunReport rh = cmd_pipeline(context({{"curve", "rhombus"}, {"samples", 256}}));
  EXPECT_EQ(rh.exit_code(), 4);
  const auto k = rh.to_json({});
  ASSERT_EQ(k["skipped"].size(), 2u);
  EXPECT_EQ(k["skipped"][0]["stage"], "curvature");
}

TEST(Pipeline, WritesArtifacts) {
  RunContext ctx = context({{"curvature", "constant:k=-4"}, {"grid", 33}});
  ctx.out = std::filesystem::path(::testing::TempDir()) / "adslab_artifacts";
  std::filesystem::remove_all(*ctx.out);
  const RunReport r = cmd_solve(ctx);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_TRUE(std::filesystem::exists(*ctx.out / "u.csv"));
  EXPECT_TRUE(std::filesystem::exists(*ctx.out / "u.json"));
  std::filesystem::remove_all(*ctx.out);
}
