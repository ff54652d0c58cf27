#include <gtest/gtest.h>

#include <cmath>

#include "pqspectra/error.hpp"
#include "pqspectra/expression.hpp"
#include "pqspectra/fields.hpp"
#include "support.hpp"

using namespace pqs;
using pqs::testing::make_config;

TEST(Exponent, ConstantBounds) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  const auto p = constant_exponent(m, 2.0);
  EXPECT_EQ(p.inf(), 2.0);
  EXPECT_EQ(p.sup(), 2.0);
  EXPECT_TRUE(p.is_constant());
}

TEST(Exponent, RangeBounds) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  const auto p = make_exponent(m, Expression::parse("1.5 + 1.7*x*y"));
  EXPECT_DOUBLE_EQ(p.inf(), 1.5);
  EXPECT_DOUBLE_EQ(p.sup(), 3.2);
  for (double c : p.cell_values()) {
    EXPECT_GE(c, p.inf());
    EXPECT_LE(c, p.sup());
  }
}

TEST(Exponent, RejectsOneWithNode) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  try {
    constant_exponent(m, 1.0);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("C+"), std::string::npos);
    EXPECT_NE(msg.find("node 0"), std::string::npos);
  }
  EXPECT_THROW(make_exponent(m, Expression::parse("1 + x")), ValidationError);
  EXPECT_THROW(make_exponent(m, std::vector<double>(3, 2.0)), MeshMismatch);
}

TEST(Exponent, PointwiseMax) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  const auto M = pointwise_max_exponent(constant_exponent(m, 2), constant_exponent(m, 3));
  EXPECT_EQ(M.inf(), 3.0);
  EXPECT_EQ(M.sup(), 3.0);
  const auto p = make_exponent(m, Expression::parse("1.5 + x"));
  const auto same = pointwise_max_exponent(p, p);
  for (std::size_t i = 0; i < p.values().size(); ++i) EXPECT_EQ(same[i], p[i]);
  const auto mixed = pointwise_max_exponent(make_exponent(m, Expression::parse("1.5 + x")), constant_exponent(m, 2));
  EXPECT_EQ(mixed.inf(), 2.0);
  EXPECT_EQ(mixed.sup(), 2.5);
  for (std::size_t i = 0; i < p.values().size(); ++i) {
    EXPECT_GE(mixed[i], p[i]);
    EXPECT_GE(mixed[i], 2.0);
  }
  const auto other = build_rectangle_mesh(1, 1, 5, 5);
  EXPECT_THROW(pointwise_max_exponent(p, constant_exponent(other, 2)), MeshMismatch);
}

TEST(Exponent, CriticalExponent) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  EXPECT_TRUE(std::isinf(critical_exponent(constant_exponent(m, 2), 2).inf));
  EXPECT_DOUBLE_EQ(critical_exponent(constant_exponent(m, 2), 3).inf, 6.0);
  EXPECT_DOUBLE_EQ(critical_exponent(constant_exponent(m, 1.5), 2).inf, 6.0);
  EXPECT_THROW(critical_exponent(constant_exponent(m, 2), 1), ValidationError);
}

TEST(Exponent, CriticalExponentMonotone) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  const auto lo = critical_exponent(make_exponent(m, Expression::parse("1.2 + 0.3*x")), 3);
  const auto hi = critical_exponent(make_exponent(m, Expression::parse("1.3 + 0.5*x")), 3);
  for (std::size_t i = 0; i < lo.values.size(); ++i) EXPECT_GE(hi.values[i], lo.values[i]);
}

TEST(Weight, Validation) {
  const auto m = build_rectangle_mesh(1, 1, 4, 4);
  EXPECT_THROW(make_volume_weight(m, Expression::parse("x")), ValidationError);
  EXPECT_THROW(make_boundary_weight(m, Expression::parse("x - 0.5")), ValidationError);
  EXPECT_THROW(make_boundary_weight(m, Expression::parse("x")), ValidationError);
  const auto zero = make_boundary_weight(m, Expression::parse("0"));
  EXPECT_TRUE(zero.is_zero());
  // Interior values of a boundary weight are never read.
  const auto b = make_boundary_weight(m, Expression::parse("1 + 10*x*(1-x)*y*(1-y)"));
  EXPECT_EQ(b.inf(), 1.0);
  EXPECT_TRUE(b.is_positive());
}

TEST(Config, MixedBoundaryRejected) {
  auto c = make_config({});
  c.beta2 = make_boundary_weight(c.mesh, Expression::parse("0"));
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Classify, PaperCases) {
  EXPECT_EQ(classify_case(make_config({"2", "3", "1.5", "1", "1"})).tag, CaseTag::SublinearA);
  EXPECT_EQ(classify_case(make_config({"2", "3", "4", "1", "1"})).tag, CaseTag::SuperlinearC);
  EXPECT_EQ(classify_case(make_config({"2.5", "4", "4", "1", "0"})).tag, CaseTag::HomogeneousPPlusLtQ);
  EXPECT_EQ(classify_case(make_config({"4", "3", "3", "1", "0"})).tag, CaseTag::HomogeneousQLtPMinus);
  EXPECT_EQ(classify_case(pqs::testing::small_lambda_b()).tag, CaseTag::SmallLambdaB);
}

TEST(Classify, Unclassified) {
  // p - q changes sign: no homogeneous tag.
  EXPECT_EQ(classify_case(make_config({"3 + 2*x", "4", "4", "1", "0"})).tag, CaseTag::Unclassified);
  // q = 2 is excluded from the homogeneous cases.
  EXPECT_EQ(classify_case(make_config({"3", "2", "2", "1", "0"})).tag, CaseTag::Unclassified);
  // Robin with M+ = r-.
  EXPECT_EQ(classify_case(make_config({"2", "3", "3", "1", "1"})).tag, CaseTag::Unclassified);
}

TEST(Classify, SymmetricInPQ) {
  EXPECT_EQ(classify_case(make_config({"3", "2", "1.5", "1", "1"})).tag, CaseTag::SublinearA);
  EXPECT_EQ(classify_case(make_config({"2 + x", "3", "1.5", "1", "1"})).tag,
            classify_case(make_config({"3", "2 + x", "1.5", "1", "1"})).tag);
}

TEST(Classify, RecordsMargin) {
  auto c = make_config({"2", "3", "1.5", "1", "1"});
  c.dimension = 3;  // M* = 3*3/0 -> infinite; use p = q = 2 instead
  auto d = make_config({"2", "2", "1.5", "1", "1"});
  d.dimension = 3;
  EXPECT_DOUBLE_EQ(classify_case(d).subcritical_margin, 6.0 - 1.5);
  EXPECT_TRUE(std::isinf(classify_case(c).subcritical_margin));
}

TEST(Classify, CaseTagNames) {
  for (CaseTag t : {CaseTag::SublinearA, CaseTag::SmallLambdaB, CaseTag::SuperlinearC, CaseTag::HomogeneousPPlusLtQ,
                    CaseTag::HomogeneousQLtPMinus, CaseTag::Unclassified})
    EXPECT_EQ(case_from_string(to_string(t)), t);
  EXPECT_THROW(case_from_string("Sublinear"), ValidationError);
}

TEST(Expression, Evaluates) {
  EXPECT_DOUBLE_EQ(Expression::parse("2 + 0.5*x")(1, 0), 2.5);
  EXPECT_DOUBLE_EQ(Expression::parse("hypot(x, y) ^ 2")(3, 4), 25.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("max(1, min(x, 3))")(5, 0), 3.0);
  EXPECT_NEAR(Expression::parse("cos(pi*x)")(1, 0), -1.0, 1e-15);
  EXPECT_TRUE(Expression::parse("2*pi").is_constant());
  EXPECT_FALSE(Expression::parse("y").is_constant());
}

TEST(Expression, ErrorsCarryColumn) {
  try {
    Expression::parse("2 + * x");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Expression::parse("foo(x)"), ValidationError);
  EXPECT_THROW(Expression::parse("(x"), ValidationError);
  EXPECT_THROW(Expression::parse(""), ValidationError);
}
